"""
Модуль многощелевого эксперимента
Проекторы на подмножества щелей, равномерное состояние, вероятности исходов,
перепись форм и члены интерференции Соркина всех порядков
"""

import itertools
import logging
from functools import lru_cache
from math import comb, factorial, perm
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional

import numpy as np
from pydantic import BaseModel, field_validator, model_validator
from scipy.special import stirling2

from src.census import equality_pattern
from src.hypercube import (
    DHMap,
    DHState,
    EffectTensor,
    dh_apply,
    dh_map_from_generator,
    effect_after_map,
    effect_of_state,
    pair,
    point_effect,
    pure_state,
)
from src.karoubi import classical_extract, quantum_extract_map, quantum_extract_state
from src.kernel import choi_apply, fourier_structure

logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX_DIM = 6
VANISHING_TOL = 1e-12


class SlitConfig(BaseModel):
    """
    Размерность и непустое подмножество меток щелей из {1..d}
    """
    dim: int
    subset: FrozenSet[int]

    @field_validator("subset", mode="before")
    @classmethod
    def _distinct_labels(cls, value: Any) -> FrozenSet[int]:
        labels = list(value)
        if len(set(labels)) != len(labels):
            raise ValueError(f"Метки щелей повторяются: {labels}")
        return frozenset(labels)

    @model_validator(mode="after")
    def _check_range(self) -> "SlitConfig":
        if self.dim < 1:
            raise ValueError(f"Размерность должна быть не меньше 1, получено {self.dim}")
        if not self.subset:
            raise ValueError("Подмножество щелей пусто")
        outside = sorted(x for x in self.subset if not 1 <= x <= self.dim)
        if outside:
            raise ValueError(f"Метки {outside} вне диапазона 1..{self.dim}")
        return self

    @property
    def size(self) -> int:
        return len(self.subset)


class ProbabilityRecord(BaseModel):
    size: int
    value: float
    expected: float


class SorkinRecord(BaseModel):
    order: int
    value: float
    closed_form: float
    lhs: float
    rhs: float


class ShapeRecord(BaseModel):
    size: int
    shape: str
    count: int


class SorkinDecomposition(BaseModel):
    order: int
    lhs: float
    rhs: float
    value: float


class InterferenceReport(BaseModel):
    dim: int
    kmax: int
    probabilities: List[ProbabilityRecord]
    sorkin: List[SorkinRecord]
    shapes: List[ShapeRecord]
    invariance_max_deviation: Optional[float] = None
    third_order: bool
    fourth_order: bool
    higher_orders_vanish: bool


def _config(subset: Iterable[int], d: int) -> SlitConfig:
    if isinstance(subset, SlitConfig):
        return subset
    return SlitConfig(dim=d, subset=subset)


def _sub_subsets(subset: FrozenSet[int]) -> Iterable[FrozenSet[int]]:
    labels = sorted(subset)
    for size in range(1, len(labels) + 1):
        for combination in itertools.combinations(labels, size):
            yield frozenset(combination)


def projector(subset: Iterable[int], d: int) -> DHMap:
    """
    Удвоенный проектор P_U: (P_U ρ)_{abcd} = [a, b, c, d ∈ U] ρ_{abcd}

    Args:
        subset: непустое подмножество меток {1..d}
        d: размерность

    Returns:
        DHMap: идемпотент с генератором diag(1_U)
    """
    config = _config(subset, d)
    mask = np.zeros(d)
    mask[[x - 1 for x in config.subset]] = 1.0
    return dh_map_from_generator(np.diag(mask).reshape(1, d, 1, d), 1, 1)


def uniform_state(d: int) -> DHState:
    """
    Равномерное состояние ρ₊: все компоненты равны 1/d²
    """
    if d < 1:
        raise ValueError(f"Размерность должна быть не меньше 1, получено {d}")
    return pure_state(np.full(d, 1 / np.sqrt(d)))


@lru_cache(maxsize=1024)
def _probability(subset: FrozenSet[int], d: int) -> float:
    rho = uniform_state(d)
    return pair(effect_of_state(rho), dh_apply(projector(subset, d), rho))


def slit_probability(subset: Iterable[int], d: int) -> float:
    """
    Вероятность исхода "+" при открытых щелях U: <ρ₊ | P_U ρ₊> = (#U)⁴/d⁴
    """
    config = _config(subset, d)
    return _probability(config.subset, d)


def fourier_readout(subset: Iterable[int], d: int) -> float:
    """
    Та же вероятность, прочитанная точечным эффектом фурье-структуры в равномерной точке
    """
    config = _config(subset, d)
    # столбец d-1 фурье-базиса - равномерный вектор
    effect = point_effect(d - 1, fourier_structure(d))
    return pair(effect, dh_apply(projector(config.subset, d), uniform_state(d)))


def shape_census(subset: Iterable[int], d: int) -> Dict[str, int]:
    """
    Число кортежей U⁴ каждой формы (шаблона равенств)

    Формула k(k-1)...(k-m+1) для форм с m различными значениями сверяется
    с полным перебором U⁴.

    Raises:
        RuntimeError: при расхождении формулы и перебора
    """
    config = _config(subset, d)
    counts: Dict[str, int] = {}
    for indices in itertools.product(sorted(config.subset), repeat=4):
        shape = equality_pattern(indices)
        counts[shape] = counts.get(shape, 0) + 1

    for shape, count in counts.items():
        expected = perm(config.size, len(set(shape)))
        if count != expected:
            logger.error(f"Форма {shape}: перебор дал {count}, формула {expected}")
            raise RuntimeError(f"Перепись форм {shape} расходится с формулой")
    return dict(sorted(counts.items()))


def sorkin_closed_form(k: int, d: int) -> float:
    """
    I_k = k! S(4, k) / d⁴, S - числа Стирлинга второго рода
    """
    return factorial(k) * float(stirling2(4, k, exact=True)) / d ** 4


def _inclusion_exclusion(config: SlitConfig, probability: Callable[[FrozenSet[int]], float], exhaustive: bool) -> float:
    k = config.size
    if exhaustive:
        return sum((-1) ** (k - len(v)) * probability(v) for v in _sub_subsets(config.subset))
    labels = sorted(config.subset)
    return sum(
        (-1) ** (k - j) * comb(k, j) * probability(frozenset(labels[:j])) for j in range(1, k + 1)
    )


def sorkin_interference(subset: Iterable[int], d: int, exhaustive: bool = False) -> float:
    """
    Член интерференции I_U = Σ_{∅≠V⊆U} (-1)^{#U-#V} P[+|V]

    Args:
        subset: подмножество щелей
        d: размерность
        exhaustive: перебирать все подмножества вместо представителей по размеру

    Returns:
        float: значение I_U
    """
    config = _config(subset, d)
    return _inclusion_exclusion(config, lambda v: _probability(v, d), exhaustive)


def sorkin_decomposition(subset: Iterable[int], d: int) -> SorkinDecomposition:
    """
    Две стороны тождества Соркина: P[+|U] против -Σ_{∅≠V⊊U} (-1)^{#U-#V} P[+|V]
    """
    config = _config(subset, d)
    lhs = slit_probability(config, d)
    value = sorkin_interference(config, d)
    return SorkinDecomposition(order=config.size, lhs=lhs, rhs=lhs - value, value=value)


def sorkin_effect(subset: Iterable[int], d: int) -> EffectTensor:
    """
    Эффект включений-исключений: Σ_V (-1)^{#U-#V} <ρ₊| ∘ P_V
    """
    config = _config(subset, d)
    base = effect_of_state(uniform_state(d))
    tensor = np.zeros((d,) * 4, dtype=np.complex128)
    for v in _sub_subsets(config.subset):
        sign = (-1) ** (config.size - len(v))
        tensor += sign * effect_after_map(base, projector(v, d)).tensor
    return EffectTensor(dim=d, tensor=tensor, kind="inclusion_exclusion", label=str(sorted(config.subset)))


# --- Сравнение с квантовой и классической теориями ----------------------------------


def quantum_slit_probability(subset: Iterable[int], d: int) -> float:
    """
    Вероятность в квантовой теории: <σ₊, E_U(σ₊)>, σ₊ и E_U извлечены через hypdecoh
    """
    config = _config(subset, d)
    sigma = quantum_extract_state(uniform_state(d)).mat
    channel = quantum_extract_map(projector(config.subset, d))
    image = choi_apply(channel, sigma, d, d)
    return float(np.real(np.trace(sigma.conj().T @ image)))


def classical_slit_probability(subset: Iterable[int], d: int) -> float:
    """
    Вероятность в классической теории: Σ_x p_x (M p)_x, p_x = ρ₊_{xxxx}
    """
    config = _config(subset, d)
    rho = uniform_state(d)
    p = np.real(np.array([rho.tensor[x, x, x, x] for x in range(d)]))
    m = classical_extract(projector(config.subset, d)).mat
    return float(p @ (m @ p))


def quantum_sorkin(subset: Iterable[int], d: int) -> float:
    config = _config(subset, d)
    return _inclusion_exclusion(config, lambda v: quantum_slit_probability(v, d), exhaustive=False)


def classical_sorkin(subset: Iterable[int], d: int) -> float:
    config = _config(subset, d)
    return _inclusion_exclusion(config, lambda v: classical_slit_probability(v, d), exhaustive=False)


# --- Отчет ---------------------------------------------------------------------


def _invariance_deviation(d: int, kmax: int) -> float:
    deviation = 0.0
    for v in _sub_subsets(frozenset(range(1, d + 1))):
        if len(v) > kmax:
            continue
        deviation = max(deviation, abs(_probability(v, d) - len(v) ** 4 / d ** 4))
    return deviation


def hierarchy_report(d: int, kmax: int, exhaustive: Optional[bool] = None) -> InterferenceReport:
    """
    Отчет по иерархии интерференции для порядков 1..kmax

    Args:
        d: размерность
        kmax: наибольший порядок (не больше d)
        exhaustive: проверять зависимость P только от #U перебором всех
            подмножеств (по умолчанию при d <= 6)

    Returns:
        InterferenceReport: вероятности, члены Соркина, перепись форм и флаги

    Raises:
        ValueError: если kmax > d или kmax < 1
    """
    if not 1 <= kmax <= d:
        raise ValueError(f"Порядок kmax={kmax} должен лежать в 1..{d}")
    if exhaustive is None:
        exhaustive = d <= EXHAUSTIVE_MAX_DIM

    probabilities = []
    sorkin = []
    shapes = []
    for k in range(1, kmax + 1):
        subset = frozenset(range(1, k + 1))
        probabilities.append(
            ProbabilityRecord(size=k, value=slit_probability(subset, d), expected=k ** 4 / d ** 4)
        )
        decomposition = sorkin_decomposition(subset, d)
        sorkin.append(
            SorkinRecord(
                order=k,
                value=decomposition.value,
                closed_form=sorkin_closed_form(k, d),
                lhs=decomposition.lhs,
                rhs=decomposition.rhs,
            )
        )
        for shape, count in shape_census(subset, d).items():
            shapes.append(ShapeRecord(size=k, shape=shape, count=count))

    values = {record.order: record.value for record in sorkin}
    report = InterferenceReport(
        dim=d,
        kmax=kmax,
        probabilities=probabilities,
        sorkin=sorkin,
        shapes=shapes,
        invariance_max_deviation=_invariance_deviation(d, kmax) if exhaustive else None,
        third_order=abs(values.get(3, 0.0)) > VANISHING_TOL,
        fourth_order=abs(values.get(4, 0.0)) > VANISHING_TOL,
        higher_orders_vanish=all(abs(v) <= VANISHING_TOL for k, v in values.items() if k >= 5),
    )
    logger.info(f"Иерархия d={d}, kmax={kmax}: члены Соркина {[round(v, 12) for v in values.values()]}")
    return report


class SorkinReport(BaseModel):
    dim: int
    terms: List[SorkinRecord]


def sorkin_report(d: int, kmax: int) -> SorkinReport:
    """
    Члены Соркина порядков 1..kmax с обеими сторонами тождества
    """
    if not 1 <= kmax <= d:
        raise ValueError(f"Порядок kmax={kmax} должен лежать в 1..{d}")
    terms = []
    for k in range(1, kmax + 1):
        decomposition = sorkin_decomposition(range(1, k + 1), d)
        terms.append(
            SorkinRecord(
                order=k,
                value=decomposition.value,
                closed_form=sorkin_closed_form(k, d),
                lhs=decomposition.lhs,
                rhs=decomposition.rhs,
            )
        )
    return SorkinReport(dim=d, terms=terms)
