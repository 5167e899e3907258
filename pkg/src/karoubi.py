"""
Модуль декогеренции и гипердекогеренции
Идемпотенты и три вида объектов теории (гиперкубы плотности, квантовые
и классические системы), извлечение классических и квантовых процессов,
подъем квантовых состояний и свидетели причинности
"""

import logging
from typing import Any, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationInfo, field_validator, model_validator

from src.config import default_tol, get_settings
from src.hypercube import (
    STATE_AXES,
    DHMap,
    DHState,
    EffectTensor,
    conjugate_by_structures,
    dh_apply,
    dh_map_from_generator,
    dh_state_from_psd_family,
    forest_effect,
    forest_tensor,
    from_structure_coordinates,
    pair,
    point_effect,
    point_state,
    pure_state,
    random_dh_state,
    to_structure_coordinates,
    tree_on_bridge_effect,
    tree_on_bridge_tensor,
    zero_state,
)
from src.kernel import (
    ClassicalStructure,
    DensityMatrix,
    KrausMap,
    as_tensor,
    computational_structure,
    is_psd,
    partial_trace_out,
)
from src.utils.generators import derive_seeds

logger = logging.getLogger(__name__)

EXTRACTION_TOL = 1e-9
WITNESS_MARGIN = 0.1
LIFT_WEIGHT_EXPONENT = 0.25

ObjectKind = Literal["identity", "decoh", "hypdecoh"]


def _structure_or_default(structure: Optional[ClassicalStructure], d: int) -> ClassicalStructure:
    if structure is None:
        return computational_structure(d)
    if structure.dim != d:
        raise ValueError(f"Размерность структуры {structure.dim} не совпадает с {d}")
    return structure


# --- Идемпотенты -----------------------------------------------------------------


def decoh_map(structure: ClassicalStructure, d: int) -> DHMap:
    """
    Декогеренция: в координатах структуры (decoh ρ)_{abcd} = [a=b=c=d] ρ_{aaaa}

    Args:
        structure: классическая структура Z
        d: размерность

    Returns:
        DHMap: идемпотент с генератором (копирующий паук)
    """
    structure = _structure_or_default(structure, d)
    copy = np.zeros((d, d, 1, d), dtype=np.complex128)
    for x in range(d):
        copy[x, x, 0, x] = 1.0
    phi = dh_map_from_generator(copy, d, 1)
    return conjugate_by_structures(phi, structure, structure)


def hypdecoh_map(structure: ClassicalStructure, d: int) -> DHMap:
    """
    Гипердекогеренция: в координатах структуры (hypdecoh ρ)_{abcd} = [a=d][b=c] ρ_{abba}
    """
    structure = _structure_or_default(structure, d)
    tensor = np.zeros((d,) * (2 * STATE_AXES), dtype=np.complex128)
    x, y = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    tensor[x, y, y, x, x, y, y, x] = 1.0
    phi = DHMap(in_dim=d, out_dim=d, tensor=tensor)
    return conjugate_by_structures(phi, structure, structure)


class KaroubiObject(BaseModel):
    """
    Объект теории: несущая размерность и идемпотент
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int
    kind: ObjectKind = "identity"
    structure: Optional[ClassicalStructure] = None

    @model_validator(mode="after")
    def _check_structure(self) -> "KaroubiObject":
        if self.kind != "identity" and self.structure is None:
            raise ValueError(f"Для объекта вида {self.kind} нужна классическая структура")
        if self.structure is not None and self.structure.dim != self.dim:
            raise ValueError(f"Размерность структуры {self.structure.dim} не совпадает с {self.dim}")
        return self

    def idempotent(self) -> DHMap:
        if self.kind == "decoh":
            return decoh_map(self.structure, self.dim)
        if self.kind == "hypdecoh":
            return hypdecoh_map(self.structure, self.dim)
        return dh_map_from_generator(np.eye(self.dim).reshape(1, self.dim, 1, self.dim), 1, 1)

    def discard(self) -> EffectTensor:
        return object_discard(self)


def hyper_quantum(d: int) -> KaroubiObject:
    return KaroubiObject(dim=d)


def quantum(structure: ClassicalStructure) -> KaroubiObject:
    return KaroubiObject(dim=structure.dim, kind="hypdecoh", structure=structure)


def classical(structure: ClassicalStructure) -> KaroubiObject:
    return KaroubiObject(dim=structure.dim, kind="decoh", structure=structure)


def object_discard(obj: KaroubiObject) -> EffectTensor:
    """
    Отбрасывание объекта: "лес" для гиперкубов, "дерево на мосту" для
    квантовых и классических систем
    """
    if obj.kind == "identity":
        return forest_tensor(obj.dim)
    return tree_on_bridge_tensor(obj.structure)


# --- Классические системы ---------------------------------------------------------


class StochasticExtract(BaseModel):
    """
    Матрица неотрицательных весов M_{yx} классического процесса
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rows: int
    cols: int
    mat: np.ndarray

    @field_validator("mat", mode="before")
    @classmethod
    def _to_real(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=np.float64)
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _check_nonnegative(self, info: ValidationInfo) -> "StochasticExtract":
        if self.mat.shape != (self.rows, self.cols):
            raise ValueError(f"Матрица формы {self.mat.shape}, ожидалось {(self.rows, self.cols)}")
        scale = max(1.0, float(np.max(np.abs(self.mat), initial=0.0)))
        if self.mat.size and np.min(self.mat) < -default_tol((info.context or {}).get("tol")) * scale:
            raise ValueError(f"Отрицательный элемент {np.min(self.mat):.3e} в классическом процессе")
        return self


def classical_extract(
    phi: DHMap,
    structure_in: Optional[ClassicalStructure] = None,
    structure_out: Optional[ClassicalStructure] = None,
    tol: Optional[float] = None,
) -> StochasticExtract:
    """
    Классический процесс decoh ∘ Φ ∘ decoh: M_{yx} = <точка y | Φ(точка x)>

    Raises:
        ValueError: если элемент отрицателен сверх допуска
    """
    structure_in = _structure_or_default(structure_in, phi.in_dim)
    structure_out = _structure_or_default(structure_out, phi.out_dim)

    mat = np.zeros((phi.out_dim, phi.in_dim))
    effects = [point_effect(y, structure_out) for y in range(phi.out_dim)]
    for x in range(phi.in_dim):
        image = dh_apply(phi, point_state(x, structure_in))
        for y, effect in enumerate(effects):
            mat[y, x] = pair(effect, image, tol)

    scale = max(1.0, float(np.max(np.abs(mat))))
    if np.min(mat) < -default_tol(tol) * scale:
        logger.error(f"Классический процесс содержит отрицательный элемент {np.min(mat):.3e}")
        raise ValueError(f"Отрицательный элемент {np.min(mat):.3e} в извлеченном процессе")
    return StochasticExtract.model_validate(
        {"rows": phi.out_dim, "cols": phi.in_dim, "mat": mat}, context={"tol": tol}
    )


def classical_embed(
    m: Any,
    structure_in: Optional[ClassicalStructure] = None,
    structure_out: Optional[ClassicalStructure] = None,
) -> DHMap:
    """
    Вложение неотрицательной матрицы как отображения классических систем

    Генератор: G = вход x выход, f_{(x,y), y, 0, x} = M_{yx}^{1/4}.

    Raises:
        ValueError: при отрицательных элементах
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"Ожидалась матрица, получена форма {m.shape}")
    if np.min(m) < 0:
        raise ValueError(f"Матрица содержит отрицательный элемент {np.min(m):.3e}")

    out_dim, in_dim = m.shape
    structure_in = _structure_or_default(structure_in, in_dim)
    structure_out = _structure_or_default(structure_out, out_dim)

    f = np.zeros((in_dim * out_dim, out_dim, 1, in_dim), dtype=np.complex128)
    for x in range(in_dim):
        for y in range(out_dim):
            f[x * out_dim + y, y, 0, x] = m[y, x] ** 0.25
    phi = dh_map_from_generator(f, in_dim * out_dim, 1)
    return conjugate_by_structures(phi, structure_in, structure_out)


# --- Квантовые системы ------------------------------------------------------------


def _extract_matrix(tensor: np.ndarray) -> np.ndarray:
    d = tensor.shape[0]
    x, y = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.asarray(tensor[y, x, x, y])


def _extract_raw(rho: DHState, structure: ClassicalStructure) -> np.ndarray:
    local = _extract_matrix(to_structure_coordinates(rho, structure).tensor)
    if structure.is_computational:
        return local
    basis = np.asarray(structure.basis)
    return basis @ local @ basis.conj().T


def _inject_raw(sigma: np.ndarray, structure: ClassicalStructure) -> DHState:
    d = structure.dim
    if not structure.is_computational:
        basis = np.asarray(structure.basis)
        sigma = basis.conj().T @ sigma @ basis
    tensor = np.zeros((d,) * STATE_AXES, dtype=np.complex128)
    x, y = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    tensor[x, y, y, x] = sigma[y, x]
    return from_structure_coordinates(DHState(dim=d, tensor=tensor), structure)


def quantum_extract_state(
    rho: DHState, structure: Optional[ClassicalStructure] = None, tol: float = EXTRACTION_TOL
) -> DensityMatrix:
    """
    Квантовое состояние, несомое гиперкубом: σ_{xy} = ρ_{yxxy} (в координатах структуры)

    Args:
        rho: состояние
        structure: структура гипердекогеренции (по умолчанию стандартная)
        tol: допуск положительности

    Returns:
        DensityMatrix: матрица со следом, равным значению "дерева на мосту"

    Raises:
        ValueError: если результат не положителен в пределах допуска
    """
    structure = _structure_or_default(structure, rho.dim)
    sigma = _extract_raw(rho, structure)
    scale = max(1.0, float(np.max(np.abs(sigma))))
    if not is_psd(sigma, tol * scale):
        logger.error("Извлеченная матрица не положительна: вход несогласован")
        raise ValueError("Извлеченная матрица не является положительной")
    return DensityMatrix.model_validate(
        {"dim": rho.dim, "mat": (sigma + sigma.conj().T) / 2}, context={"tol": tol}
    )


def quantum_inject_state(sigma: Union[DensityMatrix, Any], structure: Optional[ClassicalStructure] = None) -> DHState:
    """
    Неподвижное относительно hypdecoh состояние, несущее матрицу σ
    """
    matrix = sigma.mat if isinstance(sigma, DensityMatrix) else as_tensor(sigma)
    structure = _structure_or_default(structure, matrix.shape[0])
    return _inject_raw(np.asarray(matrix), structure)


def quantum_lift_state(
    sigma: Union[DensityMatrix, Any],
    structure: Optional[ClassicalStructure] = None,
    cutoff: Optional[float] = None,
    weight_exponent: float = LIFT_WEIGHT_EXPONENT,
) -> DHState:
    """
    Подъем квантового состояния в гиперкуб плотности

    σ = Σ_y p_y |γ_y><γ_y|; для каждого y берется вектор u_y с элементами
    √<ψ_x|γ_y> (главная ветвь) и вес α_y = p_y^{1/4}; сертификат
    M^y = α_y² conj(u_y) u_yᵀ в координатах структуры.

    Args:
        sigma: положительная матрица
        structure: классическая структура Z
        cutoff: порог собственных значений (по умолчанию DH_LIFT_CUTOFF)
        weight_exponent: показатель веса α_y = p_y^exponent

    Returns:
        DHState: состояние с сертификатом

    Raises:
        ValueError: если σ не положительна
    """
    matrix = sigma.mat if isinstance(sigma, DensityMatrix) else as_tensor(sigma)
    d = matrix.shape[0]
    structure = _structure_or_default(structure, d)
    if cutoff is None:
        cutoff = get_settings().DH_LIFT_CUTOFF
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if not is_psd(matrix, default_tol() * scale):
        raise ValueError("Подъем определен только для положительных матриц")

    hermitian = (matrix + matrix.conj().T) / 2
    eigenvalues, eigenvectors = np.linalg.eigh(hermitian)
    basis = np.asarray(structure.basis)

    family = []
    for p, gamma in zip(eigenvalues, eigenvectors.T):
        if p <= cutoff:
            continue
        coefficients = basis.conj().T @ gamma
        u = np.sqrt(coefficients.astype(np.complex128))
        alpha_squared = p ** (2 * weight_exponent)
        family.append(alpha_squared * np.outer(np.conj(u), u))

    if not family:
        logger.warning("Все собственные значения ниже порога, подъем нулевой")
        return zero_state(d)

    lifted = dh_state_from_psd_family(family)
    return from_structure_coordinates(lifted, structure)


def quantum_extract_map(
    phi: DHMap,
    structure_in: Optional[ClassicalStructure] = None,
    structure_out: Optional[ClassicalStructure] = None,
) -> np.ndarray:
    """
    Матрица Чоя квантового процесса σ -> extract(Φ(inject(σ)))

    Индексы матрицы Чоя: (выход, вход) x (выход, вход).
    """
    structure_in = _structure_or_default(structure_in, phi.in_dim)
    structure_out = _structure_or_default(structure_out, phi.out_dim)

    c4 = np.zeros((phi.out_dim, phi.in_dim, phi.out_dim, phi.in_dim), dtype=np.complex128)
    for i in range(phi.in_dim):
        for j in range(phi.in_dim):
            unit = np.zeros((phi.in_dim, phi.in_dim), dtype=np.complex128)
            unit[i, j] = 1.0
            image = dh_apply(phi, _inject_raw(unit, structure_in))
            c4[:, i, :, j] = _extract_raw(image, structure_out)
    size = phi.out_dim * phi.in_dim
    return c4.reshape(size, size)


def quantum_kraus_of_generator(phi: DHMap) -> KrausMap:
    """
    Операторы Крауса процесса hypdecoh ∘ Φ ∘ hypdecoh (стандартные структуры):
    K^{g,e,e'}_{xb} = f~_{g x e b} f~_{g x e' b}
    """
    if phi.generator is None:
        raise ValueError("У отображения нет генератора")
    f = phi.generator.in_bridge_coordinates()
    kraus = []
    for g in range(phi.generator.g_dim):
        for e in range(phi.generator.e_dim):
            for e_prime in range(phi.generator.e_dim):
                kraus.append(f[g, :, e, :] * f[g, :, e_prime, :])
    return KrausMap(in_dim=phi.in_dim, out_dim=phi.out_dim, kraus=kraus)


def is_trace_preserving_choi(c: np.ndarray, in_dim: int, out_dim: int, tol: Optional[float] = None) -> bool:
    reduced = partial_trace_out(c, in_dim, out_dim)
    return bool(np.max(np.abs(reduced - np.eye(in_dim))) <= default_tol(tol))


def alternative_extract_state(rho: DHState) -> np.ndarray:
    """
    Отвергнутое спаривание [a=b][c=d]: τ_{xy} = ρ_{xxyy}

    Эти компоненты всегда вещественны и не могут нести общую матрицу плотности.
    """
    d = rho.dim
    x, y = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.asarray(rho.tensor[x, x, y, y])


# --- Причинность ------------------------------------------------------------------


class WitnessRecord(BaseModel):
    effect: str
    state: str
    value: float
    deviation: float


class CausalityReport(BaseModel):
    dim: int
    trials: int
    forest_max_error: float
    tol: float
    margin: float
    witnesses: List[WitnessRecord]
    passed: bool


def causality_witness(d: int, trials: int, seed: int, tol: Optional[float] = None) -> CausalityReport:
    """
    Свидетели причинности

    (i) "лес" равен 1 на случайных нормированных состояниях;
    (ii) "дерево на мосту" и дополняющий эффект отличаются от 1 хотя бы на 0.1
    на некотором нормированном состоянии, то есть не являются отбрасыванием.
    """
    if d < 2:
        raise ValueError(f"Свидетели требуют d >= 2, получено {d}")
    tol = default_tol(tol)

    forest_max_error = 0.0
    for index, trial_seed in enumerate(derive_seeds(seed, trials)):
        rho = random_dh_state(d, 1 + index % 3, trial_seed)
        forest_max_error = max(forest_max_error, abs(forest_effect(rho) - 1.0))

    structure = computational_structure(d)
    candidates = {
        "uniform": pure_state(np.full(d, 1 / np.sqrt(d))),
        "point": point_state(0, structure),
    }
    evaluators = {
        "tree_on_bridge": lambda rho: tree_on_bridge_effect(rho, structure),
        "extension": lambda rho: forest_effect(rho) - tree_on_bridge_effect(rho, structure),
    }

    witnesses = []
    for effect_name, evaluate in evaluators.items():
        record = None
        for state_name, rho in candidates.items():
            value = evaluate(rho)
            record = WitnessRecord(
                effect=effect_name, state=state_name, value=value, deviation=abs(value - 1.0)
            )
            if record.deviation >= WITNESS_MARGIN:
                break
        witnesses.append(record)

    passed = forest_max_error <= tol and all(w.deviation >= WITNESS_MARGIN for w in witnesses)
    logger.info(f"Причинность d={d}: ошибка леса {forest_max_error:.3e}, свидетели {[w.value for w in witnesses]}")
    return CausalityReport(
        dim=d,
        trials=trials,
        forest_max_error=forest_max_error,
        tol=tol,
        margin=WITNESS_MARGIN,
        witnesses=witnesses,
        passed=passed,
    )
