"""
Модуль гиперкубов плотности
Состояния и отображения теории двойной дилатации, их порождающие формы,
композиция и тензорное произведение, эффекты отбрасывания, нормировка
и проверка симметрии Z2 x Z2
"""

import logging
from typing import Any, Dict, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.config import default_tol
from src.kernel import (
    ClassicalStructure,
    Tensor,
    apply_to_axis,
    as_tensor,
    computational_structure,
    contract,
    is_psd,
    rearrange,
    tensor_from_json,
    tensor_to_json,
)
from src.utils.generators import complex_gaussian, derive_seeds, make_rng, random_psd

logger = logging.getLogger(__name__)

STATE_AXES = 4
MAP_AXES = 8
PSD_FAMILY_TOL = 1e-8

# Пары осей для подстановки состояния во вход отображения
INPUT_PAIRS = [(4, 0), (5, 1), (6, 2), (7, 3)]
FULL_PAIRS = [(0, 0), (1, 1), (2, 2), (3, 3)]

EffectKind = Literal[
    "forest",
    "tree_on_bridge",
    "extension",
    "dagger_of_state",
    "point",
    "composite",
    "inclusion_exclusion",
]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


class DHState(BaseModel):
    """
    Гиперкуб плотности: тензор ранга 4 с осями (x00, x01, x10, x11)

    Сертификат - семейство положительных матриц M^g,
    для которых ρ_{abcd} = Σ_g M^g_{ab} conj(M^g_{cd}).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int
    tensor: np.ndarray
    certificate: Optional[Tuple[np.ndarray, ...]] = None

    @field_validator("tensor", mode="before")
    @classmethod
    def _to_tensor(cls, value: Any) -> np.ndarray:
        return _frozen(as_tensor(value))

    @field_validator("certificate", mode="before")
    @classmethod
    def _to_certificate(cls, value: Any) -> Optional[Tuple[np.ndarray, ...]]:
        if value is None:
            return None
        return tuple(_frozen(as_tensor(m)) for m in value)

    @model_validator(mode="after")
    def _check_shapes(self) -> "DHState":
        if self.dim < 1:
            raise ValueError(f"Размерность должна быть положительной: {self.dim}")
        if self.tensor.shape != (self.dim,) * STATE_AXES:
            raise ValueError(
                f"Тензор состояния должен иметь форму {(self.dim,) * STATE_AXES}, "
                f"получено {self.tensor.shape}"
            )
        if self.certificate is not None:
            for m in self.certificate:
                if m.shape != (self.dim, self.dim):
                    raise ValueError(f"Матрица сертификата формы {m.shape}, ожидалось {(self.dim, self.dim)}")
        return self


class Generator(BaseModel):
    """
    Порождающая тройка отображения: f с осями (g, k, e, h) и мост на G
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    f: np.ndarray
    g_dim: int
    e_dim: int
    bridge: ClassicalStructure

    @field_validator("f", mode="before")
    @classmethod
    def _to_tensor(cls, value: Any) -> np.ndarray:
        return _frozen(as_tensor(value))

    @model_validator(mode="after")
    def _check_shapes(self) -> "Generator":
        if self.f.ndim != 4:
            raise ValueError(f"Тензор f должен иметь 4 оси (g, k, e, h), получено {self.f.ndim}")
        if self.f.shape[0] != self.g_dim or self.f.shape[2] != self.e_dim:
            raise ValueError(
                f"Форма f {self.f.shape} не согласована с g_dim={self.g_dim}, e_dim={self.e_dim}"
            )
        if self.bridge.dim != self.g_dim:
            raise ValueError(
                f"Размерность моста {self.bridge.dim} не совпадает с g_dim={self.g_dim}"
            )
        return self

    @property
    def out_dim(self) -> int:
        return self.f.shape[1]

    @property
    def in_dim(self) -> int:
        return self.f.shape[3]

    def in_bridge_coordinates(self) -> np.ndarray:
        """
        f в координатах моста: f~ = B† f по оси g
        """
        if self.bridge.is_computational:
            return np.asarray(self.f)
        return apply_to_axis(self.f, 0, self.bridge.basis.conj().T)


class DHMap(BaseModel):
    """
    Отображение гиперкубов плотности: тензор ранга 8, оси (a', b', c', d', a, b, c, d)
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    in_dim: int
    out_dim: int
    tensor: np.ndarray
    generator: Optional[Generator] = None

    @field_validator("tensor", mode="before")
    @classmethod
    def _to_tensor(cls, value: Any) -> np.ndarray:
        return _frozen(as_tensor(value))

    @model_validator(mode="after")
    def _check_shapes(self) -> "DHMap":
        expected = (self.out_dim,) * STATE_AXES + (self.in_dim,) * STATE_AXES
        if self.tensor.shape != expected:
            raise ValueError(f"Тензор отображения должен иметь форму {expected}, получено {self.tensor.shape}")
        return self


class EffectTensor(BaseModel):
    """
    Эффект: тензор ранга 4, спаривание с состоянием - полная свертка
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int
    tensor: np.ndarray
    kind: EffectKind
    label: str = ""

    @field_validator("tensor", mode="before")
    @classmethod
    def _to_tensor(cls, value: Any) -> np.ndarray:
        return _frozen(as_tensor(value))

    @model_validator(mode="after")
    def _check_shape(self) -> "EffectTensor":
        if self.tensor.shape != (self.dim,) * STATE_AXES:
            raise ValueError(f"Тензор эффекта должен иметь форму {(self.dim,) * STATE_AXES}")
        return self


class SymmetryReport(BaseModel):
    """
    Отклонения от трех нетривиальных симметрий τ(0,1), τ(1,0), τ(1,1)
    """
    deviations: Dict[str, float]
    tol: float
    passed: bool
    diagonal_min: float
    diagonal_imag: float
    cross_imag: float


# --- Состояния ---------------------------------------------------------------


def _compile_state(ms: Sequence[np.ndarray]) -> np.ndarray:
    stack = np.stack([np.asarray(m, dtype=np.complex128) for m in ms])
    return contract(stack, np.conj(stack), [(0, 0)])


def dh_state_from_psd_family(ms: Sequence[Any], tol: float = PSD_FAMILY_TOL) -> DHState:
    """
    Состояние по семейству положительных матриц: ρ = Σ_g M^g ⊗ conj(M^g)

    Args:
        ms: матрицы M^g одинаковой размерности
        tol: допуск проверки положительности

    Returns:
        DHState: состояние с сертификатом

    Raises:
        ValueError: если матрица не положительна или размерности различаются
    """
    matrices = [as_tensor(m) for m in ms]
    if not matrices:
        raise ValueError("Семейство матриц пусто")

    d = matrices[0].shape[0] if matrices[0].ndim == 2 else -1
    for index, m in enumerate(matrices):
        if m.ndim != 2 or m.shape != (d, d):
            raise ValueError(f"Матрица {index} формы {m.shape}, ожидалось {(d, d)}")
        scale = max(1.0, float(np.max(np.abs(m))))
        if not is_psd(m, tol * scale):
            raise ValueError(f"Матрица {index} не является положительной")

    return DHState(dim=d, tensor=_compile_state(matrices), certificate=tuple(matrices))


def pure_state(v: Any) -> DHState:
    """
    Чистое состояние вектора v, сертификат conj(v) vᵀ
    """
    v = as_tensor(v).reshape(-1)
    m = np.outer(np.conj(v), v)
    return DHState(dim=v.size, tensor=_compile_state([m]), certificate=(m,))


def point_state(x: int, structure: Optional[ClassicalStructure] = None, d: Optional[int] = None) -> DHState:
    """
    Точечное состояние базиса классической структуры в точке x
    """
    if structure is None:
        structure = computational_structure(d)
    if not 0 <= x < structure.dim:
        raise ValueError(f"Точка {x} вне диапазона 0..{structure.dim - 1}")
    return pure_state(structure.vector(x))


def certificate_error(rho: DHState) -> float:
    """
    Максимальное отклонение тензора от восстановленного по сертификату
    """
    if rho.certificate is None:
        raise ValueError("У состояния нет сертификата")
    return float(np.max(np.abs(rho.tensor - _compile_state(rho.certificate))))


def random_dh_state(d: int, members: int, seed: int) -> DHState:
    """
    Случайное нормированное состояние с сертификатом из members матриц

    Args:
        d: размерность
        members: число матриц в сертификате
        seed: зерно генератора

    Returns:
        DHState: состояние с forest_effect = 1
    """
    if members < 1:
        raise ValueError(f"Число матриц должно быть положительным: {members}")
    rng = make_rng(seed)
    ms = [random_psd(rng, d) for _ in range(members)]
    forest = sum(float(np.trace(m).real) ** 2 for m in ms)
    factor = 1.0 / np.sqrt(forest)
    return dh_state_from_psd_family([m * factor for m in ms])


def zero_state(d: int) -> DHState:
    return DHState(dim=d, tensor=np.zeros((d,) * STATE_AXES))


# --- Отображения ---------------------------------------------------------------


def _compile_generator(f: np.ndarray) -> np.ndarray:
    g_dim, out_dim, _, in_dim = f.shape
    result = np.zeros((out_dim,) * STATE_AXES + (in_dim,) * STATE_AXES, dtype=np.complex128)
    for g in range(g_dim):
        block = f[g]
        # оси (a', a, b', b): Σ_e conj(f_{a'ea}) f_{b'eb}
        half = contract(np.conj(block), block, [(1, 1)])
        whole = contract(half, np.conj(half), [])
        result += rearrange(whole, (0, 2, 4, 6, 1, 3, 5, 7))
    return result


def dh_map_from_generator(
    f: Any, g_dim: int, e_dim: int, bridge: Optional[ClassicalStructure] = None
) -> DHMap:
    """
    Отображение по порождающей тройке (f, G, E) с классической структурой на G

    Φ_{(a'b'c'd'),(abcd)} = Σ_g Σ_{e,e'} conj(f_{g a' e a}) f_{g b' e b} f_{g c' e' c} conj(f_{g d' e' d}),
    где g пробегает базис моста.

    Args:
        f: тензор с осями (g, k, e, h)
        g_dim: размерность G
        e_dim: размерность E
        bridge: классическая структура на G (по умолчанию стандартная)

    Returns:
        DHMap: отображение с сохраненным генератором

    Raises:
        ValueError: при несогласованных размерностях
    """
    if bridge is None:
        bridge = computational_structure(g_dim)
    generator = Generator(f=f, g_dim=g_dim, e_dim=e_dim, bridge=bridge)
    tensor = _compile_generator(generator.in_bridge_coordinates())
    return DHMap(
        in_dim=generator.in_dim,
        out_dim=generator.out_dim,
        tensor=tensor,
        generator=generator,
    )


def doubled_unitary(u: Any) -> DHMap:
    """
    Удвоенное отображение линейного оператора u (G = E = 1)
    """
    u = as_tensor(u)
    if u.ndim != 2:
        raise ValueError(f"Ожидалась матрица, получена форма {u.shape}")
    f = u.reshape(1, u.shape[0], 1, u.shape[1])
    return dh_map_from_generator(f, 1, 1)


def identity_map(d: int) -> DHMap:
    return doubled_unitary(np.eye(d))


def random_generator_map(
    in_dim: int,
    out_dim: int,
    g_dim: int,
    e_dim: int,
    seed: int,
    bridge: Optional[ClassicalStructure] = None,
    isometric: bool = False,
) -> DHMap:
    """
    Случайное отображение в порождающей форме

    При isometric=True f - изометрия H -> G ⊗ K ⊗ E, и отображение
    субнормировано (нормировано при g_dim = 1).
    """
    rng = make_rng(seed)
    f = complex_gaussian(rng, (g_dim, out_dim, e_dim, in_dim))
    if isometric:
        rows = g_dim * out_dim * e_dim
        if rows < in_dim:
            raise ValueError(f"Изометрия невозможна: {rows} < {in_dim}")
        q, _ = np.linalg.qr(f.reshape(rows, in_dim))
        f = q.reshape(g_dim, out_dim, e_dim, in_dim)
    return dh_map_from_generator(f, g_dim, e_dim, bridge)


def _propagate_certificate(generator: Generator, rho: DHState) -> Optional[Tuple[np.ndarray, ...]]:
    if rho.certificate is None:
        return None
    f = generator.in_bridge_coordinates()
    family = []
    for g in range(generator.g_dim):
        for m in rho.certificate:
            n = np.zeros((generator.out_dim, generator.out_dim), dtype=np.complex128)
            for e in range(generator.e_dim):
                a = np.conj(f[g, :, e, :])
                n += a @ m @ a.conj().T
            family.append(n)
    return tuple(family)


def dh_apply(phi: DHMap, rho: DHState) -> DHState:
    """
    Подстановка состояния во вход отображения

    Если у отображения есть генератор, а у состояния сертификат,
    результат тоже получает сертификат.

    Raises:
        ValueError: при несовпадении размерностей
    """
    if phi.in_dim != rho.dim:
        raise ValueError(f"Размерность входа {phi.in_dim} не совпадает с размерностью состояния {rho.dim}")

    tensor = contract(phi.tensor, rho.tensor, INPUT_PAIRS)
    certificate = None
    if phi.generator is not None:
        certificate = _propagate_certificate(phi.generator, rho)
    return DHState(dim=phi.out_dim, tensor=tensor, certificate=certificate)


def _compose_generators(second: Generator, first: Generator) -> Generator:
    f2 = second.in_bridge_coordinates()
    f1 = first.in_bridge_coordinates()
    # оси (g2, k, e2, g1, e1, h)
    joined = contract(f2, f1, [(3, 1)])
    g_dim = first.g_dim * second.g_dim
    e_dim = first.e_dim * second.e_dim
    f = rearrange(joined, (3, 0, 1, 4, 2, 5)).reshape(g_dim, second.out_dim, e_dim, first.in_dim)
    return Generator(f=f, g_dim=g_dim, e_dim=e_dim, bridge=computational_structure(g_dim))


def dh_compose(second: DHMap, first: DHMap) -> DHMap:
    """
    Композиция second ∘ first

    Raises:
        ValueError: если выход first не совпадает со входом second
    """
    if first.out_dim != second.in_dim:
        raise ValueError(
            f"Нельзя скомпоновать: выход {first.out_dim} не совпадает со входом {second.in_dim}"
        )
    tensor = contract(second.tensor, first.tensor, [(4, 0), (5, 1), (6, 2), (7, 3)])
    generator = None
    if first.generator is not None and second.generator is not None:
        generator = _compose_generators(second.generator, first.generator)
    return DHMap(in_dim=first.in_dim, out_dim=second.out_dim, tensor=tensor, generator=generator)


def _interleave(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """
    Тензорное произведение с перемежением осей: составной индекс i1*d2 + i2
    """
    rank = t1.ndim
    joined = contract(t1, t2, [])
    perm = [axis for pair in zip(range(rank), range(rank, 2 * rank)) for axis in pair]
    shape = tuple(n1 * n2 for n1, n2 in zip(t1.shape, t2.shape))
    return rearrange(joined, perm).reshape(shape)


def dh_tensor(phi1: DHMap, phi2: DHMap) -> DHMap:
    """
    Тензорное произведение отображений
    """
    tensor = _interleave(phi1.tensor, phi2.tensor)
    generator = None
    if phi1.generator is not None and phi2.generator is not None:
        f = _interleave(phi1.generator.in_bridge_coordinates(), phi2.generator.in_bridge_coordinates())
        g_dim = phi1.generator.g_dim * phi2.generator.g_dim
        generator = Generator(
            f=f,
            g_dim=g_dim,
            e_dim=phi1.generator.e_dim * phi2.generator.e_dim,
            bridge=computational_structure(g_dim),
        )
    return DHMap(
        in_dim=phi1.in_dim * phi2.in_dim,
        out_dim=phi1.out_dim * phi2.out_dim,
        tensor=tensor,
        generator=generator,
    )


def dh_tensor_states(rho1: DHState, rho2: DHState) -> DHState:
    """
    Тензорное произведение состояний, сертификат - попарные произведения Кронекера
    """
    certificate = None
    if rho1.certificate is not None and rho2.certificate is not None:
        certificate = tuple(np.kron(m, n) for m in rho1.certificate for n in rho2.certificate)
    return DHState(
        dim=rho1.dim * rho2.dim,
        tensor=_interleave(rho1.tensor, rho2.tensor),
        certificate=certificate,
    )


# --- Смена базиса ----------------------------------------------------------------


def rotate_state(rho: DHState, u: np.ndarray) -> DHState:
    """
    Действие удвоенного унитарного оператора u на состояние

    На осях (a, b, c, d) действуют conj(u), u, u, conj(u);
    сертификат преобразуется как M -> conj(u) M uᵀ.
    """
    tensor = rho.tensor
    for axis, m in enumerate((np.conj(u), u, u, np.conj(u))):
        tensor = apply_to_axis(tensor, axis, m)
    certificate = None
    if rho.certificate is not None:
        certificate = tuple(np.conj(u) @ m @ u.T for m in rho.certificate)
    return DHState(dim=u.shape[0], tensor=tensor, certificate=certificate)


def rotate_map(phi: DHMap, u_out: np.ndarray, v_in: np.ndarray) -> DHMap:
    """
    D_u ∘ Φ ∘ D_v для удвоенных унитарных операторов u и v
    """
    tensor = phi.tensor
    for axis, m in enumerate((np.conj(u_out), u_out, u_out, np.conj(u_out))):
        tensor = apply_to_axis(tensor, axis, m)
    for axis, m in zip(range(4, 8), (v_in.conj().T, v_in.T, v_in.T, v_in.conj().T)):
        tensor = apply_to_axis(tensor, axis, m)

    generator = None
    if phi.generator is not None:
        f = apply_to_axis(phi.generator.in_bridge_coordinates(), 1, u_out)
        f = apply_to_axis(f, 3, v_in.T)
        generator = Generator(
            f=f,
            g_dim=phi.generator.g_dim,
            e_dim=phi.generator.e_dim,
            bridge=computational_structure(phi.generator.g_dim),
        )
    return DHMap(in_dim=v_in.shape[1], out_dim=u_out.shape[0], tensor=tensor, generator=generator)


def to_structure_coordinates(rho: DHState, structure: ClassicalStructure) -> DHState:
    """
    Состояние в координатах классической структуры (ρ~ = D_{B†} ρ)
    """
    if structure.dim != rho.dim:
        raise ValueError(f"Размерность структуры {structure.dim} не совпадает с {rho.dim}")
    if structure.is_computational:
        return rho
    return rotate_state(rho, structure.basis.conj().T)


def from_structure_coordinates(rho: DHState, structure: ClassicalStructure) -> DHState:
    if structure.dim != rho.dim:
        raise ValueError(f"Размерность структуры {structure.dim} не совпадает с {rho.dim}")
    if structure.is_computational:
        return rho
    return rotate_state(rho, np.asarray(structure.basis))


def conjugate_by_structures(
    phi: DHMap, structure_in: ClassicalStructure, structure_out: ClassicalStructure
) -> DHMap:
    """
    Перенос отображения, заданного в координатах структур, в стандартные координаты
    """
    if structure_in.is_computational and structure_out.is_computational:
        return phi
    return rotate_map(phi, np.asarray(structure_out.basis), structure_in.basis.conj().T)


# --- Эффекты -------------------------------------------------------------------


def forest_tensor(d: int) -> EffectTensor:
    """
    Эффект "лес": удвоенный след, W_{abcd} = δ_ab δ_cd
    """
    eye = np.eye(d)
    return EffectTensor(dim=d, tensor=contract(eye, eye, []), kind="forest")


def _rotate_effect(tensor: np.ndarray, basis: np.ndarray) -> np.ndarray:
    for axis, m in enumerate((basis, np.conj(basis), np.conj(basis), basis)):
        tensor = apply_to_axis(tensor, axis, m)
    return tensor


def _all_equal_delta(d: int) -> np.ndarray:
    delta = np.zeros((d,) * STATE_AXES, dtype=np.complex128)
    for x in range(d):
        delta[x, x, x, x] = 1.0
    return delta


def tree_on_bridge_tensor(structure: ClassicalStructure) -> EffectTensor:
    """
    Эффект "дерево на мосту": Σ_x ρ~_{xxxx} в координатах структуры
    """
    tensor = _all_equal_delta(structure.dim)
    if not structure.is_computational:
        tensor = _rotate_effect(tensor, np.asarray(structure.basis))
    return EffectTensor(dim=structure.dim, tensor=tensor, kind="tree_on_bridge", label=structure.label)


def extension_tensor(structure: ClassicalStructure) -> EffectTensor:
    """
    Эффект, дополняющий "дерево на мосту" до "леса"
    """
    tensor = forest_tensor(structure.dim).tensor - tree_on_bridge_tensor(structure).tensor
    return EffectTensor(dim=structure.dim, tensor=tensor, kind="extension", label=structure.label)


def point_effect(y: int, structure: ClassicalStructure) -> EffectTensor:
    """
    Компонента "дерева на мосту" в точке y: ρ~_{yyyy}
    """
    tensor = np.zeros((structure.dim,) * STATE_AXES, dtype=np.complex128)
    tensor[y, y, y, y] = 1.0
    if not structure.is_computational:
        tensor = _rotate_effect(tensor, np.asarray(structure.basis))
    return EffectTensor(dim=structure.dim, tensor=tensor, kind="point", label=f"{structure.label}:{y}")


def effect_of_state(rho: DHState) -> EffectTensor:
    """
    Эффект, сопряженный состоянию
    """
    return EffectTensor(dim=rho.dim, tensor=np.conj(rho.tensor), kind="dagger_of_state")


def effect_after_map(effect: EffectTensor, phi: DHMap) -> EffectTensor:
    """
    Эффект E ∘ Φ
    """
    if effect.dim != phi.out_dim:
        raise ValueError(f"Размерность эффекта {effect.dim} не совпадает с выходом {phi.out_dim}")
    tensor = contract(effect.tensor, phi.tensor, FULL_PAIRS)
    return EffectTensor(dim=phi.in_dim, tensor=tensor, kind="composite", label=effect.kind)


def pair(effect: EffectTensor, rho: DHState, tol: Optional[float] = None) -> float:
    """
    Спаривание эффекта с состоянием: Σ_{abcd} E_{abcd} ρ_{abcd}

    Raises:
        ValueError: при несовпадении размерностей или мнимой части выше допуска
    """
    if effect.dim != rho.dim:
        raise ValueError(f"Размерность эффекта {effect.dim} не совпадает с размерностью состояния {rho.dim}")
    value = complex(contract(effect.tensor, rho.tensor, FULL_PAIRS))
    tol = default_tol(tol) * max(1.0, abs(value))
    if abs(value.imag) > tol:
        logger.error(f"Мнимый остаток {value.imag:.3e} при спаривании эффекта {effect.kind}")
        raise ValueError(f"Мнимый остаток {value.imag:.3e} превышает допуск")
    return value.real


def forest_effect(rho: DHState, tol: Optional[float] = None) -> float:
    return pair(forest_tensor(rho.dim), rho, tol)


def tree_on_bridge_effect(rho: DHState, structure: ClassicalStructure, tol: Optional[float] = None) -> float:
    if structure.dim != rho.dim:
        raise ValueError(f"Размерность структуры {structure.dim} не совпадает с {rho.dim}")
    return pair(tree_on_bridge_tensor(structure), rho, tol)


def extension_effect(rho: DHState, structure: ClassicalStructure, tol: Optional[float] = None) -> float:
    """
    Значение дополняющего эффекта: forest - tree_on_bridge = Σ_{x≠y} ρ~_{xxyy}

    Raises:
        ValueError: если значение отрицательно сверх допуска (состояние некорректно)
    """
    value = forest_effect(rho, tol) - tree_on_bridge_effect(rho, structure, tol)
    if value < -default_tol(tol):
        logger.error(f"Дополняющий эффект отрицателен: {value:.3e}")
        raise ValueError(f"Дополняющий эффект отрицателен ({value:.3e}): состояние некорректно")
    return value


# --- Нормировка ------------------------------------------------------------------


def is_normalised_map(phi: DHMap, tol: Optional[float] = None) -> bool:
    """
    Проверка forest ∘ Φ = forest как тождества тензоров ранга 4
    """
    pulled = contract(forest_tensor(phi.out_dim).tensor, phi.tensor, FULL_PAIRS)
    error = float(np.max(np.abs(pulled - forest_tensor(phi.in_dim).tensor)))
    return error <= default_tol(tol)


def is_subnormalised_map(phi: DHMap, trials: int, seed: int, tol: Optional[float] = None) -> bool:
    """
    Выборочная проверка того, что Φ не увеличивает значение эффекта "лес"
    """
    tol = default_tol(tol)
    for trial_seed in derive_seeds(seed, trials):
        rho = random_dh_state(phi.in_dim, 2, trial_seed)
        loss = forest_effect(rho) - forest_effect(dh_apply(phi, rho))
        if loss < -tol:
            logger.info(f"Отображение увеличивает след на {-loss:.3e}")
            return False
    return True


# --- Симметрия -------------------------------------------------------------------


def check_symmetry(rho: Union[DHState, np.ndarray], tol: Optional[float] = None) -> SymmetryReport:
    """
    Проверка трех соотношений симметрии Z2 x Z2:
    ρ*_{abcd} = ρ_{badc}, ρ*_{abcd} = ρ_{cdab}, ρ_{abcd} = ρ_{dcba}

    Args:
        rho: состояние или тензор ранга 4
        tol: допуск

    Returns:
        SymmetryReport: отклонения по каждому элементу группы
    """
    tensor = rho.tensor if isinstance(rho, DHState) else as_tensor(rho)
    if tensor.ndim != STATE_AXES:
        raise ValueError(f"Ожидался тензор ранга 4, получен ранг {tensor.ndim}")
    tol = default_tol(tol)

    conjugated = np.conj(tensor)
    deviations = {
        "tau_01": float(np.max(np.abs(conjugated - rearrange(tensor, (1, 0, 3, 2))))),
        "tau_10": float(np.max(np.abs(conjugated - rearrange(tensor, (2, 3, 0, 1))))),
        "tau_11": float(np.max(np.abs(tensor - rearrange(tensor, (3, 2, 1, 0))))),
    }

    d = tensor.shape[0]
    diagonal = np.array([[tensor[x, x, y, y] for y in range(d)] for x in range(d)])
    cross = np.array([[tensor[x, y, x, y] for y in range(d)] for x in range(d)])

    return SymmetryReport(
        deviations=deviations,
        tol=tol,
        passed=all(value <= tol for value in deviations.values()),
        diagonal_min=float(np.min(diagonal.real)),
        diagonal_imag=float(np.max(np.abs(diagonal.imag))),
        cross_imag=float(np.max(np.abs(cross.imag))),
    )


# --- JSON ------------------------------------------------------------------------


def dh_state_to_json(rho: DHState) -> Dict[str, Any]:
    payload: Dict[str, Any] = {"dim": rho.dim, "tensor": tensor_to_json(rho.tensor)}
    if rho.certificate is not None:
        payload["certificate"] = [tensor_to_json(m) for m in rho.certificate]
    return payload


def dh_state_from_json(payload: Dict[str, Any]) -> DHState:
    certificate = payload.get("certificate")
    if certificate is not None:
        certificate = [tensor_from_json(m) for m in certificate]
    return DHState(
        dim=int(payload["dim"]),
        tensor=tensor_from_json(payload["tensor"]),
        certificate=certificate,
    )
