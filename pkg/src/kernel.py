"""
Модуль тензорной алгебры
Плотные комплексные тензоры, ортонормированные базисы (классические структуры),
матрицы плотности и вполне положительные отображения в форме Крауса
"""

import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationInfo, field_validator, model_validator
from scipy.stats import unitary_group

from src.config import default_tol
from src.utils.generators import make_rng, random_psd

logger = logging.getLogger(__name__)

# Тензор - это numpy.ndarray с dtype complex128
Tensor = np.ndarray

ORTHONORMALITY_TOL = 1e-10


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def as_tensor(data: Any, shape: Optional[Sequence[int]] = None) -> Tensor:
    """
    Создание тензора с проверкой конечности элементов

    Args:
        data: данные (вложенные списки, массив или число)
        shape: ожидаемая форма; если задана, данные приводятся к ней

    Returns:
        Tensor: комплексный массив

    Raises:
        ValueError: если есть NaN/Inf или число элементов не совпадает с формой
    """
    array = np.array(data, dtype=np.complex128)
    if shape is not None:
        shape = tuple(int(n) for n in shape)
        if any(n <= 0 for n in shape):
            raise ValueError(f"Размеры осей должны быть положительными: {shape}")
        if array.size != int(np.prod(shape)):
            raise ValueError(
                f"Число элементов {array.size} не совпадает с формой {shape}"
            )
        array = array.reshape(shape)
    if not np.all(np.isfinite(array)):
        raise ValueError("Тензор содержит NaN или Inf")
    return array


def contract(a: Tensor, b: Tensor, pairs: Sequence[Tuple[int, int]]) -> Tensor:
    """
    Свертка двух тензоров по парам осей

    Оставшиеся оси идут в порядке: сначала оси a, затем оси b,
    каждая группа в исходном порядке.

    Args:
        a: первый тензор
        b: второй тензор
        pairs: пары (ось a, ось b)

    Returns:
        Tensor: результат свертки

    Raises:
        ValueError: при несовпадении размеров или повторе оси
    """
    a = np.asarray(a)
    b = np.asarray(b)
    axes_a = [int(p[0]) for p in pairs]
    axes_b = [int(p[1]) for p in pairs]

    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise ValueError(f"Ось указана в свертке дважды: {list(pairs)}")

    for axis_a, axis_b in zip(axes_a, axes_b):
        if not (0 <= axis_a < a.ndim) or not (0 <= axis_b < b.ndim):
            raise ValueError(f"Ось вне диапазона: ({axis_a}, {axis_b})")
        if a.shape[axis_a] != b.shape[axis_b]:
            raise ValueError(
                f"Размеры осей не совпадают: {a.shape[axis_a]} != {b.shape[axis_b]} "
                f"для пары ({axis_a}, {axis_b})"
            )

    return np.tensordot(a, b, axes=(axes_a, axes_b))


def rearrange(t: Tensor, perm: Sequence[int], conjugate: bool = False) -> Tensor:
    """
    Перестановка осей тензора с необязательным сопряжением

    Args:
        t: тензор
        perm: перестановка индексов осей
        conjugate: сопрягать ли элементы

    Returns:
        Tensor: новый тензор

    Raises:
        ValueError: если perm не является перестановкой
    """
    t = np.asarray(t)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(t.ndim)):
        raise ValueError(f"Недопустимая перестановка {perm} для тензора ранга {t.ndim}")

    result = np.transpose(t, perm)
    if conjugate:
        result = np.conj(result)
    return np.ascontiguousarray(result)


def inverse_permutation(perm: Sequence[int]) -> List[int]:
    inverse = [0] * len(perm)
    for position, axis in enumerate(perm):
        inverse[axis] = position
    return inverse


def apply_to_axis(t: Tensor, axis: int, m: Tensor) -> Tensor:
    """
    Применение матрицы m (новый индекс, старый индекс) к одной оси тензора

    Args:
        t: тензор
        axis: номер оси
        m: матрица

    Returns:
        Tensor: тензор той же ранговой структуры
    """
    moved = contract(t, m, [(axis, 1)])
    # новая ось оказалась последней, возвращаем ее на место
    rank = moved.ndim
    perm = list(range(axis)) + [rank - 1] + list(range(axis, rank - 1))
    return rearrange(moved, perm)


class ClassicalStructure(BaseModel):
    """
    Классическая структура: ортонормированный базис, столбцы - векторы ψ_x
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int
    basis: np.ndarray
    label: str = "custom"

    @field_validator("basis", mode="before")
    @classmethod
    def _to_array(cls, value: Any) -> np.ndarray:
        return _frozen(as_tensor(value))

    @model_validator(mode="after")
    def _check_orthonormal(self) -> "ClassicalStructure":
        if self.dim < 1:
            raise ValueError(f"Размерность должна быть положительной: {self.dim}")
        if self.basis.shape != (self.dim, self.dim):
            raise ValueError(
                f"Базис должен иметь форму ({self.dim}, {self.dim}), получено {self.basis.shape}"
            )
        gram = self.basis.conj().T @ self.basis
        error = np.max(np.abs(gram - np.eye(self.dim)))
        if error > ORTHONORMALITY_TOL:
            raise ValueError(f"Базис не ортонормирован, отклонение {error:.3e}")
        return self

    def vector(self, x: int) -> np.ndarray:
        return self.basis[:, x]

    @property
    def is_computational(self) -> bool:
        return bool(np.array_equal(self.basis, np.eye(self.dim)))


def _check_dim(d: int) -> None:
    if d < 1:
        raise ValueError(f"Размерность должна быть не меньше 1, получено {d}")


def computational_structure(d: int) -> ClassicalStructure:
    """
    Стандартный (вычислительный) базис размерности d
    """
    _check_dim(d)
    return ClassicalStructure(dim=d, basis=np.eye(d), label="computational")


def fourier_structure(d: int) -> ClassicalStructure:
    """
    Базис Фурье группы Z_d

    Столбец k (k = 1..d) имеет элементы e^{i 2π jk/d}/√d в строке j (j = 1..d),
    так что последний столбец - равномерный вектор.

    Args:
        d: размерность

    Returns:
        ClassicalStructure: базис Фурье
    """
    _check_dim(d)
    j = np.arange(1, d + 1).reshape(d, 1)
    k = np.arange(1, d + 1).reshape(1, d)
    basis = np.exp(2j * np.pi * j * k / d) / np.sqrt(d)
    return ClassicalStructure(dim=d, basis=basis, label="fourier")


def random_unitary(d: int, seed: int) -> np.ndarray:
    """
    Случайная унитарная матрица по мере Хаара (воспроизводимая по seed)
    """
    _check_dim(d)
    if d == 1:
        rng = np.random.default_rng(seed)
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return np.asarray(unitary_group.rvs(d, random_state=np.random.default_rng(seed)))


def random_structure(d: int, seed: int) -> ClassicalStructure:
    return ClassicalStructure(dim=d, basis=random_unitary(d, seed), label=f"random:{seed}")


def is_hermitian(m: np.ndarray, tol: Optional[float] = None) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= default_tol(tol))


def is_psd(m: np.ndarray, tol: Optional[float] = None) -> bool:
    """
    Проверка положительной полуопределенности

    Args:
        m: квадратная комплексная матрица
        tol: допуск (по умолчанию DH_DEFAULT_TOL)

    Returns:
        bool: True если матрица эрмитова и ее спектр не меньше -tol

    Raises:
        ValueError: если матрица не квадратная
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"Ожидалась квадратная матрица, получена форма {m.shape}")
    tol = default_tol(tol)
    if not is_hermitian(m, tol):
        return False
    hermitian = (m + m.conj().T) / 2
    return bool(np.min(np.linalg.eigvalsh(hermitian)) >= -tol)


def _context_tol(info: ValidationInfo) -> float:
    context = info.context or {}
    return default_tol(context.get("tol"))


class DensityMatrix(BaseModel):
    """
    Матрица плотности (не обязательно нормированная)

    Допуск положительности берется из контекста валидации ("tol"),
    иначе DH_DEFAULT_TOL; в обоих случаях он масштабируется по модулю элементов.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int
    mat: np.ndarray

    @field_validator("mat", mode="before")
    @classmethod
    def _to_array(cls, value: Any) -> np.ndarray:
        return _frozen(as_tensor(value))

    @model_validator(mode="after")
    def _check_state(self, info: ValidationInfo) -> "DensityMatrix":
        if self.mat.shape != (self.dim, self.dim):
            raise ValueError(f"Ожидалась матрица {self.dim}x{self.dim}, получено {self.mat.shape}")
        scale = max(1.0, float(np.max(np.abs(self.mat), initial=0.0)))
        if not is_psd(self.mat, _context_tol(info) * scale):
            raise ValueError("Матрица плотности должна быть эрмитовой и положительной")
        return self

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def purity(self) -> float:
        return float(np.trace(self.mat @ self.mat).real)


def random_density_matrix(d: int, rank: int, seed: int) -> DensityMatrix:
    """
    Случайная нормированная матрица плотности заданного ранга

    Строится как G G† / tr(G G†) для комплексной гауссовой матрицы G формы d x rank.

    Args:
        d: размерность
        rank: ранг (1 <= rank <= d)
        seed: зерно генератора

    Returns:
        DensityMatrix: матрица плотности со следом 1
    """
    _check_dim(d)
    if not 1 <= rank <= d:
        raise ValueError(f"Ранг должен быть в диапазоне 1..{d}, получено {rank}")

    rho = random_psd(make_rng(seed), d, rank)
    rho = rho / np.trace(rho).real
    return DensityMatrix(dim=d, mat=rho)


class KrausMap(BaseModel):
    """
    Вполне положительное отображение в форме Крауса
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    in_dim: int
    out_dim: int
    kraus: Tuple[np.ndarray, ...]

    @field_validator("kraus", mode="before")
    @classmethod
    def _to_arrays(cls, value: Any) -> Tuple[np.ndarray, ...]:
        return tuple(_frozen(as_tensor(k)) for k in value)

    @model_validator(mode="after")
    def _check_shapes(self) -> "KrausMap":
        if not self.kraus:
            raise ValueError("Список операторов Крауса пуст")
        for k in self.kraus:
            if k.shape != (self.out_dim, self.in_dim):
                raise ValueError(
                    f"Оператор Крауса формы {k.shape}, ожидалось ({self.out_dim}, {self.in_dim})"
                )
        return self

    def is_trace_preserving(self, tol: Optional[float] = None) -> bool:
        total = sum(k.conj().T @ k for k in self.kraus)
        return bool(np.max(np.abs(total - np.eye(self.in_dim))) <= default_tol(tol))


def apply_kraus(channel: KrausMap, m: np.ndarray) -> np.ndarray:
    return sum(k @ m @ k.conj().T for k in channel.kraus)


def choi(channel: KrausMap) -> np.ndarray:
    """
    Матрица Чоя Σ_k vec(K_k) vec(K_k)†, vec построчный

    Индексы: (выход, вход) x (выход, вход).
    """
    size = channel.in_dim * channel.out_dim
    result = np.zeros((size, size), dtype=np.complex128)
    for k in channel.kraus:
        v = k.reshape(-1)
        result += np.outer(v, v.conj())
    return result


def choi_apply(c: np.ndarray, m: np.ndarray, in_dim: int, out_dim: int) -> np.ndarray:
    """
    Применение супероператора, заданного матрицей Чоя, к матрице m
    """
    c4 = np.asarray(c).reshape(out_dim, in_dim, out_dim, in_dim)
    return contract(c4, m, [(1, 0), (3, 1)])


def choi_compose(
    c2: np.ndarray, c1: np.ndarray, in_dim: int, mid_dim: int, out_dim: int
) -> np.ndarray:
    """
    Матрица Чоя композиции E2 ∘ E1
    """
    c1_4 = np.asarray(c1).reshape(mid_dim, in_dim, mid_dim, in_dim)
    c2_4 = np.asarray(c2).reshape(out_dim, mid_dim, out_dim, mid_dim)
    # оси результата: (o, o', i, i')
    joined = contract(c2_4, c1_4, [(1, 0), (3, 2)])
    size = out_dim * in_dim
    return rearrange(joined, (0, 2, 1, 3)).reshape(size, size)


def partial_trace_out(c: np.ndarray, in_dim: int, out_dim: int) -> np.ndarray:
    c4 = np.asarray(c).reshape(out_dim, in_dim, out_dim, in_dim)
    return contract(c4, np.eye(out_dim), [(0, 0), (2, 1)])


def tensor_to_json(t: Tensor) -> Dict[str, Any]:
    """
    Кодирование тензора в JSON: {"shape": [...], "data": [[re, im], ...]}
    """
    t = np.asarray(t, dtype=np.complex128)
    return {
        "shape": [int(n) for n in t.shape],
        "data": [[float(z.real), float(z.imag)] for z in t.reshape(-1)],
    }


def tensor_from_json(payload: Dict[str, Any]) -> Tensor:
    """
    Декодирование тензора из JSON

    Raises:
        ValueError: если структура не соответствует формату
    """
    try:
        shape = payload["shape"]
        values = [complex(float(re), float(im)) for re, im in payload["data"]]
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f"Некорректное JSON-представление тензора: {str(e)}") from e
    if not shape:
        return as_tensor(values[0] if values else 0.0)
    return as_tensor(values, shape=shape)
