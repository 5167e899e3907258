"""
Модуль с вспомогательными функциями для воспроизводимой генерации случайных данных
"""

from typing import List

import numpy as np


def derive_seeds(master_seed: int, count: int) -> List[int]:
    """
    Получение независимых зерен для отдельных испытаний из главного зерна

    Args:
        master_seed: главное зерно прогона
        count: количество испытаний

    Returns:
        List[int]: зерна, по одному на испытание
    """
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def complex_gaussian(rng: np.random.Generator, shape: tuple) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_psd(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    """
    Случайная положительная матрица G G† (без нормировки)

    Args:
        rng: генератор
        d: размерность
        rank: ранг (по умолчанию полный)

    Returns:
        np.ndarray: эрмитова положительная матрица d x d
    """
    g = complex_gaussian(rng, (d, rank or d))
    m = g @ g.conj().T
    return (m + m.conj().T) / 2


def random_nonnegative_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.random((rows, cols))


def random_subset(rng: np.random.Generator, d: int) -> frozenset:
    """
    Случайное непустое подмножество {1..d}
    """
    while True:
        mask = rng.random(d) < 0.5
        labels = frozenset(int(x) + 1 for x in np.flatnonzero(mask))
        if labels:
            return labels
