"""
Модуль переписи компонент гиперкуба плотности
Классы компонент по шаблону равенств индексов, орбиты действия Z2 x Z2,
подсчет независимых вещественных параметров и ранг линейной оболочки конуса состояний
"""

import itertools
import logging
from math import perm
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from src.hypercube import random_dh_state
from src.utils.generators import derive_seeds

logger = logging.getLogger(__name__)

SPAN_RANK_RTOL = 1e-8

Index = Tuple[int, int, int, int]

# Нетривиальные элементы группы: перестановка позиций и признак сопряжения
GROUP_ACTIONS: Dict[str, Tuple[Tuple[int, int, int, int], bool]] = {
    "tau_01": ((1, 0, 3, 2), True),
    "tau_10": ((2, 3, 0, 1), True),
    "tau_11": ((3, 2, 1, 0), False),
}


class UnionFind:
    def __init__(self, items: Iterable):
        self.parent = {x: x for x in items}
        self.rank = {x: 0 for x in self.parent}

    def find(self, x):
        y = self.parent[x]
        if self.parent[y] != y:
            y = self.parent[x] = self.find(y)
        return y

    def union(self, x, y) -> None:
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        elif self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.parent[y] = x

    def classes(self) -> Dict:
        groups: Dict = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return groups


def equality_pattern(indices: Iterable[int]) -> str:
    """
    Шаблон равенств индексов, например (5, 5, 2, 5) -> "aaba"
    """
    letters: Dict[int, str] = {}
    pattern = []
    for value in indices:
        if value not in letters:
            letters[value] = "abcd"[len(letters)]
        pattern.append(letters[value])
    return "".join(pattern)


def all_patterns() -> List[str]:
    """
    Все 15 разбиений четырех позиций на блоки
    """
    return sorted({equality_pattern(t) for t in itertools.product(range(4), repeat=4)})


def distinct_values(pattern: str) -> int:
    return len(set(pattern))


def act(name: str, indices: Index) -> Index:
    perm, _ = GROUP_ACTIONS[name]
    return tuple(indices[p] for p in perm)


def stabilizer(indices: Index) -> List[str]:
    return [name for name in GROUP_ACTIONS if act(name, indices) == indices]


def stabilizer_kind(indices: Index) -> str:
    names = stabilizer(indices)
    if len(names) == len(GROUP_ACTIONS):
        return "full"
    if any(GROUP_ACTIONS[name][1] for name in names):
        return "conjugating"
    if names:
        return "self_transposing"
    return "trivial"


def parameters_per_orbit(indices: Index) -> int:
    """
    Сопрягающий стабилизатор делает компоненту вещественной (1 параметр), иначе 2
    """
    return 1 if any(GROUP_ACTIONS[name][1] for name in stabilizer(indices)) else 2


class ClassRecord(BaseModel):
    pattern: str
    distinct_values: int
    component_count: int
    orbit_count: int
    orbit_size: int
    stabilizer_kind: str
    parameters: int
    linked_patterns: List[str]


class OrbitCensus(BaseModel):
    dim: int
    classes: List[ClassRecord]
    paper_formula_value: int
    census_total: int
    orbit_count: int
    burnside_orbit_count: int
    symmetric_dimension: int
    span_rank: Optional[int] = None
    span_samples: Optional[int] = None


def paper_formula_value(d: int) -> int:
    """
    Размерность конуса по формуле ½(d⁴ - 3d³ + 7d² - 3d)
    """
    return (d ** 4 - 3 * d ** 3 + 7 * d ** 2 - 3 * d) // 2


def burnside_orbit_count(d: int) -> int:
    """
    Число орбит по лемме Бернсайда: среднее число неподвижных точек
    """
    tuples = list(itertools.product(range(d), repeat=4))
    fixed = len(tuples)
    for name in GROUP_ACTIONS:
        fixed += sum(1 for t in tuples if act(name, t) == t)
    return fixed // (len(GROUP_ACTIONS) + 1)


def orbit_census(d: int) -> OrbitCensus:
    """
    Перепись компонент: классы шаблонов, орбиты и число вещественных параметров

    Args:
        d: размерность

    Returns:
        OrbitCensus: перепись по 15 шаблонам
    """
    if d < 1:
        raise ValueError(f"Размерность должна быть не меньше 1, получено {d}")

    tuples = list(itertools.product(range(d), repeat=4))
    union_find = UnionFind(tuples)
    for t in tuples:
        for name in GROUP_ACTIONS:
            union_find.union(t, act(name, t))
    orbits = [sorted(members) for members in union_find.classes().values()]

    orbit_counts: Dict[str, int] = {}
    parameters: Dict[str, int] = {}
    census_total = 0
    for members in orbits:
        representative = members[0]
        pattern = equality_pattern(representative)
        weight = parameters_per_orbit(representative)
        orbit_counts[pattern] = orbit_counts.get(pattern, 0) + 1
        parameters[pattern] = parameters.get(pattern, 0) + weight
        census_total += weight

    # шаблон и его образы не зависят от d, берем попарно различные значения
    classes = []
    for pattern in all_patterns():
        sample = tuple("abcd".index(letter) for letter in pattern)
        linked = sorted({equality_pattern(act(name, sample)) for name in GROUP_ACTIONS} - {pattern})
        classes.append(
            ClassRecord(
                pattern=pattern,
                distinct_values=distinct_values(pattern),
                component_count=perm(d, distinct_values(pattern)),
                orbit_count=orbit_counts.get(pattern, 0),
                orbit_size=(len(GROUP_ACTIONS) + 1) // (len(stabilizer(sample)) + 1),
                stabilizer_kind=stabilizer_kind(sample),
                parameters=parameters.get(pattern, 0),
                linked_patterns=linked,
            )
        )

    census = OrbitCensus(
        dim=d,
        classes=classes,
        paper_formula_value=paper_formula_value(d),
        census_total=census_total,
        orbit_count=len(orbits),
        burnside_orbit_count=burnside_orbit_count(d),
        symmetric_dimension=(d ** 4 + d ** 2) // 2,
    )
    logger.info(
        f"Перепись d={d}: орбит {census.orbit_count}, параметров {census_total}, "
        f"формула дает {census.paper_formula_value}"
    )
    return census


def span_rank(d: int, samples: int, seed: int) -> int:
    """
    Размерность вещественной линейной оболочки конуса состояний

    Каждое случайное состояние с сертификатом разворачивается в вещественный
    вектор длины 2d⁴ (вещественные, затем мнимые части); ранг считается по
    сингулярным числам выше 1e-8 от наибольшего.

    Args:
        d: размерность
        samples: число состояний (не меньше 2d⁴)
        seed: зерно

    Returns:
        int: численный ранг
    """
    if samples < 2 * d ** 4:
        raise ValueError(f"Нужно не меньше {2 * d ** 4} состояний, получено {samples}")

    rows = []
    for sample_seed in derive_seeds(seed, samples):
        flat = random_dh_state(d, 1, sample_seed).tensor.reshape(-1)
        rows.append(np.concatenate([flat.real, flat.imag]))
    singular = np.linalg.svd(np.array(rows), compute_uv=False)
    rank = int(np.sum(singular > SPAN_RANK_RTOL * singular[0]))
    logger.info(f"Ранг оболочки d={d} по {samples} состояниям: {rank}")
    return rank
