#!/usr/bin/env python3
"""
Тесты многощелевого эксперимента: вероятности, перепись форм и члены Соркина
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import itertools

import numpy as np
import pytest

from src.hypercube import dh_apply, dh_compose, forest_effect, identity_map, pair
from src.interference import (
    SlitConfig,
    classical_slit_probability,
    classical_sorkin,
    fourier_readout,
    hierarchy_report,
    projector,
    quantum_slit_probability,
    quantum_sorkin,
    shape_census,
    slit_probability,
    sorkin_closed_form,
    sorkin_decomposition,
    sorkin_effect,
    sorkin_interference,
    sorkin_report,
    uniform_state,
)
from src.utils.generators import make_rng, random_subset


def all_subsets(d):
    labels = range(1, d + 1)
    for size in range(1, d + 1):
        yield from (frozenset(c) for c in itertools.combinations(labels, size))


def test_slit_config_validation():
    assert SlitConfig(dim=3, subset=[1, 3]).size == 2
    with pytest.raises(ValueError):
        SlitConfig(dim=3, subset=[])
    with pytest.raises(ValueError):
        SlitConfig(dim=3, subset=[1, 1])
    with pytest.raises(ValueError):
        SlitConfig(dim=3, subset=[0, 4])


@pytest.mark.parametrize("d", [1, 2, 3])
def test_uniform_state(d):
    rho = uniform_state(d)
    np.testing.assert_allclose(rho.tensor, np.full((d,) * 4, 1 / d ** 2), atol=1e-15)
    assert forest_effect(rho) == pytest.approx(1.0)
    np.testing.assert_allclose(rho.certificate[0], np.full((d, d), 1 / d), atol=1e-15)


def test_projector_properties():
    d = 3
    np.testing.assert_allclose(projector({1, 2, 3}, d).tensor, identity_map(d).tensor)
    single = dh_apply(projector({2}, d), uniform_state(d))
    assert np.count_nonzero(np.abs(single.tensor) > 1e-15) == 1
    assert single.tensor[1, 1, 1, 1] == pytest.approx(1 / d ** 2)
    p = projector({1, 3}, d)
    np.testing.assert_allclose(dh_compose(p, p).tensor, p.tensor)
    with pytest.raises(ValueError):
        projector(set(), d)


def test_projectors_multiply_as_intersection():
    rng = make_rng(4)
    d = 4
    checked = 0
    while checked < 5:
        u, v = random_subset(rng, d), random_subset(rng, d)
        if not u & v:
            continue
        np.testing.assert_allclose(
            dh_compose(projector(u, d), projector(v, d)).tensor, projector(u & v, d).tensor, atol=1e-15
        )
        checked += 1


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
def test_slit_probability_exhaustive(d):
    """
    P[+|U] = (#U)⁴/d⁴ для каждого непустого U
    """
    for subset in all_subsets(d):
        assert slit_probability(subset, d) == pytest.approx(len(subset) ** 4 / d ** 4, abs=1e-12)


def test_slit_probability_examples():
    assert [slit_probability(range(1, k + 1), 3) * 81 for k in (1, 2, 3)] == pytest.approx([1, 16, 81])
    assert slit_probability({2, 4, 5}, 5) == pytest.approx(81 / 625, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_fourier_readout(d):
    for subset in list(all_subsets(d))[:6]:
        assert fourier_readout(subset, d) == pytest.approx(len(subset) ** 4 / d ** 4, abs=1e-12)


def test_shape_census():
    assert shape_census({3}, 5) == {"aaaa": 1}
    counts = shape_census({1, 2, 3}, 3)
    assert counts["abcc"] == 6
    assert "abcd" not in counts
    assert sum(counts.values()) == 27
    counts = shape_census({1, 2, 3, 4}, 4)
    assert counts["abcd"] == 24
    assert counts["aabb"] == 12
    assert len(counts) == 15
    assert sum(counts.values()) == 256


def test_sorkin_third_fourth_fifth_order():
    """
    I₃ = 36/81 при d=3, I₄ = 24/256 при d=4, I₅ = 0 при d=5, I₆ = 0 при d=6
    """
    assert sorkin_interference({1, 2, 3}, 3) == pytest.approx(36 / 81, abs=1e-12)
    assert sorkin_interference({1, 2, 3, 4}, 4) == pytest.approx(24 / 256, abs=1e-12)
    assert sorkin_interference({1, 2, 3, 4, 5}, 5) == pytest.approx(0.0, abs=1e-12)
    assert sorkin_interference(range(1, 7), 6) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "d, lhs, rhs",
    [(3, 81, 45), (4, 256, 232), (5, 625, 625)],
)
def test_sorkin_decomposition(d, lhs, rhs):
    decomposition = sorkin_decomposition(range(1, d + 1), d)
    assert decomposition.lhs * d ** 4 == pytest.approx(lhs, abs=1e-9)
    assert decomposition.rhs * d ** 4 == pytest.approx(rhs, abs=1e-9)


def test_representative_and_exhaustive_agree():
    subset = {1, 3, 4}
    assert sorkin_interference(subset, 4) == pytest.approx(sorkin_interference(subset, 4, exhaustive=True), abs=1e-12)


def test_sorkin_effect_single_pairing():
    for d, subset in [(3, {1, 2, 3}), (4, {1, 2, 4})]:
        effect = sorkin_effect(subset, d)
        assert effect.kind == "inclusion_exclusion"
        assert pair(effect, uniform_state(d)) == pytest.approx(sorkin_interference(subset, d), abs=1e-12)


def test_closed_form():
    assert [sorkin_closed_form(k, 1) for k in range(1, 6)] == [1, 14, 36, 24, 0]


def test_quantum_and_classical_cross_checks():
    """
    Квантовая теория не имеет интерференции третьего порядка, классическая - второго
    """
    assert quantum_slit_probability({1, 2}, 3) == pytest.approx(4 / 81, abs=1e-12)
    assert quantum_sorkin({1, 2, 3}, 3) == pytest.approx(0.0, abs=1e-12)
    assert quantum_sorkin({1, 2}, 3) != pytest.approx(0.0, abs=1e-6)
    assert classical_slit_probability({1}, 2) == pytest.approx(1 / 16, abs=1e-12)
    assert classical_sorkin({1, 2}, 2) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "d, expected",
    [(2, {2: 14 / 16}), (5, {3: 36 / 625, 4: 24 / 625, 5: 0.0})],
)
def test_hierarchy_report(d, expected):
    report = hierarchy_report(d, d)
    values = {record.order: record.value for record in report.sorkin}
    for order, value in expected.items():
        assert values[order] == pytest.approx(value, abs=1e-12)
    assert report.probabilities[-1].value == pytest.approx(1.0)
    assert report.invariance_max_deviation <= 1e-12
    assert report.third_order == (d >= 3)
    assert report.fourth_order == (d >= 4)
    assert report.higher_orders_vanish


def test_hierarchy_report_sixth_order():
    report = hierarchy_report(6, 6, exhaustive=False)
    assert report.sorkin[-1].value == pytest.approx(0.0, abs=1e-12)
    assert report.invariance_max_deviation is None


def test_hierarchy_report_errors():
    with pytest.raises(ValueError):
        hierarchy_report(3, 4)
    assert sorkin_report(3, 3).terms[2].closed_form == pytest.approx(36 / 81)
