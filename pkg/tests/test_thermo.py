import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qrem import (
    GAMMA_C0,
    LOG2,
    T_C,
    classical_free_energy,
    entropy_density,
    paramagnetic_free_energy,
    phase_boundary,
)
from qrem.errors import DomainError

SQRT_LOG2 = math.sqrt(LOG2)


def test_entropy_values():
    assert entropy_density(0.0) == pytest.approx(LOG2, abs=1e-15)
    assert entropy_density(-SQRT_LOG2) == pytest.approx(0.0, abs=1e-15)
    assert entropy_density(0.5) == pytest.approx(LOG2 - 0.25, abs=1e-15)


def test_entropy_domain():
    with pytest.raises(DomainError):
        entropy_density(SQRT_LOG2 + 1e-9)
    with pytest.raises(DomainError):
        entropy_density(-1.0)


@given(st.floats(min_value=-SQRT_LOG2, max_value=SQRT_LOG2, allow_nan=False))
def test_entropy_even_and_bounded(e):
    s = entropy_density(e)
    assert s == entropy_density(-e)
    assert -1e-15 <= s <= LOG2


def test_classical_free_energy_values():
    assert classical_free_energy(0.0) == pytest.approx(-SQRT_LOG2, abs=1e-15)
    assert classical_free_energy(1.0) == pytest.approx(-0.25 - LOG2, abs=1e-15)


def test_classical_free_energy_continuous_at_freezing():
    below = classical_free_energy(T_C)
    above = classical_free_energy(T_C + 1e-12)
    assert below == pytest.approx(-SQRT_LOG2, abs=1e-15)
    assert above == pytest.approx(below, abs=1e-10)
    # the high-T expression itself equals the frozen value at T_C
    assert -1.0 / (4 * T_C) - T_C * LOG2 == pytest.approx(-SQRT_LOG2, abs=1e-14)


def test_classical_free_energy_monotone_grid():
    ts = np.arange(0.0, 2.0, 0.01)
    vals = [classical_free_energy(float(t)) for t in ts]
    assert all(b <= a + 1e-14 for a, b in zip(vals, vals[1:]))


def test_classical_negative_temperature():
    with pytest.raises(DomainError):
        classical_free_energy(-0.1)


def test_paramagnetic_values():
    assert paramagnetic_free_energy(1.0, 0.0) == pytest.approx(-LOG2, abs=1e-15)
    assert paramagnetic_free_energy(0.0, 1.5) == -1.5
    expected = -0.5 * LOG2 - 0.5 * math.log(math.cosh(2.0))
    assert paramagnetic_free_energy(0.5, 1.0) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(-1.00907, abs=5e-6)


def test_paramagnetic_zero_field_exact():
    for t in (0.1, 0.7, 2.0):
        assert paramagnetic_free_energy(t, 0.0) == -t * LOG2


def test_paramagnetic_no_overflow_and_asymptote():
    # |f + gamma| <= T ln2 + T exp(-2 gamma/T) for gamma/T >= 5
    for t, g in ((0.1, 500.0), (1.0, 5.0), (0.3, 700.0), (2.0, 10.0)):
        f = paramagnetic_free_energy(t, g)
        assert math.isfinite(f)
        assert abs(f + g) <= t * LOG2 + t * math.exp(-2.0 * g / t) + 1e-12


def test_phase_boundary_at_zero_temperature():
    p = phase_boundary(0.0, tol=1e-10)
    assert abs(p.gamma_c - SQRT_LOG2) <= 1e-10
    assert p.frozen


def test_phase_boundary_at_T04_against_closed_form():
    # frozen branch: log cosh(gamma/T) = sqrt(ln2)/T - ln2, inverted directly
    expected = 0.4 * math.acosh(math.exp(SQRT_LOG2 / 0.4 - LOG2))
    p = phase_boundary(0.4, tol=1e-12)
    assert p.gamma_c == pytest.approx(expected, abs=1e-10)
    assert p.gamma_c == pytest.approx(0.8262, abs=5e-5)


def test_phase_boundary_brackets_first_order_crossing():
    for t in (0.0, 0.3, 0.8, 1.4):
        p = phase_boundary(t, tol=1e-10)
        f_cl = classical_free_energy(t)
        # ordered phase is the equilibrium below the crossing, field phase above
        assert f_cl < paramagnetic_free_energy(t, p.gamma_c - 1e-6)
        assert f_cl > paramagnetic_free_energy(t, p.gamma_c + 1e-6)


def test_phase_boundary_monotone_non_increasing():
    # the boundary falls from sqrt(ln2) toward 1/sqrt(2) as T grows; the
    # non-decreasing direction quoted alongside the operation contradicts the
    # free energies themselves (see decisions ledger)
    gammas = [phase_boundary(float(t), tol=1e-10).gamma_c for t in np.arange(0.0, 1.51, 0.1)]
    assert all(b <= a + 1e-9 for a, b in zip(gammas, gammas[1:]))
    assert gammas[0] == pytest.approx(GAMMA_C0, abs=1e-9)
    assert gammas[-1] > 1.0 / math.sqrt(2.0) - 1e-6


def test_phase_boundary_validation():
    with pytest.raises(DomainError):
        phase_boundary(-0.5)
    with pytest.raises(DomainError):
        phase_boundary(0.5, tol=0.0)


def test_frozen_flag_tracks_freezing_temperature():
    assert phase_boundary(T_C - 1e-3).frozen
    assert not phase_boundary(T_C + 1e-3).frozen
