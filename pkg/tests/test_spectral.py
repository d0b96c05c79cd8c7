import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hls_backstepping.errors import ParameterError, RegimeError
from hls_backstepping.kernel import REFERENCE_PARAMS, KernelParams
from hls_backstepping.spectral import (
    characteristic,
    critical_length,
    critical_table,
    discriminant,
    eigenvalue_on_axis,
    hkl,
    is_critical,
    regime,
    repeated_root_certificate,
    root_landmarks,
    stationary_residual,
    stationary_state,
)

ZERO_D = KernelParams(beta=1.0, alpha=3.0, delta=-3.0, r=0.0, L=1.0)
NEG_D = KernelParams(beta=1.0, alpha=0.0, delta=-1.0, r=0.0, L=1.0)


def test_discriminant_and_regime():
    assert discriminant(REFERENCE_PARAMS) == 28.0
    assert discriminant(ZERO_D) == 0.0
    assert discriminant(NEG_D) == -3.0
    assert [regime(p) for p in (REFERENCE_PARAMS, ZERO_D, NEG_D)] == [1, 0, -1]


def test_critical_lengths():
    assert critical_length(REFERENCE_PARAMS, 1, 2) == pytest.approx(math.pi, rel=1e-14)
    assert critical_length(REFERENCE_PARAMS, 2, 1) == pytest.approx(math.pi, rel=1e-14)
    assert critical_length(REFERENCE_PARAMS, 1, 1) == pytest.approx(2 * math.pi * math.sqrt(3 / 28), rel=1e-14)


@pytest.mark.parametrize("p", [ZERO_D, NEG_D])
def test_critical_length_needs_positive_discriminant(p):
    with pytest.raises(RegimeError):
        critical_length(p, 1, 1)
    with pytest.raises(RegimeError):
        eigenvalue_on_axis(p, 1, 1)


@pytest.mark.parametrize("k,l", [(0, 1), (1, -2), (1.5, 1)])
def test_critical_length_rejects_bad_indices(k, l):
    with pytest.raises(ParameterError):
        critical_length(REFERENCE_PARAMS, k, l)


def test_is_critical():
    assert is_critical(REFERENCE_PARAMS, math.pi) == (1, 2)
    assert is_critical(REFERENCE_PARAMS, 3.0) is None
    assert is_critical(REFERENCE_PARAMS, 3.0, tolerance=math.inf) == (1, 1)
    assert is_critical(REFERENCE_PARAMS, math.pi, k_max=1, l_max=1) is None


def test_critical_table_shape():
    rows = critical_table(REFERENCE_PARAMS, 3, 4)
    assert len(rows) == 12
    assert rows[1][:2] == (1, 2) and rows[1][2] == pytest.approx(math.pi)


def test_stationary_state_values():
    u = stationary_state(np.array([0.0, math.pi]))
    assert np.allclose(u, [0.0, 0.0], atol=1e-14)
    x = np.linspace(0, math.pi, 50)
    assert np.allclose(stationary_state(x, REFERENCE_PARAMS), 3 - np.exp(4j * x) - 2 * np.exp(-2j * x))


def test_stationary_state_warns_for_other_params():
    with pytest.warns(UserWarning):
        stationary_state(np.zeros(3), KernelParams(2.0, 2.0, 8.0, 0.0, math.pi))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        stationary_state(np.zeros(3), REFERENCE_PARAMS)


def test_stationary_residual():
    assert stationary_residual(REFERENCE_PARAMS) == 0.0
    assert stationary_residual(KernelParams(1.0, 2.0, 7.0, 0.0, math.pi)) > 1.0


def test_stationary_state_solves_the_ode():
    # Analytic derivatives of the three exponentials.
    x = np.linspace(0, math.pi, 33)
    m = np.array([0, 4, -2])
    c = np.array([3.0, -1.0, -2.0])
    E = c[None, :] * np.exp(1j * np.outer(x, m))
    d1 = E @ (1j * m)
    d2 = E @ ((1j * m) ** 2)
    d3 = E @ ((1j * m) ** 3)
    p = REFERENCE_PARAMS
    assert np.max(np.abs(p.beta * d3 - 1j * p.alpha * d2 + p.delta * d1)) <= 1e-12


def test_landmarks_positive_regime():
    lm = root_landmarks(REFERENCE_PARAMS)
    assert lm.regime == 1
    s1, s2 = lm.points
    assert s1.real == 0 and s1.imag == pytest.approx(5.0490, abs=5e-5)
    assert s1.imag > s2.imag
    rep = lm.report()
    assert rep["regime"] == "+" and set(rep) == {"regime", "s1_plus", "s2_plus"}


def test_landmarks_zero_regime():
    lm = root_landmarks(ZERO_D)
    assert lm.regime == 0
    assert lm.points == (1j,)
    assert lm.double_roots[0] == pytest.approx(1j)
    assert set(lm.report()) == {"regime", "s0"}


def test_landmarks_negative_regime_symmetry():
    p = KernelParams(1.0, 1.0, -2.0, 0.0, 1.0)
    lm = root_landmarks(p)
    assert lm.regime == -1
    s1, s2 = lm.points
    assert s1 == pytest.approx(-np.conj(s2))
    assert lm.report()["regime"] == "-"


@pytest.mark.parametrize("p", [REFERENCE_PARAMS, ZERO_D, NEG_D, KernelParams(0.5, -1.5, 2.0, 0.0, 1.0),
                               KernelParams(2.0, 1.0, -3.0, 0.0, 1.0)])
def test_repeated_root_certificate(p):
    assert repeated_root_certificate(p) <= 1e-10


def np_roots(p, s):
    return np.roots([p.beta, -1j * p.alpha, p.delta, s])


@pytest.mark.parametrize("p", [REFERENCE_PARAMS, NEG_D, KernelParams(1.0, 1.0, -2.0, 0.0, 1.0)])
def test_landmarks_match_numpy_roots(p):
    lm = root_landmarks(p)
    for s, dbl, sim in zip(lm.points, lm.double_roots, lm.simple_roots):
        r = np_roots(p, s)
        d = np.abs(r[:, None] - np.array([dbl, dbl, sim])[None, :])
        # A double root splits by O(sqrt(eps)) in floating point.
        assert np.all(d.min(axis=0) <= 1e-6)
        f, df = characteristic(p, s, sim)
        assert abs(f) <= 1e-10 and abs(df) > 1e-3


def test_hkl_values():
    assert hkl(1, 1) == 0.0
    assert hkl(1, 2) == -hkl(2, 1)
    vals = [hkl(k, l) for k in range(1, 51) for l in range(1, 51)]
    assert -1 < min(vals) and max(vals) < 1


def test_reference_eigenvalue_on_axis_is_zero():
    # The stationary state sits at the critical length L(1, 2) = pi with eigenvalue 0.
    assert abs(eigenvalue_on_axis(REFERENCE_PARAMS, 1, 2)) <= 1e-12


def test_axis_eigenvalues_between_landmarks():
    s1, s2 = root_landmarks(REFERENCE_PARAMS).points
    for k in range(1, 21):
        for l in range(1, 21):
            ev = eigenvalue_on_axis(REFERENCE_PARAMS, k, l)
            assert ev.real == 0
            assert s2.imag < ev.imag < s1.imag


def test_axis_eigenvalue_is_an_eigenvalue():
    # Roots of the cubic at s = lambda give three exponentials; their
    # determinant for u(0)=u(L)=u'(L)=0 with L = L(k, l) must vanish.
    p = REFERENCE_PARAMS
    for k, l in [(1, 1), (1, 2), (2, 3)]:
        L = critical_length(p, k, l)
        lam = eigenvalue_on_axis(p, k, l)
        r = np_roots(p, lam)
        M = np.array([np.ones(3), np.exp(r * L), r * np.exp(r * L)])
        sv = np.linalg.svd(M, compute_uv=False)
        assert sv[-1] / sv[0] <= 1e-8


@given(st.floats(0.1, 5), st.floats(-5, 5), st.floats(-5, 5))
@settings(max_examples=100)
def test_certificate_property(beta, alpha, delta):
    p = KernelParams(beta, alpha, delta, 0.0, 1.0)
    assert repeated_root_certificate(p) <= 1e-10


@given(st.floats(0.1, 5), st.floats(-5, 5), st.floats(0.01, 5), st.integers(1, 30), st.integers(1, 30))
def test_critical_length_scaling(beta, alpha, delta, k, l):
    p = KernelParams(beta, alpha, delta, 0.0, 1.0)
    Lc = critical_length(p, k, l)
    assert Lc > 0
    assert critical_length(p, l, k) == pytest.approx(Lc, rel=1e-14)
    assert critical_length(p, 2 * k, 2 * l) == pytest.approx(2 * Lc, rel=1e-12)
