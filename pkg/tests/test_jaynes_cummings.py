import numpy as np
import pytest

import decaylab as dl
from decaylab import JCState, ModelParams


def _superop_oracle(g0, gamma, delta):
    # assemble the generator column by column by pushing basis matrices
    # through the two-level Lindbladian, then reorder to the
    # (rho_ee, rho_00, rho_0e, rho_e0) element convention
    H = np.array([[delta, g0], [g0, 0.0]], dtype=complex)
    P = np.diag([0.0, 1.0]).astype(complex)

    def lind(rho):
        return -1j * (H @ rho - rho @ H) + gamma * (P @ rho @ P - 0.5 * (P @ rho + rho @ P))

    # element k of the vector picks matrix slot (i, j)
    slots = [(0, 0), (1, 1), (1, 0), (0, 1)]
    M = np.zeros((4, 4), dtype=complex)
    for col, (i, j) in enumerate(slots):
        basis = np.zeros((2, 2), dtype=complex)
        basis[i, j] = 1.0
        out = lind(basis)
        for row, (a, b) in enumerate(slots):
            M[row, col] = out[a, b]
    return M


@pytest.mark.parametrize("g0,gamma,delta", [(1.0, 0.0, 0.0), (0.3, 2.5, 0.0), (0.7, 5.0, 0.4)])
def test_relaxation_matrix_matches_superoperator(g0, gamma, delta):
    got = dl.relaxation_matrix(g0, gamma, delta)
    want = _superop_oracle(g0, gamma, delta)
    assert np.max(np.abs(got - want)) < 1e-14


def test_state_type():
    s = JCState(1.0, 0.0, 0.0, 0.0)
    assert np.array_equal(s.as_vector(), [1, 0, 0, 0])
    s2 = JCState(0.5, 0.5, 0.1 + 0.2j, 0.1 - 0.2j)
    assert s2.as_vector()[2] == 0.1 + 0.2j
    with pytest.raises(ValueError):
        JCState(0.5, 0.5, 0.1 + 0.2j, 0.1 + 0.2j)


def test_undamped_rabi():
    grid = np.linspace(0.0, 20.0, 401)
    curve = dl.evolve_jc(ModelParams(J=0.0, g0=1.0, gamma=0.0, N=1), grid)
    assert np.max(np.abs(curve.ps - np.cos(grid) ** 2)) < 1e-8


def test_requires_single_cavity():
    with pytest.raises(ValueError, match="J = 0"):
        dl.evolve_jc(ModelParams(J=1.0, g0=0.3, N=1), [0.0, 1.0])


def test_overdamped_curve_monotone_after_transient():
    p = ModelParams(J=0.0, g0=1.0, gamma=20.0, N=1)
    grid = np.linspace(0.0, 20.0, 801)
    curve = dl.evolve_jc(p, grid)
    tail = curve.ps[grid >= 1.0]
    assert np.all(np.diff(tail) <= 1e-12)
    assert tail[-1] > 0.5


def test_population_sum_conserved():
    # rerun the integrator on the raw vector to watch both populations
    from decaylab.jaynes_cummings import relaxation_matrix
    from decaylab.stepping import rk4_propagate

    A = relaxation_matrix(0.8, 3.0, 0.0)
    y = JCState(1.0, 0.0, 0.0, 0.0).as_vector()
    sums = []
    rk4_propagate(
        lambda v: A @ v,
        y,
        1e-3,
        np.arange(0, 5001, 500),
        lambda i, v: sums.append(abs(v[0].real + v[1].real - 1.0)),
    )
    assert max(sums) < 1e-10


@pytest.mark.parametrize("ratio", [0.0, 1.0, 2.0, 7.9, 8.1, 20.0])
def test_spectrum_matches_direct_eigendecomposition(ratio):
    g0 = 0.9
    spectrum = dl.jc_spectrum(ratio, g0)
    direct = np.linalg.eigvals(dl.relaxation_matrix(g0, ratio * g0))
    got = np.sort_complex(np.round(spectrum.eigenvalues, 14))
    want = np.sort_complex(np.round(direct, 14))
    assert np.max(np.abs(got - want)) < 1e-12


def test_spectrum_exact_at_the_defective_point():
    # the matrix has a Jordan block there, so a numerical
    # eigendecomposition splits the double root at the sqrt(eps) scale;
    # the closed form must return it exactly
    g0 = 0.9
    spectrum = dl.jc_spectrum(8.0, g0)
    double = spectrum.eigenvalues[np.abs(spectrum.eigenvalues + 2.0 * g0) < 1e-12]
    assert double.size == 2
    assert np.max(np.abs(double - (-2.0 * g0))) == 0.0
    direct = np.linalg.eigvals(dl.relaxation_matrix(g0, 8.0 * g0))
    got = np.sort_complex(spectrum.eigenvalues)
    want = np.sort_complex(direct)
    assert np.max(np.abs(got - want)) < 1e-6


def test_spectrum_limits():
    s0 = dl.jc_spectrum(0.0, 1.0)
    assert not s0.is_overdamped
    got = np.sort_complex(s0.eigenvalues)
    want = np.sort_complex(np.array([0.0, 0.0, 2j, -2j]))
    assert np.max(np.abs(got - want)) < 1e-14

    s20 = dl.jc_spectrum(20.0, 1.0)
    assert s20.is_overdamped
    assert np.max(np.abs(s20.eigenvalues.imag)) == 0.0

    s4 = dl.jc_spectrum(4.0, 1.0)
    assert not s4.is_overdamped
    assert np.max(np.abs(s4.eigenvalues.imag)) > 1.0


def test_imaginary_parts_vanish_exactly_past_the_transition():
    below = dl.jc_spectrum(8.0 - 1e-6, 1.0)
    above = dl.jc_spectrum(8.0 + 1e-6, 1.0)
    assert np.max(np.abs(below.eigenvalues.imag)) > 0.0
    assert np.max(np.abs(above.eigenvalues.imag)) == 0.0


def test_rate_law_endpoints_and_value():
    p = ModelParams(J=0.0, g0=0.3, gamma=10.0, N=1)
    curve = dl.jc_rate_approx(p, np.array([0.0, 1e9]))
    assert curve.ps[0] == 1.0
    assert curve.ps[-1] == pytest.approx(0.5, abs=1e-12)
    # R = 4 g0^2 / gamma = 0.036 shows up in the exponent
    mid = dl.jc_rate_approx(p, np.array([10.0])).ps[0]
    assert mid == pytest.approx(0.5 * (1.0 + np.exp(-0.72)), rel=1e-14)
    with pytest.raises(ValueError):
        dl.jc_rate_approx(ModelParams(J=0.0, g0=0.3, gamma=0.0, N=1), [0.0, 1.0])


def test_rate_law_error_small_and_monotone_in_dephasing():
    grid = np.linspace(0.0, 20.0, 801)
    errors = []
    for ratio in (10.0, 20.0, 40.0, 80.0):
        p = ModelParams(J=0.0, g0=1.0, gamma=ratio, N=1)
        exact = dl.evolve_jc(p, grid)
        approx = dl.jc_rate_approx(p, grid)
        errors.append(np.max(np.abs(exact.ps - approx.ps)))
    assert errors[1] < 0.03
    assert all(a > b for a, b in zip(errors, errors[1:]))


@pytest.mark.parametrize("gamma", [1.0, 4.0])
def test_stationary_state_is_half(gamma):
    p = ModelParams(J=0.0, g0=1.0, gamma=gamma, N=1)
    R = 4.0 / gamma
    T = 50.0 / min(R, gamma)
    curve = dl.evolve_jc(p, np.array([0.0, T]))
    assert abs(curve.ps[-1] - 0.5) < 1e-3


def test_exceptional_point_location():
    assert dl.exceptional_point() == pytest.approx(8.0, abs=1e-9)
    assert dl.exceptional_point(g0=0.7) == pytest.approx(8.0, abs=1e-9)
    with pytest.raises(ValueError, match="bracket"):
        dl.exceptional_point(lo=10.0, hi=16.0)


def test_eigenvector_coalescence():
    assert dl.eigenvector_coalescence_gap(8.0) < 1e-6
    assert dl.eigenvector_coalescence_gap(4.0) > 1e-3
    assert dl.eigenvector_coalescence_gap(20.0) > 1e-3


def test_spectrum_validation():
    with pytest.raises(ValueError):
        dl.jc_spectrum(-1.0)
    with pytest.raises(ValueError):
        dl.jc_spectrum(2.0, g0=0.0)
