import numpy as np
import pytest

import decaylab as dl
from decaylab import DensityState, ModelParams, initial_state, master_rhs
from decaylab.coherent import build_hamiltonian
from decaylab.master import IntegratorOptions
from decaylab.stepping import StepUnderflowError, TraceDriftError


def _to_full(s: DensityState) -> np.ndarray:
    # index 0 = emitter, 1..N = lattice sites
    N = s.n_sites
    rho = np.zeros((N + 1, N + 1), dtype=complex)
    rho[0, 0] = s.atom
    rho[1:, 0] = s.cross
    rho[0, 1:] = s.cross.conj()
    rho[1:, 1:] = s.photon
    return rho


def _lindblad_oracle(rho: np.ndarray, p: ModelParams) -> np.ndarray:
    # dense reference generator: commutator with the single-excitation
    # Hamiltonian plus site-population dephasing in projector form
    H = build_hamiltonian(p)
    out = -1j * (H @ rho - rho @ H)
    for n in range(1, p.N + 1):
        P = np.zeros((p.N + 1, p.N + 1))
        P[n, n] = 1.0
        out += p.gamma * (P @ rho @ P - 0.5 * (P @ rho + rho @ P))
    return out


def _random_state(rng, N: int) -> DensityState:
    A = rng.normal(size=(N + 1, N + 1)) + 1j * rng.normal(size=(N + 1, N + 1))
    rho = A @ A.conj().T
    rho /= np.trace(rho).real
    return DensityState(rho[1:, 1:].copy(), rho[1:, 0].copy(), float(rho[0, 0].real))


@pytest.mark.parametrize("N", [1, 2, 3, 6])
def test_rhs_matches_dense_generator(N):
    rng = np.random.default_rng(100 + N)
    p = ModelParams(J=1.3, g0=0.45, gamma=2.7, delta=0.2, N=N)
    for _ in range(20):
        s = _random_state(rng, N)
        got = _to_full(master_rhs(s, p))
        want = _lindblad_oracle(_to_full(s), p)
        assert np.max(np.abs(got - want)) < 1e-13


def test_rhs_is_traceless():
    rng = np.random.default_rng(7)
    p = ModelParams(J=1.0, g0=0.6, gamma=3.0, delta=0.1, N=5)
    for _ in range(100):
        d = master_rhs(_random_state(rng, 5), p)
        assert abs(d.trace()) < 1e-12


def test_rhs_preserves_hermitian_structure():
    rng = np.random.default_rng(9)
    p = ModelParams(J=0.8, g0=0.3, gamma=1.5, N=4)
    d = master_rhs(_random_state(rng, 4), p)
    assert np.max(np.abs(d.photon - d.photon.conj().T)) < 1e-14
    assert abs(float(np.imag(d.atom)) if np.iscomplexobj(d.atom) else 0.0) == 0.0


def test_rhs_at_initial_state():
    p = ModelParams(J=1.0, g0=0.3, gamma=2.0, N=4)
    d = master_rhs(initial_state(4), p)
    # the excited emitter only seeds the edge coherence at first
    assert d.atom == 0.0
    assert d.cross[0] == -1j * p.g0
    assert np.all(d.cross[1:] == 0)
    assert np.all(d.photon == 0)


def test_rhs_dimension_mismatch():
    with pytest.raises(ValueError, match="sites"):
        master_rhs(initial_state(3), ModelParams(N=5))


def test_initial_state():
    s = initial_state(3)
    assert s.trace() == 1.0
    assert s.atom == 1.0
    assert np.all(s.photon == 0) and np.all(s.cross == 0)
    with pytest.raises(ValueError):
        initial_state(0)


def test_density_state_validation():
    with pytest.raises(ValueError, match="square"):
        DensityState(np.zeros((2, 3)), np.zeros(2), 1.0)
    with pytest.raises(ValueError, match="per site"):
        DensityState(np.zeros((2, 2)), np.zeros(3), 1.0)


def _manual_rk4_step(s: DensityState, p: ModelParams, dt: float) -> DensityState:
    # Horner-form Taylor step built from the reference rhs
    ph, cr, at = s.photon.copy(), s.cross.copy(), complex(s.atom)
    kph, kcr, kat = ph.copy(), cr.copy(), at
    for j in (1, 2, 3, 4):
        d = master_rhs(DensityState(kph, kcr, kat), p)
        kph = (dt / j) * d.photon
        kcr = (dt / j) * d.cross
        kat = (dt / j) * complex(d.atom)
        ph += kph
        cr += kcr
        at += kat
    return DensityState(ph, cr, at.real)


def test_compiled_step_matches_reference_rhs():
    p = ModelParams(J=1.1, g0=0.4, gamma=2.3, delta=0.15, N=3)
    dt = 0.01
    curve = dl.evolve_master(p, np.array([0.0, dt]), IntegratorOptions(dt=dt))
    manual = _manual_rk4_step(initial_state(3), p, dt)
    assert curve.ps[1] == pytest.approx(manual.atom, abs=1e-14)


def test_zero_dephasing_reduces_to_coherent():
    p = ModelParams(J=1.0, g0=0.3, gamma=0.0, N=60)
    grid = np.linspace(0.0, 20.0, 81)
    m = dl.evolve_master(p, grid)
    c = dl.evolve_coherent(p, grid)
    assert np.max(np.abs(m.ps - c.ps)) < 1e-6


def test_single_site_reduces_to_jc():
    p = ModelParams(J=0.0, g0=1.0, gamma=2.0, N=1)
    grid = np.linspace(0.0, 10.0, 101)
    m = dl.evolve_master(p, grid)
    j = dl.evolve_jc(p, grid)
    assert np.max(np.abs(m.ps - j.ps)) < 1e-8


def test_reflected_tail_insensitive_to_lattice_size():
    # doubling the chain must not move the survival curve: the used
    # window keeps everything inside the slower, dephased light cone
    grid = np.linspace(0.0, 20.0, 81)
    a = dl.evolve_master(ModelParams(J=1.0, g0=0.3, gamma=1.0, N=40), grid)
    b = dl.evolve_master(ModelParams(J=1.0, g0=0.3, gamma=1.0, N=80), grid)
    assert np.max(np.abs(a.ps - b.ps)) < 1e-8


def test_decoupled_emitter_stays_excited():
    p = ModelParams(J=1.0, g0=0.0, gamma=1.0, N=20)
    m = dl.evolve_master(p, np.linspace(0.0, 10.0, 21))
    assert np.max(np.abs(m.ps - 1.0)) < 1e-12


def test_weak_coupling_exponential_envelope():
    p = ModelParams(J=1.0, g0=0.3, gamma=0.0, N=60)
    m = dl.evolve_master(p, np.array([0.0, 20.0]))
    assert m.ps[-1] == pytest.approx(np.exp(-0.18 * 20.0), rel=0.10)


def test_dephasing_slows_the_decay():
    grid = np.array([0.0, 40.0])
    strong = dl.evolve_master(ModelParams(J=1.0, g0=0.3, gamma=10.0, N=100), grid)
    free = dl.evolve_master(ModelParams(J=1.0, g0=0.3, gamma=0.0, N=100), grid)
    assert strong.ps[-1] > free.ps[-1]
    assert strong.ps[-1] > 0.3  # decay is dramatically arrested


def test_run_diagnostics_within_contract():
    rec = {}
    p = ModelParams(J=1.0, g0=0.3, gamma=1.0, N=30)
    curve = dl.evolve_master(p, np.linspace(0.0, 10.0, 41), IntegratorOptions(record=rec))
    assert rec["halvings"] == 0
    assert rec["dt"] == pytest.approx(0.01)
    assert rec["max_trace_drift"] < 1e-8
    assert rec["max_herm_drift"] < 1e-10
    assert rec["min_population"] > -1e-10
    assert np.all(curve.ps >= 0.0) and np.all(curve.ps <= 1.0 + 1e-10)


def test_output_times_snap_to_steps():
    p = ModelParams(J=1.0, g0=0.3, gamma=0.0, N=20)
    curve = dl.evolve_master(p, np.array([0.0, 0.503, 1.0]))
    assert np.allclose(curve.times, [0.0, 0.5, 1.0])


def test_instability_aborts_with_trace_error():
    # dt far beyond the stability boundary: the cross coherence mode
    # explodes and swallows the trace within a few steps
    p = ModelParams(J=0.0, g0=0.3, gamma=12.0, N=1)
    with pytest.raises(TraceDriftError):
        dl.evolve_master(
            p,
            np.array([0.0, 20.0]),
            IntegratorOptions(dt=4.0, trace_tol=1e-30, herm_tol=np.inf, positivity_tol=np.inf),
        )


def test_mild_instability_recovers_by_halving():
    # z = -gamma*dt = -3 sits just outside the stability region, so the
    # photon coherence grows slowly and the trace alarm fires inside the
    # retry band; one halving lands at z = -1.5 which is stable
    p = ModelParams(J=1.0, g0=0.3, gamma=12.0, N=2)
    rec = {}
    curve = dl.evolve_master(
        p,
        np.linspace(0.0, 50.0, 21),
        IntegratorOptions(dt=0.25, herm_tol=np.inf, positivity_tol=np.inf, record=rec),
    )
    assert rec["halvings"] >= 1
    assert rec["dt"] <= 0.125
    assert rec["max_trace_drift"] < 1e-8
    assert 0.0 < curve.ps[-1] < 1.0


def test_step_underflow_paths():
    p = ModelParams(J=0.0, g0=0.3, gamma=12.0, N=1)
    with pytest.raises(StepUnderflowError):
        dl.evolve_master(p, np.array([0.0, 1.0]), IntegratorOptions(dt=1e-6, min_step=1e-3))
    p2 = ModelParams(J=1.0, g0=0.3, gamma=12.0, N=2)
    with pytest.raises(StepUnderflowError):
        dl.evolve_master(
            p2,
            np.linspace(0.0, 50.0, 21),
            IntegratorOptions(dt=0.25, herm_tol=np.inf, positivity_tol=np.inf, max_halvings=0),
        )


def test_bad_step_rejected():
    p = ModelParams(N=5)
    with pytest.raises(ValueError):
        dl.evolve_master(p, np.array([0.0, 1.0]), IntegratorOptions(dt=-0.1))
