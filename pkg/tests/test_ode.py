"""Tests for the time-ordered integration backend.

Oracles: the detuned Rabi closed form at zero gravity, and an in-test
piecewise-constant 2x2 eigen-propagator for the chirped case.  The literal
and rotating frames must agree (gauge invariance).
"""

import math

import numpy as np
import pytest

from gravjcm.analytic import detuning0_of_p
from gravjcm.core import build_momentum_grid, coherent_amplitudes, paper_defaults
from gravjcm.ode import (
    branch_states_ode,
    branch_states_ode_sweep,
    evolve_block,
)


def rabi_excited_population(n, p, t, params):
    """|c_e|^2 for a static detuning (qg = 0), from the 2x2 diagonalization."""
    om = params.lam * math.sqrt(n + 1.0)
    d0 = detuning0_of_p(p, params)
    omr = math.sqrt(om * om + d0 * d0 / 4.0)
    return 1.0 - (om * om / (omr * omr)) * math.sin(omr * t) ** 2


def stepped_propagator(n, p, t, params, steps=20000):
    """Midpoint piecewise-constant propagator in the rotating frame.

    H(t) = [[0, Omega], [Omega, -(d0 - qg t)]] on (c_e, d_g); each slice is
    advanced with the exact 2x2 unitary of the frozen midpoint Hamiltonian.
    """
    om = params.lam * math.sqrt(n + 1.0)
    d0 = detuning0_of_p(p, params)
    y = np.array([1.0 + 0.0j, 0.0 + 0.0j])
    h = t / steps
    for k in range(steps):
        tm = (k + 0.5) * h
        chirped = d0 - params.qg * tm
        # H = c I + v.sigma with c = -chirped/2
        c = -chirped / 2.0
        vz = chirped / 2.0
        vnorm = math.sqrt(om * om + vz * vz)
        if vnorm == 0.0:
            u = np.exp(-1j * c * h) * np.eye(2)
        else:
            cs = math.cos(vnorm * h)
            sn = math.sin(vnorm * h) / vnorm
            u = np.exp(-1j * c * h) * np.array(
                [[cs - 1j * sn * vz, -1j * sn * om],
                 [-1j * sn * om, cs + 1j * sn * vz]]
            )
        y = u @ y
    phi = d0 * t - 0.5 * params.qg * t * t
    return y[0], y[1] * np.exp(-1j * phi)


def test_block_matches_detuned_rabi_formula():
    p = paper_defaults(qg=0.0)
    rng = np.random.default_rng(41)
    for _ in range(12):
        n = int(rng.integers(0, 40))
        pp = rng.uniform(-3, 3)
        t = rng.uniform(1e-7, 1e-5)
        blk = evolve_block(n, pp, t, p)
        assert abs(blk.c_e) ** 2 == pytest.approx(
            rabi_excited_population(n, pp, t, p), abs=1e-9
        )
        assert abs(blk.c_e) ** 2 + abs(blk.c_g) ** 2 == pytest.approx(1.0, abs=1e-9)


def test_block_matches_stepped_propagator_with_gravity():
    p = paper_defaults(qg=1.5e7)
    for n, pp, t in ((0, 0.0, 5e-6), (8, 1.2, 3e-6), (24, -0.7, 7e-6)):
        blk = evolve_block(n, pp, t, p)
        ce, cg = stepped_propagator(n, pp, t, p)
        assert abs(blk.c_e - ce) < 1e-6
        assert abs(blk.c_g - cg) < 1e-6


def test_frames_are_gauge_equivalent():
    p = paper_defaults(qg=1.5e7)
    rng = np.random.default_rng(42)
    for _ in range(6):
        n = int(rng.integers(0, 30))
        pp = rng.uniform(-2, 2)
        t = rng.uniform(1e-7, 1e-5)
        a = evolve_block(n, pp, t, p, frame="literal")
        b = evolve_block(n, pp, t, p, frame="rotating")
        assert abs(a.c_e - b.c_e) < 1e-8
        assert abs(a.c_g - b.c_g) < 1e-8


def test_argument_validation():
    p = paper_defaults()
    with pytest.raises(ValueError):
        evolve_block(-1, 0.0, 1e-6, p)
    with pytest.raises(ValueError):
        evolve_block(0, 0.0, -1e-6, p)
    with pytest.raises(ValueError):
        evolve_block(0, 0.0, 1e-6, p, tol=1e-4)
    with pytest.raises(ValueError):
        evolve_block(0, 0.0, 1e-6, p, tol=1e-13)
    with pytest.raises(ValueError):
        evolve_block(0, 0.0, 1e-6, p, frame="interaction")


def test_zero_time_is_identity():
    p = paper_defaults(qg=0.5e7)
    blk = evolve_block(3, 0.5, 0.0, p)
    assert blk.c_e == 1.0
    assert blk.c_g == 0.0


@pytest.fixture(scope="module")
def sweep_setup():
    field = coherent_amplitudes(5.0, 100)
    grid = build_momentum_grid(1.0, 8)
    return field, grid


def test_sweep_initial_state_and_norm(sweep_setup):
    field, grid = sweep_setup
    p = paper_defaults(qg=1.5e7)
    times = np.linspace(0.0, 1e-5, 6)
    states = branch_states_ode_sweep(times, p, field, grid)
    assert len(states) == 6
    np.testing.assert_allclose(states[0].c[0, :101], field.w, atol=1e-12)
    for st in states:
        assert st.norm() == pytest.approx(1.0, abs=1e-8)
        assert st.meta["backend"] == "ode"


def test_sweep_consistent_with_single_shot(sweep_setup):
    field, grid = sweep_setup
    p = paper_defaults(qg=0.5e7)
    t = 6e-6
    sweep = branch_states_ode_sweep(np.array([2e-6, t]), p, field, grid)
    single = branch_states_ode(t, p, field, grid)
    assert float(np.max(np.abs(sweep[1].c - single.c))) < 1e-8
    assert float(np.max(np.abs(sweep[1].d - single.d))) < 1e-8


def test_sweep_time_grid_validation(sweep_setup):
    field, grid = sweep_setup
    p = paper_defaults()
    with pytest.raises(ValueError):
        branch_states_ode_sweep(np.array([1e-6, 1e-6]), p, field, grid)
    with pytest.raises(ValueError):
        branch_states_ode_sweep(np.array([-1e-6, 1e-6]), p, field, grid)
    with pytest.raises(ValueError):
        branch_states_ode_sweep(np.array([]), p, field, grid)


def test_ground_branch_alignment(sweep_setup):
    # D lives one Fock level above its block: D[k, 0] must stay empty
    field, grid = sweep_setup
    p = paper_defaults(qg=0.0, delta0=0.0)
    st = branch_states_ode(2e-6, p, field, grid)
    assert float(np.max(np.abs(st.d[:, 0]))) == 0.0
    assert st.nfock == field.nmax + 2
