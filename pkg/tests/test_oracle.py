import numpy as np
import pytest

from lambda_fwm import InvalidParameter, NotConverged, ProbePulse, StepTooLarge, solve_spectral
from lambda_fwm.model import MediumParams
from lambda_fwm.oracle import (
    SpaceTimeGrid,
    _march,
    compare_solvers,
    compare_traces,
    field_rate_bound,
    oracle_run,
    oracle_solve,
    richardson_error,
)
from lambda_fwm.presets import RESONANT

# small Rabi frequencies keep these grids cheap while exercising every coupling
SMALL = MediumParams(omega12=5.0, omega13=5.0, delta2=3.0, delta3=3.0, gamma1=0.1, gamma2=1.0, gamma3=1.0, kappa02=5.0, kappa03=5.0)


class TestGrid:
    def test_invariants(self):
        with pytest.raises(InvalidParameter):
            SpaceTimeGrid(4, -5, 5, 100)
        with pytest.raises(InvalidParameter):
            SpaceTimeGrid(10, -5, 5, 10)
        with pytest.raises(InvalidParameter):
            SpaceTimeGrid(10, 5, -5, 100)

    def test_auto_resolves_rabi_and_covers_pulse(self):
        g = SpaceTimeGrid.auto(SMALL, 2.0)
        assert g.ds <= 0.1 / 5.0
        assert g.s_min <= -5 and g.s_max >= 5

    def test_halved(self):
        g = SpaceTimeGrid(10, -6, 6, 100).halved()
        assert (g.z_steps, g.s_steps) == (20, 200)

    def test_coarse_s_grid_rejected(self):
        with pytest.raises(InvalidParameter):
            oracle_run(SMALL, ProbePulse(1.0), 1.0, SpaceTimeGrid(16, -6, 6, 64))


class TestMarch:
    def test_no_medium_passes_probe_unchanged(self):
        p = SMALL.replace(kappa02=0.0, kappa03=0.0)
        res = oracle_run(p, ProbePulse(1.0), 2.0, richardson=False)
        s = res.trace.retarded_times
        assert np.max(np.abs(res.trace.omega20 - np.exp(-(s**2)))) < 1e-14
        assert np.all(res.trace.omega30 == 0)
        assert field_rate_bound(p) == 0.0

    def test_zero_probe_leaves_atoms_in_ground_state(self):
        res = oracle_run(SMALL, ProbePulse(0.0), 1.0, richardson=False)
        for arr in (res.state.a1, res.state.a2, res.state.a3, res.state.omega20, res.state.omega30):
            assert np.all(arr == 0)

    def test_linear_in_probe(self):
        one = oracle_run(SMALL, ProbePulse(1.0), 1.0, richardson=False)
        two = oracle_run(SMALL, ProbePulse(2.0), 1.0, richardson=False)
        for a, b in (
            (one.state.a2, two.state.a2),
            (one.state.a3, two.state.a3),
            (one.state.omega20, two.state.omega20),
            (one.state.omega30, two.state.omega30),
        ):
            assert np.array_equal(2.0 * a, b)

    def test_atomic_norm_stays_small(self):
        res = oracle_run(SMALL, ProbePulse(0.1), 1.0, richardson=False)
        norm = np.abs(res.state.a1) ** 2 + np.abs(res.state.a2) ** 2 + np.abs(res.state.a3) ** 2
        assert np.max(norm) <= 1.0

    def test_richardson_error_drops_eightfold(self):
        g = SpaceTimeGrid.auto(SMALL, 2.0)
        states = []
        for _ in range(3):
            states.append(_march(SMALL, ProbePulse(1.0), 2.0, g)[1])
            g = g.halved()
        e1 = richardson_error(states[0], states[1])
        e2 = richardson_error(states[1], states[2])
        assert e1 / e2 >= 8.0

    def test_heun_is_second_order(self):
        g = SpaceTimeGrid.auto(SMALL, 2.0)
        states = []
        for _ in range(3):
            states.append(_march(SMALL, ProbePulse(1.0), 2.0, g, scheme="heun")[1])
            g = g.halved()
        ratio = richardson_error(states[0], states[1]) / richardson_error(states[1], states[2])
        assert 3.5 < ratio < 8.0

    def test_unknown_scheme(self):
        with pytest.raises(InvalidParameter):
            _march(SMALL, ProbePulse(1.0), 1.0, SpaceTimeGrid.auto(SMALL, 1.0), scheme="euler")

    def test_step_too_large(self):
        g = SpaceTimeGrid.auto(RESONANT, 10.0)
        coarse = SpaceTimeGrid(8, g.s_min, g.s_max, g.s_steps)
        with pytest.raises(StepTooLarge):
            _march(RESONANT, ProbePulse(1.0), 10.0, coarse)

    def test_not_converged(self):
        with pytest.raises(NotConverged) as info:
            oracle_run(SMALL, ProbePulse(1.0), 2.0, tol=1e-12)
        assert info.value.error_estimate > 1e-12


class TestAgainstSpectral:
    def test_small_medium_agrees(self):
        cmp, oracle_trace, spectral_trace = compare_solvers(SMALL, ProbePulse(1.0), 2.0)
        assert max(cmp.relative_l2_error) < 1e-4
        assert oracle_trace.times.size == spectral_trace.times.size

    def test_self_comparison_is_exact(self):
        trace = oracle_solve(SMALL, ProbePulse(1.0), 1.0)
        cmp = compare_traces(trace, trace)
        assert cmp.max_abs_error == (0.0, 0.0) and cmp.relative_l2_error == (0.0, 0.0)
        assert set(cmp.as_dict()) == {"max_abs_error", "relative_l2_error"}

    def test_mismatched_grids_rejected(self):
        a = oracle_solve(SMALL, ProbePulse(1.0), 1.0)
        b, _ = solve_spectral(SMALL, ProbePulse(1.0), 1.0, a.times[:10])
        with pytest.raises(InvalidParameter):
            compare_traces(a, b)

    def test_resonant_ratio_lock(self):
        res = oracle_run(RESONANT, ProbePulse(1.0), 10.0)
        a, b = res.trace.omega20, res.trace.omega30
        mask = (np.abs(a) > 1e-4 * np.max(np.abs(a))) & (np.abs(b) > 1e-4 * np.max(np.abs(b)))
        ratio = a[mask] / b[mask]
        assert np.max(np.abs(ratio - 0.25)) < 1e-4
