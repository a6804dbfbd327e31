import math

import numpy as np
import pytest

from babenko.continuation import (
    Branch,
    BranchEvent,
    ContinuationConfig,
    _symmetry_classes,
    continue_branch,
    detect_secondary_bifurcations,
    detect_turning_points,
    start_branch,
    switch_branch,
    trace_to_extreme,
    trivial_bifurcation_mu,
)
from babenko.solver import SolutionPoint, SolveFailure, get_system
from babenko.spectral import SpectralField

from conftest import H


class TestConfigAndSeeding:
    def test_trivial_bifurcation_values(self):
        assert trivial_bifurcation_mu(1, H) == pytest.approx(math.tanh(H))
        assert trivial_bifurcation_mu(3, H) == pytest.approx(math.tanh(3 * H) / 3)
        with pytest.raises(ValueError):
            trivial_bifurcation_mu(0, H)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ContinuationConfig(step_min=1e-2, amplitude_step=1e-3)
        with pytest.raises(ValueError):
            ContinuationConfig(extreme_stop_ratio=0.0)

    def test_start_branch_seeds_pure_mode(self):
        cfg = ContinuationConfig(N=32)
        b = start_branch(2, 0.01, H, cfg)
        assert b.label == "C2"
        assert b.mode == 2
        assert len(b.points) == 1
        pt = b.points[0]
        # pinned at the node nearest the crest, slightly below s itself
        assert pt.sup_norm == pytest.approx(0.01, rel=1e-2)
        # the seed is dominated by mode 2; only the nonlinear mean and
        # harmonic corrections are populated besides it
        c = np.abs(pt.coeffs)
        assert int(np.argmax(c)) == 2
        assert c[2] > 10 * np.max(np.delete(c, 2))

    def test_start_branch_rejects_large_seed(self):
        with pytest.raises(ValueError):
            start_branch(1, 0.5, H)

    def test_continuation_requires_seed(self):
        with pytest.raises(ValueError):
            continue_branch(Branch(label="empty", mode=1), H)


class TestAmplitudeContinuation:
    def test_amplitudes_increase_monotonically(self, c1_coarse):
        amps = c1_coarse.amplitudes()
        assert np.all(np.diff(amps) > 0)
        assert np.all(np.diff(amps) <= ContinuationConfig().step_max + 1e-12)

    def test_stops_at_amplitude_max(self, c1_coarse):
        assert c1_coarse.last.sup_norm == pytest.approx(0.1, abs=1e-12)
        assert not c1_coarse.terminated()

    def test_invariants_hold_along_branch(self, c1_coarse):
        for p in c1_coarse.points:
            assert p.mean <= 0
            assert p.sup_norm < 0.5 * p.mu
            assert 0 < p.r < 1
            assert p.residual_norm < 1e-9

    def test_retrace_is_reproducible(self, c1_coarse):
        cfg = ContinuationConfig(N=64, amplitude_max=0.1)
        again = continue_branch(start_branch(1, 0.01, H, cfg), H, cfg)
        assert len(again.points) == len(c1_coarse.points)
        assert again.last.mu == pytest.approx(c1_coarse.last.mu, abs=1e-12)

    def test_small_amplitude_limit_of_mu(self):
        # mu(a) -> mu_n linearly in a^2; extrapolate from two tiny amplitudes
        cfg = ContinuationConfig(N=64)
        b = start_branch(3, 1e-3, H, cfg)
        cfg2 = ContinuationConfig(N=64, amplitude_step=1e-3, step_min=1e-6,
                                  amplitude_max=2e-3)
        continue_branch(b, H, cfg2)
        a = b.amplitudes()
        mu = b.mus()
        mu0 = mu[0] - (mu[-1] - mu[0]) * a[0] ** 2 / (a[-1] ** 2 - a[0] ** 2)
        assert mu0 == pytest.approx(trivial_bifurcation_mu(3, H), abs=1e-6)


class TestEndpointAndTurning:
    def test_reaches_extreme_termination(self, c1_full):
        kinds = [e.kind for e in c1_full.events]
        assert "extreme_termination" in kinds
        p = c1_full.last
        assert (0.5 * p.mu - p.sup_norm) / (0.5 * p.mu) < 5e-2

    def test_turning_point_recorded(self, c1_full):
        # the fold in mu only resolves once the crest is; N=512 suffices
        tps = [e for e in c1_full.events if e.kind == "turning_point"]
        assert len(tps) == 1
        assert tps[0].mu == pytest.approx(0.71604, abs=5e-3)
        assert tps[0].amplitude == pytest.approx(0.34553, abs=5e-3)

    def test_trace_to_extreme_returns_event(self):
        cfg = ContinuationConfig(N=32)
        b = start_branch(1, 0.01, H, cfg)
        ev = trace_to_extreme(b, H, cfg)
        assert ev.kind in ("extreme_termination", "hard_failure")

    def test_detect_turning_points_on_synthetic_parabola(self):
        # mu(a) = 0.7 - (a - 0.3)^2 peaks at a = 0.3
        grid_N = 8
        sys = get_system(grid_N, H)
        pts = []
        for a in np.linspace(0.25, 0.35, 11):
            w = SpectralField(sys.grid, coeffs=np.zeros(grid_N))
            mu = 0.7 - (a - 0.3) ** 2
            p = SolutionPoint.from_solution(w, mu, H)
            object.__setattr__(p, "sup_norm", float(a))
            pts.append(p)
        b = Branch(label="synthetic", mode=1, points=pts)
        events = detect_turning_points(b)
        assert len(events) == 1
        assert events[0].amplitude == pytest.approx(0.3, abs=1e-10)
        assert events[0].mu == pytest.approx(0.7, abs=1e-10)

    def test_monotone_branch_has_no_turning_point(self, c1_coarse):
        assert detect_turning_points(c1_coarse) == []


class TestSymmetryClasses:
    @pytest.mark.parametrize("mode", [2, 3, 5])
    def test_partition_is_disjoint_and_complete(self, mode):
        N = 32
        classes = _symmetry_classes(N, mode)
        allidx = np.concatenate(classes)
        assert np.array_equal(np.sort(allidx), np.arange(N))
        assert len(classes) == mode // 2 + 1

    def test_class_members_pair_residues(self):
        classes = _symmetry_classes(20, 5)
        # class {1, 4}: residues 1 and 4 mod 5
        assert set(classes[1]) == {1, 4, 6, 9, 11, 14, 16, 19}

    def test_trivial_mode_single_class(self):
        assert len(_symmetry_classes(16, None)) == 1
        assert len(_symmetry_classes(16, 1)) == 1


@pytest.fixture(scope="module")
def c2_256():
    cfg = ContinuationConfig(N=256)
    b = continue_branch(start_branch(2, 0.01, H, cfg), H, cfg)
    detect_secondary_bifurcations(b, H, cfg)
    return b, cfg


class TestSecondaryDetection:
    def test_c2_event_found_near_reference(self, c2_256):
        b, _ = c2_256
        evs = [e for e in b.events if e.kind == "secondary_bifurcation"]
        assert len(evs) == 1
        assert evs[0].mu == pytest.approx(0.51113, abs=5e-3)

    def test_null_vector_lives_in_odd_class(self, c2_256):
        b, _ = c2_256
        ev = next(e for e in b.events if e.kind == "secondary_bifurcation")
        phi = ev.diagnostics["null_vector_coeffs"]
        assert np.max(np.abs(phi[::2])) < 1e-12  # even modes untouched
        assert np.max(np.abs(phi[1::2])) > 0.1

    def test_switching_breaks_symmetry(self, c2_256):
        b, cfg = c2_256
        ev = next(e for e in b.events if e.kind == "secondary_bifurcation")
        sec = switch_branch(b, ev, +1, H, cfg)
        assert sec.parent == "C2"
        c = sec.last.coeffs
        assert np.max(np.abs(c[1::2])) > 1e-5  # odd modes now populated

    def test_switch_requires_bifurcation_event(self, c2_256):
        b, cfg = c2_256
        fake = BranchEvent("turning_point", 0.5, 0.2, 0.2)
        with pytest.raises(ValueError):
            switch_branch(b, fake, +1, H, cfg)

    def test_short_branch_yields_no_events(self):
        cfg = ContinuationConfig(N=32)
        b = start_branch(2, 0.01, H, cfg)
        assert detect_secondary_bifurcations(b, H, cfg) == []
