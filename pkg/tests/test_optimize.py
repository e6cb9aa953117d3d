import numpy as np
import pytest

from qdarwin import errors
from qdarwin.optimize import (
    OptimizerConfig,
    _finish,
    maximize_over_bases,
    qubit_basis,
    unitary_from_params,
)


def alignment_objective(target: np.ndarray):
    """Maximized (value 1) exactly when some basis ket matches ``target``."""

    def objective(basis: np.ndarray) -> float:
        overlaps = np.abs(target.conj() @ basis) ** 2
        return float(np.max(overlaps))

    return objective


class TestQubitPath:
    def test_finds_known_direction(self):
        target = np.array([np.cos(0.4), np.sin(0.4) * np.exp(1j * 1.1)])
        res = maximize_over_bases(alignment_objective(target), 2)
        assert res.value == pytest.approx(1.0, abs=1e-8)
        assert res.gap <= 1e-6
        assert res.restarts == 5

    def test_basis_is_orthonormal(self):
        b = qubit_basis(0.7, 2.1)
        assert np.allclose(b.conj().T @ b, np.eye(2), atol=1e-12)

    def test_deterministic(self):
        target = np.array([0.6, 0.8j])
        r1 = maximize_over_bases(alignment_objective(target), 2)
        r2 = maximize_over_bases(alignment_objective(target), 2)
        assert r1.value == r2.value
        assert np.array_equal(r1.basis, r2.basis)


class TestGeneralPath:
    def test_unitary_from_params(self):
        rng = np.random.default_rng(0)
        for d in (3, 4):
            u = unitary_from_params(rng.standard_normal(d * d), d)
            assert np.allclose(u @ u.conj().T, np.eye(d), atol=1e-10)

    def test_finds_known_direction_dim3(self):
        target = np.zeros(3, dtype=complex)
        target[1] = 1.0
        config = OptimizerConfig(restarts=6, max_refine_iter=200)
        res = maximize_over_bases(alignment_objective(target), 3, config)
        assert res.value == pytest.approx(1.0, abs=1e-6)

    def test_same_seed_same_result(self):
        target = np.array([0.5, 0.5, 0.5 + 0.5j]) / np.sqrt(1.0)
        target /= np.linalg.norm(target)
        config = OptimizerConfig(restarts=4, seed=12)
        r1 = maximize_over_bases(alignment_objective(target), 3, config)
        r2 = maximize_over_bases(alignment_objective(target), 3, config)
        assert r1.value == r2.value


class TestConvergenceRule:
    def test_gap_within_tolerance_passes(self):
        res = _finish([(0.5, np.eye(2)), (0.5 - 1e-8, np.eye(2))],
                      OptimizerConfig())
        assert res.value == 0.5
        assert res.gap == pytest.approx(1e-8)

    def test_gap_beyond_tolerance_raises(self):
        with pytest.raises(errors.OptimizerDidNotConverge) as exc:
            _finish([(0.5, np.eye(2)), (0.3, np.eye(2))], OptimizerConfig())
        assert exc.value.gap == pytest.approx(0.2)

    def test_non_strict_mode_reports_gap(self):
        config = OptimizerConfig(strict_convergence=False)
        res = _finish([(0.5, np.eye(2)), (0.3, np.eye(2))], config)
        assert res.value == 0.5
        assert res.gap == pytest.approx(0.2)

    def test_single_restart_counts_as_converged(self):
        res = _finish([(0.7, np.eye(2))], OptimizerConfig())
        assert res.gap == 0.0

    def test_value_ties_resolve_to_first(self):
        first = np.eye(2)
        second = np.diag([1.0, -1.0])
        res = _finish([(0.4, first), (0.4, second)], OptimizerConfig())
        assert res.basis is first
