"""Entropic and geometric measures on system-fragment states, all in bits.

The pointer basis used by the Holevo quantity, discord, and the accessible
information is the canonical eigenbasis of the reduced system state, computed
with the deterministic eigendecomposition of :mod:`qdarwin.core`.  Worked
families whose preferred basis is selected by decoherence are diagonal in it,
and the closed-form regressions of the two-qubit counterexample family pin
this choice (a global search over measurement bases would strictly exceed
those reference values; see the accessible-information lower bound for where
genuine measurement optimization does happen).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import (
    DEFAULT_TOL,
    DensityMatrix,
    ProjectiveMeasurement,
    Tolerances,
    eig_hermitian,
    partial_trace,
)
from .errors import DimensionMismatch, OverlappingParts
from .optimize import DEFAULT_OPT, EPS_NUM, OptimizerConfig, maximize_over_bases

TAU_COMM = 1e-9


@dataclass(frozen=True)
class MeasureValue:
    """Scalar measure in bits plus the basis and search diagnostics behind it."""

    value: float
    basis: ProjectiveMeasurement | None
    restarts: int = 0
    gap: float = 0.0


@dataclass(frozen=True)
class AccessibleInfoBounds:
    """Bracket for the accessible information; exact when the ensemble commutes."""

    lower: float
    upper: float
    exact: bool
    lower_optimized: bool
    restarts: int = 0
    gap: float = 0.0


def entropy_bits(probs: Iterable[float]) -> float:
    """Shannon entropy of a probability vector, with 0 log 0 = 0."""
    p = np.asarray(list(probs), dtype=float)
    p = p[p > 0.0]
    if p.size == 0:
        return 0.0
    return float(-(p * np.log2(p)).sum())


def von_neumann_entropy(rho: DensityMatrix | np.ndarray,
                        tol: Tolerances = DEFAULT_TOL) -> float:
    """Entropy -tr(rho log2 rho); eigenvalues within the PSD band clamp to [0, 1]."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    return entropy_bits(np.clip(np.linalg.eigvalsh(m), 0.0, 1.0))


def _entropy_of_labels(rho: DensityMatrix, labels: Sequence[str]) -> float:
    return von_neumann_entropy(partial_trace(rho, labels))


def _disjoint(*parts: Sequence[str]) -> None:
    seen: set[str] = set()
    for part in parts:
        s = set(part)
        if s & seen:
            raise OverlappingParts(f"label sets overlap: {sorted(s & seen)}")
        seen |= s


def mutual_information(rho: DensityMatrix, part_a: Sequence[str],
                       part_b: Sequence[str]) -> float:
    """I(A:B) = H(A) + H(B) - H(AB) on the reduction to the union of A and B."""
    a = rho.layout.require(part_a)
    b = rho.layout.require(part_b)
    _disjoint(a, b)
    joint = partial_trace(rho, a + b)
    return (_entropy_of_labels(joint, a) + _entropy_of_labels(joint, b)
            - von_neumann_entropy(joint))


def conditional_mutual_information(rho: DensityMatrix, part_a: Sequence[str],
                                   part_b: Sequence[str],
                                   cond: Sequence[str]) -> float:
    """I(A:B|C) = H(AC) + H(BC) - H(C) - H(ABC); tiny negatives clamp to 0."""
    a = rho.layout.require(part_a)
    b = rho.layout.require(part_b)
    c = tuple(rho.layout.require(cond)) if list(cond) else ()
    _disjoint(a, b, c)
    joint = partial_trace(rho, a + b + c)
    h_ac = _entropy_of_labels(joint, a + c)
    h_bc = _entropy_of_labels(joint, b + c)
    h_c = _entropy_of_labels(joint, c) if c else 0.0
    value = h_ac + h_bc - h_c - von_neumann_entropy(joint)
    if -EPS_NUM <= value < 0.0:
        return 0.0
    return value


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of the difference, via eigenvalues of (a - b)."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    return 0.5 * trace_norm(a.matrix - b.matrix)


def trace_norm(matrix: np.ndarray) -> float:
    m = np.asarray(matrix, dtype=complex)
    if np.allclose(m, m.conj().T, atol=1e-12):
        return float(np.abs(np.linalg.eigvalsh(m)).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def _sqrtm_psd(matrix: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(matrix)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(a: DensityMatrix | np.ndarray, b: DensityMatrix | np.ndarray) -> float:
    """Square-root fidelity ||sqrt(a) sqrt(b)||_1, in [0, 1]."""
    ma = a.matrix if isinstance(a, DensityMatrix) else np.asarray(a, dtype=complex)
    mb = b.matrix if isinstance(b, DensityMatrix) else np.asarray(b, dtype=complex)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"shapes differ: {ma.shape} vs {mb.shape}")
    s = np.linalg.svd(_sqrtm_psd(ma) @ _sqrtm_psd(mb), compute_uv=False)
    return float(min(s.sum(), 1.0))


def pointer_basis(rho: DensityMatrix, system: str,
                  tol: Tolerances = DEFAULT_TOL) -> ProjectiveMeasurement:
    """Canonical eigenbasis of the reduced system state."""
    rho_s = partial_trace(rho, [system])
    _, vecs = eig_hermitian(rho_s.matrix, tol)
    return ProjectiveMeasurement(system, vecs)


def pointer_gap(rho: DensityMatrix, system: str) -> float:
    """Smallest eigenvalue gap of the reduced system state (0 if one-dimensional)."""
    rho_s = partial_trace(rho, [system])
    w = np.sort(np.linalg.eigvalsh(rho_s.matrix))
    if w.size < 2:
        return float("inf")
    return float(np.min(np.diff(w)))


def _bipartite_tensor(rho: DensityMatrix, system: str) -> tuple[np.ndarray, int, int]:
    labels = rho.layout.labels
    n = len(labels)
    idx = rho.layout.index_of(system)
    order = [idx] + [i for i in range(n) if i != idx]
    perm = order + [i + n for i in order]
    t = rho.tensor_view().transpose(perm)
    d_s = rho.layout.dims[idx]
    return t.reshape(d_s, rho.dim // d_s, d_s, rho.dim // d_s), d_s, rho.dim // d_s


def _reduce_to(rho: DensityMatrix, system: str, fragment: Sequence[str]) -> DensityMatrix:
    frag = rho.layout.require(fragment)
    if system in frag:
        raise OverlappingParts(f"fragment contains the system label {system!r}")
    wanted = rho.layout.require([system, *frag])
    return partial_trace(rho, wanted)


def branch_decomposition(rho: DensityMatrix, system: str,
                         basis: ProjectiveMeasurement,
                         tol: Tolerances = DEFAULT_TOL
                         ) -> tuple[np.ndarray, list[np.ndarray | None]]:
    """Outcome probabilities and normalized fragment conditionals for a system basis."""
    t, d_s, d_r = _bipartite_tensor(rho, system)
    kets = basis.basis
    probs = np.empty(kets.shape[1])
    conds: list[np.ndarray | None] = []
    for a in range(kets.shape[1]):
        ket = kets[:, a]
        block = np.einsum("i,ijkl,k->jl", ket.conj(), t, ket)
        p = max(float(block.trace().real), 0.0)
        probs[a] = p
        conds.append(block / p if p > tol.prob else None)
    return probs, conds


def holevo_quantity(rho: DensityMatrix, system: str, fragment: Sequence[str],
                    opt: OptimizerConfig = DEFAULT_OPT,
                    tol: Tolerances = DEFAULT_TOL) -> MeasureValue:
    """Classical information about the pointer observable carried by the fragment.

    Evaluates H(rho_F) - sum_a p_a H(rho_F|a) for the pointer-basis ensemble.
    """
    joint = _reduce_to(rho, system, fragment)
    basis = pointer_basis(joint, system, tol)
    probs, conds = branch_decomposition(joint, system, basis, tol)
    frag_labels = [l for l in joint.layout.labels if l != system]
    rho_f = partial_trace(joint, frag_labels)
    value = von_neumann_entropy(rho_f, tol)
    for p, cond in zip(probs, conds):
        if cond is not None:
            value -= float(p) * von_neumann_entropy(cond, tol)
    if -EPS_NUM <= value < 0.0:
        value = 0.0
    return MeasureValue(float(value), basis)


def discord(rho: DensityMatrix, system: str, fragment: Sequence[str],
            opt: OptimizerConfig = DEFAULT_OPT,
            tol: Tolerances = DEFAULT_TOL) -> MeasureValue:
    """Quantum correlations I(S:F) - chi at the shared pointer basis."""
    joint = _reduce_to(rho, system, fragment)
    frag_labels = [l for l in joint.layout.labels if l != system]
    chi = holevo_quantity(joint, system, frag_labels, opt, tol)
    value = mutual_information(joint, [system], frag_labels) - chi.value
    if abs(value) <= opt.eps_opt and value < 0.0:
        value = 0.0
    return MeasureValue(float(value), chi.basis, chi.restarts, chi.gap)


def classical_mutual_information(probs: np.ndarray, conds: Sequence[np.ndarray],
                                 basis: np.ndarray) -> float:
    """Classical I(outcome : measurement result) for a fragment measurement basis."""
    born = np.einsum("ja,njk,ka->na", basis.conj(), np.stack(conds), basis).real
    joint = probs[:, None] * np.clip(born, 0.0, None)
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    mask = joint > 1e-15
    ratio = joint[mask] / np.outer(pa, pb)[mask]
    return float((joint[mask] * np.log2(ratio)).sum())


def _classical_mi_batch(probs: np.ndarray, cond_stack: np.ndarray,
                        bases: np.ndarray) -> np.ndarray:
    """Classical mutual information for a (G, d, d) stack of measurement bases."""
    born = np.einsum("gja,njk,gka->gna", bases.conj(), cond_stack, bases).real
    joint = probs[None, :, None] * np.clip(born, 0.0, None)
    pa = joint.sum(axis=2, keepdims=True)
    pb = joint.sum(axis=1, keepdims=True)
    denom = pa * pb
    mask = joint > 1e-15
    ratio = np.where(mask, joint / np.where(mask, denom, 1.0), 1.0)
    return (np.where(mask, joint * np.log2(ratio), 0.0)).sum(axis=(1, 2))


def common_eigenbasis(mats: Sequence[np.ndarray], gap: float = 1e-9) -> np.ndarray:
    """Simultaneous eigenbasis of (near-)commuting Hermitian matrices.

    Diagonalizes the first matrix, then refines each degenerate cluster with the
    projections of the remaining matrices.  Deterministic given the input order.
    """
    dim = mats[0].shape[0]
    basis = np.eye(dim, dtype=complex)
    clusters = [list(range(dim))]
    for m in mats:
        new_clusters: list[list[int]] = []
        for cluster in clusters:
            if len(cluster) == 1:
                new_clusters.append(cluster)
                continue
            sub = basis[:, cluster]
            proj = sub.conj().T @ m @ sub
            w, v = np.linalg.eigh((proj + proj.conj().T) / 2.0)
            basis[:, cluster] = sub @ v
            start = 0
            while start < len(cluster):
                stop = start + 1
                while stop < len(cluster) and w[stop] - w[stop - 1] < gap:
                    stop += 1
                new_clusters.append(cluster[start:stop])
                start = stop
        clusters = new_clusters
    return basis


def accessible_information_bounds(rho: DensityMatrix, system: str,
                                  fragment: Sequence[str],
                                  opt: OptimizerConfig = DEFAULT_OPT,
                                  tol: Tolerances = DEFAULT_TOL,
                                  optimize_lower: bool = True) -> AccessibleInfoBounds:
    """Bracket the accessible information of the pointer-basis fragment ensemble.

    Upper bound is the Holevo quantity.  When the conditional states commute
    pairwise (Frobenius norm below ``TAU_COMM``) the common-eigenbasis
    measurement achieves it and the bracket is exact.  Otherwise the lower
    bound is the best classical mutual information over projective fragment
    measurements (a fixed eigenbasis measurement when ``optimize_lower`` is
    off, e.g. inside large batch runs).
    """
    joint = _reduce_to(rho, system, fragment)
    chi = holevo_quantity(joint, system,
                          [l for l in joint.layout.labels if l != system], opt, tol)
    probs, conds = branch_decomposition(joint, system, chi.basis, tol)
    live = [(p, c) for p, c in zip(probs, conds) if c is not None]
    if not live:
        return AccessibleInfoBounds(0.0, chi.value, True, False)
    ps = np.array([p for p, _ in live])
    cs = [c for _, c in live]
    commuting = all(
        float(np.linalg.norm(ci @ cj - cj @ ci)) < TAU_COMM
        for i, ci in enumerate(cs) for cj in cs[i + 1:])
    if commuting:
        basis = common_eigenbasis(cs)
        lower = classical_mutual_information(ps, cs, basis)
        return AccessibleInfoBounds(lower, chi.value, True, False)
    if not optimize_lower:
        rho_f = sum(p * c for p, c in zip(ps, cs))
        _, vecs = eig_hermitian(rho_f, tol)
        lower = classical_mutual_information(ps, cs, vecs)
        return AccessibleInfoBounds(lower, chi.value, False, False)
    stack = np.stack(cs)
    result = maximize_over_bases(
        lambda basis: classical_mutual_information(ps, cs, basis),
        cs[0].shape[0], opt,
        batch_objective=lambda bases: _classical_mi_batch(ps, stack, bases))
    lower = min(result.value, chi.value + opt.eps_opt)
    return AccessibleInfoBounds(lower, chi.value, False, True,
                                result.restarts, result.gap)
