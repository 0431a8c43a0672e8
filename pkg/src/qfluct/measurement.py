"""Projective measurements with back-action, extended observables, POVMs,
and the probe-based orthogonal realization of a POVM.

An extended observable carries a spectral list of (value, projector)
branches where at most one value may be +infinity; that branch marks the
subspace on which exp(-A) vanishes, keeping the exponential bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .operator_core import (
    DEFAULT_TOLS,
    Tolerances,
    as_matrix,
    basis_projector,
    compressed_exp,
    group_eigenspaces,
    kron,
    max_abs,
    require_density_matrix,
    require_hermitian,
    require_projector,
    spectral_decompose,
)


def _check_complete_orthogonal(projectors: Sequence[np.ndarray], tol: Tolerances, what: str):
    dim = projectors[0].shape[0]
    total = np.zeros((dim, dim), dtype=complex)
    for p in projectors:
        if p.shape[0] != dim:
            raise ValidationError(f"{what}: mixed dimensions {p.shape[0]} vs {dim}")
        total += p
    defect = max_abs(total - np.eye(dim))
    if defect > tol.proj_tol:
        raise ValidationError(f"{what}: completeness defect {defect:.3e} exceeds proj_tol")
    for i in range(len(projectors)):
        for j in range(i + 1, len(projectors)):
            cross = max_abs(projectors[i] @ projectors[j])
            if cross > tol.proj_tol:
                raise ValidationError(
                    f"{what}: projectors {i} and {j} overlap by {cross:.3e}"
                )


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Complete family of mutually orthogonal projectors."""

    projectors: tuple[np.ndarray, ...]

    @classmethod
    def create(cls, projectors: Iterable, tol: Tolerances = DEFAULT_TOLS) -> "ProjectiveMeasurement":
        ps = tuple(require_projector(p, tol) for p in projectors)
        if not ps:
            raise ValidationError("a measurement needs at least one projector")
        _check_complete_orthogonal(ps, tol, "projective measurement")
        return cls(projectors=ps)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]


@dataclass(frozen=True, eq=False)
class ExtendedObservable:
    """Spectral branches (value, projector), +infinity allowed once.

    Branches are kept sorted by value with the infinite branch last.
    Finite values are pairwise distinct beyond degeneracy_tol; all
    projectors are mutually orthogonal and complete.
    """

    values: tuple[float, ...]
    projectors: tuple[np.ndarray, ...]

    @classmethod
    def create(
        cls, branches: Iterable[tuple[float, np.ndarray]], tol: Tolerances = DEFAULT_TOLS
    ) -> "ExtendedObservable":
        finite: list[tuple[float, np.ndarray]] = []
        infinite: list[np.ndarray] = []
        for value, projector in branches:
            p = require_projector(projector, tol)
            v = float(value)
            if math.isinf(v):
                if v < 0:
                    raise ValidationError("-infinity branch values are not supported")
                infinite.append(p)
            elif math.isnan(v):
                raise ValidationError("NaN branch value")
            else:
                finite.append((v, p))
        finite.sort(key=lambda b: b[0])
        for (va, _), (vb, _) in zip(finite, finite[1:]):
            if vb - va <= tol.degeneracy_tol:
                raise ValidationError(
                    f"finite branch values {va!r} and {vb!r} are not distinct beyond "
                    f"degeneracy_tol; merge their projectors first"
                )
        values = [v for v, _ in finite]
        projectors = [p for _, p in finite]
        if infinite:
            values.append(math.inf)
            projectors.append(sum(infinite[1:], start=infinite[0]) if len(infinite) > 1 else infinite[0])
            projectors[-1] = require_projector(projectors[-1], tol)
        if not projectors:
            raise ValidationError("observable needs at least one branch")
        _check_complete_orthogonal(projectors, tol, "extended observable")
        return cls(values=tuple(values), projectors=tuple(projectors))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def has_infinite_branch(self) -> bool:
        return bool(self.values) and math.isinf(self.values[-1])

    def infinite_projector(self) -> np.ndarray:
        """Projector of the +infinity branch; zero matrix when absent."""
        if self.has_infinite_branch:
            return self.projectors[-1]
        return np.zeros((self.dim, self.dim), dtype=complex)

    def finite_branches(self) -> list[tuple[float, np.ndarray]]:
        return [
            (v, p) for v, p in zip(self.values, self.projectors) if not math.isinf(v)
        ]

    def finite_matrix(self) -> np.ndarray:
        """Hermitian sum of the finite branches (+infinity branch omitted)."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for v, p in self.finite_branches():
            out += v * p
        return out

    def measurement(self) -> ProjectiveMeasurement:
        return ProjectiveMeasurement(projectors=self.projectors)

    def exp_neg(self, tol: Tolerances = DEFAULT_TOLS) -> np.ndarray:
        """exp(-A) with the +infinity branch mapped to the kernel."""
        return compressed_exp(-self.finite_matrix(), self.infinite_projector(), tol)

    def exp_pos(self, tol: Tolerances = DEFAULT_TOLS) -> np.ndarray:
        """exp(+A); requires a finite spectrum."""
        if self.has_infinite_branch:
            raise ValidationError("exp(+A) is unbounded for an observable with a +infinity branch")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for v, p in self.finite_branches():
            out += math.exp(v) * p
        return out

def observable_from_hermitian(h, tol: Tolerances = DEFAULT_TOLS) -> ExtendedObservable:
    """Wrap a Hermitian matrix as a finite extended observable, grouping
    eigenvalues closer than degeneracy_tol into joint eigenspaces."""
    dec = spectral_decompose(h, tol)
    return ExtendedObservable.create(group_eigenspaces(dec, tol.degeneracy_tol), tol)


def measure(
    rho, m: ProjectiveMeasurement, tol: Tolerances = DEFAULT_TOLS
) -> list[tuple[float, np.ndarray | None]]:
    """Outcome probabilities and normalized post-measurement states.

    Outcomes with probability at or below prob_floor carry post-state
    None.  Probabilities must sum to 1 within 1e-10.
    """
    state = require_density_matrix(rho, tol)
    if state.shape[0] != m.dim:
        raise ValidationError(f"dimension mismatch: state {state.shape[0]}, measurement {m.dim}")
    out: list[tuple[float, np.ndarray | None]] = []
    total = 0.0
    for p in m.projectors:
        sandwiched = p @ state @ p
        prob = float(np.trace(sandwiched).real)
        prob = 0.0 if abs(prob) <= tol.prob_floor else prob
        total += prob
        out.append((prob, sandwiched / prob if prob > tol.prob_floor else None))
    if abs(total - 1.0) > 1e-10:
        raise ValidationError(f"measurement probabilities sum to {total!r}, not 1")
    return out


def measurement_channel(rho, m: ProjectiveMeasurement, tol: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Non-selective back-action map: the weighted sum of all projections."""
    state = as_matrix(rho)
    if state.shape[0] != m.dim:
        raise ValidationError(f"dimension mismatch: state {state.shape[0]}, measurement {m.dim}")
    out = np.zeros_like(state)
    for p in m.projectors:
        out += p @ state @ p
    return out


@dataclass(frozen=True, eq=False)
class POVM:
    """Positive operator valued measure: PSD elements summing to identity."""

    elements: tuple[np.ndarray, ...]

    @classmethod
    def create(cls, elements: Iterable, tol: Tolerances = DEFAULT_TOLS) -> "POVM":
        els = []
        for i, e in enumerate(elements):
            m = require_hermitian(e, tol)
            lo = float(np.linalg.eigvalsh(m)[0])
            if lo < -tol.psd_tol:
                raise ValidationError(f"POVM element {i} has negative eigenvalue {lo:.3e}")
            els.append(m)
        if not els:
            raise ValidationError("a POVM needs at least one element")
        dim = els[0].shape[0]
        if any(e.shape[0] != dim for e in els):
            raise ValidationError("POVM elements have mixed dimensions")
        defect = max_abs(sum(els) - np.eye(dim))
        if defect > tol.proj_tol:
            raise ValidationError(f"POVM completeness defect {defect:.3e} exceeds proj_tol")
        return cls(elements=tuple(els))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)


def povm_probabilities(rho, povm: POVM, tol: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Born-rule outcome probabilities trace(rho M_k).

    Small negative values (rounding noise within prob_floor) are clipped
    to zero; larger negativity is rejected.
    """
    state = require_density_matrix(rho, tol)
    if state.shape[0] != povm.dim:
        raise ValidationError(f"dimension mismatch: state {state.shape[0]}, POVM {povm.dim}")
    probs = np.array([float(np.trace(state @ m).real) for m in povm.elements])
    if probs.min() < -tol.prob_floor:
        raise ValidationError(f"POVM probability {probs.min():.3e} below -prob_floor")
    probs = np.clip(probs, 0.0, None)
    if abs(probs.sum() - 1.0) > 1e-10:
        raise ValidationError(f"POVM probabilities sum to {probs.sum()!r}, not 1")
    return probs


@dataclass(frozen=True, eq=False)
class NaimarkDilation:
    """Orthogonal-projector realization of a POVM on encoding (x) probe.

    The probe has dimension equal to the POVM outcome count and starts in
    the basis state |probe_state_index>.  The probe-state block of each
    projector reproduces the POVM element it dilates.
    """

    probe_dim: int
    probe_state_index: int
    projectors: tuple[np.ndarray, ...]
    embedding_unitary: np.ndarray

    @property
    def encoding_dim(self) -> int:
        return self.projectors[0].shape[0] // self.probe_dim

    def povm_element(self, k: int) -> np.ndarray:
        """Probe-state compression <0|Pi_k|0> acting on the encoding space."""
        d, kp = self.encoding_dim, self.probe_dim
        block = self.projectors[k].reshape(d, kp, d, kp)
        i = self.probe_state_index
        return np.ascontiguousarray(block[:, i, :, i])


def _psd_sqrt(m: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Square root via spectral decomposition, clipping rounding-level
    negative eigenvalues; deeper negativity was already rejected."""
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def _orthonormal_completion(
    columns: np.ndarray, candidates: Iterable[np.ndarray], needed: int, rank_tol: float
) -> np.ndarray:
    """Greedy orthonormalization of a deterministic candidate list against
    existing orthonormal columns; candidates with projection residual at or
    below rank_tol are skipped.  Two re-orthogonalization passes keep the
    basis orthonormal even for barely independent candidates."""
    basis = [columns[:, i] for i in range(columns.shape[1])]
    added: list[np.ndarray] = []
    for cand in candidates:
        if len(added) == needed:
            break
        v = cand.astype(complex)
        for _ in range(2):
            for b in basis:
                v = v - b * (b.conj() @ v)
        norm = float(np.linalg.norm(v))
        if norm > rank_tol:
            v = v / norm
            basis.append(v)
            added.append(v)
    if len(added) != needed:
        raise ValidationError(
            f"unitary completion failed: found {len(added)} of {needed} independent directions"
        )
    return np.column_stack(added) if added else np.zeros((columns.shape[0], 0))


def _dilation_from_isometry(
    povm: POVM, isometry: np.ndarray, completion: np.ndarray, tol: Tolerances
) -> NaimarkDilation:
    d, kp = povm.dim, povm.n_outcomes
    full = d * kp
    u = np.zeros((full, full), dtype=complex)
    # Columns for |i> (x) |0> carry the isometry; the rest take the completion.
    free = [c for c in range(full) if c % kp != 0]
    for i in range(d):
        u[:, i * kp] = isometry[:, i]
    for slot, col in zip(free, range(completion.shape[1])):
        u[:, slot] = completion[:, col]
    unit_defect = max_abs(u.conj().T @ u - np.eye(full))
    if unit_defect > 1e-10:
        raise ValidationError(f"unitary completion defect {unit_defect:.3e} exceeds 1e-10")
    projectors = []
    for k in range(kp):
        pk = u.conj().T @ kron(np.eye(d), basis_projector(kp, k)) @ u
        projectors.append((pk + pk.conj().T) / 2)
    dilation = NaimarkDilation(
        probe_dim=kp,
        probe_state_index=0,
        projectors=tuple(projectors),
        embedding_unitary=u,
    )
    for k in range(kp):
        defect = max_abs(dilation.povm_element(k) - povm.elements[k])
        if defect > 1e-10:
            raise ValidationError(
                f"dilation contract violated for element {k}: probe-block defect {defect:.3e}"
            )
    return dilation


def _povm_isometry(povm: POVM, tol: Tolerances) -> np.ndarray:
    d, kp = povm.dim, povm.n_outcomes
    v = np.zeros((d * kp, d), dtype=complex)
    view = v.reshape(d, kp, d)
    for k, element in enumerate(povm.elements):
        view[:, k, :] = _psd_sqrt(element, tol)
    defect = max_abs(v.conj().T @ v - np.eye(d))
    if defect > tol.proj_tol * 10:
        raise ValidationError(f"POVM isometry defect {defect:.3e}; completeness too loose")
    return v


def naimark_dilate(povm: POVM, tol: Tolerances = DEFAULT_TOLS) -> NaimarkDilation:
    """Canonical probe dilation of a POVM.

    Builds the square-root isometry |psi> -> sum_k (sqrt(M_k)|psi>) (x) |k>,
    completes its columns to a unitary using canonical basis vectors
    filtered by projection residual, and conjugates the probe projectors
    back.  The probe-block of projector k reproduces M_k within 1e-10.
    """
    d, kp = povm.dim, povm.n_outcomes
    isometry = _povm_isometry(povm, tol)
    candidates = (np.eye(d * kp, dtype=complex)[:, i] for i in range(d * kp))
    completion = _orthonormal_completion(isometry, candidates, d * kp - d, tol.rank_tol)
    return _dilation_from_isometry(povm, isometry, completion, tol)


def naimark_dilate_randomized(
    povm: POVM, rng: np.random.Generator, tol: Tolerances = DEFAULT_TOLS
) -> NaimarkDilation:
    """Dilation with a randomized unitary completion.

    Same probe construction and contract as naimark_dilate, but the
    completion directions are drawn from rng.  Used to probe whether
    derived quantities depend on the choice of dilation.
    """
    d, kp = povm.dim, povm.n_outcomes
    isometry = _povm_isometry(povm, tol)
    n = d * kp

    def random_candidates():
        while True:
            yield rng.normal(size=n) + 1j * rng.normal(size=n)

    completion = _orthonormal_completion(isometry, random_candidates(), n - d, 1e-6)
    return _dilation_from_isometry(povm, isometry, completion, tol)


def dilation_probabilities(
    rho, dilation: NaimarkDilation, tol: Tolerances = DEFAULT_TOLS
) -> np.ndarray:
    """Outcome probabilities of the dilated orthogonal measurement on
    rho (x) |0><0|; must match povm_probabilities on the original POVM."""
    state = require_density_matrix(rho, tol)
    embedded = kron(state, basis_projector(dilation.probe_dim, dilation.probe_state_index))
    return np.array([float(np.trace(embedded @ p).real) for p in dilation.projectors])
