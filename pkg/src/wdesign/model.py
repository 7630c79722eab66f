"""Treatment-plus-nuisance linear models and their information matrices.

A design assigns one of ``v`` treatments to each of ``n`` experimental
units; nuisance effects enter through an intercept, block indicators, or an
explicit covariate matrix.  The information matrix for the treatment effects
is ``X'(I - P_L)X``, i.e. the treatment indicators with the nuisance
projected out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpaceError
from .linalg import (
    DERIVED_RANK_RTOL,
    EPS,
    SymMatrix,
    as_sym,
    eig_sym,
    max_abs,
    projector,
    symmetrized,
)

#: Residual cutoff, relative to ``max|Q|``, deciding estimability of a system.
FEASIBILITY_RTOL = 1e-8

NUISANCE_KINDS = ("intercept", "blocks", "explicit")


@dataclass(frozen=True, eq=False)
class DesignSpec:
    """An exact design: per-unit treatment assignment plus nuisance structure.

    ``assignment`` holds treatment indices in ``1..v``, one per unit.  The
    nuisance is an intercept column, consecutive blocks of the given sizes,
    or an explicit ``n x m`` matrix ``L``.
    """

    v: int
    assignment: tuple[int, ...]
    nuisance_kind: str = "intercept"
    block_sizes: tuple[int, ...] | None = None
    L: np.ndarray | None = None

    def __post_init__(self):
        if int(self.v) < 1:
            raise ValueError("v must be at least 1")
        object.__setattr__(self, "v", int(self.v))
        assignment = tuple(int(t) for t in self.assignment)
        if not assignment:
            raise ValueError("assignment must list at least one unit")
        if any(t < 1 or t > self.v for t in assignment):
            raise ValueError(f"treatment indices must lie in 1..{self.v}")
        object.__setattr__(self, "assignment", assignment)
        n = len(assignment)
        if self.nuisance_kind not in NUISANCE_KINDS:
            raise ValueError(f"unknown nuisance kind {self.nuisance_kind!r}")
        if self.nuisance_kind == "blocks":
            if not self.block_sizes:
                raise ValueError("blocks nuisance needs block sizes")
            sizes = tuple(int(s) for s in self.block_sizes)
            if any(s < 1 for s in sizes):
                raise ValueError("block sizes must be positive")
            if sum(sizes) != n:
                raise ValueError(f"block sizes sum to {sum(sizes)}, expected n={n}")
            object.__setattr__(self, "block_sizes", sizes)
        elif self.block_sizes is not None:
            raise ValueError("block sizes only apply to the blocks nuisance")
        if self.nuisance_kind == "explicit":
            if self.L is None:
                raise ValueError("explicit nuisance needs the matrix L")
            ell = np.array(self.L, dtype=float)
            if ell.ndim != 2 or ell.shape[0] != n or ell.shape[1] < 1:
                raise ValueError(f"L must be n x m with n={n}, got shape {ell.shape}")
            if not np.all(np.isfinite(ell)):
                raise ValueError("L entries must be finite")
            ell.flags.writeable = False
            object.__setattr__(self, "L", ell)
        elif self.L is not None:
            raise ValueError("L only applies to the explicit nuisance")

    @property
    def n(self) -> int:
        return len(self.assignment)

    def replications(self) -> np.ndarray:
        """Replication count per treatment, length ``v``."""
        r = np.zeros(self.v, dtype=int)
        for t in self.assignment:
            r[t - 1] += 1
        return r

    @classmethod
    def from_replications(cls, v, replications, nuisance_kind="intercept",
                          block_sizes=None, L=None):
        """Design assigning treatment ``t`` to ``replications[t-1]`` units in order."""
        reps = [int(r) for r in replications]
        if len(reps) != v or any(r < 0 for r in reps):
            raise ValueError("replications must be nonnegative, one per treatment")
        assignment = tuple(t for t, r in enumerate(reps, start=1) for _ in range(r))
        return cls(v, assignment, nuisance_kind, block_sizes, L)

    def __eq__(self, other):
        if not isinstance(other, DesignSpec):
            return NotImplemented
        same_l = (self.L is None and other.L is None) or (
            self.L is not None and other.L is not None and np.array_equal(self.L, other.L)
        )
        return (
            self.v == other.v
            and self.assignment == other.assignment
            and self.nuisance_kind == other.nuisance_kind
            and self.block_sizes == other.block_sizes
            and same_l
        )

    def __hash__(self):
        return hash((self.v, self.assignment, self.nuisance_kind, self.block_sizes))


def design_matrix(spec: DesignSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(X, L)``: 0/1 treatment indicators and the nuisance matrix."""
    n = spec.n
    x = np.zeros((n, spec.v))
    x[np.arange(n), np.asarray(spec.assignment) - 1] = 1.0
    if spec.nuisance_kind == "intercept":
        ell = np.ones((n, 1))
    elif spec.nuisance_kind == "blocks":
        ell = np.zeros((n, len(spec.block_sizes)))
        start = 0
        for j, size in enumerate(spec.block_sizes):
            ell[start:start + size, j] = 1.0
            start += size
    else:
        ell = np.array(spec.L, dtype=float)
    return x, ell


def information_matrix(spec: DesignSpec, tol_rank: float = DERIVED_RANK_RTOL) -> SymMatrix:
    """Information matrix ``X'(I - P_L)X`` for the treatment effects.

    Nonnegative definite by construction; when the nuisance contains the
    intercept its rows sum to zero, so the all-ones vector is in its null
    space.
    """
    x, ell = design_matrix(spec)
    resid = np.eye(spec.n) - projector(ell).entries
    return symmetrized(x.T @ resid @ x, tol_rank)


@dataclass(frozen=True, eq=False)
class EstimationSpace:
    """Common column space of the competing designs' information matrices."""

    v: int
    kind: str
    projector: SymMatrix
    dim: int

    def contains(self, vectors, rtol: float = FEASIBILITY_RTOL) -> bool:
        """Whether every column lies in the space (max-abs residual test)."""
        q = np.asarray(vectors, dtype=float)
        if q.ndim == 1:
            q = q[:, None]
        resid = q - self.projector.entries @ q
        return max_abs(resid) <= rtol * max(max_abs(q), EPS)


def estimation_space(kind: str, v: int, basis=None) -> EstimationSpace:
    """Build the estimation space: ``full``, ``contrasts`` or ``explicit``.

    ``contrasts`` is the orthogonal complement of the all-ones vector, the
    estimation space of treatment models whose nuisance absorbs the
    intercept.
    """
    if v < 1:
        raise ValueError("v must be at least 1")
    if kind == "full":
        return EstimationSpace(v, kind, SymMatrix(np.eye(v)), v)
    if kind == "contrasts":
        p = SymMatrix(np.eye(v) - np.ones((v, v)) / v)
        return EstimationSpace(v, kind, p, v - 1)
    if kind == "explicit":
        if basis is None:
            raise ValueError("explicit estimation space needs a basis")
        b = np.asarray(basis, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        if b.shape[0] != v:
            raise ValueError(f"basis must have {v} rows, got {b.shape[0]}")
        if np.any(np.linalg.norm(b, axis=0) == 0.0):
            raise ValueError("basis columns must be nonzero")
        p = projector(b)
        dim = int(round(float(np.trace(p.entries))))
        return EstimationSpace(v, kind, p, dim)
    raise ValueError(f"unknown estimation space kind {kind!r}")


def _information(spec_or_matrix) -> SymMatrix:
    if isinstance(spec_or_matrix, DesignSpec):
        return information_matrix(spec_or_matrix)
    return as_sym(spec_or_matrix)


def infeasible_columns(spec_or_C, Q, rtol: float = FEASIBILITY_RTOL) -> tuple[int, ...]:
    """Indices of columns of ``Q`` outside the column space of ``C``.

    The whole system shares one scale: a column fails when its max-abs
    residual against the column-space projector of ``C`` exceeds
    ``rtol * max|Q|``.
    """
    c = _information(spec_or_C)
    q = np.asarray(Q, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    if q.shape[0] != c.dim:
        raise ValueError(f"Q must have {c.dim} rows, got {q.shape[0]}")
    f = eig_sym(c).basis()
    resid = q - f @ (f.T @ q)
    tol = rtol * max(max_abs(q), EPS)
    return tuple(j for j in range(q.shape[1]) if max_abs(resid[:, j]) > tol)


def is_feasible(spec_or_C, Q, rtol: float = FEASIBILITY_RTOL) -> bool:
    """Whether the whole system ``Q'tau`` is estimable under the design."""
    return not infeasible_columns(spec_or_C, Q, rtol)


def check_estimation_space(spec: DesignSpec, space: EstimationSpace,
                           rtol: float = FEASIBILITY_RTOL) -> SymMatrix:
    """Verify ``C(C(xi))`` equals the declared estimation space; return C.

    Cross-design comparisons assume all competing designs share this column
    space; operations that rely on it call this check instead of assuming.
    """
    c = information_matrix(spec)
    s = eig_sym(c)
    resid = max_abs(c.entries - space.projector.entries @ c.entries)
    scale = max(max_abs(c.entries), EPS)
    if s.numeric_rank != space.dim or resid > rtol * scale:
        raise SpaceError(
            "information matrix column space does not match the estimation space "
            f"(rank {s.numeric_rank} vs dim {space.dim}, residual {resid:.3e})",
            residual=resid,
        )
    return c
