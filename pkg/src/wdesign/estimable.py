"""Systems of estimable functions and their information matrices.

A system is a ``v x s`` coefficient matrix ``Q`` (one column per function of
interest) with positive primary weights ``b``.  The information matrix of a
feasible design for the scaled system ``Q~ = Q diag(sqrt(b))`` is
``(Q~' C^+ Q~)^+``, which covers full-rank and rank-deficient systems alike.
Weight matrices can be turned back into systems through ``(P W^{-1} P)^{+1/2}``
(nonsingular ``W``) or the symmetric square root ``W^{1/2}`` (any rank).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import FeasibilityError, SingularWeightError
from .linalg import (
    DERIVED_RANK_RTOL,
    EPS,
    SymMatrix,
    default_tol_rank,
    eig_sym,
    pinv,
    pinv_sqrt,
    sqrt_psd,
    symmetrized,
)
from .model import (
    FEASIBILITY_RTOL,
    EstimationSpace,
    _information,
    infeasible_columns,
)

if TYPE_CHECKING:  # pragma: no cover
    from .weighting import WeightMatrix

#: Unit-norm slack below which a system counts as normalized.
NORMALIZED_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class EstimableSystem:
    """Coefficient matrix ``Q`` (columns are functions) with primary weights.

    ``r`` is the numeric rank of ``Q`` and ``normalized`` records whether
    every column has unit length.  Neither is enforced: scaled systems are
    legitimate, and both values are reported rather than policed.
    """

    Q: np.ndarray
    b: np.ndarray | None = None
    r: int = field(init=False)
    normalized: bool = field(init=False)

    def __post_init__(self):
        q = np.array(self.Q, dtype=float)
        if q.ndim == 1:
            q = q[:, None]
        if q.ndim != 2 or q.shape[0] < 1 or q.shape[1] < 1:
            raise ValueError(f"Q must be a v x s matrix, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("Q entries must be finite")
        s = q.shape[1]
        b = np.ones(s) if self.b is None else np.array(self.b, dtype=float).ravel()
        if b.shape != (s,):
            raise ValueError(f"need one weight per function, got {b.shape[0]} for s={s}")
        if not np.all(np.isfinite(b)) or np.any(b <= 0.0):
            raise ValueError("primary weights must be positive and finite")
        q.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "b", b)
        sv = np.linalg.svd(q, compute_uv=False)
        cutoff = default_tol_rank(max(q.shape)) * max(float(sv[0]), EPS)
        object.__setattr__(self, "r", int(np.count_nonzero(sv > cutoff)))
        norms = np.linalg.norm(q, axis=0)
        object.__setattr__(
            self, "normalized", bool(np.max(np.abs(norms - 1.0)) <= NORMALIZED_ATOL)
        )

    @property
    def v(self) -> int:
        return self.Q.shape[0]

    @property
    def s(self) -> int:
        return self.Q.shape[1]


def validate_system(system: EstimableSystem, space: EstimationSpace,
                    rtol: float = FEASIBILITY_RTOL) -> bool:
    """Whether every column of ``Q`` lies in the estimation space."""
    if system.v != space.v:
        raise ValueError(f"system has {system.v} rows, space expects {space.v}")
    return space.contains(system.Q, rtol)


def scale_system(system: EstimableSystem) -> np.ndarray:
    """Scaled coefficients ``Q~ = Q diag(sqrt(b))``; column i is sqrt(b_i) q_i."""
    return system.Q * np.sqrt(system.b)


def info_matrix_for_system(spec_or_C, system: EstimableSystem) -> SymMatrix:
    """Information matrix ``(Q~' C^+ Q~)^+`` for estimating the system.

    Accepts a design or a precomputed information matrix.  Raises
    FeasibilityError naming the offending columns when part of the system is
    not estimable.
    """
    c = _information(spec_or_C)
    qs = scale_system(system)
    bad = infeasible_columns(c, qs)
    if bad:
        raise FeasibilityError(
            f"system not estimable under the design; offending columns {list(bad)}",
            columns=bad,
        )
    m = qs.T @ pinv(c).entries @ qs
    return pinv(symmetrized(m, DERIVED_RANK_RTOL))


def _weight_entries(w) -> SymMatrix:
    """Accept a WeightMatrix, SymMatrix or plain array; return the SymMatrix."""
    matrix = getattr(w, "matrix", w)
    if isinstance(matrix, SymMatrix):
        return matrix
    return SymMatrix(matrix)


def system_from_weight_matrix_R(w, space: EstimationSpace) -> EstimableSystem:
    """System ``R tau`` with ``R = (P W^{-1} P)^{+1/2}``, for nonsingular W.

    ``R`` is symmetric with column space equal to the estimation space; the
    full ``v x v`` coefficient matrix is kept and its rank reported.  A
    singular ``W`` corresponds to the system ``W^{1/2} tau`` instead; see
    ``system_from_weight_matrix_sqrt``.
    """
    wm = _weight_entries(w)
    if wm.dim != space.v:
        raise ValueError(f"W is {wm.dim} x {wm.dim}, space expects v={space.v}")
    spec = eig_sym(wm)
    if spec.numeric_rank < wm.dim or float(spec.eigenvalues[-1]) <= 0.0:
        raise SingularWeightError(
            "W is singular; use system_from_weight_matrix_sqrt for the W^{1/2} system"
        )
    p = space.projector.entries
    m = symmetrized(p @ pinv(wm).entries @ p, DERIVED_RANK_RTOL)
    r = pinv_sqrt(m)
    return EstimableSystem(r.entries)


def system_from_weight_matrix_sqrt(w) -> EstimableSystem:
    """System ``W^{1/2} tau`` matching the weight matrix ``W`` (any rank)."""
    wm = _weight_entries(w)
    return EstimableSystem(sqrt_psd(wm).entries)
