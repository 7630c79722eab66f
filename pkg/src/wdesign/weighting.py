"""Weight matrices, weighted variances, and primary/secondary weights.

A weight matrix is any nonnegative definite ``W`` whose column space lies
inside the estimation space.  The weight it assigns to an estimable function
``q'tau`` is ``(q' W^+ q)^{-1}`` for ``q`` in the span of ``W`` and zero
outside (reported as an explicit ``None`` marker, since the only in-span
vector of zero weight is ``q = 0``).  ``W`` factors as ``K K'`` with ``K``
of full column rank ``d``, and the weighted information matrix of a design
is the ``d x d`` positive definite ``(K' C^+ K)^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    FeasibilityError,
    InternalConsistencyError,
    SpaceError,
)
from .estimable import EstimableSystem, scale_system
from .linalg import (
    DERIVED_RANK_RTOL,
    EPS,
    SymMatrix,
    as_sym,
    eig_sym,
    max_abs,
    pinv,
    symmetrized,
)
from .model import EstimationSpace, _information, infeasible_columns

#: 2-norm residual cutoff, relative to ``|q|``, for span membership.
SPAN_RTOL = 1e-8

#: Residual cutoff for the column-space inclusion C(W) within E.
SPACE_RTOL = 1e-8

#: Relative tolerance of the proportionality test in estimation equivalence.
EQUIVALENCE_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Validated weight matrix with its full-column-rank factorization.

    ``K`` satisfies ``K K' = W`` and ``K' W^+ K = I_d``; ``F`` is the
    orthonormal basis of the span of ``W`` and ``Wplus`` its pseudoinverse,
    kept because nearly every weighting formula needs them.  ``space_check``
    records whether the inclusion of the span in an estimation space was
    verified at construction.
    """

    matrix: SymMatrix
    d: int
    K: np.ndarray
    F: np.ndarray
    Wplus: np.ndarray
    space_check: bool

    @property
    def v(self) -> int:
        return self.matrix.dim

    def in_span(self, q, rtol: float = SPAN_RTOL) -> bool:
        """Whether ``q`` lies in the column space of ``W`` (2-norm residual)."""
        q = np.asarray(q, dtype=float).ravel()
        resid = q - self.F @ (self.F.T @ q)
        return float(np.linalg.norm(resid)) <= rtol * float(np.linalg.norm(q))


def make_weight_matrix(w_raw, space: EstimationSpace | None = None,
                       rtol: float = SPACE_RTOL) -> WeightMatrix:
    """Validate a symmetric matrix as a weight matrix and factor it.

    Checks nonnegative definiteness, and, when an estimation space is given,
    that the column space of ``W`` stays inside it (max-abs residual of
    ``(I - P)W`` against ``rtol * max|W|``).
    """
    wm = as_sym(w_raw, DERIVED_RANK_RTOL) if not isinstance(w_raw, SymMatrix) else w_raw
    spec = eig_sym(wm)
    smallest = float(spec.eigenvalues[-1])
    if smallest < -spec.cutoff:
        raise DomainError(
            f"weight matrix must be nonnegative definite (smallest eigenvalue {smallest:.3e})"
        )
    checked = False
    if space is not None:
        if space.v != wm.dim:
            raise ValueError(f"W is {wm.dim} x {wm.dim}, space expects v={space.v}")
        resid = max_abs(wm.entries - space.projector.entries @ wm.entries)
        scale = max(max_abs(wm.entries), EPS)
        if resid > rtol * scale:
            raise SpaceError(
                f"column space of W escapes the estimation space (residual {resid:.3e})",
                residual=resid,
            )
        checked = True
    d = spec.numeric_rank
    f = spec.eigenvectors[:, :d]
    k = f * np.sqrt(spec.eigenvalues[:d])
    if d:
        wplus = symmetrized((f / spec.eigenvalues[:d]) @ f.T).entries
    else:
        wplus = np.zeros((wm.dim, wm.dim))
    return WeightMatrix(wm, d, k, f, wplus, checked)


def weight_matrix_from_system(system: EstimableSystem,
                              space: EstimationSpace | None = None) -> WeightMatrix:
    """Weight matrix ``Q~ Q~'`` induced by a system with its primary weights."""
    qs = scale_system(system)
    return make_weight_matrix(symmetrized(qs @ qs.T, DERIVED_RANK_RTOL), space)


def _vector(q, v: int) -> np.ndarray:
    q = np.asarray(q, dtype=float).ravel()
    if q.shape != (v,):
        raise ValueError(f"expected a vector of length {v}, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError("vector entries must be finite")
    return q


def weight_of(w: WeightMatrix, q, rtol: float = SPAN_RTOL) -> float | None:
    """Weight ``(q' W^+ q)^{-1}`` of an estimable function, or None.

    ``None`` is the explicit zero-weight marker for vectors outside the span
    of ``W``; the zero vector is rejected because its weight is undefined.
    """
    q = _vector(q, w.v)
    if float(np.linalg.norm(q)) == 0.0:
        raise DomainError("the weight of the zero function is undefined")
    if not w.in_span(q, rtol):
        return None
    val = float(q @ w.Wplus @ q)
    if val <= 0.0:
        raise InternalConsistencyError(
            f"q' W^+ q = {val:.3e} for an in-span q; weight must be positive"
        )
    return 1.0 / val


def weighted_variance(spec_or_C, w: WeightMatrix, q, rtol: float = SPAN_RTOL) -> float:
    """Weighted variance ``(q' W^+ q)^{-1} (q' C^+ q)`` of the estimate of q'tau."""
    q = _vector(q, w.v)
    wt = weight_of(w, q, rtol)
    if wt is None:
        raise SpaceError("q lies outside the span of the weight matrix")
    c = _information(spec_or_C)
    if infeasible_columns(c, q[:, None]):
        raise FeasibilityError("q'tau is not estimable under the design", columns=(0,))
    return wt * float(q @ pinv(c).entries @ q)


def weighted_info_matrix(spec_or_C, w: WeightMatrix) -> SymMatrix:
    """Weighted information matrix ``(K' C^+ K)^{-1}``, ``d x d`` positive definite.

    Requires every weighted function to be estimable, i.e. the span of ``W``
    inside the column space of ``C``.
    """
    if w.d == 0:
        raise DomainError("weight matrix of rank zero weights nothing")
    c = _information(spec_or_C)
    bad = infeasible_columns(c, w.K)
    if bad:
        raise FeasibilityError(
            "weighted functions are not estimable under this design "
            f"(K columns {list(bad)})",
            columns=bad,
        )
    m = symmetrized(w.K.T @ pinv(c).entries @ w.K, DERIVED_RANK_RTOL)
    spec = eig_sym(m)
    if spec.numeric_rank < w.d:
        raise FeasibilityError(
            "K' C^+ K is numerically singular; the design sits on the feasibility boundary"
        )
    inv = (spec.eigenvectors / spec.eigenvalues) @ spec.eigenvectors.T
    return symmetrized(inv, DERIVED_RANK_RTOL)


def variance_decomposition(spec_or_C, w: WeightMatrix, q,
                           rtol: float = SPAN_RTOL) -> tuple[np.ndarray, np.ndarray]:
    """Convex-combination view of the weighted variance.

    Returns ``(coefficients, eigenvalues)`` for the weighted information
    matrix: the coefficients are nonnegative, sum to one, and the weighted
    variance equals ``sum(coefficients / eigenvalues)``.
    """
    q = _vector(q, w.v)
    if not w.in_span(q, rtol):
        raise SpaceError("q lies outside the span of the weight matrix")
    cw = weighted_info_matrix(spec_or_C, w)
    h = np.linalg.lstsq(w.K, q, rcond=None)[0]
    spec = eig_sym(cw)
    g = spec.eigenvectors.T @ h
    total = float(g @ g)
    if total <= 0.0:
        raise InternalConsistencyError("in-span q produced a zero coordinate vector")
    return g**2 / total, spec.eigenvalues


def estimation_equivalent(w1: WeightMatrix, w2: WeightMatrix,
                          on: EstimationSpace | None = None,
                          rtol: float = EQUIVALENCE_RTOL) -> tuple[bool, float]:
    """Do two weight matrices assign proportional weights on a common span?

    By default the column spaces must agree (mutual projector residuals) and
    the comparison space is that common span.  Passing ``on`` compares on an
    estimation space contained in both spans instead, which covers pairs
    like a rank-deficient ``W`` against its full-rank regularization.
    Returns ``(equivalent, c)`` with ``q'W1^- q = c q'W2^- q`` on the span.
    """
    if w1.v != w2.v:
        raise ValueError("weight matrices must share dimensions")
    if on is not None:
        p = on.projector.entries
        for name, w in (("W1", w1), ("W2", w2)):
            resid = max_abs(p - w.F @ (w.F.T @ p))
            if resid > rtol:
                raise SpaceError(
                    f"comparison space is not weighted by {name} (residual {resid:.3e})",
                    residual=resid,
                )
    else:
        r12 = max_abs(w2.F - w1.F @ (w1.F.T @ w2.F))
        r21 = max_abs(w1.F - w2.F @ (w2.F.T @ w1.F))
        if max(r12, r21) > rtol:
            raise SpaceError(
                "weight matrices span different sets of functions "
                f"(residuals {r12:.3e}, {r21:.3e})",
                residual=max(r12, r21),
            )
        p = w1.F @ w1.F.T
    m1 = p @ w1.Wplus @ p
    m2 = p @ w2.Wplus @ p
    denom = float(np.sum(m2 * m2))
    if denom <= 0.0:
        raise InternalConsistencyError("projected W2^+ vanished on the comparison span")
    c = float(np.sum(m1 * m2)) / denom
    equivalent = max_abs(m1 - c * m2) <= rtol * max(max_abs(m1), EPS)
    return bool(equivalent), c


@dataclass(frozen=True, eq=False)
class WeightRecord:
    """One function's weights: primary (assigned) and secondary (implied)."""

    q: np.ndarray
    primary: float | None
    secondary: float | None
    in_span: bool


@dataclass(frozen=True, eq=False)
class WeightReport:
    """Primary/secondary weight analysis of a system plus queried vectors."""

    weight_matrix: WeightMatrix
    records: tuple[WeightRecord, ...]


def secondary_weights(system: EstimableSystem, queries=()) -> WeightReport:
    """Secondary (implied) weights under the system's own weight matrix.

    The system's columns are always included, carrying their primary
    weights; each query vector gets its span status and, when inside the
    span of ``Q``, the implied weight ``(q' W^+ q)^{-1}``.
    """
    w = weight_matrix_from_system(system)
    records = []
    for j in range(system.s):
        qj = system.Q[:, j].copy()
        records.append(WeightRecord(qj, float(system.b[j]), weight_of(w, qj), True))
    for q in queries:
        q = _vector(q, system.v)
        secondary = weight_of(w, q)
        records.append(WeightRecord(q, None, secondary, secondary is not None))
    return WeightReport(w, tuple(records))


def check_weight_dominance(system: EstimableSystem, atol: float = 1e-9) -> tuple[bool, ...]:
    """Verify each secondary weight ``w(q_i) >= b_i``; return strictness flags.

    A violation beyond tolerance cannot come from the model, only from a
    numerical defect, so it raises InternalConsistencyError.  Columns that
    are linear combinations of the others pick up extra implied weight and
    get flagged strict.
    """
    report = secondary_weights(system)
    flags = []
    for j in range(system.s):
        secondary = report.records[j].secondary
        primary = float(system.b[j])
        if secondary is None or secondary < primary - atol:
            raise InternalConsistencyError(
                f"secondary weight {secondary} of column {j} fell below its "
                f"primary weight {primary}"
            )
        flags.append(bool(secondary > primary + atol))
    return tuple(flags)
