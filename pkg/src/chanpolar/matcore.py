"""Dense complex linear-algebra kernel.

Hermitian eigendecompositions with a deterministic ordering convention,
matrix polar factorization with a closest-to-identity completion for
rank-deficient inputs, and three trace/norm inequality predicates that the
channel-analysis layers lean on.

Norm conventions: ``||.||_2`` written in docstrings means the Schatten
2-norm (Frobenius); the spectral radius of a general matrix means its
largest singular value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotContraction, NotHermitian

HERMITICITY_RTOL = 1e-8
DEGENERACY_TOL = 1e-10
INEQ_TOL = 1e-10
PHASE_TRACE_TOL = 1e-9
ENTRY_ROUND_DECIMALS = 8


def as_complex_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite complex128 2-d array (no copy when possible)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _require_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def fix_entry_phase(op: np.ndarray) -> np.ndarray:
    """Rotate a global phase so the largest-magnitude entry is real positive.

    Ties resolve to the first maximal entry in row-major order.  Zero
    matrices are returned unchanged.
    """
    idx = int(np.argmax(np.abs(op)))
    val = op.flat[idx]
    if abs(val) == 0.0:
        return op
    return op * (np.conj(val) / abs(val))


def fix_trace_phase(op: np.ndarray, tol: float = PHASE_TRACE_TOL) -> np.ndarray:
    """Rotate a global phase so tr(op) is real positive.

    Falls back to :func:`fix_entry_phase` when |tr| <= tol.
    """
    t = np.trace(op)
    if abs(t) > tol:
        return op * (np.conj(t) / abs(t))
    return fix_entry_phase(op)


@dataclass(eq=False)
class HermitianEig:
    """Spectral decomposition with eigenvalues sorted descending.

    ``vectors`` holds orthonormal eigenvectors as columns, each with its
    largest-magnitude entry rotated to the positive real axis.  Columns of
    a degenerate block (eigenvalue gap below ``DEGENERACY_TOL``) are ordered
    lexicographically on their entries rounded to 1e-8, which makes the
    output deterministic even when the underlying solver is free to mix
    them.
    """

    values: np.ndarray
    vectors: np.ndarray
    degenerate: bool


def _lex_key(col: np.ndarray):
    r = np.round(col.real, ENTRY_ROUND_DECIMALS) + 0.0  # kill -0.0
    i = np.round(col.imag, ENTRY_ROUND_DECIMALS) + 0.0
    out = np.empty(2 * col.size)
    out[0::2] = r
    out[1::2] = i
    return tuple(out)


def hermitian_eig(m, rtol: float = HERMITICITY_RTOL) -> HermitianEig:
    """Eigendecompose a Hermitian matrix; descending, deterministic order.

    Raises
    ------
    NotHermitian
        when ``||M - M^dag||_2 > rtol * ||M||_2``.
    NoConvergence
        when the underlying solver fails to converge.
    """
    a = _require_square(as_complex_matrix(m, "M"), "M")
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.conj().T) > rtol * max(scale, 1e-300):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    h = (a + a.conj().T) / 2.0
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NoConvergence(str(exc)) from exc
    w = w[::-1].copy()
    v = v[:, ::-1].copy()

    # per-column phase convention
    idx = np.argmax(np.abs(v), axis=0)
    piv = v[idx, np.arange(v.shape[1])]
    nz = np.abs(piv) > 0
    phases = np.ones_like(piv)
    phases[nz] = np.conj(piv[nz]) / np.abs(piv[nz])
    v = v * phases[np.newaxis, :]

    # deterministic order inside degenerate blocks
    degenerate = False
    n = w.size
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and w[stop - 1] - w[stop] < DEGENERACY_TOL:
            stop += 1
        if stop - start > 1:
            degenerate = True
            order = sorted(range(start, stop), key=lambda j: _lex_key(v[:, j]))
            v[:, start:stop] = v[:, order]
        start = stop
    return HermitianEig(values=w, vectors=v, degenerate=degenerate)


@dataclass(eq=False)
class MatrixPolar:
    """Polar factorization A = phase * unitary @ psd.

    ``unitary`` carries the tr V in R+ convention whenever |tr V| exceeds
    ``PHASE_TRACE_TOL`` (then ``phase_fixed`` is True and ``phase`` is the
    unit complex number restoring the raw factor); otherwise ``phase`` is 1.
    ``psd`` is (A^dag A)^(1/2) and ``singular_values`` are the singular
    values of A in descending order.
    """

    unitary: np.ndarray
    psd: np.ndarray
    phase_fixed: bool
    phase: complex
    singular_values: np.ndarray


def polar_decompose(a) -> MatrixPolar:
    """Polar-decompose a square matrix via SVD.

    For rank-deficient input the unitary factor is completed on the null
    block so that it is closest (Frobenius) to the identity among all valid
    completions; this keeps the factor continuous with nearby full-rank
    inputs.
    """
    a = _require_square(as_complex_matrix(a, "A"), "A")
    n = a.shape[0]
    try:
        u, s, wh = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NoConvergence(str(exc)) from exc
    w = wh.conj().T
    rank_tol = s[0] * n * 1e-12 if n and s[0] > 0 else 0.0
    r = int(np.sum(s > rank_tol))
    if r == n:
        v = u @ wh
    else:
        v = u[:, :r] @ wh[:r, :]
        un = u[:, r:]
        wn = w[:, r:]
        # max Re tr over the free block -> polar phase of Wn^dag Un
        m = wn.conj().T @ un
        um, _, vmh = np.linalg.svd(m)
        v = v + un @ (um @ vmh).conj().T @ wn.conj().T
    psd = (w * s) @ w.conj().T
    psd = (psd + psd.conj().T) / 2.0
    t = np.trace(v)
    if abs(t) > PHASE_TRACE_TOL:
        phase = complex(t / abs(t))
        v = v * np.conj(phase)
        fixed = True
    else:
        phase = 1.0 + 0.0j
        fixed = False
    return MatrixPolar(
        unitary=v,
        psd=psd,
        phase_fixed=fixed,
        phase=phase,
        singular_values=s.copy(),
    )


@dataclass
class InequalityCheck:
    """Two sides of a scalar inequality plus the verdict."""

    lhs: float
    rhs: float
    holds: bool


@dataclass
class NormInequalityCheck:
    """Lower / middle / upper values of the norm sandwich plus verdict."""

    lower: float
    product: float
    upper: float
    holds: bool


def _max_eigenvalue(a: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((a + a.conj().T) / 2.0)[-1])


def check_trace_inequality(a, b, tol: float = INEQ_TOL) -> InequalityCheck:
    """tr(AB)/d against rho_B tr(A)/d + rho_A tr(B)/d - rho_A rho_B.

    A and B must be Hermitian; the eigenvalue caps rho are the largest
    (signed) eigenvalues.  ``holds`` means lhs >= rhs - tol.
    """
    a = _require_square(as_complex_matrix(a, "A"), "A")
    b = _require_square(as_complex_matrix(b, "B"), "B")
    if a.shape != b.shape:
        raise ValueError("A and B must share a dimension")
    for m, name in ((a, "A"), (b, "B")):
        if np.linalg.norm(m - m.conj().T) > HERMITICITY_RTOL * max(np.linalg.norm(m), 1e-300):
            raise NotHermitian(f"{name} is not Hermitian within tolerance")
    d = a.shape[0]
    rho_a = _max_eigenvalue(a)
    rho_b = _max_eigenvalue(b)
    lhs = float(np.trace(a @ b).real) / d
    rhs = rho_b * float(np.trace(a).real) / d + rho_a * float(np.trace(b).real) / d - rho_a * rho_b
    return InequalityCheck(lhs=lhs, rhs=rhs, holds=bool(lhs >= rhs - tol))


def check_vn_inequality(a, b, tol: float = INEQ_TOL) -> InequalityCheck:
    """|tr(AB)/d| against min(rho_B tr|A|/d, rho_A tr|B|/d).

    The spectral radii rho and the trace norms come from singular values.
    ``holds`` means lhs <= rhs + tol.
    """
    a = _require_square(as_complex_matrix(a, "A"), "A")
    b = _require_square(as_complex_matrix(b, "B"), "B")
    if a.shape != b.shape:
        raise ValueError("A and B must share a dimension")
    d = a.shape[0]
    sa = np.linalg.svd(a, compute_uv=False)
    sb = np.linalg.svd(b, compute_uv=False)
    lhs = abs(np.trace(a @ b)) / d
    rhs = min(sb[0] * sa.sum() / d, sa[0] * sb.sum() / d)
    return InequalityCheck(lhs=float(lhs), rhs=float(rhs), holds=bool(lhs <= rhs + tol))


def check_norm_inequality(a, b, tol: float = INEQ_TOL) -> NormInequalityCheck:
    """||A||^2/d + ||B||^2/d - 1  <=  ||AB||^2/d  <=  min(||A||^2, ||B||^2)/d.

    Both operands must be contractions (largest singular value at most
    1 + 1e-10), else :class:`NotContraction` is raised.
    """
    a = _require_square(as_complex_matrix(a, "A"), "A")
    b = _require_square(as_complex_matrix(b, "B"), "B")
    if a.shape != b.shape:
        raise ValueError("A and B must share a dimension")
    d = a.shape[0]
    for m, name in ((a, "A"), (b, "B")):
        top = np.linalg.svd(m, compute_uv=False)[0]
        if top > 1.0 + 1e-10:
            raise NotContraction(f"{name} has spectral radius {top:.3e} > 1")
    na = np.linalg.norm(a) ** 2 / d
    nb = np.linalg.norm(b) ** 2 / d
    nab = np.linalg.norm(a @ b) ** 2 / d
    lower = na + nb - 1.0
    upper = min(na, nb)
    holds = bool(lower - tol <= nab <= upper + tol)
    return NormInequalityCheck(lower=float(lower), product=float(nab), upper=float(upper), holds=holds)
