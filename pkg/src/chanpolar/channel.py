"""Channel representations and conversions.

A channel is a list of d x d Kraus matrices (:class:`KrausChannel`).  This
module converts between that form, the Choi matrix, the column-stacking
superoperator, and the ordered canonical Kraus decomposition obtained from
the Choi eigendecomposition; it also provides CPTP validation, the
leading-Kraus (LK) extraction, composition, and the JSON wire format.

Vectorization convention (used everywhere): column stacking,
``col(A)[j*d + i] = A[i, j]`` so that ``col(A B C) = C^T (x) A col(B)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import matcore
from .errors import DegenerateLeading, DimensionMismatch, NotCP

CP_EIG_TOL = 1e-10          # per-dim floor below which CP is declared broken
CHOI_DROP_TOL = 1e-12       # per-dim floor below which eigenvalues are noise
TP_TOL = 1e-9
WEIGHT_DEGENERACY_TOL = 1e-10
GRAM_ORTHO_TOL = 1e-12      # per-dim off-diagonal Gram tolerance
MAX_EIGENSOLVER_DIM = 64    # Choi eigendecompositions are refused above this


def col(a: np.ndarray) -> np.ndarray:
    """Column-stack a matrix: col(A) = sum_ij A_ij e_j (x) e_i."""
    return np.asarray(a).flatten(order="F")


def uncol(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`col` for a d x d matrix."""
    return np.asarray(v).reshape((d, d), order="F")


@dataclass(eq=False)
class KrausChannel:
    """A channel as a stack of d x d complex Kraus matrices.

    ``kraus`` has shape (k, d, d).  The trace-preserving condition
    sum_i A_i^dag A_i = I is *not* enforced at construction (so that
    deliberately broken inputs can be fed to :func:`validate_cptp`).
    Instances are treated as immutable; derived decompositions are cached.
    """

    dim: int
    kraus: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=np.complex128)
        if k.ndim == 2:
            k = k[np.newaxis, :, :]
        if k.ndim != 3 or k.shape[1] != self.dim or k.shape[2] != self.dim:
            raise DimensionMismatch(
                f"kraus must have shape (k, {self.dim}, {self.dim}), got {k.shape}"
            )
        if k.shape[0] == 0:
            raise ValueError("channel needs at least one Kraus operator")
        if not np.all(np.isfinite(k)):
            raise ValueError("Kraus operators contain non-finite entries")
        self.kraus = k
        self._canonical = None
        self._polar = None

    @classmethod
    def from_ops(cls, ops: Sequence[np.ndarray]) -> "KrausChannel":
        ops = [np.asarray(o, dtype=np.complex128) for o in ops]
        return cls(dim=ops[0].shape[0], kraus=np.stack(ops))

    @property
    def n_kraus(self) -> int:
        return self.kraus.shape[0]


@dataclass(eq=False)
class ChoiMatrix:
    """Choi matrix sum_ij E_ij (x) A(E_ij), a d^2 x d^2 complex matrix."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = matcore.as_complex_matrix(self.matrix, "choi")
        if m.shape != (self.dim**2, self.dim**2):
            raise DimensionMismatch(
                f"choi must be {self.dim**2} x {self.dim**2}, got {m.shape}"
            )
        self.matrix = m


@dataclass(eq=False)
class CanonicalDecomposition:
    """Ordered canonical Kraus decomposition.

    The operators are mutually orthogonal under the Hilbert-Schmidt inner
    product, sorted by descending weight w_i = ||A_i||_2^2 / d, and carry
    the deterministic phase convention (largest-magnitude entry real
    positive; the leading operator prefers tr A_1 real positive).
    ``degenerate_leading`` flags w_1 - w_2 < 1e-10.
    """

    dim: int
    kraus: np.ndarray
    weights: np.ndarray
    degenerate_leading: bool

    @property
    def a1(self) -> np.ndarray:
        return self.kraus[0]

    @property
    def w1(self) -> float:
        return float(self.weights[0])

    def as_channel(self) -> KrausChannel:
        ch = KrausChannel(dim=self.dim, kraus=self.kraus)
        ch._canonical = self
        return ch


@dataclass(eq=False)
class LKMap:
    """Leading-Kraus approximation: the (generally non-TP) map A_1 . A_1^dag."""

    dim: int
    a1: np.ndarray
    weight: float

    def __post_init__(self):
        self.a1 = matcore.as_complex_matrix(self.a1, "a1")
        top = float(np.linalg.svd(self.a1, compute_uv=False)[0]) if self.a1.size else 0.0
        if top > 1.0 + 1e-10:
            raise ValueError(f"LK operator has spectral radius {top:.3e} > 1")
        w = float(np.linalg.norm(self.a1) ** 2 / self.dim)
        if abs(w - self.weight) > 1e-10:
            raise ValueError("weight inconsistent with ||a1||^2/d")

    def phi_to(self, target: np.ndarray | None = None) -> float:
        """Process fidelity of the LK map to a unitary target."""
        if target is None:
            t = np.trace(self.a1)
        else:
            t = np.trace(np.asarray(target).conj().T @ self.a1)
        return float(abs(t) ** 2 / self.dim**2)

    @property
    def upsilon(self) -> float:
        """Upsilon of the LK map equals its weight ||a1||^2/d."""
        return self.weight


@dataclass(eq=False)
class Superoperator:
    """Matrix acting on column-stacked operators: S = sum_i A_i^* (x) A_i."""

    dim: int
    matrix: np.ndarray


@dataclass
class CptpValidation:
    """Slack report for the CP and TP conditions."""

    dim: int
    cp_slack: float
    tp_slack: float
    ok: bool


ChannelLike = Union[KrausChannel, CanonicalDecomposition]


def _kraus_of(ch: ChannelLike) -> np.ndarray:
    return ch.kraus


def validate_cptp(ch: ChannelLike | ChoiMatrix) -> CptpValidation:
    """Check complete positivity and trace preservation.

    ``cp_slack`` is the most negative Choi eigenvalue (0 if none); a Kraus
    representation is CP by construction, so its slack is exactly 0.
    ``tp_slack`` is ``||sum A_i^dag A_i - I||_2``.  ``ok`` requires
    cp_slack >= -1e-10*d and tp_slack <= 1e-9.
    """
    if isinstance(ch, ChoiMatrix):
        d = ch.dim
        vals = np.linalg.eigvalsh((ch.matrix + ch.matrix.conj().T) / 2.0)
        cp_slack = float(min(vals[0], 0.0))
        # Tr over the output slot gives (sum A^dag A)^T
        c = ch.matrix.reshape(d, d, d, d)  # (a, b, c, e) row (a,b) col (c,e)
        t2 = np.einsum("abcb->ac", c)
        tp_slack = float(np.linalg.norm(t2 - np.eye(d)))
    else:
        k = _kraus_of(ch)
        d = ch.dim
        acc = np.einsum("kij,kil->jl", k.conj(), k)
        cp_slack = 0.0
        tp_slack = float(np.linalg.norm(acc - np.eye(d)))
    ok = bool(cp_slack >= -CP_EIG_TOL * d and tp_slack <= TP_TOL)
    return CptpValidation(dim=d, cp_slack=cp_slack, tp_slack=tp_slack, ok=ok)


def to_choi(ch: ChannelLike) -> ChoiMatrix:
    """Choi matrix of a channel: sum over Kraus of col(A) col(A)^dag."""
    k = _kraus_of(ch)
    d = ch.dim
    cols = np.transpose(k, (0, 2, 1)).reshape(k.shape[0], d * d)  # rows are col(A_i)
    c = cols.T @ cols.conj()
    return ChoiMatrix(dim=d, matrix=c)


def from_choi(choi: ChoiMatrix) -> CanonicalDecomposition:
    """Canonical Kraus decomposition from the Choi eigendecomposition.

    Eigenvalues below ``1e-12*d`` are dropped as float noise; an eigenvalue
    below ``-1e-10*d`` raises :class:`NotCP`.
    """
    d = choi.dim
    eig = matcore.hermitian_eig(choi.matrix)
    vals = eig.values
    if vals[-1] < -CP_EIG_TOL * d:
        raise NotCP(f"Choi eigenvalue {vals[-1]:.3e} below CP floor")
    keep = vals > CHOI_DROP_TOL * d
    vals = vals[keep]
    vecs = eig.vectors[:, keep]
    if vals.size == 0:
        raise NotCP("Choi matrix is numerically zero")
    ops = np.empty((vals.size, d, d), dtype=np.complex128)
    for i in range(vals.size):
        op = np.sqrt(vals[i]) * uncol(vecs[:, i], d)
        ops[i] = matcore.fix_trace_phase(op) if i == 0 else matcore.fix_entry_phase(op)
    weights = vals / d
    degenerate = bool(vals.size > 1 and weights[0] - weights[1] < WEIGHT_DEGENERACY_TOL)
    return CanonicalDecomposition(
        dim=d, kraus=ops, weights=weights, degenerate_leading=degenerate
    )


def _gram(k: np.ndarray) -> np.ndarray:
    flat = k.reshape(k.shape[0], -1)
    return flat.conj() @ flat.T


def canonical(ch: ChannelLike) -> CanonicalDecomposition:
    """Ordered canonical Kraus decomposition of a channel.

    Equivalent to ``from_choi(to_choi(ch))``.  A family that is already
    mutually orthogonal (off-diagonal Gram entries below ``1e-12*d``) is
    sorted and phase-fixed directly, which keeps large analytic
    constructions (d > 64) away from the Choi eigensolver; other channels
    above d = 64 are refused.
    """
    if isinstance(ch, CanonicalDecomposition):
        return ch
    cached = ch._canonical
    if cached is not None:
        return cached
    k = ch.kraus
    d = ch.dim
    g = _gram(k)
    off = g - np.diag(np.diag(g))
    if k.shape[0] == 1 or np.max(np.abs(off)) <= GRAM_ORTHO_TOL * d:
        norms2 = np.diag(g).real
        keep = norms2 > CHOI_DROP_TOL * d
        norms2 = norms2[keep]
        ops = k[keep]
        order = np.argsort(-norms2, kind="stable")
        norms2 = norms2[order]
        ops = np.stack(
            [
                matcore.fix_trace_phase(op) if i == 0 else matcore.fix_entry_phase(op)
                for i, op in enumerate(ops[order])
            ]
        )
        weights = norms2 / d
        degenerate = bool(
            weights.size > 1 and weights[0] - weights[1] < WEIGHT_DEGENERACY_TOL
        )
        result = CanonicalDecomposition(
            dim=d, kraus=ops, weights=weights, degenerate_leading=degenerate
        )
    else:
        if d > MAX_EIGENSOLVER_DIM:
            raise DimensionMismatch(
                f"canonicalization of non-orthogonal Kraus families above "
                f"d={MAX_EIGENSOLVER_DIM} requires a Choi eigendecomposition "
                "that is out of range; supply an orthogonal family"
            )
        result = from_choi(to_choi(ch))
    ch._canonical = result
    return result


def lk(ch: ChannelLike, strict: bool = False) -> LKMap:
    """Leading-Kraus approximation of a channel.

    Warns when the leading weight w_1 <= 1/2 (catastrophic territory, where
    uniqueness of the LK operator is no longer guaranteed).  With
    ``strict=True`` a degenerate leading weight raises
    :class:`DegenerateLeading`.
    """
    canon = canonical(ch)
    if canon.degenerate_leading:
        if strict:
            raise DegenerateLeading(
                "leading Kraus weight is degenerate (w1 - w2 < 1e-10)"
            )
    if canon.w1 <= 0.5:
        warnings.warn(
            f"leading Kraus weight {canon.w1:.4f} <= 1/2: channel is in "
            "catastrophic territory and the LK operator may not be unique",
            stacklevel=2,
        )
    return LKMap(dim=canon.dim, a1=canon.a1.copy(), weight=canon.w1)


def apply(ch: ChannelLike, rho) -> np.ndarray:
    """Apply the channel: sum_i A_i rho A_i^dag."""
    r = matcore.as_complex_matrix(rho, "rho")
    if r.shape != (ch.dim, ch.dim):
        raise DimensionMismatch(f"rho must be {ch.dim} x {ch.dim}, got {r.shape}")
    k = _kraus_of(ch)
    return np.einsum("kij,jl,kml->im", k, r, k.conj())


def compose_pair(first: ChannelLike, second: ChannelLike) -> KrausChannel:
    """Channel applying ``first`` then ``second`` (second o first)."""
    if first.dim != second.dim:
        raise DimensionMismatch("composed channels must share a dimension")
    d = first.dim
    prod = np.einsum("aij,bjk->abik", _kraus_of(second), _kraus_of(first))
    prod = prod.reshape(-1, d, d)
    out = KrausChannel(dim=d, kraus=prod)
    if prod.shape[0] > d * d:
        out = canonical(out).as_channel()
    return out


def compose(channels: Sequence[ChannelLike]) -> KrausChannel:
    """Compose channels in circuit order: index 0 is applied first.

    Product Kraus families are re-canonicalized whenever their size exceeds
    d^2, keeping memory bounded for deep circuits.
    """
    if not channels:
        raise ValueError("need at least one channel")
    dims = {c.dim for c in channels}
    if len(dims) != 1:
        raise DimensionMismatch("composed channels must share a dimension")
    acc = channels[0]
    if isinstance(acc, CanonicalDecomposition):
        acc = acc.as_channel()
    for ch in channels[1:]:
        acc = compose_pair(acc, ch)
    return acc


def compose_lk(lks: Sequence[LKMap]) -> LKMap:
    """Compose LK maps in circuit order by multiplying their operators."""
    if not lks:
        raise ValueError("need at least one LK map")
    dims = {m.dim for m in lks}
    if len(dims) != 1:
        raise DimensionMismatch("composed LK maps must share a dimension")
    d = lks[0].dim
    acc = np.eye(d, dtype=np.complex128)
    for m in lks:
        acc = m.a1 @ acc
    return LKMap(dim=d, a1=acc, weight=float(np.linalg.norm(acc) ** 2 / d))


def to_superop(ch: ChannelLike) -> Superoperator:
    """Column-stacking superoperator sum_i A_i^* (x) A_i."""
    k = _kraus_of(ch)
    d = ch.dim
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for a in k:
        s += np.kron(a.conj(), a)
    return Superoperator(dim=d, matrix=s)


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------


def _matrix_to_pairs(m: np.ndarray) -> list:
    flat = np.asarray(m).flatten(order="C")
    return [[float(z.real), float(z.imag)] for z in flat]


def _pairs_to_matrix(pairs, rows: int, cols: int, name: str) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape != (rows * cols, 2):
        raise ValueError(
            f"{name} must be a flat row-major list of {rows * cols} [re, im] pairs"
        )
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(rows, cols)


def channel_to_json(ch: ChannelLike) -> dict:
    """Serialize a channel to the JSON wire format."""
    return {
        "dim": int(ch.dim),
        "kraus": [_matrix_to_pairs(a) for a in _kraus_of(ch)],
    }


def choi_to_json(choi: ChoiMatrix) -> dict:
    return {"dim": int(choi.dim), "choi": _matrix_to_pairs(choi.matrix)}


def channel_from_json(obj: dict) -> KrausChannel | ChoiMatrix:
    """Parse the JSON wire format.

    Accepts ``{"dim": d, "kraus": [...]}`` or the Choi variant
    ``{"dim": d, "choi": [...]}``; raises ``ValueError`` on malformed input.
    """
    if not isinstance(obj, dict):
        raise ValueError("channel JSON must be an object")
    if "dim" not in obj:
        raise ValueError("channel JSON missing 'dim'")
    d = obj["dim"]
    if not isinstance(d, int) or d < 1:
        raise ValueError("'dim' must be a positive integer")
    if "kraus" in obj:
        ops = obj["kraus"]
        if not isinstance(ops, list) or not ops:
            raise ValueError("'kraus' must be a non-empty list")
        mats = [_pairs_to_matrix(o, d, d, "kraus operator") for o in ops]
        return KrausChannel.from_ops(mats)
    if "choi" in obj:
        m = _pairs_to_matrix(obj["choi"], d * d, d * d, "choi")
        return ChoiMatrix(dim=d, matrix=m)
    raise ValueError("channel JSON needs a 'kraus' or 'choi' field")


def unitary_to_json(u: np.ndarray) -> dict:
    u = np.asarray(u, dtype=np.complex128)
    return {"dim": int(u.shape[0]), "unitary": _matrix_to_pairs(u)}


def unitary_from_json(obj: dict) -> np.ndarray:
    if not isinstance(obj, dict) or "dim" not in obj or "unitary" not in obj:
        raise ValueError("unitary JSON needs 'dim' and 'unitary' fields")
    d = obj["dim"]
    if not isinstance(d, int) or d < 1:
        raise ValueError("'dim' must be a positive integer")
    return _pairs_to_matrix(obj["unitary"], d, d, "unitary")
