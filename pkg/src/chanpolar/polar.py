"""Unitary-decoherent polar factorization of channels.

A non-catastrophic channel factors as A = V o D (or D' o V) where V is the
unitary channel built from the matrix polar factor of the leading Kraus
operator and D is decoherent (its leading Kraus operator is positive
semi-definite).  This module also computes the equability constants, the
coherent/decoherent infidelity split, the decoherence-limited predicate,
and a composed classification label.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import channel as chn
from . import matcore, metrics
from .errors import DegenerateLeading, PhaseUndefined

DECOHERENT_TOL = 1e-9
DEFAULT_KAPPA = 0.1
_ZERO_PERTURBATION = 1e-12


@dataclass(eq=False)
class ChannelPolar:
    """Polar factors of a channel.

    ``coherent`` is the single-Kraus unitary channel V; ``decoherent_left``
    satisfies A = V o decoherent_left and ``decoherent_right`` satisfies
    A = decoherent_right o V.  ``unitary``/``psd`` expose the matrix-level
    factors of the leading Kraus operator (V phase-fixed to tr V in R+ when
    possible), and ``unique`` records whether A_1 was full rank with a
    non-degenerate leading weight.
    """

    dim: int
    coherent: chn.KrausChannel
    decoherent_left: chn.KrausChannel
    decoherent_right: chn.KrausChannel
    unitary: np.ndarray
    psd: np.ndarray
    phase_fixed: bool
    singular_values: np.ndarray
    unique: bool


def channel_polar(ch: chn.ChannelLike, strict: bool = False) -> ChannelPolar:
    """Factor a channel into its unitary and decoherent parts.

    Warns when Upsilon^2 <= 1/2 (the leading Kraus operator may not be
    unique there); raises :class:`DegenerateLeading` in strict mode when
    the leading weight is degenerate.
    """
    canon = chn.canonical(ch)
    if canon.degenerate_leading and strict:
        raise DegenerateLeading("leading Kraus weight is degenerate")
    cached = getattr(ch, "_polar", None)
    if cached is not None:
        return cached
    if metrics.upsilon(canon) ** 2 <= 0.5:
        warnings.warn(
            "channel is catastrophic (Upsilon^2 <= 1/2); polar factors may "
            "be discontinuous in the input",
            stacklevel=2,
        )
    pol = matcore.polar_decompose(canon.a1)
    v = pol.unitary
    vk = np.einsum("ij,kjl->kil", v.conj().T, canon.kraus)
    left = chn.KrausChannel(dim=canon.dim, kraus=vk)
    kv = np.einsum("kij,jl->kil", canon.kraus, v.conj().T)
    right = chn.KrausChannel(dim=canon.dim, kraus=kv)
    d = canon.dim
    rank_ok = bool(
        pol.singular_values[-1] > pol.singular_values[0] * d * 1e-12
    )
    result = ChannelPolar(
        dim=d,
        coherent=chn.KrausChannel(dim=d, kraus=v[np.newaxis]),
        decoherent_left=left,
        decoherent_right=right,
        unitary=v,
        psd=pol.psd,
        phase_fixed=pol.phase_fixed,
        singular_values=pol.singular_values,
        unique=rank_ok and not canon.degenerate_leading,
    )
    if not isinstance(ch, chn.CanonicalDecomposition):
        ch._polar = result
    return result


def is_decoherent(ch: chn.ChannelLike, tol: float = DECOHERENT_TOL) -> bool:
    """True iff the leading Kraus operator is positive semi-definite
    (Hermitian within tol, smallest eigenvalue >= -tol)."""
    a1 = chn.canonical(ch).a1
    if np.linalg.norm(a1 - a1.conj().T) > tol:
        return False
    return bool(np.linalg.eigvalsh((a1 + a1.conj().T) / 2.0)[0] >= -tol)


@dataclass
class EquabilityReport:
    """Spectral-perturbation homogeneity constants (SSE/WSE).

    ``sigma`` are the singular values of A_1 (descending) and ``lambda_re``
    the real parts of the eigenvalues of the phase-fixed unitary factor.
    Gamma constants compare the worst perturbation to the mean one, gamma
    constants the standard deviation to the mean.  The channel is equable
    (strict/wide sense) when each constant stays below
    ``kappa / sqrt(mean perturbation)``; a perfectly unperturbed spectrum
    contributes constants of 0 and passes trivially.
    """

    sigma: np.ndarray
    lambda_re: np.ndarray
    Gamma_decoh: float
    Gamma_coh: float
    gamma_decoh: float
    gamma_coh: float
    sse_ok: bool
    wse_ok: bool
    kappa: float
    decoh_threshold: float
    coh_threshold: float


def _spectrum_constants(values: np.ndarray, kappa: float):
    """(Gamma, gamma, threshold, big_ok, small_ok) for one spectrum."""
    mean_pert = float(np.mean(1.0 - values))
    if mean_pert <= _ZERO_PERTURBATION:
        return 0.0, 0.0, float("inf"), True, True
    big = float((1.0 - np.min(values)) / mean_pert)
    small = float(np.std(values) / mean_pert)
    threshold = kappa / np.sqrt(mean_pert)
    return big, small, threshold, bool(big < threshold), bool(small < threshold)


def equability(ch: chn.ChannelLike, kappa: float = DEFAULT_KAPPA) -> EquabilityReport:
    """Compute SSE/WSE decoherence and coherence constants.

    Raises :class:`PhaseUndefined` when |tr V| is too small to fix the
    tr V in R+ phase convention the coherence constants rely on.
    """
    pol = channel_polar(ch)
    if not pol.phase_fixed:
        raise PhaseUndefined(
            "tr V is numerically zero; the coherence constants are undefined"
        )
    sigma = np.sort(pol.singular_values)[::-1]
    # V is unitary hence normal: Re of its eigenvalues are the eigenvalues
    # of the Hermitian part.
    lam_re = np.linalg.eigvalsh((pol.unitary + pol.unitary.conj().T) / 2.0)[::-1]
    g_d, s_d, th_d, big_d, small_d = _spectrum_constants(sigma, kappa)
    g_c, s_c, th_c, big_c, small_c = _spectrum_constants(lam_re, kappa)
    return EquabilityReport(
        sigma=sigma,
        lambda_re=lam_re,
        Gamma_decoh=g_d,
        Gamma_coh=g_c,
        gamma_decoh=s_d,
        gamma_coh=s_c,
        sse_ok=bool(big_d and big_c),
        wse_ok=bool(small_d and small_c),
        kappa=kappa,
        decoh_threshold=th_d,
        coh_threshold=th_c,
    )


@dataclass
class InfidelitySplit:
    """Coherent/decoherent split of the average infidelity.

    ``r_coh = r(V, U)`` and ``r_decoh = r(D, I)`` are exact; their sum
    matches r up to O(r^2) for equable errors (``residual`` reports the
    difference).  ``r_decoh_from_u`` is the unitarity-only estimate
    (d - sqrt((d^2-1) u + 1)) / (d + 1) and ``coherence_level_approx`` the
    unitarity-based estimate 1 - (1 - Upsilon)/(1 - Phi); the ratio
    (1 - Upsilon)/(1 - Phi) itself estimates the decoherence level.
    """

    dim: int
    r: float
    r_coh: float
    r_decoh: float
    r_decoh_from_u: float
    coherence_level: float
    coherence_level_approx: float
    residual: float

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "r": self.r,
            "r_coh": self.r_coh,
            "r_decoh": self.r_decoh,
            "r_decoh_from_u": self.r_decoh_from_u,
            "coherence_level": self.coherence_level,
            "coherence_level_approx": self.coherence_level_approx,
            "residual": self.residual,
        }


def infidelity_split(ch: chn.ChannelLike, target=None) -> InfidelitySplit:
    """Split the infidelity into coherent and decoherent parts."""
    canon = chn.canonical(ch)
    d = canon.dim
    u = metrics._check_target(target, d)
    pol = channel_polar(ch)
    phi_total = metrics.phi(canon, u)
    r = metrics.infidelity(phi_total, d)
    phi_v = float(abs(np.trace(u.conj().T @ pol.unitary)) ** 2 / d**2)
    r_coh = metrics.infidelity(phi_v, d)
    phi_d = metrics.phi(pol.decoherent_left)
    r_decoh = metrics.infidelity(phi_d, d)
    ups = metrics.upsilon(canon)
    uu = metrics.unitarity(ups, d)
    r_decoh_from_u = (d - np.sqrt((d * d - 1) * uu + 1.0)) / (d + 1.0)
    level = r_coh / r if r > 1e-15 else 0.0
    level_approx = (
        1.0 - (1.0 - ups) / (1.0 - phi_total) if 1.0 - phi_total > 1e-15 else 0.0
    )
    return InfidelitySplit(
        dim=d,
        r=r,
        r_coh=r_coh,
        r_decoh=r_decoh,
        r_decoh_from_u=float(r_decoh_from_u),
        coherence_level=float(level),
        coherence_level_approx=float(level_approx),
        residual=float(r - r_coh - r_decoh),
    )


def is_decoherence_limited(ch: chn.ChannelLike, target=None, c: float = 1.0) -> bool:
    """True iff the Upsilon-Phi gap is second order in the infidelity.

    Implemented as Upsilon - Phi <= c * (1 - Phi)^2, i.e. the gap is
    measured against the squared *process* infidelity (1 - Phi differs
    from the average infidelity r only by the factor (d+1)/d, so the
    predicate is the same up to the constant c).
    """
    p = metrics.phi(ch, target)
    ups = metrics.upsilon(ch)
    return bool(ups - p <= c * (1.0 - p) ** 2 + 1e-12)


@dataclass
class Classification:
    """Composed channel label plus the individual verdicts."""

    label: str
    decoherent: bool
    coherent: bool
    sse_ok: bool
    wse_ok: bool
    extremal_dephaser: bool
    extremal_unitary: bool
    coherence_level: float
    decoherence_limited: bool

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "decoherent": self.decoherent,
            "coherent": self.coherent,
            "sse_ok": self.sse_ok,
            "wse_ok": self.wse_ok,
            "extremal_dephaser": self.extremal_dephaser,
            "extremal_unitary": self.extremal_unitary,
            "coherence_level": self.coherence_level,
            "decoherence_limited": self.decoherence_limited,
        }


def classify(
    ch: chn.ChannelLike, target=None, kappa: float = DEFAULT_KAPPA
) -> Classification:
    """Deterministic label composed from the decoherence predicate, the
    equability constants, and the coherence level.

    Extremal flags record a kappa-relative failure of the corresponding
    strict-sense equability component (so moderately noisy channels can be
    flagged at small kappa even when their spectra are homogeneous).
    """
    pol = channel_polar(ch)
    decoh = is_decoherent(ch)
    split = infidelity_split(ch, target)
    try:
        eq = equability(ch, kappa)
        sigma = eq.sigma
        lam = eq.lambda_re
        m_sig = float(np.mean(1.0 - sigma))
        m_lam = float(np.mean(1.0 - lam))
        ext_deph = bool(
            m_sig > _ZERO_PERTURBATION and eq.Gamma_decoh >= eq.decoh_threshold
        )
        ext_unit = bool(
            m_lam > _ZERO_PERTURBATION and eq.Gamma_coh >= eq.coh_threshold
        )
        sse_ok, wse_ok = eq.sse_ok, eq.wse_ok
    except PhaseUndefined:
        ext_deph = False
        ext_unit = True
        sse_ok = wse_ok = False
    coherent = bool(not decoh and split.coherence_level >= 0.99)
    dlim = is_decoherence_limited(ch, target)
    if decoh:
        base = "Decoherent"
    elif coherent:
        base = "Coherent"
    else:
        base = "Mixed"
    if sse_ok:
        suffix = ", SSE"
    elif wse_ok:
        suffix = ", WSE"
    else:
        suffix = ", non-equable"
    flags = []
    if ext_deph:
        flags.append("extremal dephaser")
    if ext_unit:
        flags.append("extremal unitary")
    label = base + suffix + (f" ({'; '.join(flags)})" if flags else "")
    return Classification(
        label=label,
        decoherent=decoh,
        coherent=coherent,
        sse_ok=sse_ok,
        wse_ok=wse_ok,
        extremal_dephaser=ext_deph,
        extremal_unitary=ext_unit,
        coherence_level=split.coherence_level,
        decoherence_limited=dlim,
    )
