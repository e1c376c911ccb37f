"""Deterministic, seeded construction of the named channel families.

Every generator returns a valid CPTP :class:`~chanpolar.channel.KrausChannel`
and is reproducible from its seed.  Families are also reachable through the
JSON-friendly :class:`FamilySpec` / :func:`make_channel` dispatch used by
the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import channel as chn
from . import polar as polar_mod
from .errors import ParamOutOfRange

FAMILIES = (
    "identity",
    "depolarizing",
    "dephasing",
    "stochastic_weyl",
    "amplitude_damping",
    "rotation",
    "random_unitary_error",
    "random_cptp",
    "psd_lk_decoherent",
    "extremal_dephaser",
    "extremal_unitary",
    "spiral",
    "coherence_mix",
)


def _require(cond: bool, msg: str):
    if not cond:
        raise ParamOutOfRange(msg)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _expi_hermitian(h: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """exp(1j * scale * H) for Hermitian H, via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * scale * w)) @ v.conj().T


def random_unitary(d: int, seed) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix with the
    phase-of-diagonal correction."""
    _require(d >= 1, "dimension must be >= 1")
    rng = _rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    ph = diag / np.abs(diag)
    return q * ph


# ---------------------------------------------------------------------------
# operator bases
# ---------------------------------------------------------------------------

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def weyl_ops(d: int) -> list[np.ndarray]:
    """The d^2 Heisenberg-Weyl unitaries X^a Z^b (orthogonal basis)."""
    omega = np.exp(2j * np.pi / d)
    shift = np.zeros((d, d), dtype=np.complex128)
    for j in range(d):
        shift[(j + 1) % d, j] = 1.0
    clock = np.diag(omega ** np.arange(d))
    ops = []
    xa = np.eye(d, dtype=np.complex128)
    for _ in range(d):
        zb = np.eye(d, dtype=np.complex128)
        for _ in range(d):
            ops.append(xa @ zb)
            zb = zb @ clock
        xa = xa @ shift
    return ops


# ---------------------------------------------------------------------------
# named families
# ---------------------------------------------------------------------------


def identity_channel(d: int) -> chn.KrausChannel:
    _require(d >= 1, "dimension must be >= 1")
    return chn.KrausChannel(dim=d, kraus=np.eye(d, dtype=np.complex128)[np.newaxis])


def depolarizing(d: int, p: float) -> chn.KrausChannel:
    """rho -> p rho + (1-p) tr(rho) I/d, in the Weyl Kraus form with
    weights c_0 = p + (1-p)/d^2 on the identity and (1-p)/d^2 elsewhere."""
    _require(0.0 <= p <= 1.0, "depolarizing p must be in [0, 1]")
    ops = weyl_ops(d)
    c0 = p + (1.0 - p) / d**2
    c = (1.0 - p) / d**2
    kraus = [np.sqrt(c0) * ops[0]] + [np.sqrt(c) * w for w in ops[1:]]
    return chn.KrausChannel.from_ops(kraus)


def dephasing(d: int, q: float) -> chn.KrausChannel:
    """rho -> (1-q) rho + q/(d-1) sum_k Z^k rho Z^-k over the clock powers;
    for d = 2 this is the standard (1-q) rho + q Z rho Z dephasing."""
    _require(0.0 <= q <= 0.5, "dephasing q must be in [0, 1/2]")
    _require(d >= 2, "dephasing needs d >= 2")
    omega = np.exp(2j * np.pi / d)
    clock = np.diag(omega ** np.arange(d))
    kraus = [np.sqrt(1.0 - q) * np.eye(d, dtype=np.complex128)]
    zb = np.eye(d, dtype=np.complex128)
    for _ in range(d - 1):
        zb = zb @ clock
        kraus.append(np.sqrt(q / (d - 1)) * zb)
    return chn.KrausChannel.from_ops(kraus)


def stochastic_weyl(d: int, p: float, seed) -> chn.KrausChannel:
    """Stochastic channel: identity with weight p, the remaining 1-p split
    randomly (seeded) over the other Weyl unitaries.  p > 1/2 keeps the
    identity component leading."""
    _require(0.5 < p <= 1.0, "stochastic_weyl p must be in (1/2, 1]")
    rng = _rng(seed)
    ops = weyl_ops(d)
    raw = rng.random(d * d - 1)
    if raw.sum() <= 0:
        raw = np.ones(d * d - 1)
    raw = raw / raw.sum() * (1.0 - p)
    kraus = [np.sqrt(p) * ops[0]] + [
        np.sqrt(w) * op for w, op in zip(raw, ops[1:])
    ]
    return chn.KrausChannel.from_ops(kraus)


def amplitude_damping(d: int, gamma: float) -> chn.KrausChannel:
    """Decay of every excited level into the ground state.

    For d = 2 this is the textbook channel with Kraus operators
    diag(1, sqrt(1-gamma)) and sqrt(gamma) |0><1|.
    """
    _require(0.0 <= gamma <= 1.0, "amplitude damping gamma must be in [0, 1]")
    _require(d >= 2, "amplitude damping needs d >= 2")
    a1 = np.diag([1.0] + [np.sqrt(1.0 - gamma)] * (d - 1)).astype(np.complex128)
    kraus = [a1]
    for i in range(1, d):
        b = np.zeros((d, d), dtype=np.complex128)
        b[0, i] = np.sqrt(gamma)
        kraus.append(b)
    return chn.KrausChannel.from_ops(kraus)


def rotation_matrix(d: int, theta: float) -> np.ndarray:
    """R(theta) (x) I_{d/2} for even d, R(theta) (+) I_{d-2} for odd d."""
    _require(-np.pi < theta <= np.pi, "rotation theta must be in (-pi, pi]")
    _require(d >= 2, "rotation needs d >= 2")
    r = np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]],
        dtype=np.complex128,
    )
    if d == 2:
        return r
    if d % 2 == 0:
        return np.kron(r, np.eye(d // 2, dtype=np.complex128))
    out = np.eye(d, dtype=np.complex128)
    out[:2, :2] = r
    return out


def rotation(d: int, theta: float) -> chn.KrausChannel:
    """Coherent over-rotation error channel (single unitary Kraus)."""
    return chn.KrausChannel(dim=d, kraus=rotation_matrix(d, theta)[np.newaxis])


def random_unitary_error(d: int, strength: float, seed) -> chn.KrausChannel:
    """exp(-i strength H) with H a seeded GUE draw normalized to unit
    spectral radius; strength is then the largest rotation angle."""
    _require(strength >= 0.0, "strength must be non-negative")
    rng = _rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (g + g.conj().T) / 2.0
    top = float(np.abs(np.linalg.eigvalsh(h)).max())
    if top > 0:
        h = h / top
    u = _expi_hermitian(h, -strength)
    return chn.KrausChannel(dim=d, kraus=u[np.newaxis])


def random_cptp(
    d: int, kraus_rank: int, seed, strength: float | None = None
) -> chn.KrausChannel:
    """Random CPTP channel carved from an isometry into d * kraus_rank.

    With ``strength=None`` the isometry is a block of a Haar unitary; with
    a strength the isometry is exp(-i strength H) J for a normalized GUE
    generator H and the embedding J, which produces a channel close to the
    identity (exactly the identity at strength 0).  TP holds exactly by
    construction.
    """
    _require(1 <= kraus_rank <= d * d, "kraus_rank must be in [1, d^2]")
    n = d * kraus_rank
    if strength is None:
        u = random_unitary(n, seed)
        iso = u[:, :d]
    else:
        _require(strength >= 0.0, "strength must be non-negative")
        rng = _rng(seed)
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        h = (g + g.conj().T) / 2.0
        top = float(np.abs(np.linalg.eigvalsh(h)).max())
        if top > 0:
            h = h / top
        iso = _expi_hermitian(h, -strength)[:, :d]
    kraus = iso.reshape(kraus_rank, d, d)
    return chn.KrausChannel(dim=d, kraus=kraus.copy())


def psd_lk_decoherent(
    d: int, strength: float, seed, kraus_rank: int = 3
) -> chn.KrausChannel:
    """Random decoherent channel: the left decoherent polar factor of a
    near-identity random CPTP draw (its LK operator is PSD by
    construction)."""
    _require(0.0 < strength <= 0.3, "strength must be in (0, 0.3]")
    ch = random_cptp(d, kraus_rank, seed, strength=strength)
    return polar_mod.channel_polar(ch).decoherent_left


def extremal_dephaser(
    d: int,
    base_scale: float | None = None,
    n_outliers: int | None = None,
    outlier_depth: float | None = None,
    seed=None,
) -> chn.KrausChannel:
    """Channel whose LK singular-value profile has far-outlying dips.

    Called with no profile parameters it builds the exact projector form:
    Kraus {P, |0><0|} with P = sum_{i>0} |i><i|, whose LK operator is
    diag(0, 1, ..., 1) (the completion by the complementary projector is a
    choice; only the LK operator is pinned down).  This form is analytic:
    the Kraus family is orthogonal by construction, so no Choi
    eigendecomposition is ever needed and arbitrary d (e.g. 1024) is fine.

    With profile parameters it draws sigma_i = 1 - |N(0, base_scale^2)|
    and sinks ``n_outliers`` randomly chosen entries to
    1 - outlier_depth (10% jitter), then completes {diag(sigma)} with the
    ladder operators sqrt(1 - sigma_i^2) |i+1 mod d><i|, again orthogonal
    by construction.
    """
    _require(d >= 2, "extremal dephaser needs d >= 2")
    if base_scale is None and n_outliers is None and outlier_depth is None:
        a1 = np.diag([0.0] + [1.0] * (d - 1)).astype(np.complex128)
        b = np.zeros((d, d), dtype=np.complex128)
        b[0, 0] = 1.0
        return chn.KrausChannel.from_ops([a1, b])
    _require(
        base_scale is not None and n_outliers is not None and outlier_depth is not None,
        "randomized extremal dephaser needs base_scale, n_outliers and outlier_depth",
    )
    _require(0.0 < base_scale < 0.1, "base_scale must be in (0, 0.1)")
    _require(0 < n_outliers < d, "n_outliers must be in (0, d)")
    _require(
        base_scale < outlier_depth <= 0.5, "outlier_depth must be in (base_scale, 0.5]"
    )
    rng = _rng(seed)
    sigma = 1.0 - np.abs(rng.standard_normal(d)) * base_scale
    pos = rng.choice(d, size=n_outliers, replace=False)
    sigma[pos] = 1.0 - outlier_depth * (1.0 + 0.1 * rng.random(n_outliers))
    sigma = np.clip(sigma, 0.0, 1.0)
    kraus = [np.diag(sigma).astype(np.complex128)]
    for i in range(d):
        t2 = 1.0 - sigma[i] ** 2
        if t2 > 1e-30:
            b = np.zeros((d, d), dtype=np.complex128)
            b[(i + 1) % d, i] = np.sqrt(t2)
            kraus.append(b)
    return chn.KrausChannel.from_ops(kraus)


def extremal_unitary(d: int) -> chn.KrausChannel:
    """Unitary error -|0><0| + sum_{i>0} |i><i| (one eigenvalue flipped)."""
    _require(d >= 2, "extremal unitary needs d >= 2")
    v = np.diag([-1.0] + [1.0] * (d - 1)).astype(np.complex128)
    return chn.KrausChannel(dim=d, kraus=v[np.newaxis])


def spiral(alpha: float) -> chn.KrausChannel:
    """The two-Kraus d = 3 channel whose unital action spirals: its polar
    unitary carries a lone conjugate phase pair exp(+/- i alpha^3 / 2)."""
    _require(0.0 < alpha < np.pi / 2, "spiral alpha must be in (0, pi/2)")
    ph = np.exp(1j * alpha**3 / 2.0)
    a1 = np.diag(
        [np.cos(alpha), np.cos(alpha / 2.0) * ph, np.cos(alpha / 2.0) * np.conj(ph)]
    )
    ph2 = np.exp(1j * (alpha + alpha**3 / 2.0))
    a2 = np.diag(
        [
            np.sin(alpha),
            -np.sin(alpha / 2.0) * ph2,
            -np.sin(alpha / 2.0) * np.conj(ph2),
        ]
    )
    return chn.KrausChannel.from_ops([a1, a2])


def coherence_mix_params(infidelity: float, level: float) -> dict:
    """Rotation angle and dephasing rate realizing a d = 2 channel with the
    requested average infidelity r and coherence level r_coh / r.

    Closed forms for the R(theta) o dephasing(q) family:
    Phi = (1-q) cos^2(theta), r = (2/3)(1 - Phi), r_coh = (2/3)(1 - cos^2),
    r_decoh = (2/3) q.
    """
    _require(0.0 < infidelity < 1.0 / 3.0, "infidelity must be in (0, 1/3)")
    _require(0.0 <= level <= 1.0, "coherence level must be in [0, 1]")
    cos2 = 1.0 - 1.5 * level * infidelity
    q = 1.0 - (1.0 - 1.5 * infidelity) / cos2
    _require(q <= 0.5, "requested infidelity puts dephasing outside [0, 1/2]")
    theta = float(np.arccos(np.sqrt(cos2)))
    return {"theta": theta, "q": float(q)}


def coherence_mix(infidelity: float, level: float, d: int = 2) -> chn.KrausChannel:
    """d = 2 channel V o D with target infidelity r and coherence level
    r_coh / r = level, built from the closed forms of the
    rotation-after-dephasing family."""
    _require(d == 2, "coherence_mix is a d = 2 construction")
    p = coherence_mix_params(infidelity, level)
    r = rotation_matrix(2, p["theta"])
    deph = dephasing(2, p["q"])
    kraus = np.einsum("ij,kjl->kil", r, deph.kraus)
    return chn.KrausChannel(dim=2, kraus=kraus)


# ---------------------------------------------------------------------------
# FamilySpec dispatch
# ---------------------------------------------------------------------------


@dataclass
class FamilySpec:
    """JSON-friendly description of a channel family instance."""

    family: str
    dim: int
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def as_dict(self) -> dict:
        out = {"family": self.family, "dim": self.dim, "params": dict(self.params)}
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "FamilySpec":
        if not isinstance(obj, dict) or "family" not in obj or "dim" not in obj:
            raise ValueError("family spec needs 'family' and 'dim' fields")
        fam = obj["family"]
        if fam not in FAMILIES:
            raise ValueError(f"unknown family '{fam}'")
        return cls(
            family=fam,
            dim=int(obj["dim"]),
            params=dict(obj.get("params", {})),
            seed=obj.get("seed"),
        )


def make_channel(spec: FamilySpec) -> chn.KrausChannel:
    """Build the channel described by a :class:`FamilySpec`."""
    try:
        return _dispatch(spec)
    except KeyError as exc:
        raise ParamOutOfRange(
            f"family '{spec.family}' is missing parameter {exc}"
        ) from exc


def _dispatch(spec: FamilySpec) -> chn.KrausChannel:
    f, d, p, seed = spec.family, spec.dim, spec.params, spec.seed
    if f == "identity":
        return identity_channel(d)
    if f == "depolarizing":
        return depolarizing(d, p["p"])
    if f == "dephasing":
        return dephasing(d, p["q"])
    if f == "stochastic_weyl":
        return stochastic_weyl(d, p["p"], seed)
    if f == "amplitude_damping":
        return amplitude_damping(d, p["gamma"])
    if f == "rotation":
        return rotation(d, p["theta"])
    if f == "random_unitary_error":
        return random_unitary_error(d, p["strength"], seed)
    if f == "random_cptp":
        return random_cptp(d, int(p["kraus_rank"]), seed, p.get("strength"))
    if f == "psd_lk_decoherent":
        return psd_lk_decoherent(
            d, p["strength"], seed, kraus_rank=int(p.get("kraus_rank", 3))
        )
    if f == "extremal_dephaser":
        return extremal_dephaser(
            d,
            base_scale=p.get("base_scale"),
            n_outliers=p.get("n_outliers"),
            outlier_depth=p.get("outlier_depth"),
            seed=seed,
        )
    if f == "extremal_unitary":
        return extremal_unitary(d)
    if f == "spiral":
        _require(d == 3, "spiral is a d = 3 construction")
        return spiral(p["alpha"])
    if f == "coherence_mix":
        return coherence_mix(p["infidelity"], p["level"], d)
    raise ParamOutOfRange(f"unknown family '{f}'")
