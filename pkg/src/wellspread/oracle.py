"""Brute-force and Monte Carlo oracles for the certified quantities."""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, ResourceLimitError
from .randmodels import sample_gaussian
from .recovery import AscentParams, ascend
from .tensorcore.elemsym import batch_to_log2, eval_Pt_batch
from .tensorcore.moment import DENSE_LIMIT, MomentOperator, sym_dim
from .tensorcore.scaled import ScaledScalar
from .validation import check_even, check_int, check_matrix, check_vector

BRUTE_LIMIT = 10**6
PROBE_CHUNK = 1024


# ---------------------------------------------------------------- distortion


@dataclass(frozen=True)
class NetDistortion:
    """``lower <= Delta(colspan A) <= upper`` from a net of ``net_size`` points."""

    lower: float
    upper: float
    net_size: int
    covering_radius: float
    argmax: np.ndarray

    def to_dict(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "net_size": self.net_size,
            "covering_radius": self.covering_radius,
            "argmax": self.argmax.tolist(),
        }


def _sphere_net(d, h):
    """Points covering the unit sphere up to sign, and the covering radius."""
    if d == 1:
        return np.ones((1, 1)), 0.0
    if d == 2:
        m = max(1, math.ceil(math.pi / h))
        theta = np.arange(m) * (math.pi / m)
        # neighbouring angles differ by at most h, so every direction is within h/2
        return np.column_stack([np.cos(theta), np.sin(theta)]), 2.0 * math.sin(math.pi / m / 4.0)
    bands = max(1, math.ceil((math.pi / 2) / h))
    pts = []
    for k in range(bands + 1):
        phi = k * (math.pi / 2) / bands
        m = max(1, math.ceil(2.0 * math.pi * math.sin(phi) / h))
        theta = np.arange(m) * (2.0 * math.pi / m)
        pts.append(
            np.column_stack(
                [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.full(m, np.cos(phi))]
            )
        )
    # half a band gap in latitude plus half an azimuth gap along the band
    return np.vstack(pts), h


def net_distortion(A, angular_resolution: float) -> NetDistortion:
    """Two-sided estimate of ``sup sqrt(n)|Ax|_2 / |Ax|_1`` for ``d <= 3``."""
    A = check_matrix(A)
    n, d = A.shape
    if d > 3:
        raise ResourceLimitError(f"net oracle supports d <= 3, got d = {d}", count=d, limit=3)
    h = float(angular_resolution)
    if not 0.0 < h <= 1.0:
        raise DomainError(f"angular_resolution must lie in (0, 1], got {h}")
    root_n = math.sqrt(n)
    X, delta = _sphere_net(d, h)
    smax = float(np.linalg.norm(A, 2))
    best, best_x, upper = 0.0, X[0], 0.0
    step = max(1, (1 << 22) // n)
    for s in range(0, X.shape[0], step):
        Y = A @ X[s : s + step].T
        n2 = np.linalg.norm(Y, axis=0)
        n1 = np.abs(Y).sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(n1 > 0, root_n * n2 / n1, root_n)
            denom = n1 - root_n * smax * delta
            ups = np.where(denom > 0, root_n * (n2 + smax * delta) / denom, root_n)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_x = float(vals[k]), X[s + k]
        upper = max(upper, float(ups.max()))
    lower = min(max(best, 1.0), root_n)
    upper = min(max(upper, lower), root_n)
    if d == 1:
        upper = lower
    return NetDistortion(lower, upper, X.shape[0], delta, best_x.copy())


def sampled_distortion(A, probes: int, seed=0) -> float:
    """Distortion maximized over random directions (a lower estimate)."""
    A = check_matrix(A)
    n, d = A.shape
    rng = np.random.default_rng(seed)
    best = 0.0
    for s in range(0, probes, 1 << 14):
        X = rng.standard_normal((d, min(1 << 14, probes - s)))
        Y = A @ X
        best = max(best, float((math.sqrt(n) * np.linalg.norm(Y, axis=0) / np.abs(Y).sum(axis=0)).max()))
    return best


# ---------------------------------------------------------------- P_t oracles


def brute_Pt(A, t: int, x, reverse: bool = False) -> float:
    """``t! sum_{|S|=t} prod_{i in S} <a_i, x>^4`` by explicit enumeration."""
    A = check_matrix(A, min_rows=0)
    t = check_int(t, "t", minimum=1)
    x = check_vector(x, "x", length=A.shape[1])
    n = A.shape[0]
    if t > n:
        return 0.0
    count = math.comb(n, t)
    if count > BRUTE_LIMIT:
        raise ResourceLimitError(f"C({n},{t}) = {count} exceeds {BRUTE_LIMIT}", count=count, limit=BRUTE_LIMIT)
    z = [float(v) ** 4 for v in A @ x]
    order = list(range(n))[::-1] if reverse else list(range(n))
    total = math.fsum(math.prod(z[i] for i in S) for S in itertools.combinations(order, t))
    return math.factorial(t) * total


@dataclass(frozen=True)
class ProbeResult:
    value: ScaledScalar
    x: np.ndarray
    probes: int
    refined: int

    def to_dict(self):
        return {"value": self.value.to_dict(), "x": self.x.tolist(), "probes": self.probes, "refined": self.refined}


def probe_max_quartic(A, t: int, num_probes: int, seed=0, refine: bool = True, ascent=None) -> ProbeResult:
    """Lower bound on ``max_{|x|=1} P_t(x)``.

    Probes are the coordinate directions followed by a Gaussian stream, so a
    run with more probes sees a superset.  Every probe that sets a new record
    is refined by ascent, which keeps the result monotone in ``num_probes``.
    """
    A = check_matrix(A)
    t = check_int(t, "t", minimum=1)
    num_probes = check_int(num_probes, "num_probes", minimum=1)
    d = A.shape[1]
    ascent = ascent or AscentParams(max_steps=100, gradient_tolerance=1e-8)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    record = -np.inf
    best_val, best_x = ScaledScalar.zero(), np.eye(d)[0]
    refined = 0
    seen = 0
    basis = np.eye(d)
    while seen < num_probes:
        if seen < d:
            X = basis[seen : min(d, num_probes)]
        else:
            X = rng.standard_normal((PROBE_CHUNK, d))[: num_probes - seen]
            X /= np.linalg.norm(X, axis=1, keepdims=True)
        mant, expo = eval_Pt_batch(A, t, X)
        logs = batch_to_log2(mant, expo)
        for k in range(X.shape[0]):
            if logs[k] <= record:
                continue
            record = logs[k]
            cand_x, cand_val = X[k], ScaledScalar(float(mant[k]), int(expo[k]))
            if refine:
                cand_x, cand_val, _ = ascend(A, t, X[k], ascent)
                refined += 1
            if cand_val > best_val:
                best_val, best_x = cand_val, np.array(cand_x)
        seen += X.shape[0]
    return ProbeResult(best_val, best_x, num_probes, refined)


# -------------------------------------------------------------- trace moments


def clipped_gaussian_mu4(c: float) -> float:
    """``E[min(|g|, c)^4]`` for standard normal ``g``."""
    phi = math.exp(-c * c / 2.0) / math.sqrt(2.0 * math.pi)
    inside = 3.0 * (2.0 * ndtr(c) - 1.0) - 2.0 * phi * (c**3 + 3.0 * c)
    return inside + c**4 * 2.0 * (1.0 - ndtr(c))


def sample_ensemble(n, d, ensemble, seed):
    """Draw an ``n × d`` matrix and return it with its fourth moment."""
    G = sample_gaussian(n, d, 1.0, seed)
    if ensemble == "gaussian":
        return G, 3.0
    if ensemble == "rademacher":
        return np.where(G < 0, -1.0, 1.0), 1.0
    if ensemble == "bounded":
        c = math.sqrt(4.0 * math.log(n))
        return np.clip(G, -c, c), clipped_gaussian_mu4(c)
    raise DomainError(f"unknown ensemble {ensemble!r}")


def trace_powers(op: MomentOperator, ells, probes: int = 8, seed=0):
    """``{ell: tr(K^ell)}`` for the compressed operator, and the method used.

    Exact from eigenvalues when the symmetric dimension fits the dense limit;
    otherwise Hutchinson estimates ``mean |K^{ell/2} z|^2`` over Gaussian
    probes ``z`` drawn in the symmetric coordinates.
    """
    ells = sorted(set(ells))
    if op.sym_dim <= DENSE_LIMIT:
        lam = np.linalg.eigvalsh(op.sym_dense())
        scale = float(np.max(np.abs(lam)))
        out = {}
        for ell in ells:
            if scale == 0.0:
                out[ell] = ScaledScalar.zero()
                continue
            s = float(np.sum((lam / scale) ** ell))
            out[ell] = ScaledScalar.from_float(s) * ScaledScalar.from_float(scale) ** ell
        return out, "exact"
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    Z = rng.standard_normal((op.sym_dim, probes))
    out, Y, power = {}, Z, 0
    for ell in ells:
        while power < ell // 2:
            Y = op.sym_apply(Y)
            power += 1
        out[ell] = ScaledScalar.from_float(float(np.mean(np.sum(Y * Y, axis=0))))
    return out, "hutchinson"


@dataclass(frozen=True)
class TraceStats:
    n: int
    d: int
    t: int
    ell: int
    replicates: int
    ensemble: str
    mu4: float
    mean_trace: ScaledScalar
    rel_stderr: float
    normalized_rate: float
    reference: float
    method: str

    @property
    def ratio(self) -> float:
        return self.normalized_rate / self.reference

    def to_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "t": self.t,
            "ell": self.ell,
            "replicates": self.replicates,
            "ensemble": self.ensemble,
            "mu4": self.mu4,
            "mean_trace": self.mean_trace.to_dict(),
            "rel_stderr": self.rel_stderr,
            "normalized_rate": self.normalized_rate,
            "reference": self.reference,
            "ratio": self.ratio,
            "method": self.method,
        }


def trace_reference(n, d, t, mu4):
    return mu4 * n + (d * d / t) * math.log(n) ** 2


def _stats(n, d, t, ell, samples, ensemble, mu4, method):
    r = len(samples)
    top = max(s.exp2 for s in samples)
    vals = np.array([math.ldexp(s.mantissa, s.exp2 - top) for s in samples])
    mean = ScaledScalar.from_float(float(vals.mean())) * ScaledScalar(0.5, top + 1)
    rel_se = float(vals.std(ddof=1) / math.sqrt(r) / vals.mean()) if r > 1 and vals.mean() > 0 else 0.0
    log2_rate = (mean.log2() - 2 * t * math.log2(d)) / (t * ell) if not mean.is_zero() else -math.inf
    return TraceStats(
        n=n,
        d=d,
        t=t,
        ell=ell,
        replicates=r,
        ensemble=ensemble,
        mu4=mu4,
        mean_trace=mean,
        rel_stderr=rel_se,
        normalized_rate=2.0**log2_rate,
        reference=trace_reference(n, d, t, mu4),
        method=method,
    )


def mc_trace_multi(n, d, t, ells, replicates, ensemble="gaussian", seed=0, probes=8):
    """:func:`mc_trace` for several ``ell`` sharing the same sampled matrices."""
    n = check_int(n, "n", minimum=1)
    d = check_int(d, "d", minimum=1)
    t = check_int(t, "t", minimum=1)
    replicates = check_int(replicates, "replicates", minimum=1)
    ells = [check_even(ell, "ell") for ell in ells]
    samples = {ell: [] for ell in ells}
    method, mu4 = "exact", 3.0
    for child in np.random.SeedSequence(int(seed)).spawn(replicates):
        m_seed, p_seed = child.spawn(2)
        A, mu4 = sample_ensemble(n, d, ensemble, m_seed)
        traces, method = trace_powers(MomentOperator(A, t), ells, probes, p_seed.generate_state(1)[0])
        for ell in ells:
            samples[ell].append(traces[ell])
    return {ell: _stats(n, d, t, ell, samples[ell], ensemble, mu4, method) for ell in ells}


def mc_trace(n, d, t, ell, replicates, ensemble="gaussian", seed=0, probes=8) -> TraceStats:
    """Average ``tr(M̃^ell)`` over random matrices, with its normalized rate
    ``(mean / d^{2t})^{1/(t ell)}`` and the reference ``mu4 n + (d²/t) ln² n``."""
    if isinstance(ell, bool) or not isinstance(ell, (int, np.integer)) or ell < 2 or ell % 2:
        raise DomainError(f"ell must be an even integer >= 2, got {ell!r}")
    return mc_trace_multi(n, d, t, [ell], replicates, ensemble, seed, probes)[ell]


SWEEP_COLUMNS = (
    "n", "d", "t", "ell", "replicates", "mean_trace_mantissa", "mean_trace_exp2",
    "normalized_rate", "reference", "ratio", "method",
)


def sweep_table(stats) -> str:
    """Tab-delimited rows, one per parameter tuple."""
    buf = io.StringIO()
    buf.write("\t".join(SWEEP_COLUMNS) + "\n")
    for s in stats:
        row = [
            s.n, s.d, s.t, s.ell, s.replicates, repr(s.mean_trace.mantissa), s.mean_trace.exp2,
            repr(s.normalized_rate), repr(s.reference), repr(s.ratio), s.method,
        ]
        buf.write("\t".join(str(v) for v in row) + "\n")
    return buf.getvalue()


# -------------------------------------------------------------- ablation


@dataclass(frozen=True)
class AblationStats:
    n: int
    d: int
    t: int
    shifted_norms: np.ndarray
    raw_norms: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def ratios(self) -> np.ndarray:
        return self.raw_norms / self.shifted_norms

    @property
    def median_ratio(self) -> float:
        return float(np.median(self.ratios))

    def to_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "t": self.t,
            "shifted_norms": self.shifted_norms.tolist(),
            "raw_norms": self.raw_norms.tolist(),
            "ratios": self.ratios.tolist(),
            "median_ratio": self.median_ratio,
        }


def spectral_norm(op: MomentOperator) -> float:
    if op.sym_dim > DENSE_LIMIT:
        raise ResourceLimitError(
            f"symmetric dimension {op.sym_dim} exceeds {DENSE_LIMIT}", count=op.sym_dim, limit=DENSE_LIMIT
        )
    return float(np.max(np.abs(np.linalg.eigvalsh(op.sym_dense()))))


def shift_ablation(n, d, t, replicates, seed=0) -> AblationStats:
    """Spectral norms of ``M̃`` built with and without Shift on the same matrices."""
    n = check_int(n, "n", minimum=1)
    d = check_int(d, "d", minimum=1)
    t = check_int(t, "t", minimum=1)
    replicates = check_int(replicates, "replicates", minimum=1)
    dim = sym_dim(d, 2 * t)
    if dim > DENSE_LIMIT:
        raise ResourceLimitError(f"symmetric dimension {dim} exceeds {DENSE_LIMIT}", count=dim, limit=DENSE_LIMIT)
    shifted, raw = [], []
    for child in np.random.SeedSequence(int(seed)).spawn(replicates):
        A = sample_gaussian(n, d, 1.0, child)
        shifted.append(spectral_norm(MomentOperator(A, t, include_shift=True)))
        raw.append(spectral_norm(MomentOperator(A, t, include_shift=False)))
    return AblationStats(n, d, t, np.array(shifted), np.array(raw))

