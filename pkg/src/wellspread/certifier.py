"""Certificates of spreadness for the column span of a matrix.

The pipeline replaces every asymptotic constant with a computed quantity:

1. ``scan_subsets`` bounds the energy of any ``t`` rows in any direction, which
   gives ``tau`` with ``<a_i, x>^2 <= tau`` outside the top ``t`` rows;
2. ``certify_moment_norm`` bounds ``max P_s`` on the sphere by the top
   eigenvalue of the compressed moment operator plus a backward-error term;
3. ``combine_quartic_bound`` turns those into ``B`` with
   ``sum_{i in T_x} <a_i, x>^4 <= B n``;
4. ``certify_spread`` picks the largest ``alpha`` for which
   ``3/4 sigma_min^2 - s_star^2 - sqrt(alpha B) n >= 0``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .errors import DomainError, ResourceLimitError
from .tensorcore.moment import DENSE_LIMIT, SUBSET_LIMIT, MomentOperator, sym_dim
from .tensorcore.scaled import ScaledScalar
from .validation import check_even, check_int, check_matrix

UNIT_ROUNDOFF = 2.0**-53
SPREAD_EPSILON = 0.5


# ------------------------------------------------------------- subset scan


@dataclass(frozen=True)
class SubsetScanReport:
    t: int
    s_star: float
    tau: float
    subsets_checked: int
    argmax_subset: tuple

    def to_dict(self):
        return {
            "t": self.t,
            "s_star": self.s_star,
            "tau": self.tau,
            "subsets_checked": self.subsets_checked,
            "argmax_subset": list(self.argmax_subset),
        }


def _chunked_combinations(n, t, size):
    it = itertools.combinations(range(n), t)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield np.array(block, dtype=np.int64)


def scan_subsets(A, t: int) -> SubsetScanReport:
    """Largest ``sigma_max(A_S)`` over all row subsets of size ``t``."""
    A = check_matrix(A)
    n, d = A.shape
    t = check_int(t, "t", minimum=1, maximum=n)
    if t > d:
        raise DomainError(f"subset size t = {t} exceeds d = {d}")
    count = math.comb(n, t)
    if count > SUBSET_LIMIT:
        raise ResourceLimitError(
            f"C({n},{t}) = {count} subsets exceeds {SUBSET_LIMIT}", count=count, limit=SUBSET_LIMIT
        )
    G = A @ A.T
    if t == 1:
        vals = np.diag(G)
        k = int(np.argmax(vals))
        best, arg = float(vals[k]), (k,)
    elif t == 2:
        i, j = np.triu_indices(n, 1)
        gi, gj, gij = G[i, i], G[j, j], G[i, j]
        vals = 0.5 * (gi + gj) + np.hypot(0.5 * (gi - gj), gij)
        k = int(np.argmax(vals))
        best, arg = float(vals[k]), (int(i[k]), int(j[k]))
    else:
        best, arg = -np.inf, None
        for idx in _chunked_combinations(n, t, max(1, 200_000 // (t * t))):
            sub = G[idx[:, :, None], idx[:, None, :]]
            vals = np.linalg.eigvalsh(sub)[:, -1]
            k = int(np.argmax(vals))
            if vals[k] > best:
                best, arg = float(vals[k]), tuple(int(v) for v in idx[k])
    best = max(best, 0.0)
    return SubsetScanReport(t, math.sqrt(best), best / t, count, arg)


# --------------------------------------------------------- spectral bounds


@dataclass(frozen=True)
class MomentNormBound:
    """Certified ``max_{|x|=1} P_s(x) <= bound``."""

    s: int
    bound: ScaledScalar
    lambda_max: float
    eig_residual: float
    backward_error: float
    trace_root: float
    ell: int
    sym_dim: int

    def to_dict(self):
        out = asdict(self)
        out["bound"] = self.bound.to_dict()
        return out


def symmetric_eig_bounds(K):
    """Eigen-decomposition of symmetric ``K`` with rigorous eigenvalue slack.

    Returns ``(eigenvalues, vectors, top residual, slack)`` where every exact
    eigenvalue of ``K`` lies within ``slack`` of a computed one.  The slack is
    ``|K U - U L|_F + |U^T U - I|_F * max|L|`` inflated for the rounding of
    the residual computation itself.
    """
    lam, U = np.linalg.eigh(K)
    R = K @ U - U * lam
    top = float(np.linalg.norm(R[:, -1]))
    orth = float(np.linalg.norm(U.T @ U - np.eye(U.shape[1])))
    scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    dim = K.shape[0]
    rounding = 2.0 * dim * UNIT_ROUNDOFF * (float(np.linalg.norm(K)) + scale)
    slack = float(np.linalg.norm(R)) + orth * scale + rounding
    return lam, U, top, slack


def certify_moment_norm(A, s: int, ell: int = 4, include_shift: bool = True) -> MomentNormBound:
    """Upper bound on ``max_{|x|=1} P_s(x)`` from the compressed ``M̃_s``."""
    A = check_matrix(A)
    s = check_int(s, "s", minimum=1)
    ell = check_even(ell, "ell")
    d = A.shape[1]
    dim = sym_dim(d, 2 * s)
    if dim > DENSE_LIMIT:
        raise ResourceLimitError(
            f"symmetric dimension {dim} exceeds {DENSE_LIMIT}", count=dim, limit=DENSE_LIMIT
        )
    K = MomentOperator(A, s, include_shift).sym_dense()
    lam, _, top, slack = symmetric_eig_bounds(K)
    lam_max = float(lam[-1])
    # cross-check by explicit matrix powers: tr(K^ell) >= lambda_max^ell
    P = np.linalg.matrix_power(K, ell // 2)
    trace_root = float(np.sum(P * P)) ** (1.0 / ell)
    bound = max(lam_max + max(top, slack), 0.0)
    return MomentNormBound(
        s=s,
        bound=ScaledScalar.from_float(bound),
        lambda_max=lam_max,
        eig_residual=top,
        backward_error=slack,
        trace_root=trace_root,
        ell=ell,
        sym_dim=dim,
    )


def combine_coefficients(t: int):
    """``[(s, t!/s! * C(t-1, t-s))]`` for ``s = 1..t``."""
    return [(s, math.factorial(t) // math.factorial(s) * math.comb(t - 1, t - s)) for s in range(1, t + 1)]


def combine_quartic_bound(t: int, tau: float, per_s_bounds, n: int) -> float:
    """``B`` with ``sum_{i in T_x} <a_i, x>^4 <= B n`` for all unit ``x``.

    ``per_s_bounds[s-1]`` bounds ``max P_s``; the t-th power of the quartic
    sum is at most ``sum_s t!/s! C(t-1, t-s) tau^{2(t-s)} bound_s``.
    """
    t = check_int(t, "t", minimum=1)
    n = check_int(n, "n", minimum=1)
    if len(per_s_bounds) != t:
        raise DomainError(f"expected {t} per-level bounds, got {len(per_s_bounds)}")
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    tau_s = ScaledScalar.from_float(float(tau))
    total = ScaledScalar.zero()
    for (s, coef), b in zip(combine_coefficients(t), per_s_bounds):
        b = b if isinstance(b, ScaledScalar) else ScaledScalar.from_float(float(b))
        total = total + ScaledScalar.from_int(coef) * tau_s ** (2 * (t - s)) * b
    return float(total.root(t) / ScaledScalar.from_int(n))


# -------------------------------------------------------- spread certificate


def certified_sigma_min(A) -> float:
    """Lower bound on ``sigma_min(A)`` from ``A^T A`` with rounding slack."""
    A = check_matrix(A)
    n = A.shape[0]
    G = A.T @ A
    gamma = n * UNIT_ROUNDOFF / (1.0 - n * UNIT_ROUNDOFF)
    gram_err = gamma * float(np.linalg.norm(np.abs(A).T @ np.abs(A)))
    lam, _, _, slack = symmetric_eig_bounds(G)
    return math.sqrt(max(float(lam[0]) - slack - gram_err, 0.0))


def spread_alpha(sigma_min: float, s_star: float, B: float, n: int) -> float:
    """Largest ``alpha`` with ``3/4 sigma_min^2 - s_star^2 - sqrt(alpha B) n >= 0``."""
    margin = 0.75 * sigma_min**2 - s_star**2
    if margin <= 0.0 or not B > 0.0:
        return 0.0
    return (margin / n) ** 2 / B


@dataclass(frozen=True)
class SpreadCertificate:
    n: int
    d: int
    t: int
    scan: SubsetScanReport
    per_s: tuple
    B: float
    sigma_min_A: float
    alpha: float
    verdict: str
    trace_exponent_ell: int
    epsilon_spread: float = SPREAD_EPSILON
    notes: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"

    @property
    def per_s_bounds(self):
        return [p.bound for p in self.per_s]

    @property
    def spread_size(self) -> float:
        return self.alpha * self.n

    def distortion_bound(self) -> float | None:
        if not self.certified:
            return None
        return convert_spread_distortion("forward", self.n, (self.spread_size, self.epsilon_spread))

    def to_dict(self) -> dict:
        margin = 0.75 * self.sigma_min_A**2 - self.scan.s_star**2
        return {
            "n": self.n,
            "d": self.d,
            "t": self.t,
            "verdict": self.verdict,
            "alpha": self.alpha,
            "spread_size": self.spread_size,
            "epsilon_spread": self.epsilon_spread,
            "B": self.B,
            "sigma_min_A": self.sigma_min_A,
            "scan": self.scan.to_dict(),
            "per_s": [p.to_dict() for p in self.per_s],
            "trace_exponent_ell": self.trace_exponent_ell,
            "distortion_bound": self.distortion_bound(),
            "derivation": {
                "coefficients": [[s, c] for s, c in combine_coefficients(self.t)],
                "B": "(sum_s coef_s * tau^(2(t-s)) * bound_s)^(1/t) / n",
                "margin": margin,
                "alpha": "(margin / n)^2 / B, margin = 3/4 sigma_min^2 - s_star^2",
                "distortion": "sqrt(n / (alpha n)) / epsilon^2",
            },
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def certify_spread(A, t: int, ell: int = 4) -> SpreadCertificate:
    """Run the full pipeline; weak instances return a not-certified value."""
    A = check_matrix(A)
    n, d = A.shape
    t = check_int(t, "t", minimum=1)
    scan = scan_subsets(A, t)
    per_s = tuple(certify_moment_norm(A, s, ell) for s in range(1, t + 1))
    notes = []
    if scan.tau > 0:
        B = combine_quartic_bound(t, scan.tau, [p.bound for p in per_s], n)
    else:
        B = 0.0
        notes.append("all rows vanish")
    sigma = certified_sigma_min(A)
    alpha = min(spread_alpha(sigma, scan.s_star, B, n), math.nextafter(1.0, 0.0))
    verdict = "certified" if alpha > 0.0 else "not-certified"
    if verdict == "certified" and alpha * n < 1.0:
        notes.append("alpha n < 1: only the empty deletion set is covered")
    return SpreadCertificate(
        n=n,
        d=d,
        t=t,
        scan=scan,
        per_s=per_s,
        B=B,
        sigma_min_A=sigma,
        alpha=alpha if verdict == "certified" else 0.0,
        verdict=verdict,
        trace_exponent_ell=ell,
        notes=notes,
    )


def verify_certificate(report: dict, rtol: float = 1e-10) -> bool:
    """Re-derive ``B`` and ``alpha`` from the stored constants alone."""
    t, n = int(report["t"]), int(report["n"])
    tau = float(report["scan"]["tau"])
    bounds = [ScaledScalar.from_dict(p["bound"]) for p in report["per_s"]]
    B = combine_quartic_bound(t, tau, bounds, n) if tau > 0 else 0.0
    alpha = spread_alpha(float(report["sigma_min_A"]), float(report["scan"]["s_star"]), B, n)
    alpha = min(alpha, math.nextafter(1.0, 0.0))
    ok_B = math.isclose(B, float(report["B"]), rel_tol=rtol, abs_tol=0.0)
    if report["verdict"] == "certified":
        return ok_B and alpha > 0 and math.isclose(alpha, float(report["alpha"]), rel_tol=rtol)
    return ok_B and alpha == 0.0


def convert_spread_distortion(direction: str, n: int, params):
    """Translate between spreadness and distortion.

    ``"forward"``: ``(t, eps) -> sqrt(n/t) / eps^2``.  ``t`` may be any real in
    ``(0, n]``; for ``t < 1`` the bound exceeds ``sqrt(n)`` and is vacuous.
    ``"backward"``: ``Delta -> (n / (2 Delta^2), 1 / (4 Delta))``.
    """
    n = check_int(n, "n", minimum=1)
    if direction == "forward":
        t, eps = (float(v) for v in params)
        if not 0.0 < t <= n:
            raise DomainError(f"t must lie in (0, n], got {t}")
        if not 0.0 < eps <= 1.0:
            raise DomainError(f"eps must lie in (0, 1], got {eps}")
        return math.sqrt(n / t) / eps**2
    if direction == "backward":
        delta = float(params[0] if np.ndim(params) else params)
        if not delta >= 1.0 or not math.isfinite(delta):
            raise DomainError(f"distortion must be >= 1, got {delta}")
        return n / (2.0 * delta**2), 1.0 / (4.0 * delta)
    raise DomainError(f"direction must be 'forward' or 'backward', got {direction!r}")


# ---------------------------------------------------------------- estimator


class SpreadCertifier(BaseEstimator):
    """Estimator wrapper around :func:`certify_spread`.

    After ``fit(A)``: ``certificate_``, ``alpha_``, ``B_``, ``verdict_``,
    ``distortion_bound_``.
    """

    def __init__(self, t=2, ell=4):
        self.t = t
        self.ell = ell

    def fit(self, X, y=None):
        X = check_matrix(X)
        self.certificate_ = certify_spread(X, self.t, self.ell)
        self.n_features_in_ = X.shape[1]
        self.alpha_ = self.certificate_.alpha
        self.B_ = self.certificate_.B
        self.verdict_ = self.certificate_.verdict
        self.distortion_bound_ = self.certificate_.distortion_bound()
        return self

    def score(self, X=None, y=None):
        """Certified spread fraction ``alpha`` (0 when not certified)."""
        return self.alpha_
