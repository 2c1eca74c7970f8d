"""Seeded random ensembles and the planted sparse vector model.

Every sampler derives independent child streams from one master seed through
``numpy.random.SeedSequence.spawn``: one stream per matrix column and one per
fixed-size chunk of vector coordinates.  Output therefore does not depend on
how the work is scheduled.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, InvalidDimensionError
from .validation import check_fraction, check_int, check_matrix, check_vector

COORD_CHUNK = 4096
FORMAT_TAG = "wellspread-instance-v1"


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if seed is None:
        raise DomainError("a seed is required for reproducible sampling")
    return np.random.SeedSequence(int(seed))


def sample_gaussian(n: int, d: int, variance: float = 1.0, seed=0) -> np.ndarray:
    """``n × d`` matrix of i.i.d. ``N(0, variance)`` entries."""
    n = check_int(n, "n", minimum=1)
    d = check_int(d, "d", minimum=1)
    if not variance > 0:
        raise DomainError(f"variance must be positive, got {variance}")
    scale = math.sqrt(variance)
    A = np.empty((n, d))
    for j, child in enumerate(_seed_sequence(seed).spawn(d)):
        A[:, j] = np.random.default_rng(child).standard_normal(n)
    return scale * A


@dataclass(frozen=True)
class NBRParams:
    """Noisy Bernoulli-Rademacher parameters; ``E[x²] = 1/n`` per coordinate."""

    rho: float
    sigma: float
    n: int

    def __post_init__(self):
        check_fraction(self.rho, "rho")
        check_int(self.n, "n", minimum=1)
        if not 0.0 <= self.sigma < 1.0 / math.sqrt(1.0 - self.rho):
            raise DomainError(f"sigma must lie in [0, 1/sqrt(1-rho)), got {self.sigma}")

    @property
    def rho_prime(self) -> float:
        return self.rho / (1.0 - (1.0 - self.rho) * self.sigma**2)

    @property
    def spike(self) -> float:
        return 1.0 / math.sqrt(self.rho_prime * self.n)

    def second_moment(self) -> float:
        return (1.0 - self.rho) * self.sigma**2 / self.n + self.rho * self.spike**2


def sample_nbr(n: int, params: NBRParams, seed=0) -> np.ndarray:
    """Draw ``n`` i.i.d. nBR coordinates."""
    n = check_int(n, "n", minimum=1)
    if params.n != n:
        params = NBRParams(params.rho, params.sigma, n)
    chunks = max(1, -(-n // COORD_CHUNK))
    out = np.empty(n)
    for c, child in enumerate(_seed_sequence(seed).spawn(chunks)):
        lo, hi = c * COORD_CHUNK, min(n, (c + 1) * COORD_CHUNK)
        rng = np.random.default_rng(child)
        u = rng.random(hi - lo)
        noise = rng.standard_normal(hi - lo) * (params.sigma / math.sqrt(n))
        spike = np.where(u < params.rho / 2, params.spike, -params.spike)
        out[lo:hi] = np.where(u < params.rho, spike, noise)
    return out


def haar_rotation(d: int, seed=0) -> np.ndarray:
    """Orthogonal ``d × d`` matrix from QR of a Gaussian matrix, diag(R) > 0."""
    G = sample_gaussian(d, d, 1.0, seed)
    Q, R = np.linalg.qr(G)
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    return Q * signs


@dataclass(frozen=True)
class PlantedInstance:
    """``A_tilde = A R``; ``hidden_v`` and ``hidden_r1`` are for evaluation only."""

    n: int
    d: int
    A_tilde: np.ndarray
    seed: int | None = None
    hidden_v: np.ndarray | None = None
    hidden_r1: np.ndarray | None = None

    @property
    def has_evaluation(self) -> bool:
        return self.hidden_v is not None

    def blind(self) -> "PlantedInstance":
        """Copy with the evaluation block stripped."""
        return PlantedInstance(self.n, self.d, self.A_tilde, self.seed)


def sample_planted(n: int, d: int, v, seed=0) -> PlantedInstance:
    """Plant unit ``v`` as the first column, append ``N(0, 1/n)`` columns, rotate."""
    n = check_int(n, "n", minimum=1)
    d = check_int(d, "d", minimum=1)
    if d > n:
        raise InvalidDimensionError(f"d = {d} exceeds n = {n}")
    v = check_vector(v, "v", length=n, nonzero=True)
    v = v / np.linalg.norm(v)
    g_seed, r_seed = _seed_sequence(seed).spawn(2)
    A = np.empty((n, d))
    A[:, 0] = v
    if d > 1:
        A[:, 1:] = sample_gaussian(n, d - 1, 1.0 / n, g_seed)
    R = haar_rotation(d, r_seed)
    return PlantedInstance(
        n=n,
        d=d,
        A_tilde=A @ R,
        seed=None if isinstance(seed, np.random.SeedSequence) else int(seed),
        hidden_v=v,
        hidden_r1=R[0].copy(),
    )


def sample_planted_nbr(n: int, d: int, rho: float, sigma: float, seed=0) -> PlantedInstance:
    """Planted instance whose hidden vector is an nBR draw."""
    v_seed, p_seed = _seed_sequence(seed).spawn(2)
    v = sample_nbr(n, NBRParams(rho, sigma, n), v_seed)
    inst = sample_planted(n, d, v, p_seed)
    return PlantedInstance(inst.n, inst.d, inst.A_tilde, int(seed), inst.hidden_v, inst.hidden_r1)


def top_count(rho: float, n: int) -> int:
    """``floor(rho n)``, robust to representation error in ``rho``."""
    return int(math.floor(rho * n + 1e-9))


def compressibility_profile(v, rho: float):
    """Largest ℓ2 mass fraction over ``floor(rho n)`` coordinates, and those coordinates."""
    v = check_vector(v, "v", nonzero=True)
    check_fraction(rho, "rho", closed_high=True)
    k = top_count(rho, v.shape[0])
    if k == 0:
        return 0.0, np.array([], dtype=np.int64)
    order = np.argsort(-np.abs(v), kind="stable")[:k]
    mass = float(np.linalg.norm(v[order]) / np.linalg.norm(v))
    return min(mass, 1.0), np.sort(order)


def top_mass_fraction(V, k: int) -> np.ndarray:
    """Row-wise top-``k`` ℓ2 mass fraction of a 2-D array."""
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    if k <= 0:
        return np.zeros(V.shape[0])
    sq = V**2
    k = min(k, V.shape[1])
    top = -np.partition(-sq, k - 1, axis=1)[:, :k]
    total = sq.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.sqrt(top.sum(axis=1) / total)
    return np.clip(np.nan_to_num(frac), 0.0, 1.0)


# ------------------------------------------------------------ serialization


def save_instance(path, instance: PlantedInstance, include_evaluation: bool = True) -> Path:
    """Write an ``.npz`` container atomically (write then rename)."""
    path = Path(path)
    payload = {
        "format": np.array(FORMAT_TAG),
        "n": np.array(instance.n, dtype=np.int64),
        "d": np.array(instance.d, dtype=np.int64),
        "seed": np.array(-1 if instance.seed is None else instance.seed, dtype=np.int64),
        "A_tilde": np.ascontiguousarray(instance.A_tilde, dtype=np.float64),
    }
    if include_evaluation and instance.has_evaluation:
        payload["eval_v"] = instance.hidden_v
        payload["eval_r1"] = instance.hidden_r1
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".npz.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, **payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def load_instance(path, blind: bool = True) -> PlantedInstance:
    """Read an instance; with ``blind=True`` the evaluation block is never touched."""
    with np.load(Path(path), allow_pickle=False) as data:
        if "format" not in data.files or str(data["format"]) != FORMAT_TAG:
            raise DomainError(f"{path} is not a wellspread instance file")
        n, d = int(data["n"]), int(data["d"])
        seed = int(data["seed"])
        A = check_matrix(data["A_tilde"], "A_tilde")
        if A.shape != (n, d):
            raise InvalidDimensionError(f"A_tilde has shape {A.shape}, header says {(n, d)}")
        v = r1 = None
        if not blind and "eval_v" in data.files:
            v, r1 = np.array(data["eval_v"]), np.array(data["eval_r1"])
    return PlantedInstance(n, d, A, None if seed < 0 else seed, v, r1)
