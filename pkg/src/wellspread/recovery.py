"""Recovery of a sparse vector planted in a random subspace.

Candidates are local maximizers of ``P_t(x) = t! e_t(<a_i, x>^4)`` over the
unit sphere, found by projected gradient ascent from random starts.  Each
candidate ``x`` is mapped to ``A x`` and the winner is the candidate whose top
``floor(rho n)`` coordinates carry the largest share of its ℓ2 mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import DomainError
from .randmodels import top_count, top_mass_fraction
from .tensorcore.elemsym import elem_sym_grad, factorial_scaled
from .tensorcore.scaled import ScaledScalar, normalize_vector
from .validation import check_fraction, check_int, check_matrix, check_vector, unit


@dataclass(frozen=True)
class AscentParams:
    max_steps: int = 200
    initial_step: float = 1.0
    backtrack: float = 0.5
    gradient_tolerance: float = 1e-6
    restarts: int = 30
    seed: int = 0
    max_backtracks: int = 40

    def __post_init__(self):
        check_int(self.max_steps, "max_steps", minimum=0)
        check_int(self.restarts, "restarts", minimum=0)
        check_int(self.max_backtracks, "max_backtracks", minimum=1)
        if not self.initial_step > 0:
            raise DomainError("initial_step must be positive")
        check_fraction(self.backtrack, "backtrack")
        if not self.gradient_tolerance > 0:
            raise DomainError("gradient_tolerance must be positive")


@dataclass(frozen=True)
class ObjectiveGrad:
    """``value`` and gradient ``grad * 2**exp2``."""

    value: ScaledScalar
    grad: np.ndarray
    exp2: int

    def grad_float(self) -> np.ndarray:
        return np.ldexp(self.grad, self.exp2)


@dataclass
class RecoveryResult:
    v_hat: np.ndarray
    x_hat: np.ndarray
    score: float
    objective: ScaledScalar
    restarts_used: int
    winner: int
    candidates: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "objective": self.objective.to_dict(),
            "restarts_used": self.restarts_used,
            "winner": self.winner,
            "x_hat": self.x_hat.tolist(),
            "candidates": [
                {"score": s, "objective": o.to_dict(), "steps": k} for s, o, k in self.candidates
            ],
        }


def objective_and_grad(A_tilde, t: int, x) -> ObjectiveGrad:
    """``P_t(x)`` and its gradient ``t! sum_i de_t/dz_i 4 <a_i,x>^3 a_i``."""
    A = check_matrix(A_tilde, "A_tilde")
    t = check_int(t, "t", minimum=1)
    x = check_vector(x, "x", length=A.shape[1], nonzero=True)
    return _objective_and_grad(A, t, x)


def _objective_and_grad(A, t, x):
    y = A @ x
    eg = elem_sym_grad(y**4, t)
    fact = factorial_scaled(t)
    grad, exp2 = normalize_vector(A.T @ (eg.partials * 4.0 * y**3), eg.exp2)
    grad, exp2 = normalize_vector(grad * fact.mantissa, exp2 + fact.exp2)
    return ObjectiveGrad(fact * eg.value, grad, exp2)


def ascend(A_tilde, t: int, x0, params: AscentParams | None = None):
    """Projected gradient ascent on the sphere with backtracking.

    The search direction is the gradient rescaled by ``1 / (4 t P_t(x))``, so
    a unit step is the higher-order power iteration ``x <- grad / |grad|``.
    Only strict increases are accepted.  Returns ``(x_hat, value, steps)``.
    """
    A = check_matrix(A_tilde, "A_tilde")
    t = check_int(t, "t", minimum=1)
    params = params or AscentParams()
    x = unit(check_vector(x0, "x0", length=A.shape[1], nonzero=True))
    cur = _objective_and_grad(A, t, x)
    steps = 0
    for steps in range(1, params.max_steps + 1):
        if cur.value.is_zero():
            break
        # gradient over 4 t f, so that <g, x> = 1 on the sphere
        g = cur.grad / (4.0 * t * cur.value.mantissa)
        g = np.ldexp(g, cur.exp2 - cur.value.exp2)
        tangential = g - (g @ x) * x
        if np.linalg.norm(tangential) < params.gradient_tolerance:
            break
        eta = params.initial_step
        accepted = False
        for _ in range(params.max_backtracks):
            x_try = x + eta * tangential
            x_try /= np.linalg.norm(x_try)
            trial = _objective_and_grad(A, t, x_try)
            if trial.value > cur.value:
                x, cur, accepted = x_try, trial, True
                break
            eta *= params.backtrack
        if not accepted:
            break
    return x, cur.value, steps


def _sphere_starts(d, restarts, seed):
    children = np.random.SeedSequence(int(seed)).spawn(restarts)
    starts = []
    for child in children:
        z = np.random.default_rng(child).standard_normal(d)
        starts.append(z / np.linalg.norm(z))
    return starts


def recover(A_tilde, t: int, rho: float, params: AscentParams | None = None) -> RecoveryResult:
    """Best candidate by top-``floor(rho n)`` mass over ``params.restarts`` ascents."""
    A = check_matrix(A_tilde, "A_tilde")
    t = check_int(t, "t", minimum=1)
    rho = check_fraction(rho, "rho")
    params = params or AscentParams()
    if params.restarts < 1:
        raise DomainError("restarts must be at least 1")
    k = top_count(rho, A.shape[0])
    best = None
    candidates = []
    for idx, x0 in enumerate(_sphere_starts(A.shape[1], params.restarts, params.seed)):
        x, value, steps = ascend(A, t, x0, params)
        v = A @ x
        score = float(top_mass_fraction(v, k)[0])
        candidates.append((score, value, steps))
        if best is None or score > best[0]:
            best = (score, idx, x, v, value)
    score, idx, x, v, value = best
    return RecoveryResult(
        v_hat=v / np.linalg.norm(v),
        x_hat=x,
        score=score,
        objective=value,
        restarts_used=params.restarts,
        winner=idx,
        candidates=candidates,
    )


def evaluate_overlap(v_hat, v) -> float:
    """``<v_hat, v>^2`` for the unit-normalized inputs."""
    a = unit(check_vector(v_hat, "v_hat", nonzero=True))
    b = unit(check_vector(v, "v", length=a.shape[0], nonzero=True))
    return float(min((a @ b) ** 2, 1.0))


def scalar_jensen_holds(x, y, delta) -> bool:
    """``(x + y)^4 <= (1 + delta)^3 (x^4 + y^4 / delta^3)`` for ``delta in (0, 1)``."""
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    return (x + y) ** 4 <= (1.0 + delta) ** 3 * (x**4 + y**4 / delta**3)


class SparseVectorRecovery(BaseEstimator, TransformerMixin):
    """Estimator interface to :func:`recover`.

    ``fit(A_tilde)`` stores ``x_hat_``, ``v_hat_``, ``score_``, ``objective_``
    and ``components_`` (the recovered coefficient direction as a 1 × d
    array).  ``transform(X)`` projects rows of ``X`` onto ``x_hat_``.
    """

    def __init__(
        self,
        t=1,
        rho=0.01,
        restarts=30,
        max_steps=200,
        initial_step=1.0,
        backtrack=0.5,
        gradient_tolerance=1e-6,
        random_state=0,
    ):
        self.t = t
        self.rho = rho
        self.restarts = restarts
        self.max_steps = max_steps
        self.initial_step = initial_step
        self.backtrack = backtrack
        self.gradient_tolerance = gradient_tolerance
        self.random_state = random_state

    def _params(self):
        return AscentParams(
            max_steps=self.max_steps,
            initial_step=self.initial_step,
            backtrack=self.backtrack,
            gradient_tolerance=self.gradient_tolerance,
            restarts=self.restarts,
            seed=0 if self.random_state is None else int(self.random_state),
        )

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        self.result_ = recover(X, self.t, self.rho, self._params())
        self.n_features_in_ = X.shape[1]
        self.x_hat_ = self.result_.x_hat
        self.v_hat_ = self.result_.v_hat
        self.score_ = self.result_.score
        self.objective_ = self.result_.objective
        self.components_ = self.x_hat_[None, :]
        return self

    def transform(self, X):
        check_is_fitted(self, "x_hat_")
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise DomainError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        return X @ self.components_.T

    def score(self, X=None, y=None):
        check_is_fitted(self, "score_")
        return self.score_
