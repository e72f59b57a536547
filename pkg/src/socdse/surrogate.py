"""Independent Gaussian-process regression per objective.

Each objective gets its own GP with an ARD squared-exponential kernel over
the importance-weighted coordinates, a Gaussian noise term, and a zero prior
mean in standardized target units.  Hyperparameters maximize the log
marginal likelihood by gradient ascent in log-parameter space with
backtracking and multi-start.

Conventions:
  * targets are standardized per objective before fitting and
    de-standardized on output;
  * ``posterior`` returns the predictive distribution of an observation
    (latent variance plus the fitted noise variance);
  * ``sample_posterior`` draws joint latent functions (no noise), so a
    draw at a training input under near-zero noise reproduces the
    observation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.spatial.distance import cdist

NOISE_FLOOR = 1e-6
JOINT_POOL_CAP = 512
_JITTER_LADDER = (0.0, 1e-10, 1e-8, 1e-6, 1e-4)
_LOG_BOUNDS = {
    "signal": (np.log(1e-8), np.log(1e4)),
    "length": (np.log(1e-3), np.log(1e3)),
}


class SurrogateError(RuntimeError):
    pass


@dataclass(frozen=True)
class KernelParams:
    """ARD squared-exponential hyperparameters for one objective.

    The optimizer clamps the fitted noise at ``NOISE_FLOOR``; explicitly
    constructed parameters only need strictly positive entries.
    """

    signal_variance: float
    length_scales: np.ndarray        # shape (d_x,), strictly positive
    noise_variance: float

    def __post_init__(self) -> None:
        ls = np.asarray(self.length_scales, dtype=float)
        object.__setattr__(self, "length_scales", ls)
        if (self.signal_variance <= 0.0 or np.any(ls <= 0.0)
                or self.noise_variance <= 0.0):
            raise ValueError("kernel parameters must be strictly positive")

    def to_log(self) -> np.ndarray:
        return np.concatenate([[np.log(self.signal_variance)],
                               np.log(self.length_scales),
                               [np.log(self.noise_variance)]])

    @staticmethod
    def from_log(u: np.ndarray) -> "KernelParams":
        u = np.asarray(u, dtype=float)
        return KernelParams(signal_variance=float(np.exp(u[0])),
                            length_scales=np.exp(u[1:-1]),
                            noise_variance=float(np.exp(u[-1])))

    def as_dict(self) -> dict:
        return {"signal_variance": float(self.signal_variance),
                "length_scales": [float(x) for x in self.length_scales],
                "noise_variance": float(self.noise_variance)}


def kernel_matrix(a: np.ndarray, b: np.ndarray,
                  params: KernelParams) -> np.ndarray:
    sa = a / params.length_scales
    sb = b / params.length_scales
    r2 = np.maximum(cdist(sa, sb, "sqeuclidean"), 0.0)
    return params.signal_variance * np.exp(-0.5 * r2)


def _chol_with_jitter(a: np.ndarray, *,
                      try_exact: bool = True) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor, escalating diagonal jitter on failure.

    Jitter is scaled to the matrix diagonal first so that near-degenerate
    but tiny covariances stay tiny; an absolute pass covers matrices whose
    diagonal itself is corrupted by roundoff.  ``try_exact=False`` skips
    the jitter-free attempt for matrices known to be numerically singular.
    """
    diag_scale = float(np.mean(np.diag(a)))
    scales = [diag_scale, 1.0] if diag_scale > 0.0 else [1.0]
    jitters = sorted({j * s for j in _JITTER_LADDER[1:] for s in scales})
    if try_exact:
        jitters = [0.0] + jitters
    for jitter in jitters:
        try:
            aj = a if jitter == 0.0 else a + jitter * np.eye(len(a))
            return cholesky(aj, lower=True), jitter
        except np.linalg.LinAlgError:
            continue
    raise SurrogateError(
        f"covariance not positive definite at max jitter {jitters[-1]:g}")


def log_marginal_likelihood(x: np.ndarray, y: np.ndarray,
                            params: KernelParams, *, with_grad: bool = False
                            ) -> float | tuple[float, np.ndarray]:
    """Gaussian-process log marginal likelihood, optionally with its
    gradient w.r.t. the log-hyperparameters (log signal variance, log
    length scales, log noise variance)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n = len(y)
    k_se = kernel_matrix(x, x, params)
    a = k_se + params.noise_variance * np.eye(n)
    low, _ = _chol_with_jitter(a)
    alpha = cho_solve((low, True), y)
    lml = (-0.5 * float(y @ alpha)
           - float(np.sum(np.log(np.diag(low))))
           - 0.5 * n * np.log(2.0 * np.pi))
    if not with_grad:
        return lml

    a_inv = cho_solve((low, True), np.eye(n))
    w = np.outer(alpha, alpha) - a_inv
    grad = np.empty(len(params.length_scales) + 2)
    grad[0] = 0.5 * float(np.sum(w * k_se))
    ls2 = params.length_scales ** 2
    for d in range(x.shape[1]):
        diff2 = (x[:, d][:, None] - x[:, d][None, :]) ** 2
        grad[1 + d] = 0.5 * float(np.sum(w * k_se * diff2)) / ls2[d]
    grad[-1] = 0.5 * params.noise_variance * float(np.trace(w))
    return lml, grad


def _clip_log_params(u: np.ndarray, log_noise_floor: float) -> np.ndarray:
    u = u.copy()
    u[0] = np.clip(u[0], *_LOG_BOUNDS["signal"])
    u[1:-1] = np.clip(u[1:-1], *_LOG_BOUNDS["length"])
    u[-1] = np.clip(u[-1], log_noise_floor, _LOG_BOUNDS["signal"][1])
    return u


def _ascend(x: np.ndarray, y: np.ndarray, u0: np.ndarray,
            log_noise_floor: float, max_iter: int) -> tuple[np.ndarray, float]:
    """Backtracking gradient ascent on the log marginal likelihood in
    log-parameter space."""
    u = _clip_log_params(u0, log_noise_floor)
    try:
        lml, grad = log_marginal_likelihood(
            x, y, KernelParams.from_log(u), with_grad=True)
    except SurrogateError:
        return u, -np.inf
    step = 0.1
    for _ in range(max_iter):
        if np.max(np.abs(grad)) < 1e-3:
            break
        improved = False
        for _ in range(20):
            u_try = _clip_log_params(u + step * grad, log_noise_floor)
            try:
                lml_try, grad_try = log_marginal_likelihood(
                    x, y, KernelParams.from_log(u_try), with_grad=True)
            except SurrogateError:
                lml_try = -np.inf
            if lml_try > lml:
                improvement = lml_try - lml
                u, lml, grad = u_try, lml_try, grad_try
                step = min(step * 1.5, 1.0)
                improved = True
                break
            step *= 0.5
        if not improved or improvement < 1e-7 * max(1.0, abs(lml)):
            break
    return u, lml


@dataclass
class SurrogateState:
    """Fitted per-objective GPs over a shared training set.

    Immutable once built; safe to share across concurrent posterior
    queries.
    """

    inputs: np.ndarray               # (n, d_x) transformed coordinates
    targets: np.ndarray              # (n, d_y) raw objective values
    target_mean: np.ndarray          # (d_y,)
    target_scale: np.ndarray         # (d_y,), strictly positive
    params: list[KernelParams]
    _chols: list[np.ndarray]
    _alphas: list[np.ndarray]

    @property
    def n_objectives(self) -> int:
        return self.targets.shape[1]

    def standardized_targets(self) -> np.ndarray:
        return (self.targets - self.target_mean) / self.target_scale


def _default_start(d: int) -> np.ndarray:
    return KernelParams(signal_variance=1.0,
                        length_scales=np.full(d, 0.5),
                        noise_variance=1e-2).to_log()


def fit(inputs: np.ndarray, targets: np.ndarray, *,
        restarts: int = 3, max_iter: int = 200, seed: int = 0,
        noise_floor: float = NOISE_FLOOR, optimize: bool = True,
        init: Sequence[KernelParams] | None = None) -> SurrogateState:
    """Fit one GP per objective column of ``targets``.

    ``restarts`` counts the optimization starts: the warm start in
    ``init`` when given, then the defaults, then seeded perturbations of
    the defaults.  With ``optimize=False`` the ``init`` parameters are
    taken as-is.
    """
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(targets, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] != y.shape[0]:
        raise ValueError("inputs and targets disagree in length")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 training points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite training data")

    mean = y.mean(axis=0)
    scale = y.std(axis=0)
    flat = scale == 0.0
    if np.any(flat):
        warnings.warn(
            "all-identical targets on objective(s) "
            f"{list(np.flatnonzero(flat))}; fitting near-zero signal",
            stacklevel=2)
        scale = np.where(flat, 1.0, scale)
    y_std = (y - mean) / scale

    d = x.shape[1]
    log_floor = np.log(noise_floor)
    params: list[KernelParams] = []
    chols: list[np.ndarray] = []
    alphas: list[np.ndarray] = []
    for j in range(y.shape[1]):
        if optimize:
            rng = np.random.default_rng([seed, j])
            starts = []
            if init is not None:
                starts.append(init[j].to_log())
            if len(starts) < restarts:
                starts.append(_default_start(d))
            while len(starts) < restarts:
                starts.append(_default_start(d)
                              + 0.8 * rng.standard_normal(d + 2))
            best_u, best_lml = None, -np.inf
            for u0 in starts:
                u, lml = _ascend(x, y_std[:, j], u0, log_floor, max_iter)
                if lml > best_lml:
                    best_u, best_lml = u, lml
            if best_u is None:
                raise SurrogateError(
                    f"objective {j}: every optimization start failed")
            pj = KernelParams.from_log(best_u)
        else:
            if init is None:
                raise ValueError("optimize=False requires init parameters")
            pj = init[j]
        k = kernel_matrix(x, x, pj) + pj.noise_variance * np.eye(len(x))
        low, _ = _chol_with_jitter(k)
        params.append(pj)
        chols.append(low)
        alphas.append(cho_solve((low, True), y_std[:, j]))

    return SurrogateState(inputs=x, targets=y, target_mean=mean,
                          target_scale=scale, params=params,
                          _chols=chols, _alphas=alphas)


def posterior(state: SurrogateState, queries: np.ndarray
              ) -> tuple[np.ndarray, np.ndarray]:
    """Predictive mean and standard deviation per objective, in objective
    units.  Variance includes the fitted noise term, so far from the data
    it recovers signal-plus-noise variance around the training mean."""
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    m = q.shape[0]
    means = np.empty((m, state.n_objectives))
    stds = np.empty((m, state.n_objectives))
    for j, pj in enumerate(state.params):
        ks = kernel_matrix(q, state.inputs, pj)
        mu = ks @ state._alphas[j]
        v = solve_triangular(state._chols[j], ks.T, lower=True)
        var = pj.signal_variance - np.sum(v * v, axis=0)
        var = np.maximum(var, 0.0) + pj.noise_variance
        means[:, j] = mu * state.target_scale[j] + state.target_mean[j]
        stds[:, j] = np.sqrt(var) * state.target_scale[j]
    return means, stds


def sample_posterior(state: SurrogateState, pool: np.ndarray, s: int,
                     seed: int | Sequence[int]) -> np.ndarray:
    """``s`` joint latent draws over the pool per objective.

    Returns shape (s, len(pool), d_y) in objective units; deterministic
    under a fixed seed with one independent stream per objective slot.
    Pools beyond ``JOINT_POOL_CAP`` are refused (the dense joint
    covariance is quadratic); callers subsample first.
    """
    if s < 1:
        raise ValueError(f"sample count must be >= 1, got {s}")
    q = np.atleast_2d(np.asarray(pool, dtype=float))
    if q.shape[0] == 0:
        raise ValueError("empty query pool")
    if q.shape[0] > JOINT_POOL_CAP:
        raise ValueError(
            f"pool of {q.shape[0]} exceeds the dense joint-sampling cap "
            f"of {JOINT_POOL_CAP}; subsample first")
    m = q.shape[0]
    base = [seed] if isinstance(seed, (int, np.integer)) else list(seed)
    out = np.empty((s, m, state.n_objectives))
    for j, pj in enumerate(state.params):
        ks = kernel_matrix(q, state.inputs, pj)
        mu = ks @ state._alphas[j]
        v = solve_triangular(state._chols[j], ks.T, lower=True)
        cov = kernel_matrix(q, q, pj) - v.T @ v
        cov = 0.5 * (cov + cov.T)
        low, _ = _chol_with_jitter(cov, try_exact=m <= 64)
        rng = np.random.default_rng(base + [j])
        z = rng.standard_normal((m, s))
        draws = mu[:, None] + low @ z               # (m, s) standardized
        out[:, :, j] = (draws * state.target_scale[j]
                        + state.target_mean[j]).T
    return out
