"""Exact computations over all 2^N configurations for small systems.

Partition function, Gibbs moments and entropy by direct enumeration, plus the
convex maximum-likelihood fit matching target moments and the pairwise
multi-information ratio I2/IN = (S1 - S2) / (S1 - SN) in nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, xlogy

from .errors import (
    BoundaryError,
    ConvergenceError,
    DegenerateRatioError,
    SizeLimitError,
)
from .ingest import SpinMatrix
from .model import FitReport, IsingModel
from .moments import EXACT_SAMPLE, MomentSet, empirical_moments

ENUMERATION_LIMIT = 25  # partition function / moments / entropy
FIT_LIMIT = 20  # iterative fitting and configuration histograms
_CHUNK_BITS = 16


def _check_size(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise SizeLimitError(
            f"{what} enumerates 2^N configurations; N={n} exceeds the N<={limit} guard "
            "(use the Glauber sampler for larger systems)"
        )


def _state_chunks(n: int):
    """Yield (chunk, N) ±1 float arrays covering all 2^N configurations.

    Spin j maps to bit j of the configuration index, lowest bit first.
    """
    total = 1 << n
    step = min(total, 1 << _CHUNK_BITS)
    bits = np.arange(n, dtype=np.int64)
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.int64)
        yield ((idx[:, None] >> bits) & 1).astype(np.float64) * 2.0 - 1.0


def state_index(spins: np.ndarray) -> np.ndarray:
    """Configuration index for ±1 rows, consistent with _state_chunks."""
    s = np.asarray(spins)
    weights = (1 << np.arange(s.shape[-1], dtype=np.int64))
    return ((s > 0).astype(np.int64) @ weights).astype(np.int64)


def log_partition(model: IsingModel) -> float:
    """ln Z, accumulated chunk-wise with max-shifted sums for overflow safety."""
    _check_size(model.n, ENUMERATION_LIMIT, "log_partition")
    parts = [logsumexp(model.energies(chunk)) for chunk in _state_chunks(model.n)]
    return float(logsumexp(parts))


def exact_moments(model: IsingModel) -> MomentSet:
    """<s_i> and <s_i s_j> under the Gibbs distribution (sample_size = exact)."""
    _check_size(model.n, ENUMERATION_LIMIT, "exact_moments")
    log_z = log_partition(model)
    n = model.n
    q = np.zeros(n)
    big_q = np.zeros((n, n))
    for chunk in _state_chunks(n):
        w = np.exp(model.energies(chunk) - log_z)
        q += w @ chunk
        big_q += chunk.T @ (chunk * w[:, None])
    big_q = 0.5 * (big_q + big_q.T)
    np.fill_diagonal(big_q, 1.0)
    return MomentSet(q=q, Q=big_q, C=big_q - np.outer(q, q), sample_size=EXACT_SAMPLE)


def gibbs_probabilities(model: IsingModel) -> np.ndarray:
    """All 2^N state probabilities, indexed by state_index ordering (N <= FIT_LIMIT)."""
    _check_size(model.n, FIT_LIMIT, "gibbs_probabilities")
    log_z = log_partition(model)
    return np.concatenate(
        [np.exp(model.energies(chunk) - log_z) for chunk in _state_chunks(model.n)]
    )


def entropy_exact(model: IsingModel) -> float:
    """Gibbs entropy in nats via S = ln Z - <E>."""
    _check_size(model.n, ENUMERATION_LIMIT, "entropy_exact")
    log_z = log_partition(model)
    mean_energy = 0.0
    for chunk in _state_chunks(model.n):
        energy = model.energies(chunk)
        mean_energy += np.exp(energy - log_z) @ energy
    return float(log_z - mean_energy)


def entropy_independent(q: np.ndarray) -> float:
    """Entropy of the independent-spin model with means q, in nats."""
    q = np.asarray(q, dtype=np.float64)
    if np.any(np.abs(q) > 1.0):
        raise BoundaryError("mean orientations must lie in [-1, 1]")
    p = 0.5 * (1.0 + q)
    return float(-(xlogy(p, p) + xlogy(1.0 - p, 1.0 - p)).sum())


def entropy_empirical(matrix: SpinMatrix) -> float:
    """Plug-in entropy of the observed configuration histogram, in nats."""
    _check_size(matrix.n, FIT_LIMIT, "entropy_empirical")
    counts = np.bincount(state_index(matrix.values), minlength=1 << matrix.n)
    p = counts / matrix.t
    return float(-xlogy(p, p).sum())


def _pair_stats(chunk: np.ndarray, iu) -> np.ndarray:
    """Sufficient statistics (s_i, s_i s_j for i<j) for each configuration."""
    return np.hstack([chunk, chunk[:, iu[0]] * chunk[:, iu[1]]])


def _fisher_summaries(model: IsingModel, iu) -> tuple[float, np.ndarray, np.ndarray]:
    """(log Z, mean sufficient statistics, their covariance) by enumeration."""
    log_z = log_partition(model)
    d = model.n + len(iu[0])
    mean = np.zeros(d)
    second = np.zeros((d, d))
    for chunk in _state_chunks(model.n):
        w = np.exp(model.energies(chunk) - log_z)
        phi = _pair_stats(chunk, iu)
        mean += w @ phi
        second += phi.T @ (phi * w[:, None])
    return log_z, mean, second - np.outer(mean, mean)


def fit_maxent_exact(targets: MomentSet, tol: float = 1e-8, max_iter: int = 500) -> FitReport:
    """Fit (J, h) so that exact Gibbs moments match the targets.

    Ascends the (convex) log-likelihood, whose gradient is target moments
    minus model moments: quasi-Newton from h = atanh(q), J = 0, then exact
    Newton steps until the max-abs moment residual is <= tol.
    """
    from scipy.optimize import minimize

    n = targets.n
    _check_size(n, FIT_LIMIT, "fit_maxent_exact")
    q_t = targets.q
    if np.any(np.abs(q_t) >= 1.0):
        raise BoundaryError("a target mean has |q_i| = 1; the conjugate field diverges")

    iu = np.triu_indices(n, k=1)
    target = np.concatenate([q_t, targets.Q[iu]])

    def model_of(theta: np.ndarray) -> IsingModel:
        coupling = np.zeros((n, n))
        coupling[iu] = theta[n:]
        return IsingModel(J=coupling + coupling.T, h=theta[:n])

    def objective(theta: np.ndarray):
        model = model_of(theta)
        log_z = log_partition(model)
        current = exact_moments(model)
        stats = np.concatenate([current.q, current.Q[iu]])
        return log_z - theta @ target, stats - target

    theta = np.concatenate([np.arctanh(q_t), np.zeros(len(iu[0]))])
    result = minimize(
        objective,
        theta,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": 1e-18, "gtol": 0.1 * tol},
    )
    theta = result.x
    iterations = int(result.nit)

    # Newton polish: quadratic convergence wipes out any quasi-Newton stall.
    residual = np.inf
    for _ in range(30):
        model = model_of(theta)
        log_z, mean, fisher = _fisher_summaries(model, iu)
        gradient = target - mean
        residual = float(np.abs(gradient).max())
        if residual <= tol:
            return FitReport(model=model, method="exact",
                             iterations=iterations, residual=residual)
        direction = np.linalg.solve(fisher + 1e-12 * np.eye(fisher.shape[0]), gradient)
        value = theta @ target - log_z
        step_size = 1.0
        for _ in range(40):
            candidate = theta + step_size * direction
            cand_model = model_of(candidate)
            cand_value = candidate @ target - log_partition(cand_model)
            if cand_value >= value:
                break
            step_size *= 0.5
        theta = candidate
        iterations += 1

    best = FitReport(model=model_of(theta), method="exact",
                     iterations=iterations, residual=residual)
    raise ConvergenceError(
        f"exact fit residual {residual:.3e} > tol {tol:.3e} after {iterations} iterations",
        best=best,
    )


@dataclass
class EntropyReport:
    """Entropies of the independent, pairwise and empirical descriptions (nats)."""

    S1: float
    S2: float
    SN: float
    I2: float
    IN: float
    ratio: float
    small_sample: bool
    units: str = "nats"

    def to_dict(self) -> dict:
        return {
            "S1": self.S1,
            "S2": self.S2,
            "SN": self.SN,
            "I2": self.I2,
            "IN": self.IN,
            "ratio": self.ratio,
            "small_sample": self.small_sample,
            "units": self.units,
        }


def multi_information_ratio(
    matrix: SpinMatrix,
    tol: float = 1e-6,
    fit_tol: float = 1e-8,
    max_iter: int = 500,
) -> EntropyReport:
    """Share of total correlation captured at pairwise order.

    S1 from the independent fit, S2 from the exact pairwise fit, SN from the
    plug-in configuration histogram; ratio = (S1 - S2) / (S1 - SN).  The
    report flags T < 10 * 2^N as a small-sample regime (plug-in SN is biased
    low there).
    """
    _check_size(matrix.n, FIT_LIMIT, "multi_information_ratio")
    moments = empirical_moments(matrix)
    s1 = entropy_independent(moments.q)
    sn = entropy_empirical(matrix)
    i_n = s1 - sn
    if i_n <= tol:  # checked before fitting: degenerate data may sit on the boundary
        raise DegenerateRatioError(
            f"multi-information I_N = {i_n:.3e} <= tol {tol:.3e}; "
            "data is indistinguishable from independent spins"
        )
    fit = fit_maxent_exact(moments, tol=fit_tol, max_iter=max_iter)
    s2 = entropy_exact(fit.model)
    i2 = s1 - s2
    return EntropyReport(
        S1=s1,
        S2=s2,
        SN=sn,
        I2=i2,
        IN=i_n,
        ratio=i2 / i_n,
        small_sample=matrix.t < 10 * (1 << matrix.n),
    )
