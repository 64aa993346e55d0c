"""Distributional diagnostics for inferred couplings and spectra.

Gaussianity of the coupling bulk (quantile comparison, chi-square and
Jarque-Bera after trimming the upper tail), the negative-coupling fraction,
the power-law fit of mean coupling versus system size, the field-versus-
internal-bias decomposition, and the critical-coupling eigenvalue demo.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import (
    DegenerateDataError,
    DimensionMismatchError,
    DomainError,
    InsufficientSampleError,
)
from .ingest import SpinMatrix
from .model import IsingModel
from .moments import Spectrum, covariance_spectrum
from .sampler import SamplerConfig, glauber_sample

_MIN_NORMALITY_SAMPLE = 50


@dataclass
class NormalityReport:
    n: int
    trimmed: int
    chi2_stat: float
    chi2_p: float
    jb_stat: float
    jb_p: float
    mean: float
    std: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "trimmed": self.trimmed,
            "chi2_stat": self.chi2_stat,
            "chi2_p": self.chi2_p,
            "jb_stat": self.jb_stat,
            "jb_p": self.jb_p,
            "mean": self.mean,
            "std": self.std,
        }


@dataclass
class ScalingFit:
    sizes: np.ndarray
    means: np.ndarray
    alpha_hat: float
    alpha_se: float
    a_hat: float
    r2: float

    def to_dict(self) -> dict:
        return {
            "sizes": self.sizes.tolist(),
            "means": self.means.tolist(),
            "alpha_hat": self.alpha_hat,
            "alpha_se": self.alpha_se,
            "a_hat": self.a_hat,
            "r2": self.r2,
        }


@dataclass
class BiasRow:
    ticker: str
    h: float
    h_int_mean: float
    h_int_std: float


@dataclass
class BiasTable:
    rows: list[BiasRow]

    def to_dict(self) -> dict:
        return {
            "rows": [
                {
                    "ticker": r.ticker,
                    "h": r.h,
                    "h_int_mean": r.h_int_mean,
                    "h_int_std": r.h_int_std,
                }
                for r in self.rows
            ]
        }


def qq_compare(values: np.ndarray, quantile_count: int = 1000) -> np.ndarray:
    """(empirical, theoretical-Gaussian) quantile pairs with matched mean/std.

    Returns quantile_count - 1 interior pairs; a Gaussian sample lies on the
    diagonal.  A constant input yields degenerate pairs and a warning.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size < quantile_count:
        raise InsufficientSampleError(
            f"need at least {quantile_count} values for {quantile_count}-quantiles, "
            f"got {values.size}"
        )
    probs = np.arange(1, quantile_count) / quantile_count
    empirical = np.quantile(values, probs)
    mu = values.mean()
    sd = values.std()
    if sd == 0.0:
        _warnings.warn("constant sample: theoretical quantiles degenerate to the mean",
                       stacklevel=2)
        theoretical = np.full(probs.shape, mu)
    else:
        theoretical = sps.norm.ppf(probs, loc=mu, scale=sd)
    return np.column_stack([empirical, theoretical])


def trim_upper_tail(values: np.ndarray, fraction: float = 0.04) -> np.ndarray:
    """Drop the ceil(fraction * n) largest values, preserving input order."""
    if not 0.0 <= fraction < 0.5:
        raise DomainError(f"trim fraction must be in [0, 0.5), got {fraction}")
    values = np.asarray(values, dtype=np.float64)
    target = fraction * values.size
    nearest = round(target)
    # fractions like 200/4950 carry representation dust; snap before the ceiling
    k = int(nearest) if abs(target - nearest) <= 1e-9 * values.size else int(np.ceil(target))
    if k <= 0:
        return values.copy()
    cutoff = np.sort(values)[values.size - k]
    keep = values < cutoff
    # Ties at the cutoff: drop just enough of them, later occurrences first.
    short = values.size - k - int(keep.sum())
    if short > 0:
        tied = np.flatnonzero(values == cutoff)[:short]
        keep[tied] = True
    return values[keep]


def jarque_bera(values: np.ndarray) -> tuple[float, float]:
    """JB = n/6 * (skew^2 + excess_kurtosis^2 / 4), p-value from chi2(2)."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    centered = values - values.mean()
    m2 = np.mean(centered**2)
    if m2 == 0.0:
        raise DegenerateDataError("constant sample: Jarque-Bera undefined")
    skew = np.mean(centered**3) / m2**1.5
    excess = np.mean(centered**4) / m2**2 - 3.0
    stat = n / 6.0 * (skew**2 + 0.25 * excess**2)
    return float(stat), float(sps.chi2.sf(stat, 2))


def chi2_gaussian(values: np.ndarray, bins: int = 20) -> tuple[float, float, int]:
    """Goodness-of-fit against the moment-matched Gaussian.

    Equiprobable bins under the fitted Gaussian; the bin count is lowered if
    needed so every expected count is >= 5.  Degrees of freedom bins - 3
    (two fitted parameters).  Returns (stat, p, bins_used).
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    bins_used = max(4, min(bins, n // 5))
    mu = values.mean()
    sd = values.std()
    if sd == 0.0:
        raise DegenerateDataError("constant sample: chi-square bins undefined")
    edges = sps.norm.ppf(np.arange(1, bins_used) / bins_used, loc=mu, scale=sd)
    counts = np.bincount(np.searchsorted(edges, values, side="right"),
                         minlength=bins_used)
    expected = n / bins_used
    stat = float(((counts - expected) ** 2 / expected).sum())
    return stat, float(sps.chi2.sf(stat, bins_used - 3)), bins_used


def normality_tests(values: np.ndarray, bins: int = 20,
                    trim_fraction: float = 0.0) -> NormalityReport:
    """Chi-square and Jarque-Bera tests after optional upper-tail trimming."""
    values = np.asarray(values, dtype=np.float64)
    retained = trim_upper_tail(values, trim_fraction) if trim_fraction > 0.0 else values
    n = retained.size
    if n < _MIN_NORMALITY_SAMPLE:
        raise InsufficientSampleError(
            f"normality tests need >= {_MIN_NORMALITY_SAMPLE} retained values, got {n}"
        )
    chi2_stat, chi2_p, _ = chi2_gaussian(retained, bins)
    jb_stat, jb_p = jarque_bera(retained)
    return NormalityReport(
        n=n,
        trimmed=values.size - n,
        chi2_stat=chi2_stat,
        chi2_p=chi2_p,
        jb_stat=jb_stat,
        jb_p=jb_p,
        mean=float(retained.mean()),
        std=float(retained.std()),
    )


def negative_fraction(coupling: np.ndarray) -> float:
    """Fraction of strictly negative entries among upper-triangle couplings."""
    coupling = np.asarray(coupling, dtype=np.float64)
    if not np.allclose(coupling, coupling.T):
        raise DomainError("coupling matrix must be symmetric")
    upper = coupling[np.triu_indices(coupling.shape[0], k=1)]
    return float(np.count_nonzero(upper < 0.0) / upper.size)


def powerlaw_fit(sizes: np.ndarray, means: np.ndarray) -> ScalingFit:
    """Fit mean = a * N^(-alpha) by least squares on (ln N, ln mean)."""
    sizes = np.asarray(sizes, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    if sizes.size != means.size:
        raise DimensionMismatchError("sizes and means must have equal length")
    if sizes.size < 3:
        raise InsufficientSampleError("power-law fit needs at least 3 points")
    if np.any(sizes <= 0.0):
        raise DomainError("system sizes must be strictly positive")
    if np.any(means <= 0.0):
        raise DomainError(
            "mean couplings must be strictly positive for a log-log fit; "
            "consider the mean of |J| instead"
        )
    order = np.lexsort((means, sizes))  # canonical order: exact permutation invariance
    sizes, means = sizes[order], means[order]
    x = np.log(sizes)
    y = np.log(means)
    n = x.size
    x_center = x - x.mean()
    sxx = x_center @ x_center
    slope = (x_center @ y) / sxx
    intercept = y.mean() - slope * x.mean()
    fitted = intercept + slope * x
    ssr = float(((y - fitted) ** 2).sum())
    sst = float(((y - y.mean()) ** 2).sum())
    se = float(np.sqrt(ssr / (n - 2) / sxx)) if n > 2 else 0.0
    return ScalingFit(
        sizes=sizes,
        means=means,
        alpha_hat=float(-slope),
        alpha_se=se,
        a_hat=float(np.exp(intercept)),
        r2=1.0 - ssr / sst,
    )


def bias_decomposition(model: IsingModel, matrix: SpinMatrix) -> BiasTable:
    """Per-ticker internal bias 0.5 * sum_j J_ij s_j versus the field h_i."""
    if model.n != matrix.n:
        raise DimensionMismatchError(
            f"model has N={model.n}, spin matrix has N={matrix.n}"
        )
    internal = 0.5 * (matrix.values.astype(np.float64) @ model.J)
    rows = [
        BiasRow(
            ticker=matrix.tickers[i],
            h=float(model.h[i]),
            h_int_mean=float(internal[:, i].mean()),
            h_int_std=float(internal[:, i].std()),
        )
        for i in range(model.n)
    ]
    return BiasTable(rows=rows)


def critical_spectrum_demo(
    n: int,
    coupling_scale_j: float,
    t: int,
    seed: int,
    burn_in: int = 1000,
) -> Spectrum:
    """Covariance spectrum of data sampled from random Gaussian couplings.

    Couplings are IID zero-mean Gaussians with variance coupling_scale_j^2/N
    (mirrored across the diagonal), zero fields.  At coupling_scale_j = 1 the
    largest coupling eigenvalue reaches 2, where the mean-field covariance
    eigenvalue 1/(1 - lambda_J + J^2) blows up and the top eigenvalue escapes
    the noise band; at 0 the spectrum is pure sampling noise.
    """
    if n < 20:
        raise DomainError(f"demo needs N >= 20, got {n}")
    if t < 10 * n:
        raise DomainError(f"demo needs T >= 10*N = {10 * n}, got {t}")
    seeds = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(seeds[0])
    coupling = np.zeros((n, n))
    upper = np.triu_indices(n, k=1)
    coupling[upper] = rng.normal(0.0, coupling_scale_j / np.sqrt(n), size=len(upper[0]))
    coupling = coupling + coupling.T
    model = IsingModel(J=coupling, h=np.zeros(n))
    sampled = glauber_sample(
        model,
        SamplerConfig(rows=t, burn_in=burn_in, thin=1,
                      seed=int(seeds[1].generate_state(1)[0])),
    )
    return covariance_spectrum(sampled)
