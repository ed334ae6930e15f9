"""Power-law guessing models and lockout-limit derivation.

Two fitted model families over rank/probability data:

  pdf_zipf   p(r)      = c * r**(-s)   probability of the rank-r password
  cdf_zipf   lambda(b) = c * b**s      cumulative success after b guesses

plus an exact ``empirical`` model backed by the observed cumulative sums.
Fits are ordinary least squares on log-log points; that matches the
rank-frequency literature this tool leans on, is deterministic, and is
adequate for rank data (maximum likelihood estimation is a non-goal).

The lockout solver answers the operational question: how many failed login
attempts can be tolerated while keeping the worst-case online guessing
success probability at or below a threshold? The worst-case attacker is
assumed to guess in descending empirical probability order. The threshold
comparison is inclusive: success probability exactly equal to the threshold
still passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import WorkbenchError
from .ingest import Distribution, FrequencyTable

PDF_ZIPF = "pdf_zipf"
CDF_ZIPF = "cdf_zipf"
EMPIRICAL = "empirical"

MODEL_KINDS = (PDF_ZIPF, CDF_ZIPF, EMPIRICAL)


class InsufficientPoints(WorkbenchError):
    """Fewer than two ranks survived fit-range filtering."""


@dataclass(frozen=True)
class FitOptions:
    """Fit-range control.

    min_count drops the tail of ranks whose observed count falls below the
    bound; low-count ranks are noisy on a log-log plot. It only applies when
    the distribution still knows its source counts. rank_limit truncates the
    fit to the top ranks regardless of counts.
    """

    min_count: int = 5
    rank_limit: int | None = None

    def __post_init__(self) -> None:
        if self.min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {self.min_count}")
        if self.rank_limit is not None and self.rank_limit < 2:
            raise ValueError(f"rank_limit must be >= 2, got {self.rank_limit}")


@dataclass(frozen=True, eq=False)
class GuessingModel:
    """A fitted (or exact empirical) guessing model.

    For pdf_zipf/cdf_zipf the parameters c and s are positive, fit_range is
    the 1-based inclusive rank window the regression used, and r_squared is
    the goodness of fit of that regression on log-log points. Empirical
    models carry the cumulative success probabilities instead.
    """

    kind: str
    c: float | None
    s: float | None
    fit_range: tuple[int, int] | None
    r_squared: float | None
    n_ranks: int
    empirical_cumulative: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind: {self.kind!r}")
        if self.kind == EMPIRICAL:
            cum = self.empirical_cumulative
            if cum is None or len(cum) != self.n_ranks:
                raise ValueError("empirical model needs one cumulative value per rank")
            if np.any(np.diff(cum) < 0):
                raise ValueError("empirical cumulative must be non-decreasing")
            if abs(float(cum[-1]) - 1.0) > 1e-9:
                raise ValueError(f"empirical cumulative ends at {cum[-1]}, expected 1.0")
        else:
            if self.c is None or self.s is None or self.fit_range is None:
                raise ValueError(f"{self.kind} model needs c, s and fit_range")
            if self.c <= 0:
                raise ValueError(f"c must be positive, got {self.c}")
            lo, hi = self.fit_range
            if not 1 <= lo <= hi <= self.n_ranks:
                raise ValueError(f"fit_range {self.fit_range} outside 1..{self.n_ranks}")


@dataclass(frozen=True)
class LockoutRecommendation:
    """Largest guess budget keeping attack success at or below epsilon."""

    epsilon: float
    max_attempts: int
    achieved_probability: float
    basis: str

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "max_attempts": self.max_attempts,
            "achieved_probability": self.achieved_probability,
            "basis": self.basis,
        }


def _cumulative(dist: Distribution) -> np.ndarray:
    """Cumulative success probability per rank.

    Count-backed distributions use integer cumulative sums divided once at
    the end, so partial sums like 20/1000 come out exact.
    """
    if dist.counts is not None:
        total = sum(dist.counts)
        return np.cumsum(np.asarray(dist.counts, dtype=np.int64)) / float(total)
    return np.cumsum(np.asarray(dist.probabilities(), dtype=float))


def empirical_model(dist: Distribution) -> GuessingModel:
    """Exact model: success probability is the observed partial sum."""
    return GuessingModel(
        kind=EMPIRICAL,
        c=None,
        s=None,
        fit_range=None,
        r_squared=None,
        n_ranks=dist.n_ranks,
        empirical_cumulative=_cumulative(dist),
    )


def _fit_window(dist: Distribution, opts: FitOptions) -> int:
    """Highest rank included in the fit, honouring min_count and rank_limit."""
    max_rank = dist.n_ranks
    if dist.counts is not None:
        kept = 0
        for count in dist.counts:
            if count < opts.min_count:
                break  # counts are non-increasing, the rest are below too
            kept += 1
        max_rank = kept
    if opts.rank_limit is not None:
        max_rank = min(max_rank, opts.rank_limit)
    if max_rank < 2:
        raise InsufficientPoints(
            f"only {max_rank} rank(s) left to fit (need at least 2); "
            "lower min_count or raise rank_limit"
        )
    return max_rank


def _ols_loglog(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line through (x, y); returns slope, intercept, r_squared."""
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        r_squared = 1.0 if ss_res < 1e-24 else 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), min(1.0, max(0.0, r_squared))


def fit_pdf_zipf(dist: Distribution, opts: FitOptions | None = None) -> GuessingModel:
    """Fit p(r) = c * r**(-s) by OLS on (ln r, ln p_r)."""
    opts = opts or FitOptions()
    max_rank = _fit_window(dist, opts)
    ranks = np.arange(1, max_rank + 1, dtype=float)
    probs = np.asarray(dist.probabilities()[:max_rank], dtype=float)
    slope, intercept, r_squared = _ols_loglog(np.log(ranks), np.log(probs))
    return GuessingModel(
        kind=PDF_ZIPF,
        c=math.exp(intercept),
        s=-slope,
        fit_range=(1, max_rank),
        r_squared=r_squared,
        n_ranks=dist.n_ranks,
    )


def fit_cdf_zipf(dist: Distribution, opts: FitOptions | None = None) -> GuessingModel:
    """Fit lambda(b) = c * b**s by OLS on (ln b, ln lambda_b)."""
    opts = opts or FitOptions()
    max_rank = _fit_window(dist, opts)
    budgets = np.arange(1, max_rank + 1, dtype=float)
    lam = _cumulative(dist)[:max_rank]
    slope, intercept, r_squared = _ols_loglog(np.log(budgets), np.log(lam))
    return GuessingModel(
        kind=CDF_ZIPF,
        c=math.exp(intercept),
        s=slope,
        fit_range=(1, max_rank),
        r_squared=r_squared,
        n_ranks=dist.n_ranks,
    )


def success_probability(model: GuessingModel, b: int) -> float:
    """Probability that an attacker making b guesses (in the model's implied
    best order) compromises a randomly selected account. lambda_0 = 0;
    analytic models are capped at 1."""
    if b < 0:
        raise ValueError(f"guess budget must be >= 0, got {b}")
    if b == 0:
        return 0.0
    if model.kind == EMPIRICAL:
        cum = model.empirical_cumulative
        return min(1.0, float(cum[min(b, model.n_ranks) - 1]))
    if model.kind == PDF_ZIPF:
        ranks = np.arange(1, min(b, model.n_ranks) + 1, dtype=float)
        return min(1.0, float(model.c * np.sum(ranks ** (-model.s))))
    return min(1.0, model.c * float(b) ** model.s)


def max_attempts(model: GuessingModel, epsilon: float) -> LockoutRecommendation:
    """Largest b with success_probability(model, b) <= epsilon.

    The boundary is inclusive: exact equality still passes. b = 0 is a valid
    answer when even a single guess exceeds the threshold; b is capped at
    the number of ranks in the source data.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")

    if model.kind == CDF_ZIPF:
        b = _solve_cdf_budget(model, epsilon)
    else:
        cum = (
            model.empirical_cumulative
            if model.kind == EMPIRICAL
            else np.cumsum(model.c * np.arange(1, model.n_ranks + 1, dtype=float) ** (-model.s))
        )
        b = int(np.searchsorted(cum, epsilon, side="right"))
    achieved = success_probability(model, b)
    return LockoutRecommendation(
        epsilon=epsilon,
        max_attempts=b,
        achieved_probability=achieved,
        basis=model.kind,
    )


def _solve_cdf_budget(model: GuessingModel, epsilon: float) -> int:
    # Closed form, then nudge with exact float comparisons to be safe at the
    # inclusive boundary.
    if model.s <= 0:
        return model.n_ranks  # degenerate fit: flat curve never crosses
    b = int((epsilon / model.c) ** (1.0 / model.s))
    b = max(0, min(b, model.n_ranks))
    while b < model.n_ranks and success_probability(model, b + 1) <= epsilon:
        b += 1
    while b > 0 and success_probability(model, b) > epsilon:
        b -= 1
    return b


def sample_zipf(s: float, n_ranks: int, n_samples: int, seed: int) -> FrequencyTable:
    """Draw n_samples passwords i.i.d. from p(r) proportional to r**(-s).

    Synthetic passwords are "pw1" .. "pw<n_ranks>". Identical seeds give
    identical tables; ranks that receive no draws are absent from the
    result (counts are always >= 1).
    """
    counts = _zipf_draw_counts(s, n_ranks, n_samples, seed)
    mapping = {f"pw{r + 1}": int(n) for r, n in enumerate(counts) if n > 0}
    label = f"zipf(s={s},ranks={n_ranks},samples={n_samples},seed={seed})"
    return FrequencyTable.from_counts(mapping, source_label=label)


def sample_zipf_dump(s: float, n_ranks: int, n_samples: int, seed: int) -> bytes:
    """Same draw as sample_zipf, but rendered as a raw_lines dump in draw
    order (one password per line), for exercising the ingestion path."""
    ranks = _zipf_draw_ranks(s, n_ranks, n_samples, seed)
    return ("\n".join(f"pw{r + 1}" for r in ranks) + "\n").encode("ascii")


def _zipf_draw_ranks(s: float, n_ranks: int, n_samples: int, seed: int) -> np.ndarray:
    if s <= 0:
        raise ValueError(f"s must be positive, got {s}")
    if n_ranks < 2:
        raise ValueError(f"n_ranks must be >= 2, got {n_ranks}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    weights = np.arange(1, n_ranks + 1, dtype=float) ** (-s)
    cum = np.cumsum(weights)
    cum /= cum[-1]
    # Inverse-CDF sampling on a PCG64 stream: stable across library versions,
    # unlike higher-level choice() helpers.
    rng = np.random.default_rng(seed)
    return np.searchsorted(cum, rng.random(n_samples), side="right")


def _zipf_draw_counts(s: float, n_ranks: int, n_samples: int, seed: int) -> np.ndarray:
    return np.bincount(_zipf_draw_ranks(s, n_ranks, n_samples, seed), minlength=n_ranks)


def model_to_json(model: GuessingModel) -> dict:
    """Stable JSON shape shared by the pipeline, CLI and HTTP service."""
    return {
        "kind": model.kind,
        "c": model.c,
        "s": model.s,
        "fit_range": list(model.fit_range) if model.fit_range else None,
        "r_squared": model.r_squared,
        "n_ranks": model.n_ranks,
    }


def model_from_json(doc: dict) -> GuessingModel:
    """Inverse of model_to_json for the fitted kinds (empirical models carry
    their data and are not round-tripped through JSON)."""
    kind = doc.get("kind")
    if kind not in (PDF_ZIPF, CDF_ZIPF):
        raise ValueError(f"cannot rebuild model of kind {kind!r} from JSON")
    fit_range = doc.get("fit_range")
    return GuessingModel(
        kind=kind,
        c=float(doc["c"]),
        s=float(doc["s"]),
        fit_range=(int(fit_range[0]), int(fit_range[1])),
        r_squared=float(doc["r_squared"]),
        n_ranks=int(doc["n_ranks"]),
    )
