"""Bimodality features of a short/long pair of gamma duration densities.

Given the fitted densities d_S and d_L of one vowel:

  r1    = d_S(a) / d_L(a)    with a the mode of d_S
  r2    = d_L(b) / d_S(b)    with b the mode of d_L
  area  = integral of max(0, d_L(x) - d_S(x)) over the support
  delta = mode(d_L) - mode(d_S)        (ms)

The area realizes the "part where the long density exceeds the short one"
as a positive-part integral over the full support, which is equivalent to
integrating from the crossing point when the densities cross once, and
stays well defined when they do not.  A contrast counts as significant
when area > 0.40.

Ratios are UNDEFINED (None, flagged) when the opposite density carries no
mass at the probing mode, mirroring corpora where a cell is empty in
practice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .durations import DurationSampleSet, filter_outliers
from .gamma import (
    DegenerateDataError,
    GammaFit,
    NoInteriorModeError,
    fit_gamma,
    gamma_mode,
    gamma_pdf,
)
from .quadrature import adaptive_simpson
from .stattests import TestResult, ks_two_sample

__all__ = [
    "AREA_SIGNIFICANCE_THRESHOLD",
    "UNDEFINED_DENSITY_FLOOR",
    "VOWEL_ORDER",
    "ContrastReport",
    "compute_r1",
    "compute_r2",
    "compute_area",
    "compute_delta",
    "contrast_report",
    "compare_corpora",
]

# A significant contrast requires area > 0.40 of separated probability mass.
AREA_SIGNIFICANCE_THRESHOLD = 0.40

# Below this density (1/ms) the opposite curve is treated as massless and
# the ratio is UNDEFINED rather than a float-noise artifact.
UNDEFINED_DENSITY_FLOOR = 1e-12

# Fixed reporting order: vowels sorted by height, front before back.
VOWEL_ORDER = ("i", "e", "ɛ", "a", "ɔ", "o", "u")

_AREA_TOL = 1e-7
_AREA_PANELS = 64


@dataclass(frozen=True)
class ContrastReport:
    """One vowel's row of the contrast feature table."""

    vowel_class: str
    corpus_id: str
    n_short: int
    n_long: int
    mean_short_ms: float | None
    mean_long_ms: float | None
    fit_short: GammaFit | None
    fit_long: GammaFit | None
    r1: float | None
    r2: float | None
    area: float | None
    delta_ms: float | None
    significant: bool
    flags: frozenset[str]
    error: str | None = None


def compute_r1(fit_short: GammaFit, fit_long: GammaFit) -> float | None:
    """Short/long density ratio at the short mode; None when undefined."""
    a = gamma_mode(fit_short)
    gamma_mode(fit_long)  # both fits need interior modes
    num = gamma_pdf(fit_short, a)
    den = gamma_pdf(fit_long, a)
    if den < UNDEFINED_DENSITY_FLOOR:
        return None
    return num / den


def compute_r2(fit_short: GammaFit, fit_long: GammaFit) -> float | None:
    """Long/short density ratio at the long mode; None when undefined."""
    b = gamma_mode(fit_long)
    gamma_mode(fit_short)
    num = gamma_pdf(fit_long, b)
    den = gamma_pdf(fit_short, b)
    if den < UNDEFINED_DENSITY_FLOOR:
        return None
    return num / den


def _upper_limit(fit_short: GammaFit, fit_long: GammaFit) -> float:
    limit = 0.0
    for fit in (fit_short, fit_long):
        mode = (fit.shape - 1.0) * fit.scale if fit.shape >= 1.0 else 0.0
        limit = max(limit, mode + 40.0 * math.sqrt(fit.shape) * fit.scale)
    return limit


def compute_area(fit_short: GammaFit, fit_long: GammaFit,
                 tol: float = _AREA_TOL) -> float:
    """Positive-part integral of (d_L - d_S); dimensionless, in [0, 1)."""
    upper = _upper_limit(fit_short, fit_long)
    lower = 0.0
    if fit_short.shape < 1.0 or fit_long.shape < 1.0:
        # density unbounded at 0; skip a negligible sliver of the origin
        lower = 1e-12 * upper

    def positive_excess(x: float) -> float:
        return max(0.0, gamma_pdf(fit_long, x) - gamma_pdf(fit_short, x))

    value = adaptive_simpson(positive_excess, lower, upper, tol=tol,
                             initial_panels=_AREA_PANELS)
    return max(0.0, value)


def compute_delta(fit_short: GammaFit, fit_long: GammaFit) -> float:
    """Mode difference mode(d_L) - mode(d_S) in ms; may be negative."""
    return gamma_mode(fit_long) - gamma_mode(fit_short)


def contrast_report(
    set_short: DurationSampleSet,
    set_long: DurationSampleSet,
    apply_outlier_filter: bool = True,
) -> ContrastReport:
    """Full per-vowel pipeline: filter, fit both cells, derive features.

    Degenerate cells produce a report carrying an error marker instead of
    features; callers decide whether that aborts anything (the CLI does
    not).
    """
    if set_short.vowel_class != set_long.vowel_class:
        raise ValueError("short/long cells must describe the same vowel")
    if set_short.corpus_id != set_long.corpus_id:
        raise ValueError("short/long cells must come from the same corpus")

    if apply_outlier_filter:
        set_short = filter_outliers(set_short)
        set_long = filter_outliers(set_long)

    flags: set[str] = set()
    base = dict(
        vowel_class=set_short.vowel_class,
        corpus_id=set_short.corpus_id,
        n_short=set_short.n,
        n_long=set_long.n,
        mean_short_ms=set_short.mean_ms,
        mean_long_ms=set_long.mean_ms,
    )

    fits: dict[str, GammaFit | None] = {"short": None, "long": None}
    errors = []
    for side, cell in (("short", set_short), ("long", set_long)):
        try:
            fits[side] = fit_gamma(cell.samples)
        except (DegenerateDataError, ValueError) as exc:
            errors.append(f"{side}: {exc}")
    if set_short.n and set_short.n < 20:
        flags.add("low_n_short")
    if set_long.n and set_long.n < 20:
        flags.add("low_n_long")

    if errors:
        return ContrastReport(
            **base, fit_short=fits["short"], fit_long=fits["long"],
            r1=None, r2=None, area=None, delta_ms=None,
            significant=False, flags=frozenset(flags),
            error="; ".join(errors),
        )

    fit_s, fit_l = fits["short"], fits["long"]
    area = compute_area(fit_s, fit_l)
    r1 = r2 = delta = None
    try:
        r1 = compute_r1(fit_s, fit_l)
        r2 = compute_r2(fit_s, fit_l)
        delta = compute_delta(fit_s, fit_l)
    except NoInteriorModeError:
        flags.add("no_interior_mode")
    if r1 is None and "no_interior_mode" not in flags:
        flags.add("r1_undefined")
    if r2 is None and "no_interior_mode" not in flags:
        flags.add("r2_undefined")
    if delta is not None and delta < 0.0:
        flags.add("negative_delta")

    return ContrastReport(
        **base, fit_short=fit_s, fit_long=fit_l,
        r1=r1, r2=r2, area=area, delta_ms=delta,
        significant=area > AREA_SIGNIFICANCE_THRESHOLD,
        flags=frozenset(flags),
    )


def _cell_durations(tokens, corpus_id, vowel_class, length_class,
                    apply_outlier_filter):
    durations = tuple(
        t.duration_ms for t in tokens
        if t.vowel_class == vowel_class and t.length_class == length_class
    )
    cell = DurationSampleSet(vowel_class, length_class, corpus_id, durations)
    if apply_outlier_filter:
        cell = filter_outliers(cell)
    return cell.samples


def compare_corpora(
    vowel_class: str,
    tokens_a,
    tokens_b,
    length_class: str = "pooled",
    apply_outlier_filter: bool = True,
) -> TestResult:
    """KS two-sample test between the duration distributions of one vowel
    in two corpora.

    `length_class` is "short", "long", or "pooled"; pooling filters each
    (vowel, length) cell separately first, since the outlier rule is a
    per-cell rule.
    """
    if length_class not in ("short", "long", "pooled"):
        raise ValueError(f"length_class must be short/long/pooled, got {length_class!r}")
    lengths = ("short", "long") if length_class == "pooled" else (length_class,)

    sides = []
    for name, tokens in (("A", tokens_a), ("B", tokens_b)):
        corpus_id = next((t.corpus_id for t in tokens), name)
        durations: list[float] = []
        for length in lengths:
            durations.extend(_cell_durations(tokens, corpus_id, vowel_class,
                                             length, apply_outlier_filter))
        if not durations:
            raise ValueError(
                f"corpus {corpus_id!r} has no tokens for cell "
                f"({vowel_class}, {length_class})")
        sides.append((corpus_id, durations))

    (corpus_a, dur_a), (corpus_b, dur_b) = sides
    result = ks_two_sample(dur_a, dur_b)
    return replace(result, vowel_class=vowel_class, length_class=length_class,
                   corpus_a=corpus_a, corpus_b=corpus_b)
