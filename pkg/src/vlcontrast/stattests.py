"""Two-sample Kolmogorov-Smirnov test and Hartigan's dip statistic.

The KS statistic is the exact sup-distance between the two right-continuous
empirical CDFs evaluated at every pooled sample point; its p-value uses the
asymptotic Kolmogorov series with the usual small-sample correction of the
effective sample size.

The dip statistic follows the greatest-convex-minorant / least-concave-
majorant algorithm of Hartigan's AS 217 (as in Maechler's C implementation
for R): half the sup-norm distance from the empirical CDF to the nearest
unimodal CDF.  No p-value is attached; the dip is reported as a diagnostic
only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["TestResult", "ks_two_sample", "kolmogorov_sf", "dip_statistic", "dip_test"]


@dataclass(frozen=True)
class TestResult:
    """Outcome of a KS or dip test, with optional provenance labels."""

    kind: str  # "ks_two_sample" | "dip"
    statistic: float
    p_value: float | None = None
    n1: int | None = None
    n2: int | None = None
    vowel_class: str | None = None
    length_class: str | None = None
    corpus_a: str | None = None
    corpus_b: str | None = None


def kolmogorov_sf(lam: float) -> float:
    """Asymptotic Kolmogorov survival function Q(lam) = 2 sum (-1)^(j-1) exp(-2 j^2 lam^2).

    Terms are added until one falls below 1e-10; if the series has not
    converged by 100 terms (tiny lam), the limit value 1.0 is returned.
    The result is clamped to [0, 1].
    """
    if lam <= 0.0:
        return 1.0
    total = 0.0
    for j in range(1, 101):
        term = 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
        total += term
        if abs(term) < 1e-10:
            return min(1.0, max(0.0, total))
    return 1.0


def ks_two_sample(x, y) -> TestResult:
    """Two-sample KS test; D = sup |F_x - F_y| over all pooled points."""
    xs = np.sort(np.asarray(x, dtype=float))
    ys = np.sort(np.asarray(y, dtype=float))
    n1, n2 = xs.size, ys.size
    if n1 == 0 or n2 == 0:
        raise ValueError("ks_two_sample requires non-empty samples")
    pooled = np.concatenate([xs, ys])
    fx = np.searchsorted(xs, pooled, side="right") / n1
    fy = np.searchsorted(ys, pooled, side="right") / n2
    d = float(np.abs(fx - fy).max())
    n_eff = n1 * n2 / (n1 + n2)
    lam = (math.sqrt(n_eff) + 0.12 + 0.11 / math.sqrt(n_eff)) * d
    return TestResult(kind="ks_two_sample", statistic=d,
                      p_value=kolmogorov_sf(lam), n1=n1, n2=n2)


def dip_statistic(values) -> float:
    """Hartigan-Hartigan dip of a 1-d sample (n >= 4).

    Returns the sup-norm distance from the empirical CDF to the nearest
    unimodal CDF.  At least 1/(2n) for samples with distinct extremes;
    0.0 for an all-equal sample (a point mass is itself unimodal).
    """
    xs = np.sort(np.asarray(values, dtype=float))
    n = xs.size
    if n < 4:
        raise ValueError(f"dip requires at least 4 observations, got {n}")
    if xs[0] == xs[-1]:
        return 0.0

    # Predecessor indices for the greatest convex minorant fit: mn[j] is the
    # previous touch point when walking the GCM down from j.
    mn = np.zeros(n, dtype=np.intp)
    for j in range(1, n):
        mn[j] = j - 1
        while True:
            mnj = mn[j]
            if mnj == 0:
                break
            mnmnj = mn[mnj]
            if (xs[j] - xs[mnj]) * (mnj - mnmnj) < (xs[mnj] - xs[mnmnj]) * (j - mnj):
                break
            mn[j] = mnmnj

    # Successor indices for the least concave majorant fit.
    mj = np.zeros(n, dtype=np.intp)
    mj[n - 1] = n - 1
    for j in range(n - 2, -1, -1):
        mj[j] = j + 1
        while True:
            mjj = mj[j]
            if mjj == n - 1:
                break
            mjmjj = mj[mjj]
            if (xs[j] - xs[mjj]) * (mjj - mjmjj) < (xs[mjj] - xs[mjmjj]) * (j - mjj):
                break
            mj[j] = mjmjj

    gcm = np.zeros(n + 1, dtype=np.intp)
    lcm = np.zeros(n + 1, dtype=np.intp)
    low, high = 0, n - 1
    # 2n*dip is at least 1 for non-degenerate samples.
    best = 1.0

    while True:
        # GCM touch points from high down to low (decreasing indices).
        gcm[0] = high
        i = 0
        while gcm[i] > low:
            gcm[i + 1] = mn[gcm[i]]
            i += 1
        ig = l_gcm = i
        ix = i - 1
        # LCM touch points from low up to high.
        lcm[0] = low
        i = 0
        while lcm[i] < high:
            lcm[i + 1] = mj[lcm[i]]
            i += 1
        ih = l_lcm = i
        iv = 1

        # Largest distance between the two fits over [low, high], in counts.
        d = 0.0
        if l_gcm != 1 or l_lcm != 1:
            while True:
                gcmix = gcm[ix]
                lcmiv = lcm[iv]
                if gcmix > lcmiv:
                    # LCM point below a GCM chord segment.
                    gcmi1 = gcm[ix + 1]
                    dx = (lcmiv - gcmi1 + 1) - (xs[lcmiv] - xs[gcmi1]) \
                        * (gcmix - gcmi1) / (xs[gcmix] - xs[gcmi1])
                    iv += 1
                    if dx >= d:
                        d = dx
                        ig = ix + 1
                        ih = iv - 1
                else:
                    # GCM point above an LCM chord segment.
                    lcmiv1 = lcm[iv - 1]
                    dx = (xs[gcmix] - xs[lcmiv1]) * (lcmiv - lcmiv1) \
                        / (xs[lcmiv] - xs[lcmiv1]) - (gcmix - lcmiv1 - 1)
                    ix -= 1
                    if dx >= d:
                        d = dx
                        ig = ix + 1
                        ih = iv
                if ix < 0:
                    ix = 0
                if iv > l_lcm:
                    iv = l_lcm
                if gcm[ix] == lcm[iv]:
                    break

        if d < best:
            break

        # Dip of the ECDF against the convex minorant between touch points.
        dip_lo = 0.0
        for j in range(ig, l_gcm):
            max_t = 1.0
            jb = gcm[j + 1]
            je = gcm[j]
            if je - jb > 1 and xs[je] != xs[jb]:
                c = (je - jb) / (xs[je] - xs[jb])
                for jj in range(jb, je + 1):
                    t = (jj - jb + 1) - (xs[jj] - xs[jb]) * c
                    if max_t < t:
                        max_t = t
            if dip_lo < max_t:
                dip_lo = max_t

        # Dip against the concave majorant.
        dip_hi = 0.0
        for j in range(ih, l_lcm):
            max_t = 1.0
            jb = lcm[j]
            je = lcm[j + 1]
            if je - jb > 1 and xs[je] != xs[jb]:
                c = (je - jb) / (xs[je] - xs[jb])
                for jj in range(jb, je + 1):
                    t = (xs[jj] - xs[jb]) * c - (jj - jb - 1)
                    if max_t < t:
                        max_t = t
            if dip_hi < max_t:
                dip_hi = max_t

        if best < max(dip_lo, dip_hi):
            best = max(dip_lo, dip_hi)
        if low == gcm[ig] and high == lcm[ih]:
            break
        low = gcm[ig]
        high = lcm[ih]

    return best / (2.0 * n)


def dip_test(values) -> TestResult:
    """Dip statistic wrapped as a TestResult (diagnostic, no p-value)."""
    xs = np.asarray(values, dtype=float)
    return TestResult(kind="dip", statistic=dip_statistic(xs), n1=int(xs.size))
