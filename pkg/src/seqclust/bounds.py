"""Closed-form error-probability bounds for the clustering procedures.

All bounds live on a separation profile: `split` (worst within-cluster
bipartition bottleneck), `gap` (smallest between-cluster distance) with
split < gap, the kernel upper bound, and the problem size.  From these the
fixed-sample error bound decays like prefactor * exp(-rate * n), and the
sequential test's error decays exponentially in the squared threshold
scale.  Every evaluator returns (value, valid): the value is always
computed, the flag marks whether the argument is inside the regime where
the derivation holds, so plots can grey out the invalid range instead of
losing it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


class BoundValue(NamedTuple):
    value: float
    valid: bool


def margin_interval(split: float, gap: float) -> tuple[float, float]:
    """Admissible open interval for the sequential slack margin."""
    return 0.0, 1.0 - math.sqrt(split / gap)


@dataclass(frozen=True)
class BoundParams:
    """Separation profile of one clustering problem.

    split and gap are the true separations (split < gap required);
    kernel_bound is the sup of the kernel; n_seq and n_clusters give the
    problem size.  cut is the working level between split and gap used to
    separate the two failure modes, defaulting to the midpoint.  margin is
    the sequential slack in (0, 1 - sqrt(split/gap)), defaulting to the
    middle of that interval.  scale is the sequential threshold scale,
    needed only by the stopping-time bounds.
    """

    split: float
    gap: float
    n_seq: int
    n_clusters: int
    kernel_bound: float = 1.0
    cut: float | None = None
    margin: float | None = None
    scale: float | None = None

    def __post_init__(self):
        if not (self.split >= 0):
            raise ValueError("split must be nonnegative")
        if not (self.gap > self.split):
            raise ValueError("need split < gap")
        if not (self.kernel_bound > 0):
            raise ValueError("kernel_bound must be positive")
        if not 1 <= int(self.n_clusters) <= int(self.n_seq):
            raise ValueError("need 1 <= n_clusters <= n_seq")
        if int(self.n_seq) < 2:
            raise ValueError("n_seq must be >= 2")
        if self.cut is None:
            object.__setattr__(self, "cut", 0.5 * (self.split + self.gap))
        if not (self.split < self.cut < self.gap):
            raise ValueError("cut must lie strictly between split and gap")
        lo, hi = margin_interval(self.split, self.gap)
        if self.margin is None:
            object.__setattr__(self, "margin", 0.5 * (lo + hi))
        if not (lo < self.margin < hi):
            raise ValueError(f"margin must be in ({lo}, {hi})")
        if self.scale is not None and not (self.scale > 0):
            raise ValueError("scale must be positive")


@dataclass(frozen=True)
class DerivedConstants:
    """Constants of the error bounds for one parameter set.

    gap_* bounds the chance that some between-cluster distance is
    estimated below the cut; split_* the chance that every bipartition of
    some cluster is estimated above it.  prefactor/rate combine the two
    into the fixed-sample bound; rate_midpoint is the rate at the default
    cut, (gap - split)^2 / (64 * kernel_bound).  sample_floor, stop_horizon
    and min_scale govern the sequential analysis; exponent is the decay
    rate of the sequential error in the expected stopping time.
    """

    gap_prefactor: float
    gap_rate: float
    split_prefactor: float
    split_rate: float
    prefactor: float
    rate: float
    rate_midpoint: float
    sample_floor: float
    stop_horizon: float | None
    min_scale: float
    exponent_base: float
    exponent: float


def stop_horizon(p: BoundParams, scale: float) -> float:
    """Horizon (sqrt(sample_floor) + scale/((1-margin)*gap))^2; scale >= 0."""
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    floor = _sample_floor(p)
    return (math.sqrt(floor) + scale / ((1.0 - p.margin) * p.gap)) ** 2


def _fss_floor(p: BoundParams) -> float:
    g16 = 64.0 * p.kernel_bound
    return max(g16 / (p.gap - p.cut) ** 2, g16 / (p.cut - p.split) ** 2)


def _sample_floor(p: BoundParams) -> float:
    return _fss_floor(p) / (1.0 - p.margin) ** 2


def seq_constants(p: BoundParams) -> DerivedConstants:
    """All derived constants for one parameter set."""
    g = p.kernel_bound
    m = int(p.n_seq)
    k = int(p.n_clusters)
    gap_prefactor = 2.0 * m * m
    gap_rate = (p.gap - p.cut) ** 2 / (16.0 * g)
    split_prefactor = 2.0 * k * 2.0 ** m
    split_rate = (p.cut - p.split) ** 2 / (16.0 * g)
    prefactor = 2.0 * max(split_prefactor, gap_prefactor)
    rate = min(split_rate, gap_rate)
    floor = _sample_floor(p)
    one_minus = 1.0 - p.margin
    min_scale = ((1.0 + p.margin) * math.sqrt(floor) * p.split
                 + 8.0 * math.sqrt(g)) / (one_minus - p.split / (one_minus * p.gap))
    exponent_base = min(p.margin ** 2 / (16.0 * g),
                        rate / (one_minus ** 2 * p.gap ** 2))
    return DerivedConstants(
        gap_prefactor=gap_prefactor,
        gap_rate=gap_rate,
        split_prefactor=split_prefactor,
        split_rate=split_rate,
        prefactor=prefactor,
        rate=rate,
        rate_midpoint=(p.gap - p.split) ** 2 / (64.0 * g),
        sample_floor=floor,
        stop_horizon=None if p.scale is None else stop_horizon(p, p.scale),
        min_scale=min_scale,
        exponent_base=exponent_base,
        exponent=exponent_base * p.gap ** 2,
    )


def fss_error_bound(n: int, p: BoundParams) -> BoundValue:
    """Fixed-sample error bound prefactor * exp(-rate * n).

    Valid once n clears the floor where both concentration arguments
    apply: n > 64*kernel_bound / min((gap-cut)^2, (cut-split)^2).
    """
    c = seq_constants(p)
    value = c.prefactor * math.exp(-c.rate * n)
    return BoundValue(value, n > _fss_floor(p))


def low_estimate_tail(n: int, level: float, p: BoundParams) -> BoundValue:
    """Tail of underestimating a between-cluster distance down to `level`.

    Bounds the probability that a pair with true distance >= gap is
    estimated at or below level < gap.
    """
    if not (level < p.gap):
        raise ValueError("level must be below gap")
    slack = p.gap - level
    value = 2.0 * math.exp(-n * slack * slack / (16.0 * p.kernel_bound))
    return BoundValue(value, n > 64.0 * p.kernel_bound / (slack * slack))


def high_estimate_tail(n: int, level: float, p: BoundParams) -> BoundValue:
    """Tail of overestimating a within-cluster distance up to `level`.

    Bounds the probability that a pair with true distance <= split is
    estimated at or above level > split.
    """
    if not (level > p.split):
        raise ValueError("level must be above split")
    slack = level - p.split
    value = 2.0 * math.exp(-n * slack * slack / (16.0 * p.kernel_bound))
    return BoundValue(value, n > 64.0 * p.kernel_bound / (slack * slack))


def stopping_tail_bound(n: int, p: BoundParams) -> BoundValue:
    """Tail bound on the sequential stopping time, P[N > n].

    Sum of the fixed-sample error bound and the chance that no
    between-cluster estimate has cleared the shrinking threshold yet.
    Requires `scale` in the parameters.
    """
    if p.scale is None:
        raise ValueError("stopping_tail_bound needs scale")
    c = seq_constants(p)
    g = p.kernel_bound
    m = int(p.n_seq)
    slack = p.margin * p.gap
    value = (c.prefactor * math.exp(-c.rate * n)
             + 2.0 * m * m * math.exp(-n * slack * slack / (16.0 * g)))
    floor = max(_fss_floor(p),
                ((p.scale + 8.0 * math.sqrt(g)) / ((1.0 - p.margin) * p.gap)) ** 2)
    return BoundValue(value, n > floor)


def seq_error_bound(scale: float, p: BoundParams) -> BoundValue:
    """Sequential error bound as a function of the threshold scale.

    prefactor/(1-exp(-rate)) * exp(-rate * scale^2 / ((1-margin)^2 gap^2))
    plus 2 * stop_horizon * exp(-margin^2 scale^2 / (16 kernel_bound)).
    Valid (and strictly decreasing) for scale > min_scale.
    """
    if not (scale > 0):
        raise ValueError("scale must be positive")
    c = seq_constants(p)
    g = p.kernel_bound
    one_minus = 1.0 - p.margin
    horizon = stop_horizon(p, scale)
    value = (c.prefactor / (1.0 - math.exp(-c.rate))
             * math.exp(-c.rate * scale * scale / (one_minus ** 2 * p.gap ** 2))
             + 2.0 * horizon * math.exp(-p.margin ** 2 * scale * scale / (16.0 * g)))
    return BoundValue(value, scale > c.min_scale)
