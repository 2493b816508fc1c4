"""Closed-form completion-time bounds and their ordering.

All three bounds depend only on set sizes (|common_missing|, per-device
wants sizes, and the grouped |m_d|), never on payloads or randomness.
Arithmetic is exact over rationals before the final ceiling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

from .core import Instance
from .grouping import group


@dataclass(frozen=True)
class BoundReport:
    """The three bounds plus each formula's raw max-arguments for diagnostics."""

    lower: int
    upper_b: int
    upper_i: int
    lower_terms: tuple[Fraction, ...]
    upper_b_terms: tuple[Fraction, ...]
    upper_i_terms: tuple[Fraction, ...]


def _ceil_max(terms: tuple[Fraction, ...]) -> int:
    return ceil(max(terms))


def _lower_terms(instance: Instance) -> tuple[Fraction, ...]:
    return (
        Fraction(len(instance.common_missing)),
        Fraction(instance.max_wants(), 2),
    )


def _upper_b_terms(instance: Instance) -> tuple[Fraction, ...]:
    w_max, w_min = instance.max_wants(), instance.min_wants()
    return (
        Fraction(len(instance.common_missing)),
        Fraction(w_max + w_min, 3),
        Fraction(w_max, 2),
    )


def _upper_i_terms(instance: Instance, m_d_size: int | None = None) -> tuple[Fraction, ...]:
    if m_d_size is None:
        m_d_size = len(group(instance).m_d)
    w_min = instance.min_wants()
    return (
        Fraction(len(instance.common_missing)),
        Fraction(2 * w_min + m_d_size, 3),
        Fraction(w_min + m_d_size, 2),
    )


def lower_bound(instance: Instance) -> int:
    """Floor on slots for any scheme: source-only traffic and the best-case 2x rate."""
    return _ceil_max(_lower_terms(instance))


def upper_bound_b(instance: Instance) -> int:
    """Worst-case slots for the batch-coded scheduler."""
    return _ceil_max(_upper_b_terms(instance))


def upper_bound_i(instance: Instance) -> int:
    """Worst-case slots for the instantly-decodable scheduler (uses the grouping's m_d)."""
    return _ceil_max(_upper_i_terms(instance))


def bound_report(instance: Instance) -> BoundReport:
    lo = _lower_terms(instance)
    ub = _upper_b_terms(instance)
    ui = _upper_i_terms(instance)
    return BoundReport(
        lower=_ceil_max(lo),
        upper_b=_ceil_max(ub),
        upper_i=_ceil_max(ui),
        lower_terms=lo,
        upper_b_terms=ub,
        upper_i_terms=ui,
    )


def format_report(report: BoundReport) -> str:
    def terms(ts: tuple[Fraction, ...]) -> str:
        return " ".join(str(t) for t in ts)

    return "\n".join(
        [
            f"LOWER={report.lower} UPPER_B={report.upper_b} UPPER_I={report.upper_i}",
            f"LOWER_TERMS: {terms(report.lower_terms)}",
            f"UPPER_B_TERMS: {terms(report.upper_b_terms)}",
            f"UPPER_I_TERMS: {terms(report.upper_i_terms)}",
        ]
    )
