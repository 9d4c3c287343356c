"""Pointwise partial order on finite value vectors.

The carrier type is :class:`ValueVector`, a finite real vector indexed by
states (or state-action pairs).  Comparisons are exact: order-theoretic
statements carry no tolerance.  Tolerances appear only in fixed-point
checks (see :func:`stability_probe`).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import DimensionMismatchError, DomainViolationError, FixedPointError

Mode = Literal["max", "min"]


def flip_mode(mode: Mode) -> Mode:
    if mode == "max":
        return "min"
    if mode == "min":
        return "max"
    raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")


@dataclass(frozen=True, eq=False)
class ValueVector:
    """Finite real vector, the carrier of the pointwise partial order.

    Parameters
    ----------
    values : array_like
        One-dimensional real data; copied and frozen.
    positivity_required : bool
        True when the vector must live in the strictly positive orthant
        (value spaces of multiplicative and recursive-utility models).
    """

    values: np.ndarray
    positivity_required: bool = False

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 1:
            raise ValueError(f"values must be one-dimensional, got shape {arr.shape}")
        if arr.size == 0:
            raise ValueError("values must be nonempty")
        if not np.all(np.isfinite(arr)):
            raise DomainViolationError("values must be finite (no NaN or infinity)")
        if self.positivity_required and not np.all(arr > 0.0):
            raise DomainViolationError(
                "positivity_required is set but some entries are not strictly positive"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def index_count(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        flag = ", positive" if self.positivity_required else ""
        return f"ValueVector({np.array2string(self.values, threshold=8)}{flag})"


class OrderVerdict(Enum):
    """Outcome of a pointwise comparison."""

    LE = "le"
    GE = "ge"
    EQ = "eq"
    INCOMPARABLE = "incomparable"


def _check_dims(u: ValueVector, v: ValueVector) -> None:
    if u.index_count != v.index_count:
        raise DimensionMismatchError(
            f"vectors have sizes {u.index_count} and {v.index_count}"
        )


def pointwise_compare(u: ValueVector, v: ValueVector) -> OrderVerdict:
    """Compare two vectors under the componentwise order (exactly).

    Returns EQ when u == v, LE when u is below v (and not equal),
    GE symmetrically, and INCOMPARABLE otherwise.
    """
    _check_dims(u, v)
    le = bool(np.all(u.values <= v.values))
    ge = bool(np.all(u.values >= v.values))
    if le and ge:
        return OrderVerdict.EQ
    if le:
        return OrderVerdict.LE
    if ge:
        return OrderVerdict.GE
    return OrderVerdict.INCOMPARABLE


def is_below(u: ValueVector, v: ValueVector) -> bool:
    """True when u is componentwise less than or equal to v."""
    return pointwise_compare(u, v) in (OrderVerdict.LE, OrderVerdict.EQ)


def pointwise_extremum(family: Sequence[ValueVector], mode: Mode) -> ValueVector:
    """Componentwise maximum or minimum over a nonempty family.

    Realizes the supremum (mode="max") or infimum (mode="min") of the
    family in the pointwise order.
    """
    if mode not in ("max", "min"):
        raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")
    family = list(family)
    if not family:
        raise ValueError("family must be nonempty")
    first = family[0]
    for other in family[1:]:
        _check_dims(first, other)
    stacked = np.stack([v.values for v in family])
    out = stacked.max(axis=0) if mode == "max" else stacked.min(axis=0)
    return ValueVector(out)


def sup_distance(u: ValueVector, v: ValueVector) -> float:
    """Sup-norm distance max_i |u_i - v_i|."""
    _check_dims(u, v)
    return float(np.max(np.abs(u.values - v.values)))


class ProbeVerdict(Enum):
    """Outcome of an order-stability probe at one sample point."""

    UPWARD_OK = "upward_ok"
    DOWNWARD_OK = "downward_ok"
    UPWARD_FAILED = "upward_failed"
    DOWNWARD_FAILED = "downward_failed"
    NOT_APPLICABLE = "not_applicable"


def stability_probe(
    apply_T: Callable[[ValueVector], ValueVector],
    fixed_point: ValueVector,
    sample: ValueVector,
    fp_tol: float = 1e-9,
) -> ProbeVerdict:
    """Probe order stability of an operator at one sample point.

    An operator with unique fixed point v* is upward stable when
    v <= T v implies v <= v*, and downward stable when T v <= v implies
    v* <= v.  The probe classifies ``sample`` by comparing it with its
    image and then checks the relevant inequality against ``fixed_point``.

    Parameters
    ----------
    apply_T : callable
        The operator under probe.
    fixed_point : ValueVector
        Must satisfy sup_distance(T v*, v*) <= fp_tol, else
        :class:`FixedPointError` is raised.
    sample : ValueVector
        A point in the operator's domain.
    fp_tol : float
        Tolerance of the fixed-point precondition (default 1e-9).

    Returns
    -------
    ProbeVerdict
        UPWARD_OK / DOWNWARD_OK when the stability inequality holds,
        the corresponding *_FAILED verdict when it does not, and
        NOT_APPLICABLE when sample and T(sample) are incomparable.
    """
    residual = sup_distance(apply_T(fixed_point), fixed_point)
    if residual > fp_tol:
        raise FixedPointError(
            f"fixed-point check failed: residual {residual:.3e} > tolerance {fp_tol:.3e}"
        )
    t_sample = apply_T(sample)
    relation = pointwise_compare(sample, t_sample)
    if relation in (OrderVerdict.LE, OrderVerdict.EQ):
        if is_below(sample, fixed_point):
            return ProbeVerdict.UPWARD_OK
        return ProbeVerdict.UPWARD_FAILED
    if relation is OrderVerdict.GE:
        if is_below(fixed_point, sample):
            return ProbeVerdict.DOWNWARD_OK
        return ProbeVerdict.DOWNWARD_FAILED
    return ProbeVerdict.NOT_APPLICABLE
