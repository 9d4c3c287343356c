"""Monotone scalar bijections and order-conjugate dynamic programs.

A strictly monotone scalar bijection, applied pointwise, carries one
value space onto another.  Conjugating every policy operator by the same
bijection produces a second dynamic program whose solutions map back and
forth exactly; an increasing bijection preserves the sense of
optimization while a decreasing one swaps max and min problems.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, Optional

import numpy as np

from .adp import AdpInstance, SolveResult
from .errors import DomainViolationError
from .ordering import Mode, ValueVector, flip_mode, sup_distance

Interval = Literal["reals", "positive"]

_KINDS = ("power", "exp_affine", "log", "exp_scale", "identity")


@dataclass(frozen=True)
class MonotoneBijection:
    """A strictly monotone scalar bijection with explicit direction.

    Supported kinds and their maps:

    - ``power``:      x -> x**gamma        on (0, inf), gamma != 0
    - ``exp_affine``: x -> exp(m*x + b)    on R, m != 0
    - ``log``:        x -> ln(x)           on (0, inf)
    - ``exp_scale``:  x -> exp(theta*x)    on R, theta != 0
    - ``identity``:   x -> x               on R

    Use the classmethod constructors rather than the raw constructor.
    """

    kind: str
    gamma: Optional[float] = None
    m: Optional[float] = None
    b: Optional[float] = None
    theta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind == "power" and (self.gamma is None or self.gamma == 0.0):
            raise ValueError("power transform requires nonzero gamma")
        if self.kind == "exp_affine" and (self.m is None or self.m == 0.0 or self.b is None):
            raise ValueError("exp_affine transform requires nonzero m and a b")
        if self.kind == "exp_scale" and (self.theta is None or self.theta == 0.0):
            raise ValueError("exp_scale transform requires nonzero theta")

    # -- constructors -------------------------------------------------
    @classmethod
    def power(cls, gamma: float) -> "MonotoneBijection":
        return cls(kind="power", gamma=float(gamma))

    @classmethod
    def exp_affine(cls, m: float, b: float) -> "MonotoneBijection":
        return cls(kind="exp_affine", m=float(m), b=float(b))

    @classmethod
    def log(cls) -> "MonotoneBijection":
        return cls(kind="log")

    @classmethod
    def exp_scale(cls, theta: float) -> "MonotoneBijection":
        return cls(kind="exp_scale", theta=float(theta))

    @classmethod
    def identity(cls) -> "MonotoneBijection":
        return cls(kind="identity")

    # -- structure ----------------------------------------------------
    @property
    def increasing(self) -> bool:
        if self.kind == "power":
            return self.gamma > 0
        if self.kind == "exp_affine":
            return self.m > 0
        if self.kind == "exp_scale":
            return self.theta > 0
        return True  # log, identity

    @property
    def domain(self) -> Interval:
        return "positive" if self.kind in ("power", "log") else "reals"

    @property
    def codomain(self) -> Interval:
        if self.kind in ("power", "exp_affine", "exp_scale"):
            return "positive"
        if self.kind == "log":
            return "reals"
        return "reals"

    # -- evaluation ---------------------------------------------------
    def _check(self, arr: np.ndarray, interval: Interval, what: str) -> None:
        if interval == "positive" and not np.all(arr > 0.0):
            raise DomainViolationError(
                f"{what} of the {self.kind} transform requires strictly "
                "positive entries"
            )

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        self._check(x, self.domain, "domain")
        if self.kind == "power":
            return np.exp(self.gamma * np.log(x))
        if self.kind == "exp_affine":
            return np.exp(self.m * x + self.b)
        if self.kind == "log":
            return np.log(x)
        if self.kind == "exp_scale":
            return np.exp(self.theta * x)
        return x.copy()

    def inverse(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        self._check(y, self.codomain, "codomain")
        if self.kind == "power":
            return np.exp(np.log(y) / self.gamma)
        if self.kind == "exp_affine":
            return (np.log(y) - self.b) / self.m
        if self.kind == "log":
            return np.exp(y)
        if self.kind == "exp_scale":
            return np.log(y) / self.theta
        return y.copy()

    def derivative(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "power":
            return self.gamma * np.exp((self.gamma - 1.0) * np.log(x))
        if self.kind == "exp_affine":
            return self.m * np.exp(self.m * x + self.b)
        if self.kind == "log":
            return 1.0 / x
        if self.kind == "exp_scale":
            return self.theta * np.exp(self.theta * x)
        return np.ones_like(x)

    def lipschitz_bound(self, lo: float, hi: float) -> float:
        """Max |F'| over [lo, hi]; |F'| is monotone for every kind, so the
        bound is attained at an endpoint."""
        return float(max(abs(self.derivative(np.float64(lo))),
                         abs(self.derivative(np.float64(hi)))))

    # -- wire format ---------------------------------------------------
    def to_descriptor(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "gamma": self.gamma}
        if self.kind == "exp_affine":
            return {"kind": "exp_affine", "m": self.m, "b": self.b}
        if self.kind == "exp_scale":
            return {"kind": "exp_scale", "theta": self.theta}
        return {"kind": self.kind}

    @classmethod
    def from_descriptor(cls, d: dict) -> "MonotoneBijection":
        kind = d.get("kind")
        if kind == "power":
            return cls.power(d["gamma"])
        if kind == "exp_affine":
            return cls.exp_affine(d["m"], d["b"])
        if kind == "log":
            return cls.log()
        if kind == "exp_scale":
            return cls.exp_scale(d["theta"])
        if kind == "identity":
            return cls.identity()
        raise ValueError(f"unknown transform descriptor kind {kind!r}")


def classify_transform(F: MonotoneBijection) -> str:
    """"isomorphism" for increasing F, "anti_isomorphism" for decreasing F."""
    return "isomorphism" if F.increasing else "anti_isomorphism"


def apply_transform(F: MonotoneBijection, v: ValueVector) -> ValueVector:
    """Lift F pointwise: (F v)_i = F(v_i)."""
    out = F.forward(v.values)
    return ValueVector(out, positivity_required=F.codomain == "positive")


def invert_transform(F: MonotoneBijection, w: ValueVector) -> ValueVector:
    """Pointwise inverse; round-trips with :func:`apply_transform`."""
    out = F.inverse(w.values)
    return ValueVector(out, positivity_required=F.domain == "positive")


def conjugate_adp(adp: AdpInstance, F: MonotoneBijection) -> AdpInstance:
    """The dynamic program with every operator conjugated by F.

    The returned instance applies ``F o T_sigma o F^{-1}``; its domain is
    the image of the source domain under F.  When F is decreasing the
    instance records (via ``flips_mode_from_source``) that max problems
    on the source correspond to min problems on it.
    """
    if not adp.positivity_required and F.domain == "positive":
        raise DomainViolationError(
            f"the {F.kind} transform is defined on positives only and cannot "
            "conjugate an instance whose domain is the whole space"
        )

    def conj_apply(policy: np.ndarray, w: ValueVector) -> ValueVector:
        inner = invert_transform(F, w)
        return apply_transform(F, adp.apply_policy(policy, inner))

    conj_greedy = None
    if adp.greedy_fn is not None:
        source_greedy = adp.greedy_fn

        def conj_greedy(w: ValueVector, mode: Mode) -> np.ndarray:
            inner_mode = mode if F.increasing else flip_mode(mode)
            return source_greedy(invert_transform(F, w), inner_mode)

    return replace(
        adp,
        apply_policy=conj_apply,
        initial_value=apply_transform(F, adp.initial_value),
        positivity_required=F.codomain == "positive",
        greedy_fn=conj_greedy,
        flips_mode_from_source=not F.increasing,
        name=f"conj({adp.name or 'adp'},{F.kind})",
    )


@dataclass(frozen=True)
class ConjugacyReport:
    """Result of a sampled check of F o T_sigma = T_hat_sigma o F."""

    max_deviation: float
    samples_checked: int
    samples_skipped: int
    classification: str  # "isomorphic" | "anti_isomorphic" | "failed"
    tolerance: float


def verify_conjugacy(
    adp_a: AdpInstance,
    adp_b: AdpInstance,
    F: MonotoneBijection,
    n_samples: int = 100,
    seed: int = 0,
    tol: float = 1e-9,
    sample_box: Optional[tuple[float, float]] = None,
) -> ConjugacyReport:
    """Sample random (policy, value) pairs and measure the conjugacy defect.

    For each sample the deviation is
    ``sup | F(T_sigma v) - T_hat_sigma(F v) |``; the report carries the
    maximum over samples.  Samples that violate either domain are skipped
    and counted.  Classification is "failed" when the maximum deviation
    exceeds ``tol``, otherwise "isomorphic"/"anti_isomorphic" according
    to the direction of F.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if adp_a.value_dim != adp_b.value_dim:
        raise DomainViolationError(
            f"instances have value dimensions {adp_a.value_dim} and {adp_b.value_dim}"
        )
    if adp_a.n_states != adp_b.n_states or not np.array_equal(adp_a.feasible, adp_b.feasible):
        raise DomainViolationError("instances must share the same policy structure")
    if sample_box is None:
        sample_box = (0.1, 10.0) if adp_a.positivity_required else (-5.0, 5.0)
    lo, hi = sample_box
    rng = np.random.default_rng(seed)
    dim = adp_a.value_dim
    n_states = adp_a.n_states
    feasible_lists = [np.flatnonzero(adp_a.feasible[x]) for x in range(n_states)]

    max_dev = 0.0
    checked = 0
    skipped = 0
    for _ in range(n_samples):
        draw = rng.uniform(lo, hi, size=dim)
        sigma = np.array([feasible_lists[x][rng.integers(len(feasible_lists[x]))]
                          for x in range(n_states)], dtype=np.int64)
        try:
            v = ValueVector(draw, positivity_required=adp_a.positivity_required)
            lhs = apply_transform(F, adp_a.apply(sigma, v))
            rhs = adp_b.apply(sigma, apply_transform(F, v))
        except DomainViolationError:
            skipped += 1
            continue
        max_dev = max(max_dev, sup_distance(lhs, rhs))
        checked += 1
    if checked == 0:
        classification = "failed"
    elif max_dev > tol:
        classification = "failed"
    else:
        classification = "isomorphic" if F.increasing else "anti_isomorphic"
    return ConjugacyReport(
        max_deviation=max_dev,
        samples_checked=checked,
        samples_skipped=skipped,
        classification=classification,
        tolerance=tol,
    )


def transfer_solution(F: MonotoneBijection, result: SolveResult) -> SolveResult:
    """Carry a solve across the conjugacy: value through F, policy fixed.

    Greedy/optimal policies are invariant under conjugation, so the
    policy passes through unchanged; the mode flag flips max and min when
    F is decreasing.  The residual is scaled by a local Lipschitz bound
    of F on the value's range, which bounds the conjugate-side residual
    of the transferred fixed point.
    """
    value = apply_transform(F, result.value)
    lo = float(np.min(result.value.values))
    hi = float(np.max(result.value.values))
    lip = F.lipschitz_bound(lo, hi)
    mode = result.mode
    if mode is not None and not F.increasing:
        mode = flip_mode(mode)
    return SolveResult(
        value=value,
        policy=result.policy,
        iterations=result.iterations,
        residual=result.residual * lip,
        converged=result.converged,
        mode=mode,
        history=None,
    )
