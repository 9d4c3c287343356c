"""Abstract dynamic programs and their solvers.

An abstract dynamic program (ADP) is a family of order-preserving policy
operators ``T_sigma`` acting on a partially ordered value space.  The
fixed point of ``T_sigma`` is the lifetime value of policy ``sigma``;
optimality means extremizing these fixed points over the policy set.

This module provides the instance type plus the generic machinery:
sigma-value solves by successive approximation, greedy selection, the
Bellman max/min step, value iteration, Howard policy iteration, order
duals, and Bellman residuals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Callable, Iterator, Optional

import numpy as np

from .errors import (
    AdpError,
    DimensionMismatchError,
    DivergenceError,
    DomainViolationError,
    NonConvergenceError,
)
from .ordering import Mode, ValueVector, flip_mode, sup_distance

#: Default stopping tolerance for successive approximation.
DEFAULT_TOL = 1e-10
#: Default iteration budget.
DEFAULT_MAX_ITER = 100_000
#: Iterate sup-norms beyond this abort with a not-well-posed signal.
DIVERGENCE_CAP = 1e12
#: On positivity domains, iterates whose minimum entry falls below this
#: floor abort with the same signal (collapse toward the boundary).
POSITIVITY_FLOOR = 1e-8
#: Policy sets larger than this are refused by enumeration-based greedy.
POLICY_ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class AdpInstance:
    """An abstract dynamic program over a finite index set.

    Parameters
    ----------
    apply_policy : callable
        Maps (policy, v) to T_sigma v.  Must be a pure function; policies
        are integer arrays assigning an action index to every state.
    initial_value : ValueVector
        Starting point of successive approximation; must lie in the domain.
    n_states, n_actions : int
        Shape of the policy structure.  The value space dimension can
        differ (e.g. state-action indexed values).
    feasible : ndarray of bool, shape (n_states, n_actions)
        The feasibility correspondence; every row must contain a True.
    decomposable : bool
        True when (T_sigma v)(x) depends on sigma only through sigma(x),
        enabling a per-state argmax in greedy selection.
    positivity_required : bool
        True when the value domain is the strictly positive orthant.
    greedy_fn : callable, optional
        Model-supplied exact greedy selection ``(v, mode) -> policy`` for
        instances (such as state-action indexed ones) where neither the
        per-state argmax nor enumeration is appropriate.
    order_reversed : bool
        True on order duals; flips the meaning of max and min.
    flips_mode_from_source : bool
        Set by conjugation under a decreasing bijection: max problems on
        the source correspond to min problems on this instance.
    """

    apply_policy: Callable[[np.ndarray, ValueVector], ValueVector]
    initial_value: ValueVector
    n_states: int
    n_actions: int
    feasible: np.ndarray
    decomposable: bool
    positivity_required: bool = False
    greedy_fn: Optional[Callable[[ValueVector, Mode], np.ndarray]] = None
    order_reversed: bool = False
    flips_mode_from_source: bool = False
    name: str = ""
    policy_cap: int = POLICY_ENUMERATION_CAP

    def __post_init__(self):
        feas = np.asarray(self.feasible, dtype=bool)
        if feas.shape != (self.n_states, self.n_actions):
            raise DimensionMismatchError(
                f"feasible has shape {feas.shape}, expected "
                f"({self.n_states}, {self.n_actions})"
            )
        if not feas.any(axis=1).all():
            x = int(np.flatnonzero(~feas.any(axis=1))[0])
            raise DomainViolationError(f"state {x} has no feasible action")
        feas = feas.copy()
        feas.setflags(write=False)
        object.__setattr__(self, "feasible", feas)

    @property
    def value_dim(self) -> int:
        return self.initial_value.index_count

    @property
    def n_policies(self) -> int:
        counts = self.feasible.sum(axis=1)
        total = 1
        for c in counts:
            total *= int(c)
        return total

    def check_policy(self, policy: np.ndarray) -> np.ndarray:
        policy = np.asarray(policy, dtype=np.int64)
        if policy.shape != (self.n_states,):
            raise DimensionMismatchError(
                f"policy has shape {policy.shape}, expected ({self.n_states},)"
            )
        if np.any(policy < 0) or np.any(policy >= self.n_actions):
            raise DomainViolationError("policy contains an out-of-range action index")
        bad = ~self.feasible[np.arange(self.n_states), policy]
        if bad.any():
            x = int(np.flatnonzero(bad)[0])
            raise DomainViolationError(
                f"policy assigns infeasible action {int(policy[x])} at state {x}"
            )
        return policy

    def check_domain(self, v: ValueVector) -> None:
        if v.index_count != self.value_dim:
            raise DimensionMismatchError(
                f"value has size {v.index_count}, instance expects {self.value_dim}"
            )
        if self.positivity_required and not np.all(v.values > 0.0):
            raise DomainViolationError("value must be strictly positive on this domain")

    def apply(self, policy: np.ndarray, v: ValueVector) -> ValueVector:
        """Evaluate T_sigma v after validating the policy and domain."""
        policy = self.check_policy(policy)
        self.check_domain(v)
        return self.apply_policy(policy, v)

    def dual(self) -> "AdpInstance":
        """The order dual: same operators, comparison order reversed."""
        return replace(self, order_reversed=not self.order_reversed)


def dual(adp: AdpInstance) -> AdpInstance:
    """Order dual of an ADP; max problems on the dual are min problems here."""
    return adp.dual()


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a fixed-point or optimality solve."""

    value: ValueVector
    policy: Optional[np.ndarray]
    iterations: int
    residual: float
    converged: bool
    mode: Optional[Mode] = None
    history: Optional[tuple[ValueVector, ...]] = None


def enumerate_policies(adp: AdpInstance) -> Iterator[np.ndarray]:
    """All feasible policies in lexicographic order (state 0 most significant)."""
    per_state = [np.flatnonzero(adp.feasible[x]) for x in range(adp.n_states)]
    for combo in itertools.product(*per_state):
        yield np.array(combo, dtype=np.int64)


def _iterate_guard(adp: AdpInstance, v: ValueVector,
                   divergence_cap: float, positivity_floor: float) -> None:
    arr = v.values
    if not np.all(np.isfinite(arr)):
        raise DivergenceError("iterate left the domain (non-finite entries); "
                              "the program appears not well-posed")
    if np.max(np.abs(arr)) > divergence_cap:
        raise DivergenceError(
            f"iterate sup-norm exceeded {divergence_cap:.1e}; "
            "the program appears not well-posed"
        )
    if adp.positivity_required and np.min(arr) < positivity_floor:
        raise DivergenceError(
            f"iterate collapsed below the positivity floor {positivity_floor:.1e}; "
            "the program appears not well-posed"
        )


def sigma_value(
    adp: AdpInstance,
    policy: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    divergence_cap: float = DIVERGENCE_CAP,
    positivity_floor: float = POSITIVITY_FLOOR,
) -> SolveResult:
    """Lifetime value of a policy: the fixed point of its operator.

    Runs successive approximation ``v_{k+1} = T_sigma v_k`` from the
    instance's initial value until the step sup-distance falls to
    ``tol``.  The reported residual is ``sup_distance(T_sigma v, v)`` at
    the returned value.

    Raises
    ------
    NonConvergenceError
        After ``max_iter`` steps without meeting the tolerance (a
        possible sign of ill-posedness).
    DivergenceError
        When iterates blow up past ``divergence_cap`` or, on positivity
        domains, collapse below ``positivity_floor``.  Either abort is
        the numerical signature of a program with no fixed point.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    policy = adp.check_policy(policy)
    v = adp.initial_value
    adp.check_domain(v)
    for k in range(1, max_iter + 1):
        v_next = adp.apply_policy(policy, v)
        _iterate_guard(adp, v_next, divergence_cap, positivity_floor)
        delta = sup_distance(v_next, v)
        v = v_next
        if delta <= tol:
            residual = sup_distance(adp.apply_policy(policy, v), v)
            return SolveResult(
                value=v,
                policy=policy,
                iterations=k,
                residual=residual,
                converged=residual <= tol,
            )
    raise NonConvergenceError(
        f"sigma_value did not converge within {max_iter} iterations "
        f"(last step {delta:.3e} > tol {tol:.3e})"
    )


def _effective_mode(adp: AdpInstance, mode: Mode) -> Mode:
    if mode not in ("max", "min"):
        raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")
    return flip_mode(mode) if adp.order_reversed else mode


def _greedy_decomposable(adp: AdpInstance, v: ValueVector, eff_mode: Mode) -> np.ndarray:
    # T_sigma v at x depends on sigma(x) only, so one evaluation per action
    # (holding a constant action wherever feasible) fills a state-action table.
    n, na = adp.n_states, adp.n_actions
    first_feasible = np.argmax(adp.feasible, axis=1)
    fill = -np.inf if eff_mode == "max" else np.inf
    table = np.full((n, na), fill)
    for a in range(na):
        mask = adp.feasible[:, a]
        if not mask.any():
            continue
        sigma_a = np.where(mask, a, first_feasible)
        u = adp.apply_policy(sigma_a, v).values
        table[mask, a] = u[mask]
    if eff_mode == "max":
        return np.argmax(table, axis=1).astype(np.int64)
    return np.argmin(table, axis=1).astype(np.int64)


def _greedy_enumerate(adp: AdpInstance, v: ValueVector, eff_mode: Mode) -> np.ndarray:
    if adp.n_policies > adp.policy_cap:
        raise AdpError(
            f"policy set has {adp.n_policies} elements, beyond the enumeration "
            f"cap {adp.policy_cap}; provide a greedy_fn or raise policy_cap"
        )
    best = None
    for sigma in enumerate_policies(adp):
        u = adp.apply_policy(sigma, v).values
        if best is None:
            best = u.copy()
        elif eff_mode == "max":
            np.maximum(best, u, out=best)
        else:
            np.minimum(best, u, out=best)
    for sigma in enumerate_policies(adp):
        u = adp.apply_policy(sigma, v).values
        if np.array_equal(u, best):
            return sigma
    raise AdpError(
        "no single policy attains the pointwise extremum; "
        "greedy selection does not exist at this value"
    )


def greedy(adp: AdpInstance, v: ValueVector, mode: Mode) -> np.ndarray:
    """A policy whose operator attains the Bellman extremum at ``v``.

    Ties break toward the lowest action index (decomposable case) or the
    lowest lexicographic policy (enumeration case).
    """
    adp.check_domain(v)
    eff_mode = _effective_mode(adp, mode)
    if adp.greedy_fn is not None:
        return adp.check_policy(adp.greedy_fn(v, eff_mode))
    if adp.decomposable:
        return _greedy_decomposable(adp, v, eff_mode)
    return _greedy_enumerate(adp, v, eff_mode)


def bellman_step(adp: AdpInstance, v: ValueVector, mode: Mode) -> ValueVector:
    """One application of the Bellman max- (or min-) operator."""
    sigma = greedy(adp, v, mode)
    return adp.apply(sigma, v)


def bellman_residual(adp: AdpInstance, v: ValueVector, mode: Mode) -> float:
    """Sup-distance between v and its Bellman image; zero at the fixed point."""
    return sup_distance(bellman_step(adp, v, mode), v)


def value_iteration(
    adp: AdpInstance,
    mode: Mode,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    divergence_cap: float = DIVERGENCE_CAP,
    positivity_floor: float = POSITIVITY_FLOOR,
) -> SolveResult:
    """Successive approximation on the Bellman operator.

    Iterates :func:`bellman_step` from the initial value until the step
    sup-distance falls to ``tol``, then attaches the greedy policy at the
    final value.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    v = adp.initial_value
    adp.check_domain(v)
    for k in range(1, max_iter + 1):
        v_next = bellman_step(adp, v, mode)
        _iterate_guard(adp, v_next, divergence_cap, positivity_floor)
        delta = sup_distance(v_next, v)
        v = v_next
        if delta <= tol:
            sigma = greedy(adp, v, mode)
            residual = sup_distance(adp.apply_policy(sigma, v), v)
            return SolveResult(
                value=v,
                policy=sigma,
                iterations=k,
                residual=residual,
                converged=residual <= tol,
                mode=mode,
            )
    raise NonConvergenceError(
        f"value_iteration did not converge within {max_iter} iterations "
        f"(last step {delta:.3e} > tol {tol:.3e})"
    )


def howard_iteration(
    adp: AdpInstance,
    mode: Mode,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SolveResult:
    """Howard policy iteration: alternate greedy selection and policy solves.

    Each step replaces the current value with the sigma-value of its
    greedy policy.  Terminates when the greedy policy repeats (the
    preferred, float-free rule) or when consecutive values fall within
    ``tol``, which for finite policy sets happens in at most one solve
    per policy.  ``tol`` also controls the inner sigma-value solves.

    Greedy ties are resolved by the lowest-index rule; other designation
    rules can change the iterate path but not the terminal value, which
    is the unique Bellman fixed point.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = adp.initial_value
    adp.check_domain(v)
    sigma_prev: Optional[np.ndarray] = None
    history: list[ValueVector] = []
    solves = 0
    for _ in range(1, max_iter + 1):
        sigma = greedy(adp, v, mode)
        if sigma_prev is not None and np.array_equal(sigma, sigma_prev):
            break
        inner = sigma_value(adp, sigma, tol=tol, max_iter=max_iter)
        solves += 1
        v_new = inner.value
        history.append(v_new)
        stop = sup_distance(v_new, v) <= tol
        v, sigma_prev = v_new, sigma
        if stop:
            break
    else:
        raise NonConvergenceError(
            f"howard_iteration did not terminate within {max_iter} outer steps"
        )
    residual = bellman_residual(adp, v, mode)
    return SolveResult(
        value=v,
        policy=sigma_prev,
        iterations=solves,
        residual=residual,
        converged=residual <= tol,
        mode=mode,
        history=tuple(history),
    )
