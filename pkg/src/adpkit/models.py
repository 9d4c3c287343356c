"""Finite-state model constructors and the recursive-utility stability test.

Each constructor validates its primitives and returns an
:class:`~adpkit.adp.AdpInstance` whose ``apply_policy`` closure evaluates
the model's policy operator:

- plain discounted MDPs (additive expected rewards),
- risk-sensitive MDPs (entropic certainty equivalent, parameter theta),
- state-action (Q-factor) variants: plain, risk-sensitive, exponential,
- Epstein-Zin recursive utility, in original and power-transformed form,
- multiplicative Kreps-Porteus (MKP) programs, plus the additive
  Kreps-Porteus operator as a constructor with no optimality guarantee.

The module also houses the stability coefficient for Epstein-Zin
programs with exogenous time-preference shocks: the spectral radius of
``A(z, z') = beta(z)**theta * Q(z, z')``, whose theta-th root being
below one exactly characterizes well-posedness and max-stability.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.special import logsumexp

from .adp import AdpInstance
from .errors import ModelValidationError
from .ordering import Mode, ValueVector
from .transforms import MonotoneBijection

_IRREDUCIBILITY_ENUM_CAP = 4096


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteMDP:
    """Finite decision process primitives.

    Parameters
    ----------
    n_states, n_actions : int
    feasible : (n_states, n_actions) bool
        The feasibility correspondence; every state needs one feasible action.
    reward : (n_states, n_actions) float
        Read only at feasible pairs.
    beta : float or (n_states,) float
        Scalar discount in [0, 1), or a strictly positive per-state vector
        (recursive-utility use; values above one are then meaningful).
    P : (n_states, n_actions, n_states) float
        Transition probabilities; every feasible row must be a distribution.
    """

    n_states: int
    n_actions: int
    feasible: np.ndarray
    reward: np.ndarray
    beta: Union[float, np.ndarray]
    P: np.ndarray

    def __post_init__(self):
        n, na = self.n_states, self.n_actions
        if n < 1 or na < 1:
            raise ModelValidationError("n_states and n_actions must be positive")
        feas = np.asarray(self.feasible, dtype=bool)
        if feas.shape != (n, na):
            raise ModelValidationError(
                f"feasible has shape {feas.shape}, expected {(n, na)}")
        no_action = ~feas.any(axis=1)
        if no_action.any():
            x = int(np.flatnonzero(no_action)[0])
            raise ModelValidationError(f"state {x} has no feasible action")
        r = np.asarray(self.reward, dtype=np.float64)
        if r.shape != (n, na):
            raise ModelValidationError(
                f"reward has shape {r.shape}, expected {(n, na)}")
        if not np.all(np.isfinite(r[feas])):
            raise ModelValidationError("reward has non-finite feasible entries")
        P = np.asarray(self.P, dtype=np.float64)
        if P.shape != (n, na, n):
            raise ModelValidationError(
                f"P has shape {P.shape}, expected {(n, na, n)}")
        if np.any(P[feas] < 0.0):
            x, a = self._first_bad_pair(feas, (P < 0.0).any(axis=2))
            raise ModelValidationError(f"P({x},{a},.) has a negative entry")
        sums = P.sum(axis=2)
        bad = feas & (np.abs(sums - 1.0) > 1e-12)
        if bad.any():
            x, a = self._first_bad_pair(feas, np.abs(sums - 1.0) > 1e-12)
            raise ModelValidationError(
                f"P({x},{a},.) sums to {sums[x, a]:.12g}, not 1 within 1e-12")
        if np.isscalar(self.beta) or np.asarray(self.beta).ndim == 0:
            b = float(self.beta)
            if not (0.0 <= b < 1.0):
                raise ModelValidationError(
                    f"scalar beta must lie in [0, 1), got {b}")
            object.__setattr__(self, "beta", b)
        else:
            b = np.asarray(self.beta, dtype=np.float64)
            if b.shape != (n,):
                raise ModelValidationError(
                    f"beta vector has shape {b.shape}, expected {(n,)}")
            if not np.all(b > 0.0):
                raise ModelValidationError("per-state beta must be strictly positive")
            b = b.copy()
            b.setflags(write=False)
            object.__setattr__(self, "beta", b)
        for name, arr in (("feasible", feas), ("reward", r), ("P", P)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @staticmethod
    def _first_bad_pair(feas: np.ndarray, bad: np.ndarray) -> tuple[int, int]:
        xs, as_ = np.nonzero(feas & bad)
        return int(xs[0]), int(as_[0])

    @property
    def beta_vector(self) -> np.ndarray:
        if np.isscalar(self.beta):
            return np.full(self.n_states, float(self.beta))
        return np.asarray(self.beta)

    def r_sigma(self, policy: np.ndarray) -> np.ndarray:
        idx = np.arange(self.n_states)
        return self.reward[idx, policy]

    def P_sigma(self, policy: np.ndarray) -> np.ndarray:
        idx = np.arange(self.n_states)
        return self.P[idx, policy, :]


def _require_scalar_beta(m: FiniteMDP, who: str) -> float:
    if not np.isscalar(m.beta):
        raise ModelValidationError(f"{who} requires a scalar discount factor")
    return float(m.beta)


def _require_positive_reward(m: FiniteMDP, who: str) -> None:
    if np.any(m.reward[m.feasible] <= 0.0):
        x, a = FiniteMDP._first_bad_pair(m.feasible, m.reward <= 0.0)
        raise ModelValidationError(
            f"{who} requires strictly positive rewards; r({x},{a}) = "
            f"{m.reward[x, a]:.6g}")


# ---------------------------------------------------------------------------
# additive and risk-sensitive MDPs
# ---------------------------------------------------------------------------

def make_mdp_adp(m: FiniteMDP) -> AdpInstance:
    """Discounted MDP: (T_sigma v)(x) = r(x, sigma(x)) + beta * E_sigma v."""
    beta = m.beta_vector if not np.isscalar(m.beta) else float(m.beta)

    def apply_policy(policy: np.ndarray, v: ValueVector) -> ValueVector:
        out = m.r_sigma(policy) + beta * (m.P_sigma(policy) @ v.values)
        return ValueVector(out)

    return AdpInstance(
        apply_policy=apply_policy,
        initial_value=ValueVector(np.zeros(m.n_states)),
        n_states=m.n_states,
        n_actions=m.n_actions,
        feasible=m.feasible,
        decomposable=True,
        name="mdp",
    )


def mdp_sigma_value_exact(m: FiniteMDP, policy: np.ndarray) -> ValueVector:
    """Policy value by direct linear solve of (I - beta P_sigma) v = r_sigma.

    Serves as the oracle for the iterative sigma-value path.
    """
    beta = _require_scalar_beta(m, "mdp_sigma_value_exact")
    policy = np.asarray(policy, dtype=np.int64)
    P_s = m.P_sigma(policy)
    r_s = m.r_sigma(policy)
    A = np.eye(m.n_states) - beta * P_s
    v = np.linalg.solve(A, r_s)
    check = np.max(np.abs(A @ v - r_s))
    if check > 1e-8:
        raise ModelValidationError(
            f"linear solve residual {check:.3e} exceeds 1e-8; system near-singular")
    return ValueVector(v)


def make_rs_adp(m: FiniteMDP, theta: float) -> AdpInstance:
    """Risk-sensitive MDP with entropic certainty equivalent.

    (T_sigma v)(x) = r_sigma(x)
                     + (beta/theta) ln E_sigma[exp(theta v)](x),
    evaluated with max-subtraction for numerical stability.
    """
    if theta == 0.0:
        raise ModelValidationError("risk-sensitive theta must be nonzero")
    beta = _require_scalar_beta(m, "make_rs_adp")

    def apply_policy(policy: np.ndarray, v: ValueVector) -> ValueVector:
        P_s = m.P_sigma(policy)
        lse = logsumexp(theta * v.values[None, :], b=P_s, axis=1)
        out = m.r_sigma(policy) + (beta / theta) * lse
        return ValueVector(out)

    return AdpInstance(
        apply_policy=apply_policy,
        initial_value=ValueVector(np.zeros(m.n_states)),
        n_states=m.n_states,
        n_actions=m.n_actions,
        feasible=m.feasible,
        decomposable=True,
        name=f"risk_sensitive(theta={theta:g})",
    )


# ---------------------------------------------------------------------------
# Q-factor variants (values indexed by feasible state-action pairs)
# ---------------------------------------------------------------------------

QFactorVariant = Literal["plain", "risk_sensitive", "exponential"]


@dataclass(frozen=True)
class QFactorLayout:
    """Row-major enumeration of the feasible state-action pairs."""

    pairs: np.ndarray       # (n_pairs, 2) int
    pair_index: np.ndarray  # (n_states, n_actions) int, -1 where infeasible

    @classmethod
    def from_mdp(cls, m: FiniteMDP) -> "QFactorLayout":
        pair_index = np.full((m.n_states, m.n_actions), -1, dtype=np.int64)
        pairs = []
        for x in range(m.n_states):
            for a in range(m.n_actions):
                if m.feasible[x, a]:
                    pair_index[x, a] = len(pairs)
                    pairs.append((x, a))
        return cls(pairs=np.array(pairs, dtype=np.int64), pair_index=pair_index)

    @property
    def n_pairs(self) -> int:
        return self.pairs.shape[0]


def make_qfactor_adp(
    m: FiniteMDP,
    variant: QFactorVariant = "plain",
    theta: Optional[float] = None,
) -> AdpInstance:
    """State-action valued program in one of three flavors.

    plain:           (Q_sigma f)(x,a) = r + beta * E[f(x', sigma(x'))]
    risk_sensitive:  entropic aggregation of f(x', sigma(x')) with theta
    exponential:     (M_sigma h)(x,a) = exp(theta r + beta ln E[h(x', sigma(x'))])
                     on the strictly positive orthant

    Greedy selection for every variant reduces to a per-state argmax (or
    argmin) of the current value over feasible pairs, because each
    operator is monotone in the successor evaluations separately.
    """
    if variant not in ("plain", "risk_sensitive", "exponential"):
        raise ModelValidationError(f"unknown qfactor variant {variant!r}")
    if variant in ("risk_sensitive", "exponential"):
        if theta is None or theta == 0.0:
            raise ModelValidationError(f"{variant} qfactor requires nonzero theta")
    beta = _require_scalar_beta(m, "make_qfactor_adp")
    layout = QFactorLayout.from_mdp(m)
    P_G = m.P[layout.pairs[:, 0], layout.pairs[:, 1], :]   # (n_pairs, n_states)
    r_G = m.reward[layout.pairs[:, 0], layout.pairs[:, 1]]
    state_idx = np.arange(m.n_states)

    def successor_values(policy: np.ndarray, f: np.ndarray) -> np.ndarray:
        return f[layout.pair_index[state_idx, policy]]

    if variant == "plain":
        def apply_policy(policy: np.ndarray, v: ValueVector) -> ValueVector:
            s = successor_values(policy, v.values)
            return ValueVector(r_G + beta * (P_G @ s))
        initial = ValueVector(np.zeros(layout.n_pairs))
        positive = False
    elif variant == "risk_sensitive":
        def apply_policy(policy: np.ndarray, v: ValueVector) -> ValueVector:
            s = successor_values(policy, v.values)
            lse = logsumexp(theta * s[None, :], b=P_G, axis=1)
            return ValueVector(r_G + (beta / theta) * lse)
        initial = ValueVector(np.zeros(layout.n_pairs))
        positive = False
    else:
        def apply_policy(policy: np.ndarray, v: ValueVector) -> ValueVector:
            s = successor_values(policy, v.values)
            out = np.exp(theta * r_G + beta * np.log(P_G @ s))
            return ValueVector(out)
        initial = ValueVector(np.ones(layout.n_pairs), positivity_required=True)
        positive = True

    def greedy_fn(v: ValueVector, eff_mode: Mode) -> np.ndarray:
        fill = -np.inf if eff_mode == "max" else np.inf
        table = np.full((m.n_states, m.n_actions), fill)
        table[layout.pairs[:, 0], layout.pairs[:, 1]] = v.values
        if eff_mode == "max":
            return np.argmax(table, axis=1).astype(np.int64)
        return np.argmin(table, axis=1).astype(np.int64)

    return AdpInstance(
        apply_policy=apply_policy,
        initial_value=initial,
        n_states=m.n_states,
        n_actions=m.n_actions,
        feasible=m.feasible,
        decomposable=False,
        positivity_required=positive,
        greedy_fn=greedy_fn,
        name=f"qfactor({variant})",
    )


def qfactor_layout(m: FiniteMDP) -> QFactorLayout:
    """Expose the pair enumeration used by :func:`make_qfactor_adp`."""
    return QFactorLayout.from_mdp(m)


def qfactor_max_projection(m: FiniteMDP, f: ValueVector, mode: Mode = "max") -> ValueVector:
    """Project a state-action value onto states: v(x) = max_a f(x, a)."""
    layout = QFactorLayout.from_mdp(m)
    fill = -np.inf if mode == "max" else np.inf
    table = np.full((m.n_states, m.n_actions), fill)
    table[layout.pairs[:, 0], layout.pairs[:, 1]] = f.values
    out = table.max(axis=1) if mode == "max" else table.min(axis=1)
    return ValueVector(out)


# ---------------------------------------------------------------------------
# Epstein-Zin recursive utility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExogenousBlock:
    """Product structure: an exogenous chain driving the time-preference rate.

    The state factors as x = (y, z) with x = y * n_z + z, transition
    P(x, a, x') = R(y, a, y') Q(z, z'), and beta(x) = beta_z(z).
    """

    Q: np.ndarray
    beta_z: np.ndarray
    R: Optional[np.ndarray] = None

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=np.float64)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ModelValidationError(f"Q must be square, got shape {Q.shape}")
        if np.any(Q < 0.0) or np.any(np.abs(Q.sum(axis=1) - 1.0) > 1e-12):
            raise ModelValidationError("Q must be row-stochastic within 1e-12")
        bz = np.asarray(self.beta_z, dtype=np.float64)
        if bz.shape != (Q.shape[0],):
            raise ModelValidationError(
                f"beta_z has shape {bz.shape}, expected {(Q.shape[0],)}")
        if not np.all(bz > 0.0):
            raise ModelValidationError("beta_z must be strictly positive")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "beta_z", bz)
        if self.R is not None:
            object.__setattr__(self, "R", np.asarray(self.R, dtype=np.float64))

    @property
    def n_z(self) -> int:
        return self.Q.shape[0]


@dataclass(frozen=True)
class EZParams:
    """Preference parameters: alpha (substitution), gamma (risk), theta = gamma/alpha."""

    alpha: float
    gamma: float
    exogenous: Optional[ExogenousBlock] = None

    def __post_init__(self):
        if self.alpha == 0.0 or self.gamma == 0.0:
            raise ModelValidationError("alpha and gamma must be nonzero")

    @property
    def theta(self) -> float:
        return self.gamma / self.alpha


def _check_irreducible(m: FiniteMDP, skip: bool) -> None:
    counts = m.feasible.sum(axis=1)
    n_policies = 1
    for c in counts:
        n_policies *= int(c)
    if skip:
        warnings.warn(
            "skipping the per-policy irreducibility check; recursive-utility "
            "results assume every P_sigma is irreducible", stacklevel=3)
        return
    if n_policies > _IRREDUCIBILITY_ENUM_CAP:
        raise ModelValidationError(
            f"irreducibility check would enumerate {n_policies} policies "
            f"(cap {_IRREDUCIBILITY_ENUM_CAP}); pass skip_irreducibility=True "
            "to proceed without it")
    per_state = [np.flatnonzero(m.feasible[x]) for x in range(m.n_states)]
    for combo in itertools.product(*per_state):
        policy = np.array(combo, dtype=np.int64)
        support = sparse.csr_matrix(m.P_sigma(policy) > 0.0)
        n_comp, _ = connected_components(support, directed=True, connection="strong")
        if n_comp != 1:
            raise ModelValidationError(
                f"P_sigma is reducible for policy {policy.tolist()}; "
                "recursive-utility constructions reject reducible chains")


def _pospow(base: np.ndarray, expo: float) -> np.ndarray:
    # powers on the positive orthant via exp/log, robust for large |expo|
    return np.exp(expo * np.log(base))


def make_ez_adp(
    m: FiniteMDP,
    p: EZParams,
    form: Literal["original", "transformed"] = "original",
    skip_irreducibility: bool = False,
) -> AdpInstance:
    """Recursive-utility program on the strictly positive orthant.

    original:     T_sigma v = {r^alpha + beta * (E_sigma v^gamma)^(alpha/gamma)}^(1/alpha)
    transformed:  T_sigma v = {r^alpha + beta * (E_sigma v)^(1/theta)}^theta

    The two are conjugate under the pointwise power v -> v**gamma, which
    is order-preserving for gamma > 0 and order-reversing for gamma < 0.
    """
    if form not in ("original", "transformed"):
        raise ModelValidationError(f"unknown EZ form {form!r}")
    _require_positive_reward(m, "make_ez_adp")
    _check_irreducible(m, skip_irreducibility)
    alpha, gamma = p.alpha, p.gamma
    theta = p.theta
    beta_x = m.beta_vector
    if not np.all(beta_x > 0.0):
        raise ModelValidationError("make_ez_adp requires strictly positive beta")

    if form == "original":
        def apply_policy(policy: np.ndarray, v: ValueVector) -> ValueVector:
            r_s = m.r_sigma(policy)
            inner = m.P_sigma(policy) @ _pospow(v.values, gamma)
            base = _pospow(r_s, alpha) + beta_x * _pospow(inner, alpha / gamma)
            return ValueVector(_pospow(base, 1.0 / alpha))
    else:
        def apply_policy(policy: np.ndarray, v: ValueVector) -> ValueVector:
            r_s = m.r_sigma(policy)
            inner = m.P_sigma(policy) @ v.values
            base = _pospow(r_s, alpha) + beta_x * _pospow(inner, 1.0 / theta)
            return ValueVector(_pospow(base, theta))

    return AdpInstance(
        apply_policy=apply_policy,
        initial_value=ValueVector(np.ones(m.n_states), positivity_required=True),
        n_states=m.n_states,
        n_actions=m.n_actions,
        feasible=m.feasible,
        decomposable=True,
        positivity_required=True,
        name=f"epstein_zin({form},alpha={alpha:g},gamma={gamma:g})",
    )


@dataclass(frozen=True)
class EZStabilityDiagnostics:
    """Growth coefficient of discounted theta-powers and the stability verdict."""

    E_value: float
    root: float
    method: str            # "spectral" | "limit"
    k_used: int
    verdict: str           # "max_stable" | "not_well_posed"

    @property
    def max_stable(self) -> bool:
        return self.verdict == "max_stable"


def _limit_estimate(A: np.ndarray, k: int) -> tuple[float, int]:
    """{max_z (A^k 1)(z)}^(1/k) with renormalization; exact k for small k,
    next power of two via repeated squaring for large k."""
    nz = A.shape[0]
    if k <= 4096:
        w = np.ones(nz)
        logscale = 0.0
        for _ in range(k):
            w = A @ w
            s = float(w.max())
            logscale += np.log(s)
            w = w / s
        return float(np.exp(logscale / k)), k
    m_pow = int(np.ceil(np.log2(k)))
    B = A.copy()
    logscale = 0.0
    for _ in range(m_pow):
        s = float(np.abs(B).max())
        B = B / s
        logscale = 2.0 * (logscale + np.log(s))
        B = B @ B
    k_eff = 2 ** m_pow
    w = B @ np.ones(nz)
    return float(np.exp((logscale + np.log(float(w.max()))) / k_eff)), k_eff


def ez_stability_coefficient(
    beta_z: np.ndarray,
    Q: np.ndarray,
    theta: float,
    method: Literal["spectral", "limit"] = "spectral",
    k_max: int = 200,
    power_tol: float = 1e-12,
    max_power_iter: int = 20_000,
) -> EZStabilityDiagnostics:
    """Long-run growth coefficient of discounted theta-powers of the shock chain.

    The coefficient equals the spectral radius of
    ``A(z, z') = beta_z(z)**theta * Q(z, z')``.

    method="spectral"
        Power iteration on A from the all-ones vector, estimating the
        radius by the sup-norm ratio, until the relative change falls
        below ``power_tol``.  If the ratio fails to settle (possible for
        periodic chains) the truncated-limit formula at a large power of
        two is used instead and recorded as such.
    method="limit"
        The k-th root of max_z (A^k 1)(z) at k = ``k_max``; exact matrix
        powers via repeated squaring when ``k_max`` is large.  The
        estimate carries an O(1/k) bias, so cross-method agreement at
        tight tolerances needs a large ``k_max``.

    The verdict is "max_stable" exactly when the theta-th root of the
    coefficient is strictly below one.
    """
    if theta == 0.0:
        raise ModelValidationError("theta must be nonzero")
    block = ExogenousBlock(Q=Q, beta_z=beta_z)   # validates stochasticity
    A = (block.beta_z ** theta)[:, None] * block.Q

    if method == "spectral":
        w = np.ones(block.n_z)
        lam_prev = np.inf
        converged = False
        k_used = 0
        for it in range(1, max_power_iter + 1):
            w2 = A @ w
            lam = float(w2.max())
            k_used = it
            if abs(lam - lam_prev) <= power_tol * max(1.0, abs(lam)):
                converged = True
                break
            lam_prev = lam
            w = w2 / lam
        if converged:
            E = lam
            used_method = "spectral"
        else:
            E, k_used = _limit_estimate(A, 2 ** 21)
            used_method = "limit"
    elif method == "limit":
        if k_max < 1:
            raise ModelValidationError("k_max must be at least 1")
        E, k_used = _limit_estimate(A, k_max)
        used_method = "limit"
    else:
        raise ModelValidationError(f"unknown method {method!r}")

    root = float(np.exp(np.log(E) / theta))
    verdict = "max_stable" if root < 1.0 else "not_well_posed"
    return EZStabilityDiagnostics(
        E_value=float(E), root=root, method=used_method,
        k_used=k_used, verdict=verdict,
    )


def ez_stability_check(m: FiniteMDP, p: EZParams) -> EZStabilityDiagnostics:
    """Stability test for a recursive-utility program with product structure.

    Requires the exogenous block; validates that the process primitives
    are consistent with it (beta depends on the state only through the
    exogenous component, and P factors as R x Q when R is supplied).
    """
    if p.exogenous is None:
        raise ModelValidationError(
            "ez_stability_check requires the exogenous product structure "
            "(Q and beta_z); the exact test is defined only for it")
    block = p.exogenous
    n_z = block.n_z
    if m.n_states % n_z != 0:
        raise ModelValidationError(
            f"n_states = {m.n_states} is not a multiple of n_z = {n_z}")
    beta_x = m.beta_vector
    expected = np.tile(block.beta_z, m.n_states // n_z)
    if np.max(np.abs(beta_x - expected)) > 1e-12:
        raise ModelValidationError(
            "per-state beta is inconsistent with beta_z under the layout "
            "x = y * n_z + z")
    if block.R is not None:
        n_y = m.n_states // n_z
        R = block.R
        if R.shape != (n_y, m.n_actions, n_y):
            raise ModelValidationError(
                f"R has shape {R.shape}, expected {(n_y, m.n_actions, n_y)}")
        P_built = np.einsum("yaw,zu->yzawu", R, block.Q).reshape(m.P.shape)
        diff = np.abs(P_built - m.P)[m.feasible]
        if diff.size and diff.max() > 1e-12:
            raise ModelValidationError(
                "P does not factor as R x Q under the layout x = y * n_z + z")
    return ez_stability_coefficient(block.beta_z, block.Q, p.theta)


def make_product_mdp(
    R: np.ndarray,
    Q: np.ndarray,
    beta_z: np.ndarray,
    reward: np.ndarray,
    feasible_y: Optional[np.ndarray] = None,
) -> FiniteMDP:
    """Assemble the product process x = (y, z), x = y * n_z + z.

    ``R`` is the controllable kernel over y, ``Q`` the exogenous chain
    over z, and ``beta_z`` the per-z time preference.  ``reward`` may be
    (n_y, n_actions), broadcast across z, or fully state-indexed.
    """
    block = ExogenousBlock(Q=Q, beta_z=beta_z, R=R)
    R = np.asarray(R, dtype=np.float64)
    if R.ndim != 3 or R.shape[0] != R.shape[2]:
        raise ModelValidationError(f"R must have shape (n_y, n_a, n_y), got {R.shape}")
    n_y, n_a, _ = R.shape
    n_z = block.n_z
    n = n_y * n_z
    reward = np.asarray(reward, dtype=np.float64)
    if reward.shape == (n_y, n_a):
        reward_full = np.repeat(reward, n_z, axis=0)
    elif reward.shape == (n, n_a):
        reward_full = reward
    else:
        raise ModelValidationError(
            f"reward has shape {reward.shape}, expected {(n_y, n_a)} or {(n, n_a)}")
    if feasible_y is None:
        feasible_y = np.ones((n_y, n_a), dtype=bool)
    feasible_y = np.asarray(feasible_y, dtype=bool)
    if feasible_y.shape != (n_y, n_a):
        raise ModelValidationError(
            f"feasible_y has shape {feasible_y.shape}, expected {(n_y, n_a)}")
    feasible = np.repeat(feasible_y, n_z, axis=0)
    P = np.einsum("yaw,zu->yzawu", R, block.Q).reshape(n, n_a, n)
    beta = np.tile(block.beta_z, n_y)
    return FiniteMDP(n_states=n, n_actions=n_a, feasible=feasible,
                     reward=reward_full, beta=beta, P=P)


# ---------------------------------------------------------------------------
# Kreps-Porteus variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MKPParams:
    """Multiplicative Kreps-Porteus parameters."""

    nu: float
    beta: float

    def __post_init__(self):
        if self.nu == 0.0:
            raise ModelValidationError("nu must be nonzero")
        if not (0.0 <= self.beta < 1.0):
            raise ModelValidationError(f"beta must lie in [0, 1), got {self.beta}")


def make_mkp_adp(m: FiniteMDP, p: MKPParams) -> AdpInstance:
    """Multiplicative Kreps-Porteus program on the positive orthant.

    (M_sigma v)(x) = r_sigma(x) * {E_sigma[v^nu](x)}^(beta/nu)
    """
    _require_positive_reward(m, "make_mkp_adp")
    nu, beta = p.nu, p.beta

    def apply_policy(policy: np.ndarray, v: ValueVector) -> ValueVector:
        inner = m.P_sigma(policy) @ _pospow(v.values, nu)
        out = m.r_sigma(policy) * _pospow(inner, beta / nu)
        return ValueVector(out)

    return AdpInstance(
        apply_policy=apply_policy,
        initial_value=ValueVector(np.ones(m.n_states), positivity_required=True),
        n_states=m.n_states,
        n_actions=m.n_actions,
        feasible=m.feasible,
        decomposable=True,
        positivity_required=True,
        name=f"mkp(nu={nu:g},beta={beta:g})",
    )


def make_kp_adp(m: FiniteMDP, p: MKPParams) -> AdpInstance:
    """Additive Kreps-Porteus operator r + beta * (E v^nu)^(1/nu).

    Constructed for completeness only: this operator is not generally a
    contraction and the package makes no optimality claims for it.
    """
    _require_positive_reward(m, "make_kp_adp")
    nu, beta = p.nu, p.beta

    def apply_policy(policy: np.ndarray, v: ValueVector) -> ValueVector:
        inner = m.P_sigma(policy) @ _pospow(v.values, nu)
        out = m.r_sigma(policy) + beta * _pospow(inner, 1.0 / nu)
        return ValueVector(out)

    return AdpInstance(
        apply_policy=apply_policy,
        initial_value=ValueVector(np.ones(m.n_states), positivity_required=True),
        n_states=m.n_states,
        n_actions=m.n_actions,
        feasible=m.feasible,
        decomposable=True,
        positivity_required=True,
        name=f"kp(nu={nu:g},beta={beta:g})",
    )


def mkp_to_rs_bridge(m: FiniteMDP, p: MKPParams) -> tuple[AdpInstance, MonotoneBijection]:
    """Risk-sensitive companion of an MKP program, with the linking bijection.

    Returns the risk-sensitive instance built from log-rewards with
    theta = nu, together with the pointwise logarithm.  The MKP operator
    conjugated by the logarithm coincides with this instance, so solving
    either side solves both: exponentiate the risk-sensitive solution to
    recover the MKP one.
    """
    _require_positive_reward(m, "mkp_to_rs_bridge")
    log_reward = np.where(m.feasible, np.log(np.where(m.feasible, m.reward, 1.0)), 0.0)
    m_log = FiniteMDP(
        n_states=m.n_states,
        n_actions=m.n_actions,
        feasible=m.feasible,
        reward=log_reward,
        beta=float(p.beta),
        P=m.P,
    )
    return make_rs_adp(m_log, theta=p.nu), MonotoneBijection.log()


# ---------------------------------------------------------------------------
# JSON model schema (wire format consumed by the CLI)
# ---------------------------------------------------------------------------

MODEL_KINDS = ("mdp", "risk_sensitive", "qfactor", "rs_qfactor", "exp_qfactor",
               "epstein_zin", "mkp")


@dataclass(frozen=True)
class LoadedModel:
    """A model deserialized from the JSON schema, ready to solve."""

    kind: str
    mdp: FiniteMDP
    adp: AdpInstance
    theta: Optional[float] = None
    nu: Optional[float] = None
    ez: Optional[EZParams] = None
    mkp: Optional[MKPParams] = None


def model_from_dict(d: dict) -> LoadedModel:
    """Build a model from its JSON object form.

    Schema: {"type", "states", "actions", "feasible"?, "reward", "beta",
    "P", "theta"?, "alpha"?, "gamma"?, "nu"?, "exogenous"?}; arrays are
    row-major nested lists; probabilities are validated to 1e-12.
    """
    if not isinstance(d, dict):
        raise ModelValidationError("model document must be a JSON object")
    kind = d.get("type")
    if kind not in MODEL_KINDS:
        raise ModelValidationError(
            f"model field 'type' must be one of {MODEL_KINDS}, got {kind!r}")
    try:
        n = int(d["states"])
        na = int(d["actions"])
        reward = np.asarray(d["reward"], dtype=np.float64)
        P = np.asarray(d["P"], dtype=np.float64)
        beta_raw = d["beta"]
    except KeyError as exc:
        raise ModelValidationError(f"model field {exc.args[0]!r} is missing") from exc
    except (TypeError, ValueError) as exc:
        raise ModelValidationError(f"malformed numeric field: {exc}") from exc
    feasible = d.get("feasible")
    if feasible is None:
        feasible = np.ones((n, na), dtype=bool)
    else:
        feasible = np.asarray(feasible, dtype=bool)
    if isinstance(beta_raw, (int, float)):
        beta: Union[float, np.ndarray] = float(beta_raw)
    else:
        beta = np.asarray(beta_raw, dtype=np.float64)
    if kind == "epstein_zin" and isinstance(beta, float):
        beta = np.full(n, beta)
    mdp = FiniteMDP(n_states=n, n_actions=na, feasible=feasible,
                    reward=reward, beta=beta, P=P)

    def need(field_name: str) -> float:
        if field_name not in d:
            raise ModelValidationError(
                f"model type {kind!r} requires field {field_name!r}")
        return float(d[field_name])

    theta = nu = None
    ez = mkp = None
    if kind == "mdp":
        adp = make_mdp_adp(mdp)
    elif kind == "risk_sensitive":
        theta = need("theta")
        adp = make_rs_adp(mdp, theta)
    elif kind == "qfactor":
        adp = make_qfactor_adp(mdp, "plain")
    elif kind == "rs_qfactor":
        theta = need("theta")
        adp = make_qfactor_adp(mdp, "risk_sensitive", theta)
    elif kind == "exp_qfactor":
        theta = need("theta")
        adp = make_qfactor_adp(mdp, "exponential", theta)
    elif kind == "epstein_zin":
        alpha = need("alpha")
        gamma = need("gamma")
        exo = None
        if "exogenous" in d and d["exogenous"] is not None:
            raw = d["exogenous"]
            if "Q" not in raw or "beta_z" not in raw:
                raise ModelValidationError(
                    "exogenous block requires fields 'Q' and 'beta_z'")
            exo = ExogenousBlock(
                Q=np.asarray(raw["Q"], dtype=np.float64),
                beta_z=np.asarray(raw["beta_z"], dtype=np.float64),
                R=np.asarray(raw["R"], dtype=np.float64) if raw.get("R") is not None else None,
            )
        ez = EZParams(alpha=alpha, gamma=gamma, exogenous=exo)
        adp = make_ez_adp(mdp, ez, form="original")
        theta = ez.theta
    else:  # mkp
        nu = need("nu")
        mkp = MKPParams(nu=nu, beta=float(mdp.beta))
        adp = make_mkp_adp(mdp, mkp)
    return LoadedModel(kind=kind, mdp=mdp, adp=adp, theta=theta, nu=nu, ez=ez, mkp=mkp)


def conjugate_pair(
    model: LoadedModel,
    override: Optional[MonotoneBijection] = None,
) -> tuple[AdpInstance, AdpInstance, MonotoneBijection]:
    """The designated conjugate companion of a loaded model.

    Pairings: mkp with its risk-sensitive companion under the logarithm;
    rs_qfactor with the exponential variant under exp_scale(theta);
    epstein_zin original with transformed under power(gamma).  The
    optional ``override`` replaces the linking bijection (useful as a
    deliberate negative control).
    """
    if model.kind == "mkp":
        rs_adp, F = mkp_to_rs_bridge(model.mdp, model.mkp)
        pair = (model.adp, rs_adp)
    elif model.kind == "rs_qfactor":
        exp_adp = make_qfactor_adp(model.mdp, "exponential", model.theta)
        F = MonotoneBijection.exp_scale(model.theta)
        pair = (model.adp, exp_adp)
    elif model.kind == "epstein_zin":
        transformed = make_ez_adp(model.mdp, model.ez, form="transformed")
        F = MonotoneBijection.power(model.ez.gamma)
        pair = (model.adp, transformed)
    else:
        raise ModelValidationError(
            f"no designated conjugate pairing for model type {model.kind!r}")
    if override is not None:
        F = override
    return pair[0], pair[1], F
