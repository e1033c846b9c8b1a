"""Privacy-budget accounting for the hashing mechanisms.

For hash-then-flip with per-bit budget ``epsilon`` over ``n_bits`` bits, the
privacy loss between two inputs at angular distance ``d`` is ``epsilon``
times the Hamming distance of their hashes — a binomial random variable
over the draw of the family, with mean ``n_bits * d``.  Every bound here is
a statement about that variable:

* ``worst_case_dp``: the ceiling ``n_bits * epsilon`` (Hamming distance can
  never exceed ``n_bits``);
* ``pseudometric_budget``: the exact realized loss for one concrete family;
* ``pxdp_budget_simple``: mean + a distribution-free (Hoeffding) tail,
  ``eps*k*d + eps*sqrt(k)*sqrt(-ln(delta)/2)``, holding except with
  probability ``delta``;
* ``pxdp_budget_tight``: the Chernoff tail at slack ``alpha``,
  ``eps*k*(d+alpha)`` failing with probability
  ``exp(-k * KL(d+alpha || d))``;
* ``solve_alpha`` / ``epsilon_for_target_xi`` / ``ldp_budget``: inversions
  of the tight bound used to calibrate mechanisms to a target total budget
  and to express that budget on the metric-free (local-DP) scale;
* ``laplsh_budget``: for noise-then-hash the accounting is immediate —
  ``epsilon`` times the Euclidean distance, no failure probability.

All functions are pure and operate in double precision.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleError, InvalidParamsError
from .lsh import ProjectionFamily, hash_vector
from .mechanisms import flip_probability
from .vectors import angular_to_euclidean, euclidean_distance, hamming_distance

BOUND_KINDS = ("worst_case_dp", "pseudometric", "pxdp_simple", "pxdp_tight", "laplsh")

# Below this failure probability the tight bound's slack saturates at 1 - d.
_TINY = float(np.finfo(float).tiny)


@dataclass(frozen=True)
class PrivacyParams:
    """Inputs every hash-mechanism bound depends on.

    epsilon: per-bit budget (> 0); n_bits: hash width; delta: acceptable
    failure probability in (0, 1]; d: dissimilarity of the input pair in
    [0, 1] (angular distance here).
    """

    epsilon: float
    n_bits: int
    delta: float
    d: float

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise InvalidParamsError(f"epsilon must be finite and > 0, got {self.epsilon}")
        if int(self.n_bits) != self.n_bits or self.n_bits < 1:
            raise InvalidParamsError(f"n_bits must be an integer >= 1, got {self.n_bits}")
        if not (0.0 < self.delta <= 1.0):
            raise InvalidParamsError(f"delta must be in (0, 1], got {self.delta}")
        if not (0.0 <= self.d <= 1.0):
            raise InvalidParamsError(f"d must be in [0, 1], got {self.d}")


@dataclass(frozen=True)
class BudgetReport:
    """One accounted bound: the total budget and how it was obtained."""

    xi: float
    bound_kind: str
    delta_out: float
    flip_prob: float
    ldp_budget: float
    alpha: float | None = None

    def __post_init__(self):
        if self.bound_kind not in BOUND_KINDS:
            raise InvalidParamsError(f"unknown bound_kind {self.bound_kind!r}")


def worst_case_dp(epsilon: float, n_bits: int) -> float:
    """Metric-free ceiling: total budget ``n_bits * epsilon``."""
    p = PrivacyParams(epsilon=epsilon, n_bits=n_bits, delta=1.0, d=0.0)
    return p.epsilon * p.n_bits


def pseudometric_budget(family: ProjectionFamily, epsilon: float, x, xp) -> float:
    """Exact budget for one realized family: ``epsilon * hamming(H(x), H(xp))``.

    This is the pseudometric the mechanism actually satisfies once the
    family is fixed; it is at most ``worst_case_dp(epsilon, n_bits)``.
    """
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise InvalidParamsError(f"epsilon must be finite and > 0, got {epsilon}")
    return epsilon * hamming_distance(hash_vector(family, x), hash_vector(family, xp))


def kl_bernoulli(a: float, b: float) -> float:
    """KL divergence ``a ln(a/b) + (1-a) ln((1-a)/(1-b))`` between coin biases.

    Defined for a in [0, 1] with the continuity convention 0 ln 0 = 0.
    For b in {0, 1} with a != b the divergence is infinite; ``math.inf`` is
    returned as the documented sentinel rather than raising.
    """
    a, b = float(a), float(b)
    if math.isnan(a) or math.isnan(b) or not (0.0 <= a <= 1.0) or not (0.0 <= b <= 1.0):
        raise InvalidParamsError(f"need probabilities a in [0,1], b in [0,1], got a={a}, b={b}")
    if b in (0.0, 1.0):
        return 0.0 if a == b else math.inf
    out = 0.0
    if a > 0.0:
        out += a * math.log(a / b)
    if a < 1.0:
        out += (1.0 - a) * math.log((1.0 - a) / (1.0 - b))
    return out


def pxdp_budget_simple(params: PrivacyParams) -> BudgetReport:
    """Distribution-free tail bound on the total budget.

    xi = eps * n_bits * d  +  eps * sqrt(n_bits) * sqrt(-ln(delta) / 2),
    exceeded with probability at most ``delta`` over the family draw.
    """
    eps, k, d, delta = params.epsilon, params.n_bits, params.d, params.delta
    xi = eps * k * d + eps * math.sqrt(-math.log(delta) / 2.0) * math.sqrt(k)
    return BudgetReport(
        xi=xi,
        bound_kind="pxdp_simple",
        delta_out=delta,
        flip_prob=flip_probability(eps),
        ldp_budget=eps * k,
    )


def solve_alpha(n_bits: int, d: float, delta: float) -> float:
    """Smallest tail slack whose Chernoff failure probability equals ``delta``.

    Solves ``exp(-n_bits * KL(d + alpha || d)) = delta`` for alpha by
    bisection on (0, 1 - d]; the KL term is strictly increasing in alpha, so
    the root is unique.  Convergence target: relative delta error <= 1e-9,
    at most 200 halvings.

    Raises ``InfeasibleError`` when even the maximal slack ``1 - d`` leaves
    a failure probability above ``delta`` (i.e. ``d**n_bits > delta``).

    At ``d == 0`` identical inputs hash identically, the realized loss is 0
    and any positive slack already gives failure probability 0; the minimum
    representable slack is returned with a warning since the bound carries
    no information there.
    """
    if int(n_bits) != n_bits or n_bits < 1:
        raise InvalidParamsError(f"n_bits must be an integer >= 1, got {n_bits}")
    if not (0.0 < delta < 1.0):
        raise InvalidParamsError(f"delta must be in (0, 1), got {delta}")
    if not (0.0 <= d < 1.0):
        raise InvalidParamsError(f"d must be in [0, 1), got {d}")
    if d == 0.0:
        warnings.warn(
            "solve_alpha at d = 0: the tail bound is vacuous (loss is identically 0); "
            "returning the minimum representable slack",
            RuntimeWarning,
            stacklevel=2,
        )
        return _TINY

    target = -math.log(delta) / n_bits
    if kl_bernoulli(1.0, d) < target:  # KL(1||d) = -ln d, the supremum over slacks
        raise InfeasibleError(
            f"no alpha <= {1.0 - d} reaches delta={delta} for n_bits={n_bits}, d={d} "
            f"(minimum achievable failure probability is d**n_bits = {d ** n_bits})"
        )

    lo, hi = 0.0, 1.0 - d
    alpha = hi
    for _ in range(200):
        alpha = 0.5 * (lo + hi)
        kl = kl_bernoulli(d + alpha, d)
        # relative error of achieved delta vs requested delta
        if abs(math.expm1(-n_bits * kl - math.log(delta))) <= 1e-9:
            return alpha
        if kl < target:
            lo = alpha
        else:
            hi = alpha
    return alpha


def pxdp_budget_tight(params: PrivacyParams, alpha: float) -> BudgetReport:
    """Chernoff tail bound at an explicit slack ``alpha``.

    xi = eps * n_bits * (d + alpha), exceeded with probability at most
    ``exp(-n_bits * KL(d + alpha || d))``.  Pairs with :func:`solve_alpha`,
    which picks alpha for a requested failure probability.
    """
    eps, k, d = params.epsilon, params.n_bits, params.d
    if not (0.0 < alpha <= 1.0 - d):
        raise InvalidParamsError(f"alpha must be in (0, 1 - d], got alpha={alpha}, d={d}")
    kl = kl_bernoulli(d + alpha, d)
    delta_out = 0.0 if math.isinf(kl) else math.exp(-k * kl)
    return BudgetReport(
        xi=eps * k * (d + alpha),
        bound_kind="pxdp_tight",
        delta_out=delta_out,
        flip_prob=flip_probability(eps),
        ldp_budget=eps * k,
        alpha=alpha,
    )


def epsilon_for_target_xi(xi_target: float, n_bits: int, d: float, delta: float) -> float:
    """Per-bit budget whose tight bound at (n_bits, d, delta) equals ``xi_target``.

    Inverts ``xi = eps * n_bits * (d + alpha)`` with alpha from
    :func:`solve_alpha`; alpha does not depend on eps, so the inversion is
    exact division and round-trips through :func:`pxdp_budget_tight`.
    """
    if not (math.isfinite(xi_target) and xi_target > 0.0):
        raise InvalidParamsError(f"xi_target must be finite and > 0, got {xi_target}")
    alpha = solve_alpha(n_bits, d, delta)
    return xi_target / (n_bits * (d + alpha))


def ldp_budget(xi: float, n_bits: int, d: float, delta: float) -> float:
    """Metric-free total budget equivalent to a tight-bound budget ``xi``.

    The per-bit epsilon realizing ``xi`` at (n_bits, d, delta) costs
    ``n_bits * epsilon`` on the local-DP scale; conveniently this equals
    ``xi / (d + alpha)`` independent of n_bits' appearance elsewhere.
    """
    return n_bits * epsilon_for_target_xi(xi, n_bits, d, delta)


def laplsh_budget(epsilon: float, x, xp) -> float:
    """Total budget of noise-then-hash for a concrete input pair.

    ``epsilon * euclidean_distance(x, xp)``, with no failure probability:
    hashing is post-processing and cannot increase the loss.
    """
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise InvalidParamsError(f"epsilon must be finite and > 0, got {epsilon}")
    return epsilon * euclidean_distance(x, xp)


def laplsh_budget_from_angle(epsilon: float, d_theta: float) -> float:
    """Noise-then-hash budget at angular distance ``d_theta``, unit-norm inputs.

    Uses the unit-sphere chord length ``sqrt(2 - 2 cos(pi d_theta))`` to
    express the Euclidean budget on the angular axis, which is how the two
    mechanisms are compared on one plot.
    """
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise InvalidParamsError(f"epsilon must be finite and > 0, got {epsilon}")
    return epsilon * angular_to_euclidean(d_theta)


def cxdp_params(epsilon: float, n_bits: int) -> tuple[float, float]:
    """Mean slope and subgaussian width of the privacy-loss variable.

    The loss has mean at most ``eps * n_bits * d`` and, bounded as a whole
    in an interval of length ``eps * n_bits``, is subgaussian with
    parameter ``eps * n_bits / 2``.  Returns ``(eps * n_bits,
    eps * n_bits / 2)``.

    Note the width here treats the loss as a single bounded variable.  The
    loss is actually a sum of n_bits independent per-bit losses, each
    bounded in an interval of length eps, which composes to the sqrt(n_bits)
    smaller width used by :func:`cxdp_to_pxdp_budget`.
    """
    p = PrivacyParams(epsilon=epsilon, n_bits=n_bits, delta=1.0, d=0.0)
    mu = p.epsilon * p.n_bits
    return mu, mu / 2.0


def cxdp_tail_budget(mu: float, tau: float, d: float, delta: float) -> float:
    """Generic concentration-to-tail conversion: ``mu * d + tau * sqrt(-2 ln delta)``.

    Valid for any loss variable with mean slope ``mu`` and centered
    ``tau``-subgaussian fluctuation; the result is exceeded with probability
    at most ``delta``.
    """
    if not (math.isfinite(mu) and mu >= 0.0) or not (math.isfinite(tau) and tau > 0.0):
        raise InvalidParamsError(f"need mu >= 0 and tau > 0, got mu={mu}, tau={tau}")
    if not (0.0 < delta <= 1.0):
        raise InvalidParamsError(f"delta must be in (0, 1], got {delta}")
    if not (0.0 <= d <= 1.0):
        raise InvalidParamsError(f"d must be in [0, 1], got {d}")
    return mu * d + tau * math.sqrt(-2.0 * math.log(delta))


def cxdp_to_pxdp_budget(epsilon: float, n_bits: int, d: float, delta: float) -> float:
    """Tail budget from the concentration view, per-bit composition.

    Each of the ``n_bits`` independent per-bit losses is bounded in an
    interval of length ``epsilon``, hence (epsilon/2)-subgaussian; their sum
    is (epsilon * sqrt(n_bits) / 2)-subgaussian.  Feeding that width into
    :func:`cxdp_tail_budget` reproduces ``pxdp_budget_simple`` exactly.
    """
    mu, _ = cxdp_params(epsilon, n_bits)
    tau_sum = epsilon * math.sqrt(n_bits) / 2.0
    return cxdp_tail_budget(mu, tau_sum, d, delta)


def rr_flip_probability(epsilon: float) -> float:
    """Randomized-response flip probability ``1 / (e^eps + 1)``; see mechanisms."""
    return flip_probability(epsilon)


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def budget_table(
    xis=(1.0, 5.0, 10.0, 20.0),
    n_bits_list=(10, 20, 50),
    ds=(0.05, 0.1),
    delta: float = 0.01,
) -> list[dict]:
    """Equivalent local-DP budgets over a grid of total budgets and hash widths.

    One row per (d, xi, n_bits) with the exact and the round-half-up
    integer local-DP budget.  Defaults cover the published comparison grid.
    """
    rows = []
    for d in ds:
        for xi in xis:
            for k in n_bits_list:
                exact = ldp_budget(xi, k, d, delta)
                rows.append(
                    {
                        "d_theta": d,
                        "xi": xi,
                        "n_bits": k,
                        "ldp_budget": _round_half_up(exact),
                        "ldp_budget_exact": exact,
                        "epsilon": exact / k,
                    }
                )
    return rows
