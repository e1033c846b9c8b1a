"""Statistical and analytic verification of the claimed properties.

Four families of checks:

* ``enumerate_2d_channel`` / ``hyperplane_release_leakage``: for 2-D inputs
  the distribution over deterministic one-bit hash functions is computable
  exactly — hyperplane directions are uniform on the circle, so each
  function's probability is an arc measure.  This shows the hash channel
  alone leaks nothing, while releasing the hyperplane (the usual
  deployment) leaks the induced partition of inputs, sometimes a whole
  input exactly.

* ``estimate_collision_rate`` / ``hamming_law_check``: the defining
  collision law — one-bit hashes of two inputs differ with probability
  equal to their angular distance — and its ``n_bits``-fold consequence,
  a Binomial(n_bits, d) Hamming distance across random families.

* ``certify_pxdp``: Monte Carlo over families of the tail bounds the
  accountant hands out.  Per family the worst-case privacy loss is exactly
  ``epsilon * hamming(H(x), H(x'))`` (the flip-noise likelihood ratio is
  maximized at a computable output), so only the family needs sampling.

* ``error_bound_check``: the expected Hamming-distance distortion added by
  bit flipping, against its closed-form ceiling ``2*n_bits/(e^eps+1)``.

Checks report a statistic, the bound it must respect, and a verdict; the
thresholds are 3-sigma with stated sample sizes, so runs are reproducible
given seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy
from scipy import stats

from . import validation as _v
from .exceptions import DimensionMismatchError, InvalidParamsError
from .privacy import pxdp_budget_simple, pxdp_budget_tight, solve_alpha, PrivacyParams
from .mechanisms import flip_probability, randomized_response
from .lsh import sample_family, hash_vector
from .vectors import angular_distance, hamming_distance


# ---------------------------------------------------------------------------
# Exact 2-D channel enumeration


@dataclass(frozen=True)
class ChannelFunction:
    """One deterministic hash function: the bit it assigns to each input."""

    bits: tuple
    probability: object  # Fraction when the arc measure is rational, else float


@dataclass(frozen=True)
class ChannelMatrix:
    """The one-bit hash channel over a finite 2-D input set."""

    inputs: tuple
    functions: tuple
    channel: tuple  # P(output = 1 | input i)


def _exact_angle(y, x):
    """Angle of direction (x, y) in [0, 2*pi), as an exact sympy expression."""
    a = sympy.atan2(y, x)
    if a.is_negative:
        a = a + 2 * sympy.pi
    return a


def enumerate_2d_channel(inputs) -> ChannelMatrix:
    """Exactly enumerate the deterministic hash functions for 2-D inputs.

    A Gaussian hyperplane normal has uniform direction, so partitioning the
    circle of directions by the lines orthogonal to each input yields arcs;
    every arc is one deterministic function with probability equal to its
    arc fraction.  Arc measures are computed symbolically: rational
    fractions of the circle (the axis-aligned / diagonal cases) come back
    as exact ``Fraction`` values, anything else as floats.

    Functions are evaluated at arc midpoints, so the boundary tie rule
    never fires (boundaries have measure zero).
    """
    pts = []
    for x in inputs:
        arr = _v.as_vector(x)
        if _v.is_sparse(arr):
            arr = _v.to_dense(arr)
        if arr.shape[0] != 2:
            raise DimensionMismatchError(f"inputs must be 2-D, got dimension {arr.shape[0]}")
        _v.check_nonzero(arr)
        pts.append(arr)
    if not pts:
        raise InvalidParamsError("need at least one input")

    # Boundary directions: for input (a, b) the orthogonal line hits the
    # circle at +-(-b, a).  Rationalize the float coordinates exactly.
    angles = []
    for p in pts:
        a, b = (sympy.Rational(Fraction(float(c)).limit_denominator(10 ** 12)) for c in p)
        for direction in ((-b, a), (b, -a)):
            ang = _exact_angle(direction[1], direction[0])
            if not any(sympy.simplify(ang - seen) == 0 for seen in angles):
                angles.append(ang)
    angles.sort(key=lambda t: float(t.evalf(30)))

    two_pi = 2 * sympy.pi
    functions = []
    for i, theta in enumerate(angles):
        theta_next = angles[i + 1] if i + 1 < len(angles) else angles[0] + two_pi
        width = sympy.simplify((theta_next - theta) / two_pi)
        prob = Fraction(int(width.p), int(width.q)) if width.is_Rational else float(width.evalf(30))
        mid = float(((theta + theta_next) / 2).evalf(30))
        r = np.array([math.cos(mid), math.sin(mid)])
        bits = tuple(int(np.dot(r, p) >= 0.0) for p in pts)
        functions.append(ChannelFunction(bits=bits, probability=prob))

    channel = []
    for j in range(len(pts)):
        mass = sum((f.probability for f in functions if f.bits[j] == 1), start=Fraction(0))
        channel.append(mass if isinstance(mass, Fraction) else float(mass))
    return ChannelMatrix(inputs=tuple(tuple(p) for p in pts), functions=tuple(functions), channel=tuple(channel))


@dataclass(frozen=True)
class LeakageReport:
    """What releasing the hyperplane reveals about the input set."""

    partitions: tuple  # per function: tuple of input-index classes
    exact_leaks: tuple  # per function: indices of inputs identified exactly
    singleton_probability: object  # P(the drawn function isolates some input)
    degenerate: bool  # single-input channel: isolation is trivial


def hyperplane_release_leakage(cm: ChannelMatrix) -> LeakageReport:
    """Partition analysis of each deterministic function in the channel.

    Once the hyperplane is public, an observer knows which deterministic
    function produced the output, i.e. learns the equivalence class of the
    input under that function's output partition.  A singleton class means
    that input is identified exactly.
    """
    partitions, exact_leaks = [], []
    singleton_mass = Fraction(0)
    exact_total = True
    for f in cm.functions:
        zeros = tuple(i for i, b in enumerate(f.bits) if b == 0)
        ones = tuple(i for i, b in enumerate(f.bits) if b == 1)
        classes = tuple(c for c in (zeros, ones) if c)
        singles = tuple(c[0] for c in classes if len(c) == 1)
        partitions.append(classes)
        exact_leaks.append(singles)
        if singles:
            singleton_mass = singleton_mass + f.probability
            exact_total = exact_total and isinstance(f.probability, Fraction)
    total = singleton_mass if exact_total else float(singleton_mass)
    return LeakageReport(
        partitions=tuple(partitions),
        exact_leaks=tuple(exact_leaks),
        singleton_probability=total,
        degenerate=len(cm.inputs) == 1,
    )


# ---------------------------------------------------------------------------
# Monte Carlo checks


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one statistical check."""

    name: str
    params: dict
    statistic: float
    bound: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "statistic": self.statistic,
            "bound": self.bound,
            "passed": bool(self.passed),
            "detail": self.detail,
        }


def _pair_bits(x, xp, n_hashes: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Hash a pair under ``n_hashes`` independent one-bit families at once."""
    x = _v.to_dense(_v.as_vector(x, "x"))
    xp = _v.to_dense(_v.as_vector(xp, "xp"))
    if x.shape[0] != xp.shape[0]:
        raise DimensionMismatchError(f"dimensions differ: {x.shape[0]} vs {xp.shape[0]}")
    _v.check_nonzero(x, "x")
    _v.check_nonzero(xp, "xp")
    normals = rng.standard_normal((n_hashes, x.shape[0]))
    return (normals @ x >= 0.0), (normals @ xp >= 0.0)


def estimate_collision_rate(x, xp, trials: int = 10_000, seed: int = 0) -> CheckReport:
    """Empirical one-bit mismatch rate vs the angular distance of the pair.

    Samples ``trials`` independent one-bit families; passes when the rate
    sits within 3 binomial sigmas of the angular distance.
    """
    if trials < 100:
        raise InvalidParamsError(f"trials must be >= 100, got {trials}")
    d = angular_distance(x, xp)
    bx, bxp = _pair_bits(x, xp, trials, np.random.default_rng(seed))
    rate = float(np.mean(bx != bxp))
    sigma = math.sqrt(d * (1.0 - d) / trials)
    return CheckReport(
        name="collision_rate",
        params={"trials": trials, "seed": seed},
        statistic=rate,
        bound=d,
        passed=abs(rate - d) <= 3.0 * sigma,
        detail={"target": d, "three_sigma": 3.0 * sigma, "std_err": sigma},
    )


def hamming_law_check(x, xp, n_bits: int, n_families: int = 1000, seed: int = 0) -> CheckReport:
    """Hamming distances across random families vs Binomial(n_bits, d).

    Checks the sample mean against ``n_bits * d`` at 3 sigma, and the sample
    variance against ``n_bits * d * (1 - d)`` inside a chi-square band (the
    band treats the distances as normal, a documented approximation; its
    quantiles are set at the two-sided 3-sigma level).
    """
    if n_families < 500:
        raise InvalidParamsError(f"n_families must be >= 500, got {n_families}")
    if n_bits < 1:
        raise InvalidParamsError(f"n_bits must be >= 1, got {n_bits}")
    d = angular_distance(x, xp)
    bx, bxp = _pair_bits(x, xp, n_families * n_bits, np.random.default_rng(seed))
    dist = (bx != bxp).reshape(n_families, n_bits).sum(axis=1)

    mean = float(dist.mean())
    var = float(dist.var(ddof=1))
    mean_target = n_bits * d
    var_target = n_bits * d * (1.0 - d)

    mean_tol = 3.0 * math.sqrt(var_target / n_families) if var_target > 0 else 0.0
    mean_ok = abs(mean - mean_target) <= mean_tol
    if var_target == 0.0:
        var_ok = var == 0.0
        var_lo = var_hi = 0.0
    else:
        tail = 2.0 * stats.norm.sf(3.0)  # two-sided 3-sigma mass
        var_lo = var_target * stats.chi2.ppf(tail / 2.0, n_families - 1) / (n_families - 1)
        var_hi = var_target * stats.chi2.ppf(1.0 - tail / 2.0, n_families - 1) / (n_families - 1)
        var_ok = var_lo <= var <= var_hi
    return CheckReport(
        name="hamming_law",
        params={"n_bits": n_bits, "n_families": n_families, "seed": seed},
        statistic=mean,
        bound=mean_target,
        passed=bool(mean_ok and var_ok),
        detail={
            "mean": mean,
            "mean_target": mean_target,
            "mean_tol": mean_tol,
            "variance": var,
            "variance_target": var_target,
            "variance_band": [var_lo, var_hi],
        },
    )


def certify_pxdp(
    epsilon: float,
    n_bits: int,
    x,
    xp,
    delta_target: float = 0.05,
    trials: int = 10_000,
    seed: int = 0,
) -> CheckReport:
    """Monte Carlo certification of both tail bounds on the privacy loss.

    Per sampled family the maximal loss over outputs is exactly
    ``epsilon * hamming(H(x), H(xp))``, so the tail is estimated exactly in
    the output coordinate and sampled only over families.  Passes when the
    empirical exceedance stays within 3-sigma Monte Carlo slack of the
    stated failure probability for BOTH the distribution-free and the
    Chernoff-slack bound.
    """
    if trials < 10_000:
        raise InvalidParamsError(f"trials must be >= 10000, got {trials}")
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise InvalidParamsError(f"epsilon must be finite and > 0, got {epsilon}")
    d = angular_distance(x, xp)
    bx, bxp = _pair_bits(x, xp, trials * n_bits, np.random.default_rng(seed))
    loss = epsilon * (bx != bxp).reshape(trials, n_bits).sum(axis=1)

    params = PrivacyParams(epsilon=epsilon, n_bits=n_bits, delta=delta_target, d=d)
    simple = pxdp_budget_simple(params)
    tail_simple = float(np.mean(loss > simple.xi))
    slack_simple = 3.0 * math.sqrt(delta_target / trials)
    ok_simple = tail_simple <= delta_target + slack_simple

    if d == 0.0:
        # identical directions: loss is identically zero, any budget holds
        tight_xi = 0.0
        delta_alpha = 0.0
        tail_tight = float(np.mean(loss > 0.0))
        ok_tight = tail_tight == 0.0
        alpha = None
    else:
        alpha = solve_alpha(n_bits, d, delta_target)
        tight = pxdp_budget_tight(params, alpha)
        tight_xi = tight.xi
        delta_alpha = tight.delta_out
        tail_tight = float(np.mean(loss > tight_xi))
        ok_tight = tail_tight <= delta_alpha + 3.0 * math.sqrt(delta_alpha / trials)

    return CheckReport(
        name="pxdp_certification",
        params={
            "epsilon": epsilon,
            "n_bits": n_bits,
            "d": d,
            "delta": delta_target,
            "trials": trials,
            "seed": seed,
        },
        statistic=tail_tight,
        bound=delta_alpha,
        passed=bool(ok_simple and ok_tight),
        detail={
            "alpha": alpha,
            "xi_tight": tight_xi,
            "tail_tight": tail_tight,
            "delta_tight": delta_alpha,
            "xi_simple": simple.xi,
            "tail_simple": tail_simple,
            "delta_simple": delta_target,
            "mc_slack_simple": slack_simple,
        },
    )


def error_bound_check(epsilon: float, n_bits: int, x, xp, trials: int = 1000, seed: int = 0) -> CheckReport:
    """Hamming-distance distortion of bit flipping vs ``2*n_bits/(e^eps+1)``.

    Fixes one family (derived from ``seed``), then repeatedly flips both
    hashes and measures how far the noisy Hamming distance strays from the
    noiseless one.  The empirical mean must not exceed the ceiling by more
    than 3 standard errors.
    """
    if trials < 1000:
        raise InvalidParamsError(f"trials must be >= 1000, got {trials}")
    fam_seed, noise_seed = (int(s) for s in np.random.SeedSequence(seed).generate_state(2, np.uint64))
    x = _v.as_vector(x, "x")
    dim = _v.dimension_of(x)
    family = sample_family(dim, n_bits, fam_seed)
    v, vp = hash_vector(family, x), hash_vector(family, xp)
    base = hamming_distance(v, vp)

    rng = np.random.default_rng(noise_seed)
    noisy_v = randomized_response(epsilon, np.tile(v, (trials, 1)), rng)
    noisy_vp = randomized_response(epsilon, np.tile(vp, (trials, 1)), rng)
    errors = np.abs((noisy_v != noisy_vp).sum(axis=1).astype(float) - base)

    mean = float(errors.mean())
    std_err = float(errors.std(ddof=1) / math.sqrt(trials))
    bound = 2.0 * n_bits * flip_probability(epsilon)
    return CheckReport(
        name="error_bound",
        params={"epsilon": epsilon, "n_bits": n_bits, "trials": trials, "seed": seed},
        statistic=mean,
        bound=bound,
        passed=mean <= bound + 3.0 * std_err,
        detail={"std_err": std_err, "noiseless_hamming": base},
    )
