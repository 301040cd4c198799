"""Threshold quantizers: exact optimum, reverse Markov levels, constructive guarantee.

The constructive quantizer follows the usual two-case argument.  Split
``D_f(P||Q)`` into the part coming from likelihood ratios at most ``b``
(``S1``) and the rest (``S2``).  If the tail carries at least half, splitting the ratio
axis at ``b`` keeps a ``C1 / (2 C2)`` fraction.  Otherwise the bounded part
``Z = f(dP/dQ) 1{dP/dQ <= b}`` (under ``Q``) is approximated by a staircase
of ``D`` levels.  The level intervals are pulled back to ratio intervals,
and each interval keeps at least its level.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .distributions import (
    Distribution,
    LikelihoodRatioProfile,
    ThresholdChannel,
    ratio_profile,
    validate,
)
from .divergences import DivergenceSpec, f_divergence_arrays, hellinger_spec, perspective
from .errors import (
    DLessThanTwo,
    EmptyExpectation,
    LambdaOutOfRange,
    MissingTvLikeParams,
    RhoTooLarge,
    SupportExceedsB,
    ZeroDivergence,
)

REVERSE_MARKOV_CONSTANT = 13
REVERSE_DPI_CONSTANT = 52


def _check_d(D: int) -> None:
    if D < 2:
        raise DLessThanTwo(f"need at least two output levels, got D={D}")


# ---------------------------------------------------------------------------
# optimal threshold channel


def cell_value_matrix(p: np.ndarray, q: np.ndarray, spec: DivergenceSpec) -> np.ndarray:
    """``V[a, b]`` = divergence contribution of the cell holding entries ``a..b-1``."""
    k = len(p)
    # row-wise running sums from each start: no cancellation between prefix sums
    cp = np.zeros((k + 1, k + 1))
    cq = np.zeros((k + 1, k + 1))
    for a in range(k):
        cp[a, a + 1 :] = np.cumsum(p[a:])
        cq[a, a + 1 :] = np.cumsum(q[a:])
    valid = np.triu(np.ones((k + 1, k + 1), dtype=bool), 1)
    out = np.full((k + 1, k + 1), -np.inf)
    # the q-mass of a cell is "zero" only if every entry in it has q = 0
    nz_q = np.concatenate([[0], np.cumsum(q > 0)])
    has_q = (nz_q[None, :] - nz_q[:, None]) > 0
    pos = valid & has_q
    if pos.any():
        out[pos] = perspective(cp[pos], cq[pos], spec)
    tail = valid & ~has_q
    if tail.any():
        with np.errstate(invalid="ignore"):
            out[tail] = np.where(cp[tail] > 0, spec.f_prime_inf * cp[tail], 0.0)
    return out


def _threshold_dp(values: np.ndarray, D: int) -> tuple[float, tuple[int, ...]]:
    """Best sum of cell values over partitions of ``0..k`` into at most ``D`` cells."""
    k = values.shape[0] - 1
    cells = min(D, k)
    best = np.full((cells + 1, k + 1), -np.inf)
    arg = np.zeros((cells + 1, k + 1), dtype=int)
    best[0, 0] = 0.0
    for d in range(1, cells + 1):
        ok = (best[d - 1][:, None] > -np.inf) & (values > -np.inf)
        cand = np.where(ok, best[d - 1][:, None] + np.where(ok, values, 0.0), -np.inf)
        arg[d] = np.argmax(cand, axis=0)
        best[d] = cand[arg[d], np.arange(k + 1)]
    finals = best[1:, k]
    top = np.max(finals)
    # fewest cells among (numerical) ties
    slack = 0.0 if math.isinf(top) else 1e-15 * max(1.0, abs(top))
    d = 1 + int(np.flatnonzero(finals >= top - slack)[0])
    cuts = []
    j = k
    for dd in range(d, 0, -1):
        i = arg[dd, j]
        if i > 0:
            cuts.append(int(i))
        j = i
    return float(finals[d - 1]), tuple(sorted(cuts))


def best_threshold_channel(
    P: Distribution, Q: Distribution, D: int, spec: DivergenceSpec
) -> tuple[ThresholdChannel, float]:
    """Exact maximiser of ``D_f(TP || TQ)`` over threshold channels with ``D`` outputs."""
    _check_d(D)
    prof = ratio_profile(P, Q)
    return best_threshold_on_profile(prof, D, spec)


def best_threshold_on_profile(
    prof: LikelihoodRatioProfile, D: int, spec: DivergenceSpec
) -> tuple[ThresholdChannel, float]:
    _check_d(D)
    values = cell_value_matrix(prof.p, prof.q, spec)
    best, cuts = _threshold_dp(values, D)
    return ThresholdChannel(prof, cuts, D), best


def threshold_value(channel: ThresholdChannel, spec: DivergenceSpec) -> float:
    """``D_f(TP || TQ)`` for a threshold channel."""
    tp, tq = channel.output_masses()
    return f_divergence_arrays(tp, tq, spec)


# ---------------------------------------------------------------------------
# reverse Markov inequality


@dataclass(frozen=True)
class LevelSet:
    levels: tuple[float, ...]
    objective: float


def staircase_objective(levels, values, probs) -> float:
    """``sum_{j<D} eta_j P(Z in [eta_j, eta_{j+1}))``."""
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    total = 0.0
    for lo, hi in zip(levels[:-1], levels[1:]):
        if hi > lo:
            total += lo * math.fsum(probs[(values >= lo) & (values < hi)])
    return total


def _support(values, probs) -> tuple[np.ndarray, np.ndarray]:
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    keep = probs > 0
    z, inv = np.unique(values[keep], return_inverse=True)
    w = np.bincount(inv, weights=probs[keep], minlength=len(z))
    return z, w


def reverse_markov_bound(values, probs, B: float, D: int) -> float:
    """``(1/13) E[Z] min(1, D/R)`` with ``R = min(k, 1 + log(B/E[Z]))``."""
    z, w = _support(values, probs)
    mean = math.fsum(z * w)
    R = min(len(z), 1 + math.log(B / mean))
    return mean * min(1.0, D / R) / REVERSE_MARKOV_CONSTANT


def reverse_markov_arrays(values, probs, B: float, D: int) -> LevelSet:
    """Optimal staircase levels for a finitely supported ``Z`` on ``[0, B)``.

    Levels can be taken from the support of ``Z`` plus ``B``: raising a level
    to the next support point keeps the captured probability and increases
    the level.  The DP is over ``F[t][i]``, the best objective on ``[z_i, B)``
    with ``t`` levels of which the lowest is ``z_i``.
    """
    _check_d(D)
    z, w = _support(values, probs)
    if len(z) == 0 or math.fsum(z * w) <= 0:
        raise EmptyExpectation("E[Z] must be positive")
    if z[0] < 0 or z[-1] >= B:
        raise SupportExceedsB(f"Z must be supported on [0, B={B})")
    m = len(z)
    tail = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
    # gain[i, j] = z_i P(z_i <= Z < z_j) for j > i, j == m meaning "up to B"
    gain = np.full((m, m + 1), -np.inf)
    iu = np.triu_indices(m, 1, m + 1)
    gain[iu] = z[iu[0]] * (tail[iu[0]] - tail[iu[1]])
    F = np.full((D, m + 1), -np.inf)
    nxt = np.zeros((D, m), dtype=int)
    F[0, m] = 0.0
    for t in range(1, D):
        cand = gain + F[t - 1][None, :]
        nxt[t] = np.argmax(cand, axis=1)
        F[t, :m] = cand[np.arange(m), nxt[t]]
        F[t, m] = -np.inf
    best_t, best_i = np.unravel_index(np.argmax(F[1:, :m]), (D - 1, m))
    t, i = int(best_t) + 1, int(best_i)
    objective = float(F[t, i])
    chosen = []
    while t > 0 and i < m:
        chosen.append(float(z[i]))
        i = int(nxt[t, i])
        t -= 1
    pad = [chosen[0]] * (D - 1 - len(chosen))
    return LevelSet(tuple(pad + chosen + [float(B)]), objective)


def reverse_markov_levels(Z: Distribution, B: float, D: int) -> LevelSet:
    """Levels for a distribution whose labels are the (nonnegative) values of ``Z``."""
    return reverse_markov_arrays(np.asarray(Z.labels, dtype=float), Z.array, B, D)


def _level_index(z: np.ndarray, levels: tuple[float, ...]) -> np.ndarray:
    """Index ``j`` with ``z in [eta_j, eta_{j+1})`` among the ``D-1`` level intervals, -1 below ``eta_1``."""
    lv = np.asarray(levels[:-1])
    # side="right" sends duplicated levels to the last copy, the nonempty interval
    return np.searchsorted(lv, z, side="right") - 1


# ---------------------------------------------------------------------------
# constructive reverse data processing


class Case(enum.Enum):
    HEAVY_TAIL = "HeavyTail"
    BOUNDED_PART = "BoundedPart"


@dataclass(frozen=True)
class QuantizerReport:
    channel: ThresholdChannel
    achieved: float
    guarantee: float
    case_taken: Case
    R: float
    divergence: float = 0.0
    s1: float = 0.0
    s2: float = 0.0
    levels: LevelSet | None = None
    staircase: float = 0.0
    variant: str = ""


def reverse_dpi_guarantee(divergence: float, k: int, D: int, C1: float, C2: float, B: float) -> tuple[float, float]:
    """Return ``(guarantee, R)`` for the threshold-quantizer lower bound."""
    R = float(min(k, 1 + math.log(2 * B / divergence)))
    frac = min(1.0, 26 * C1 / C2, D / R) / REVERSE_DPI_CONSTANT
    return frac * divergence, R


def _cuts_from_groups(groups: list) -> tuple[int, ...]:
    """Cut indices where a per-entry group id changes (groups must be contiguous)."""
    return tuple(i for i in range(1, len(groups)) if groups[i] != groups[i - 1])


def _pullback_groups(side: np.ndarray, idx: np.ndarray, tail: np.ndarray, mode: str) -> list:
    """Cell id per profile entry for one pull-back variant.

    ``side`` is -1 left of ratio 1, +1 on ``[1, b]``, 0 beyond ``b``; ``idx``
    the level-interval index of each entry (-1 below the first level).
    Entries beyond ``b`` join the top right block, which only raises its ratio.
    """
    use_left = mode in ("left", "both")
    use_right = mode in ("right", "both")
    right_idx = [int(j) for s, j in zip(side, idx) if s == 1 and j >= 0]
    top = max(right_idx) if (use_right and right_idx) else None
    groups = []
    for s, j, t in zip(side, idx, tail):
        if use_left and s == -1 and j >= 0:
            groups.append(("L", -int(j)))
        elif use_right and s == 1 and j >= 0:
            groups.append(("R", int(j)))
        elif t and top is not None:
            groups.append(("R", top))
        else:
            groups.append(("M", 0))
    return groups


def constructive_quantizer(
    P: Distribution, Q: Distribution, spec: DivergenceSpec, D: int
) -> QuantizerReport:
    """Threshold quantizer with the certified reverse data-processing guarantee."""
    _check_d(D)
    if spec.tvlike is None:
        raise MissingTvLikeParams(f"{spec.name} carries no TV-like parameters")
    prof = ratio_profile(P, Q)
    return constructive_on_profile(prof, spec, D)


def constructive_on_profile(
    prof: LikelihoodRatioProfile, spec: DivergenceSpec, D: int
) -> QuantizerReport:
    _check_d(D)
    params = spec.tvlike
    if params is None:
        raise MissingTvLikeParams(f"{spec.name} carries no TV-like parameters")
    p, q, r = prof.p, prof.q, prof.ratios
    k = len(prof)
    finite = q > 0
    contrib = np.zeros(k)
    contrib[finite] = perspective(p[finite], q[finite], spec)
    contrib[~finite] = spec.f_prime_inf * p[~finite]
    divergence = math.fsum(contrib)
    if divergence <= 0:
        raise ZeroDivergence("D_f(P||Q) is zero; nothing to preserve")
    b = params.b
    bounded = r <= b
    s1 = math.fsum(contrib[bounded])
    s2 = math.fsum(contrib[~bounded])
    guarantee, R = reverse_dpi_guarantee(divergence, k, D, params.C1, params.C2, params.B)

    if s2 >= s1:
        c = int(np.argmax(~bounded))
        ch = ThresholdChannel(prof, (c,) if 0 < c < k else (), D)
        return QuantizerReport(
            ch, threshold_value(ch, spec), guarantee, Case.HEAVY_TAIL, R,
            divergence, s1, s2, variant="split-at-b",
        )

    z = np.where(bounded & finite, spec.f(np.where(finite, r, 1.0)), 0.0)
    side = np.where(~bounded, 0, np.where(r < 1, -1, 1))
    # f may reach B at an endpoint (TV at ratio 0); the staircase needs Z < B
    top_b = params.B if z.max() < params.B else float(z.max()) * (1 + 1e-9)
    candidates = []
    variants = [("left", D, side == -1), ("right", D, side == 1)]
    if D >= 3:
        variants.append(("both", (D - 1) // 2 + 1, side != 0))
    for mode, n_levels, mask in variants:
        zz = np.where(mask, z, 0.0)
        if math.fsum(zz * q) <= 0:
            continue
        levels = reverse_markov_arrays(zz, q, top_b, n_levels)
        idx = np.where(mask, _level_index(zz, levels.levels), -1)
        groups = _pullback_groups(side, idx, ~bounded, mode)
        ch = ThresholdChannel(prof, _cuts_from_groups(groups), D)
        candidates.append((threshold_value(ch, spec), mode, ch, levels))
    achieved, mode, ch, levels = max(candidates, key=lambda c: c[0])
    return QuantizerReport(
        ch, achieved, guarantee, Case.BOUNDED_PART, R, divergence, s1, s2,
        levels=levels, staircase=levels.objective, variant=mode,
    )


def hellinger_quantizer(P: Distribution, Q: Distribution, lam: float, D: int) -> QuantizerReport:
    """Constructive quantizer for H_lam, run in the orientation whose TV-like constants hold.

    ``H_lam(P, Q) = H_{1-lam}(Q, P)`` and a threshold channel for ``(Q, P)``
    is one for ``(P, Q)`` with the cell order reversed, so the divergence
    values and the guarantee carry over unchanged.
    """
    spec = hellinger_spec(lam)
    if spec.tvlike is not None:
        return constructive_quantizer(P, Q, spec, D)
    flipped = hellinger_spec(1 - lam)
    if flipped.tvlike is None:
        raise MissingTvLikeParams(f"no valid TV-like constants for lambda={lam}")
    rep = constructive_quantizer(Q, P, flipped, D)
    prof = ratio_profile(P, Q)
    # reverse the cell order: entry i of (Q, P) is entry k-1-i of (P, Q)
    k = len(prof)
    cuts = tuple(sorted(k - c for c in rep.channel.cuts))
    ch = ThresholdChannel(prof, cuts, D)
    return QuantizerReport(
        ch, threshold_value(ch, spec), rep.guarantee, rep.case_taken, rep.R,
        rep.divergence, rep.s1, rep.s2, rep.levels, rep.staircase,
        rep.variant + " (swapped)",
    )


# ---------------------------------------------------------------------------
# hard instances


def hard_instance_scales(rho: float, k_override: int | None = None) -> tuple[int, np.ndarray, np.ndarray]:
    """Base law on scales ``2^-i`` carrying equal second moment ``rho/k`` each.

    Returns ``(k, values, masses)`` where ``values[k]`` is the extra atom
    ``2^-(k+1)`` that absorbs the leftover mass.
    """
    if not (0 < rho < 1):
        raise RhoTooLarge(f"rho must lie in (0, 1), got {rho}")

    def used(k: int) -> float:
        return rho / k * (4.0 ** (k + 1) - 4) / 3

    if k_override is None:
        k = 1
        while used(k + 1) <= 1:
            k += 1
    else:
        k = int(k_override)
        if k < 1 or used(k) > 1:
            raise RhoTooLarge(f"k={k} scales need more than unit mass at rho={rho}")
    if used(k) > 1 or k < 4:
        raise RhoTooLarge(f"rho={rho} leaves only k={k} scales; need k >= 4")
    i = np.arange(1, k + 1)
    values = np.append(2.0**-i, 2.0 ** -(k + 1))
    masses = rho / k * 4.0**i
    masses = np.append(masses, max(0.0, 1 - masses.sum()))
    return k, values, masses


def hard_instance(
    lam: float,
    rho: float,
    k_override: int | None = None,
    mapping: str = "balanced",
) -> tuple[Distribution, Distribution]:
    """Pair ``(P, Q)`` whose H_lam is spread evenly over ``k ~ log(1/rho)`` ratio scales.

    ``mapping="balanced"`` (default): half of Q sits on the scale atoms with
    ``dP/dQ = 1 + 2 x`` and the other half on one atom that absorbs the
    excess P-mass, so every ratio is finite and no single threshold isolates
    the divergence.  ``mapping="one_sided"``: ``dP/dQ = (1 - x^2)^(1/lam)``
    on the scale atoms and the leftover P-mass on an atom with ``q = 0``.
    Isolating that atom with one threshold keeps almost all of H_lam, so
    this variant is not hard for threshold channels.

    For ``lam < 1/2`` the pair is generated at ``1 - lam`` and swapped.
    """
    if not (0 < lam < 1):
        raise LambdaOutOfRange(f"lambda must lie in (0, 1), got {lam}")
    if lam < 0.5:
        P, Q = hard_instance(1 - lam, rho, k_override, mapping)
        return Q, P
    _, x, base = hard_instance_scales(rho, k_override)
    if mapping == "balanced":
        w, s = 0.5, 2.0
        q = np.append(w * base, 1 - w)
        scaled = w * base * (1 + s * x)
        p = np.append(scaled, 1 - scaled.sum())
    elif mapping == "one_sided":
        q = np.append(base, 0.0)
        scaled = (1 - x**2) ** (1 / lam) * base
        p = np.append(scaled, 1 - scaled.sum())
    else:
        raise ValueError(f"unknown mapping {mapping!r}")
    labels = list(range(len(p)))
    return _normalised(p, labels), _normalised(q, labels)


def _normalised(m: np.ndarray, labels) -> Distribution:
    m = np.maximum(m, 0.0)
    # the last atom absorbs rounding so the vector sums to one exactly
    m[-1] = max(0.0, 1.0 - math.fsum(m[:-1]))
    return validate(m.tolist(), labels)
