"""Distributed protocols: transcripts of sequential strategies and certified sample sizes.

Each of ``n`` agents sees one sample and sends one of ``D`` symbols through a
channel that may depend on the symbols already sent.  Transcript laws are
computed exactly by expanding the ``D^n`` tree.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .bayes import Prior, _bayes_arrays, _prior, lambda_star
from .config import transcript_cap
from .distributions import (
    Channel,
    Distribution,
    ThresholdChannel,
    align,
    ratio_profile,
)
from .divergences import affinity, hellinger_spec
from .errors import (
    DimensionMismatch,
    IdenticalDistributions,
    SupportTooLarge,
    TranscriptSpaceTooLarge,
)
from .quantize import _check_d, best_threshold_on_profile
from .sample_complexity import DEFAULT_N_MAX, NotFoundBelow, check_delta, sc_exact_arrays

MAX_ID_SUPPORT = 10

AnyChannel = Channel | ThresholdChannel


@dataclass(frozen=True)
class SequentialStrategy:
    """``choose(i, prefix)`` gives the channel of agent ``i`` after seeing ``prefix``.

    Outputs are ``0..D-1``; ``prefix`` is a tuple of the earlier outputs.
    """

    rounds: int
    n_outputs: int
    choose: Callable[[int, tuple[int, ...]], AnyChannel]


@dataclass(frozen=True)
class TranscriptDistribution:
    """Law of the transcript ``(y_1, ..., y_n)``; ``masses[j]`` is the ``j``-th transcript
    in lexicographic order (base-``D`` digits, first round most significant)."""

    masses: np.ndarray
    n_outputs: int
    rounds: int

    def mass(self, transcript: tuple[int, ...]) -> float:
        idx = 0
        for y in transcript:
            idx = idx * self.n_outputs + y
        return float(self.masses[idx])

    def as_dict(self) -> dict[tuple[int, ...], float]:
        keys = itertools.product(range(self.n_outputs), repeat=self.rounds)
        return dict(zip(keys, self.masses.tolist()))


def constant_strategy(channel: AnyChannel, rounds: int) -> SequentialStrategy:
    return SequentialStrategy(rounds, channel.n_outputs, lambda i, prefix: channel)


def _matrix(channel: AnyChannel, labels: tuple, D: int) -> np.ndarray:
    if isinstance(channel, ThresholdChannel):
        channel = channel.to_channel(labels)
    m = channel.matrix
    if m.shape != (len(labels), D):
        raise DimensionMismatch(f"channel shape {m.shape}, expected {(len(labels), D)}")
    return m


def _check_transcript_space(D: int, n: int, cap: int | None) -> None:
    limit = transcript_cap(cap)
    # compare in logs: D**n may be astronomically large
    if n * math.log(D) > math.log(limit) + 1e-12:
        raise TranscriptSpaceTooLarge(f"D^n = {D}^{n} exceeds the transcript cap {limit}")


def _transcripts(
    inputs: list[np.ndarray], labels: tuple, strategy: SequentialStrategy, n: int, cap: int | None
) -> list[np.ndarray]:
    """Expand the strategy tree once, pushing every input law through it."""
    D = strategy.n_outputs
    _check_transcript_space(D, n, cap)
    layers = [np.ones(1) for _ in inputs]
    prefixes: list[tuple[int, ...]] = [()]
    for i in range(n):
        step = np.stack([_matrix(strategy.choose(i, pre), labels, D) for pre in prefixes])
        # step[j] maps inputs to outputs after prefix j; child index = j*D + y
        layers = [(lay[:, None] * (x @ step)).reshape(-1) for lay, x in zip(layers, inputs)]
        prefixes = [pre + (y,) for pre in prefixes for y in range(D)]
    return layers


def transcript_distribution(
    P: Distribution, strategy: SequentialStrategy, n: int, cap: int | None = None
) -> TranscriptDistribution:
    (masses,) = _transcripts([P.array], P.labels, strategy, n, cap)
    return TranscriptDistribution(masses, strategy.n_outputs, n)


def transcript_pair(
    P: Distribution, Q: Distribution, strategy: SequentialStrategy, n: int, cap: int | None = None
) -> tuple[TranscriptDistribution, TranscriptDistribution]:
    labels, p, q = align(P, Q)
    tp, tq = _transcripts([p, q], labels, strategy, n, cap)
    D = strategy.n_outputs
    return TranscriptDistribution(tp, D, n), TranscriptDistribution(tq, D, n)


def protocol_error(
    P: Distribution,
    Q: Distribution,
    prior: Prior | float,
    strategy: SequentialStrategy,
    n: int,
    cap: int | None = None,
) -> float:
    """Error of the MAP decision from the transcript."""
    prior = _prior(prior)
    tp, tq = transcript_pair(P, Q, strategy, n, cap)
    return _bayes_arrays(tp.masses, tq.masses, prior.pi)


def beta_star(P: Distribution, Q: Distribution, lam: float, D: int) -> float:
    """Smallest affinity reachable through a D-output channel (a threshold channel)."""
    _check_d(D)
    return 1.0 - best_threshold_on_profile(ratio_profile(P, Q), D, hellinger_spec(lam))[1]


def beta_star_channel(P: Distribution, Q: Distribution, lam: float, D: int) -> ThresholdChannel:
    _check_d(D)
    return best_threshold_on_profile(ratio_profile(P, Q), D, hellinger_spec(lam))[0]


def sequential_affinity_check(
    P: Distribution,
    Q: Distribution,
    lam: float,
    strategy: SequentialStrategy,
    n: int,
    cap: int | None = None,
) -> tuple[float, float]:
    """``(beta_lam(transcript laws), beta_star^n)``; the first is never below the second."""
    tp, tq = transcript_pair(P, Q, strategy, n, cap)
    lhs = affinity(tp.masses, tq.masses, lam)
    return lhs, beta_star(P, Q, lam, strategy.n_outputs) ** n


def random_strategy(
    P: Distribution,
    Q: Distribution,
    n: int,
    D: int,
    rng: np.random.Generator,
    kind: str = "threshold",
) -> SequentialStrategy:
    """Strategy with an independently drawn channel at every prefix.

    ``kind="threshold"`` draws random contiguous splits of the ratio profile,
    ``kind="stochastic"`` random row-stochastic matrices.  All channels are
    drawn up front in breadth-first prefix order, so the result depends on
    the seed only.
    """
    _check_d(D)
    labels, _, _ = align(P, Q)
    prof = ratio_profile(P, Q)
    k = len(prof)
    table: dict[tuple[int, ...], AnyChannel] = {}
    for i in range(n):
        for pre in itertools.product(range(D), repeat=i):
            if kind == "threshold":
                m = int(rng.integers(1, min(D, k) + 1))
                cuts = np.sort(rng.choice(np.arange(1, k), size=m - 1, replace=False)) if m > 1 else []
                table[pre] = ThresholdChannel(prof, tuple(int(c) for c in cuts), D)
            elif kind == "stochastic":
                table[pre] = Channel(rng.dirichlet(np.ones(D), size=len(labels)))
            else:
                raise ValueError(f"unknown strategy kind {kind!r}")
    return SequentialStrategy(n, D, lambda i, pre: table[tuple(pre)])


def _finest_threshold_channels(k: int, D: int):
    """All partitions of ``0..k-1`` into ``min(D, k)`` contiguous cells.

    Coarser partitions are garblings of some finest one, so they can only do worse.
    """
    m = min(D, k)
    for cuts in itertools.combinations(range(1, k), m - 1):
        yield cuts


def n_star_id_threshold(
    P: Distribution,
    Q: Distribution,
    prior: Prior | float,
    delta: float,
    D: int,
    n_max: int = DEFAULT_N_MAX,
    cap: int | None = None,
) -> int | NotFoundBelow:
    """Smallest ``n`` at which one threshold channel used by every agent reaches error ``delta``."""
    _check_d(D)
    prior = _prior(prior)
    prof = ratio_profile(P, Q)
    k = len(prof)
    if k > MAX_ID_SUPPORT:
        raise SupportTooLarge(f"profile has {k} atoms; the channel search allows {MAX_ID_SUPPORT}")
    best: int | None = None
    for cuts in _finest_threshold_channels(k, D):
        tp, tq = ThresholdChannel(prof, cuts, D).output_masses()
        keep = (tp > 0) | (tq > 0)
        limit = n_max if best is None else best - 1
        if limit < 1:
            break
        n = sc_exact_arrays(tp[keep], tq[keep], prior.pi, delta, limit, cap)
        if isinstance(n, int):
            best = n
    return NotFoundBelow(n_max) if best is None else best


def n_star_seq_certified_lower(
    P: Distribution, Q: Distribution, prior: Prior | float, delta: float, D: int
) -> int:
    """Rounds below which no sequential D-ary protocol reaches error ``delta``.

    Any protocol with ``n`` rounds has error at least
    ``(1/4) pi^lam (1-pi)^(1-lam) beta_star^(2n)`` at ``lam = lam*``.
    """
    prior = _prior(prior)
    check_delta(prior, delta)
    ls = lambda_star(prior, delta)
    lam = ls.value
    h = best_threshold_on_profile(ratio_profile(P, Q), D, hellinger_spec(lam))[1]
    if h <= 0:
        raise IdenticalDistributions("beta_star = 1: no channel separates the hypotheses")
    if h >= 1:
        return 1
    log_beta = math.log1p(-h)
    log_c = lam * math.log(prior.pi) + (1 - lam) * math.log(prior.bar)
    x = (math.log(4 * delta) - log_c) / (2 * log_beta)
    return max(1, math.ceil(x))
