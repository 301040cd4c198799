"""Discrete distributions, likelihood-ratio profiles, channels and type classes.

Everything here is immutable once built.  Masses are stored as floats; when
a distribution is built from ``Fraction``/``int`` masses the exact values are
kept as well so that equal likelihood ratios can be detected without
rounding.
"""

from __future__ import annotations

import math
from collections.abc import Hashable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np
from scipy.special import gammaln

from .config import type_class_cap
from .errors import (
    DimensionMismatch,
    DuplicateLabel,
    EnumerationTooLarge,
    LabelMismatch,
    MassSumOutOfTolerance,
    NegativeMass,
    ValidationError,
)

SUM_TOL = 1e-12
RATIO_RTOL = 1e-12


@dataclass(frozen=True)
class Distribution:
    """A finite probability vector with labeled atoms."""

    labels: tuple
    masses: tuple[float, ...]
    exact: tuple[Fraction, ...] | None = field(default=None, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.masses)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)

    def mass(self, label: Hashable) -> float:
        return self.masses[self.labels.index(label)]

    def support(self) -> tuple:
        return tuple(lab for lab, m in zip(self.labels, self.masses) if m > 0)


def validate(raw_masses: Sequence, labels: Sequence | None = None) -> Distribution:
    """Check ``raw_masses`` and wrap them in a :class:`Distribution`.

    Masses are never renormalised; a sum off by more than ``1e-12`` is an
    error.  Exact rationals are preserved alongside the float values.
    """
    masses = list(raw_masses)
    if labels is None:
        labels = list(range(len(masses)))
    labels = tuple(labels)
    if len(labels) != len(masses):
        raise DimensionMismatch(f"{len(labels)} labels for {len(masses)} masses")
    if len(set(labels)) != len(labels):
        raise DuplicateLabel("labels must be unique")
    if not masses:
        raise MassSumOutOfTolerance("empty distribution")
    exact = None
    if all(isinstance(m, Rational) and not isinstance(m, bool) for m in masses):
        exact = tuple(Fraction(m) for m in masses)
    try:
        floats = tuple(float(m) for m in masses)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"masses must be real numbers: {exc}") from exc
    for m in floats:
        if not math.isfinite(m):
            raise ValidationError("masses must be finite")
        if m < 0:
            raise NegativeMass(f"negative mass {m}")
    total = sum(exact) if exact is not None else math.fsum(floats)
    if abs(float(total) - 1.0) > SUM_TOL:
        raise MassSumOutOfTolerance(f"masses sum to {float(total)!r}")
    return Distribution(labels, floats, exact)


def bernoulli(p: float | Fraction) -> Distribution:
    """Ber(p) on labels ``(0, 1)`` with ``P(1) = p``."""
    return validate([1 - p, p])


def from_array(masses: np.ndarray, labels: Sequence | None = None) -> Distribution:
    """Like :func:`validate` but clips tiny negative round-off first."""
    arr = np.asarray(masses, dtype=float)
    arr = np.where((arr < 0) & (arr > -1e-15), 0.0, arr)
    return validate(arr.tolist(), labels)


def align(P: Distribution, Q: Distribution) -> tuple[tuple, np.ndarray, np.ndarray]:
    """Return ``(labels, p, q)`` with ``q`` reordered to P's label order."""
    if P.labels == Q.labels:
        return P.labels, P.array, Q.array
    if set(P.labels) != set(Q.labels) or len(P.labels) != len(Q.labels):
        raise LabelMismatch("P and Q must share the same label set")
    index = {lab: i for i, lab in enumerate(Q.labels)}
    q = np.array([Q.masses[index[lab]] for lab in P.labels])
    return P.labels, P.array, q


def _aligned_exact(P: Distribution, Q: Distribution) -> tuple[tuple, tuple] | None:
    if P.exact is None or Q.exact is None:
        return None
    index = {lab: i for i, lab in enumerate(Q.labels)}
    return P.exact, tuple(Q.exact[index[lab]] for lab in P.labels)


def validate_pair(
    p: Sequence, q: Sequence, labels: Sequence | None = None
) -> tuple[Distribution, Distribution]:
    """Validate two mass vectors over one label set, dropping atoms null under both."""
    if len(p) != len(q):
        raise DimensionMismatch(f"p has {len(p)} atoms, q has {len(q)}")
    if labels is None:
        labels = list(range(len(p)))
    if len(labels) != len(p):
        raise DimensionMismatch(f"{len(labels)} labels for {len(p)} masses")
    P = validate(p, labels)
    Q = validate(q, labels)
    keep = [i for i in range(len(p)) if P.masses[i] > 0 or Q.masses[i] > 0]
    if len(keep) == len(p):
        return P, Q
    pick = lambda seq: [seq[i] for i in keep]  # noqa: E731
    return (
        validate(pick(list(p)), pick(list(labels))),
        validate(pick(list(q)), pick(list(labels))),
    )


# ---------------------------------------------------------------------------
# likelihood-ratio profile


@dataclass(frozen=True)
class ProfileEntry:
    ratio: float
    p_mass: float
    q_mass: float
    labels: tuple = ()


@dataclass(frozen=True)
class LikelihoodRatioProfile:
    """Atoms of ``(P, Q)`` merged by equal ``dP/dQ`` and sorted by ratio."""

    entries: tuple[ProfileEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([e.ratio for e in self.entries])

    @property
    def p(self) -> np.ndarray:
        return np.array([e.p_mass for e in self.entries])

    @property
    def q(self) -> np.ndarray:
        return np.array([e.q_mass for e in self.entries])

    def entry_of(self) -> dict:
        """Map every label to the index of the entry containing it."""
        return {lab: i for i, e in enumerate(self.entries) for lab in e.labels}


def _same_ratio(a, b, exact) -> bool:
    (pa, qa), (pb, qb) = a, b
    if exact:
        return pa * qb == pb * qa
    ra, rb = pa / qa, pb / qb
    return abs(ra - rb) <= RATIO_RTOL * max(ra, rb)


def ratio_profile(P: Distribution, Q: Distribution) -> LikelihoodRatioProfile:
    labels, p, q = align(P, Q)
    ex = _aligned_exact(P, Q)
    exact = ex is not None
    pv, qv = ex if exact else (p.tolist(), q.tolist())

    zero_labels, inf_labels, finite = [], [], []
    zero_q = inf_p = 0.0
    for i, lab in enumerate(labels):
        if p[i] == 0 and q[i] == 0:
            continue
        if q[i] == 0:
            inf_labels.append(lab)
            inf_p += p[i]
        elif p[i] == 0:
            zero_labels.append(lab)
            zero_q += q[i]
        else:
            finite.append(i)

    finite.sort(key=lambda i: (pv[i] / qv[i], i))
    entries: list[ProfileEntry] = []
    if zero_labels:
        entries.append(ProfileEntry(0.0, 0.0, zero_q, tuple(zero_labels)))
    group: list[int] = []

    def flush() -> None:
        if not group:
            return
        ps = math.fsum(p[j] for j in group)
        qs = math.fsum(q[j] for j in group)
        if exact:
            ratio = float(sum(pv[j] for j in group) / sum(qv[j] for j in group))
        else:
            ratio = ps / qs
        entries.append(ProfileEntry(ratio, ps, qs, tuple(labels[j] for j in group)))

    for i in finite:
        if group and _same_ratio((pv[group[0]], qv[group[0]]), (pv[i], qv[i]), exact):
            group.append(i)
        else:
            flush()
            group = [i]
    flush()
    if inf_labels:
        entries.append(ProfileEntry(math.inf, inf_p, 0.0, tuple(inf_labels)))
    return LikelihoodRatioProfile(tuple(entries))


# ---------------------------------------------------------------------------
# channels


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix: one row per input atom, one column per output."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
            raise DimensionMismatch("channel matrix must be a non-empty 2-D array")
        if np.any(m < 0):
            raise NegativeMass("channel entries must be nonnegative")
        if np.any(np.abs(m.sum(axis=1) - 1.0) > SUM_TOL):
            raise MassSumOutOfTolerance("channel rows must sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_inputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def identity(cls, k: int) -> Channel:
        return cls(np.eye(k))

    @classmethod
    def constant(cls, k: int, d: int, output: int = 0) -> Channel:
        m = np.zeros((k, d))
        m[:, output] = 1.0
        return cls(m)


def pushforward(P: Distribution, T: Channel) -> Distribution:
    if T.n_inputs != len(P):
        raise DimensionMismatch(f"channel has {T.n_inputs} rows, P has {len(P)} atoms")
    out = P.array @ T.matrix
    return from_array(out)


@dataclass(frozen=True)
class ThresholdChannel:
    """Contiguous partition of a ratio profile.

    ``cuts`` are the start indices of cells 2..m in the profile, so a channel
    with ``m`` nonempty cells has ``m - 1`` cuts.  ``n_outputs`` (D) may exceed
    ``m``; the extra outputs are never used.
    """

    profile: LikelihoodRatioProfile
    cuts: tuple[int, ...]
    n_outputs: int

    def __post_init__(self) -> None:
        k = len(self.profile)
        cuts = tuple(int(c) for c in self.cuts)
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ValidationError("cut indices must be strictly increasing")
        if cuts and (cuts[0] <= 0 or cuts[-1] >= k):
            raise ValidationError("cut indices must lie strictly inside the profile")
        if len(cuts) + 1 > self.n_outputs:
            raise ValidationError("more cells than outputs")
        object.__setattr__(self, "cuts", cuts)

    @property
    def cells(self) -> list[tuple[int, int]]:
        bounds = (0, *self.cuts, len(self.profile))
        return list(zip(bounds[:-1], bounds[1:]))

    def cell_of_entry(self) -> np.ndarray:
        out = np.empty(len(self.profile), dtype=int)
        for j, (a, b) in enumerate(self.cells):
            out[a:b] = j
        return out

    def output_masses(self) -> tuple[np.ndarray, np.ndarray]:
        """Output laws ``(TP, TQ)`` as length-D arrays."""
        tp = np.zeros(self.n_outputs)
        tq = np.zeros(self.n_outputs)
        p, q = self.profile.p, self.profile.q
        for j, (a, b) in enumerate(self.cells):
            tp[j] = math.fsum(p[a:b])
            tq[j] = math.fsum(q[a:b])
        return tp, tq

    def to_channel(self, labels: Sequence) -> Channel:
        """Deterministic channel over ``labels``; atoms outside the profile go to output 0."""
        where = self.profile.entry_of()
        cell = self.cell_of_entry()
        m = np.zeros((len(labels), self.n_outputs))
        for i, lab in enumerate(labels):
            m[i, cell[where[lab]] if lab in where else 0] = 1.0
        return Channel(m)


# ---------------------------------------------------------------------------
# type classes


@dataclass(frozen=True)
class TypeClass:
    counts: tuple[int, ...]
    log_multiplicity: float
    log_p_mass: float
    log_q_mass: float


def count_compositions(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


def compositions(n: int, k: int) -> np.ndarray:
    """All weak compositions of ``n`` into ``k`` parts, lexicographic, shape (C, k)."""
    if k < 1 or n < 0:
        raise ValueError("need k >= 1 and n >= 0")
    dtype = np.int32
    # rows with running sums <= n, built one column at a time
    rows = np.zeros((1, 0), dtype=dtype)
    sums = np.zeros(1, dtype=np.int64)
    for _ in range(k - 1):
        reps = n - sums + 1
        idx = np.repeat(np.arange(len(rows)), reps)
        starts = np.cumsum(reps) - reps
        new = (np.arange(reps.sum()) - np.repeat(starts, reps)).astype(dtype)
        rows = np.column_stack([rows[idx], new])
        sums = sums[idx] + new
    last = (n - sums).astype(dtype)
    return np.column_stack([rows, last])


def _xlogy_rows(counts: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Row-wise sum of ``counts * log(probs)`` with ``0 * log 0 = 0``."""
    zero = probs <= 0
    logp = np.log(np.where(zero, 1.0, probs))
    out = counts @ logp
    if zero.any():
        hit = (counts[:, zero] > 0).any(axis=1)
        out = np.where(hit, -np.inf, out)
    return out


def type_class_table(
    p: np.ndarray, q: np.ndarray, n: int, cap: int | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Arrays ``(counts, log_multiplicity, log_p_seq, log_q_seq)`` for all type classes.

    ``log_p_seq`` is the log-probability of a single sequence in the class,
    so the class mass is ``exp(log_multiplicity + log_p_seq)``.
    """
    k = len(p)
    if n < 1:
        raise ValueError("n must be a positive integer")
    size = count_compositions(n, k)
    limit = type_class_cap(cap)
    if size > limit:
        raise EnumerationTooLarge(f"{size} type classes exceed the cap {limit}")
    counts = compositions(n, k)
    lg = gammaln(np.arange(n + 2, dtype=float))
    log_mult = lg[n + 1] - lg[counts + 1].sum(axis=1)
    return counts, log_mult, _xlogy_rows(counts, p), _xlogy_rows(counts, q)


def enumerate_type_classes(
    P: Distribution, Q: Distribution, n: int, cap: int | None = None
) -> Iterator[TypeClass]:
    """Yield every type class of length-``n`` sequences over the shared support."""
    _, p, q = align(P, Q)
    counts, log_mult, lp, lq = type_class_table(p, q, n, cap)
    for c, lm, a, b in zip(counts, log_mult, lp, lq):
        yield TypeClass(tuple(int(x) for x in c), float(lm), float(lm + a), float(lm + b))
