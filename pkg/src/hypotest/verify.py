"""Randomised property suites for every inequality the package relies on.

Each suite draws instances from a seeded generator, checks one family of
inequalities against exact oracles, and reports the number of checks, the
violations, the tightest margin and the first counterexample.  ``fault > 1``
deliberately tightens every certified bound by that factor, which must make
the suites fail; it exists to test the harness itself.
"""

from __future__ import annotations

import itertools
import math
import time
import zlib
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .bayes import (
    Prior,
    bayes_error,
    bayes_error_product,
    lambda_star,
    one_shot_bound_value,
    one_shot_lower_bound,
    pad_to_error,
)
from .distributions import Distribution, ThresholdChannel, align, ratio_profile, validate
from .divergences import (
    affinity,
    hellinger,
    hellinger_affinity,
    hellinger_generator,
    hellinger_spec,
    hellinger_tvlike_params,
)
from .errors import HypotestError
from .protocols import (
    n_star_id_threshold,
    n_star_seq_certified_lower,
    random_strategy,
    transcript_pair,
    sequential_affinity_check,
)
from .quantize import (
    best_threshold_channel,
    cell_value_matrix,
    hard_instance,
    hard_instance_scales,
    hellinger_quantizer,
    reverse_markov_arrays,
    reverse_markov_bound,
    staircase_objective,
)
from .sample_complexity import NotFoundBelow, sc_bounds, sc_exact

HARDNESS_TOL = 0.30


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    violations: int = 0
    worst_margin: float = math.inf
    counterexample: dict | None = None
    notes: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def check(self, margin: float, tol: float, dump: Callable[[], dict]) -> bool:
        """Record one inequality ``margin >= -tol``."""
        self.checks += 1
        self.worst_margin = min(self.worst_margin, margin)
        if margin >= -tol:
            return True
        self.violations += 1
        if self.counterexample is None:
            self.counterexample = dump()
        return False

    def summary(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (
            f"{status} {self.name}: {self.checks} checks, {self.violations} violations, "
            f"worst margin {self.worst_margin:.3e}, {self.seconds:.1f}s"
        )


# ---------------------------------------------------------------------------
# instance generators


def random_masses(rng: np.random.Generator, k: int, zero_prob: float = 0.0) -> np.ndarray:
    alpha = float(rng.choice([0.2, 1.0, 5.0]))
    m = rng.dirichlet(np.full(k, alpha))
    if zero_prob > 0:
        m = np.where(rng.random(k) < zero_prob, 0.0, m)
        if m.sum() == 0:
            m[rng.integers(k)] = 1.0
    return m / m.sum()


def _dist(m: np.ndarray) -> Distribution:
    m = np.asarray(m, dtype=float)
    m = m / math.fsum(m)
    return validate(m.tolist())


def random_pair(
    rng: np.random.Generator, k_max: int, k_min: int = 2, zero_prob: float = 0.1
) -> tuple[Distribution, Distribution]:
    """Random pair over ``k`` common labels: independent, nearby or sparse."""
    k = int(rng.integers(k_min, k_max + 1))
    p = random_masses(rng, k, zero_prob)
    kind = rng.integers(3)
    if kind == 0:
        q = random_masses(rng, k, zero_prob)
    else:
        eps = 10.0 ** rng.uniform(-4, -0.5)
        q = (1 - eps) * p + eps * random_masses(rng, k)
    if rng.random() < 0.5:
        p, q = q, p
    return _dist(p), _dist(q)


def _pair_dump(P: Distribution, Q: Distribution, **extra) -> dict:
    return {"p": list(P.masses), "q": list(Q.masses), **extra}


# ---------------------------------------------------------------------------
# suites


def suite_one_shot(rng, trials: int = 10_000, fault: float = 1.0) -> SuiteResult:
    res = SuiteResult("one-shot")
    padded = max(1, trials // 10)
    done = 0
    while done < trials:
        P, Q = random_pair(rng, 8)
        pi = float(rng.uniform(1e-3, 0.5))
        e = bayes_error(P, Q, pi)
        if not (0 < e < pi):
            continue
        done += 1
        bound = one_shot_lower_bound(P, Q, pi, e)
        res.check(e - fault * bound, 1e-12, lambda: _pair_dump(P, Q, pi=pi, delta=e, bound=bound))
    done = 0
    while done < padded:
        P, Q = random_pair(rng, 8)
        pi = float(rng.uniform(1e-3, 0.5))
        e = bayes_error(P, Q, pi)
        if not (0 < e < pi):
            continue
        delta = float(rng.uniform(e, pi))
        if not (e <= delta < pi):
            continue
        done += 1
        Pt, Qt, _ = pad_to_error(P, Q, pi, delta)
        et = bayes_error(Pt, Qt, pi)
        res.check(1e-12 - abs(et - delta), 0.0, lambda: _pair_dump(P, Q, pi=pi, delta=delta, padded=et))
        bound = one_shot_lower_bound(Pt, Qt, pi, et)
        res.check(
            delta - fault * bound, 1e-12, lambda: _pair_dump(P, Q, pi=pi, delta=delta, bound=bound)
        )
    return res


def suite_sandwich(rng, trials: int = 500, fault: float = 1.0, n_max: int = 200) -> SuiteResult:
    res = SuiteResult("sandwich")
    done = skipped = 0
    while done < trials:
        P, Q = random_pair(rng, 4, zero_prob=0.0)
        pi = float(rng.uniform(0.05, 0.5))
        delta = pi / float(np.exp(rng.uniform(np.log(16), np.log(1000))))
        b = sc_bounds(P, Q, pi, delta)
        exact = sc_exact(P, Q, pi, delta, n_max)
        if isinstance(exact, NotFoundBelow):
            if b.upper <= n_max:
                res.check(-1.0, 0.0, lambda: _pair_dump(P, Q, pi=pi, delta=delta, upper=b.upper))
                done += 1
            else:
                skipped += 1
            continue
        done += 1
        dump = lambda: _pair_dump(P, Q, pi=pi, delta=delta, lower=b.lower, upper=b.upper, exact=exact)
        res.check(exact - fault * b.lower, 0, dump)
        res.check(b.upper / fault - exact, 0, dump)
    res.notes.append(f"{skipped} draws skipped with n* > {n_max}")
    P = validate([0.25, 0.75])
    Q = validate([0.75, 0.25])
    b = sc_bounds(P, Q, 0.5, 1 / 32)
    exact = sc_exact(P, Q, 0.5, 1 / 32)
    res.notes.append(f"Ber(0.75)/Ber(0.25), pi=0.5, delta=1/32: {b.lower} <= {exact} <= {b.upper}")
    res.check(min(exact - fault * b.lower, b.upper / fault - exact), 0, lambda: {"worked": exact})
    return res


def random_z(rng) -> tuple[np.ndarray, np.ndarray, float]:
    m = int(rng.integers(1, 31))
    B = float(np.exp(rng.uniform(-2, 3)))
    if rng.random() < 0.5:
        values = rng.uniform(0, B, m)
    else:
        values = B * np.exp(-rng.uniform(0, 25, m))
    if rng.random() < 0.3:
        values[rng.random(m) < 0.3] = 0.0
    if not np.any(values > 0):
        values[0] = B / 2
    probs = random_masses(rng, m)
    if rng.random() < 0.5:
        # heavy mass on small values stresses the log(B/E[Z]) regime
        probs = probs * np.exp(-values / B * rng.uniform(0, 20))
        probs = probs / probs.sum()
    return values, probs, B


def _exhaustive_levels(values, probs, B: float, D: int) -> float:
    support = np.unique(values[probs > 0])
    best = 0.0
    for j in range(1, D):
        for combo in itertools.combinations(support, j):
            best = max(best, staircase_objective((*combo, B), values, probs))
    return best


def suite_revmarkov(rng, trials: int = 10_000, fault: float = 1.0) -> SuiteResult:
    res = SuiteResult("revmarkov")
    exhaustive = 0
    for _ in range(trials):
        values, probs, B = random_z(rng)
        if math.fsum(values * probs) <= 0:
            continue
        D = int(rng.integers(2, 9))
        lv = reverse_markov_arrays(values, probs, B, D)
        bound = reverse_markov_bound(values, probs, B, D)
        dump = lambda: {"values": values.tolist(), "probs": probs.tolist(), "B": B, "D": D}
        res.check(lv.objective - fault * bound, 1e-12, dump)
        direct = staircase_objective(lv.levels, values, probs)
        res.check(1e-12 * max(1.0, B) - abs(direct - lv.objective), 0.0, dump)
        if len(np.unique(values[probs > 0])) <= 12 and D <= 5:
            exhaustive += 1
            ex = _exhaustive_levels(values, probs, B, D)
            res.check(1e-12 * max(1.0, B) - abs(ex - lv.objective) * fault, 0.0, dump)
            # off-support levels never help either
            rand = np.sort(rng.uniform(0, B, D - 1))
            res.check(lv.objective - staircase_objective((*rand, B), values, probs), 1e-12, dump)
    res.notes.append(f"{exhaustive} instances also checked against exhaustive level search")
    return res


LAMBDAS = (0.3, 0.5, 0.7, 0.9)


def suite_revdpi(rng, trials: int = 10_000, fault: float = 1.0) -> SuiteResult:
    res = SuiteResult("revdpi")
    cases = {"HeavyTail": 0, "BoundedPart": 0}
    done = 0
    while done < trials:
        P, Q = random_pair(rng, 8)
        lam = float(rng.choice(LAMBDAS))
        D = int(rng.integers(2, 9))
        H = hellinger(P, Q, lam)
        if H <= 0:
            continue
        done += 1
        rep = hellinger_quantizer(P, Q, lam, D)
        cases[rep.case_taken.value] += 1
        _, best = best_threshold_channel(P, Q, D, hellinger_spec(lam))
        dump = lambda: _pair_dump(
            P, Q, lam=lam, D=D, achieved=rep.achieved, guarantee=rep.guarantee, H=H
        )
        res.check(rep.achieved - fault * rep.guarantee, 1e-12, dump)
        res.check(H - rep.achieved, 1e-12, dump)
        res.check(best - rep.achieved, 1e-12, dump)
        if rep.levels is not None:
            res.check(rep.achieved - rep.staircase, 1e-12, dump)
    res.notes.append(f"cases: {cases}")
    return res


def suite_sequential(rng, trials: int = 1000, fault: float = 1.0) -> SuiteResult:
    res = SuiteResult("sequential")
    done = 0
    while done < trials:
        P, Q = random_pair(rng, 5)
        if hellinger(P, Q, 0.5) <= 0:
            continue
        done += 1
        n = int(rng.integers(1, 5))
        D = int(rng.integers(2, 4))
        pi = float(rng.uniform(0.01, 0.5))
        delta = pi / float(rng.uniform(16, 1000))
        lam = lambda_star(pi, delta).value
        kind = "threshold" if rng.random() < 0.5 else "stochastic"
        strat = random_strategy(P, Q, n, D, rng, kind)
        lhs, rhs = sequential_affinity_check(P, Q, lam, strat, n)
        dump = lambda: _pair_dump(P, Q, lam=lam, n=n, D=D, kind=kind, lhs=lhs, rhs=rhs)
        res.check(lhs - fault * rhs, 1e-10, dump)
        tp, tq = transcript_pair(P, Q, strat, n)
        err = math.fsum(np.minimum(pi * tp.masses, (1 - pi) * tq.masses))
        res.check(err - fault * bayes_error_product(P, Q, pi, n), 1e-12, dump)
        if 0 < err < pi:
            lam_e = lambda_star(pi, err).value
            bound = one_shot_bound_value(pi, lam_e, affinity(tp.masses, tq.masses, lam_e))
            res.check(err - fault * bound, 1e-12, dump)
    return res


def suite_factor4(rng, trials: int = 100, fault: float = 1.0, n_max: int = 200) -> SuiteResult:
    res = SuiteResult("factor4")
    done = attempts = 0
    while done < trials and attempts < 50 * trials:
        attempts += 1
        P, Q = random_pair(rng, 6, zero_prob=0.0)
        D = int(rng.integers(2, 5))
        pi = float(rng.uniform(0.05, 0.5))
        delta = pi / float(np.exp(rng.uniform(np.log(16), np.log(500))))
        try:
            nid = n_star_id_threshold(P, Q, pi, delta, D, n_max)
        except HypotestError:
            continue
        if isinstance(nid, NotFoundBelow):
            continue
        done += 1
        lo = n_star_seq_certified_lower(P, Q, pi, delta, D)
        res.check(
            lo - fault * (nid - 1) / 4,
            0,
            lambda: _pair_dump(P, Q, pi=pi, delta=delta, D=D, n_id=nid, seq_lower=lo),
        )
    if done < trials:
        res.notes.append(f"only {done} terminating instances found")
        res.violations += 1
    return res


def hardness_sweep(rhos, lam: float = 0.5, D: int = 2) -> list[dict]:
    rows = []
    spec = hellinger_spec(lam)
    for rho in rhos:
        k, _, _ = hard_instance_scales(rho)
        P, Q = hard_instance(lam, rho)
        H = hellinger(P, Q, lam)
        _, best = best_threshold_channel(P, Q, D, spec)
        rows.append({"rho": float(rho), "k": k, "H_lambda": H, f"best_D{D}": best, "ratio": best / H})
    return rows


def suite_hardness(rng=None, trials: int = 0, fault: float = 1.0) -> SuiteResult:
    """Shape check over three decades of rho at lambda = 1/2, D = 2.

    The ratio best/H is compared with ``c / log(1/H)`` for the least-squares
    ``c``.  It must decrease from decade to decade and stay within 30% of the
    fitted curve.  Between decades the ratio can tick up when ``k`` jumps.
    """
    res = SuiteResult("hardness")
    rhos = np.logspace(-3, -6, 13)
    rows = hardness_sweep(rhos)
    ratio = np.array([r["ratio"] for r in rows])
    x = 1 / np.log(1 / np.array([r["H_lambda"] for r in rows]))
    c = float(ratio @ x / (x @ x))
    dev = ratio / (c * x) - 1
    tol = HARDNESS_TOL / fault
    for i, d in enumerate(dev):
        res.check(tol - abs(d), 0.0, lambda: rows[i])
    decades = ratio[::4]
    for a, b in zip(decades, decades[1:]):
        res.check(a - b, 0.0, lambda: {"decade_ratios": decades.tolist()})
    for r in rows:
        res.check(r["H_lambda"] / r["rho"] - 0.1, 0.0, lambda: r)
        res.check(10 - r["H_lambda"] / r["rho"], 0.0, lambda: r)
    res.notes.append(f"fitted c = {c:.4f}; deviations in [{dev.min():+.3f}, {dev.max():+.3f}]")
    return res


def _brute_bayes_product(p, q, pi, n) -> float:
    total = []
    for seq in itertools.product(range(len(p)), repeat=n):
        idx = list(seq)
        total.append(min(pi * np.prod(p[idx]), (1 - pi) * np.prod(q[idx])))
    return math.fsum(total)


def _exhaustive_threshold(p, q, D, spec) -> float:
    k = len(p)
    V = cell_value_matrix(p, q, spec)
    best = -math.inf
    for m in range(1, min(D, k) + 1):
        for cuts in itertools.combinations(range(1, k), m - 1):
            b = (0, *cuts, k)
            best = max(best, math.fsum(V[a, c] for a, c in zip(b[:-1], b[1:])))
    return best


def suite_oracles(rng, trials: int = 300, fault: float = 1.0) -> SuiteResult:
    res = SuiteResult("oracles")
    err = (fault - 1) * 1e-6
    for _ in range(trials):
        P, Q = random_pair(rng, 3)
        labels, p, q = align(P, Q)
        pi = float(rng.uniform(0.01, 0.5))
        n = int(rng.integers(1, 9))
        got = bayes_error_product(P, Q, pi, n)
        want = _brute_bayes_product(p, q, pi, n)
        res.check(1e-10 - abs(got - want) - err, 0.0, lambda: _pair_dump(P, Q, pi=pi, n=n))
    for _ in range(trials):
        P, Q = random_pair(rng, 10)
        D = int(rng.integers(2, 5))
        lam = float(rng.uniform(0.05, 0.95))
        spec = hellinger_spec(lam)
        prof = ratio_profile(P, Q)
        _, got = best_threshold_channel(P, Q, D, spec)
        want = _exhaustive_threshold(prof.p, prof.q, D, spec)
        res.check(1e-12 - abs(got - want) - err, 0.0, lambda: _pair_dump(P, Q, lam=lam, D=D))
    for _ in range(trials):
        P, Q = random_pair(rng, 4)
        lam = float(rng.uniform(0.05, 0.95))
        _, p, q = align(P, Q)
        pn, qn = p, q
        for _ in range(3):
            pn, qn = np.kron(pn, p), np.kron(qn, q)
        got = affinity(pn, qn, lam)
        want = hellinger_affinity(P, Q, lam) ** 4
        res.check(1e-10 - abs(got - want) - err, 0.0, lambda: _pair_dump(P, Q, lam=lam))
    return res


def suite_interlambda(rng, trials: int = 2000, fault: float = 1.0) -> SuiteResult:
    res = SuiteResult("interlambda")
    for _ in range(trials):
        P, Q = random_pair(rng, 8)
        a, b = np.sort(rng.uniform(0.01, 0.99, 2))
        if a == b:
            continue
        ha, hb = hellinger(P, Q, a), hellinger(P, Q, b)
        dump = lambda: _pair_dump(P, Q, alpha=a, beta=b, Ha=ha, Hb=hb)
        res.check(ha - fault * a / b * hb, 1e-12, dump)
        res.check((1 - a) / (1 - b) * hb / fault - ha, 1e-12, dump)
    # generator grid checks; the lower linear constant is only claimed for lam <= 1/2,
    # larger lam reach it through H_lam(P, Q) = H_{1-lam}(Q, P)
    for lam in np.linspace(0.01, 0.99, 99):
        f = hellinger_generator(lam)
        t = hellinger_tvlike_params(lam)
        low = np.linspace(0, 1 / lam, 20_001)
        res.check(t.B / fault - f(low).max(), 1e-12, lambda: {"lam": lam, "check": "f <= B"})
        high = np.exp(np.linspace(math.log(1 / lam), math.log(1e8), 20_001))
        res.check(np.min(t.C2 * high / fault - f(high)), 1e-12, lambda: {"lam": lam, "check": "C2"})
        if lam <= 0.5:
            res.check(
                np.min(f(high) - fault * t.C1 * high), 1e-12, lambda: {"lam": lam, "check": "C1"}
            )
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "one-shot": suite_one_shot,
    "sandwich": suite_sandwich,
    "revmarkov": suite_revmarkov,
    "revdpi": suite_revdpi,
    "sequential": suite_sequential,
    "factor4": suite_factor4,
    "hardness": suite_hardness,
    "oracles": suite_oracles,
    "interlambda": suite_interlambda,
}


def suite_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def run_suite(name: str, seed: int = 0, trials: int | None = None, fault: float = 1.0) -> SuiteResult:
    fn = SUITES[name]
    kwargs = {"fault": fault}
    if trials is not None:
        kwargs["trials"] = trials
    start = time.perf_counter()
    res = fn(suite_rng(seed, name), **kwargs)
    res.seconds = time.perf_counter() - start
    return res
