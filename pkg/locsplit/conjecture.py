"""Instances of the locally-split-values conjecture: hypotheses, conditions, search and transport.

An instance is a list of entries (P_i, L_i, b_i), a finite set S of places of Q
containing the real place and a local target t_v (with a precision) at some of
the places of S. Places of S without a target are unconstrained.
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
import logging
import math

from . import config
from .arith import (
    INFINITY,
    CongruenceSystem,
    as_rational,
    crt_solve,
    factor,
    rational_residue,
    valuation,
)
from .errors import (
    DomainError,
    HypothesisFailure,
    InfeasibleAtPrecision,
    InternalConsistencyError,
    NeedsSInclusion,
    VacuousInstance,
)
from .fields import (
    T as _T,
    DegreeOne,
    NumberFieldAbs,
    RelativeExtension,
    absolute_polynomial,
    has_degree_one_place_over,
    positive_valuation_place,
    splits_completely,
)
from .local_symbols import (
    ASSUMED,
    REAL,
    Norm,
    NormCandidate,
    NormVerdict,
    Place,
    element_norm_test,
    local_norm_test,
    sorted_places,
)
from .polys import PolyOverQ
from .workers import merge_counters, run_chunks

logger = logging.getLogger(__name__)


# -- instance model -----------------------------------------------------------


@dataclass(frozen=True)
class Entry:
    """One (P_i, L_i, b_i): L_i/k_i with k_i = Q[t]/(P_i), b_i a nonzero element of k_i."""

    extension: RelativeExtension
    b: object

    def __post_init__(self):
        if self.b.field != self.extension.base:
            raise DomainError("b must lie in the base field of L")
        if self.b.is_zero:
            raise DomainError("b must be nonzero")

    @property
    def field(self):
        return self.extension.base

    @property
    def P(self):
        return self.field.P

    def b_primes(self):
        """Primes above which b may fail to be a unit."""
        primes = set(self.b.denominator_primes())
        norm = self.b.norm()
        if abs(norm) != 1:
            primes.update(factor(norm).primes)
        return primes

    def required_primes(self):
        return set(self.extension.ramified_primes) | self.b_primes()

    def as_json(self):
        return {"P": str(self.P.as_expr(_T)), "g": str(self.extension), "b": str(self.b)}


@dataclass(frozen=True)
class LocalTarget:
    """t_v with precision N_v (finite place, a positive integer) or eps (real place)."""

    place: Place
    value: Fraction
    precision: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_rational(self.value))
        object.__setattr__(self, "precision", as_rational(self.precision))
        if self.precision <= 0:
            raise DomainError(f"precision at {self.place} must be positive")
        if not self.place.is_real and self.precision.denominator != 1:
            raise DomainError(f"p-adic precision at {self.place} must be an integer")

    def as_json(self):
        key = "eps" if self.place.is_real else "N"
        return {"v": str(self.place), "t": str(self.value), key: str(self.precision)}


def _merge_targets(targets):
    by_place = {}
    for target in targets:
        previous = by_place.get(target.place)
        if previous is None:
            by_place[target.place] = target
            continue
        if target.place.is_real:
            if previous != target:
                raise InfeasibleAtPrecision(f"two different real targets: {previous.as_json()} and {target.as_json()}")
            continue
        p = target.place.prime
        low = min(previous.precision, target.precision)
        if valuation(previous.value - target.value, p) < low:
            raise InfeasibleAtPrecision(
                f"targets at {p} are CRT-incompatible: t = {previous.value} (mod {p}^{previous.precision})"
                f" and t = {target.value} (mod {p}^{target.precision})"
            )
        by_place[target.place] = max(previous, target, key=lambda tg: tg.precision)
    return tuple(by_place[v] for v in sorted_places(by_place))


@dataclass(frozen=True)
class ConjectureInstance:
    entries: tuple
    S: frozenset = frozenset({REAL})
    targets: tuple = ()
    enlarged: tuple = field(default=(), compare=False)

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise DomainError("an instance needs at least one entry")
        polys = [e.P for e in entries]
        if len(set(polys)) != len(polys):
            raise DomainError("the polynomials P_i must be pairwise distinct")
        S = set(self.S) | {REAL}
        required = set()
        for entry in entries:
            required |= entry.required_primes()
        added = sorted(p for p in required if Place.finite(p) not in S)
        if added:
            logger.info("S enlarged by %s (ramification or non-unit b_i)", added)
        S |= {Place.finite(p) for p in added}
        targets = _merge_targets(self.targets)
        for target in targets:
            if target.place not in S:
                raise DomainError(f"target at {target.place}, which is not in S")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "S", frozenset(S))
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "enlarged", tuple(self.enlarged) + tuple(added))

    @property
    def n(self):
        return len(self.entries)

    @property
    def finite_primes(self):
        return sorted(v.prime for v in self.S if not v.is_real)

    def target_at(self, place):
        for target in self.targets:
            if target.place == place:
                return target
        return None

    @property
    def finite_targets(self):
        return [t for t in self.targets if not t.place.is_real]

    @property
    def real_target(self):
        return self.target_at(REAL)

    def relative_degree_product(self):
        return math.prod(e.extension.degree for e in self.entries)

    def as_json(self):
        return {
            "entries": [e.as_json() for e in self.entries],
            "S": [str(v) for v in sorted_places(self.S)],
            "targets": [t.as_json() for t in self.targets],
        }


# -- reports ------------------------------------------------------------------


class Overall(Enum):
    PASS = "Pass"
    FAIL = "Fail"
    CONDITIONAL = "Conditional"


class Mode(Enum):
    STRONG = "strong"
    WEAK = "weak"


@dataclass(frozen=True)
class Condition2Item:
    index: int
    prime: int
    place: object
    verdict: DegreeOne

    def as_json(self):
        return {"i": self.index, "p": self.prime, "w": self.place.as_json(), "degree_one": self.verdict.value}


@dataclass
class ConditionReport:
    t0: Fraction
    hypotheses: dict
    condition1: dict
    condition1prime: bool
    condition2: list
    overall: Overall
    witness: str = None
    assumptions: list = field(default_factory=list)
    needs_inclusion: int = None

    def as_json(self):
        return {
            "t0": str(self.t0),
            "overall": self.overall.value,
            "witness": self.witness,
            "needs_s_inclusion": self.needs_inclusion,
            "assumptions": list(self.assumptions),
            "condition1": {str(v): ok for v, ok in self.condition1.items()},
            "condition1prime": self.condition1prime,
            "condition2": [item.as_json() for item in self.condition2],
            "hypotheses": {f"{i},{v}": verdict.as_json() for (i, v), verdict in self.hypotheses.items()},
        }


# -- hypotheses and conditions ------------------------------------------------


def verify_hypotheses(inst, assumed=frozenset()):
    """Local norm verdicts of b_i(t_v - a_i) for every entry i (1-based) and every targeted v in S."""
    verdicts = {}
    for i, entry in enumerate(inst.entries, start=1):
        for target in inst.targets:
            candidate = NormCandidate(entry.b, target.value, target.precision)
            verdict = local_norm_test(candidate, entry.extension, target.place)
            if verdict.is_undetermined and (i, target.place) in assumed:
                verdict = NormVerdict.is_norm(ASSUMED)
            verdicts[(i, target.place)] = verdict
    return verdicts


def condition1_detail(inst, t0):
    t0 = as_rational(t0)
    detail = {}
    for target in inst.targets:
        if target.place.is_real:
            detail[target.place] = abs(t0 - target.value) <= target.precision
        else:
            detail[target.place] = valuation(t0 - target.value, target.place.prime) >= target.precision
    return detail


def check_condition1(inst, t0):
    return all(condition1_detail(inst, t0).values())


def check_condition1prime(inst, t0):
    """(1) at finite places; at the real place a common sign of (t0 - rho)(t_v - rho) over all real roots."""
    t0 = as_rational(t0)
    detail = condition1_detail(inst, t0)
    if not all(ok for v, ok in detail.items() if not v.is_real):
        return False
    target = inst.real_target
    if target is None:
        return True
    signs = set()
    for entry in inst.entries:
        for root in entry.field.real_roots:
            signs.add(root.compare(t0) * root.compare(target.value))
    return 0 not in signs and len(signs) <= 1


def check_condition2(inst, t0):
    """Degree-1 place verdicts at every prime outside S where some t0 - a_i has positive valuation."""
    t0 = as_rational(t0)
    finite_S = set(inst.finite_primes)
    items = []
    for i, entry in enumerate(inst.entries, start=1):
        value = entry.P(t0)
        if value == 0:
            raise DomainError(f"t0 = {t0} is a root of P_{i}")
        if abs(value.numerator) == 1:
            continue
        for p in factor(value.numerator).primes:
            if p in finite_S:
                continue
            w = positive_valuation_place(entry.field, t0, p)
            if w is None:
                continue
            items.append(Condition2Item(i, p, w, has_degree_one_place_over(entry.extension, w)))
    return items


def evaluate(inst, t0, hypotheses=None, assumed=frozenset(), mode=Mode.STRONG):
    """Full ConditionReport for a candidate t0."""
    t0 = as_rational(t0)
    hypotheses = verify_hypotheses(inst, assumed) if hypotheses is None else hypotheses
    c1 = condition1_detail(inst, t0)
    c1p = check_condition1prime(inst, t0)
    mode = Mode(mode)
    witness = None
    needs_inclusion = None
    assumptions = []
    try:
        c2 = check_condition2(inst, t0)
    except NeedsSInclusion as e:
        c2 = []
        needs_inclusion = e.prime
        witness = f"prime {e.prime} outside S needs inclusion in S"
        logger.debug("t0 = %s: %s", t0, witness)
    except DomainError as e:
        c2 = []
        witness = str(e)
    for (i, v), verdict in hypotheses.items():
        if verdict.kind is Norm.NOT_NORM and witness is None:
            witness = f"hypothesis fails for entry {i} at {v}"
        elif verdict.is_undetermined:
            assumptions.append(f"hypothesis entry {i} at {v}: {verdict.reason}")
    if witness is None:
        if mode is Mode.STRONG:
            bad = [v for v, ok in c1.items() if not ok]
        else:
            bad = [v for v, ok in c1.items() if not ok and not v.is_real]
            if not c1p:
                bad.append(REAL)
        if bad:
            witness = f"condition (1) fails at {bad[0]}"
    if witness is None:
        for item in c2:
            if item.verdict is DegreeOne.NO:
                witness = f"L_{item.index} has no degree-1 place over the place of k_{item.index} above {item.prime}"
                break
    for item in c2:
        if item.verdict is DegreeOne.UNDETERMINED:
            assumptions.append(f"degree-1 place of L_{item.index} above {item.prime}: relative ramification")
    if witness is not None:
        overall = Overall.FAIL
    elif assumptions:
        overall = Overall.CONDITIONAL
    else:
        overall = Overall.PASS
    return ConditionReport(t0, hypotheses, c1, c1p, c2, overall, witness, assumptions, needs_inclusion)


# -- search -------------------------------------------------------------------


def s_unit_denominators(primes, bound):
    """All positive integers <= bound supported on `primes`, ascending."""
    values = {1}
    for p in sorted(primes):
        for v in sorted(values):
            q = v * p
            while q <= bound:
                values.add(q)
                q *= p
    return sorted(values)


def _lambda_class(inst, mu):
    """(residue, modulus) that lambda must satisfy for lambda/mu to meet every finite target, or None."""
    congruences = []
    for target in inst.finite_targets:
        p = target.place.prime
        shifted = target.value * mu
        if valuation(shifted, p) < 0:
            return None
        modulus = p ** (int(target.precision) + valuation(mu, p))
        congruences.append((modulus, rational_residue(shifted, modulus)))
    return crt_solve(CongruenceSystem.from_pairs(congruences))


def candidate_values(inst, height_bound, denominators, mode=Mode.STRONG):
    """Candidates lambda/mu in canonical search order: height, then |lambda|, then sign, then mu."""
    real = inst.real_target if mode is Mode.STRONG else None
    out = []
    admissible = 0
    for mu in denominators:
        if mu > height_bound:
            continue
        cls = _lambda_class(inst, mu)
        if cls is None:
            continue
        admissible += 1
        r, m = cls
        lo, hi = -height_bound, height_bound
        if real is not None:
            lo = max(lo, math.ceil((real.value - real.precision) * mu))
            hi = min(hi, math.floor((real.value + real.precision) * mu))
        start = lo + (r - lo) % m
        for lam in range(start, hi + 1, m):
            if math.gcd(lam, mu) == 1:
                out.append((max(abs(lam), mu), abs(lam), lam < 0, mu, Fraction(lam, mu)))
    if not admissible:
        raise InfeasibleAtPrecision("no admissible denominator meets the finite targets")
    out.sort(key=lambda c: c[:4])
    return [c[4] for c in out]


@dataclass
class SearchResult:
    hits: list
    stats: Counter
    exhausted: bool = True

    def as_json(self):
        return {"hits": len(self.hits), "exhausted": self.exhausted, "stats": dict(sorted(self.stats.items()))}


def _evaluate_chunk(inst, hypotheses, assumed, mode, chunk):
    hits = []
    stats = Counter()
    for t0 in chunk:
        stats["tried"] += 1
        report = evaluate(inst, t0, hypotheses, assumed, mode)
        if report.overall is Overall.FAIL:
            stats["fail"] += 1
            for item in report.condition2:
                if item.verdict is DegreeOne.NO:
                    stats[f"fail_prime:{item.prime}"] += 1
            if report.needs_inclusion is not None:
                stats[f"needs_s:{report.needs_inclusion}"] += 1
            continue
        stats[report.overall.value.lower()] += 1
        hits.append((t0, report))
    logger.debug("chunk of %d candidates: %d hits", len(chunk), len(hits))
    return hits, stats


def search_t0(
    inst,
    height_bound=config.DEFAULT_HEIGHT_BOUND,
    denominator_bound=config.DEFAULT_DENOMINATOR_BOUND,
    denominators=None,
    jobs=config.DEFAULT_JOBS,
    limit=None,
    assumed=frozenset(),
    mode=Mode.STRONG,
):
    """Every t0 of height <= bound in the target classes whose report is Pass or Conditional."""
    mode = Mode(mode)
    hypotheses = verify_hypotheses(inst, assumed)
    failing = [key for key, verdict in hypotheses.items() if verdict.kind is Norm.NOT_NORM]
    if failing:
        i, v = failing[0]
        raise VacuousInstance(f"b_{i}(t_v - a_{i}) is not a local norm at {v}; the instance is vacuous")
    if denominators is None:
        denominators = s_unit_denominators(inst.finite_primes, denominator_bound)
    candidates = candidate_values(inst, height_bound, denominators, mode)
    logger.info("searching %d candidates (height <= %d, %d denominators)", len(candidates), height_bound, len(denominators))
    chunks = [candidates[i : i + config.SEARCH_CHUNK_SIZE] for i in range(0, len(candidates), config.SEARCH_CHUNK_SIZE)]
    wave = max(jobs, 1)
    hits, counters = [], []
    exhausted = True
    for start in range(0, len(chunks), wave):
        results = run_chunks(
            lambda chunk: _evaluate_chunk(inst, hypotheses, assumed, mode, chunk), chunks[start : start + wave], jobs
        )
        for chunk_hits, chunk_stats in results:
            hits.extend(chunk_hits)
            counters.append(chunk_stats)
        if limit is not None and len(hits) >= limit:
            hits = hits[:limit]
            exhausted = start + wave >= len(chunks)
            break
    for t0, report in hits:
        fresh = evaluate(inst, t0, verify_hypotheses(inst, assumed), assumed, mode)
        if fresh.as_json() != report.as_json():
            raise InternalConsistencyError(f"re-verification of t0 = {t0} disagrees with the search")
    stats = merge_counters(counters)
    stats["hits"] = len(hits)
    return SearchResult(hits, stats, exhausted)


# -- change of variables ------------------------------------------------------


@dataclass(frozen=True)
class Mobius:
    """t -> (alpha t + beta) / (gamma t + delta)."""

    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    delta: Fraction

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        if self.det == 0:
            raise DomainError("Mobius map with zero determinant")

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @property
    def det(self):
        return self.alpha * self.delta - self.beta * self.gamma

    def inverse(self):
        return Mobius(self.delta, -self.beta, -self.gamma, self.alpha)

    def __call__(self, t):
        t = as_rational(t)
        denominator = self.gamma * t + self.delta
        if denominator == 0:
            raise DomainError(f"{t} is the pole of {self}")
        return (self.alpha * t + self.beta) / denominator

    def as_json(self):
        return [str(self.alpha), str(self.beta), str(self.gamma), str(self.delta)]


def transformed_polynomial(P, m):
    """Monic minimal polynomial of (alpha a + beta)/(gamma a + delta) for a root a of P."""
    # a = (delta s - beta) / (alpha - gamma s)
    num = PolyOverQ((-m.beta, m.delta))
    den = PolyOverQ((m.alpha, -m.gamma))
    n = P.degree
    total = PolyOverQ()
    for j, c in enumerate(P.coeffs):
        total = total + (num**j) * (den ** (n - j)) * c
    if total.degree != n:
        raise HypothesisFailure("i", "gamma a_i + delta vanishes")
    return total.monic()


def transport(entry, m):
    """The entry (P', L', b') with a' = m(a) and b' = b (gamma a + delta), plus the map k -> k'."""
    if (entry.field.gen * m.gamma + m.delta).is_zero:
        raise HypothesisFailure("i", "gamma a_i + delta = 0")
    K2 = NumberFieldAbs(transformed_polynomial(entry.P, m))
    s = K2.gen
    a_image = (s * m.delta - m.beta) / (m.alpha - s * m.gamma)

    def phi(x):
        return x.poly(a_image) + K2.zero

    b2 = phi(entry.b) * (a_image * m.gamma + m.delta)
    L2 = RelativeExtension(K2, tuple(phi(c) for c in entry.extension.coeffs))
    return Entry(L2, b2), phi, a_image


def transformed_precision(target, m):
    """Precision at the new target that forces the old target's precision after pulling back."""
    t2 = m(target.value)
    anchor = m.alpha - m.gamma * t2
    if target.place.is_real:
        eps = target.precision * anchor * anchor / (2 * abs(m.det))
        if m.gamma:
            eps = min(eps, abs(anchor) / (2 * abs(m.gamma)))
        return eps
    p = target.place.prime
    v_anchor = valuation(anchor, p)
    needed = int(target.precision) - valuation(m.det, p) + 2 * v_anchor
    options = [needed, 1]
    if m.gamma:
        options.append(v_anchor - valuation(m.gamma, p) + 1)
    return max(options)


def new_place_precision(m, p):
    options = [1, 1 - valuation(m.det, p)]
    if m.gamma:
        options.append(1 - valuation(m.gamma, p))
    return max(options)


def _primes_of(q):
    q = as_rational(q)
    if q == 0 or abs(q) == 1:
        return set()
    return set(factor(q).primes)


def check_change_hypotheses(inst, m, assumed=frozenset()):
    """Verdicts for (i), (ii), (iii); raises HypothesisFailure naming the clause that fails."""
    finite_S = set(inst.finite_primes)
    for i, entry in enumerate(inst.entries, start=1):
        if (entry.field.gen * m.gamma + m.delta).is_zero:
            raise HypothesisFailure("i", f"gamma a_{i} + delta = 0")
    for target in inst.targets:
        if m.gamma * target.value + m.delta == 0:
            raise HypothesisFailure("i", f"gamma t_v + delta = 0 at {target.place}")
    if m.alpha == 0 or not _primes_of(m.alpha) <= finite_S:
        raise HypothesisFailure("ii", f"alpha = {m.alpha} is not a unit outside S")
    for i, entry in enumerate(inst.entries, start=1):
        x = entry.field.gen * m.alpha + m.beta
        if x.is_zero:
            raise HypothesisFailure("ii", f"alpha a_{i} + beta = 0")
        outside = (_primes_of(x.norm()) | set(x.denominator_primes())) - finite_S
        if outside:
            raise HypothesisFailure("ii", f"alpha a_{i} + beta is not a unit at {sorted(outside)}")
    verdicts = {}
    for i, entry in enumerate(inst.entries, start=1):
        for target in inst.targets:
            c = m.det / (m.gamma * target.value + m.delta)
            verdict = element_norm_test(entry.field.from_rational(c), entry.extension, target.place)
            if verdict.kind is Norm.NOT_NORM:
                raise HypothesisFailure("iii", f"det/(gamma t_v + delta) = {c} is not a local norm for entry {i} at {target.place}")
            if verdict.is_undetermined and (i, target.place) in assumed:
                verdict = NormVerdict.is_norm(ASSUMED)
            verdicts[(i, target.place)] = verdict
    return verdicts


@dataclass
class ChangeOfVariables:
    original: ConjectureInstance
    transformed: ConjectureInstance
    mobius: Mobius
    maps: list
    hypothesis_iii: dict
    conclusions: dict = None

    def as_json(self):
        out = {
            "mobius": self.mobius.as_json(),
            "instance": self.transformed.as_json(),
            "new_places": [str(v) for v in sorted_places(self.transformed.S - self.original.S)],
            "hypothesis_iii": {f"{i},{v}": verdict.as_json() for (i, v), verdict in self.hypothesis_iii.items()},
        }
        if self.conclusions is not None:
            out["conclusions"] = self.conclusions
        return out


def change_variables(inst, m, extra_primes=(), t0_prime=None, assumed=frozenset()):
    """Move the instance along t' = m(t); see verify_conclusions for what is guaranteed."""
    hyp_iii = check_change_hypotheses(inst, m, assumed)
    transported = [transport(entry, m) for entry in inst.entries]
    new_entries = [e for e, _, _ in transported]
    S0 = set(inst.finite_primes)
    S0 |= {p for p in _primes_of(m.alpha.denominator)} | {p for p in _primes_of(m.gamma.denominator)}
    for entry in new_entries:
        S0 |= set(entry.P.denominator_primes())
        S0 |= entry.required_primes()
    S0 |= {int(p) for p in extra_primes}
    old_places = set(inst.S)
    targets = []
    for target in inst.targets:
        targets.append(LocalTarget(target.place, m(target.value), transformed_precision(target, m)))
    for p in sorted(S0):
        place = Place.finite(p)
        if place not in old_places:
            targets.append(LocalTarget(place, 0, new_place_precision(m, p)))
    new_S = old_places | {Place.finite(p) for p in S0}
    transformed = ConjectureInstance(tuple(new_entries), frozenset(new_S), tuple(targets))
    result = ChangeOfVariables(inst, transformed, m, transported, hyp_iii)
    if t0_prime is not None:
        result.conclusions = verify_conclusions(result, t0_prime)
    return result


def verify_conclusions(change, t0_prime):
    """Check conclusions (1)-(4) and the identity b'(t0' - a') = b(t0 - a)(alpha - gamma t0') exactly."""
    m = change.mobius
    t0_prime = as_rational(t0_prime)
    if m.alpha == m.gamma * t0_prime:
        raise DomainError("t0' must differ from alpha/gamma")
    t0 = m.inverse()(t0_prime)
    original, transformed = change.original, change.transformed
    out = {"t0_prime": str(t0_prime), "t0": str(t0)}

    hyps = verify_hypotheses(transformed).values()
    if any(v.kind is Norm.NOT_NORM for v in hyps):
        out["1"] = False
    elif any(v.is_undetermined for v in hyps):
        out["1"] = "conditional"
    else:
        out["1"] = True

    close_new = condition1_detail(transformed, t0_prime)
    close_old = condition1_detail(original, t0)
    out["2"] = all(close_old[v] or not close_new[v] for v in close_old)

    signs = set()
    real = original.real_target
    if real is not None:
        t_real_new = transformed.real_target.value
        for entry in original.entries:
            K = entry.field
            a = K.gen
            a_new = (a * m.alpha + m.beta) / (a * m.gamma + m.delta)
            product = (K.from_rational(t0_prime) - a_new) * (K.from_rational(t_real_new) - a_new)
            product = product * (K.from_rational(t0) - a) * (K.from_rational(real.value) - a)
            if product.is_zero:
                continue
            for root in K.real_roots:
                signs.add(product.sign_at(root))
    out["3"] = len(signs) <= 1

    new_places = transformed.S - original.S
    applicable = all(close_new.get(v, True) for v in new_places)
    transfer = True
    if applicable:
        old_S = set(original.finite_primes)
        new_S = set(transformed.finite_primes)
        for entry, new_entry in zip(original.entries, transformed.entries):
            value = entry.P(t0)
            if value == 0 or abs(value.numerator) == 1:
                continue
            for p in factor(value.numerator).primes:
                if p in old_S:
                    continue
                if p in new_S or valuation(new_entry.P(t0_prime), p) <= 0:
                    transfer = False
    out["4"] = transfer if applicable else None

    identity = True
    for (new_entry, phi, a_image), entry in zip(change.maps, original.entries):
        lhs = new_entry.b * (new_entry.field.from_rational(t0_prime) - new_entry.field.gen)
        rhs = phi(entry.b) * (new_entry.field.from_rational(t0) - a_image) * (m.alpha - m.gamma * t0_prime)
        identity = identity and lhs == rhs
    out["identity"] = identity
    out["round_trip"] = round_trip_holds(change)
    out["ok"] = all(out[k] in (True, None, "conditional") for k in ("1", "2", "3", "4", "identity", "round_trip"))
    return out


def pullback(change):
    """Transport the transformed entries back through the inverse map (no hypothesis checks).

    a_i and L_i come back unchanged; b_i comes back multiplied by det(m).
    """
    inverse = change.mobius.inverse()
    return [transport(entry, inverse)[0] for entry in change.transformed.entries]


def round_trip_holds(change):
    det = change.mobius.det
    return all(
        back.extension == entry.extension and back.b == entry.b * det
        for back, entry in zip(pullback(change), change.original.entries)
    )


def translate_instance(inst, tau):
    """The same instance in the coordinate t - tau."""
    tau = as_rational(tau)
    m = Mobius(1, -tau, 0, 1)
    entries = tuple(transport(entry, m)[0] for entry in inst.entries)
    targets = tuple(LocalTarget(t.place, t.value - tau, t.precision) for t in inst.targets)
    return ConjectureInstance(entries, inst.S, targets)


def integral_rescaling(inst, N=None, assumed=frozenset()):
    """Apply (r^(2N), 0, 0, r^N), r the product of the finite primes of S."""
    r = math.prod(inst.finite_primes)
    if N is None:
        N = math.prod(e.field.degree * e.extension.degree for e in inst.entries)
    m = Mobius(r ** (2 * N), 0, 0, r**N)
    return m, change_variables(inst, m, assumed=assumed)


def linear_forms(inst):
    """f_i(lambda, mu) = b_i (lambda - a_i mu) as (coefficient of lambda, coefficient of mu) when every k_i = Q."""
    forms = []
    for entry in inst.entries:
        if not entry.field.is_rational:
            raise DomainError("linear forms need every k_i = Q")
        a = -entry.P.coeff(0)
        b = entry.b.rational()
        forms.append((b, -b * a))
    return forms


class Shape(Enum):
    SMALL_DEGREE = "SmallDegree"
    QUADRIC_CASE = "QuadricCase"
    OTHER = "Other"


def theorem_shape(inst):
    total = sum(e.field.degree for e in inst.entries)
    if total <= 2:
        return Shape.SMALL_DEGREE
    if total == 3 and all(e.extension.degree == 2 for e in inst.entries):
        return Shape.QUADRIC_CASE
    return Shape.OTHER


def locally_split(inst, t0):
    """Every prime outside S dividing some P_i(t0) splits completely in the common field L."""
    t0 = as_rational(t0)
    if not all(e.field.is_rational for e in inst.entries):
        raise DomainError("locally_split needs every k_i = Q")
    absolutes = {absolute_polynomial(e.extension) for e in inst.entries}
    if len(absolutes) != 1:
        raise DomainError("locally_split needs the same field L_i for every entry")
    L = NumberFieldAbs(absolutes.pop())
    finite_S = set(inst.finite_primes)
    for entry in inst.entries:
        value = entry.P(t0)
        if value == 0:
            return False
        if abs(value.numerator) == 1:
            continue
        for p in factor(value.numerator).primes:
            if p in finite_S:
                continue
            if not L.is_unramified(p) or not splits_completely(L, p):
                return False
    return True


# -- extending S --------------------------------------------------------------

MAX_EXTENSION_EXPONENT = 16


def extend_places(inst, new_primes):
    """Add primes to S with targets p^(-N prod [L_i:k_i]) at precision 1."""
    degree = inst.relative_degree_product()
    S = set(inst.S)
    targets = list(inst.targets)
    for p in sorted({int(p) for p in new_primes}):
        place = Place.finite(p)
        if place in S:
            logger.info("prime %d already in S", p)
            continue
        for entry in inst.entries:
            if not entry.extension.is_unramified(p):
                raise DomainError(f"prime {p} is ramified in {entry.extension}")
            if p in entry.b_primes():
                raise DomainError(f"b is not a unit above {p}")
        for N in range(1, MAX_EXTENSION_EXPONENT + 1):
            target = LocalTarget(place, Fraction(1, p ** (N * degree)), 1)
            verdicts = [
                local_norm_test(NormCandidate(e.b, target.value, target.precision), e.extension, place)
                for e in inst.entries
            ]
            if all(v.kind is Norm.IS_NORM for v in verdicts):
                break
        else:
            raise InternalConsistencyError(f"no exponent makes the new target at {p} a local norm")
        S.add(place)
        targets.append(target)
    extended = ConjectureInstance(inst.entries, frozenset(S), tuple(targets))
    for (i, v), verdict in verify_hypotheses(extended).items():
        if not v.is_real and v not in inst.S and verdict.kind is not Norm.IS_NORM:
            raise InternalConsistencyError(f"new target at {v} fails for entry {i}: {verdict}")
    return extended
