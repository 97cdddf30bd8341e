"""Constructive strong approximation.

Two constructions live here. `line_trick_solve` finds S-integral points of
affine n-space away from a union of codimension-2 linear loci, by drawing a
line through a weak-approximation point and a generic second point and then
approximating on the line. `norm_multiplier_solve` finds t = N(x) close to
local targets whose prime factors outside S all split completely.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
import logging
import math

from sympy import isprime, nextprime

from . import config
from .arith import CongruenceSystem, as_rational, crt_solve, factor, rational_residue, valuation
from .conjecture import LocalTarget
from .errors import DomainError, InternalConsistencyError, NoWitnessFound, RetryExhausted
from .fields import T, NumberFieldAbs, RelativeExtension, splits_completely
from .galois_class import cycle_type_scan, find_split_prime, is_homogeneous
from .local_symbols import REAL, Norm, NormCandidate, Place, local_norm_test, sorted_places
from .polys import PolyOverQ
from .workers import run_chunks

logger = logging.getLogger(__name__)

# residue sets larger than this are replaced by a direct congruence test
NORM_RESIDUE_LIMIT = 1 << 14
GALOIS_CHECK_BOUND = 200


# -- affine space minus codimension-2 loci ------------------------------------


@dataclass(frozen=True)
class LinearForm:
    """c_1 x_1 + ... + c_n x_n + constant."""

    coeffs: tuple
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(as_rational(c) for c in self.coeffs))
        object.__setattr__(self, "constant", as_rational(self.constant))

    def __call__(self, point):
        return sum((c * x for c, x in zip(self.coeffs, point)), self.constant)

    def linear(self, direction):
        return sum((c * x for c, x in zip(self.coeffs, direction)), Fraction(0))

    def __str__(self):
        terms = [f"{c}*x{i}" for i, c in enumerate(self.coeffs, start=1) if c]
        if self.constant or not terms:
            terms.append(str(self.constant))
        return " + ".join(terms)


@dataclass(frozen=True)
class ConstraintPair:
    """The locus where both forms vanish."""

    first: LinearForm
    second: LinearForm

    def __post_init__(self):
        u, v = self.first.coeffs, self.second.coeffs
        if len(u) != len(v):
            raise DomainError("constraint forms have different dimensions")
        if not any(u[i] * v[j] != u[j] * v[i] for i in range(len(u)) for j in range(i + 1, len(u))):
            raise DomainError(f"constraint ({self.first}, {self.second}) does not have codimension 2")

    @property
    def dimension(self):
        return len(self.first.coeffs)

    def contains(self, point):
        return self.first(point) == 0 and self.second(point) == 0

    def meets_line(self, base, direction):
        """Whether base + s * direction lies on the locus for some rational s."""
        a1, b1 = self.first(base), self.first.linear(direction)
        a2, b2 = self.second(base), self.second.linear(direction)
        if b1:
            s = -a1 / b1
            return a2 + b2 * s == 0
        if b2:
            return a1 == 0
        return a1 == 0 and a2 == 0

    def as_json(self):
        return [str(self.first), str(self.second)]


def _avoids(excluded, point):
    return not any(pair.contains(point) for pair in excluded)


@dataclass(frozen=True)
class PuncturedAffineProblem:
    """Find an S-integral point of A^n minus F close to the targets at every v in S but v0.

    `targets` maps a Place to (point, precision); the precision is an integer
    N at a finite place and an epsilon at the real place.
    """

    dimension: int
    excluded: tuple
    S: frozenset
    targets: dict
    v0: int

    def __post_init__(self):
        if self.dimension < 2:
            raise DomainError("affine space of dimension 1 has no codimension-2 locus")
        excluded = tuple(self.excluded)
        for pair in excluded:
            if pair.dimension != self.dimension:
                raise DomainError(f"constraint {pair.as_json()} is not in dimension {self.dimension}")
        S = frozenset(self.S) | {REAL}
        v0 = getattr(self.v0, "prime", self.v0)
        if not isprime(v0):
            raise DomainError(f"v0 = {v0} must be a prime")
        if Place.finite(v0) in S:
            raise DomainError(f"v0 = {v0} must lie outside S")
        targets = {}
        for place, (point, precision) in self.targets.items():
            if place not in S:
                raise DomainError(f"target at {place}, which is not in S")
            point = tuple(as_rational(x) for x in point)
            precision = as_rational(precision)
            if len(point) != self.dimension:
                raise DomainError(f"target at {place} has {len(point)} coordinates, expected {self.dimension}")
            if precision <= 0 or (not place.is_real and precision.denominator != 1):
                raise DomainError(f"bad precision {precision} at {place}")
            if not _avoids(excluded, point):
                raise DomainError(f"target at {place} lies on the excluded locus")
            targets[place] = (point, precision)
        object.__setattr__(self, "excluded", excluded)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "v0", int(v0))

    @property
    def finite_targets(self):
        return [(v.prime, pt, int(prec)) for v, (pt, prec) in self.targets.items() if not v.is_real]

    @property
    def real_target(self):
        return self.targets.get(REAL)

    @property
    def allowed_primes(self):
        return {v.prime for v in self.S if not v.is_real} | {self.v0}


@dataclass
class AffinePoint:
    point: tuple
    base: tuple
    second: tuple = None
    parameter: Fraction = None
    auxiliary_prime: int = None
    attempts: int = 0
    checks: dict = field(default_factory=dict)

    def as_json(self):
        out = {"point": [str(x) for x in self.point], "Q": [str(x) for x in self.base], "attempts": self.attempts}
        if self.second is not None:
            out["Q2"] = [str(x) for x in self.second]
            out["s"] = str(self.parameter)
            out["aux_prime"] = self.auxiliary_prime
        out["checks"] = self.checks
        return out


def verify_affine_point(prob, point):
    """Re-check closeness, F-avoidance and integrality by direct evaluation."""
    checks = {}
    for place, (target, precision) in prob.targets.items():
        if place.is_real:
            ok = all(abs(x - y) <= precision for x, y in zip(point, target))
        else:
            ok = all(valuation(x - y, place.prime) >= precision for x, y in zip(point, target))
        checks[str(place)] = ok
    checks["avoids_F"] = _avoids(prob.excluded, point)
    allowed = prob.allowed_primes
    bad = set()
    for x in point:
        if x.denominator != 1:
            bad |= set(factor(x.denominator).primes) - allowed
    checks["integral"] = not bad
    checks["ok"] = all(checks.values())
    return checks


def _auxiliary_prime(excluded):
    p = 2
    while p in excluded:
        p = nextprime(p)
    return p


def _weak_approximation(prob):
    """Point Q0 with S-supported denominators, congruent to every finite target; returns (Q0, moduli, D)."""
    targets = prob.finite_targets
    D = 1
    for p, point, _ in targets:
        k = max([-valuation(x, p) for x in point if x] + [0])
        D *= p**k
    moduli = [p ** (N + valuation(D, p)) for p, _, N in targets]
    Q0 = []
    for j in range(prob.dimension):
        pairs = []
        for (p, point, _), modulus in zip(targets, moduli):
            pairs.append((modulus, rational_residue(point[j] * D, modulus)))
        r, _ = crt_solve(CongruenceSystem.from_pairs(pairs))
        Q0.append(Fraction(r, D))
    return tuple(Q0), moduli, D


def line_trick_solve(prob, rng=None, settings=None):
    """S-integral point of A^n \\ F close to every target, following the line through Q and a generic Q'."""
    rng = rng or (settings.rng(11) if settings else config.RunSettings().rng(11))
    Q0, moduli, D = _weak_approximation(prob)
    M = math.prod(moduli)
    step = Fraction(M, D)
    real = prob.real_target
    attempts = 0

    if real is None:
        Q = Q0
        while not _avoids(prob.excluded, Q):
            attempts += 1
            if attempts > config.LINE_TRICK_MAX_RETRIES:
                raise RetryExhausted("moving the approximation point off F", attempts - 1)
            shift = [rng.randint(-config.LINE_PERTURBATION_RADIUS, config.LINE_PERTURBATION_RADIUS) for _ in Q0]
            Q = tuple(x + step * k for x, k in zip(Q0, shift))
        result = AffinePoint(Q, Q, attempts=attempts)
        result.checks = verify_affine_point(prob, Q)
        if not result.checks["ok"]:
            raise InternalConsistencyError(f"line trick output fails re-verification: {result.checks}")
        return result

    # an auxiliary prime ell lets Q approach the real target
    r_point, eps = real
    ell = _auxiliary_prime(prob.allowed_primes)
    m = 1
    while step / ell**m > eps:
        m += 1
    while True:
        scale = ell**m
        Q = tuple(x + step * round((r - x) * scale / step) / scale for x, r in zip(Q0, r_point))
        if _avoids(prob.excluded, Q):
            break
        attempts += 1
        if attempts > config.LINE_TRICK_MAX_RETRIES:
            raise RetryExhausted("moving the approximation point off F", attempts - 1)
        m += 1

    for attempt in range(1, config.LINE_TRICK_MAX_RETRIES + 1):
        radius = config.LINE_PERTURBATION_RADIUS
        Q2 = tuple(Fraction(rng.randint(-radius, radius)) for _ in Q)
        direction = tuple(b - a for a, b in zip(Q, Q2))
        if any(direction) and not any(pair.meets_line(Q, direction) for pair in prob.excluded):
            break
        logger.debug("line attempt %d meets F; perturbing", attempt)
    else:
        raise RetryExhausted("finding a line through Q avoiding F", config.LINE_TRICK_MAX_RETRIES)
    attempts += attempt

    # s = u / v0^j: u = 0 mod M, u = v0^j mod ell^m, |s| * |Q2 - Q| <= eps / 2
    width = max(abs(x) for x in direction)
    modulus = M * ell**m
    j = 0
    while Fraction(modulus) * width > eps * prob.v0**j:
        j += 1
    scale = prob.v0**j
    pairs = [(modulus_p, 0) for modulus_p in moduli] + [(ell**m, scale)]
    u, _ = crt_solve(CongruenceSystem.from_pairs(pairs))
    if u > modulus // 2:
        u -= modulus
    s = Fraction(u, scale)
    P = tuple(a + s * d for a, d in zip(Q, direction))
    logger.info("line trick: aux prime %d^%d, s = %s", ell, m, s)

    result = AffinePoint(P, Q, Q2, s, ell, attempts)
    result.checks = verify_affine_point(prob, P)
    if not result.checks["ok"]:
        raise InternalConsistencyError(f"line trick output fails re-verification: {result.checks}")
    return result


# -- norm multipliers ----------------------------------------------------------


@dataclass(frozen=True)
class NormMultiplierProblem:
    """Find t = N_{L/Q}(x) close to t_v for v in S with every other prime factor split in L."""

    field: NumberFieldAbs
    S: frozenset
    targets: tuple
    v0: int = None

    def __post_init__(self):
        S = frozenset(self.S) | {REAL}
        targets = tuple(self.targets)
        for target in targets:
            if not isinstance(target, LocalTarget):
                raise DomainError("targets must be LocalTarget values")
            if target.place not in S:
                raise DomainError(f"target at {target.place}, which is not in S")
            if target.value == 0:
                raise DomainError(f"target at {target.place} is zero")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "targets", targets)

    def target_at(self, place):
        return next((t for t in self.targets if t.place == place), None)


def rational_extension(L):
    """L as a relative extension of Q = Q[t]/(t), so the local norm tests apply."""
    base = NumberFieldAbs(PolyOverQ.x())
    return RelativeExtension(base, tuple(base.from_rational(c) for c in L.P.coeffs))


def _check_galois(L):
    if L.degree <= 2:
        return
    profile = cycle_type_scan(L.P, GALOIS_CHECK_BOUND)
    for cycle_type in profile.types:
        if not is_homogeneous(cycle_type):
            p = profile.first_prime[cycle_type]
            raise DomainError(f"{L} is not Galois: Frobenius at {p} has cycle type {list(cycle_type)}")


def local_target_verdicts(prob):
    """local_norm_test of every target against L."""
    L_rel = rational_extension(prob.field)
    one = L_rel.base.one
    return {
        target.place: local_norm_test(NormCandidate(one, target.value, target.precision), L_rel, target.place)
        for target in prob.targets
    }


@dataclass
class NormCertificate:
    P: PolyOverQ
    x: tuple
    t: Fraction
    factorization: object
    v0: int
    S: tuple
    split_primes: list = field(default_factory=list)
    closeness: dict = field(default_factory=dict)
    assumptions: list = field(default_factory=list)

    @classmethod
    def from_element(cls, L, coeffs, S, v0):
        coeffs = tuple(as_rational(c) for c in coeffs)
        t = L.element(coeffs).norm()
        if t == 0:
            raise DomainError("x = 0 has norm 0")
        allowed = {v.prime for v in S if not v.is_real} | set(L.bad_primes) | {v0}
        fact = factor(t)
        split = [p for p in fact.primes if p not in allowed]
        return cls(L.P, coeffs, t, fact, v0, tuple(sorted_places(S)), split)

    def as_json(self):
        return {
            "P": str(self.P.as_expr(T)),
            "x": [str(c) for c in self.x],
            "t": str(self.t),
            "factorization": self.factorization.as_json(),
            "v0": self.v0,
            "S": [str(v) for v in self.S],
            "split_primes": [{"p": p, "splits_completely": True} for p in self.split_primes],
            "closeness": {str(v): ok for v, ok in self.closeness.items()},
            "assumptions": list(self.assumptions),
        }


def _close(target, t):
    if target.place.is_real:
        return abs(t - target.value) <= target.precision
    return valuation(t - target.value, target.place.prime) >= target.precision


def verify_norm_certificate(L, certificate, S, targets, v0=None):
    """Recheck a certificate from scratch: norm, integrality, splitting and closeness."""
    v0 = certificate.v0 if v0 is None else v0
    allowed = {v.prime for v in S if not v.is_real} | set(L.bad_primes) | {v0}
    x = L.element(certificate.x)
    checks = {"norm": x.norm() == certificate.t}
    t = certificate.t
    checks["integral"] = all(p in allowed for p in factor(t.denominator).primes) if t.denominator != 1 else True
    checks["integral"] = checks["integral"] and all(p in allowed for p in x.denominator_primes())
    outside = [p for p in factor(t).primes if p not in allowed]
    checks["split"] = all(splits_completely(L, p) for p in outside)
    checks["certificate_primes"] = sorted(outside) == sorted(certificate.split_primes)
    for target in targets:
        checks[str(target.place)] = _close(target, t)
    checks["ok"] = all(checks.values())
    return checks


def _box_shell(d, r):
    """Integer vectors with max |c_j| = r, in canonical order."""
    if r == 0:
        return [(0,) * d]
    shell = [c for c in product(range(-r, r + 1), repeat=d) if max(map(abs, c)) == r]
    shell.sort(key=lambda c: (sum(map(abs, c)), c))
    return shell


def _residue_set(L, tau, p, K):
    """Coordinate vectors mod p^K whose norm is tau mod p^K, lifted one power at a time."""
    d = L.degree
    current = [tuple([0] * d)]
    for k in range(1, K + 1):
        pk, step = p**k, p ** (k - 1)
        lifted = []
        for r in current:
            for e in product(range(p), repeat=d):
                c = tuple(ri + step * ei for ri, ei in zip(r, e))
                if (L.norm_of(c) - tau) % pk == 0:
                    lifted.append(c)
        if len(lifted) > NORM_RESIDUE_LIMIT:
            logger.debug("residue set at %d^%d too large (%d); testing congruences directly", p, k, len(lifted))
            return None
        if not lifted:
            return set()
        current = lifted
    return set(current)


def norm_multiplier_solve(prob, box=config.DEFAULT_NORM_BOX, jobs=config.DEFAULT_JOBS):
    """Smallest x in the coefficient box whose norm meets every target with split prime support.

    v0 only enlarges the set of primes allowed in t without splitting; unlike the
    line trick, t is not built as u / v0^j. Every candidate comes from the box.
    """
    L = prob.field
    if not L.P.has_integer_coeffs:
        raise DomainError(f"{L.P} must have integer coefficients")
    _check_galois(L)
    d = L.degree
    S = set(prob.S)
    forced = sorted(p for p in L.bad_primes if Place.finite(p) not in S)
    if forced:
        logger.info("primes %s of disc(%s) added to S", forced, L.P.as_expr(T))
        S |= {Place.finite(p) for p in forced}

    assumptions = []
    for place, verdict in local_target_verdicts(prob).items():
        if verdict.kind is Norm.NOT_NORM:
            raise DomainError(f"target at {place} is not a local norm from {L}")
        if verdict.is_undetermined:
            assumptions.append(f"local norm at {place}: {verdict.reason}")

    finite_S = {v.prime for v in S if not v.is_real}
    if prob.v0 is None:
        v0 = find_split_prime([L], exclude=finite_S)
    else:
        v0 = prob.v0
        if v0 in finite_S or not isprime(v0) or not splits_completely(L, v0):
            raise DomainError(f"v0 = {v0} must be a prime outside S splitting completely in {L}")
    allowed = finite_S | {v0}

    # x = y / sigma, so targets of negative valuation are reachable with integral y
    sigma = 1
    congruences = []
    for target in prob.targets:
        if target.place.is_real:
            continue
        p = target.place.prime
        k = max(0, math.ceil(-valuation(target.value, p) / d))
        sigma *= p**k
        congruences.append((p, target, k))
    scaled = []
    for p, target, k in congruences:
        shift = valuation(sigma, p) * d
        tau = target.value * sigma**d
        K = int(target.precision) + shift
        modulus = p**K
        tau_res = rational_residue(tau, modulus)
        scaled.append((p, K, modulus, tau_res, _residue_set(L, tau_res, p, K)))
        if scaled[-1][4] == set():
            raise DomainError(f"no element of Z[a] has norm {target.value} to precision {target.precision} at {p}")
    real = prob.target_at(REAL)
    norm_scale = Fraction(1, sigma**d)

    def matches(c):
        for p, K, modulus, tau_res, residues in scaled:
            if residues is not None and tuple(x % modulus for x in c) not in residues:
                return None
        t = L.norm_of(c) * norm_scale
        if t == 0:
            return None
        for p, K, modulus, tau_res, residues in scaled:
            if residues is None and ((t / norm_scale) - tau_res) % modulus:
                return None
        if real is not None and abs(t - real.value) > real.precision:
            return None
        outside = [q for q in factor(t).primes if q not in allowed and q not in L.bad_primes]
        if all(splits_completely(L, q) for q in outside):
            return t
        return None

    def scan(chunk):
        for c in chunk:
            t = matches(c)
            if t is not None:
                return c, t
        return None

    tried = 0
    for r in range(1, box + 1):
        shell = _box_shell(d, r)
        chunks = [shell[i : i + config.SEARCH_CHUNK_SIZE] for i in range(0, len(shell), config.SEARCH_CHUNK_SIZE)]
        found = [hit for hit in run_chunks(scan, chunks, jobs) if hit is not None]
        tried += len(shell)
        if found:
            c, t = found[0]
            x = tuple(Fraction(ci, sigma) for ci in c)
            cert = NormCertificate.from_element(L, x, S, v0)
            cert.closeness = {target.place: _close(target, t) for target in prob.targets}
            cert.assumptions = assumptions
            checks = verify_norm_certificate(L, cert, S, prob.targets, v0)
            if not checks["ok"]:
                raise InternalConsistencyError(f"norm certificate fails re-verification: {checks}")
            logger.info("t = %s = N(%s) after %d candidates", t, [str(ci) for ci in x], tried)
            return cert
        logger.debug("shell %d: %d candidates, no witness", r, len(shell))
    raise NoWitnessFound(f"no norm multiplier with coefficients in [-{box}, {box}] ({tried} candidates)")


# -- fibers of the norm-form variety -------------------------------------------


@dataclass(frozen=True)
class FiberReport:
    place: Place
    verdict: Norm
    entries: tuple

    @property
    def label(self):
        return {Norm.IS_NORM: "Yes", Norm.NOT_NORM: "No", Norm.UNDETERMINED: "Undetermined"}[self.verdict]

    def as_json(self):
        return {"v": str(self.place), "local_point": self.label, "entries": [v.as_json() for v in self.entries]}


def w_fiber_verify(inst, t0, places):
    """Whether the fiber over t0 has a local point at each place: b_i(t0 - a_i) a local norm for all i."""
    t0 = as_rational(t0)
    reports = []
    for place in places:
        place = place if isinstance(place, Place) else Place.parse(str(place))
        verdicts = tuple(
            local_norm_test(NormCandidate(entry.b, t0), entry.extension, place) for entry in inst.entries
        )
        kinds = {v.kind for v in verdicts}
        if Norm.NOT_NORM in kinds:
            verdict = Norm.NOT_NORM
        elif kinds == {Norm.IS_NORM}:
            verdict = Norm.IS_NORM
        else:
            verdict = Norm.UNDETERMINED
        reports.append(FiberReport(place, verdict, verdicts))
    return reports
