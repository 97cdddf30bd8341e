"""Command line: one subcommand per engine, results as JSON lines on stdout."""

import argparse
import json
import logging
import sys
import threading

from . import config
from .arith import as_rational, use_factor_cache
from .cache import FactorCache
from .conjecture import (
    Mobius,
    Mode,
    Overall,
    change_variables,
    evaluate,
    extend_places,
    search_t0,
    verify_hypotheses,
)
from .console import console, setup_logging
from .errors import (
    CyclicAlready,
    DomainError,
    HypothesisFailure,
    InfeasibleAtPrecision,
    InstanceParseError,
    InternalConsistencyError,
    LocsplitError,
    NeedsSInclusion,
    NoWitnessFound,
    NotFound,
    RamifiedPrime,
    RetryExhausted,
    UnfactoredError,
    VacuousInstance,
)
from .fields import NumberFieldAbs
from .galois_class import AlmostAbelian, almost_abelian_test, cyclic_resolvent_cubic, find_split_prime
from .instance_io import (
    apply_precision,
    load_instance,
    parse_binary_form,
    parse_binary_target,
    parse_constraint,
    parse_element,
    parse_places,
    parse_point_target,
    parse_poly,
    parse_value_target,
)
from .local_symbols import (
    DirichletCharacter,
    Norm,
    Place,
    cyclic_invariant,
    hilbert_symbol,
    invariant_sum,
    relevant_places,
    reciprocity_defect,
)
from .manifest import RunManifest, digest_file
from .sieve import forbidden_class_scan, hh1_search, irving_form_build, irving_sign_check
from .strong_approx import (
    NormMultiplierProblem,
    PuncturedAffineProblem,
    line_trick_solve,
    norm_multiplier_solve,
    w_fiber_verify,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3

USAGE_ERRORS = (InstanceParseError, DomainError, InfeasibleAtPrecision, RamifiedPrime, NeedsSInclusion, CyclicAlready)
INCONCLUSIVE_ERRORS = (NoWitnessFound, NotFound, RetryExhausted, UnfactoredError)
FAILURE_ERRORS = (HypothesisFailure, VacuousInstance)


class ResultWriter:
    """Single writer for the result stream; engines may call emit from worker threads."""

    def __init__(self, stream=None):
        self.stream = stream or sys.stdout
        self.count = 0
        self._lock = threading.Lock()

    def emit(self, record):
        line = json.dumps(record, sort_keys=True)
        with self._lock:
            self.stream.write(line + "\n")
            self.stream.flush()
            self.count += 1


def _instance(args):
    inst = load_instance(args.instance)
    if getattr(args, "precision", None):
        inst = apply_precision(inst, args.precision)
    return inst


def _mode(args):
    return Mode.WEAK if getattr(args, "weak", False) else Mode.STRONG


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _assumption(text):
    try:
        i, v = text.split(",", 1)
        return int(i), Place.parse(v)
    except (ValueError, DomainError) as e:
        raise argparse.ArgumentTypeError(f"expected i,v (e.g. 1,2 or 1,real), got {text!r}") from e


# -- subcommands ------------------------------------------------------------------


def cmd_verify_hypotheses(args, settings, out):
    verdicts = verify_hypotheses(_instance(args), settings.assumed)
    failed = 0
    for (i, v), verdict in verdicts.items():
        out.emit({"i": i, "v": str(v), **verdict.as_json()})
        failed += verdict.kind is Norm.NOT_NORM
    console.print(f"{len(verdicts)} hypotheses checked, [bold red]{failed}[/bold red] not local norms")
    return EXIT_FAILURES if failed else EXIT_OK


def cmd_check_t0(args, settings, out):
    report = evaluate(_instance(args), args.t0, assumed=settings.assumed, mode=_mode(args))
    out.emit(report.as_json())
    colour = {Overall.PASS: "bold green", Overall.CONDITIONAL: "bold yellow", Overall.FAIL: "bold red"}[report.overall]
    console.print(f"t0 = {report.t0}: [{colour}]{report.overall.value}[/{colour}]" + (f" ({report.witness})" if report.witness else ""))
    return EXIT_FAILURES if report.overall is Overall.FAIL else EXIT_OK


def cmd_search_t0(args, settings, out):
    result = search_t0(
        _instance(args),
        height_bound=args.bound,
        denominator_bound=args.denominator_bound,
        jobs=settings.jobs,
        limit=args.limit,
        assumed=settings.assumed,
        mode=_mode(args),
    )
    for _, report in result.hits:
        out.emit(report.as_json())
    out.emit({"stats": result.as_json()})
    if not result.hits:
        console.print(f"[bold yellow]No witness up to height {args.bound} (not a disproof)[/bold yellow]")
        return EXIT_INCONCLUSIVE
    console.print(f"[bold green]{len(result.hits)} witness(es), first t0 = {result.hits[0][0]}[/bold green]")
    return EXIT_OK


def cmd_change_vars(args, settings, out):
    values = [as_rational(x) for x in args.mobius.split(",")]
    if len(values) != 4:
        raise DomainError("--mobius needs alpha,beta,gamma,delta")
    change = change_variables(
        _instance(args), Mobius(*values), _ints(args.extra_primes or ""), args.t0_prime, settings.assumed
    )
    out.emit(change.as_json())
    if change.conclusions is not None and not change.conclusions["ok"]:
        console.print("[bold red]Conclusions fail for the given t0'[/bold red]")
        return EXIT_FAILURES
    console.print(f"[bold green]Transformed instance has S = {sorted(str(v) for v in change.transformed.S)}[/bold green]")
    return EXIT_OK


def cmd_extend_s(args, settings, out):
    extended = extend_places(_instance(args), _ints(args.primes))
    out.emit(extended.as_json())
    return EXIT_OK


def cmd_norm_multiplier(args, settings, out):
    prob = NormMultiplierProblem(
        NumberFieldAbs(parse_poly(args.poly)),
        frozenset(parse_places(args.S)),
        tuple(parse_value_target(t) for t in args.target),
        args.v0,
    )
    cert = norm_multiplier_solve(prob, box=args.bound or config.DEFAULT_NORM_BOX, jobs=settings.jobs)
    out.emit(cert.as_json())
    console.print(f"[bold green]t = {cert.t}[/bold green] (v0 = {cert.v0})")
    return EXIT_OK


def cmd_line_trick(args, settings, out):
    targets = {}
    for text in args.target:
        place, point, precision = parse_point_target(text)
        targets[place] = (point, precision)
    prob = PuncturedAffineProblem(
        args.dim,
        tuple(parse_constraint(c, args.dim) for c in args.exclude),
        frozenset(parse_places(args.S)),
        targets,
        args.v0,
    )
    result = line_trick_solve(prob, rng=settings.rng(11))
    out.emit(result.as_json())
    console.print(f"[bold green]P = ({', '.join(str(x) for x in result.point)})[/bold green]")
    return EXIT_OK


def cmd_w_verify(args, settings, out):
    inst = _instance(args)
    places = [Place.parse(v) for v in args.places.split(",")] if args.places else sorted(inst.S, key=Place.sort_key)
    reports = w_fiber_verify(inst, args.t0, places)
    for report in reports:
        out.emit(report.as_json())
    return EXIT_FAILURES if any(r.verdict is Norm.NOT_NORM for r in reports) else EXIT_OK


def cmd_hilbert(args, settings, out):
    place = Place.parse(args.place)
    symbol = hilbert_symbol(args.a, args.b, place)
    out.emit({"a": str(as_rational(args.a)), "b": str(as_rational(args.b)), "v": str(place), "symbol": symbol})
    return EXIT_OK


def cmd_reciprocity(args, settings, out):
    a, b = as_rational(args.a), as_rational(args.b)
    symbols = {str(v): hilbert_symbol(a, b, v) for v in relevant_places(a, b)}
    defect = reciprocity_defect(a, b)
    out.emit({"a": str(a), "b": str(b), "symbols": symbols, "defect": str(defect)})
    if defect:
        raise InternalConsistencyError(f"Hilbert reciprocity fails for ({a}, {b})")
    return EXIT_OK


def cmd_cyclic_inv(args, settings, out):
    x = as_rational(args.x)
    if args.kronecker is not None:
        chi = DirichletCharacter.kronecker(args.kronecker)
    elif args.modulus is not None:
        values = {}
        for item in args.gen:
            try:
                g, value = item.split(":")
                values[int(g)] = as_rational(value)
            except ValueError as e:
                raise DomainError(f"expected --gen g:value, got {item!r}") from e
        chi = DirichletCharacter.from_generators(args.modulus, values)
    else:
        raise DomainError("give --kronecker D or --modulus m with --gen g:value")
    places = [Place.parse(v) for v in args.places.split(",")] if args.places else None
    record = {"x": str(x), "modulus": chi.modulus, "order": chi.order}
    if places is not None:
        record["invariants"] = {str(v): str(cyclic_invariant(chi, x, v.prime)) for v in places if not v.is_real}
    character = args.kronecker if args.kronecker is not None else chi
    record["sum"] = str(invariant_sum(character, x, places))
    out.emit(record)
    return EXIT_OK


def cmd_almost_abelian(args, settings, out):
    f = parse_poly(args.poly)
    verdict = almost_abelian_test(f, args.bound or config.DEFAULT_PRIME_BOUND, settings.jobs)
    record = verdict.as_json()
    if f.degree == 3 and not verdict.abelian:
        record["resolvent"] = str(cyclic_resolvent_cubic(f))
    out.emit(record)
    console.print(f"{f}: [bold]{verdict.value.value}[/bold]")
    return EXIT_INCONCLUSIVE if verdict.value is AlmostAbelian.INCONCLUSIVE else EXIT_OK


def cmd_split_prime(args, settings, out):
    fields = [NumberFieldAbs(parse_poly(text)) for text in args.poly]
    p = find_split_prime(fields, _ints(args.exclude or ""), args.bound or config.DEFAULT_SPLIT_PRIME_BOUND)
    out.emit({"prime": p, "fields": [str(K.P) for K in fields]})
    return EXIT_OK


def cmd_hh1_search(args, settings, out):
    result = hh1_search(
        [parse_binary_form(text) for text in args.form],
        frozenset(parse_places(args.S)),
        [parse_binary_target(t) for t in args.target],
        mu_bound=args.bound or config.DEFAULT_MU_MAX,
        lam_bound=args.lam_bound,
        jobs=settings.jobs,
        limit=args.limit,
    )
    for hit in result.hits:
        out.emit(hit.as_json())
    out.emit({"stats": result.as_json()})
    console.print(f"{len(result.hits)} certified (HH1) hits")
    return EXIT_OK if result.hits else EXIT_INCONCLUSIVE


def _irving(args):
    K = NumberFieldAbs(parse_poly(args.poly))
    return irving_form_build(K, args.q, parse_element(args.a1, K), args.a2, parse_element(args.b1, K), args.b2)


def cmd_irving_build(args, settings, out):
    irving = _irving(args)
    out.emit({**irving.as_json(), "negative_real_roots": irving_sign_check(irving)})
    return EXIT_OK


def cmd_irving_scan(args, settings, out):
    irving = _irving(args)
    box = args.bound or config.DEFAULT_FORBIDDEN_BOX
    hits, stats = forbidden_class_scan(
        irving.form, frozenset(parse_places(args.S)), irving.q, (1, box), (1, box), jobs=settings.jobs, limit=args.limit
    )
    for hit in hits:
        out.emit(hit.as_json())
    out.emit({"stats": dict(sorted(stats.items()))})
    return EXIT_OK if hits else EXIT_INCONCLUSIVE


# -- parser -----------------------------------------------------------------------


def _common():
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=config.DEFAULT_SEED, help="Seed for every random choice.")
    parent.add_argument("--jobs", type=int, default=config.DEFAULT_JOBS, help="Worker threads.")
    parent.add_argument(
        "--cache",
        nargs="?",
        const=config.FACTOR_CACHE_FILE,
        help=f"Factorization cache file (JSON lines); bare --cache uses {config.FACTOR_CACHE_FILE}.",
    )
    parent.add_argument("--manifest", help="Write a run manifest to this path.")
    parent.add_argument("--bound", type=int, help="Search bound (height, prime bound, box or mu bound).")
    parent.add_argument("--limit", type=int, help="Stop after this many hits.")
    parent.add_argument(
        "--assert-hypothesis",
        type=_assumption,
        action="append",
        default=[],
        metavar="i,v",
        help="Treat an Undetermined hypothesis verdict as IsNorm (recorded in the manifest).",
    )
    parent.add_argument("--log-level", default="WARNING", help="Logging level for stderr.")
    return parent


def _with_instance(parser):
    parser.add_argument("--instance", required=True, help="Instance file.")
    parser.add_argument("--precision", help="Override target precisions, e.g. '2:5,real:1/10'.")
    parser.add_argument("--weak", action="store_true", help="Use condition (1') instead of (1).")
    return parser


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(
        prog="locsplit", description="Locally split values of polynomials: checks, searches and constructions."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    _with_instance(add("verify-hypotheses", cmd_verify_hypotheses, "Local norm hypotheses of an instance."))
    p = _with_instance(add("check-t0", cmd_check_t0, "Conditions (1), (1') and (2) for one t0."))
    p.add_argument("--t0", required=True)
    p = _with_instance(add("search-t0", cmd_search_t0, "Search t0 of bounded height."))
    p.add_argument("--denominator-bound", type=int, default=config.DEFAULT_DENOMINATOR_BOUND)
    p.set_defaults(bound=config.DEFAULT_HEIGHT_BOUND)
    p = _with_instance(add("change-vars", cmd_change_vars, "Apply a Mobius change of variables."))
    p.add_argument("--mobius", required=True, metavar="alpha,beta,gamma,delta")
    p.add_argument("--extra-primes")
    p.add_argument("--t0-prime")
    p = _with_instance(add("extend-s", cmd_extend_s, "Add primes to S with norm targets."))
    p.add_argument("--primes", required=True)
    p = add("norm-multiplier", cmd_norm_multiplier, "Norm t = N(x) close to local targets.")
    p.add_argument("--poly", required=True, help="Defining polynomial of L in x.")
    p.add_argument("--S", default="real")
    p.add_argument("--target", action="append", default=[], metavar="v:t:precision")
    p.add_argument("--v0", type=int)
    p = add("line-trick", cmd_line_trick, "S-integral point of affine space minus codimension-2 loci.")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--exclude", action="append", default=[], metavar="form;form")
    p.add_argument("--S", default="real")
    p.add_argument("--target", action="append", default=[], metavar="v:x1,..,xn:precision")
    p.add_argument("--v0", type=int, required=True)
    p = _with_instance(add("w-verify", cmd_w_verify, "Local points on the fiber over t0."))
    p.add_argument("--t0", required=True)
    p.add_argument("--places")
    p = add("hilbert", cmd_hilbert, "Hilbert symbol (a, b)_v.")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--place", required=True)
    p = add("reciprocity", cmd_reciprocity, "Hilbert symbols at every relevant place and their sum.")
    p.add_argument("a")
    p.add_argument("b")
    p = add("cyclic-inv", cmd_cyclic_inv, "Local invariants of a cyclic algebra.")
    p.add_argument("--kronecker", type=int)
    p.add_argument("--modulus", type=int)
    p.add_argument("--gen", action="append", default=[], metavar="g:value")
    p.add_argument("--x", required=True)
    p.add_argument("--places")
    p = add("almost-abelian", cmd_almost_abelian, "Classify Q[x]/(f) by Frobenius cycle types.")
    p.add_argument("--poly", required=True)
    p = add("split-prime", cmd_split_prime, "Smallest prime splitting completely in every field.")
    p.add_argument("--poly", action="append", required=True)
    p.add_argument("--exclude")
    p = add("hh1-search", cmd_hh1_search, "(lam, mu) making every form an S-unit times one prime.")
    p.add_argument("--form", action="append", required=True, help="Binary form in x, y.")
    p.add_argument("--S", default="real")
    p.add_argument("--target", action="append", default=[], metavar="v:lam,mu:precision")
    p.add_argument("--lam-bound", type=int)
    for name, func, text in (
        ("irving-build", cmd_irving_build, "Integral cubic form attached to a cubic field."),
        ("irving-scan", cmd_irving_scan, "Values of the cubic form with no prime factor 1 mod q."),
    ):
        p = add(name, func, text)
        p.add_argument("--poly", required=True, help="Cubic with one real root, in x.")
        p.add_argument("--q", type=int, default=7)
        p.add_argument("--a1", default="a")
        p.add_argument("--a2", default="0")
        p.add_argument("--b1", default="1")
        p.add_argument("--b2", default="1")
        p.add_argument("--S", default="real")
    return parser


def _error_record(e):
    record = {"error": type(e).__name__, "message": str(e)}
    for key in ("line", "column", "prime", "clause", "attempts"):
        value = getattr(e, key, None)
        if value is not None:
            record[key] = value
    return record


def run(argv=None, stream=None):
    """Parse, dispatch and return the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level.upper())
    settings = config.RunSettings(args.seed, args.jobs, args.cache, frozenset(args.assert_hypothesis))
    out = ResultWriter(stream)
    parameters = {k: v for k, v in vars(args).items() if k not in ("func", "manifest", "log_level", "cache", "jobs")}
    manifest = RunManifest(args.command, digest_file(getattr(args, "instance", None)), parameters)

    cache = None
    if args.cache:
        cache = FactorCache(args.cache)
        use_factor_cache(cache)
    try:
        code = args.func(args, settings, out)
    except USAGE_ERRORS as e:
        out.emit(_error_record(e))
        console.print(f"[bold red]{type(e).__name__}: {e}[/bold red]")
        code = EXIT_USAGE
    except INCONCLUSIVE_ERRORS as e:
        out.emit(_error_record(e))
        console.print(f"[bold yellow]{e}[/bold yellow]")
        code = EXIT_INCONCLUSIVE
    except FAILURE_ERRORS as e:
        out.emit(_error_record(e))
        console.print(f"[bold red]{e}[/bold red]")
        code = EXIT_FAILURES
    except (InternalConsistencyError, LocsplitError) as e:
        out.emit(_error_record(e))
        console.print_exception()
        code = EXIT_FAILURES
    finally:
        if cache is not None:
            use_factor_cache(None)
    if args.manifest:
        manifest.finish(code).write(args.manifest)
    logger.debug("%s: %d records, exit %d", args.command, out.count, code)
    return code


def entrypoint():
    """Main program entrypoint."""
    sys.exit(run())


if __name__ == "__main__":
    entrypoint()
