"""Command-line front end: ``dualroot {star,perturb,graph,check,certify}``."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import tempfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .exactmath import ExactMathError, format_rational, parse_rational, qmatrix
from .lattice import LatticeError, lattice_from_json, named_lattice
from .delone.analytic import delone_star_analytic
from .delone.cells import DeloneError, star_from_json, star_to_json
from .delone.lifted import delone_star_lifted
from .delone.subdivide import refining_subdivision
from .venkov.dstar import classify_dstar_elements, reduce_cycle_d2m
from .venkov.graph import (
    NotInSpan,
    VenkovError,
    build_venkov_graph,
    decompose_cycle,
    enumerate_basic_cycles,
    fundamental_cycles,
    is_cycle,
)
from .venkov.report import YES, certificate_to_json, criteria_report, graph_to_json

EXIT_FAIL, EXIT_INPUT, EXIT_NOT_IN_SPAN = 1, 2, 3


class InputError(Exception):
    pass


# -- io -----------------------------------------------------------------------

def dumps(data) -> str:
    return json.dumps(data, indent=1, sort_keys=True) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, data) -> None:
    text = dumps(data)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def read_json(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
        return json.loads(raw), hashlib.sha256(raw).hexdigest()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None


def load_star(path: str):
    data, digest = read_json(path)
    try:
        return star_from_json(data), digest
    except (DeloneError, LatticeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def provenance(**hashes) -> dict:
    return {"version": __version__, "inputs": {k: v for k, v in sorted(hashes.items())}}


# -- perturbations ------------------------------------------------------------

def sample_perturbation(d: int, seed: int, denominator: int = 64):
    """Symmetric matrix with entries p/q, p uniform in [-q, q]."""
    rng = random.Random(seed)
    gp = [[Fraction(0)] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            gp[i][j] = gp[j][i] = Fraction(rng.randint(-denominator, denominator), denominator)
    return gp


def perturb_star(star, gp, budget: int):
    eps, sub = refining_subdivision(star.lattice.gram, gp, star, budget)
    out = star_to_json(sub)
    out["epsilon"] = format_rational(eps)
    out["perturbation"] = [[format_rational(x) for x in row] for row in gp]
    return out


def _perturb_job(job):
    star_data, seed, denominator, budget = job
    star = star_from_json(star_data)
    gp = sample_perturbation(star.lattice.dim, seed, denominator)
    try:
        out = perturb_star(star, gp, budget)
    except DeloneError as exc:
        return seed, None, str(exc)
    out["seed"] = seed
    return seed, out, None


# -- commands -----------------------------------------------------------------

def cmd_star(args) -> int:
    if args.lattice:
        data, _ = read_json(args.lattice)
        try:
            lat = lattice_from_json(data)
        except LatticeError as exc:
            raise InputError(f"{args.lattice}: {exc}") from None
        if args.backend == "analytic":
            if lat.family is None:
                raise InputError("analytic backend needs a named family")
            star = delone_star_analytic(lat.family, lat.dim)
        else:
            star = delone_star_lifted(lat, window=args.window)
    else:
        if not args.family:
            raise InputError("give --family (and --dim) or --lattice")
        try:
            lat = named_lattice(args.family, args.dim)
        except LatticeError as exc:
            raise InputError(f"bad --family/--dim: {exc}") from None
        if args.backend == "analytic":
            star = delone_star_analytic(args.family, args.dim)
        else:
            star = delone_star_lifted(lat, window=args.window)
    sizes = Counter(len(c.vertices) for c in star.cells)
    print(f"{len(star.cells)} classes; cells by vertex count: {dict(sorted(sizes.items()))}", file=sys.stderr)
    emit(args, star_to_json(star))
    return 0


def cmd_perturb(args) -> int:
    data, digest = read_json(args.star)
    try:
        star = star_from_json(data)
    except (DeloneError, LatticeError) as exc:
        raise InputError(f"{args.star}: {exc}") from None
    if args.epsilon_budget < 1:
        raise InputError("--epsilon-budget must be at least 1")
    if args.perturbation:
        pdata, pdigest = read_json(args.perturbation)
        try:
            gp = qmatrix([[parse_rational(x) for x in row] for row in pdata])
        except (ExactMathError, TypeError) as exc:
            raise InputError(f"{args.perturbation}: {exc}") from None
        if len(gp) != star.lattice.dim or any(len(r) != star.lattice.dim for r in gp):
            raise InputError(f"{args.perturbation}: wrong size")
        out = perturb_star(star, gp, args.epsilon_budget)
        out["provenance_inputs"] = provenance(star=digest, perturbation=pdigest)
        emit(args, out)
        print(f"epsilon = {out['epsilon']}; {len(out['cells'])} classes", file=sys.stderr)
        return 0
    seeds = args.seed if args.seed else [0]
    if len(seeds) > 1 and (not args.out or "{seed}" not in args.out):
        raise InputError("several seeds need --out containing '{seed}'")
    jobs = [(data, s, args.denominator, args.epsilon_budget) for s in seeds]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_perturb_job, jobs))
    else:
        results = [_perturb_job(j) for j in jobs]
    status = 0
    for seed, out, err in results:
        if err is not None:
            print(f"seed {seed}: {err}", file=sys.stderr)
            status = EXIT_FAIL
            continue
        out["provenance_inputs"] = provenance(star=digest)
        text = dumps(out)
        if args.out:
            write_atomic(args.out.replace("{seed}", str(seed)), text)
        else:
            sys.stdout.write(text)
        print(f"seed {seed}: epsilon = {out['epsilon']}; {len(out['cells'])} classes", file=sys.stderr)
    return status


def cmd_graph(args) -> int:
    star, _ = load_star(args.star)
    g = build_venkov_graph(star)
    print(f"{len(g.vertices)} vertices, {len(g.edges)} edges", file=sys.stderr)
    emit(args, graph_to_json(g))
    return 0


def cmd_check(args) -> int:
    star, digest = load_star(args.star)
    report = criteria_report(star)
    report.update(provenance(star=digest))
    emit(args, report)
    print(f"conclusion: {report['conclusion']}", file=sys.stderr)
    return 0 if report["conclusion"] == YES else EXIT_FAIL


def _parse_edges(text: str) -> dict:
    """``"i:c,j:c,..."`` with rational coefficients c."""
    out = {}
    try:
        for item in text.split(","):
            k, c = item.split(":")
            out[int(k)] = out.get(int(k), 0) + parse_rational(c.strip())
    except (ValueError, ExactMathError) as exc:
        raise InputError(f"bad --edges: {exc}") from None
    return {k: Fraction(c) for k, c in out.items() if c}


def cmd_certify(args) -> int:
    star, digest = load_star(args.star)
    g = build_venkov_graph(star)
    if args.edges:
        x = _parse_edges(args.edges)
        if any(not 0 <= k < len(g.edges) for k in x) or not is_cycle(g, x):
            raise InputError("--edges does not describe a cycle of the graph")
    else:
        cycles = fundamental_cycles(g)
        if not 0 <= args.cycle < len(cycles):
            raise InputError(f"cycle index out of range (0..{len(cycles) - 1})")
        x = cycles[args.cycle]
    basic = enumerate_basic_cycles(star, g)
    out = {}
    try:
        if args.mode == "d2m":
            d = star.lattice.dim
            if d % 2:
                raise VenkovError("d2m mode needs an even-dimensional Dstar star")
            tax = classify_dstar_elements(g, d // 2, "even")
            trace, cert = reduce_cycle_d2m(star, g, tax, basic, x)
            out["trace"] = json.loads(json.dumps(trace, default=format_rational))
        else:
            cert = decompose_cycle(g, basic, x)
    except NotInSpan as exc:
        print("not in span; separating functional:", file=sys.stderr)
        print(dumps({str(k): format_rational(v) for k, v in sorted(exc.functional.items())}), file=sys.stderr)
        return EXIT_NOT_IN_SPAN
    if cert.residual(basic):
        raise VenkovError("certificate with nonzero residual")  # pragma: no cover
    out.update(certificate_to_json(cert))
    out.update(provenance(star=digest))
    emit(args, out)
    print(f"{len(cert.terms)} terms, residual 0", file=sys.stderr)
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dualroot", description="Delone stars and Venkov graphs in exact arithmetic.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")

    s = sub.add_parser("star", help="compute a Delone star")
    s.add_argument("--family")
    s.add_argument("--dim", type=int)
    s.add_argument("--lattice", help="lattice JSON file instead of --family")
    s.add_argument("--backend", choices=("analytic", "lifted"), default="analytic")
    s.add_argument("--window", type=int, default=2)
    common(s)
    s.set_defaults(func=cmd_star)

    s = sub.add_parser("perturb", help="Delone subdivision under a random perturbation")
    s.add_argument("--star", required=True)
    s.add_argument("--seed", type=int, nargs="+")
    s.add_argument("--denominator", type=int, default=64)
    s.add_argument("--perturbation", help="JSON matrix used instead of a sampled one")
    s.add_argument("--epsilon-budget", type=int, default=40)
    common(s)
    s.set_defaults(func=cmd_perturb)

    s = sub.add_parser("graph", help="red Venkov graph of a star")
    s.add_argument("--star", required=True)
    common(s)
    s.set_defaults(func=cmd_graph)

    s = sub.add_parser("check", help="evaluate the combinatorial criteria")
    s.add_argument("--star", required=True)
    common(s)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("certify", help="express a cycle over the basic cycles")
    s.add_argument("--star", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--cycle", type=int, default=0, help="fundamental cycle index")
    g.add_argument("--edges", help="explicit cycle as 'edge:coef,...'")
    s.add_argument("--mode", choices=("solve", "d2m"), default="solve")
    common(s)
    s.set_defaults(func=cmd_certify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DeloneError, LatticeError, VenkovError, ExactMathError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
