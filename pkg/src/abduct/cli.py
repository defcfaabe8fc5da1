"""``abduct`` command line.

Exit codes: 0 success (explanation found), 2 no plausible explanation at the
requested mu, 1 any other failure (including usage errors).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .abduce import abduce, build_coverage, candidate_attributes, enumerate_terms, estimate_mu
from .dataset import Dataset, DatasetFormatError, Independent, guess_format, load_dataset, save_dataset
from .evaluate import compare_bounds, evaluate
from .formula import FormulaSyntaxError, kdnf_from_formula, parse_formula
from .oracle import DEFAULT as ORACLE_LIMITS
from .oracle import exact_filter_counts, semantic_provability
from .proofsys import KnowledgeBase, ProofEngine, parse_kb, term_holds, derive_literals
from .sampling import AbductionParams, SampleBudgetWarning, required_samples
from .synth import PRNG_NAME, plant, sample_masked

log = logging.getLogger("abduct")

EXIT_OK, EXIT_ERROR, EXIT_NO_EXPLANATION = 0, 1, 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ABDUCT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"ABDUCT_SEED={env!r} is not an integer") from None
    return 0


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_examples(path: str) -> Dataset:
    try:
        return load_dataset(Path(path).read_bytes(), guess_format(path))
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from None
    except DatasetFormatError as exc:
        raise CliError(f"{path}: {exc}") from None


def _load_kb(path: str | None, n: int) -> KnowledgeBase:
    if path is None:
        return KnowledgeBase.empty(n)
    try:
        return parse_kb(_read_text(path), n)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None


def _load_query(arg: str, n: int):
    text = _read_text(arg[1:]).strip() if arg.startswith("@") else arg
    try:
        return parse_formula(text, n)
    except FormulaSyntaxError as exc:
        where = arg[1:] if arg.startswith("@") else "--query"
        raise CliError(f"{where}: {exc}") from None


def _engine(args) -> ProofEngine:
    try:
        return ProofEngine.parse(args.engine, default_width=args.k + 1)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _params(args, n: int, mu: float | None = None) -> AbductionParams:
    try:
        return AbductionParams(
            mu=args.mu if mu is None else mu,
            epsilon=args.epsilon,
            gamma=args.gamma,
            delta=args.delta,
            k=args.k,
            r=args.r,
            n=n,
        )
    except ValueError as exc:
        raise CliError(f"invalid parameters: {exc}") from None


def _emit(obj: dict, args, table_lines: list[str]) -> None:
    if args.format == "json":
        text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    else:
        text = "\n".join(table_lines) + "\n"
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _table(pairs) -> list[str]:
    width = max(len(k) for k, _ in pairs)
    return [f"{k:<{width}}  {v}" for k, v in pairs]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    seed = _seed(args)
    try:
        inst = plant(
            args.n, args.k, args.r, args.mu_target, args.epsilon_star, seed,
            base_mean=args.base_mean, c_base_rate=args.c_base_rate, kb_links=not args.no_kb_links,
        )
        process = Independent(args.mask_rate)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if args.m < 1:
        raise CliError("--m must be >= 1")
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {out}: {exc.strerror or exc}") from None
    train = sample_masked(inst, args.m, process, seed + 1)
    files = {
        "dataset.csv": save_dataset(train.dataset, "csv"),
        "kb.txt": inst.kb.to_text().encode(),
        "query.txt": f"{inst.c}\n".encode(),
    }
    if args.holdout:
        files["holdout.csv"] = save_dataset(sample_masked(inst, args.holdout, process, seed + 2).dataset, "csv")
    manifest = inst.manifest()
    manifest.update(
        tool_version=__version__,
        mask={"kind": "independent", "p": args.mask_rate},
        m=args.m,
        holdout_m=args.holdout or 0,
        sample_seeds={"train": seed + 1, "holdout": seed + 2 if args.holdout else None},
        files=sorted([*files, "manifest.json"]),
    )
    files["manifest.json"] = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode()
    for name, data in files.items():
        try:
            (out / name).write_bytes(data)
        except OSError as exc:
            raise CliError(f"cannot write {out / name}: {exc.strerror or exc}") from None
    print(f"wrote {', '.join(sorted(files))} to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_samples(args) -> int:
    params = _params(args, args.n)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SampleBudgetWarning)
        derived = required_samples(params, args.budget)
    obj = {"params": params.to_dict(), "derived": derived.to_dict(), "warnings": [str(w.message) for w in caught]}
    pairs = [("|T|", derived.term_count_T), ("L = ln(2|T|^r/delta)", f"{derived.log_term:.6g}"),
             ("m (algorithm)", derived.m_algorithm), ("m (filter)", derived.m_filter),
             ("m (theoretical)", derived.m_theoretical), ("m", derived.m),
             ("delta'", f"{derived.delta_prime:.6g}"), ("filter threshold", derived.filter_threshold),
             ("cover target", derived.cover_target)]
    _emit(obj, args, _table(pairs) + [f"warning: {w}" for w in obj["warnings"]])
    return EXIT_OK


def cmd_abduce(args) -> int:
    seed = _seed(args)
    data = _load_examples(args.examples)
    kb = _load_kb(args.kb, data.n)
    c = _load_query(args.query, data.n)
    engine = _engine(args)
    holdout = _load_examples(args.holdout) if args.holdout else None
    if holdout is not None and holdout.attribute_names != data.attribute_names:
        raise CliError(f"{args.holdout}: attributes differ from {args.examples}")
    if data.m < 1:
        raise CliError(f"{args.examples}: no examples")
    attrs = candidate_attributes(data.n, c, args.exclude_query_attrs)
    notes: list[str] = []

    mu_info = None
    mu = args.mu
    if mu is None:
        probe = _params(args, len(attrs), mu=1.0)
        est = estimate_mu(kb, c, data, probe, engine, floor=args.mu_floor, exclude_query_attributes=args.exclude_query_attrs)
        mu = est.mu
        mu_info = {"estimated": True, "found": est.found, "grid": est.tried}
    params = _params(args, len(attrs), mu=mu)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SampleBudgetWarning)
        derived = required_samples(params, args.budget)
    notes += [str(w.message) for w in caught]

    rows = data
    if data.m > derived.m:
        rng = np.random.Generator(np.random.PCG64(seed))
        keep = np.sort(rng.choice(data.m, size=derived.m, replace=False))
        rows = data.subset(keep.tolist())
    elif data.m < derived.m:
        notes.append(f"dataset has {data.m} examples, fewer than the required {derived.m}")
    for note in notes:
        log.warning(note)

    result = abduce(kb, c, rows, params, engine, exclude_query_attributes=args.exclude_query_attrs, workers=args.workers)
    if result.contradictions:
        notes.append(f"{result.contradictions} examples contradict the knowledge base (ex falso: every query provable)")
    report = {
        "schema": 1,
        "tool_version": __version__,
        "prng": PRNG_NAME,
        "seed": seed,
        "config": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "engine": str(engine),
        "params": params.to_dict(),
        "mu": mu_info or {"estimated": False},
        "samples": {**derived.to_dict(), "m_actual": rows.m, "m_available": data.m},
        "query": str(c),
        "result": result.to_dict(),
        "warnings": notes,
    }
    lines = [f"status: {result.status.value}", f"h: {result.h}",
             f"covered {result.covered}/{rows.m} (target {result.cover_target}), filter threshold {result.filter_threshold}",
             f"m theoretical {derived.m_theoretical}, actual {rows.m}; engine {engine}; seed {seed}"]
    lines += [f"  {s.term}: coverage {s.coverage}, gain {s.gain}, bad {s.bad_count}" for s in result.term_stats]
    if holdout is not None and result.found:
        rep = evaluate(result.h, kb, c, holdout, params, engine)
        cmp = compare_bounds(rep, params, result.r_prime)
        report["evaluation"] = rep.to_dict()
        report["bounds"] = cmp.to_dict()
        err = "undefined" if rep.entailment_error_hat is None else f"{rep.entailment_error_hat:.4f}"
        lines.append(f"holdout: plausibility {rep.plausibility_hat:.4f} (floor {rep.plausibility_floor:.4f}), "
                     f"error {err} (ceiling {rep.error_ceiling:.4f}), bounds {'pass' if cmp.passed else 'FAIL'}")
    lines += [f"warning: {w}" for w in notes]
    _emit(report, args, lines)
    return EXIT_OK if result.found else EXIT_NO_EXPLANATION


def _load_hypothesis(arg: str, n: int, k: int):
    if arg.startswith("@"):
        path = arg[1:]
        text = _read_text(path)
        if path.endswith(".json"):
            try:
                text = json.loads(text)["result"]["h"]
            except (ValueError, KeyError, TypeError):
                raise CliError(f"{path}: not an abduce report") from None
    else:
        text = arg
    try:
        return kdnf_from_formula(parse_formula(text.strip(), n), k)
    except ValueError as exc:
        raise CliError(f"hypothesis: {exc}") from None


def cmd_evaluate(args) -> int:
    data = _load_examples(args.examples)
    kb = _load_kb(args.kb, data.n)
    c = _load_query(args.query, data.n)
    engine = _engine(args)
    h = _load_hypothesis(args.hypothesis, data.n, args.k)
    params = _params(args, data.n)
    rep = evaluate(h, kb, c, data, params, engine)
    cmp = compare_bounds(rep, params)
    err = "undefined" if rep.entailment_error_hat is None else f"{rep.entailment_error_hat:.4f}"
    lines = [f"h: {h}", f"holdout rows: {rep.holdout_size}, provable: {rep.provable_rows}, bad: {rep.bad_rows}",
             f"plausibility {rep.plausibility_hat:.4f} vs floor {rep.plausibility_floor:.4f}: "
             f"{'pass' if cmp.plausibility.passed else 'FAIL'}",
             f"error {err} vs ceiling {rep.error_ceiling:.4f}: "
             f"{ {True: 'pass', False: 'FAIL', None: 'undefined'}[cmp.entailment.passed] }"]
    _emit({"schema": 1, "evaluation": rep.to_dict(), "bounds": cmp.to_dict()}, args, lines)
    return EXIT_OK if cmp.passed else EXIT_NO_EXPLANATION


def cmd_verify(args) -> int:
    data = _load_examples(args.examples)
    kb = _load_kb(args.kb, data.n)
    c = _load_query(args.query, data.n)
    engine = _engine(args)
    if data.n > ORACLE_LIMITS.max_n:
        raise CliError(f"verify handles at most {ORACLE_LIMITS.max_n} attributes, dataset has {data.n}")
    rows = data.subset(range(min(data.m, args.rows)))
    terms = enumerate_terms(data.n, args.k)
    matrix = build_coverage(terms, kb, c, rows, engine)
    oracle_counts = exact_filter_counts(terms, kb, c, rows.rows, engine)
    mismatches = [str(t) for t, a, b in zip(terms, matrix.bad_counts, oracle_counts) if a != b]
    unsound = 0
    for row in rows.rows:
        derived = derive_literals(kb, row, engine)
        for t in terms:
            if term_holds(t, derived) and not semantic_provability(kb, t, row):
                unsound += 1
    ok = not mismatches and not unsound
    obj = {"rows": rows.m, "terms": len(terms), "engine": str(engine),
           "filter_count_mismatches": mismatches, "unsound_provability": unsound, "ok": ok}
    lines = [f"checked {len(terms)} terms on {rows.m} rows with {engine}",
             f"filter counts vs oracle: {'equal' if not mismatches else f'{len(mismatches)} mismatches'}",
             f"engine soundness: {'ok' if not unsound else f'{unsound} unsound verdicts'}"]
    _emit(obj, args, lines)
    return EXIT_OK if ok else EXIT_ERROR


# ---------------------------------------------------------------------------


def _add_params(p, mu_required=True):
    p.add_argument("--mu", type=float, required=mu_required, default=None)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, default=1)


def _add_inputs(p):
    p.add_argument("--examples", required=True, help="CSV or JSONL dataset")
    p.add_argument("--kb", help="clause file (default: empty knowledge base)")
    p.add_argument("--query", required=True, help="formula text, or @FILE")
    p.add_argument("--engine", default="unitprop", help="witnessed | unitprop | resolution[:W] (default W = k+1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abduct", description="Learn k-DNF explanations from partial examples.")
    parser.add_argument("--version", action="version", version=f"abduct {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a planted synthetic instance")
    g.add_argument("--n", type=int, default=20)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--r", type=int, default=3)
    g.add_argument("--mu-target", type=float, default=0.8)
    g.add_argument("--epsilon-star", type=float, default=0.05)
    g.add_argument("--mask-rate", type=float, default=0.2)
    g.add_argument("--base-mean", type=float, default=0.5)
    g.add_argument("--c-base-rate", type=float, default=0.5)
    g.add_argument("--no-kb-links", action="store_true")
    g.add_argument("--m", type=int, default=5000)
    g.add_argument("--holdout", type=int, default=0, help="also write holdout.csv with this many rows")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("abduce", help="run implicit abduction")
    _add_inputs(a)
    _add_params(a, mu_required=False)
    a.add_argument("--mu-floor", type=float, default=0.01, help="lowest mu tried when --mu is omitted")
    a.add_argument("--exclude-query-attrs", action="store_true", help="no candidate terms over the query's attributes")
    a.add_argument("--seed", type=int)
    a.add_argument("--budget", type=int, help="cap on the number of examples used")
    a.add_argument("--holdout", help="dataset for evaluating the returned explanation")
    a.add_argument("--workers", type=int, default=1)
    a.add_argument("--format", choices=("json", "table"), default="json")
    a.add_argument("--output")
    a.set_defaults(func=cmd_abduce)

    s = sub.add_parser("samples", help="print the required sample size")
    _add_params(s)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--budget", type=int)
    s.add_argument("--format", choices=("json", "table"), default="table")
    s.set_defaults(func=cmd_samples)

    e = sub.add_parser("evaluate", help="score an explanation on holdout data")
    _add_inputs(e)
    _add_params(e)
    e.add_argument("--hypothesis", required=True, help="k-DNF text, @FILE, or @REPORT.json")
    e.add_argument("--format", choices=("json", "table"), default="json")
    e.add_argument("--output")
    e.set_defaults(func=cmd_evaluate)

    v = sub.add_parser("verify", help="cross-check the pipeline against brute-force oracles")
    _add_inputs(v)
    v.add_argument("--k", type=int, default=1)
    v.add_argument("--rows", type=int, default=200)
    v.add_argument("--format", choices=("json", "table"), default="table")
    v.add_argument("--output")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"abduct: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
