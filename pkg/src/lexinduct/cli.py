"""Command-line interface.

One binary with subcommands: ``learn`` (induce a lexicon from a corpus),
``gen`` (synthesize a gold lexicon and corpus), ``eval`` (score a learned
lexicon against gold), ``curve`` (learning curves), ``active`` (selective
sampling versus random), ``count-interp`` (interpretation counting), and
``lics`` (debug: common sub-forests of two terms).  A ``key=value`` config
file supplies defaults that flags override.  Every run writes its resolved
configuration next to its outputs; payloads carry no timestamps, so a rerun
with the same seed is byte-identical.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from .active import ActiveConfig, curve_auc, run_trial
from .candidates import SamplerConfig, lics
from .corpus import BackgroundLexicon, CorpusError, load_corpus, save_corpus
from .evaluate import learning_curve, lexicon_stats, score_lexicon
from .learner import HeuristicWeights, Lexicon, learn_lexicon
from .synth import GenConfig, gen_corpus, gen_gold_lexicon, load_freq
from .terms import TermError, count_interpretations, parse_term, render_term


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_config(path):
    values = {}
    with open(path, encoding="utf8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(parser, values):
    """Turn config-file strings into typed defaults for the parser."""
    typed = {}
    for action in parser._actions:
        if action.dest in values:
            raw = values[action.dest]
            if action.type is not None:
                typed[action.dest] = action.type(raw)
            elif isinstance(action.const, bool) or isinstance(action.default, bool):
                typed[action.dest] = raw.lower() in ("1", "true", "yes", "on")
            else:
                typed[action.dest] = raw
    return typed


def _write_json(path, payload):
    with open(path, "w", encoding="utf8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _write_rows(path, rows, columns):
    lines = ["\t".join(columns)]
    for row in rows:
        lines.append("\t".join(_fmt(row[c]) for c in columns))
    with open(path, "w", encoding="utf8") as fh:
        fh.write("\n".join(lines) + "\n")


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _load_inputs(args):
    corpus = load_corpus(args.corpus, args.format, strip_answer=args.strip_answer)
    bg = BackgroundLexicon.load(args.background, args.stoplist)
    return corpus, bg


def _sampler(args):
    return SamplerConfig(
        pairs_per_phrase=args.pairs_per_phrase,
        seed=args.seed,
        mode=args.candidate_mode,
        fracture_cap=args.fracture_cap,
    )


def _weights(args):
    return HeuristicWeights(w_fit=args.w_fit, w_gen=args.w_gen)


def _resolved(args, skip=("config", "func")):
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _pool_map(func, arg_tuples, workers):
    if workers <= 1:
        return [func(*a) for a in arg_tuples]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(func, *a) for a in arg_tuples]
        return [f.result() for f in futures]


# -- learn ------------------------------------------------------------------


def cmd_learn(args):
    corpus, bg = _load_inputs(args)
    result = learn_lexicon(corpus, bg, _sampler(args), _weights(args), args.max_phrase_len)
    result.lexicon.save(args.out_lexicon)
    if args.out_trace:
        with open(args.out_trace, "w", encoding="utf8") as fh:
            for step in result.trace:
                fh.write(json.dumps({
                    "step": step.step,
                    "phrase": " ".join(step.phrase),
                    "meaning": step.meaning,
                    "score": step.score,
                    "n_support": step.n_support,
                    "n_phrase": step.n_phrase,
                    "covered": {str(k): v for k, v in sorted(step.covered.items())},
                    "consumed": {str(k): v for k, v in sorted(step.consumed.items())},
                    "regenerated": step.regenerated,
                }, sort_keys=True, ensure_ascii=False) + "\n")
    stats = lexicon_stats(result.lexicon, result.n_examples, result.uncovered)
    payload = {
        "config": _resolved(args),
        "stats": stats.to_dict(),
        "n_initial_candidates": result.n_initial_candidates,
        "uncovered": {str(k): v for k, v in sorted(result.uncovered.items())},
    }
    if args.out_stats:
        _write_json(args.out_stats, payload)
    print(f"learned {stats.n_entries} entries | coverage {stats.coverage_pct:.1f}% | "
          f"ambiguity {stats.ambiguity:.2f} | initial candidates {result.n_initial_candidates}")
    return 0


# -- gen --------------------------------------------------------------------


def _gen_chunk(cfg, start, stop):
    from .synth import gen_example

    gold = gen_gold_lexicon(cfg)
    return [gen_example(gold, cfg, i) for i in range(start, stop)]


def cmd_gen(args):
    cfg = GenConfig(
        n_words=args.n_words, n_symbols=args.n_symbols, ambiguity=args.ambiguity,
        synonymy=args.synonymy, noun_frac=args.noun_frac, verb_frac=args.verb_frac,
        empty_frac=args.empty_frac, max_depth=args.max_depth, max_arity=args.max_arity,
        max_vars=args.max_vars, zipf_exponent=args.zipf_exponent, seed=args.seed,
    )
    gold = gen_gold_lexicon(cfg)
    if args.workers > 1:
        chunk = max(1, -(-args.n_examples // args.workers))
        spans = [(cfg, lo, min(lo + chunk, args.n_examples))
                 for lo in range(0, args.n_examples, chunk)]
        parts = _pool_map(_gen_chunk, spans, args.workers)
        examples = [ex for part in parts for ex in part]
        from collections import Counter

        counts = Counter()
        for ex in examples:
            counts.update(ex.tokens)
        gold.freq = dict(counts)
    else:
        examples = gen_corpus(gold, args.n_examples, cfg)
    save_corpus(args.out_corpus, examples, args.format)
    gold.save(args.out_gold)
    gold.save_freq(args.out_freq)
    if args.out_stats:
        _write_json(args.out_stats, {
            "config": _resolved(args),
            "n_entries": len(gold.entries),
            "realized_ambiguity": gold.realized_ambiguity(),
            "realized_synonymy": gold.realized_synonymy(),
        })
    print(f"generated {len(examples)} examples | {len(gold.entries)} gold entries | "
          f"ambiguity {gold.realized_ambiguity():.2f} | synonymy {gold.realized_synonymy():.2f}")
    return 0


# -- eval -------------------------------------------------------------------


def cmd_eval(args):
    learned = Lexicon.load(args.learned)
    gold = Lexicon.load(args.gold)
    freq = load_freq(args.freq) if args.freq else {}
    report = score_lexicon(learned, gold, freq)
    for name, value in report.to_dict().items():
        print(f"{name}\t{_fmt(value)}")
    if args.out:
        _write_json(args.out, {"config": _resolved(args), "report": report.to_dict()})
    return 0


# -- curve ------------------------------------------------------------------


def cmd_curve(args):
    corpus = load_corpus(args.corpus, args.format, strip_answer=args.strip_answer)
    gold = Lexicon.load(args.gold)
    freq = load_freq(args.freq) if args.freq else {}
    bg = BackgroundLexicon.load(args.background, args.stoplist)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    runner = None
    if args.workers > 1:
        def runner(func, arg_tuples, _workers=args.workers):
            return _pool_map(func, arg_tuples, _workers)
    rows = learning_curve(
        corpus, gold, freq, sizes, args.trials, args.seed, bg,
        _sampler(args), _weights(args), args.max_phrase_len, trial_runner=runner,
    )
    columns = ["size"] + [c for c in rows[0] if c != "size"]
    _write_rows(args.out, rows, columns)
    for row in rows:
        print(f"size {row['size']}: wP={row['weighted_precision_mean']:.3f} "
              f"wR={row['weighted_recall_mean']:.3f}")
    return 0


# -- active -----------------------------------------------------------------


def _active_trial(corpus, acfg, strategy, gold, freq, sampler, weights, max_len, trial):
    curve = run_trial(corpus, acfg, strategy, gold=gold, freq=freq,
                      sampler=sampler, weights=weights, max_phrase_len=max_len, trial=trial)
    return [(n, m.to_dict() if hasattr(m, "to_dict") else m) for n, m in curve]


def cmd_active(args):
    corpus = load_corpus(args.corpus, args.format, strip_answer=args.strip_answer)
    gold = Lexicon.load(args.gold) if args.gold else None
    freq = load_freq(args.freq) if args.freq else {}
    acfg = ActiveConfig(n_bootstrap=args.bootstrap, batch_k=args.batch,
                        rounds=args.rounds, seed=args.seed)
    strategies = ["active", "random"] if args.strategy == "both" else [args.strategy]
    jobs = [(corpus, acfg, strategy, gold, freq, _sampler(args), _weights(args),
             args.max_phrase_len, trial)
            for strategy in strategies for trial in range(args.trials)]
    results = _pool_map(_active_trial, jobs, args.workers)
    rows = []
    idx = 0
    for strategy in strategies:
        for trial in range(args.trials):
            for n, metrics in results[idx]:
                rows.append({"strategy": strategy, "trial": trial, "n_annotated": n, **metrics})
            idx += 1
    columns = list(rows[0])
    _write_rows(args.out, rows, columns)
    for strategy in strategies:
        finals = [r for r in rows if r["strategy"] == strategy]
        last = max(r["n_annotated"] for r in finals)
        metric = "weighted_recall" if gold is not None else "coverage_pct"
        vals = [r[metric] for r in finals if r["n_annotated"] == last]
        print(f"{strategy}: final {metric} mean {sum(vals) / len(vals):.3f} over {args.trials} trials")
    return 0


# -- small utilities ----------------------------------------------------------


def cmd_count_interp(args):
    print(count_interpretations(args.phrases, args.vertices))
    return 0


def cmd_lics(args):
    a = parse_term(args.term_a)
    b = parse_term(args.term_b)
    for forest in lics(a, b):
        print(render_term(forest))
    return 0


# -- wiring -------------------------------------------------------------------


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--workers", type=int, default=1)
    sub.add_argument("--config", default=None, help="key=value defaults file")


def _add_corpus_opts(sub):
    sub.add_argument("--corpus", required=True)
    sub.add_argument("--format", choices=["paired", "jsonl"], default="paired")
    sub.add_argument("--strip-answer", action="store_true")
    sub.add_argument("--background", default=None)
    sub.add_argument("--stoplist", default=None)
    sub.add_argument("--max-phrase-len", type=int, default=2)


def _add_learner_opts(sub):
    sub.add_argument("--candidate-mode", choices=["lics", "fracture"], default="lics")
    sub.add_argument("--pairs-per-phrase", type=int, default=20)
    sub.add_argument("--fracture-cap", type=int, default=100000)
    sub.add_argument("--w-fit", type=float, default=10.0)
    sub.add_argument("--w-gen", type=float, default=1.0)


def build_parser():
    parser = _Parser(prog="lexinduct", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("learn", help="induce a lexicon from a corpus")
    _add_common(p)
    _add_corpus_opts(p)
    _add_learner_opts(p)
    p.add_argument("--out-lexicon", required=True)
    p.add_argument("--out-trace", default=None)
    p.add_argument("--out-stats", default=None)
    p.set_defaults(func=cmd_learn)

    p = subs.add_parser("gen", help="generate a gold lexicon and corpus")
    _add_common(p)
    p.add_argument("--n-words", type=int, default=100)
    p.add_argument("--n-symbols", type=int, default=25)
    p.add_argument("--ambiguity", type=float, default=1.0)
    p.add_argument("--synonymy", type=float, default=1.0)
    p.add_argument("--noun-frac", type=float, default=0.475)
    p.add_argument("--verb-frac", type=float, default=0.475)
    p.add_argument("--empty-frac", type=float, default=0.05)
    p.add_argument("--max-depth", type=int, default=2)
    p.add_argument("--max-arity", type=int, default=2)
    p.add_argument("--max-vars", type=int, default=3)
    p.add_argument("--zipf-exponent", type=float, default=1.0)
    p.add_argument("--n-examples", type=int, default=1949)
    p.add_argument("--format", choices=["paired", "jsonl"], default="paired")
    p.add_argument("--out-corpus", required=True)
    p.add_argument("--out-gold", required=True)
    p.add_argument("--out-freq", required=True)
    p.add_argument("--out-stats", default=None)
    p.set_defaults(func=cmd_gen)

    p = subs.add_parser("eval", help="score a learned lexicon against gold")
    _add_common(p)
    p.add_argument("--learned", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--freq", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("curve", help="learning curves over training sizes")
    _add_common(p)
    _add_corpus_opts(p)
    _add_learner_opts(p)
    p.add_argument("--gold", required=True)
    p.add_argument("--freq", default=None)
    p.add_argument("--sizes", required=True, help="comma-separated training sizes")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curve)

    p = subs.add_parser("active", help="selective sampling vs random baseline")
    _add_common(p)
    _add_corpus_opts(p)
    _add_learner_opts(p)
    p.add_argument("--gold", default=None)
    p.add_argument("--freq", default=None)
    p.add_argument("--strategy", choices=["active", "random", "both"], default="both")
    p.add_argument("--bootstrap", type=int, default=25)
    p.add_argument("--batch", type=int, default=10)
    p.add_argument("--rounds", type=int, default=10)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_active)

    p = subs.add_parser("count-interp", help="number of interpretation functions")
    p.add_argument("phrases", type=int)
    p.add_argument("vertices", type=int)
    p.set_defaults(func=cmd_count_interp)

    p = subs.add_parser("lics", help="largest isomorphic common sub-forests of two terms")
    p.add_argument("term_a")
    p.add_argument("term_b")
    p.set_defaults(func=cmd_lics)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            values = _read_config(args.config)
            for sub in parser._subparsers._group_actions[0].choices.values():
                sub.set_defaults(**_coerce(sub, values))
            args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (TermError, CorpusError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
