"""Command-line interface: ``sandhiseg {train,segment,eval,inspect,toy}``.

Exit status is 0 on success, 2 for configuration or usage errors and 3 for
unusable input data.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .attention import AttentionDump, write_dump
from .checkpoint import Checkpoint
from .config import load_config
from .errors import ConfigError, SegError
from .metrics import DEFAULT_RULES, format_rule_table, format_table, read_rules, report_key_values
from .pipeline import (ABLATIONS, Segmenter, ablated_config, ablated_segmenter,
                       builder_for, evaluate, train)
from .symbols import SentenceRecord, normalize, read_candidates, read_corpus, write_candidates, write_corpus

log = logging.getLogger("sandhiseg")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3


class UsageError(SegError):
    pass


def _builder(cfg, candidates_path):
    candidates = read_candidates(candidates_path) if candidates_path else None
    if candidates is None and cfg.lattice.startswith("candidates"):
        try:
            candidates = read_candidates(cfg.candidates)
        except OSError:
            log.warning("candidates file %s not found, using n-grams", cfg.candidates)
            candidates = {}
    if cfg.lattice == "vocab" and not Path(cfg.vocab_file).exists():
        raise ConfigError(f"vocab file {cfg.vocab_file} not found")
    return builder_for(cfg, candidates=candidates if candidates is not None else {})


def _segmenter(ckpt: Checkpoint, args) -> Segmenter:
    cfg = ckpt.config
    if getattr(args, "prcp", None):
        cfg = cfg.replace(prcp=args.prcp)
    return Segmenter(ckpt.model, ckpt.charlm, cfg, _builder(cfg, args.candidates))


def cmd_train(args) -> int:
    overrides = list(args.set or [])
    if args.candidates:
        overrides.append(f"candidates={args.candidates}")
    cfg = load_config(args.config, overrides)
    records = read_corpus(args.corpus)
    missing = [r.id for r in records if r.gold is None]
    if missing:
        raise UsageError(f"{args.corpus}: no gold column for {len(missing)} sentences (first: {missing[0]})")
    dev = read_corpus(args.dev) if args.dev else ()
    result = train(records, cfg, _builder(cfg, args.candidates), dev=dev)
    Checkpoint(result.config, result.model, result.charlm).save(args.out)
    log.info("wrote %s", args.out)
    return EXIT_OK


def cmd_segment(args) -> int:
    ckpt = Checkpoint.load(args.checkpoint)
    seg = _segmenter(ckpt, args)
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    plog = open(args.prcp_log, "w", encoding="utf-8") if args.prcp_log else None
    try:
        for rec in read_corpus(args.input):
            res = seg.segment(rec)
            out.write(f"{rec.id}\t{rec.source.text}\t{res.text}\n")
            for entry in res.prcp:
                if entry["changed"]:
                    log.info("%s: chunk %d %r -> %r", rec.id, entry["chunk"], entry["predicted"],
                             entry["chosen"])
                if plog is not None:
                    plog.write(json.dumps({"id": rec.id, **entry}, ensure_ascii=False) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
        if plog is not None:
            plog.close()
    return EXIT_OK


def cmd_eval(args) -> int:
    ckpt = Checkpoint.load(args.checkpoint)
    seg = _segmenter(ckpt, args)
    records = read_corpus(args.corpus)
    rules = None
    if args.rules:
        rules = DEFAULT_RULES if args.rules == "default" else read_rules(args.rules)
    f_mode = args.f_mode or ckpt.config.f_mode
    full = evaluate(seg, records, rules, f_mode)
    rows = [("full", full.report)]
    train_records = read_corpus(args.train) if args.train else None
    for name in args.ablate or ():
        if train_records is not None and name != "no-PRCP":
            cfg = ablated_config(seg.cfg, name)
            res = train(train_records, cfg, _builder(cfg, args.candidates))
            aseg = Segmenter(res.model, res.charlm, res.config, _builder(res.config, args.candidates))
        else:
            if name != "no-PRCP":
                log.warning("%s applied at inference time; pass --train to retrain without the module", name)
            aseg = ablated_segmenter(seg, name)
        rows.append((name, evaluate(aseg, records, None, f_mode).report))
    print(format_table(rows))
    if rules:
        print()
        print(format_rule_table(full.report.rules))
    if args.report_kv:
        text = "".join(report_key_values(rep, "" if name == "full" else f"{name}.") for name, rep in rows)
        Path(args.report_kv).write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_inspect(args) -> int:
    ckpt = Checkpoint.load(args.checkpoint)
    seg = _segmenter(ckpt, args)
    if args.sentence:
        records = [SentenceRecord("s0", normalize(args.sentence))]
    else:
        records = read_corpus(args.input)
    dumps = []
    for rec in records:
        lattice = seg.builder.lattice(rec)
        enc = ckpt.model.forward(lattice, keep_attention=True)
        dumps.append(AttentionDump(rec.id, enc.nodes, enc.attention))
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as f:
            write_dump(f, dumps)
    else:
        write_dump(sys.stdout, dumps)
    return EXIT_OK


def cmd_toy(args) -> int:
    from .toy import make_toy_corpus

    data = make_toy_corpus(args.n, seed=args.seed, p_break=args.p_break, prefix=args.prefix)
    write_corpus(args.corpus, [d.record for d in data])
    if args.candidates:
        write_candidates(args.candidates, [d.candidates for d in data])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sandhiseg", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    p.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = p.add_subparsers(dest="command", required=True)

    def config_opts(sp):
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")

    t = sub.add_parser("train", help="train a model and write a checkpoint")
    t.add_argument("corpus")
    t.add_argument("-o", "--out", required=True)
    t.add_argument("--dev", help="dev corpus scored after every epoch")
    t.add_argument("--candidates", help="candidate record file")
    config_opts(t)
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("segment", help="segment sentences with a checkpoint")
    s.add_argument("checkpoint")
    s.add_argument("input")
    s.add_argument("-o", "--output")
    s.add_argument("--candidates")
    s.add_argument("--prcp", choices=("off", "raw", "prob"))
    s.add_argument("--prcp-log", help="JSON lines log of rectified chunks")
    s.set_defaults(func=cmd_segment)

    e = sub.add_parser("eval", help="score a checkpoint against gold segmentations")
    e.add_argument("checkpoint")
    e.add_argument("corpus")
    e.add_argument("--candidates")
    e.add_argument("--prcp", choices=("off", "raw", "prob"))
    e.add_argument("--ablate", nargs="+", choices=ABLATIONS, metavar="NAME",
                   help=f"also score with modules switched off: {', '.join(ABLATIONS)}")
    e.add_argument("--train", help="training corpus; ablations are retrained on it")
    e.add_argument("--rules", help="'default' or a rules file (name, surface, expansion)")
    e.add_argument("--f-mode", choices=("macro", "harmonic", "micro"))
    e.add_argument("--report-kv", help="write key=value report here")
    e.set_defaults(func=cmd_eval)

    i = sub.add_parser("inspect", help="dump attention matrices")
    i.add_argument("checkpoint")
    src = i.add_mutually_exclusive_group(required=True)
    src.add_argument("--sentence")
    src.add_argument("--input")
    i.add_argument("-o", "--output")
    i.add_argument("--candidates")
    i.set_defaults(func=cmd_inspect, prcp=None)

    g = sub.add_parser("toy", help="generate a synthetic corpus")
    g.add_argument("corpus")
    g.add_argument("--candidates")
    g.add_argument("-n", type=int, default=50)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--p-break", type=float, default=0.1)
    g.add_argument("--prefix", default="toy", help="sentence id prefix")
    g.set_defaults(func=cmd_toy)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SegError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
