"""Word-level P/R/F and perfect match, plus character-level rule scores."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

F_MODES = ("macro", "harmonic", "micro")


@dataclass(frozen=True)
class SentenceEval:
    P: float
    R: float
    F: float
    exact: bool
    matched: int = 0
    n_pred: int = 0
    n_gold: int = 0


def _harmonic(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def eval_sentence(pred: Sequence[str], gold: Sequence[str]) -> SentenceEval:
    # multiset intersection: a repeated word only counts as often as it is in both
    m = sum((Counter(pred) & Counter(gold)).values())
    p = m / len(pred) if pred else 0.0
    r = m / len(gold) if gold else 0.0
    return SentenceEval(p, r, _harmonic(p, r), list(pred) == list(gold), m, len(pred), len(gold))


@dataclass
class EvalReport:
    sentences: list[SentenceEval]
    P: float
    R: float
    F: float
    PM: float
    f_mode: str = "macro"
    rules: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.sentences)


def eval_corpus(results: Sequence[SentenceEval], f_mode: str = "macro") -> EvalReport:
    """Aggregate sentence scores; all corpus values are percentages.

    ``macro`` averages per-sentence F, ``harmonic`` takes the harmonic mean
    of macro P and R, ``micro`` pools match counts over the corpus.
    """
    if not results:
        raise ValueError("no sentences to evaluate")
    if f_mode not in F_MODES:
        raise ValueError(f"f_mode must be one of {F_MODES}")
    n = len(results)
    if f_mode == "micro":
        m = sum(s.matched for s in results)
        npred = sum(s.n_pred for s in results)
        ngold = sum(s.n_gold for s in results)
        p = m / npred if npred else 0.0
        r = m / ngold if ngold else 0.0
        f = _harmonic(p, r)
    else:
        p = sum(s.P for s in results) / n
        r = sum(s.R for s in results) / n
        f = sum(s.F for s in results) / n if f_mode == "macro" else _harmonic(p, r)
    pm = 100.0 * sum(s.exact for s in results) / n
    return EvalReport(list(results), 100 * p, 100 * r, 100 * f, pm, f_mode)


@dataclass(frozen=True)
class Rule:
    name: str
    surface: str
    expansion: str


# surface ā realized by five different juncture analyses
DEFAULT_RULES = (
    Rule("ā", "ā", "ā"),
    Rule("a-a", "ā", "a_a"),
    Rule("ā-a", "ā", "ā_a"),
    Rule("āḥ", "ā", "āḥ"),
    Rule("ā-ā", "ā", "ā_ā"),
)


@dataclass(frozen=True)
class RuleScore:
    P: float
    R: float
    F: float
    n_gold: int
    n_pred: int
    n_both: int

    @property
    def note(self) -> str:
        return "no predictions" if self.n_pred == 0 else ""


def rule_locations(sources, labels, rule: Rule) -> set[tuple[int, int]]:
    out = set()
    for s, (src, labs) in enumerate(zip(sources, labels)):
        for i, (sym, lab) in enumerate(zip(src, labs)):
            if sym == rule.surface and lab == rule.expansion:
                out.add((s, i))
    return out


def rule_prf(sources, gold_labels, pred_labels, rule: Rule) -> RuleScore:
    """Score one rule over aligned label sequences (sentence-major lists)."""
    sg = rule_locations(sources, gold_labels, rule)
    sp = rule_locations(sources, pred_labels, rule)
    both = len(sg & sp)
    p = both / len(sp) if sp else 0.0
    r = both / len(sg) if sg else 0.0
    return RuleScore(p, r, _harmonic(p, r), len(sg), len(sp), both)


def read_rules(path: str | Path) -> list[Rule]:
    """Rules file: ``name<TAB>surface<TAB>expansion`` per line, ``#`` comments."""
    rules = []
    for no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{no}: expected name<TAB>surface<TAB>expansion")
        rules.append(Rule(*(p.strip() for p in parts)))
    return rules


def format_table(rows: Sequence[tuple[str, EvalReport]]) -> str:
    width = max([5] + [len(name) for name, _ in rows])
    lines = [f"{'Model':<{width}}  {'P':>6}  {'R':>6}  {'F':>6}  {'PM':>6}"]
    for name, rep in rows:
        lines.append(f"{name:<{width}}  {rep.P:6.2f}  {rep.R:6.2f}  {rep.F:6.2f}  {rep.PM:6.2f}")
    return "\n".join(lines)


def format_rule_table(scores: dict[str, RuleScore]) -> str:
    width = max([5] + [len(k) for k in scores])
    lines = [f"{'Rule':<{width}}  {'P':>6}  {'R':>6}  {'F':>6}  {'gold':>5}  {'pred':>5}"]
    for name, s in scores.items():
        line = (f"{name:<{width}}  {100 * s.P:6.2f}  {100 * s.R:6.2f}  {100 * s.F:6.2f}"
                f"  {s.n_gold:5d}  {s.n_pred:5d}")
        if s.note:
            line += f"  ({s.note})"
        lines.append(line)
    return "\n".join(lines)


def report_key_values(report: EvalReport, prefix: str = "") -> str:
    pairs = [("sentences", report.n), ("P", f"{report.P:.4f}"), ("R", f"{report.R:.4f}"),
             ("F", f"{report.F:.4f}"), ("PM", f"{report.PM:.4f}"), ("f_mode", report.f_mode)]
    for name, s in report.rules.items():
        pairs += [(f"rule.{name}.P", f"{100 * s.P:.4f}"), (f"rule.{name}.R", f"{100 * s.R:.4f}"),
                  (f"rule.{name}.F", f"{100 * s.F:.4f}"), (f"rule.{name}.n_pred", s.n_pred),
                  (f"rule.{name}.n_gold", s.n_gold)]
    return "".join(f"{prefix}{k}={v}\n" for k, v in pairs)
