"""Scoring of propagated links, annotator agreement, and corpus diffs."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial

from .conllu import Sentence
from .graph import Edge, basic_edges, coarse, enhanced_edges, propagated_links


class AlignmentError(ValueError):
    pass


def align_corpora(a: list[Sentence], b: list[Sentence]):
    """Pair up sentences by sent_id when available, else by position.

    Token counts must match per pair; mismatched or duplicated ids raise
    AlignmentError naming the offenders.
    """
    a_ids = [s.sent_id for s in a]
    b_ids = [s.sent_id for s in b]
    if all(i is not None for i in a_ids) and all(i is not None for i in b_ids):
        if len(set(a_ids)) != len(a_ids) or len(set(b_ids)) != len(b_ids):
            raise AlignmentError("duplicate sent_id values")
        only_a = [i for i in a_ids if i not in set(b_ids)]
        only_b = [i for i in b_ids if i not in set(a_ids)]
        if only_a or only_b:
            raise AlignmentError(
                f"sentence ids do not match: only in first={only_a[:10]}, "
                f"only in second={only_b[:10]}")
        b_map = {s.sent_id: s for s in b}
        pairs = [(i, s, b_map[i]) for i, s in zip(a_ids, a)]
    else:
        if len(a) != len(b):
            raise AlignmentError(
                f"corpora differ in length ({len(a)} vs {len(b)}) and lack sent_id")
        pairs = [(str(k), x, y) for k, (x, y) in enumerate(zip(a, b))]
    for key, x, y in pairs:
        if len(x.tokens) != len(y.tokens):
            raise AlignmentError(
                f"sentence {key}: token count differs "
                f"({len(x.tokens)} vs {len(y.tokens)})")
    return pairs


@dataclass
class LabelScore:
    tp: int = 0
    n_sys: int = 0
    n_gold: int = 0

    @property
    def precision(self) -> float:
        return self.tp / self.n_sys if self.n_sys else 0.0

    @property
    def recall(self) -> float:
        return self.tp / self.n_gold if self.n_gold else 0.0

    @property
    def f1(self) -> float:
        denom = self.n_sys + self.n_gold
        return 2 * self.tp / denom if denom else 0.0


@dataclass
class EvalReport:
    overall: LabelScore
    per_label: dict[str, LabelScore]
    coarse: dict[str, LabelScore]


def _map_sentences(fn, sentences: list[Sentence], jobs: int) -> list:
    """Applies fn per sentence, optionally in a process pool, keeping order."""
    if jobs > 1 and len(sentences) > 1:
        from multiprocessing import Pool
        with Pool(jobs) as pool:
            return pool.map(fn, sentences)
    return [fn(s) for s in sentences]


def _keyed_links(corpus_pairs, side: int, jobs: int = 1) -> set:
    sents = [pair[1 + side] for pair in corpus_pairs]
    link_sets = _map_sentences(propagated_links, sents, jobs)
    return {(pair[0], e)
            for pair, links in zip(corpus_pairs, link_sets) for e in links}


def score(system: list[Sentence], gold: list[Sentence],
          keep_subtypes: frozenset[str] = frozenset(),
          jobs: int = 1) -> EvalReport:
    """Precision/recall/F1 over the union of per-sentence propagated links.

    keep_subtypes lists full labels kept apart in the coarse rollup; every
    other label collapses to its coarse form there.  jobs > 1 builds the
    per-sentence link sets in a process pool; the merge is a set union, so
    the report does not depend on scheduling.
    """
    pairs = align_corpora(system, gold)
    sys_links = _keyed_links(pairs, 0, jobs)
    gold_links = _keyed_links(pairs, 1, jobs)

    def rollup(label: str) -> str:
        return label if label in keep_subtypes else coarse(label)

    overall = LabelScore()
    per_label: dict[str, LabelScore] = {}
    coarse_scores: dict[str, LabelScore] = {}
    for link in sys_links:
        label = link[1].label
        hit = link in gold_links
        for bucket in (overall,
                       per_label.setdefault(label, LabelScore()),
                       coarse_scores.setdefault(rollup(label), LabelScore())):
            bucket.n_sys += 1
            bucket.tp += 1 if hit else 0
    for link in gold_links:
        label = link[1].label
        overall.n_gold += 1
        per_label.setdefault(label, LabelScore()).n_gold += 1
        coarse_scores.setdefault(rollup(label), LabelScore()).n_gold += 1
    return EvalReport(overall=overall,
                      per_label=dict(sorted(per_label.items())),
                      coarse=dict(sorted(coarse_scores.items())))


@dataclass
class AgreementReport:
    names: list[str]
    # (gold_name, system_name) -> EvalReport
    pairwise: dict[tuple[str, str], EvalReport]

    def precision_matrix(self) -> list[list[float | None]]:
        """Cell [i][j] = precision of corpus j against corpus i as gold."""
        out = []
        for gname in self.names:
            row = []
            for sname in self.names:
                if gname == sname:
                    row.append(None)
                else:
                    row.append(self.pairwise[(gname, sname)].overall.precision)
            out.append(row)
        return out


def agreement_matrix(corpora: list[list[Sentence]],
                     names: list[str] | None = None,
                     jobs: int = 1) -> AgreementReport:
    """Pairwise scores over two or more corpora of the same sentences."""
    if len(corpora) < 2:
        raise ValueError("agreement needs at least two corpora")
    if names is None:
        names = [f"corpus{i+1}" for i in range(len(corpora))]
    if len(names) != len(corpora):
        raise ValueError("one name per corpus required")
    pairwise = {}
    for gi, gold in enumerate(corpora):
        for si, system in enumerate(corpora):
            if gi == si:
                continue
            pairwise[(names[gi], names[si])] = score(system, gold, jobs=jobs)
    return AgreementReport(names=list(names), pairwise=pairwise)


@dataclass
class LabelDiff:
    added: int = 0
    removed: int = 0
    sentences: int = 0
    total: int = 0


@dataclass
class DiffReport:
    scope: str
    per_label: dict[str, LabelDiff]
    added: int = 0
    removed: int = 0
    sentences: int = 0
    total: int = 0


def _scoped_edges(sent: Sentence, scope: str) -> set[Edge]:
    if scope == "conjunct":
        return propagated_links(sent)
    if scope == "all":
        return basic_edges(sent) | enhanced_edges(sent)
    raise ValueError(f"unknown diff scope {scope!r}")


def diff_stats(original: list[Sentence], edited: list[Sentence],
               scope: str = "conjunct", jobs: int = 1) -> DiffReport:
    """Added/removed edge counts per label between two corpus versions.

    Scope "conjunct" compares propagated-link sets; "all" compares the union
    of basic and enhanced triples, so a basic fix mirrored in DEPS counts once.
    The total column reports occurrences of the label in the original corpus
    within the same scope.
    """
    pairs = align_corpora(original, edited)
    scoped = partial(_scoped_edges, scope=scope)
    before_sets = _map_sentences(scoped, [p[1] for p in pairs], jobs)
    after_sets = _map_sentences(scoped, [p[2] for p in pairs], jobs)
    report = DiffReport(scope=scope, per_label={})
    for before, after in zip(before_sets, after_sets):
        touched: set[str] = set()
        for e in after - before:
            d = report.per_label.setdefault(e.label, LabelDiff())
            d.added += 1
            report.added += 1
            touched.add(e.label)
        for e in before - after:
            d = report.per_label.setdefault(e.label, LabelDiff())
            d.removed += 1
            report.removed += 1
            touched.add(e.label)
        for e in before:
            report.per_label.setdefault(e.label, LabelDiff()).total += 1
            report.total += 1
        for label in touched:
            report.per_label[label].sentences += 1
        if touched:
            report.sentences += 1
    report.per_label = dict(sorted(report.per_label.items()))
    return report


# ---------------------------------------------------------------- rendering

def _pct(x: float) -> str:
    return f"{100 * x:.1f}"


def format_score_table(report: EvalReport, view: str = "full") -> str:
    rows = report.per_label if view == "full" else report.coarse
    header = f"{'label':<24} {'tp':>6} {'sys':>6} {'gold':>6} {'P':>6} {'R':>6} {'F1':>6}"
    lines = [header]
    for label, sc in rows.items():
        lines.append(f"{label:<24} {sc.tp:>6} {sc.n_sys:>6} {sc.n_gold:>6} "
                     f"{_pct(sc.precision):>6} {_pct(sc.recall):>6} {_pct(sc.f1):>6}")
    sc = report.overall
    lines.append(f"{'total':<24} {sc.tp:>6} {sc.n_sys:>6} {sc.n_gold:>6} "
                 f"{_pct(sc.precision):>6} {_pct(sc.recall):>6} {_pct(sc.f1):>6}")
    return "\n".join(lines)


def format_score_records(report: EvalReport) -> str:
    lines = []
    for label, sc in list(report.per_label.items()) + [("total", report.overall)]:
        lines.append("\t".join((label, str(sc.tp), str(sc.n_sys), str(sc.n_gold),
                                _pct(sc.precision), _pct(sc.recall), _pct(sc.f1))))
    return "\n".join(lines)


def format_pair_table(report: EvalReport) -> str:
    """Per-label table in agreement-study layout: sys and gold counts first."""
    header = f"{'label':<24} {'sys':>6} {'gold':>6} {'tp':>6} {'P':>6} {'R':>6} {'F1':>6}"
    lines = [header]
    for label, sc in list(report.per_label.items()) + [("total", report.overall)]:
        lines.append(f"{label:<24} {sc.n_sys:>6} {sc.n_gold:>6} {sc.tp:>6} "
                     f"{_pct(sc.precision):>6} {_pct(sc.recall):>6} {_pct(sc.f1):>6}")
    return "\n".join(lines)


def format_diff_table(report: DiffReport) -> str:
    header = f"{'label':<24} {'added':>7} {'removed':>8} {'sents':>7} {'total':>8}"
    lines = [header]
    for label, d in report.per_label.items():
        lines.append(f"{label:<24} {d.added:>7} {d.removed:>8} {d.sentences:>7} {d.total:>8}")
    lines.append(f"{'total':<24} {report.added:>7} {report.removed:>8} "
                 f"{report.sentences:>7} {report.total:>8}")
    return "\n".join(lines)


def format_diff_records(report: DiffReport) -> str:
    lines = []
    for label, d in report.per_label.items():
        lines.append("\t".join((label, str(d.added), str(d.removed),
                                str(d.sentences), str(d.total))))
    lines.append("\t".join(("total", str(report.added), str(report.removed),
                            str(report.sentences), str(report.total))))
    return "\n".join(lines)


def format_agreement(report: AgreementReport) -> str:
    lines = []
    width = max(8, *(len(n) for n in report.names)) + 2
    head = " " * width + "".join(f"{n:>{width}}" for n in report.names)
    lines.append("precision of column corpus against row corpus as gold")
    lines.append(head)
    matrix = report.precision_matrix()
    for name, row in zip(report.names, matrix):
        cells = "".join(f"{'-' if v is None else _pct(v):>{width}}" for v in row)
        lines.append(f"{name:<{width}}{cells}")
    for (gname, sname), rep in report.pairwise.items():
        sc = rep.overall
        lines.append("")
        lines.append(f"system={sname} gold={gname}: "
                     f"links {sc.n_sys}/{sc.n_gold} overlap {sc.tp} "
                     f"P {_pct(sc.precision)} R {_pct(sc.recall)} F1 {_pct(sc.f1)}")
        lines.append(format_pair_table(rep))
    return "\n".join(lines)
