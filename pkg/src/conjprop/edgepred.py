"""Biaffine edge prediction over provider-supplied embeddings.

Every ordered (head, dependent) token pair gets a score per label, with a
dedicated no-edge label; the root is an extra head position 0 with a
learned embedding.  Token vectors are a learned scalar mixture over the
provider's layers.  Training minimizes cross-entropy against the gold
enhanced graph; decoding writes the argmax graph into the deps columns,
guaranteeing every token at least one head via a fallback.

Edges touching empty nodes cannot be scored by the pair grid; they are
ignored during training and empty nodes keep their deps at decoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .conllu import ROOT, Sentence, TokenId
from .embeddings import EmbeddingProvider
from .labels import lexicalize_label
from .modelfile import load_model, save_model

NO_EDGE = "∅"


class EdgePredError(Exception):
    pass


@dataclass
class ParserTrainConfig:
    batch_size: int = 5
    lr: float = 5e-6
    betas: tuple[float, float] = (0.9, 0.999)
    weight_decay: float = 0.0
    token_mask_prob: float = 0.15
    layer_dropout: float = 0.1
    output_dropout: float = 0.5
    fnn_dropout: float = 0.33
    epochs: int = 10
    seed: int = 0


@dataclass
class EdgeParser:
    labels: list[str]
    layers: int
    dim: int
    hidden: int
    params: dict[str, Tensor] = field(default_factory=dict)

    @property
    def label_index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def parameters(self) -> list[Tensor]:
        return [self.params[k] for k in sorted(self.params)]

    def save(self, path) -> None:
        meta = {"labels": self.labels, "layers": self.layers,
                "dim": self.dim, "hidden": self.hidden}
        arrays = {name: t.data for name, t in self.params.items()}
        save_model(path, "edge-parser", meta, arrays)

    @classmethod
    def load(cls, path) -> "EdgeParser":
        kind, meta, arrays = load_model(path)
        if kind != "edge-parser":
            raise EdgePredError(f"{path}: not an edge parser (kind {kind!r})")
        parser = cls(labels=meta["labels"], layers=meta["layers"],
                     dim=meta["dim"], hidden=meta["hidden"])
        parser.params = {name: Tensor(arr, requires_grad=True)
                         for name, arr in arrays.items()}
        return parser


def build_label_inventory(corpus: list[Sentence]) -> list[str]:
    """Labels of all enhanced edges between regular tokens, the no-edge
    label first (index 0 wins argmax ties, so ties never invent edges)."""
    labels: set[str] = set()
    for sent in corpus:
        regular = {t.id for t in sent.words()}
        for t in sent.words():
            for head, label in t.deps:
                if head == ROOT or head in regular:
                    labels.add(label)
    return [NO_EDGE] + sorted(labels)


def new_parser(labels: list[str], layers: int, dim: int,
               hidden: int = 1024, seed: int = 0) -> EdgeParser:
    if labels[0] != NO_EDGE:
        raise ValueError("label inventory must start with the no-edge label")
    rng = np.random.default_rng(seed)
    n_labels = len(labels)

    def init(*shape):
        fan = shape[0] if len(shape) > 1 else 1
        return Tensor(rng.normal(0.0, 1.0 / np.sqrt(max(fan, 1)), shape),
                      requires_grad=True)

    params = {
        "mix_logits": Tensor(np.zeros(layers), requires_grad=True),
        "root_embed": init(dim),
        "w_head": init(dim, hidden), "b_head": Tensor(np.zeros(hidden),
                                                      requires_grad=True),
        "w_dep": init(dim, hidden), "b_dep": Tensor(np.zeros(hidden),
                                                    requires_grad=True),
        # the scoring layers start small so an untrained model scores every
        # pair close to the uniform label distribution
        "bilinear": Tensor(
            rng.normal(0.0, 0.1 / hidden, (n_labels, hidden, hidden)),
            requires_grad=True),
        "linear": Tensor(
            rng.normal(0.0, 0.1 / np.sqrt(2 * hidden),
                       (2 * hidden, n_labels)), requires_grad=True),
        "bias": Tensor(np.zeros(n_labels), requires_grad=True),
    }
    return EdgeParser(labels=labels, layers=layers, dim=dim, hidden=hidden,
                      params=params)


def _token_stacks(parser: EdgeParser, sent: Sentence,
                  provider: EmbeddingProvider, index: int = 0) -> np.ndarray:
    if provider.layers != parser.layers or provider.dim != parser.dim:
        raise EdgePredError(
            f"provider supplies {provider.layers} layers of dimension "
            f"{provider.dim}, model expects {parser.layers}x{parser.dim}")
    sid = sent.sent_id or str(index)
    stacks = [provider.lookup_layers(sid, t.id) for t in sent.words()]
    return np.stack(stacks)  # (n, layers, dim)


@dataclass
class _TrainContext:
    rng: np.random.Generator
    cfg: ParserTrainConfig


def _forward_scores(parser: EdgeParser, stacks: np.ndarray,
                    ctx: _TrainContext | None = None) -> Tensor:
    """Score tensor (n+1, n, |labels|) on the tape.

    With a training context, token masking and the three dropouts are
    applied; without one the pass is deterministic.
    """
    p = parser.params
    n = stacks.shape[0]
    hidden = parser.hidden

    mix_logits = p["mix_logits"]
    if ctx is not None and ctx.cfg.layer_dropout > 0 and parser.layers > 1:
        keep = ctx.rng.random(parser.layers) >= ctx.cfg.layer_dropout
        if not keep.any():
            keep[:] = True
        mix_logits = mix_logits + np.where(keep, 0.0, -1e30)
    weights = _softmax_tensor(mix_logits)

    if ctx is not None and ctx.cfg.token_mask_prob > 0:
        masked = ctx.rng.random(n) < ctx.cfg.token_mask_prob
        stacks = stacks * ~masked[:, None, None]

    tokens = ad.einsum("l,nld->nd", weights, Tensor(stacks))
    root = ad.reshape(p["root_embed"], (1, parser.dim))
    reps = ad.concat([root, tokens], axis=0)  # (n+1, dim)
    if ctx is not None:
        reps = _dropout(reps, ctx.cfg.output_dropout, ctx.rng)

    h_head = ad.relu(ad.einsum("nd,dh->nh", reps, p["w_head"]) + p["b_head"])
    h_dep_in = ad.getitem(reps, slice(1, None))
    h_dep = ad.relu(ad.einsum("nd,dh->nh", h_dep_in, p["w_dep"]) + p["b_dep"])
    if ctx is not None:
        h_head = _dropout(h_head, ctx.cfg.fnn_dropout, ctx.rng)
        h_dep = _dropout(h_dep, ctx.cfg.fnn_dropout, ctx.rng)

    part = ad.einsum("ih,lhk->lik", h_head, p["bilinear"])
    bil = ad.einsum("lik,jk->lij", part, h_dep)
    scores = ad.transpose(bil, (1, 2, 0))  # (n+1, n, labels)
    lin_head = ad.einsum("ih,hl->il", h_head,
                         ad.getitem(p["linear"], slice(0, hidden)))
    lin_dep = ad.einsum("jh,hl->jl", h_dep,
                        ad.getitem(p["linear"], slice(hidden, None)))
    n_labels = len(parser.labels)
    scores = scores + ad.reshape(lin_head, (n + 1, 1, n_labels))
    scores = scores + ad.reshape(lin_dep, (1, n, n_labels))
    return scores + p["bias"]


def _softmax_tensor(logits: Tensor) -> Tensor:
    return _exp(ad.log_softmax(logits, axis=-1))


def _exp(t: Tensor) -> Tensor:
    data = np.exp(t.data)

    def backward(g):
        t.grad += g * data

    out = Tensor(data)
    if t.requires_grad:
        out.requires_grad = True
        out._parents = (t,)
        out._backward = backward
    return out


def _dropout(t: Tensor, prob: float, rng: np.random.Generator) -> Tensor:
    if prob <= 0:
        return t
    mask = (rng.random(t.data.shape) >= prob) / (1.0 - prob)
    return ad.mul(t, mask)


def mixture_weights(parser: EdgeParser) -> np.ndarray:
    """Inference-time layer weights; always sums to 1."""
    logits = parser.params["mix_logits"].data
    e = np.exp(logits - logits.max())
    return e / e.sum()


def score_pairs(parser: EdgeParser, sent: Sentence,
                provider: EmbeddingProvider, index: int = 0) -> np.ndarray:
    """Label probabilities, shape (n+1, n, |labels|); rows sum to 1."""
    stacks = _token_stacks(parser, sent, provider, index)
    scores = _forward_scores(parser, stacks)
    return ad.softmax(scores.data, axis=-1)


def _gold_grid(parser: EdgeParser, sent: Sentence) -> np.ndarray:
    """Gold label index per (head, dep) pair; no-edge where no gold edge.

    Position 0 is root; only regular tokens take part.  Edges whose label
    is missing from the inventory are an error; edges touching empty nodes
    are skipped.  Where a pair carries several gold edges the label that
    sorts first wins.
    """
    words = sent.words()
    position = {t.id: i + 1 for i, t in enumerate(words)}
    position[ROOT] = 0
    n = len(words)
    grid = np.zeros((n + 1, n), dtype=np.int64)
    index = parser.label_index
    for j, tok in enumerate(words):
        for head, label in tok.deps:
            if head not in position:
                continue
            if label not in index:
                raise EdgePredError(
                    f"label {label!r} in sentence {sent.sent_id!r} is not "
                    "in the model inventory")
            i = position[head]
            if grid[i, j] == 0:
                grid[i, j] = index[label]
    return grid


def sentence_loss(parser: EdgeParser, sent: Sentence,
                  provider: EmbeddingProvider, index: int = 0,
                  ctx: _TrainContext | None = None) -> Tensor:
    """Mean cross-entropy over all (n+1) x n ordered pairs."""
    stacks = _token_stacks(parser, sent, provider, index)
    scores = _forward_scores(parser, stacks, ctx)
    grid = _gold_grid(parser, sent)
    n_plus, n = grid.shape
    onehot = np.zeros((n_plus, n, len(parser.labels)))
    heads, deps = np.indices(grid.shape)
    onehot[heads, deps, grid] = 1.0
    log_probs = ad.log_softmax(scores, axis=-1)
    return ad.mul(ad.tsum(ad.mul(log_probs, onehot)), -1.0 / (n_plus * n))


def train_epoch(parser: EdgeParser, corpus: list[Sentence],
                provider: EmbeddingProvider, cfg: ParserTrainConfig,
                optimizer: ad.AdamW | None = None,
                rng: np.random.Generator | None = None) -> float:
    """One pass of shuffled mini-batch updates; returns the mean loss."""
    if optimizer is None:
        optimizer = ad.AdamW(parser.parameters(), lr=cfg.lr, betas=cfg.betas,
                             weight_decay=cfg.weight_decay)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    ctx = _TrainContext(rng=rng, cfg=cfg)
    order = rng.permutation(len(corpus))
    total = 0.0
    for start in range(0, len(order), cfg.batch_size):
        batch = order[start:start + cfg.batch_size]
        optimizer.zero_grad()
        for idx in batch:
            loss = sentence_loss(parser, corpus[idx], provider, int(idx), ctx)
            total += float(loss.data)
            loss.backward(np.array(1.0 / len(batch)))
        optimizer.step()
    return total / max(len(corpus), 1)


def decode_scores(probs: np.ndarray, labels: list[str]
                  ) -> list[list[tuple[int, str]]]:
    """Edges per dependent from a probability tensor.

    Argmax per pair, no-edge omitted; a dependent left headless receives
    its best non-no-edge (head, label), ties broken by lowest label index
    and then lowest head position.  Returns, per dependent j, a list of
    (head position, label), head position 0 meaning root.
    """
    n_plus, n, n_labels = probs.shape
    best = probs.argmax(axis=-1)
    edges: list[list[tuple[int, str]]] = []
    for j in range(n):
        found = [(i, labels[best[i, j]])
                 for i in range(n_plus) if best[i, j] != 0]
        if not found:
            block = probs[:, j, 1:].T  # (labels-1, n+1): label-major argmax
            flat = int(block.argmax())
            label_idx, head = divmod(flat, n_plus)
            found = [(head, labels[label_idx + 1])]
        edges.append(found)
    return edges


def decode(parser: EdgeParser, sent: Sentence, provider: EmbeddingProvider,
           index: int = 0) -> Sentence:
    """Writes the predicted graph into a copy's deps columns."""
    probs = score_pairs(parser, sent, provider, index)
    out = sent.clone()
    words = out.words()
    ids = [t.id for t in words]
    for j, per_dep in enumerate(decode_scores(probs, parser.labels)):
        deps = []
        for head_pos, label in per_dep:
            head = ROOT if head_pos == 0 else ids[head_pos - 1]
            label = lexicalize_label(label, ids[j], out)
            deps.append((head, label))
        words[j].deps = sorted(set(deps))
    return out
