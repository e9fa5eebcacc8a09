"""Binary propagation classifier: training, application, persistence.

Two model kinds share one feature pipeline: a degree-2 polynomial kernel
SVM and a two-hidden-layer perceptron (widths 1500 and 500 by default)
trained with AdamW at batch size 1 and macro-F1 early stopping on a 10%
holdout.  Positive decisions materialize enhanced edges at the conjunct.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .conllu import Sentence
from .converter import ConverterConfig, SUBJECT_LABELS, _subject_label, \
    _needs_seed, seed_enhanced
from .graph import add_dep, coarse, has_child_with_label
from .instances import (
    FeatureConfig, InstanceConfig, PropagationInstance, default_feature_config,
    build_vocabulary, extract_instances, featurize, vectorize,
)
from .modelfile import load_model, save_model
from .svm import SVMModel, TrainingError, train_svm


class ApplyError(Exception):
    """Model and inputs disagree (missing provider, wrong vector width)."""


@dataclass
class PropTrainOptions:
    c: float = 1.0
    tol: float = 1e-3
    class_weights: bool = False
    epochs: int = 50
    lr: float = 5e-5
    patience: int = 5
    holdout: float = 0.1
    hidden_sizes: tuple[int, int] = (1500, 500)
    seed: int = 0


@dataclass(frozen=True)
class ApplyConfig:
    passive_imperative_fix: bool = False
    iterate_to_fixpoint: bool = False
    instance_config: InstanceConfig = InstanceConfig()


@dataclass
class PropModel:
    kind: str
    vocab: dict[str, int]
    dense_dim: int
    feature_config: FeatureConfig
    svm: SVMModel | None = None
    mlp: dict[str, np.ndarray] | None = None
    instance_config: InstanceConfig = InstanceConfig()

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if self.kind == "kernel":
            return self.svm.decision_function(x)
        logits = _mlp_forward(self.mlp, x)
        return logits[:, 1] - logits[:, 0]

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.decision_function(x) >= 0.0

    def save(self, path) -> None:
        meta = {
            "vocab": self.vocab,
            "dense_dim": self.dense_dim,
            "features": {
                "token_features": self.feature_config.token_features,
                "tree_features": self.feature_config.tree_features,
                "morphology": self.feature_config.morphology,
                "dense_tokens": self.feature_config.dense_tokens,
                "count_scalar": self.feature_config.count_scalar,
            },
            "outgoing_exclusions":
                sorted(self.instance_config.outgoing_exclusions),
        }
        if self.kind == "kernel":
            arrays = {"support_vectors": self.svm.support_vectors,
                      "dual_coef": self.svm.dual_coef,
                      "bias": np.array([self.svm.bias])}
        else:
            arrays = dict(self.mlp)
        save_model(path, self.kind, meta, arrays)

    @classmethod
    def load(cls, path) -> "PropModel":
        kind, meta, arrays = load_model(path)
        if kind not in ("kernel", "mlp"):
            raise ApplyError(f"{path}: not a propagation model (kind {kind!r})")
        fc = FeatureConfig(**meta["features"])
        ic = InstanceConfig(frozenset(meta["outgoing_exclusions"]))
        model = cls(kind=kind, vocab=meta["vocab"],
                    dense_dim=meta["dense_dim"], feature_config=fc,
                    instance_config=ic)
        if kind == "kernel":
            model.svm = SVMModel(support_vectors=arrays["support_vectors"],
                                 dual_coef=arrays["dual_coef"],
                                 bias=float(arrays["bias"][0]))
        else:
            model.mlp = arrays
        return model


def _mlp_forward(params: dict[str, np.ndarray], x: np.ndarray) -> np.ndarray:
    h = np.maximum(x @ params["w1"] + params["b1"], 0.0)
    h = np.maximum(h @ params["w2"] + params["b2"], 0.0)
    return h @ params["w3"] + params["b3"]


def _macro_f1(pred: np.ndarray, gold: np.ndarray) -> float:
    total = 0.0
    for cls in (False, True):
        tp = float(np.sum((pred == cls) & (gold == cls)))
        n_pred = float(np.sum(pred == cls))
        n_gold = float(np.sum(gold == cls))
        if n_pred + n_gold > 0:
            total += 2.0 * tp / (n_pred + n_gold)
    return total / 2.0


def _init_mlp(in_dim: int, hidden: tuple[int, int],
              rng: np.random.Generator) -> dict[str, np.ndarray]:
    h1, h2 = hidden
    def layer(fan_in, fan_out):
        scale = np.sqrt(2.0 / fan_in)
        return rng.normal(0.0, scale, size=(fan_in, fan_out))
    return {"w1": layer(in_dim, h1), "b1": np.zeros(h1),
            "w2": layer(h1, h2), "b2": np.zeros(h2),
            "w3": layer(h2, 2), "b3": np.zeros(2)}


def mlp_loss(params: dict[str, ad.Tensor], x: np.ndarray,
             target: int, weight: float = 1.0) -> ad.Tensor:
    """Cross-entropy of one instance; params are tape tensors."""
    xs = ad.Tensor(x.reshape(1, -1))
    h = ad.relu(ad.einsum("bi,ij->bj", xs, params["w1"]) + params["b1"])
    h = ad.relu(ad.einsum("bi,ij->bj", h, params["w2"]) + params["b2"])
    logits = ad.einsum("bi,ij->bj", h, params["w3"]) + params["b3"]
    log_probs = ad.log_softmax(logits, axis=-1)
    onehot = np.zeros((1, 2))
    onehot[0, target] = 1.0
    return ad.mul(ad.tsum(ad.mul(log_probs, onehot)), -weight)


def _train_mlp(x: np.ndarray, y: np.ndarray,
               opts: PropTrainOptions) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(opts.seed)
    n = x.shape[0]
    order = rng.permutation(n)
    n_holdout = int(round(opts.holdout * n)) if n >= 10 else 0
    holdout_idx = order[:n_holdout]
    train_idx = order[n_holdout:]

    params = {name: ad.Tensor(arr, requires_grad=True)
              for name, arr in _init_mlp(x.shape[1], opts.hidden_sizes,
                                         rng).items()}
    optimizer = ad.AdamW([params[k] for k in sorted(params)], lr=opts.lr,
                         betas=(0.9, 0.999), weight_decay=0.0)
    weights = {True: 1.0, False: 1.0}
    if opts.class_weights:
        pos = max(int(y.sum()), 1)
        neg = max(int((~y).sum()), 1)
        weights = {True: n / (2.0 * pos), False: n / (2.0 * neg)}

    best = {k: t.data.copy() for k, t in params.items()}
    best_f1 = -1.0
    patience_left = opts.patience
    for _ in range(opts.epochs):
        for i in rng.permutation(len(train_idx)):
            idx = train_idx[i]
            loss = mlp_loss(params, x[idx], int(y[idx]),
                            weights[bool(y[idx])])
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
        if n_holdout == 0:
            continue
        snapshot = {k: t.data for k, t in params.items()}
        pred = _mlp_forward(snapshot, x[holdout_idx])
        f1 = _macro_f1(pred[:, 1] >= pred[:, 0], y[holdout_idx])
        if f1 > best_f1:
            best_f1 = f1
            best = {k: t.data.copy() for k, t in params.items()}
            patience_left = opts.patience
        else:
            patience_left -= 1
            if patience_left <= 0:
                break
    if n_holdout == 0:
        best = {k: t.data.copy() for k, t in params.items()}
    return best


def corpus_instances(corpus: list[Sentence], with_gold: bool = True,
                     config: InstanceConfig = InstanceConfig()
                     ) -> list[PropagationInstance]:
    """Instances from every sentence, gold read off each sentence's own deps."""
    out = []
    for idx, sent in enumerate(corpus):
        gold = sent if with_gold else None
        out.extend(extract_instances(sent, gold=gold, config=config,
                                     index=idx))
    return out


def train_prop(corpus: list[Sentence], kind: str,
               options: PropTrainOptions | None = None,
               provider=None,
               feature_config: FeatureConfig | None = None,
               instance_config: InstanceConfig = InstanceConfig()
               ) -> PropModel:
    """Trains a classifier on a corpus whose deps columns hold gold graphs."""
    opts = options or PropTrainOptions()
    fc = feature_config or default_feature_config(kind)
    instances = corpus_instances(corpus, config=instance_config)
    if not instances:
        raise TrainingError("no propagation instances in the training data")
    vectors = []
    for inst in instances:
        sent = corpus[inst.sentence_ref[1]]
        vectors.append(featurize(inst, sent, provider, fc))
    vocab = build_vocabulary(vectors)
    dense_dim = provider.dim if (provider is not None and fc.dense_tokens
                                 and fc.token_features) else 0
    x = np.stack([vectorize(fv, vocab, dense_dim) for fv in vectors])
    y = np.array([bool(inst.gold) for inst in instances])
    if y.all() or not y.any():
        raise TrainingError("training data contains a single class")

    model = PropModel(kind=kind, vocab=vocab, dense_dim=dense_dim,
                      feature_config=fc, instance_config=instance_config)
    if kind == "kernel":
        class_weight = None
        if opts.class_weights:
            n = len(y)
            pos = int(y.sum())
            class_weight = {1.0: n / (2.0 * pos),
                            -1.0: n / (2.0 * (n - pos))}
        model.svm = train_svm(x, y, c=opts.c, tol=opts.tol,
                              class_weight=class_weight)
    elif kind == "mlp":
        model.mlp = _train_mlp(x, y, opts)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return model


def apply_model(model: PropModel, sent: Sentence, provider=None,
                config: ApplyConfig = ApplyConfig(),
                index: int = 0) -> Sentence:
    """Adds an enhanced edge for every instance the model accepts.

    Iterated application re-extracts instances from the working graph so
    freshly added edges can seed further propagation.  Subject labels go
    through the converter's passive/imperative adjustments when the fix is
    switched on; otherwise candidates are copied verbatim.
    """
    needs_dense = (model.dense_dim > 0 and model.feature_config.dense_tokens
                   and model.feature_config.token_features)
    if needs_dense:
        if provider is None:
            raise ApplyError(
                f"model expects dense vectors of dimension {model.dense_dim} "
                "but no embedding provider was given")
        if provider.dim != model.dense_dim:
            raise ApplyError(
                f"embedding dimension {provider.dim} does not match the "
                f"model's expected {model.dense_dim}")

    work = sent.clone()
    if _needs_seed(work):
        seed_enhanced(work)
    by_id = work.token_by_id()
    conv_cfg = ConverterConfig(
        passive_imperative_fix=config.passive_imperative_fix)

    while True:
        instances = extract_instances(work, config=config.instance_config,
                                      index=index, layer="working")
        changed = False
        if instances:
            x = np.stack([
                vectorize(featurize(inst, work, provider,
                                    model.feature_config),
                          model.vocab, model.dense_dim)
                for inst in instances])
            keep = model.predict(x)
            for inst, positive in zip(instances, keep):
                if not positive:
                    continue
                label = inst.candidate_label
                if config.passive_imperative_fix \
                        and coarse(label) in SUBJECT_LABELS:
                    dep_tok = by_id[inst.conj_dep]
                    auxpass = has_child_with_label(work, inst.conj_dep,
                                                   "aux:pass")
                    label = _subject_label(dep_tok, label, auxpass, conv_cfg)
                    if label is None:
                        continue
                edge = inst.edge_at_conjunct()
                changed |= add_dep(by_id[edge.dep], edge.head, label)
        if not (changed and config.iterate_to_fixpoint):
            break
    return work
