"""Relational graph convolution encoder + DistMult decoder, plain numpy.

Two convolution layers with per-relation weights and a self-loop weight:

    h_i^(l+1) = ReLU( sum_r sum_{j in N_i^r} (1/c_{i,r}) W_r^(l) h_j^(l)
                      + W_self^(l) h_i^(l) ),          c_{i,r} = |N_i^r|

The final node embedding is the element-wise max of the two layer outputs.
Edges are scored with DistMult: f(s, r, o) = sum_k e_s[k] R_r[k] e_o[k],
symmetric in s and o, which suits undirected relations.  Training minimizes
cross-entropy over observed edges plus omega sampled corruptions per edge:

    L = -1/((1+omega)|E|) sum_t [ y log sigma(f) + (1-y) log(1 - sigma(f)) ]

Gradients are computed analytically (backprop by hand) and stepped with
Adam.  Everything is deterministic given the seed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .graph import (
    ATTR_DIM,
    Edge,
    GuiGraph,
    KIND_COMPONENT,
    KIND_CONTAINER,
    Normalizer,
    RELATIONS,
    adjacency,
)
from .spectral import SignalConfig, SignalMonitor

ENC1 = tuple(f"enc1.{r}" for r in RELATIONS) + ("enc1.self",)
ENC2 = tuple(f"enc2.{r}" for r in RELATIONS) + ("enc2.self",)
DEC = tuple(f"dec.{r}" for r in RELATIONS)
PARAM_NAMES = ENC1 + ENC2 + DEC

LOG_CLAMP = 1e-12


class TrainingDiverged(RuntimeError):
    def __init__(self, where: str, value: float):
        super().__init__(f"loss diverged ({value!r}) at {where}")
        self.where = where
        self.value = value


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 16
    learning_rate: float = 0.01
    epochs: int = 200
    negative_ratio: int = 1
    seed: int = 0
    plateau_tol: float = 0.0
    plateau_patience: int = 20


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(dim: int, seed: int, attr_dim: int = ATTR_DIM) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    params: dict[str, np.ndarray] = {}
    for name in ENC1:
        params[name] = glorot(rng, attr_dim, dim, (attr_dim, dim))
    for name in ENC2:
        params[name] = glorot(rng, dim, dim, (dim, dim))
    for name in DEC:
        params[name] = glorot(rng, 1, dim, (dim,))
    return params


class GraphTensors:
    """Fixed per-graph arrays: row-normalized messages and input features."""

    def __init__(self, g: GuiGraph, normalizer: Normalizer | None):
        self.graph = g
        self.x = normalizer.transform(g) if normalizer else None
        if self.x is None:
            from .graph import attribute_matrix

            self.x = attribute_matrix(g)
        self.m: dict[str, np.ndarray] = {}
        self.mt: dict[str, np.ndarray] = {}
        for rel in RELATIONS:
            a = adjacency(g, rel)
            deg = a.sum(axis=1, keepdims=True)
            m = np.divide(a, deg, out=np.zeros_like(a), where=deg > 0)
            self.m[rel] = m
            self.mt[rel] = m.T.copy()
        self.mx = {rel: self.m[rel] @ self.x for rel in RELATIONS}


@dataclass
class ForwardCache:
    z1: np.ndarray
    h1: np.ndarray
    mh1: dict[str, np.ndarray]
    z2: np.ndarray
    h2: np.ndarray
    e: np.ndarray


def forward(params: dict[str, np.ndarray], gt: GraphTensors) -> ForwardCache:
    z1 = gt.x @ params["enc1.self"]
    for rel in RELATIONS:
        z1 = z1 + gt.mx[rel] @ params[f"enc1.{rel}"]
    h1 = np.maximum(z1, 0.0)

    mh1 = {rel: gt.m[rel] @ h1 for rel in RELATIONS}
    z2 = h1 @ params["enc2.self"]
    for rel in RELATIONS:
        z2 = z2 + mh1[rel] @ params[f"enc2.{rel}"]
    h2 = np.maximum(z2, 0.0)

    return ForwardCache(z1=z1, h1=h1, mh1=mh1, z2=z2, h2=h2, e=np.maximum(h1, h2))


def embeddings(params: dict[str, np.ndarray], gt: GraphTensors) -> np.ndarray:
    return forward(params, gt).e


def score(e: np.ndarray, params: dict[str, np.ndarray], s: int, rel: str, o: int) -> float:
    return float(np.sum(e[s] * params[f"dec.{rel}"] * e[o]))


def _sigmoid(f: np.ndarray) -> np.ndarray:
    out = np.empty_like(f)
    pos = f >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-f[pos]))
    ef = np.exp(f[~pos])
    out[~pos] = ef / (1.0 + ef)
    return out


Triple = tuple[int, str, int, int]  # (s, rel, o, y)


def make_triples(positives: list[Edge], negatives: list[Edge]) -> list[Triple]:
    return [(i, rel, j, 1) for i, j, rel in positives] + [
        (i, rel, j, 0) for i, j, rel in negatives
    ]


def loss_and_grads(
    params: dict[str, np.ndarray],
    gt: GraphTensors,
    triples: list[Triple],
    negative_ratio: int,
) -> tuple[float, dict[str, np.ndarray]]:
    """Cross-entropy over scored triples and its analytic gradient."""
    cache = forward(params, gt)
    e = cache.e
    n_pos = sum(y for _, _, _, y in triples)
    if n_pos == 0:
        raise ValueError("no positive triples")
    norm = (1 + negative_ratio) * n_pos

    by_rel: dict[str, list[tuple[int, int, int]]] = {rel: [] for rel in RELATIONS}
    for s, rel, o, y in triples:
        by_rel[rel].append((s, o, y))

    total = 0.0
    de = np.zeros_like(e)
    grads = {name: np.zeros_like(arr) for name, arr in params.items()}

    for rel in RELATIONS:
        items = by_rel[rel]
        if not items:
            continue
        s_idx = np.array([t[0] for t in items])
        o_idx = np.array([t[1] for t in items])
        y = np.array([t[2] for t in items], dtype=np.float64)
        rv = params[f"dec.{rel}"]
        f = np.sum(e[s_idx] * rv * e[o_idx], axis=1)
        p = _sigmoid(f)
        total += -float(
            np.sum(
                y * np.log(np.maximum(p, LOG_CLAMP))
                + (1 - y) * np.log(np.maximum(1 - p, LOG_CLAMP))
            )
        )
        dldf = (p - y)[:, None]  # d(-[y log p + (1-y) log(1-p)])/df = p - y
        grads[f"dec.{rel}"] += np.sum(dldf * e[s_idx] * e[o_idx], axis=0)
        np.add.at(de, s_idx, dldf * rv * e[o_idx])
        np.add.at(de, o_idx, dldf * rv * e[s_idx])

    total /= norm
    de /= norm
    for rel in RELATIONS:
        grads[f"dec.{rel}"] /= norm

    # Element-wise max routes the gradient to the winning layer (ties to 1).
    m1 = cache.h1 >= cache.h2
    dh1 = de * m1
    dh2 = de * ~m1

    dz2 = dh2 * (cache.z2 > 0)
    grads["enc2.self"] += cache.h1.T @ dz2
    for rel in RELATIONS:
        grads[f"enc2.{rel}"] += cache.mh1[rel].T @ dz2
        dh1 += gt.mt[rel] @ (dz2 @ params[f"enc2.{rel}"].T)
    dh1 += dz2 @ params["enc2.self"].T

    dz1 = dh1 * (cache.z1 > 0)
    grads["enc1.self"] += gt.x.T @ dz1
    for rel in RELATIONS:
        grads[f"enc1.{rel}"] += gt.mx[rel].T @ dz1

    return total, grads


def loss(
    params: dict[str, np.ndarray],
    gt: GraphTensors,
    positives: list[Edge],
    negatives: list[Edge],
) -> float:
    if positives and negatives and len(negatives) % len(positives) != 0:
        raise ValueError("negative count must be a multiple of positive count")
    ratio = len(negatives) // len(positives) if positives else 1
    value, _ = loss_and_grads(params, gt, make_triples(positives, negatives), ratio)
    return value


def sample_negatives(
    g: GuiGraph,
    positives: list[Edge],
    omega: int,
    rng: np.random.Generator,
) -> tuple[list[Edge], list[Edge]]:
    """Corrupt one endpoint per negative, within the endpoint's node kind.

    Candidates that collide with an existing edge of the same relation are
    rejected.  A positive for which no legal corruption exists is dropped
    together with its negative slots so |negatives| = omega * |positives|
    holds exactly.
    """
    kinds = [n.kind for n in g.nodes]
    pools = {
        kind: [i for i, k in enumerate(kinds) if k == kind]
        for kind in (KIND_COMPONENT, KIND_CONTAINER)
    }
    existing = set(g.edges)

    kept: list[Edge] = []
    negatives: list[Edge] = []
    for i, j, rel in positives:
        drawn: list[Edge] = []
        for _ in range(omega):
            found = None
            for _attempt in range(80):
                side = int(rng.integers(2))
                anchor, moved = (j, i) if side == 0 else (i, j)
                pool = pools[kinds[moved]]
                if len(pool) <= 1:
                    continue
                cand = pool[int(rng.integers(len(pool)))]
                a, b = sorted((anchor, cand))
                if a == b or (a, b, rel) in existing:
                    continue
                found = (a, b, rel)
                break
            if found is None:
                break
            drawn.append(found)
        if len(drawn) == omega:
            kept.append((i, j, rel))
            negatives.extend(drawn)
    return kept, negatives


class Adam:
    """Standard Adam, beta = (0.9, 0.999), eps = 1e-8, bias-corrected."""

    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float) -> None:
        self.t += 1
        for name in PARAM_NAMES:
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * g * g
            mhat = self.m[name] / (1 - self.beta1**self.t)
            vhat = self.v[name] / (1 - self.beta2**self.t)
            params[name] -= lr * mhat / (np.sqrt(vhat) + self.eps)


@dataclass
class TrainedModel:
    params: dict[str, np.ndarray]
    normalizer: Normalizer
    config: TrainConfig
    loss_history: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.config.dim


def train(graphs: list[GuiGraph], cfg: TrainConfig = TrainConfig()) -> TrainedModel:
    """Fit encoder + decoder on a corpus of GUI graphs.

    Negatives are resampled every epoch from a (seed, epoch, graph) stream;
    the loss is summed over graphs.  NaN/inf aborts with the epoch in the
    error.  An optional plateau stop fires when the summed loss moved less
    than plateau_tol over plateau_patience epochs.
    """
    if not graphs:
        raise ValueError("empty training corpus")
    normalizer = Normalizer.fit(graphs)
    tensors = [GraphTensors(g, normalizer) for g in graphs]
    params = init_params(cfg.dim, cfg.seed)
    adam = Adam()
    history: list[float] = []

    for epoch in range(cfg.epochs):
        total = 0.0
        acc = {name: np.zeros_like(arr) for name, arr in params.items()}
        for gi, gt in enumerate(tensors):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1, epoch, gi]))
            pos, neg = sample_negatives(
                gt.graph, list(gt.graph.edges), cfg.negative_ratio, rng
            )
            if not pos:
                continue
            value, grads = loss_and_grads(
                params, gt, make_triples(pos, neg), cfg.negative_ratio
            )
            total += value
            for name in PARAM_NAMES:
                acc[name] += grads[name]
        if not np.isfinite(total):
            raise TrainingDiverged(f"epoch {epoch}", total)
        history.append(total)
        adam.step(params, acc, cfg.learning_rate)
        if (
            cfg.plateau_tol > 0
            and len(history) > cfg.plateau_patience
            and abs(history[-1] - history[-1 - cfg.plateau_patience]) < cfg.plateau_tol
        ):
            break

    return TrainedModel(params=params, normalizer=normalizer, config=cfg, loss_history=history)


def candidate_slots(g: GuiGraph, relation: str) -> list[tuple[int, int]]:
    """Kind-compatible unordered non-edges of a relation in this graph."""
    comps = [i for i, n in enumerate(g.nodes) if n.kind == KIND_COMPONENT]
    conts = [i for i, n in enumerate(g.nodes) if n.kind == KIND_CONTAINER]
    if relation == "CC":
        pairs = itertools.combinations(comps, 2)
    elif relation == "VV":
        pairs = itertools.combinations(conts, 2)
    else:
        pairs = ((min(c, v), max(c, v)) for v in conts for c in comps)
    existing = {(i, j) for i, j, rel in g.edges if rel == relation}
    return [p for p in pairs if p not in existing]


@dataclass
class PredictResult:
    ranking: list[tuple[Edge, float]]  # sorted by descending score
    converged: bool
    iterations: int
    monitor: SignalMonitor
    embeddings: np.ndarray


def predict_links(
    model: TrainedModel,
    g: GuiGraph,
    removed: list[Edge],
    *,
    hook=None,
    signal_cfg: SignalConfig = SignalConfig(),
    max_iterations: int = 500,
    seed: int = 0,
) -> PredictResult:
    """Iteratively refine embeddings on a damaged graph and rank edge slots.

    Each iteration takes one fine-tuning step on the observed edges at a
    tenth of the training learning rate, recomputes embeddings, and reports
    every node to the signal monitor (and the extra hook, when given).  The
    loop stops once all watched signals converge, or at the iteration cap.
    Candidate slots of each relation are ranked by DistMult score.
    """
    gt = GraphTensors(g, model.normalizer)
    params = {name: arr.copy() for name, arr in model.params.items()}
    lr = model.config.learning_rate / 10.0
    monitor = SignalMonitor(signal_cfg, watch=[n.id for n in g.nodes])
    adam = Adam()
    observed = list(g.edges)

    e = embeddings(params, gt)
    converged = False
    iteration = 0
    for iteration in range(1, max_iterations + 1):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 2, iteration]))
        pos, neg = sample_negatives(g, observed, model.config.negative_ratio, rng)
        if pos:
            value, grads = loss_and_grads(
                params, gt, make_triples(pos, neg), model.config.negative_ratio
            )
            if not np.isfinite(value):
                raise TrainingDiverged(f"fine-tune iteration {iteration}", value)
            adam.step(params, grads, lr)
        e = embeddings(params, gt)
        for idx, node in enumerate(g.nodes):
            monitor(node.id, iteration, e[idx])
            if hook is not None:
                hook(node.id, iteration, e[idx])
        if monitor.all_converged():
            converged = True
            break

    ranking: list[tuple[Edge, float]] = []
    for rel in RELATIONS:
        for i, j in candidate_slots(g, rel):
            ranking.append(((i, j, rel), score(e, params, i, rel, j)))
    ranking.sort(key=lambda item: (-item[1], item[0]))
    return PredictResult(
        ranking=ranking,
        converged=converged,
        iterations=iteration,
        monitor=monitor,
        embeddings=e,
    )


def reciprocal_ranks(
    ranking: list[tuple[Edge, float]], removed: list[Edge]
) -> list[float]:
    """1/rank of each removed slot among its relation's candidates."""
    out = []
    for target in removed:
        rel = target[2]
        rank = 0
        hit = None
        for edge, _score in ranking:
            if edge[2] != rel:
                continue
            rank += 1
            if edge == target:
                hit = rank
                break
        if hit is None:
            raise ValueError(f"removed edge {target} not among candidates")
        out.append(1.0 / hit)
    return out


def random_ranking(g: GuiGraph, seed: int) -> list[tuple[Edge, float]]:
    """Baseline scorer: uniform random scores over the same candidate slots."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 3]))
    ranking = []
    for rel in RELATIONS:
        for i, j in candidate_slots(g, rel):
            ranking.append(((i, j, rel), float(rng.uniform())))
    ranking.sort(key=lambda item: (-item[1], item[0]))
    return ranking


MODEL_MAGIC = "guirepair-model v1"


def dump_model(model: TrainedModel) -> str:
    """Versioned, binary-free text form: header, config echo, normalization
    statistics, then one named CSV block per parameter matrix."""
    cfg = model.config
    lines = [
        MODEL_MAGIC,
        f"dim {cfg.dim}",
        f"attr_dim {ATTR_DIM}",
        f"learning_rate {cfg.learning_rate!r}",
        f"epochs {cfg.epochs}",
        f"negative_ratio {cfg.negative_ratio}",
        f"seed {cfg.seed}",
        f"plateau_tol {cfg.plateau_tol!r}",
        f"plateau_patience {cfg.plateau_patience}",
        f"epochs_run {len(model.loss_history)}",
        f"final_loss {model.loss_history[-1]!r}" if model.loss_history else "final_loss nan",
        "norm.mins " + ",".join(repr(v) for v in model.normalizer.mins),
        "norm.maxs " + ",".join(repr(v) for v in model.normalizer.maxs),
    ]
    for name in PARAM_NAMES:
        arr = np.atleast_2d(model.params[name])
        lines.append(f"[matrix {name} {arr.shape[0]} {arr.shape[1]}]")
        for row in arr:
            lines.append(",".join(repr(float(v)) for v in row))
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> TrainedModel:
    lines = text.splitlines()
    if not lines or lines[0] != MODEL_MAGIC:
        raise ModelFormatError(
            f"not a model file (expected header {MODEL_MAGIC!r})"
        )
    header: dict[str, str] = {}
    i = 1
    while i < len(lines) and not lines[i].startswith("[matrix "):
        if lines[i].strip():
            key, _, value = lines[i].partition(" ")
            header[key] = value
        i += 1

    try:
        cfg = TrainConfig(
            dim=int(header["dim"]),
            learning_rate=float(header["learning_rate"]),
            epochs=int(header["epochs"]),
            negative_ratio=int(header["negative_ratio"]),
            seed=int(header["seed"]),
            plateau_tol=float(header["plateau_tol"]),
            plateau_patience=int(header["plateau_patience"]),
        )
        normalizer = Normalizer(
            mins=tuple(float(v) for v in header["norm.mins"].split(",")),
            maxs=tuple(float(v) for v in header["norm.maxs"].split(",")),
        )
    except KeyError as exc:
        raise ModelFormatError(f"model header missing {exc.args[0]}") from None

    params: dict[str, np.ndarray] = {}
    while i < len(lines) and lines[i] != "end":
        head = lines[i]
        if not head.startswith("[matrix "):
            raise ModelFormatError(f"unexpected line in matrix section: {head!r}")
        _, name, rows, cols = head.strip("[]").split(" ")
        rows, cols = int(rows), int(cols)
        block = lines[i + 1 : i + 1 + rows]
        if len(block) != rows:
            raise ModelFormatError(f"truncated matrix block {name}")
        arr = np.array([[float(v) for v in row.split(",")] for row in block])
        if arr.shape != (rows, cols):
            raise ModelFormatError(f"matrix {name} shape mismatch")
        params[name] = arr[0] if name.startswith("dec.") else arr
        i += 1 + rows
    if i >= len(lines) or lines[i] != "end":
        raise ModelFormatError("missing end marker")
    missing = [n for n in PARAM_NAMES if n not in params]
    if missing:
        raise ModelFormatError(f"model file missing matrices: {missing}")

    history: list[float] = []
    if "final_loss" in header and header["final_loss"] != "nan":
        history = [float(header["final_loss"])]
    return TrainedModel(params=params, normalizer=normalizer, config=cfg, loss_history=history)
