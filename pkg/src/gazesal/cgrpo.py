"""Group relative policy optimization with consistency rewards, on a toy policy.

The toy policy stands in for a language model that writes point-protocol
messages. It is tabular: every context (group label + scene id) owns four
heads, each stored as a ``(rows, choices)`` logit table:

=========  ==============  ==================================================
head       table           decision
=========  ==============  ==================================================
``delim``  (4, 2)          omit/emit ``<ref>``, ``</ref>``, ``<point>``, ``</point>``
``count``  (1, K+1)        declared count 0..K
``xbin``   (K, B+1)        x bin of point k, or end-of-list
``ybin``   (K, B)          y bin of point k
=========  ==============  ==================================================

Bins split [0, 1000] into ``B`` equal cells per axis and decode to cell
centres. A sampled output is a sequence of decisions ("tokens"), each stored
as a ``(head, row, choice)`` triple. Delimiter decisions are only sampled
when ``stochastic_delimiters`` is on; otherwise the scaffold always emits
them. Heads do not condition on earlier tokens, so per-token log-probabilities
and their gradients are plain log-softmax expressions.
"""

from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .geometry import GRID_MAX
from .protocol import POINT_CLOSE, POINT_OPEN, REF_CLOSE, REF_OPEN, parse
from .rewards import RewardConfig, score_outcome

HEADS = ("delim", "count", "xbin", "ybin")
DELIM, COUNT, XBIN, YBIN = range(4)
N_DELIM = 4
ADV_EPS = 1e-8
POLICY_MAGIC = b"GZPOLICY"
POLICY_VERSION = 1


@dataclass(frozen=True)
class GrpoConfig:
    group_size: int = 8
    clip_eps: float = 0.2
    beta: float = 0.04
    lr: float = 15.0
    iterations: int = 5000
    epochs: int = 1  # gradient steps per sampled group
    seed: int = 0
    bins: int = 25
    k_max: int = 32
    stochastic_delimiters: bool = False
    init_valid_rate: float = 0.5  # P(all four delimiters emitted) at init
    init_stop_prob: float = 0.1  # per-slot end-of-list probability at init

    def __post_init__(self):
        if self.group_size < 2:
            raise ValueError("group_size must be >= 2")
        if not 0 < self.clip_eps < 1:
            raise ValueError("clip_eps must lie in (0, 1)")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.bins < 1 or self.k_max < 1:
            raise ValueError("bins and k_max must be >= 1")
        if not 0 < self.init_valid_rate < 1 or not 0 < self.init_stop_prob < 1:
            raise ValueError("initial probabilities must lie in (0, 1)")


# --------------------------------------------------------------------------
# policy
# --------------------------------------------------------------------------


def _log_softmax(z: np.ndarray) -> np.ndarray:
    m = z.max(axis=-1, keepdims=True)
    s = z - m
    return s - np.log(np.exp(s).sum(axis=-1, keepdims=True))


@dataclass
class ToyPolicy:
    contexts: List[str]
    k_max: int
    bins: int
    stochastic_delimiters: bool
    tables: List[np.ndarray]  # one (C, rows, choices) array per head, in HEADS order
    _index: Dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._index = {c: i for i, c in enumerate(self.contexts)}
        if len(self._index) != len(self.contexts):
            raise ValueError("duplicate context keys")
        if [t.shape for t in self.tables] != self.expected_shapes():
            raise ValueError("parameter shapes do not match contexts/k_max/bins")

    def expected_shapes(self) -> List[Tuple[int, int, int]]:
        C, K, B = len(self.contexts), self.k_max, self.bins
        return [(C, N_DELIM, 2), (C, 1, K + 1), (C, K, B + 1), (C, K, B)]

    @classmethod
    def initial(cls, contexts: Sequence[str], cfg: GrpoConfig, noise: float = 0.0, seed: int = 0) -> "ToyPolicy":
        """Uniform count and bin heads, a fixed stop rate and delimiter emit rate.

        ``noise`` adds Gaussian jitter to every logit (useful for tests).
        """
        contexts = list(dict.fromkeys(contexts))
        C, K, B = len(contexts), cfg.k_max, cfg.bins
        p_emit = cfg.init_valid_rate ** (1.0 / N_DELIM)
        delim = np.zeros((C, N_DELIM, 2))
        delim[:, :, 1] = math.log(p_emit / (1 - p_emit))
        xbin = np.zeros((C, K, B + 1))
        xbin[:, :, -1] = math.log(cfg.init_stop_prob / (1 - cfg.init_stop_prob) * B)
        tables = [delim, np.zeros((C, 1, K + 1)), xbin, np.zeros((C, K, B))]
        if noise:
            rng = np.random.default_rng(seed)
            tables = [t + rng.normal(0.0, noise, t.shape) for t in tables]
        return cls(contexts, K, B, cfg.stochastic_delimiters, tables)

    @property
    def eol(self) -> int:
        return self.bins

    def index(self, context) -> int:
        if isinstance(context, (int, np.integer)):
            return int(context)
        try:
            return self._index[context]
        except KeyError:
            raise KeyError(f"unknown context {context!r}") from None

    def copy(self) -> "ToyPolicy":
        return ToyPolicy(list(self.contexts), self.k_max, self.bins, self.stochastic_delimiters,
                         [t.copy() for t in self.tables])

    def params(self) -> Dict[str, np.ndarray]:
        return dict(zip(HEADS, self.tables))

    def same_shape(self, other: "ToyPolicy") -> bool:
        return (
            self.contexts == other.contexts
            and self.stochastic_delimiters == other.stochastic_delimiters
            and [t.shape for t in self.tables] == [t.shape for t in other.tables]
        )

    def bin_center(self, b: int) -> int:
        return int(round((b + 0.5) * GRID_MAX / self.bins))

    def bin_of(self, g: float) -> int:
        return min(int(g * self.bins // GRID_MAX), self.bins - 1)


# --------------------------------------------------------------------------
# sampling and decoding
# --------------------------------------------------------------------------


@dataclass
class Sample:
    tokens: np.ndarray  # (n, 3) int: head, row, choice
    logp: np.ndarray  # (n,) behaviour-policy log-probabilities
    text: str


def _draw(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw, one uniform per row of a cumulative-probability table."""
    idx = (cum < u[:, None]).sum(axis=1)
    return np.minimum(idx, cum.shape[1] - 1)


def decode(policy: ToyPolicy, tokens: np.ndarray) -> str:
    """Render a decision sequence as protocol text."""
    emit = [True] * N_DELIM
    n_ref = 0
    xs: List[int] = []
    ys: List[int] = []
    for head, row, choice in tokens:
        if head == DELIM:
            emit[row] = bool(choice)
        elif head == COUNT:
            n_ref = int(choice)
        elif head == XBIN and choice != policy.eol:
            xs.append(policy.bin_center(int(choice)))
        elif head == YBIN:
            ys.append(policy.bin_center(int(choice)))
    body = ",".join(f"[{x},{y}]" for x, y in zip(xs, ys))
    return (
        (REF_OPEN if emit[0] else "") + str(n_ref) + (REF_CLOSE if emit[1] else "")
        + (POINT_OPEN if emit[2] else "") + f"[{body}]" + (POINT_CLOSE if emit[3] else "")
    )


def _sample_one(policy: ToyPolicy, rng: np.random.Generator, lps, cums) -> Sample:
    K = policy.k_max
    u = [rng.random(N_DELIM), rng.random(1), rng.random(K), rng.random(K)]
    delim, count, xs, ys = (_draw(cum, uu) for cum, uu in zip(cums, u))
    stops = np.flatnonzero(xs == policy.eol)
    n_pts = int(stops[0]) if len(stops) else K

    rows: List[Tuple[int, int, int]] = []
    stoch = policy.stochastic_delimiters
    if stoch:
        rows.append((DELIM, 0, int(delim[0])))
    rows.append((COUNT, 0, int(count[0])))
    if stoch:
        rows += [(DELIM, 1, int(delim[1])), (DELIM, 2, int(delim[2]))]
    for k in range(n_pts):
        rows += [(XBIN, k, int(xs[k])), (YBIN, k, int(ys[k]))]
    if n_pts < K:
        rows.append((XBIN, n_pts, policy.eol))
    if stoch:
        rows.append((DELIM, 3, int(delim[3])))
    tokens = np.array(rows, dtype=np.int64)
    logp = np.array([lps[h][r, ch] for h, r, ch in tokens])
    return Sample(tokens, logp, decode(policy, tokens))


def sample_group(policy: ToyPolicy, context, G: int, seed) -> List[Sample]:
    """Draw ``G`` outputs; output ``i`` uses its own stream seeded by ``(*seed, i)``."""
    if G < 2:
        raise ValueError("group size must be >= 2")
    c = policy.index(context)
    lps = [_log_softmax(t[c]) for t in policy.tables]
    cums = [np.cumsum(np.exp(lp), axis=-1) for lp in lps]
    base = [int(v) for v in np.atleast_1d(seed)]
    return [_sample_one(policy, np.random.default_rng(base + [i]), lps, cums) for i in range(G)]


# --------------------------------------------------------------------------
# advantages, objective, update
# --------------------------------------------------------------------------


def group_advantages(rewards: Sequence[float]) -> np.ndarray:
    r = np.asarray(rewards, dtype=float)
    d = r - r.mean()
    sd = r.std()
    if sd <= 1e-12 * max(1.0, float(np.abs(r).max(initial=0.0))):
        return np.zeros_like(r)  # spread is rounding noise: treat as all-equal
    a = d / (sd + ADV_EPS)
    return a - a.mean()


@dataclass
class GroupBatch:
    context: int
    tokens: List[np.ndarray]
    old_logp: List[np.ndarray]
    advantages: np.ndarray


def token_logp(policy: ToyPolicy, c: int, tokens: np.ndarray):
    """Per-token log-probabilities, plus per-head (mask, softmax rows) for gradients."""
    head, row, ch = tokens[:, 0], tokens[:, 1], tokens[:, 2]
    lp = np.empty(len(tokens))
    probs = {}
    for h, table in enumerate(policy.tables):
        m = head == h
        if not m.any():
            continue
        ls = _log_softmax(table[c][row[m]])
        lp[m] = ls[np.arange(len(ls)), ch[m]]
        probs[h] = (m, np.exp(ls))
    return lp, probs


def kl_estimator(logp: np.ndarray, ref_logp: np.ndarray) -> np.ndarray:
    """Per-token ``pi_ref/pi - 1 - log(pi_ref/pi)``; nonnegative for any pair."""
    d = ref_logp - logp
    return np.expm1(d) - d


def grpo_objective(
    policy: ToyPolicy,
    reference: ToyPolicy,
    batch: GroupBatch,
    cfg: GrpoConfig,
    with_grad: bool = True,
):
    """Clipped group-relative surrogate minus the KL penalty, and its gradient.

    ``J = 1/G sum_i 1/|o_i| sum_t [min(r A, clip(r) A) - beta * kl_t]``.
    The derivative of a token term with respect to its log-probability is
    ``r A`` on the unclipped branch (0 on the clipped one) plus
    ``beta * (pi_ref/pi - 1)``. Returns ``(J, grads, stats)`` with ``grads``
    laid out like ``policy.tables``.
    """
    if not policy.same_shape(reference):
        raise ValueError("policy and reference have different shapes")
    if not len(batch.tokens) == len(batch.old_logp) == len(batch.advantages):
        raise ValueError("batch fields have mismatched lengths")
    c = batch.context
    G = len(batch.tokens)
    grads = [np.zeros_like(t) for t in policy.tables] if with_grad else None
    J = 0.0
    kl_sum, n_tok, n_clip = 0.0, 0, 0
    for tokens, old_lp, A in zip(batch.tokens, batch.old_logp, batch.advantages):
        n = len(tokens)
        if n == 0:
            continue
        if old_lp.shape != (n,):
            raise ValueError("old log-probabilities do not match token count")
        lp, probs = token_logp(policy, c, tokens)
        ref_lp, _ = token_logp(reference, c, tokens)
        ratio = np.exp(lp - old_lp)
        clipped = np.clip(ratio, 1 - cfg.clip_eps, 1 + cfg.clip_eps)
        unclipped = ratio * A <= clipped * A
        surr = np.where(unclipped, ratio * A, clipped * A)
        kl = kl_estimator(lp, ref_lp)
        J += float(np.sum(surr - cfg.beta * kl)) / (G * n)
        kl_sum += float(kl.sum())
        n_tok += n
        n_clip += int((~unclipped).sum())
        if not with_grad:
            continue
        g_lp = (np.where(unclipped, ratio * A, 0.0) + cfg.beta * np.expm1(ref_lp - lp)) / (G * n)
        rows, ch = tokens[:, 1], tokens[:, 2]
        for h, (m, p) in probs.items():
            g = g_lp[m]
            d = -g[:, None] * p
            d[np.arange(len(g)), ch[m]] += g
            np.add.at(grads[h][c], rows[m], d)
    stats = {"kl": kl_sum / max(n_tok, 1), "clip_frac": n_clip / max(n_tok, 1)}
    return J, grads, stats


def grpo_step(
    policy: ToyPolicy,
    reference: ToyPolicy,
    old_policy: Optional[ToyPolicy],
    batch: GroupBatch,
    cfg: GrpoConfig,
    inplace: bool = False,
):
    """One plain gradient-ascent step ``theta += lr * grad J``.

    Returns ``(loss, policy, stats)`` with ``loss = -J``. When ``old_policy``
    is given the behaviour log-probabilities are recomputed from it;
    otherwise the ones recorded at sampling time are used.
    """
    if old_policy is not None:
        if not old_policy.same_shape(policy):
            raise ValueError("old policy and policy have different shapes")
        batch = GroupBatch(
            batch.context, batch.tokens,
            [token_logp(old_policy, batch.context, t)[0] for t in batch.tokens],
            batch.advantages,
        )
    J, grads, stats = grpo_objective(policy, reference, batch, cfg)
    out = policy if inplace else policy.copy()
    for t, g in zip(out.tables, grads):
        t += cfg.lr * g
    stats["grad_norm"] = math.sqrt(sum(float((g * g).sum()) for g in grads))
    return -J, out, stats


def policy_kl(policy: ToyPolicy, reference: ToyPolicy, context=None) -> float:
    """Exact KL(policy || reference) summed over all sampled heads, averaged over contexts.

    Row ``k`` of the y head only matters when point ``k`` is emitted; the sum
    here ignores that gating and treats every row as active.
    """
    idx = range(len(policy.contexts)) if context is None else [policy.index(context)]
    heads = [COUNT, XBIN, YBIN] + ([DELIM] if policy.stochastic_delimiters else [])
    total = 0.0
    for c in idx:
        for h in heads:
            la, lb = _log_softmax(policy.tables[h][c]), _log_softmax(reference.tables[h][c])
            total += float((np.exp(la) * (la - lb)).sum())
    return total / len(idx)


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------


@dataclass
class TrainTrace:
    mean_reward: List[float] = field(default_factory=list)
    valid_rate: List[float] = field(default_factory=list)
    mean_nn_dist: List[float] = field(default_factory=list)
    mean_kl: List[float] = field(default_factory=list)
    loss: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.loss)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["iteration", "mean_reward", "valid_rate", "mean_nn_dist", "mean_kl", "loss"])
        for i in range(len(self)):
            w.writerow([i, *(f"{getattr(self, k)[i]:.10g}" for k in ("mean_reward", "valid_rate", "mean_nn_dist", "mean_kl", "loss"))])
        return out.getvalue()


@dataclass
class Example:
    """One training prompt: a context key and its target fixations in grid units."""

    context: str
    targets: np.ndarray
    width: int = 448
    height: int = 448


@dataclass
class Scored:
    rewards: np.ndarray
    valid: np.ndarray
    nn_dist: np.ndarray  # nan where no points
    texts: List[str]


def score_samples(samples: Sequence[Sample], targets, reward_cfg: RewardConfig) -> Scored:
    rewards, valid, nn, texts = [], [], [], []
    for s in samples:
        outcome = parse(s.text)
        b = score_outcome(outcome, targets, reward_cfg)
        rewards.append(b.r_total)
        valid.append(b.valid_format)
        nn.append(np.nan if b.mean_nn_dist is None else b.mean_nn_dist)
        texts.append(s.text)
    return Scored(np.array(rewards), np.array(valid), np.array(nn), texts)


def train(
    dataset: Sequence[Example],
    cfg: GrpoConfig = GrpoConfig(),
    reward_cfg: RewardConfig = RewardConfig(),
    policy: Optional[ToyPolicy] = None,
    progress=None,
) -> Tuple[ToyPolicy, TrainTrace]:
    """Round-robin over ``dataset``: sample a group, score, standardize, update.

    The reference policy is the starting policy. The behaviour snapshot is
    refreshed every iteration, with ``cfg.epochs`` gradient steps per group.
    """
    if not dataset:
        raise ValueError("empty dataset")
    if policy is None:
        policy = ToyPolicy.initial([ex.context for ex in dataset], cfg)
    reference = policy.copy()
    policy = policy.copy()
    trace = TrainTrace()
    for it in range(cfg.iterations):
        ex = dataset[it % len(dataset)]
        c = policy.index(ex.context)
        samples = sample_group(policy, c, cfg.group_size, (cfg.seed, it))
        sc = score_samples(samples, ex.targets, reward_cfg)
        batch = GroupBatch(c, [s.tokens for s in samples], [s.logp for s in samples], group_advantages(sc.rewards))
        loss, kl = 0.0, 0.0
        for epoch in range(cfg.epochs):
            loss, policy, stats = grpo_step(policy, reference, None, batch, cfg, inplace=True)
            if epoch == 0:
                kl = stats["kl"]
        trace.mean_reward.append(float(sc.rewards.mean()))
        trace.valid_rate.append(float(sc.valid.mean()))
        trace.mean_nn_dist.append(float(np.nanmean(sc.nn_dist)) if np.isfinite(sc.nn_dist).any() else float("nan"))
        trace.mean_kl.append(kl)
        trace.loss.append(loss)
        if progress is not None:
            progress(it, trace)
    return policy, trace


@dataclass
class PolicyEval:
    mean_reward: float
    valid_rate: float
    mean_nn_dist: float
    mean_x: Dict[str, float]
    points: Dict[str, np.ndarray]


def evaluate_policy(
    policy: ToyPolicy,
    dataset: Sequence[Example],
    reward_cfg: RewardConfig = RewardConfig(),
    n_groups: int = 8,
    group_size: int = 8,
    seed: int = 12345,
) -> PolicyEval:
    """Sampled-output statistics per context, pooled over the dataset."""
    rewards, valid, nn = [], [], []
    mean_x: Dict[str, float] = {}
    points: Dict[str, np.ndarray] = {}
    for k, ex in enumerate(dataset):
        pts = []
        for g in range(n_groups):
            samples = sample_group(policy, ex.context, group_size, (seed, k, g))
            sc = score_samples(samples, ex.targets, reward_cfg)
            rewards += sc.rewards.tolist()
            valid += sc.valid.tolist()
            nn += sc.nn_dist[np.isfinite(sc.nn_dist)].tolist()
            for text in sc.texts:
                o = parse(text)
                if o.valid_format:
                    pts += o.points
        arr = np.asarray(pts, dtype=float).reshape(-1, 2)
        points[ex.context] = arr
        mean_x[ex.context] = float(arr[:, 0].mean()) if len(arr) else float("nan")
    return PolicyEval(
        float(np.mean(rewards)), float(np.mean(valid)),
        float(np.mean(nn)) if nn else float("nan"), mean_x, points,
    )


# --------------------------------------------------------------------------
# synthetic demographic dataset
# --------------------------------------------------------------------------

GROUP_X_SHIFT = {
    "male": -0.12, "female": 0.12,
    "male_under30": -0.18, "male_over30": -0.08,
    "female_under30": 0.08, "female_over30": 0.18,
}


def synthetic_group_dataset(n_targets: int = 4, seed: int = 0, scene: str = "s0", width: int = 448, height: int = 448) -> List[Example]:
    """Six demographic contexts sharing scene hotspots, shifted horizontally per group.

    Male groups look left of the shared hotspots and female groups right of
    them, so the sign of the x difference between groups is known.
    """
    rng = np.random.default_rng(seed)
    base = np.column_stack([rng.uniform(300, 700, n_targets), rng.uniform(200, 800, n_targets)])
    out = []
    for group, shift in GROUP_X_SHIFT.items():
        t = base.copy()
        t[:, 0] = np.clip(t[:, 0] + shift * GRID_MAX, 0, GRID_MAX)
        out.append(Example(f"{group}|{scene}", np.round(t), width, height))
    return out


# --------------------------------------------------------------------------
# offline scoring of external model dumps
# --------------------------------------------------------------------------


def offline_scores(records, targets: Mapping[str, np.ndarray], reward_cfg: RewardConfig = RewardConfig()) -> List[dict]:
    """Rewards for each ``{prompt_id, text}`` record and group-relative advantages.

    Records sharing a ``prompt_id`` form one group; singleton groups get
    advantage 0.
    """
    rows = []
    for rec in records:
        if rec.prompt_id not in targets:
            raise KeyError(f"no ground truth for prompt {rec.prompt_id!r}")
        outcome = parse(rec.text)
        b = score_outcome(outcome, targets[rec.prompt_id], reward_cfg)
        rows.append({
            "prompt_id": rec.prompt_id,
            "r_format": b.r_format,
            "r_distance": b.r_distance,
            "r_total": b.r_total,
        })
    by_prompt: Dict[str, List[int]] = {}
    for i, r in enumerate(rows):
        by_prompt.setdefault(r["prompt_id"], []).append(i)
    for idx in by_prompt.values():
        adv = group_advantages([rows[i]["r_total"] for i in idx])
        for i, a in zip(idx, adv):
            rows[i]["advantage"] = float(a)
    return rows


# --------------------------------------------------------------------------
# persistence
# --------------------------------------------------------------------------


def policy_to_bytes(policy: ToyPolicy) -> bytes:
    """``GZPOLICY`` magic and uint32 version, then per head table: uint32 ndim,
    uint32 shape..., little-endian float64 data."""
    out = io.BytesIO()
    out.write(POLICY_MAGIC)
    out.write(struct.pack("<I", POLICY_VERSION))
    for arr in policy.tables:
        out.write(struct.pack("<I", arr.ndim))
        out.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        out.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return out.getvalue()


def policy_from_bytes(blob: bytes, meta: Mapping) -> ToyPolicy:
    if blob[:8] != POLICY_MAGIC:
        raise ValueError("not a policy blob")
    (version,) = struct.unpack_from("<I", blob, 8)
    if version != POLICY_VERSION:
        raise ValueError(f"unsupported policy version {version}")
    off = 12
    tables = []
    for _ in HEADS:
        (ndim,) = struct.unpack_from("<I", blob, off)
        off += 4
        shape = struct.unpack_from(f"<{ndim}I", blob, off)
        off += 4 * ndim
        n = int(np.prod(shape))
        tables.append(np.frombuffer(blob, dtype="<f8", count=n, offset=off).reshape(shape).astype(np.float64))
        off += 8 * n
    return ToyPolicy(list(meta["contexts"]), int(meta["k_max"]), int(meta["bins"]),
                     bool(meta["stochastic_delimiters"]), tables)


def policy_meta(policy: ToyPolicy, cfg: GrpoConfig, reward_cfg: RewardConfig) -> dict:
    return {
        "format_version": POLICY_VERSION,
        "contexts": policy.contexts,
        "k_max": policy.k_max,
        "bins": policy.bins,
        "stochastic_delimiters": policy.stochastic_delimiters,
        "grpo": asdict(cfg),
        "reward": asdict(reward_cfg),
    }


def save_policy(path, policy: ToyPolicy, cfg: GrpoConfig, reward_cfg: RewardConfig) -> None:
    with open(path, "wb") as fh:
        fh.write(policy_to_bytes(policy))
    with open(str(path) + ".json", "w") as fh:
        json.dump(policy_meta(policy, cfg, reward_cfg), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_policy(path) -> ToyPolicy:
    with open(str(path) + ".json") as fh:
        meta = json.load(fh)
    with open(path, "rb") as fh:
        return policy_from_bytes(fh.read(), meta)
