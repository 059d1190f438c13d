"""Per-source topic models and the stationary Dirichlet fit.

The topic model is latent Dirichlet allocation trained by collapsed Gibbs
sampling.  Training is sequential and fully determined by its seed; chunk
mixtures are read from the final sweep's assignment counts.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import digamma, gammaln, polygamma

from .corpus import ChunkSequence
from .errors import NonConvergenceWarning, VocabularyTooSmall
from .simplex import AlphaVector, child_seed_sequence, make_rng

MODEL_FORMAT_VERSION = 1


@dataclass
class TopicModel:
    """A trained topic model plus the Gibbs state it ended in."""

    n_topics: int
    alpha0: float
    beta0: float
    iters: int
    seed: int
    vocab: dict[str, int]
    topic_word: np.ndarray          # (N, V) word distributions per topic
    doc_topic_counts: np.ndarray    # (K, N) final-sweep assignment counts
    doc_lengths: np.ndarray         # (K,)
    assignments: np.ndarray         # (T,) final-sweep topic of every token
    word_ids: np.ndarray            # (T,)
    doc_ids: np.ndarray             # (T,)
    corpus_key: str                 # fingerprint of the training chunks

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def save(self, path) -> None:
        """Persist as a versioned .npz archive."""
        meta = {
            "format_version": MODEL_FORMAT_VERSION,
            "n_topics": self.n_topics,
            "alpha0": self.alpha0,
            "beta0": self.beta0,
            "iters": self.iters,
            "seed": self.seed,
            "corpus_key": self.corpus_key,
        }
        vocab_items = sorted(self.vocab.items(), key=lambda kv: kv[1])
        np.savez_compressed(
            path,
            meta=json.dumps(meta, sort_keys=True),
            vocab_words=np.array([w for w, _ in vocab_items]),
            topic_word=self.topic_word,
            doc_topic_counts=self.doc_topic_counts,
            doc_lengths=self.doc_lengths,
            assignments=self.assignments,
            word_ids=self.word_ids,
            doc_ids=self.doc_ids,
        )

    @classmethod
    def load(cls, path) -> "TopicModel":
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            if meta["format_version"] != MODEL_FORMAT_VERSION:
                raise ValueError(f"unsupported model format {meta['format_version']}")
            vocab = {str(w): i for i, w in enumerate(data["vocab_words"])}
            return cls(
                n_topics=meta["n_topics"],
                alpha0=meta["alpha0"],
                beta0=meta["beta0"],
                iters=meta["iters"],
                seed=meta["seed"],
                vocab=vocab,
                topic_word=data["topic_word"],
                doc_topic_counts=data["doc_topic_counts"],
                doc_lengths=data["doc_lengths"],
                assignments=data["assignments"],
                word_ids=data["word_ids"],
                doc_ids=data["doc_ids"],
                corpus_key=meta["corpus_key"],
            )


def corpus_fingerprint(chunks: ChunkSequence) -> str:
    h = hashlib.sha256()
    h.update(str(chunks.k).encode())
    for c in chunks.chunks:
        h.update(b"\x1e")
        h.update("\x1f".join(c).encode("utf-8"))
    return h.hexdigest()


@njit(cache=True)
def _gibbs_sweep(word_ids, doc_ids, z, n_dk, n_kw, n_k, alpha0, beta0, v_beta, uniforms):
    n_topics = n_kw.shape[0]
    probs = np.empty(n_topics)
    for i in range(word_ids.shape[0]):
        w = word_ids[i]
        d = doc_ids[i]
        t_old = z[i]
        n_dk[d, t_old] -= 1
        n_kw[t_old, w] -= 1
        n_k[t_old] -= 1
        total = 0.0
        for t in range(n_topics):
            p = (n_kw[t, w] + beta0) / (n_k[t] + v_beta) * (n_dk[d, t] + alpha0)
            total += p
            probs[t] = total
        u = uniforms[i] * total
        t_new = 0
        while probs[t_new] < u:
            t_new += 1
        z[i] = t_new
        n_dk[d, t_new] += 1
        n_kw[t_new, w] += 1
        n_k[t_new] += 1


@njit(cache=True)
def _foldin_sweep(word_ids, z, d_counts, n_kw, n_k, alpha0, beta0, v_beta, uniforms):
    # Like _gibbs_sweep but the trained word-topic counts stay frozen.
    n_topics = n_kw.shape[0]
    probs = np.empty(n_topics)
    for i in range(word_ids.shape[0]):
        w = word_ids[i]
        t_old = z[i]
        d_counts[t_old] -= 1
        total = 0.0
        for t in range(n_topics):
            p = (n_kw[t, w] + beta0) / (n_k[t] + v_beta) * (d_counts[t] + alpha0)
            total += p
            probs[t] = total
        u = uniforms[i] * total
        t_new = 0
        while probs[t_new] < u:
            t_new += 1
        z[i] = t_new
        d_counts[t_new] += 1


def train_lda(
    chunks: ChunkSequence,
    n_topics: int = 25,
    iters: int = 1000,
    alpha0: float = 0.1,
    beta0: float = 0.01,
    seed: int = 0,
) -> TopicModel:
    """Train a topic model on the chunks of one source.

    Deterministic for a fixed seed: the sampler consumes one uniform per
    token per sweep from a seeded generator.
    """
    if n_topics < 2:
        raise ValueError("need at least two topics")
    if iters < 1:
        raise ValueError("iters must be positive")

    vocab: dict[str, int] = {}
    for c in chunks.chunks:
        for w in c:
            if w not in vocab:
                vocab[w] = len(vocab)
    if len(vocab) < n_topics:
        raise VocabularyTooSmall(
            f"{len(vocab)} distinct types < {n_topics} topics"
        )

    word_ids = np.array([vocab[w] for c in chunks.chunks for w in c], dtype=np.int32)
    doc_ids = np.repeat(
        np.arange(chunks.n_chunks, dtype=np.int32), [len(c) for c in chunks.chunks]
    )
    n_tokens = word_ids.size
    v_size = len(vocab)

    rng = make_rng(child_seed_sequence(seed, "lda-train"))
    z = rng.integers(0, n_topics, size=n_tokens).astype(np.int32)

    n_dk = np.zeros((chunks.n_chunks, n_topics), dtype=np.int64)
    n_kw = np.zeros((n_topics, v_size), dtype=np.int64)
    n_k = np.zeros(n_topics, dtype=np.int64)
    np.add.at(n_dk, (doc_ids, z), 1)
    np.add.at(n_kw, (z, word_ids), 1)
    np.add.at(n_k, z, 1)

    v_beta = v_size * beta0
    for _ in range(iters):
        uniforms = rng.random(n_tokens)
        _gibbs_sweep(word_ids, doc_ids, z, n_dk, n_kw, n_k, alpha0, beta0, v_beta, uniforms)

    topic_word = (n_kw + beta0) / (n_k[:, None] + v_beta)
    return TopicModel(
        n_topics=n_topics,
        alpha0=alpha0,
        beta0=beta0,
        iters=iters,
        seed=seed,
        vocab=vocab,
        topic_word=topic_word,
        doc_topic_counts=n_dk,
        doc_lengths=np.asarray([len(c) for c in chunks.chunks], dtype=np.int64),
        assignments=z,
        word_ids=word_ids,
        doc_ids=doc_ids,
        corpus_key=corpus_fingerprint(chunks),
    )


def _mixtures_from_counts(counts: np.ndarray, known: np.ndarray, alpha0: float) -> np.ndarray:
    n_topics = counts.shape[1]
    return (counts + alpha0) / (known[:, None] + n_topics * alpha0)


def infer_mixtures(model: TopicModel, chunks: ChunkSequence):
    """Posterior-mean topic mixture of every chunk, as a Trajectory.

    For the chunks the model was trained on, mixtures come straight from the
    held assignment counts.  Any other chunks are folded in against the
    frozen trained counts (out-of-vocabulary words are skipped; a chunk with
    no known words gets the uniform prior mixture).
    """
    from .levy import Trajectory  # local import: levy depends on simplex only

    if corpus_fingerprint(chunks) == model.corpus_key:
        points = _mixtures_from_counts(
            model.doc_topic_counts.astype(np.float64),
            model.doc_lengths.astype(np.float64),
            model.alpha0,
        )
        return Trajectory.from_points(points)

    n_kw_frozen = np.zeros_like(model.topic_word, dtype=np.int64)
    np.add.at(n_kw_frozen, (model.assignments, model.word_ids), 1)
    n_k_frozen = n_kw_frozen.sum(axis=1)
    v_beta = model.vocab_size * model.beta0

    points = np.empty((chunks.n_chunks, model.n_topics))
    for idx, c in enumerate(chunks.chunks):
        ids = np.array([model.vocab[w] for w in c if w in model.vocab], dtype=np.int32)
        if ids.size == 0:
            points[idx] = 1.0 / model.n_topics
            continue
        rng = make_rng(child_seed_sequence(model.seed, "foldin", idx))
        z = rng.integers(0, model.n_topics, size=ids.size).astype(np.int32)
        d_counts = np.bincount(z, minlength=model.n_topics).astype(np.int64)
        for _ in range(25):
            _foldin_sweep(
                ids, z, d_counts, n_kw_frozen, n_k_frozen,
                model.alpha0, model.beta0, v_beta, rng.random(ids.size),
            )
        points[idx] = (d_counts + model.alpha0) / (ids.size + model.n_topics * model.alpha0)
    return Trajectory.from_points(points)


# ---------------------------------------------------------------------
# stationary Dirichlet fit
# ---------------------------------------------------------------------

def _inv_digamma(y: np.ndarray) -> np.ndarray:
    """Inverse digamma by Newton iteration (accurate to ~1e-12)."""
    y = np.asarray(y, dtype=np.float64)
    x = np.where(y >= -2.22, np.exp(y) + 0.5, -1.0 / (y - digamma(1.0)))
    for _ in range(6):
        x = x - (digamma(x) - y) / polygamma(1, x)
    return x


def _dirichlet_mean_loglik(alpha: np.ndarray, mean_log: np.ndarray) -> float:
    return float(
        gammaln(alpha.sum()) - gammaln(alpha).sum() + ((alpha - 1.0) * mean_log).sum()
    )


def fit_stationary_alpha(
    traj_or_points,
    tol: float = 1e-8,
    max_iters: int = 1000,
) -> AlphaVector:
    """Maximum-likelihood Dirichlet fit to a set of mixtures.

    Fixed-point iteration on the digamma stationarity conditions; each step
    cannot decrease the likelihood.  If the iteration cap is hit, the last
    iterate is returned with ``converged=False`` and a
    :class:`NonConvergenceWarning`.
    """
    points = getattr(traj_or_points, "points", traj_or_points)
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 10:
        raise ValueError("need at least 10 mixture points")
    if not np.all(points > 0):
        raise ValueError("mixtures must be strictly positive")

    mean_log = np.log(points).mean(axis=0)
    # moment-matched start (mean and mean-square of the first component)
    m = points.mean(axis=0)
    m2 = float((points[:, 0] ** 2).mean())
    denom = m2 - m[0] ** 2
    a_total = (m[0] - m2) / denom if denom > 1e-12 else points.shape[1]
    alpha = np.maximum(m * max(a_total, 1e-3), 1e-8)

    converged = False
    for _ in range(max_iters):
        new_alpha = _inv_digamma(digamma(alpha.sum()) + mean_log)
        if np.max(np.abs(new_alpha - alpha)) < tol:
            alpha = new_alpha
            converged = True
            break
        alpha = new_alpha
    if not converged:
        warnings.warn(
            "Dirichlet fit hit the iteration cap; returning last iterate",
            NonConvergenceWarning,
            stacklevel=2,
        )
    return AlphaVector(alpha=alpha, converged=converged)
