"""Campaign clustering of call transcripts: TF-IDF, LSI, cosine distance, DBSCAN, medoids."""

from __future__ import annotations

import logging
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from robocallguard.text import UNK, stopwords
from robocallguard.transcription import TranscriptDoc

logger = logging.getLogger(__name__)

DEFAULT_K = 60
DEFAULT_EPS = 0.4
DEFAULT_MIN_PTS = 3
NOISE = -1


@dataclass
class DocTermMatrix:
    docs: list[str]
    vocab: list[str]
    weights: np.ndarray
    zero_rows: list[str] = field(default_factory=list)


@dataclass
class TopicSpace:
    k: int
    docs: list[str]
    doc_vectors: np.ndarray
    singular_values: np.ndarray
    term_vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.doc_vectors @ self.term_vectors


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    eps: float
    min_pts: int
    core: np.ndarray

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    @property
    def n_noise(self) -> int:
        return int((self.labels == NOISE).sum())

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster_id)


def doc_terms(doc: TranscriptDoc) -> list[str]:
    stop = stopwords()
    return [t for t in doc.caller_tokens if t not in stop and t != UNK]


def build_tfidf(corpus: Sequence[TranscriptDoc]) -> DocTermMatrix:
    """tf = count / doc length, idf = ln(N / df); nonzero rows are L2-normalized."""
    if not corpus:
        raise ValueError("cannot build a document-term matrix from an empty corpus")
    term_lists = [doc_terms(d) for d in corpus]
    vocab = sorted({t for terms in term_lists for t in terms})
    col = {t: j for j, t in enumerate(vocab)}
    n = len(corpus)
    df = Counter(t for terms in term_lists for t in set(terms))
    weights = np.zeros((n, len(vocab)))
    for i, terms in enumerate(term_lists):
        if not terms:
            continue
        for term, count in Counter(terms).items():
            weights[i, col[term]] = count / len(terms) * math.log(n / df[term])
        norm = np.linalg.norm(weights[i])
        if norm > 0:
            weights[i] /= norm
    docs = [d.doc_id for d in corpus]
    zero_rows = [docs[i] for i in range(n) if not weights[i].any()]
    if zero_rows:
        logger.warning("%d document(s) have all-zero weights: %s", len(zero_rows), ", ".join(zero_rows[:5]))
    return DocTermMatrix(docs, vocab, weights, zero_rows)


def lsi_project(m: DocTermMatrix, k: int) -> TopicSpace:
    """Rank-k truncated SVD; each topic's largest-magnitude term loading is made positive."""
    n_docs, n_terms = m.weights.shape
    if not 1 <= k <= min(n_docs, n_terms):
        raise ValueError(f"k={k} outside [1, min(docs, terms)] = [1, {min(n_docs, n_terms)}]")
    if not m.weights.any():
        raise ValueError("document-term matrix is all zero")
    u, s, vt = np.linalg.svd(m.weights, full_matrices=False)
    u, s, vt = u[:, :k], s[:k], vt[:k]
    for i in range(k):
        if vt[i, np.argmax(np.abs(vt[i]))] < 0:
            vt[i] = -vt[i]
            u[:, i] = -u[:, i]
    return TopicSpace(k, list(m.docs), u * s, s, vt)


def _zero_mask(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1)
    # projections of documents orthogonal to every topic come out as rounding noise
    tol = 1e-10 * max(float(norms.max(initial=0.0)), 1.0)
    return norms <= tol


def cosine_similarity(space: TopicSpace | np.ndarray) -> np.ndarray:
    """Pairwise cosine; rows that are (numerically) zero get similarity 0 everywhere."""
    vectors = space.doc_vectors if isinstance(space, TopicSpace) else np.asarray(space, dtype=float)
    zero = _zero_mask(vectors)
    unit = np.zeros_like(vectors)
    unit[~zero] = vectors[~zero] / np.linalg.norm(vectors[~zero], axis=1, keepdims=True)
    sim = np.clip(unit @ unit.T, -1.0, 1.0)
    idx = np.flatnonzero(~zero)
    sim[idx, idx] = 1.0
    if zero.any():
        logger.info("%d zero topic vector(s) get similarity 0", int(zero.sum()))
    return sim


def to_distance(sim: np.ndarray) -> np.ndarray:
    """d = 1 - s clamped to [0, 2], zero diagonal."""
    sim = np.asarray(sim, dtype=float)
    if sim.size and (sim.min() < -1 - 1e-9 or sim.max() > 1 + 1e-9 or np.isnan(sim).any()):
        raise ValueError("similarities must lie in [-1, 1]")
    dist = np.clip(1.0 - sim, 0.0, 2.0)
    np.fill_diagonal(dist, 0.0)
    return dist


def _check_distance(dist: np.ndarray) -> np.ndarray:
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {dist.shape}")
    if not np.allclose(dist, dist.T, atol=1e-12, rtol=0):
        raise ValueError("distance matrix is not symmetric")
    if np.any(np.diag(dist) != 0):
        raise ValueError("distance matrix must have a zero diagonal")
    return dist


def dbscan(dist: np.ndarray, eps: float, min_pts: int) -> ClusterAssignment:
    """Density clustering over a precomputed distance matrix.

    A point is core when at least ``min_pts`` points (itself included) lie within
    ``eps``. Clusters are numbered in the order their first core point appears;
    a border point reachable from several clusters joins the earliest one.
    """
    dist = _check_distance(dist)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be at least 1")
    n = dist.shape[0]
    neighbors = [np.flatnonzero(dist[i] <= eps) for i in range(n)]
    core = np.array([len(nb) >= min_pts for nb in neighbors], dtype=bool)
    labels = np.full(n, NOISE, dtype=int)
    cluster = 0
    for i in range(n):
        if labels[i] != NOISE or not core[i]:
            continue
        labels[i] = cluster
        queue = deque([i])
        while queue:
            p = queue.popleft()
            for q in neighbors[p]:
                if labels[q] == NOISE:
                    labels[q] = cluster
                    if core[q]:
                        queue.append(q)
        cluster += 1
    return ClusterAssignment(labels, float(eps), int(min_pts), core)


def representatives(assignment: ClusterAssignment, doc_ids: Sequence[str], dist: np.ndarray) -> dict[int, str]:
    """Medoid of each cluster; ties go to the smaller doc id."""
    reps = {}
    for cid in range(assignment.n_clusters):
        members = assignment.members(cid)
        sums = dist[np.ix_(members, members)].sum(axis=1)
        best = min(range(len(members)), key=lambda j: (sums[j], doc_ids[members[j]]))
        reps[cid] = doc_ids[members[best]]
    return reps


def k_distances(dist: np.ndarray, min_pts: int) -> np.ndarray:
    """Sorted distance from each point to its ``min_pts``-th nearest point (itself counts)."""
    dist = np.asarray(dist, dtype=float)
    kth = min(min_pts, dist.shape[0]) - 1
    return np.sort(np.sort(dist, axis=1)[:, kth])


def elbow_eps(dist: np.ndarray, min_pts: int = DEFAULT_MIN_PTS) -> float:
    """Pick eps inside the sharpest rise of the sorted k-distance curve.

    The curve is flat across dense groups and jumps where outliers start; eps is
    the midpoint of the largest jump between consecutive values, so it clears
    the within-group distances with the widest margin on both sides.
    """
    kd = k_distances(dist, min_pts)
    if len(kd) < 2 or kd[-1] == kd[0]:
        return float(kd[-1]) if len(kd) and kd[-1] > 0 else DEFAULT_EPS
    j = int(np.argmax(np.diff(kd)))
    return float((kd[j] + kd[j + 1]) / 2)


@dataclass
class ClusterResult:
    matrix: DocTermMatrix
    space: TopicSpace
    distance: np.ndarray
    assignment: ClusterAssignment
    reps: dict[int, str]

    @property
    def labels(self) -> Mapping[str, int]:
        return dict(zip(self.matrix.docs, self.assignment.labels.tolist()))


def cluster_corpus(
    corpus: Sequence[TranscriptDoc],
    k: int = DEFAULT_K,
    eps: float | None = DEFAULT_EPS,
    min_pts: int = DEFAULT_MIN_PTS,
) -> ClusterResult:
    """Whole pipeline. ``eps=None`` picks eps with :func:`elbow_eps`."""
    matrix = build_tfidf(corpus)
    space = lsi_project(matrix, k)
    distance = to_distance(cosine_similarity(space))
    if eps is None:
        eps = elbow_eps(distance, min_pts)
    assignment = dbscan(distance, eps, min_pts)
    reps = representatives(assignment, matrix.docs, distance) if assignment.n_clusters else {}
    return ClusterResult(matrix, space, distance, assignment, reps)
