import math

import numpy as np
import pytest

from protogeom.data import BatchPlan, EmbeddingSet


def random_unit(d, n, rng):
    h = rng.standard_normal((d, n))
    return h / np.linalg.norm(h, axis=0)


def random_embeddings(n, k, d, seed, cyclic=True):
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % k if cyclic else rng.integers(0, k, n)
    return EmbeddingSet(random_unit(d, n, rng), labels, k)


def full_plan(emb, n_w=0):
    return BatchPlan(np.arange(emb.n), n_w)


def brute_scl(vectors, labels, tau):
    """Batch SCL by explicit loops over anchors, positives and denominators."""
    n = vectors.shape[1]
    cols = [vectors[:, i] for i in range(n)]
    total = 0.0
    for i in range(n):
        positives = [j for j in range(n) if j != i and labels[j] == labels[i]]
        if not positives:
            continue
        denom = math.fsum(math.exp(float(cols[i] @ cols[l]) / tau) for l in range(n) if l != i)
        total += math.fsum(math.log(denom) - float(cols[i] @ cols[j]) / tau for j in positives) / len(positives)
    return total


def replicate(emb, prototypes, n_w):
    """Literal batch: samples followed by n_w copies of every prototype."""
    k = prototypes.k
    vectors = np.concatenate([emb.vectors] + [prototypes.vectors] * n_w, axis=1)
    labels = np.concatenate([emb.labels] + [np.arange(k)] * n_w)
    return EmbeddingSet(vectors, labels, k)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for key, (ok, detail) in REPORT.items():
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}")
