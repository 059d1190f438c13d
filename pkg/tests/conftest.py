import json

import numpy as np
import pytest

import levyflow as lf


@pytest.fixture
def two_topic_stream():
    """Synthetic stream alternating between two disjoint vocabularies."""

    def build(n_chunks=80, k=25, seed=0, prefix=""):
        rng = np.random.default_rng(seed)
        vocab_a = [f"{prefix}aa{i}" for i in range(30)]
        vocab_b = [f"{prefix}bb{i}" for i in range(30)]
        toks = []
        for c in range(n_chunks):
            pool = vocab_a if c % 2 == 0 else vocab_b
            toks.extend(rng.choice(pool, size=k).tolist())
        return lf.TokenStream(toks, "synthetic")

    return build


SEVEN_NODE_THREAD = [
    {"id": "s", "body": "start topic words"},
    {"id": "c1", "parent_id": "s", "created_utc": 10, "body": "alpha bravo"},
    {"id": "c2", "parent_id": "s", "created_utc": 20, "body": "charlie"},
    {"id": "c3", "parent_id": "c1", "created_utc": 30, "body": "delta echo"},
    {"id": "c4", "parent_id": "c1", "created_utc": 40, "body": "foxtrot"},
    {"id": "c5", "parent_id": "c3", "created_utc": 50, "body": "golf"},
    {"id": "c6", "parent_id": "c2", "created_utc": 60, "body": "hotel india"},
]


@pytest.fixture
def seven_node_doc():
    return json.dumps(SEVEN_NODE_THREAD).encode("utf-8")


@pytest.fixture
def seven_node_tree(seven_node_doc):
    return lf.parse_thread(seven_node_doc)


def make_star_tree(n_children=5):
    nodes = [{"id": "s", "body": "root"}]
    nodes += [
        {"id": f"c{i}", "parent_id": "s", "created_utc": i, "body": f"word{i}"}
        for i in range(n_children)
    ]
    return lf.parse_thread(json.dumps(nodes).encode())


def make_chain_tree(length=4):
    nodes = [{"id": "s", "body": "root"}]
    parent = "s"
    for i in range(length):
        nodes.append(
            {"id": f"c{i}", "parent_id": parent, "created_utc": i, "body": f"word{i}"}
        )
        parent = f"c{i}"
    return lf.parse_thread(json.dumps(nodes).encode())
