import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import levyflow as lf
from levyflow.errors import (
    CycleDetected,
    DuplicateId,
    EmptyCorpus,
    MissingParent,
    MultipleRoots,
    TooShort,
)

from conftest import SEVEN_NODE_THREAD


class TestCleanText:
    def test_punctuation_and_case(self):
        assert lf.clean_text("Hello, World!").tokens == ["hello", "world"]

    def test_accent_folding(self):
        assert lf.clean_text("déjà vu.").tokens == ["deja", "vu"]

    def test_accents_kept_when_disabled(self):
        opts = lf.CleanOptions(strip_accents=False)
        assert lf.clean_text("déjà vu.", opts).tokens == ["déjà", "vu"]

    def test_digits_removed(self):
        assert lf.clean_text("3 cats and 4 dogs").tokens == ["cats", "and", "dogs"]

    def test_metadata_lines_dropped(self):
        raw = "M. le Président: la séance est ouverte\nles travaux continuent\n"
        opts = lf.CleanOptions(metadata_patterns=("M. le Président",))
        toks = lf.clean_text(raw, opts).tokens
        assert toks == ["les", "travaux", "continuent"]
        assert "president" not in toks and "seance" not in toks

    def test_empty_result_raises(self):
        with pytest.raises(EmptyCorpus):
            lf.clean_text("123 456 !!!")


class TestDropTopWords:
    def test_single_type(self):
        s = lf.TokenStream(["a", "a", "b"])
        assert lf.drop_top_words(s, 1).tokens == ["b"]

    def test_two_types(self):
        s = lf.TokenStream(["a", "b", "a", "b", "c"])
        assert lf.drop_top_words(s, 2).tokens == ["c"]

    def test_tie_breaks_by_first_occurrence(self):
        # x and y both occur twice; x was seen first so it counts as more common
        s = lf.TokenStream(["x", "y", "x", "y"])
        assert lf.drop_top_words(s, 1).tokens == ["y", "y"]

    def test_zipf_sample_removes_top_types(self):
        rng = np.random.default_rng(42)
        vocab = [f"w{i:03d}" for i in range(200)]
        weights = 1.0 / np.arange(1, 201)
        weights /= weights.sum()
        toks = rng.choice(vocab, size=1000, p=weights).tolist()
        s = lf.TokenStream(toks)
        counts = Counter(toks)
        top15 = {
            t for t, _ in sorted(
                counts.items(), key=lambda kv: (-kv[1], toks.index(kv[0]))
            )[:15]
        }
        survivors = set(lf.drop_top_words(s, 15).tokens)
        assert not (survivors & top15)

    def test_survivor_order_preserved(self):
        s = lf.TokenStream(["a", "c", "a", "d", "c", "a", "e"])
        out = lf.drop_top_words(s, 1).tokens
        assert out == ["c", "d", "c", "e"]

    def test_n_zero_is_identity(self):
        s = lf.TokenStream(["a", "b"])
        assert lf.drop_top_words(s, 0).tokens == ["a", "b"]

    def test_oversized_n_empties_stream(self):
        s = lf.TokenStream(["a", "b"])
        out = lf.drop_top_words(s, 10)
        assert out.tokens == []
        with pytest.raises(TooShort):
            lf.chunk(out, lf.ChunkingSpec(1))


class TestChunk:
    def test_basic_windows(self):
        s = lf.TokenStream([f"w{i}" if False else "tok" for i in range(10)])
        seq = lf.chunk(s, lf.ChunkingSpec(3))
        assert seq.n_chunks == 3
        assert all(len(c) == 3 for c in seq.chunks)

    def test_single_chunk_is_too_short(self):
        s = lf.TokenStream(["tok"] * 250)
        with pytest.raises(TooShort):
            lf.chunk(s, lf.ChunkingSpec(250))

    def test_sixty_chunks_at_largest_scale(self):
        s = lf.TokenStream(["tok"] * (60 * 250))
        seq = lf.chunk(s, lf.ChunkingSpec(250))
        assert seq.n_chunks == 60

    @given(n_tokens=st.integers(min_value=2, max_value=400), k=st.integers(min_value=1, max_value=60))
    @settings(max_examples=60, deadline=None)
    def test_concatenation_is_prefix(self, n_tokens, k):
        toks = [f"t{i}" for i in range(n_tokens)]
        s = lf.TokenStream(toks)
        if n_tokens // k < 2:
            with pytest.raises(TooShort):
                lf.chunk(s, lf.ChunkingSpec(k))
            return
        seq = lf.chunk(s, lf.ChunkingSpec(k))
        flat = [t for c in seq.chunks for t in c]
        assert flat == toks[: seq.n_chunks * k]


class TestParseThread:
    def test_minimal_tree(self):
        doc = json.dumps([
            {"id": "s", "body": "hello"},
            {"id": "c1", "parent_id": "s", "created_utc": 1, "body": "reply"},
        ]).encode()
        tree = lf.parse_thread(doc)
        assert tree.root_id == "s"
        assert tree.children["s"] == ["c1"]

    def test_missing_parent(self):
        doc = json.dumps([
            {"id": "s", "body": "x"},
            {"id": "c", "parent_id": "zzz", "created_utc": 1, "body": "y"},
        ]).encode()
        with pytest.raises(MissingParent):
            lf.parse_thread(doc)

    def test_duplicate_id(self):
        doc = json.dumps([
            {"id": "s", "body": "x"},
            {"id": "s", "parent_id": "s", "created_utc": 1, "body": "y"},
        ]).encode()
        with pytest.raises(DuplicateId):
            lf.parse_thread(doc)

    def test_multiple_roots(self):
        doc = json.dumps([{"id": "a", "body": "x"}, {"id": "b", "body": "y"}]).encode()
        with pytest.raises(MultipleRoots):
            lf.parse_thread(doc)

    def test_cycle_detected(self):
        doc = json.dumps([
            {"id": "s", "body": "x"},
            {"id": "a", "parent_id": "b", "created_utc": 1, "body": "y"},
            {"id": "b", "parent_id": "a", "created_utc": 2, "body": "z"},
        ]).encode()
        with pytest.raises(CycleDetected):
            lf.parse_thread(doc)

    def test_branching_factor(self, seven_node_tree):
        assert len(seven_node_tree.children["c1"]) == 2


class TestLinearizeTree:
    def test_time_order(self):
        doc = json.dumps([
            {"id": "s", "created_utc": 0, "body": "root"},
            {"id": "a", "parent_id": "s", "created_utc": 3, "body": "third"},
            {"id": "b", "parent_id": "s", "created_utc": 1, "body": "first"},
            {"id": "c", "parent_id": "s", "created_utc": 2, "body": "second"},
        ]).encode()
        stream = lf.linearize_tree(lf.parse_thread(doc))
        assert stream.tokens == ["root", "first", "second", "third"]

    def test_ties_break_by_id(self):
        doc = json.dumps([
            {"id": "s", "created_utc": 0, "body": "root"},
            {"id": "b", "parent_id": "s", "created_utc": 5, "body": "bbb"},
            {"id": "a", "parent_id": "s", "created_utc": 5, "body": "aaa"},
        ]).encode()
        stream = lf.linearize_tree(lf.parse_thread(doc))
        assert stream.tokens == ["root", "aaa", "bbb"]

    def test_seven_node_matches_manual_concatenation(self, seven_node_tree):
        ordered = sorted(SEVEN_NODE_THREAD, key=lambda n: (n.get("created_utc", 0), n["id"]))
        expected = lf.clean_text("\n".join(n["body"] for n in ordered)).tokens
        assert lf.linearize_tree(seven_node_tree).tokens == expected

    def test_invariant_to_input_order(self, seven_node_doc):
        base = lf.linearize_tree(lf.parse_thread(seven_node_doc)).tokens
        shuffled = json.loads(seven_node_doc)
        shuffled = [shuffled[i] for i in [3, 0, 6, 1, 5, 2, 4]]
        again = lf.linearize_tree(lf.parse_thread(json.dumps(shuffled).encode())).tokens
        assert again == base
