"""Source ingestion: text cleaning, chunking, and threaded-comment handling."""

from __future__ import annotations

import json
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field

from .errors import (
    CycleDetected,
    DataError,
    DuplicateId,
    EmptyCorpus,
    MissingParent,
    MultipleRoots,
    TooShort,
)

DEFAULT_K_SWEEP = (25, 50, 75, 100, 125, 150, 175, 200, 225, 250)
DEFAULT_N_TOP_WORDS = 15

_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)
_FORBIDDEN_RE = re.compile("[\\s" + re.escape(r"""!"#$%&'()*+,-./:;<=>?@[\]^_`{|}~""") + "]")


@dataclass
class TokenStream:
    """A cleaned, ordered word stream from one source."""

    tokens: list[str]
    source_id: str = ""

    def __post_init__(self):
        if any((not t) or _FORBIDDEN_RE.search(t) for t in self.tokens):
            raise ValueError("tokens must be nonempty, without whitespace or punctuation")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class ChunkingSpec:
    """Words per chunk."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")


@dataclass
class ChunkSequence:
    """Consecutive non-overlapping k-word windows of a stream."""

    chunks: list[list[str]]
    k: int

    def __post_init__(self):
        if len(self.chunks) < 2:
            raise TooShort(f"need at least 2 chunks, got {len(self.chunks)}")
        if any(len(c) != self.k for c in self.chunks):
            raise ValueError("every chunk must hold exactly k tokens")

    @property
    def n_chunks(self) -> int:
        return len(self.chunks)


@dataclass(frozen=True)
class CleanOptions:
    strip_accents: bool = True
    metadata_patterns: tuple[str, ...] = ()


def clean_text(raw: str, opts: CleanOptions | None = None, source_id: str = "") -> TokenStream:
    """Turn raw text into a lowercase word stream.

    Lines starting with any of ``opts.metadata_patterns`` (literal prefixes)
    are dropped before tokenization.  Words are downcased; punctuation and
    digits never survive; accents are folded to their base letters when
    ``opts.strip_accents``.
    """
    opts = opts or CleanOptions()
    if opts.metadata_patterns:
        kept = [
            line for line in raw.split("\n")
            if not any(line.startswith(p) for p in opts.metadata_patterns)
        ]
        raw = "\n".join(kept)
    text = raw.lower()
    if opts.strip_accents:
        text = "".join(
            ch for ch in unicodedata.normalize("NFKD", text)
            if not unicodedata.combining(ch)
        )
    tokens = _WORD_RE.findall(text)
    if not tokens:
        raise EmptyCorpus(f"no tokens survived cleaning for source {source_id!r}")
    return TokenStream(tokens=tokens, source_id=source_id)


def drop_top_words(stream: TokenStream, n: int = DEFAULT_N_TOP_WORDS) -> TokenStream:
    """Remove the n most frequent word types of this stream.

    Frequency ties rank the earlier-first-seen type as more common, so the
    result is deterministic.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return TokenStream(list(stream.tokens), stream.source_id)
    counts = Counter(stream.tokens)
    first_seen: dict[str, int] = {}
    for i, tok in enumerate(stream.tokens):
        first_seen.setdefault(tok, i)
    ranked = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
    drop = set(ranked[:n])
    kept = [t for t in stream.tokens if t not in drop]
    return TokenStream(tokens=kept, source_id=stream.source_id)


def chunk(stream: TokenStream, spec: ChunkingSpec) -> ChunkSequence:
    """Cut the stream into consecutive k-word chunks, discarding the tail."""
    k = spec.k
    n_full = len(stream.tokens) // k
    if n_full < 2:
        raise TooShort(
            f"stream of {len(stream.tokens)} tokens yields {n_full} chunk(s) at k={k}; need 2"
        )
    chunks = [stream.tokens[i * k:(i + 1) * k] for i in range(n_full)]
    return ChunkSequence(chunks=chunks, k=k)


# ---------------------------------------------------------------------
# threaded discussions
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class CommentNode:
    id: str
    parent_id: str | None
    created_utc: int
    body: str


@dataclass
class CommentTree:
    """A submission plus its reply tree, indexed by node id."""

    nodes: dict[str, CommentNode]
    root_id: str
    children: dict[str, list[str]] = field(default_factory=dict)

    @property
    def root(self) -> CommentNode:
        return self.nodes[self.root_id]

    def nodes_by_time(self) -> list[CommentNode]:
        """All nodes in nondecreasing created_utc order, ties by id."""
        return sorted(self.nodes.values(), key=lambda n: (n.created_utc, n.id))

    def depth_of(self, node_id: str) -> int:
        """Path length from a node up to the submission (root has depth 0)."""
        depth = 0
        cur = self.nodes[node_id]
        while cur.parent_id is not None:
            cur = self.nodes[cur.parent_id]
            depth += 1
        return depth


def parse_thread(json_doc: bytes | str) -> CommentTree:
    """Parse and validate a threaded-discussion JSON document.

    The document is an array of objects ``{"id", "parent_id"?, "created_utc"?,
    "body"}``; exactly one object (the submission) lacks ``parent_id``.
    A missing ``created_utc`` defaults to 0.
    """
    if isinstance(json_doc, bytes):
        json_doc = json_doc.decode("utf-8")
    try:
        records = json.loads(json_doc)
    except json.JSONDecodeError as exc:
        raise DataError(f"thread document is not valid JSON: {exc}") from exc
    if not isinstance(records, list):
        raise DataError("thread document must be a JSON array of node objects")

    nodes: dict[str, CommentNode] = {}
    roots: list[str] = []
    for rec in records:
        if not isinstance(rec, dict) or "id" not in rec:
            raise DataError("every node must be an object with an 'id' field")
        node = CommentNode(
            id=str(rec["id"]),
            parent_id=str(rec["parent_id"]) if rec.get("parent_id") is not None else None,
            created_utc=int(rec.get("created_utc", 0)),
            body=str(rec.get("body", "")),
        )
        if node.id in nodes:
            raise DuplicateId(f"duplicate node id {node.id!r}")
        nodes[node.id] = node
        if node.parent_id is None:
            roots.append(node.id)

    if len(roots) > 1:
        raise MultipleRoots(f"{len(roots)} nodes lack parent_id: {roots!r}")
    for node in nodes.values():
        if node.parent_id is not None and node.parent_id not in nodes:
            raise MissingParent(f"node {node.id!r} references missing parent {node.parent_id!r}")
    if not roots:
        raise CycleDetected("no root node; parent links must contain a cycle")

    children: dict[str, list[str]] = {nid: [] for nid in nodes}
    for node in nodes.values():
        if node.parent_id is not None:
            children[node.parent_id].append(node.id)
    for kids in children.values():
        kids.sort()

    # every node must be reachable from the root, else the links cycle
    seen = {roots[0]}
    stack = [roots[0]]
    while stack:
        for kid in children[stack.pop()]:
            if kid not in seen:
                seen.add(kid)
                stack.append(kid)
    if len(seen) != len(nodes):
        orphaned = sorted(set(nodes) - seen)
        raise CycleDetected(f"nodes unreachable from root (cyclic parents): {orphaned!r}")

    return CommentTree(nodes=nodes, root_id=roots[0], children=children)


def linearize_tree(
    tree: CommentTree,
    opts: CleanOptions | None = None,
    source_id: str = "",
) -> TokenStream:
    """Concatenate node bodies in time order and clean the result."""
    bodies = [n.body for n in tree.nodes_by_time()]
    return clean_text("\n".join(bodies), opts=opts, source_id=source_id or tree.root_id)
