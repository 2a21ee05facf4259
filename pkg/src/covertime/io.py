"""Text formats for graphs and chains, and JSON output.

Graph file::

    # comment
    n m
    u v        (m lines, 0-indexed)

Chain file::

    n
    u v p      (sparse triplets; omitted entries are 0)

JSON floats are written with 17 significant digits so values round-trip.
"""
import hashlib
import math
from pathlib import Path

import numpy as np

from .chain import Graph, MarkovChain
from .errors import ChainValidationError, ParseError


def _content_lines(text):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split()


def parse_graph(text: str) -> Graph:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty graph file")
    lineno, head = lines[0]
    try:
        n, m = int(head[0]), int(head[1])
    except (ValueError, IndexError):
        raise ParseError(f"line {lineno}: expected 'n m'") from None
    if len(lines) - 1 != m:
        raise ParseError(f"header promises {m} edges, found {len(lines) - 1}")
    edges = []
    for lineno, parts in lines[1:]:
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except (ValueError, IndexError):
            raise ParseError(f"line {lineno}: expected 'u v'") from None
    try:
        return Graph.from_edges(n, edges)
    except ChainValidationError as exc:
        raise ParseError(str(exc)) from None


def parse_chain(text: str) -> MarkovChain:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty chain file")
    lineno, head = lines[0]
    try:
        n = int(head[0])
    except (ValueError, IndexError):
        raise ParseError(f"line {lineno}: expected 'n'") from None
    rows = [[] for _ in range(n)]
    for lineno, parts in lines[1:]:
        try:
            u, v, p = int(parts[0]), int(parts[1]), float(parts[2])
        except (ValueError, IndexError):
            raise ParseError(f"line {lineno}: expected 'u v p'") from None
        if not 0 <= u < n:
            raise ParseError(f"line {lineno}: state {u} out of range")
        rows[u].append((v, p))
    return MarkovChain(n, rows)


def read_graph(path) -> Graph:
    return parse_graph(Path(path).read_text())


def read_chain(path) -> MarkovChain:
    return parse_chain(Path(path).read_text())


def format_graph(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out += [f"{u} {v}" for u, v in sorted(g.edges)]
    return "\n".join(out) + "\n"


def format_chain(m: MarkovChain) -> str:
    out = [str(m.n)]
    for u in range(m.n):
        idx, pr = m.row(u)
        out += [f"{u} {v} {_fmt_float(p)}" for v, p in zip(idx, pr)]
    return "\n".join(out) + "\n"


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -- JSON ---------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if x == int(x) and abs(x) < 1e17:
        return f"{x:.1f}"
    return format(x, ".17g")


def _encode(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        import json
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            _encode(str(k), out)
            out.append(": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, set, frozenset, np.ndarray)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else list(
            obj.tolist() if isinstance(obj, np.ndarray) else obj)
        out.append("[")
        for i, v in enumerate(items):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    elif hasattr(obj, "to_dict"):
        _encode(obj.to_dict(), out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    out = []
    _encode(obj, out)
    return "".join(out)
