"""Plain-text network files.

The first non-comment line holds the number of agents; every further line is
``owner target``, meaning ``owner`` buys the edge to ``target``.  ``#`` starts
a comment and blank lines are ignored.  Repeated lines collapse.
"""
from __future__ import annotations

from pathlib import Path

from .graph import IndexOutOfRange, NetworkError, OwnedNetwork, SelfLoop


class ParseError(NetworkError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_network(text: str) -> OwnedNetwork:
    n = None
    strategies: list[set[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 1 or not fields[0].isdigit():
                raise ParseError(lineno, f"expected the number of agents, got {line!r}")
            n = int(fields[0])
            if n < 1:
                raise ParseError(lineno, "a network needs at least one agent")
            strategies = [set() for _ in range(n)]
            continue
        if len(fields) != 2 or not all(f.isdigit() for f in fields):
            raise ParseError(lineno, f"expected 'owner target', got {line!r}")
        a, b = int(fields[0]), int(fields[1])
        if a >= n or b >= n:
            raise IndexOutOfRange(f"line {lineno}: agent index out of range 0..{n - 1} in {line!r}")
        if a == b:
            raise SelfLoop(f"line {lineno}: agent {a} cannot buy an edge to itself")
        strategies[a].add(b)
    if n is None:
        raise ParseError(1, "empty network file")
    return OwnedNetwork(n, tuple(frozenset(s) for s in strategies))


def parse_network_file(path) -> OwnedNetwork:
    return parse_network(Path(path).read_text())


def serialize(net: OwnedNetwork) -> str:
    lines = [str(net.n)] + [f"{a} {b}" for a, b in net.bought_edges]
    return "\n".join(lines) + "\n"


def write_network_file(path, net: OwnedNetwork) -> None:
    Path(path).write_text(serialize(net))
