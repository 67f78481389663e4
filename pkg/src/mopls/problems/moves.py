"""Neighborhood moves and batches of moves.

Single moves are small frozen dataclasses.  Search code mostly works with
:class:`MoveSet`, a struct-of-arrays batch that lets problems compute all
objective deltas of a neighborhood in one vectorized pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

TWO_EDGE, DELETE, INSERT, EXCHANGE = 0, 1, 2, 3
KIND_NAMES = ("two-edge-exchange", "node-delete", "node-insert", "node-exchange")


@dataclass(frozen=True)
class TwoEdgeExchange:
    """Remove edges leaving positions ``i`` and ``j`` (``i < j``); reverse ``i+1..j``."""

    i: int
    j: int


@dataclass(frozen=True)
class NodeDelete:
    position: int


@dataclass(frozen=True)
class NodeInsert:
    """Insert ``node`` so that it ends up at index ``position``.

    The node is placed between the current elements ``position - 1`` and
    ``position`` (cyclically), which makes ``NodeInsert(v, p)`` the inverse of
    ``NodeDelete(p)`` on the route ``v`` was removed from.
    """

    node: int
    position: int


@dataclass(frozen=True)
class NodeExchange:
    position: int
    node: int


Move = Union[TwoEdgeExchange, NodeDelete, NodeInsert, NodeExchange]


class MoveSet:
    """Batch of moves stored as parallel arrays ``kind``, ``a``, ``b``.

    Payload layout per kind: two-edge ``(i, j)``, delete ``(position, -1)``,
    insert ``(node, position)``, exchange ``(position, node)``.
    """

    __slots__ = ("kind", "a", "b")

    def __init__(self, kind: np.ndarray, a: np.ndarray, b: np.ndarray):
        self.kind = np.asarray(kind, dtype=np.int8)
        self.a = np.asarray(a, dtype=np.int64)
        self.b = np.asarray(b, dtype=np.int64)

    @classmethod
    def empty(cls) -> MoveSet:
        z = np.empty(0, dtype=np.int64)
        return cls(z, z, z)

    @classmethod
    def of(cls, kind: int, a: np.ndarray, b: np.ndarray | None = None) -> MoveSet:
        a = np.asarray(a, dtype=np.int64)
        b = np.full(len(a), -1, dtype=np.int64) if b is None else b
        return cls(np.full(len(a), kind, dtype=np.int8), a, b)

    @classmethod
    def concat(cls, parts: list[MoveSet]) -> MoveSet:
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls.empty()
        if len(parts) == 1:
            return parts[0]
        return cls(
            np.concatenate([p.kind for p in parts]),
            np.concatenate([p.a for p in parts]),
            np.concatenate([p.b for p in parts]),
        )

    @classmethod
    def from_moves(cls, moves: list[Move]) -> MoveSet:
        kind, a, b = [], [], []
        for m in moves:
            k, x, y = encode(m)
            kind.append(k)
            a.append(x)
            b.append(y)
        return cls(np.array(kind, dtype=np.int8), np.array(a, dtype=np.int64), np.array(b, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.kind)

    def take(self, idx) -> MoveSet:
        return MoveSet(self.kind[idx], self.a[idx], self.b[idx])

    def move(self, k: int) -> Move:
        return decode(int(self.kind[k]), int(self.a[k]), int(self.b[k]))

    def __iter__(self):
        for k in range(len(self)):
            yield self.move(k)

    def counts(self) -> dict[str, int]:
        return {KIND_NAMES[k]: int(np.sum(self.kind == k)) for k in range(4)}


def encode(m: Move) -> tuple[int, int, int]:
    if isinstance(m, TwoEdgeExchange):
        return TWO_EDGE, m.i, m.j
    if isinstance(m, NodeDelete):
        return DELETE, m.position, -1
    if isinstance(m, NodeInsert):
        return INSERT, m.node, m.position
    if isinstance(m, NodeExchange):
        return EXCHANGE, m.position, m.node
    raise TypeError(f"not a move: {m!r}")


def decode(kind: int, a: int, b: int) -> Move:
    if kind == TWO_EDGE:
        return TwoEdgeExchange(a, b)
    if kind == DELETE:
        return NodeDelete(a)
    if kind == INSERT:
        return NodeInsert(a, b)
    if kind == EXCHANGE:
        return NodeExchange(a, b)
    raise ValueError(f"unknown move kind {kind}")
