"""Plain-text instance files.

Layout::

    MTSP <n> <d>                 |  MTSPWP <n> <d1> <d2>
    PLANE 1                      |  PLANE 1
    x y      (n lines)           |  x y      (n lines)
    ...                          |  ...
                                 |  PROFITS
                                 |  p1 .. pd2  (n lines)

Floats are written with ``repr`` so a round trip is bit exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from mopls.problems.base import DEFAULT_CANDIDATES
from mopls.problems.mtsp import MTSPInstance
from mopls.problems.mtspwp import MTSPWPInstance


class InstanceFormatError(ValueError):
    pass


def format_instance(inst) -> str:
    lines = []
    if isinstance(inst, MTSPWPInstance):
        lines.append(f"MTSPWP {inst.n} {inst.d1} {inst.d2}")
    elif isinstance(inst, MTSPInstance):
        lines.append(f"MTSP {inst.n} {inst.d}")
    else:
        raise TypeError(f"unsupported instance {inst!r}")
    for k, plane in enumerate(inst.coords, start=1):
        lines.append(f"PLANE {k}")
        lines.extend(f"{x!r} {y!r}" for x, y in plane.tolist())
    if isinstance(inst, MTSPWPInstance):
        lines.append("PROFITS")
        lines.extend(" ".join(repr(v) for v in row) for row in inst.profits.tolist())
    return "\n".join(lines) + "\n"


def write_instance(inst, path: str | Path) -> None:
    Path(path).write_text(format_instance(inst))


def parse_instance(text: str, candidates: int = DEFAULT_CANDIDATES, name: str = ""):
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows:
        raise InstanceFormatError("empty instance file")
    head = rows[0]
    try:
        if head[0] == "MTSP" and len(head) == 3:
            n, planes, d2 = int(head[1]), int(head[2]), 0
        elif head[0] == "MTSPWP" and len(head) == 4:
            n, planes, d2 = int(head[1]), int(head[2]), int(head[3])
        else:
            raise InstanceFormatError(f"bad header: {' '.join(head)}")
        pos = 1
        coords = np.empty((planes, n, 2))
        for k in range(planes):
            if rows[pos] != ["PLANE", str(k + 1)]:
                raise InstanceFormatError(f"expected 'PLANE {k + 1}', got {' '.join(rows[pos])}")
            coords[k] = np.array(rows[pos + 1 : pos + 1 + n], dtype=float)
            pos += 1 + n
        if head[0] == "MTSP":
            inst = MTSPInstance(coords, candidates, name=name)
        else:
            if rows[pos] != ["PROFITS"]:
                raise InstanceFormatError("expected PROFITS block")
            profits = np.array(rows[pos + 1 : pos + 1 + n], dtype=float).reshape(n, d2)
            pos += 1 + n
            inst = MTSPWPInstance(coords, profits, candidates, name=name)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(f"malformed instance: {exc}") from exc
    if pos != len(rows):
        raise InstanceFormatError("trailing data after instance")
    return inst


def read_instance(path: str | Path, candidates: int = DEFAULT_CANDIDATES):
    path = Path(path)
    return parse_instance(path.read_text(), candidates, name=path.stem)
