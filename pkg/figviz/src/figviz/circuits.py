"""Gate counting for the recompiler's circuit text format.

One gate per line: a generator token ("Z", "ZZ", "CY", ...), its qubit
indices, then a binding ("pN" or "fixed:ANGLE") and an optional "inv".
A leading "C" marks a control qubit.  '#' starts a comment line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

_GEN_RE = re.compile(r"^(C?)([XYZ]+)$")


@dataclass(frozen=True)
class ResourceCount:
    one_qubit: int
    two_qubit: int

    @property
    def total(self):
        return self.one_qubit + self.two_qubit


def count_gates(text, path="<circuit>"):
    one = two = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        token = line.split()[0]
        m = _GEN_RE.match(token)
        if m is None:
            raise ValueError(f"{path}:{lineno}: malformed generator token {token!r}")
        size = len(m.group(2)) + (1 if m.group(1) else 0)
        if size == 1:
            one += 1
        elif size == 2:
            two += 1
    return ResourceCount(one, two)


def count_gates_file(path):
    with open(path, encoding="utf-8") as handle:
        return count_gates(handle.read(), path=str(path))
