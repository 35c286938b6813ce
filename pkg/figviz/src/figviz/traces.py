"""Loading and validating the recompiler's CSV trace files.

Each producing command has a registered column set; a figure only needs the
columns of the command it visualises.  All values are plain floats; no
numerical work happens here beyond parsing.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

# column registry per producing command (parameter columns come in addition)
REQUIRED_COLUMNS = {
    "simulate": ("iter", "energy", "t"),
    "recompile": ("iter", "energy", "bound", "fidelity", "stage"),
    "eliminate": ("iter", "energy", "defect", "fidelity", "removed"),
    "sweep": ("iter", "t", "fidelity"),
}


class TraceError(ValueError):
    pass


@dataclass
class TraceFrame:
    """Columns of one trace CSV, in file order."""

    path: str
    names: tuple[str, ...]
    columns: dict[str, list[float]]

    @classmethod
    def from_csv(cls, path):
        with open(path, encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            try:
                names = tuple(next(reader))
            except StopIteration:
                raise TraceError(f"{path}: empty file, expected a header row") from None
            columns = {name: [] for name in names}
            for row in reader:
                if len(row) != len(names):
                    raise TraceError(f"{path}: ragged row with {len(row)} cells, expected {len(names)}")
                for name, cell in zip(names, row):
                    columns[name].append(float(cell))
        return cls(str(path), names, columns)

    def __len__(self):
        return len(self.columns[self.names[0]]) if self.names else 0

    @property
    def param_names(self):
        return [n for n in self.names if n.startswith("param")]

    def require(self, kind):
        missing = [c for c in REQUIRED_COLUMNS[kind] if c not in self.columns]
        if missing:
            raise TraceError(f"{self.path}: missing columns {missing} for a {kind} trace")
        if len(self) == 0:
            raise TraceError(f"{self.path}: no data rows")
        iters = self.columns["iter"]
        if any(b < a for a, b in zip(iters, iters[1:])):
            raise TraceError(f"{self.path}: iteration column is not monotone")
        return self

    def removal_iterations(self):
        """Iterations at which the eliminate pass deleted a parameter."""
        return [
            int(self.columns["iter"][i])
            for i, slot in enumerate(self.columns["removed"])
            if slot >= 0.0
        ]
