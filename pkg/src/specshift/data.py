"""Dataset container and the line-oriented text serialization.

Records are one comma-separated line per observation — d coordinates then
the label — printed with 17 significant digits so that parsing the text
back reproduces every float64 bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Dataset:
    """Paired inputs in [0,1]^d and scalar labels."""

    x: np.ndarray
    y: np.ndarray
    domain: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        y = np.ascontiguousarray(self.y, dtype=float).ravel()
        if x.shape[0] != y.shape[0]:
            raise InputError("x and y lengths differ")
        if not np.all(np.isfinite(y)):
            raise InputError("labels must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


def _fmt(v: float) -> str:
    return format(v, ".17g")


def dataset_to_text(data: Dataset) -> str:
    lines = []
    for i in range(data.n):
        coords = [_fmt(c) for c in data.x[i]]
        coords.append(_fmt(data.y[i]))
        lines.append(",".join(coords))
    return "\n".join(lines) + "\n"


def dataset_from_text(text: str) -> Dataset:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise InputError(f"line {lineno}: {exc}") from None
    if not rows:
        raise InputError("no records found")
    width = len(rows[0])
    if width < 2 or any(len(r) != width for r in rows):
        raise InputError("records must all have d coordinates plus a label")
    arr = np.asarray(rows, dtype=float)
    return Dataset(x=arr[:, :-1], y=arr[:, -1])
