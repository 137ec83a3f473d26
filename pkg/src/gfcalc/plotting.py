"""Regularization curves: delimited rows and rendered figures.

A curve family samples the instantiated representative of a generalized
function on a rational grid, once per requested parameter value.  Rows
are exact; the figure is a float rendering of the same data.
"""

from __future__ import annotations

import csv
from fractions import Fraction
from typing import Sequence, TextIO

from .gsf import GSFunction, piecewise_at_eps
from .rationals import as_fraction

CSV_HEADER = ("eps", "x", "value")


def regularization_rows(f: GSFunction, eps_list: Sequence[Fraction],
                        grid: int) -> list[tuple[Fraction, Fraction, Fraction]]:
    """Exact (eps, x, value) samples on an endpoint-inclusive grid."""
    if grid < 2:
        raise ValueError("the grid needs at least two points")
    box = f.domain.box
    lo, hi = box.lo(0), box.hi(0)
    xs = [lo + (hi - lo) * Fraction(i, grid - 1) for i in range(grid)]
    rows = []
    for eps in eps_list:
        eps = as_fraction(eps)
        rep = piecewise_at_eps(f, eps)
        for x in xs:
            rows.append((eps, x, rep.eval((x,))))
    return rows


def _cell(q: Fraction, float_mode: bool) -> str:
    if float_mode:
        return repr(float(q))
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def write_csv(rows, stream: TextIO, float_mode: bool = False) -> None:
    out = csv.writer(stream, lineterminator="\n")
    out.writerow(CSV_HEADER)
    for row in rows:
        out.writerow([_cell(q, float_mode) for q in row])


def render_png(rows, path: str, title: str = "regularization") -> None:
    """Draw one curve per parameter value and save the figure."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_eps: dict = {}
    for eps, x, value in rows:
        by_eps.setdefault(eps, []).append((float(x), float(value)))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for eps in sorted(by_eps, reverse=True):
        pts = by_eps[eps]
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                label=f"eps = {float(eps):g}")
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
