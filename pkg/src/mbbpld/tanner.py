"""Read-only bipartite Tanner-graph view of a parity-check matrix."""

from __future__ import annotations

from dataclasses import dataclass

from .gf2 import SparseBinaryMatrix


@dataclass(frozen=True, eq=False)
class TannerGraph:
    """Checks are matrix rows, variables are columns; indices are shared with the matrix."""

    num_checks: int
    num_vars: int
    check_neighbors: tuple[tuple[int, ...], ...]
    var_neighbors: tuple[tuple[int, ...], ...]

    @classmethod
    def from_matrix(cls, H: SparseBinaryMatrix) -> "TannerGraph":
        return cls(H.num_rows, H.num_cols, H.rows, H.transpose().rows)

    def to_matrix(self) -> SparseBinaryMatrix:
        return SparseBinaryMatrix(self.num_checks, self.num_vars, self.check_neighbors)

    @property
    def d_c(self) -> int:
        return max((len(n) for n in self.check_neighbors), default=0)

    @property
    def d_v(self) -> int:
        return max((len(n) for n in self.var_neighbors), default=0)

    @property
    def num_edges(self) -> int:
        return sum(len(n) for n in self.check_neighbors)

    def check_degrees(self) -> list[int]:
        return [len(n) for n in self.check_neighbors]

    def var_degrees(self) -> list[int]:
        return [len(n) for n in self.var_neighbors]


def is_check_regular(g: TannerGraph) -> int | None:
    """The common check degree, or ``None`` if check degrees differ (or no checks)."""
    degrees = set(g.check_degrees())
    return degrees.pop() if len(degrees) == 1 else None


def to_dot(g: TannerGraph, check_groups: list[int] | None = None) -> str:
    """Graphviz source: checks as boxes, variables as circles.

    ``check_groups`` (e.g. a subtree assignment) adds a ``group`` attribute and
    a colour per distinct value.
    """
    palette = ["#f0b9a5", "#aadcc8", "#b4d2f0", "#f2e394", "#d7b4f0", "#c8c8c8"]
    lines = ["graph tanner {", "  node [fontsize=10];"]
    for v in range(g.num_vars):
        lines.append(f'  v{v} [shape=circle, label="v{v + 1}"];')
    for c in range(g.num_checks):
        attrs = f'shape=box, label="c{c + 1}"'
        if check_groups is not None:
            grp = check_groups[c]
            attrs += f', group="{grp}", style=filled, fillcolor="{palette[grp % len(palette)]}"'
        lines.append(f"  c{c} [{attrs}];")
    for c, nbrs in enumerate(g.check_neighbors):
        for v in nbrs:
            lines.append(f"  c{c} -- v{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
