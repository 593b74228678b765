"""Tree serialization, SVG rendering and diagnostic curve tables."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .core import EtsmOutcome, Trace, contrast
from .errors import ConfigurationError, ValidationError
from .hierarchy import HierarchyNode, cophenetic_depth, tree_to_json

DIGITS = 12
FORMATS = ("NEWICK", "DOT", "JSON")
MODES = ("DENDROGRAM", "RADIAL", "HEATMAP")
_NEWICK_SPECIAL = set(" \t\n()[]':;,")


def _num(x: float) -> str:
    return f"{float(x):.{DIGITS}g}"


def leaf_name(node: HierarchyNode) -> str:
    return "|".join(node.member_labels)


def _newick_label(text: str) -> str:
    if not text or any(ch in _NEWICK_SPECIAL for ch in text):
        return "'" + text.replace("'", "''") + "'"
    return text


def to_newick(tree: HierarchyNode) -> str:
    """NEWICK text. The two edges under a node get that node's branch length.

    Multi-object leaves are named by their member ids joined with ``|``.
    """
    def emit(node):
        if node.is_leaf:
            return _newick_label(leaf_name(node))
        edge = _num(node.branch_length)
        return "(" + ",".join(f"{emit(c)}:{edge}" for c in node.children) + ")"

    return emit(tree) + ";"


def to_dot(tree: HierarchyNode) -> str:
    lines = ["digraph etsm {", '  node [shape=box, fontname="Helvetica"];']
    ids = {}
    for k, node in enumerate(tree.walk()):
        ids[id(node)] = f"n{k}"
        if node.is_leaf:
            label = leaf_name(node)
        else:
            label = f"n={len(node.members)}\\nT={node.t_used}\\nomega={_num(node.omega)}"
        lines.append(f'  n{k} [label="{label}"];')
    for node in tree.walk():
        for child in node.children:
            lines.append(f'  {ids[id(node)]} -> {ids[id(child)]} [label="{_num(node.branch_length)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_tree(tree: HierarchyNode, format: str = "NEWICK") -> str:
    fmt = format.upper()
    if fmt == "NEWICK":
        return to_newick(tree)
    if fmt == "DOT":
        return to_dot(tree)
    if fmt == "JSON":
        return tree_to_json(tree)
    raise ConfigurationError(f"unknown tree format {format!r}; expected one of {FORMATS}")


@dataclass(frozen=True)
class RenderOptions:
    width: int = 800
    height: int = 600
    orientation: str = "top-down"
    min_branch_display: float = 0.25
    shading: str = "linear"

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ConfigurationError("render dimensions must be positive")
        if self.min_branch_display < 0:
            raise ConfigurationError("min_branch_display must be >= 0")
        if self.orientation not in ("top-down", "radial"):
            raise ConfigurationError(f"unknown orientation {self.orientation!r}")
        if self.shading not in ("linear", "log"):
            raise ConfigurationError(f"unknown shading {self.shading!r}")


class _Svg:
    def __init__(self, width, height):
        self.width, self.height = width, height
        self.parts = []

    def add(self, tag, text=None, **attrs):
        attr = " ".join(f"{k.rstrip('_').replace('_', '-')}={quoteattr(str(v))}"
                        for k, v in attrs.items())
        if text is None:
            self.parts.append(f"  <{tag} {attr}/>")
        else:
            self.parts.append(f"  <{tag} {attr}>{escape(text)}</{tag}>")

    def document(self, title):
        head = ('<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
                f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                f'width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">\n'
                f"  <title>{escape(title)}</title>\n"
                f'  <rect class="background" x="0" y="0" width="{self.width}" '
                f'height="{self.height}" fill="white"/>\n')
        return head + "\n".join(self.parts) + "\n</svg>\n"


def _f(x):
    return f"{x:.3f}"


def _leaf_text(node):
    if len(node.members) == 1:
        return node.member_labels[0]
    return f"{node.member_labels[0]} (+{len(node.members) - 1}, n={len(node.members)})"


def _edge_length(node, opts):
    return max(node.branch_length, opts.min_branch_display)


def _render_dendrogram(tree, opts):
    svg = _Svg(opts.width, opts.height)
    margin, label_room = 20.0, 60.0
    leaves = tree.leaves()
    xs, depth = {}, {}
    step = (opts.width - 2 * margin) / max(len(leaves), 1)
    for k, leaf in enumerate(leaves):
        xs[id(leaf)] = margin + step * (k + 0.5)

    def place(node, d):
        depth[id(node)] = d
        for child in node.children:
            place(child, d + _edge_length(node, opts))
        if node.children:
            xs[id(node)] = sum(xs[id(c)] for c in node.children) / len(node.children)

    place(tree, 0.0)
    deepest = max(depth.values())
    scale = (opts.height - 2 * margin - label_room) / deepest if deepest > 0 else 0.0

    def y(node):
        return margin + depth[id(node)] * scale

    for node in tree.walk():
        if node.is_leaf:
            continue
        py = y(node)
        xa, xb = (xs[id(c)] for c in node.children)
        svg.add("line", class_="connector", x1=_f(xa), y1=_f(py), x2=_f(xb), y2=_f(py),
                stroke="black")
        for child in node.children:
            svg.add("line", class_="branch", x1=_f(xs[id(child)]), y1=_f(py),
                    x2=_f(xs[id(child)]), y2=_f(y(child)), stroke="black",
                    data_length=_num(node.branch_length))
    for leaf in leaves:
        lx, ly = xs[id(leaf)], y(leaf)
        svg.add("circle", class_="leaf", cx=_f(lx), cy=_f(ly), r="3", fill="black",
                data_members=str(len(leaf.members)))
        svg.add("text", _leaf_text(leaf), x=_f(lx), y=_f(ly + 14), font_size="10",
                text_anchor="middle")
    return svg.document("dendrogram")


def _render_radial(tree, opts):
    """Children leave their parent at +-angle/2 around the parent's direction."""
    pos, direction = {}, {}
    pos[id(tree)] = (0.0, 0.0)
    direction[id(tree)] = -90.0
    edges = []
    for node in tree.walk():
        if node.is_leaf:
            continue
        px, py = pos[id(node)]
        length = _edge_length(node, opts)
        half = node.angle_deg / 2
        for child, sign in zip(node.children, (-1, 1)):
            theta = direction[id(node)] + sign * half
            rad = math.radians(theta)
            cx, cy = px + length * math.cos(rad), py + length * math.sin(rad)
            pos[id(child)] = (cx, cy)
            direction[id(child)] = theta
            edges.append((node, child, theta))
    pts = np.array(list(pos.values()))
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    margin = 40.0
    span = max(hi[0] - lo[0], hi[1] - lo[1], 1e-12)
    scale = min(opts.width, opts.height) - 2 * margin
    scale = scale / span if span > 1e-12 else 0.0
    ox = opts.width / 2 - scale * (lo[0] + hi[0]) / 2
    oy = opts.height / 2 - scale * (lo[1] + hi[1]) / 2

    def tx(p):
        return ox + scale * p[0], oy + scale * p[1]

    svg = _Svg(opts.width, opts.height)
    for parent, child, theta in edges:
        x1, y1 = tx(pos[id(parent)])
        x2, y2 = tx(pos[id(child)])
        svg.add("line", class_="branch", x1=_f(x1), y1=_f(y1), x2=_f(x2), y2=_f(y2),
                stroke="black", data_direction=_num(theta),
                data_angle=_num(parent.angle_deg))
    for leaf in tree.leaves():
        x, y = tx(pos[id(leaf)])
        svg.add("circle", class_="leaf", cx=_f(x), cy=_f(y), r="3", fill="black",
                data_members=str(len(leaf.members)))
        svg.add("text", _leaf_text(leaf), x=_f(x + 5), y=_f(y), font_size="10")
    return svg.document("radial tree")


def heat_levels(depth_table: np.ndarray, shading: str = "linear") -> np.ndarray:
    """Gray level 0..255 per cell; deeper shared node means darker.

    Same-leaf cells (the sentinel) are shaded one step beyond the deepest split.
    """
    d = np.asarray(depth_table, dtype=float)
    n = d.shape[0]
    real = d[d < n]
    top = (real.max() if real.size else 0.0) + 1.0
    d = np.minimum(d, top)
    if shading == "log":
        v = np.log1p(d) / np.log1p(top)
    else:
        v = d / top
    return np.rint(255 * (1 - v)).astype(int)


def _render_heatmap(tree, depth_table, opts):
    table = np.asarray(depth_table)
    n = table.shape[0]
    order = tree.leaf_order() if tree is not None and len(tree.members) == n else list(range(n))
    labels = tree.labels if tree is not None and tree.labels else [str(i) for i in range(n)]
    levels = heat_levels(table, opts.shading)
    margin = 60.0
    cell = min((opts.width - margin - 10) / n, (opts.height - margin - 10) / n)
    svg = _Svg(opts.width, opts.height)
    for a, i in enumerate(order):
        svg.add("text", labels[i], x=_f(margin - 4), y=_f(margin + cell * (a + 0.7)),
                font_size=_f(min(10.0, cell)), text_anchor="end")
        for b, j in enumerate(order):
            g = levels[i, j]
            svg.add("rect", class_="cell", x=_f(margin + cell * b), y=_f(margin + cell * a),
                    width=_f(cell), height=_f(cell), fill=f"rgb({g},{g},{g})",
                    data_row=str(i), data_col=str(j), data_depth=str(int(table[i, j])))
    return svg.document("iso-hierarchy heatmap")


def render_svg(tree: HierarchyNode | None, depth_table=None, mode: str | None = None,
               opts: RenderOptions = RenderOptions()) -> str:
    """Standalone SVG 1.1 document for a tree or its cophenetic depth table.

    ``mode`` defaults to the orientation in ``opts``.
    """
    if mode is None:
        mode = "RADIAL" if opts.orientation == "radial" else "DENDROGRAM"
    mode = mode.upper()
    if mode not in MODES:
        raise ConfigurationError(f"unknown render mode {mode!r}; expected one of {MODES}")
    if mode == "HEATMAP":
        if depth_table is None:
            raise ConfigurationError("HEATMAP rendering needs a cophenetic depth table")
        return _render_heatmap(tree, depth_table, opts)
    if tree is None:
        raise ConfigurationError(f"{mode} rendering needs a tree")
    if mode == "RADIAL":
        return _render_radial(tree, opts)
    return _render_dendrogram(tree, opts)


def render_tree_heatmap(tree: HierarchyNode, opts: RenderOptions = RenderOptions()) -> str:
    return render_svg(tree, cophenetic_depth(tree), "HEATMAP", opts)


def contrast_curve_csv(s_values, c_values) -> str:
    s = [float(x) for x in s_values]
    cs = [float(x) for x in c_values]
    if not s or not cs:
        raise ValidationError("contrast curve needs at least one s value and one C value")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["C", *(f"s={_num(x)}" for x in s)])
    for c in cs:
        writer.writerow([_num(c), *(_num(v) for v in contrast(np.array(s), c))])
    return buf.getvalue()


def emit_curves(kind: str, payload) -> str:
    """CSV for an iteration trace (``TRACE``) or contrast curves (``CONTRAST_CURVE``).

    ``payload`` is a :class:`Trace` or :class:`EtsmOutcome` for TRACE and a
    mapping with ``s_values`` and ``C_values`` for CONTRAST_CURVE.
    """
    kind = kind.upper()
    if kind == "TRACE":
        trace = payload.trace if isinstance(payload, EtsmOutcome) else payload
        if not isinstance(trace, Trace) or len(trace) == 0:
            raise ValidationError("TRACE needs a recorded, non-empty iteration trace")
        return trace.to_csv(DIGITS)
    if kind == "CONTRAST_CURVE":
        if not payload:
            raise ValidationError("CONTRAST_CURVE needs s_values and C_values")
        return contrast_curve_csv(payload.get("s_values", ()), payload.get("C_values", ()))
    raise ConfigurationError(f"unknown curve kind {kind!r}")
