"""SVG rendering of bridge diagrams with an optional CRW overlay.

Bars are vertical unit-height segments (height 0 at the bottom), bridges are
dotted horizontal connectors at their times, and the walk is drawn in red
with arrowheads.  Output depends only on the inputs, so files can be diffed.
"""
from __future__ import annotations

import warnings
from typing import Sequence

from .config import BridgeConfiguration
from .crw import CrwTrace

BAR_GAP = 40.0
BAR_HEIGHT = 300.0
MARGIN = 30.0
LEGIBLE_BARS = 20


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def render_svg(x: BridgeConfiguration, trace: CrwTrace | None = None, path=None,
               vertices: Sequence[int] | None = None, only_visited: bool = False) -> str:
    """Render ``x`` (and ``trace``) to SVG; also writes it to ``path`` if given.

    ``vertices`` selects the bars to draw, in order; ``only_visited`` draws
    the bars the trace discovered.  Bridges are drawn when both ends are shown.
    """
    g = x.graph
    if vertices is None:
        if only_visited and trace is not None:
            vertices = sorted(set(trace.discovered))
        else:
            vertices = range(g.num_vertices)
    vertices = list(vertices)
    if len(vertices) > LEGIBLE_BARS:
        warnings.warn(f"{len(vertices)} bars will not render legibly", stacklevel=2)
    col = {v: MARGIN + i * BAR_GAP for i, v in enumerate(vertices)}
    width = 2 * MARGIN + max(len(vertices) - 1, 0) * BAR_GAP
    height = 2 * MARGIN + BAR_HEIGHT

    def y(h: float) -> float:
        return MARGIN + (1.0 - h) * BAR_HEIGHT

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
           f'height="{_fmt(height + 20)}" viewBox="0 0 {_fmt(width)} {_fmt(height + 20)}">',
           '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" '
           'markerHeight="6" orient="auto-start-reverse"><path d="M0,0 L10,5 L0,10 z" '
           'fill="#c00"/></marker></defs>',
           '<g class="bars" stroke="#000" stroke-width="2">']
    for v in vertices:
        out.append(f'<line class="bar" data-vertex="{v}" x1="{_fmt(col[v])}" y1="{_fmt(y(0))}" '
                   f'x2="{_fmt(col[v])}" y2="{_fmt(y(1))}"/>')
    out.append('</g>')
    out.append('<g class="labels" font-size="10" text-anchor="middle">')
    for v in vertices:
        out.append(f'<text x="{_fmt(col[v])}" y="{_fmt(y(0) + 15)}">{v}</text>')
    out.append('</g>')
    out.append('<g class="bridges" stroke="#555" stroke-dasharray="2,3">')
    a, b = x.endpoints()
    for k, (u, w, t) in enumerate(zip(a.tolist(), b.tolist(), x.times.tolist())):
        if u in col and w in col:
            out.append(f'<line class="bridge" data-rank="{k}" x1="{_fmt(col[u])}" '
                       f'y1="{_fmt(y(t))}" x2="{_fmt(col[w])}" y2="{_fmt(y(t))}"/>')
    out.append('</g>')
    if trace is not None:
        out.append('<g class="crw" stroke="#c00" stroke-width="1.5" fill="none">')
        for e in trace.events:
            if e.kind in ("fresh", "backtrack") and e.source in col and e.vertex in col:
                out.append(f'<line class="jump" x1="{_fmt(col[e.source])}" y1="{_fmt(y(e.height))}" '
                           f'x2="{_fmt(col[e.vertex])}" y2="{_fmt(y(e.height))}" '
                           'marker-end="url(#arrow)"/>')
        for v in sorted(trace.segments):
            if v not in col:
                continue
            for h0, h1, _ in trace.segments[v]:
                if h1 > h0:
                    out.append(f'<line class="climb" x1="{_fmt(col[v])}" y1="{_fmt(y(h0))}" '
                               f'x2="{_fmt(col[v])}" y2="{_fmt(y(h1))}" marker-end="url(#arrow)"/>')
        if trace.start in col:
            out.append(f'<circle class="start" cx="{_fmt(col[trace.start])}" cy="{_fmt(y(0))}" '
                       'r="4" fill="#c00"/>')
        last = trace.events[-1] if trace.events else None
        if last is not None and last.kind == "close" and last.vertex in col:
            out.append(f'<circle class="close" cx="{_fmt(col[last.vertex])}" cy="{_fmt(y(0))}" '
                       'r="7" stroke="#c00"/>')
        out.append('</g>')
    out.append('</svg>')
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
