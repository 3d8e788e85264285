"""Deterministic SVG 1.1 output for the model-selection and method-comparison plots.

No plotting library is involved: documents are built with ElementTree,
coordinates are formatted to two decimals, and text uses fixed font
metrics from :class:`PlotSpec`, so identical inputs give identical bytes.
"""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .errors import RenderError

SVG_NS = "http://www.w3.org/2000/svg"

DEFAULT_STYLE = {
    "background": "#ffffff",
    "axis": "#333333",
    "grid": "#e6e6e6",
    "point": "#4c72b0",
    "frontier": "#dd8452",
    "best": "#c44e52",
    "estimate": "#4c72b0",
    "errorbar": "#333333",
    "text": "#222222",
}


@dataclass(frozen=True)
class PlotSpec:
    kind: str = "model_selection"
    x_label: str = "performance"
    y_label: str = "fairness"
    title: str = ""
    width: int = 640
    height: int = 480
    margin: tuple[int, int, int, int] = (50, 30, 70, 80)  # top, right, bottom, left
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    marker_radius: float = 4.0
    best_size: float = 9.0
    font_size: int = 12
    font_family: str = "DejaVu Sans, Arial, sans-serif"
    char_width: float = 0.6  # em per character, fixed
    colors: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_STYLE))

    def __post_init__(self) -> None:
        if self.kind not in ("model_selection", "method_comparison"):
            raise RenderError(f"unknown plot kind {self.kind!r}")
        if self.width <= 0 or self.height <= 0:
            raise RenderError("plot dimensions must be positive")
        top, right, bottom, left = self.margin
        if self.width <= left + right or self.height <= top + bottom:
            raise RenderError("margins leave no room for the plot area")

    @property
    def plot_box(self) -> tuple[float, float, float, float]:
        top, right, bottom, left = self.margin
        return float(left), float(top), float(self.width - left - right), float(self.height - top - bottom)


def fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def nice_number(x: float, round_: bool) -> float:
    """Heckbert's nice number: 1, 2, 5 or 10 times a power of ten."""
    exp = math.floor(math.log10(x))
    f = x / 10**exp
    if round_:
        nf = 1.0 if f < 1.5 else 2.0 if f < 3.0 else 5.0 if f < 7.0 else 10.0
    else:
        nf = 1.0 if f <= 1.0 else 2.0 if f <= 2.0 else 5.0 if f <= 5.0 else 10.0
    return nf * 10**exp


def nice_ticks(lo: float, hi: float, max_ticks: int = 6) -> list[float]:
    """Tick values on a 1/2/5 step that fall inside ``[lo, hi]``."""
    if hi <= lo:
        return [lo]
    span = nice_number(hi - lo, False)
    step = nice_number(span / (max_ticks - 1), True)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    k = 0
    while first + k * step <= hi + step * 1e-9:
        t = round(first + k * step, 12)
        ticks.append(0.0 if t == 0 else t)
        k += 1
    return ticks


def auto_range(values: Sequence[float], pad: float = 0.05) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    span = hi - lo
    if span == 0:
        return lo - pad, hi + pad
    return lo - pad * span, hi + pad * span


@dataclass(frozen=True)
class AxisMap:
    """Affine data -> pixel map for one axis (pixel origin at ``p0``)."""

    d0: float
    d1: float
    p0: float
    p1: float

    def __call__(self, v: float) -> float:
        return self.p0 + (v - self.d0) * (self.p1 - self.p0) / (self.d1 - self.d0)

    def inverse(self, px: float) -> float:
        return self.d0 + (px - self.p0) * (self.d1 - self.d0) / (self.p1 - self.p0)

    def to_dict(self) -> dict[str, float]:
        return {"data": [self.d0, self.d1], "pixels": [self.p0, self.p1]}


def _el(parent: ET.Element, tag: str, **attrs: Any) -> ET.Element:
    return ET.SubElement(parent, tag, {k.rstrip("_").replace("_", "-"): str(v) for k, v in attrs.items()})


def _text(parent: ET.Element, x: float, y: float, content: str, spec: PlotSpec, **attrs: Any) -> ET.Element:
    t = _el(parent, "text", x=fmt(x), y=fmt(y), fill=spec.colors["text"], **attrs)
    t.text = content
    return t


def _document(spec: PlotSpec, title: str) -> ET.Element:
    root = ET.Element(
        "svg",
        {
            "xmlns": SVG_NS,
            "version": "1.1",
            "width": str(spec.width),
            "height": str(spec.height),
            "viewBox": f"0 0 {spec.width} {spec.height}",
            "font-family": spec.font_family,
            "font-size": str(spec.font_size),
        },
    )
    ET.SubElement(root, "title").text = title
    _el(root, "rect", x=0, y=0, width=spec.width, height=spec.height, fill=spec.colors["background"])
    return root


def _axes(root: ET.Element, spec: PlotSpec, xmap: AxisMap | None, ymap: AxisMap) -> None:
    x0, y0, w, h = spec.plot_box
    axes = _el(root, "g", class_="axes", stroke=spec.colors["axis"])
    for t in nice_ticks(ymap.d0, ymap.d1):
        py = ymap(t)
        _el(axes, "line", x1=fmt(x0), y1=fmt(py), x2=fmt(x0 + w), y2=fmt(py), stroke=spec.colors["grid"])
        _el(axes, "line", x1=fmt(x0 - 5), y1=fmt(py), x2=fmt(x0), y2=fmt(py))
        label = f"{t:g}"
        _text(axes, x0 - 8 - len(label) * spec.char_width * spec.font_size, py + spec.font_size / 3, label, spec, stroke="none")
    if xmap is not None:
        for t in nice_ticks(xmap.d0, xmap.d1):
            px = xmap(t)
            _el(axes, "line", x1=fmt(px), y1=fmt(y0), x2=fmt(px), y2=fmt(y0 + h), stroke=spec.colors["grid"])
            _el(axes, "line", x1=fmt(px), y1=fmt(y0 + h), x2=fmt(px), y2=fmt(y0 + h + 5))
            label = f"{t:g}"
            _text(axes, px - len(label) * spec.char_width * spec.font_size / 2, y0 + h + 8 + spec.font_size, label, spec, stroke="none")
    _el(axes, "line", x1=fmt(x0), y1=fmt(y0 + h), x2=fmt(x0 + w), y2=fmt(y0 + h))
    _el(axes, "line", x1=fmt(x0), y1=fmt(y0), x2=fmt(x0), y2=fmt(y0 + h))
    xl = spec.x_label
    _text(root, x0 + w / 2 - len(xl) * spec.char_width * spec.font_size / 2, spec.height - 20, xl, spec, class_="x-label")
    yl = spec.y_label
    cx, cy = 20.0, y0 + h / 2
    _text(
        root, cx, cy + len(yl) * spec.char_width * spec.font_size / 2, yl, spec,
        class_="y-label", transform=f"rotate(-90 {fmt(cx)} {fmt(cy)})",
    )
    if spec.title:
        _text(root, x0, spec.margin[0] - 20, spec.title, spec, class_="plot-title", font_weight="bold")


def _serialize(root: ET.Element) -> str:
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def _ref(point: Mapping[str, Any]) -> str:
    r = point["trial_ref"]
    return f"{r['dataset']}/{r['method']}/trial_{r['trial_id']}"


def _as_point(p: Any) -> dict[str, Any]:
    return p.to_dict() if hasattr(p, "to_dict") else dict(p)


def render_model_selection(
    points: Sequence[Any], frontier: Sequence[Any], best: Any, spec: PlotSpec | None = None
) -> tuple[str, dict[str, Any]]:
    """Scatter of all trials, the frontier as a step line and the best trade-off marked.

    Accepts :class:`~fairflow.analysis.TradeoffPoint` objects or their dict
    form. Returns ``(svg_text, sidecar)``; the sidecar records the axis maps
    and every plotted coordinate.
    """
    spec = spec or PlotSpec()
    pts = [_as_point(p) for p in points]
    front = [_as_point(p) for p in frontier]
    if not front:
        raise RenderError("frontier is empty; nothing to select from")
    if not pts or best is None:
        raise RenderError("need at least one point and a best trade-off")
    top_pt = _as_point(best)
    xs = [p["performance"] for p in pts]
    ys = [p["fairness"] for p in pts]
    xr = spec.x_range or auto_range(xs)
    yr = spec.y_range or auto_range(ys)
    x0, y0, w, h = spec.plot_box
    xmap = AxisMap(xr[0], xr[1], x0, x0 + w)
    ymap = AxisMap(yr[0], yr[1], y0 + h, y0)

    root = _document(spec, spec.title or "Model selection")
    _axes(root, spec, xmap, ymap)
    sidecar: dict[str, Any] = {
        "kind": "model_selection",
        "x_axis": {"label": spec.x_label, **xmap.to_dict()},
        "y_axis": {"label": spec.y_label, **ymap.to_dict()},
        "points": [],
        "frontier": [],
    }

    g = _el(root, "g", class_="trials", fill=spec.colors["point"], fill_opacity="0.6")
    for p in pts:
        px, py = xmap(p["performance"]), ymap(p["fairness"])
        c = _el(g, "circle", cx=fmt(px), cy=fmt(py), r=fmt(spec.marker_radius))
        ET.SubElement(c, "title").text = f"{_ref(p)} (perf {p['performance']:.4f}, fair {p['fairness']:.4f})"
        sidecar["points"].append({**p, "px": round(px, 2), "py": round(py, 2)})

    ordered = sorted(front, key=lambda p: (p["performance"], -p["fairness"]))
    coords: list[tuple[float, float]] = []
    for i, p in enumerate(ordered):
        px, py = xmap(p["performance"]), ymap(p["fairness"])
        if i:
            coords.append((px, coords[-1][1]))
        coords.append((px, py))
        sidecar["frontier"].append({**p, "px": round(px, 2), "py": round(py, 2)})
    _el(
        root, "polyline", class_="frontier", fill="none", stroke=spec.colors["frontier"], stroke_width="2",
        points=" ".join(f"{fmt(a)},{fmt(b)}" for a, b in coords),
    )

    bx, by = xmap(top_pt["performance"]), ymap(top_pt["fairness"])
    s = spec.best_size
    marker = _el(
        root, "path", class_="best", fill="none", stroke=spec.colors["best"], stroke_width="2.5",
        d=f"M {fmt(bx)} {fmt(by - s)} L {fmt(bx + s)} {fmt(by)} L {fmt(bx)} {fmt(by + s)} L {fmt(bx - s)} {fmt(by)} Z",
    )
    ET.SubElement(marker, "title").text = f"best trade-off: {_ref(top_pt)}"
    sidecar["best"] = {**top_pt, "px": round(bx, 2), "py": round(by, 2)}
    return _serialize(root), sidecar


def render_method_comparison(summaries: Sequence[Any], spec: PlotSpec | None = None) -> tuple[str, dict[str, Any]]:
    """One marker per method at its point estimate with a CI error bar, best first."""
    spec = spec or PlotSpec(kind="method_comparison", x_label="method", y_label="combined score")
    rows = [s.to_dict() if hasattr(s, "to_dict") else dict(s) for s in summaries]
    if not rows:
        raise RenderError("no method summaries to plot")
    rows.sort(key=lambda r: (-r["point_estimate"], r["method"]))
    yr = spec.y_range or auto_range([r["ci_low"] for r in rows] + [r["ci_high"] for r in rows])
    x0, y0, w, h = spec.plot_box
    ymap = AxisMap(yr[0], yr[1], y0 + h, y0)
    slot = w / len(rows)

    root = _document(spec, spec.title or "Method comparison")
    _axes(root, spec, None, ymap)
    sidecar: dict[str, Any] = {"kind": "method_comparison", "y_axis": {"label": spec.y_label, **ymap.to_dict()}, "methods": []}
    g = _el(root, "g", class_="methods")
    for i, r in enumerate(rows):
        px = x0 + slot * (i + 0.5)
        lo, hi, pe = ymap(r["ci_low"]), ymap(r["ci_high"]), ymap(r["point_estimate"])
        cap = min(8.0, slot / 4)
        bar = _el(
            g, "path", class_="errorbar", fill="none", stroke=spec.colors["errorbar"], stroke_width="1.5",
            d=(
                f"M {fmt(px)} {fmt(lo)} L {fmt(px)} {fmt(hi)} "
                f"M {fmt(px - cap)} {fmt(lo)} L {fmt(px + cap)} {fmt(lo)} "
                f"M {fmt(px - cap)} {fmt(hi)} L {fmt(px + cap)} {fmt(hi)}"
            ),
        )
        ET.SubElement(bar, "title").text = f"{r['method']}: CI [{r['ci_low']:.4f}, {r['ci_high']:.4f}]"
        c = _el(g, "circle", class_="estimate", cx=fmt(px), cy=fmt(pe), r=fmt(spec.marker_radius + 1), fill=spec.colors["estimate"])
        ET.SubElement(c, "title").text = f"{r['method']}: {r['point_estimate']:.4f} (n={r['n_trials']})"
        label = r["method"]
        _text(root, px - len(label) * spec.char_width * spec.font_size / 2, y0 + h + 8 + spec.font_size, label, spec, class_="method-label")
        sidecar["methods"].append({**r, "px": round(px, 2), "py": round(pe, 2), "py_low": round(lo, 2), "py_high": round(hi, 2)})
    return _serialize(root), sidecar


def write_plot(svg: str, sidecar: Mapping[str, Any], path: str, write_sidecar: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    if write_sidecar:
        with open(str(path) + ".json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")
