"""Self-contained SVG renderings of envelopes, tests and boxplots.

The drawings are plain text with no external references and are produced
deterministically: the same result object always yields the same bytes.
"""

from __future__ import annotations

import numpy as np

from .applications import FBoxplotResult
from .composite import AdjustedResult
from .envelope import CombinedEnvelope, GlobalEnvelope
from .ftests import FTestResult

__all__ = ["render", "render_panels", "save"]

_PANEL_W = 640
_PANEL_H = 320
_MARGIN = 46


def _f(x: float) -> str:
    return format(float(x), ".6g")


def _finite(arr):
    a = np.asarray(arr, dtype=float).ravel()
    return a[np.isfinite(a) & (np.abs(a) < 1e290)]


class _Panel1D:
    def __init__(self, x0, y0, grid, series, title):
        self.x0, self.y0 = x0, y0
        self.grid = np.asarray(grid, dtype=float)
        self.title = title
        xs = self.grid
        ys = np.concatenate([_finite(s) for s, _style in series if s is not None] or [np.array([0.0, 1.0])])
        self.xmin, self.xmax = float(xs.min()), float(xs.max())
        self.ymin, self.ymax = float(ys.min()), float(ys.max())
        if self.xmax == self.xmin:
            self.xmax += 1.0
        if self.ymax == self.ymin:
            self.ymax += 1.0
        pad = 0.05 * (self.ymax - self.ymin)
        self.ymin -= pad
        self.ymax += pad
        self.series = series

    def sx(self, v):
        w = _PANEL_W - 2 * _MARGIN
        return self.x0 + _MARGIN + (v - self.xmin) / (self.xmax - self.xmin) * w

    def sy(self, v):
        h = _PANEL_H - 2 * _MARGIN
        v = min(max(v, self.ymin), self.ymax)
        return self.y0 + _PANEL_H - _MARGIN - (v - self.ymin) / (self.ymax - self.ymin) * h

    def _points(self, ys):
        return " ".join(f"{_f(self.sx(x))},{_f(self.sy(y))}" for x, y in zip(self.grid, ys))

    def draw(self) -> list[str]:
        el = []
        el.append(
            f'<rect x="{_f(self.x0 + _MARGIN)}" y="{_f(self.y0 + _MARGIN)}" '
            f'width="{_f(_PANEL_W - 2 * _MARGIN)}" height="{_f(_PANEL_H - 2 * _MARGIN)}" '
            'fill="none" stroke="#222222" stroke-width="1"/>'
        )
        band = [s for s, style in self.series if style == "band"]
        if band:
            lower, upper = band[0]
            pts = self._points(upper) + " " + " ".join(
                f"{_f(self.sx(x))},{_f(self.sy(y))}" for x, y in zip(self.grid[::-1], lower[::-1])
            )
            el.append(f'<polygon points="{pts}" fill="#c9d6e8" stroke="none"/>')
        for data, style in self.series:
            if data is None or style == "band":
                continue
            if style == "central":
                el.append(f'<polyline points="{self._points(data)}" fill="none" stroke="#5577aa" stroke-width="1.2" stroke-dasharray="5,4"/>')
            elif style == "observed":
                el.append(f'<polyline points="{self._points(data)}" fill="none" stroke="#aa2222" stroke-width="1.6"/>')
            elif style == "whisker":
                el.append(f'<polyline points="{self._points(data)}" fill="none" stroke="#444444" stroke-width="1" stroke-dasharray="2,3"/>')
            elif style == "outlier":
                el.append(f'<polyline points="{self._points(data)}" fill="none" stroke="#cc7700" stroke-width="1"/>')
        el.append(
            f'<text x="{_f(self.x0 + _MARGIN)}" y="{_f(self.y0 + _MARGIN - 8)}" '
            f'font-family="monospace" font-size="13" fill="#111111">{self.title}</text>'
        )
        for frac, val in ((0.0, self.xmin), (1.0, self.xmax)):
            el.append(
                f'<text x="{_f(self.x0 + _MARGIN + frac * (_PANEL_W - 2 * _MARGIN))}" '
                f'y="{_f(self.y0 + _PANEL_H - _MARGIN + 16)}" font-family="monospace" '
                f'font-size="11" fill="#333333" text-anchor="middle">{_f(val)}</text>'
            )
        for frac, val in ((0.0, self.ymin), (1.0, self.ymax)):
            el.append(
                f'<text x="{_f(self.x0 + _MARGIN - 4)}" '
                f'y="{_f(self.y0 + _PANEL_H - _MARGIN - frac * (_PANEL_H - 2 * _MARGIN) + 4)}" '
                f'font-family="monospace" font-size="11" fill="#333333" text-anchor="end">{_f(val)}</text>'
            )
        return el


def _gray(v: float) -> str:
    level = int(round(255 * (1.0 - min(max(v, 0.0), 1.0))))
    return f"#{level:02x}{level:02x}{level:02x}"


def _heat_panel(x0, y0, pixels, values, title, mask=None) -> list[str]:
    el = []
    px = pixels[:, 0]
    py = pixels[:, 1]
    pw = pixels[:, 2]
    ph = pixels[:, 3]
    xmin, xmax = (px - pw / 2).min(), (px + pw / 2).max()
    ymin, ymax = (py - ph / 2).min(), (py + ph / 2).max()
    finite = _finite(values)
    vmin = float(finite.min()) if finite.size else 0.0
    vmax = float(finite.max()) if finite.size else 1.0
    if vmax == vmin:
        vmax += 1.0
    w = _PANEL_W - 2 * _MARGIN
    h = _PANEL_H - 2 * _MARGIN

    def sx(v):
        return x0 + _MARGIN + (v - xmin) / (xmax - xmin) * w

    def sy(v):
        return y0 + _PANEL_H - _MARGIN - (v - ymin) / (ymax - ymin) * h

    for k in range(pixels.shape[0]):
        left = sx(px[k] - pw[k] / 2)
        top = sy(py[k] + ph[k] / 2)
        rw = sx(px[k] + pw[k] / 2) - left
        rh = sy(py[k] - ph[k] / 2) - top
        if mask is not None:
            color = "#cc2222" if mask[k] else "#f4f4f4"
        else:
            v = values[k]
            color = "#cc2222" if not np.isfinite(v) or abs(v) >= 1e290 else _gray((v - vmin) / (vmax - vmin))
        el.append(
            f'<rect x="{_f(left)}" y="{_f(top)}" width="{_f(rw)}" height="{_f(rh)}" '
            f'fill="{color}" stroke="#dddddd" stroke-width="0.3"/>'
        )
    el.append(
        f'<text x="{_f(x0 + _MARGIN)}" y="{_f(y0 + _MARGIN - 8)}" '
        f'font-family="monospace" font-size="13" fill="#111111">{title}</text>'
    )
    return el


def _document(elements: list[str], width: int, height: int) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>\n'
    )
    return head + "\n".join(elements) + "\n</svg>\n"


def _envelope_panels(env: GlobalEnvelope, observed, title):
    if env.grid.is_2d:
        panels = [("lower bound", env.lower, None), ("upper bound", env.upper, None)]
        if observed is not None:
            panels.insert(0, ("observed", np.asarray(observed, dtype=float), None))
        if env.mask is not None:
            panels.append(("significant", env.mask.astype(float), env.mask))
        return [("2d", title, env, panels, observed)]
    return [("1d", title, env, None, observed)]


def render_panels(panels) -> str:
    """Render a list of (envelope, observed_or_None, title) tuples."""
    blocks = []
    for env, observed, title in panels:
        blocks.extend(_envelope_panels(env, observed, title))
    elements: list[str] = []
    y = 0
    width = _PANEL_W
    for kind, title, env, heat, observed in blocks:
        if kind == "1d":
            series = [((env.lower, env.upper), "band"), (env.central, "central")]
            if observed is not None:
                series.append((np.asarray(observed, dtype=float), "observed"))
            panel = _Panel1D(0, y, env.grid.values, series, title)
            elements.extend(panel.draw())
            y += _PANEL_H
        else:
            for sub_title, vals, mask in heat:
                elements.extend(_heat_panel(0, y, env.grid.pixels, np.asarray(vals, dtype=float), f"{title} {sub_title}".strip(), mask))
                y += _PANEL_H
    return _document(elements, width, max(y, _PANEL_H))


def _boxplot_svg(result: FBoxplotResult, curves) -> str:
    central = result.central
    envs = central.components if isinstance(central, CombinedEnvelope) else (central,)
    elements: list[str] = []
    y = 0
    for c, env in enumerate(envs):
        if env.grid.is_2d:
            panels = [
                ("central lower", env.lower, None),
                ("central upper", env.upper, None),
                ("whisker lower", result.whisker_lower[c], None),
                ("whisker upper", result.whisker_upper[c], None),
            ]
            for sub, vals, mask in panels:
                elements.extend(_heat_panel(0, y, env.grid.pixels, np.asarray(vals, dtype=float), sub, mask))
                y += _PANEL_H
            continue
        series = [((env.lower, env.upper), "band"), (env.central, "central"),
                  (result.whisker_lower[c], "whisker"), (result.whisker_upper[c], "whisker")]
        if curves is not None:
            for idx in result.outlier_indices:
                series.append((curves[c][idx], "outlier"))
        title = f"functional boxplot (coverage {_f(result.coverage)}, factor {_f(result.factor)})"
        if len(envs) > 1:
            title += f" component {c + 1}"
        panel = _Panel1D(0, y, env.grid.values, series, title)
        elements.extend(panel.draw())
        y += _PANEL_H
    return _document(elements, _PANEL_W, max(y, _PANEL_H))


def render(result, curves=None, titles=None) -> str:
    """Render a result object to an SVG string.

    ``curves`` optionally carries the raw curve values: the observed curve
    (or one array per component) for envelopes, or the full value matrices
    for boxplot outlier drawing.
    """
    if isinstance(result, FBoxplotResult):
        return _boxplot_svg(result, curves)
    if isinstance(result, AdjustedResult):
        result = result.envelope
    if isinstance(result, FTestResult):
        obs = list(result.statistic)
        env = result.envelope
        if isinstance(env, CombinedEnvelope):
            names = titles or [f"{result.test} {lab}" for lab in result.labels]
            return render_panels([(e, o, t) for e, o, t in zip(env.components, obs, names)])
        return render_panels([(env, obs[0], titles[0] if titles else result.test)])
    if isinstance(result, CombinedEnvelope):
        names = titles or [f"component {i + 1}" for i in range(result.G)]
        obs = curves if curves is not None else [None] * result.G
        return render_panels([(e, o, t) for e, o, t in zip(result.components, obs, names)])
    title = titles[0] if titles else f"global envelope ({result.measure_type.value})"
    obs = curves[0] if isinstance(curves, (list, tuple)) else curves
    return render_panels([(result, obs, title)])


def save(result, path, curves=None, titles=None) -> None:
    with open(path, "w") as fh:
        fh.write(render(result, curves=curves, titles=titles))
