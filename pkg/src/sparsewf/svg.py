"""
Minimal SVG line charts for sweep curves.
"""

import math
from dataclasses import dataclass, field


def escape_xml(value: str) -> str:
    """
    Escape text for use inside SVG elements and attributes.

    >>> escape_xml('a < b & "c"')
    'a &lt; b &amp; &quot;c&quot;'
    """
    value = value.replace("&", "&amp;")
    value = value.replace("<", "&lt;")
    value = value.replace(">", "&gt;")
    value = value.replace('"', "&quot;")
    return value


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def nice_ticks(low: float, high: float, count: int = 5) -> list[float]:
    """
    Round tick positions covering [low, high].

    >>> nice_ticks(0.0, 1.0)
    [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    """
    if high <= low:
        return [low]
    raw = (high - low) / count
    magnitude = 10.0 ** math.floor(math.log10(raw))
    step = next(s * magnitude for s in (1.0, 2.0, 2.5, 5.0, 10.0) if s * magnitude >= raw * (1 - 1e-12))
    first = math.floor(low / step) * step
    ticks = []
    i = 0
    while first + i * step <= high + 1e-9 * step:
        ticks.append(round(first + i * step, 10))
        i += 1
    if ticks[-1] < high:
        ticks.append(round(first + i * step, 10))
    return ticks


COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
MARKERS = ("circle", "square")


@dataclass
class LineChart:
    """
    Collects named series of (x, y) points and serializes them as one SVG
    document. Output depends only on the data, so equal inputs give equal
    bytes.
    """

    title: str
    x_label: str
    y_label: str
    width: int = 640
    height: int = 420
    series: list[tuple[str, list[tuple[float, float]]]] = field(default_factory=list)

    margin_left = 70
    margin_right = 20
    margin_top = 40
    margin_bottom = 60

    def add_series(self, label: str, points: list[tuple[float, float]]) -> None:
        self.series.append((label, [(float(x), float(y)) for x, y in points]))

    def _bounds(self) -> tuple[list[float], list[float]]:
        xs = [x for _, points in self.series for x, _ in points]
        ys = [y for _, points in self.series for _, y in points]
        if not xs:
            return [0.0, 1.0], [0.0, 1.0]
        x_ticks = nice_ticks(min(xs), max(xs))
        y_ticks = nice_ticks(min(0.0, min(ys)), max(ys) if max(ys) > 0 else 1.0)
        return x_ticks, y_ticks

    def as_svg(self) -> str:
        x_ticks, y_ticks = self._bounds()
        x0, x1 = x_ticks[0], x_ticks[-1]
        y0, y1 = y_ticks[0], y_ticks[-1]
        left, top = self.margin_left, self.margin_top
        plot_w = self.width - self.margin_left - self.margin_right
        plot_h = self.height - self.margin_top - self.margin_bottom

        def sx(x: float) -> float:
            return left + (x - x0) / ((x1 - x0) or 1.0) * plot_w

        def sy(y: float) -> float:
            return top + plot_h - (y - y0) / ((y1 - y0) or 1.0) * plot_h

        lines = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">',
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
            f'<text x="{self.width / 2:.1f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{escape_xml(self.title)}</text>',
        ]

        # Axes with ticks and grid lines
        bottom = top + plot_h
        lines.append(
            f'<path d="M{left},{top} V{bottom} H{left + plot_w}" stroke="black" fill="none"/>'
        )
        for tick in x_ticks:
            x = sx(tick)
            lines.append(f'<line x1="{_fmt(x)}" y1="{bottom}" x2="{_fmt(x)}" y2="{bottom + 5}" stroke="black"/>')
            lines.append(
                f'<text x="{_fmt(x)}" y="{bottom + 20}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="11">{tick:g}</text>'
            )
        for tick in y_ticks:
            y = sy(tick)
            lines.append(
                f'<line x1="{left}" y1="{_fmt(y)}" x2="{left + plot_w}" y2="{_fmt(y)}" stroke="#dddddd"/>'
            )
            lines.append(
                f'<text x="{left - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
                f'font-family="sans-serif" font-size="11">{tick:g}</text>'
            )
        lines.append(
            f'<text x="{left + plot_w / 2:.1f}" y="{self.height - 15}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{escape_xml(self.x_label)}</text>'
        )
        lines.append(
            f'<text x="18" y="{top + plot_h / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="13" transform="rotate(-90 18 {top + plot_h / 2:.1f})">'
            f"{escape_xml(self.y_label)}</text>"
        )

        # One polyline plus markers per series, legend top right
        for index, (label, points) in enumerate(self.series):
            color = COLORS[index % len(COLORS)]
            if points:
                coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in points)
                lines.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            for x, y in points:
                if MARKERS[index % len(MARKERS)] == "circle":
                    lines.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" fill="{color}"/>')
                else:
                    lines.append(
                        f'<rect x="{_fmt(sx(x) - 3)}" y="{_fmt(sy(y) - 3)}" width="6" height="6" fill="{color}"/>'
                    )
            legend_y = top + 14 + 18 * index
            legend_x = left + plot_w - 140
            lines.append(
                f'<line x1="{legend_x}" y1="{legend_y - 4}" x2="{legend_x + 20}" y2="{legend_y - 4}" '
                f'stroke="{color}" stroke-width="2"/>'
            )
            lines.append(
                f'<text x="{legend_x + 26}" y="{legend_y}" font-family="sans-serif" '
                f'font-size="12">{escape_xml(label)}</text>'
            )

        lines.append("</svg>")
        return "\n".join(lines) + "\n"
