"""Clock-glyph rendering of a cell summary as a standalone SVG document.

Twelve 30-degree month wedges run clockwise from the top (January in the
12-to-1 o'clock position). Each wedge is split radially into an outer
endangered band and an inner safe band around a central hub showing the
vineyard count. The split radius is area-true: the outer band's share of
the wedge's annulus area equals the endangered fraction exactly. Band
color saturation encodes the mean certainty of that outcome, from
near-white at 0.5 to the full hue at 1.0.
"""

import math
from dataclasses import dataclass

HUB_RATIO = 0.25
MIN_RADIUS_PX = 16.0


@dataclass(frozen=True)
class ColorEncoding:
    endangered_rgb: tuple = (180, 4, 38)
    safe_rgb: tuple = (59, 76, 192)
    neutral_rgb: tuple = (242, 242, 242)


DEFAULT_ENCODING = ColorEncoding()


def color_for(outcome, mean_certainty, encoding=DEFAULT_ENCODING):
    """RGB for an outcome band: linear blend neutral -> hue over [0.5, 1]."""
    if not 0.5 <= mean_certainty <= 1.0:
        raise ValueError(f"mean certainty {mean_certainty} outside [0.5, 1]")
    if outcome == "endangered":
        full = encoding.endangered_rgb
    elif outcome == "safe":
        full = encoding.safe_rgb
    else:
        raise ValueError(f"unknown outcome {outcome!r}")
    t = (mean_certainty - 0.5) / 0.5
    return tuple(int(math.floor(n + (f - n) * t + 0.5))
                 for n, f in zip(encoding.neutral_rgb, full))


def split_radius(fraction, hub_r, outer_r):
    """Radius dividing a wedge so the outer band's annulus-area share equals
    ``fraction``."""
    return math.sqrt(hub_r * hub_r
                     + (1.0 - fraction) * (outer_r * outer_r - hub_r * hub_r))


def month_angles(month):
    """Start/end angles in degrees, measured clockwise from 12 o'clock as
    screen angles from the positive x axis (y axis points down)."""
    start = -90.0 + 30.0 * (month - 1)
    return start, start + 30.0


def _pt(cx, cy, r, angle_deg):
    a = math.radians(angle_deg)
    return cx + r * math.cos(a), cy + r * math.sin(a)


def _f(x):
    return f"{x:.3f}"


def _band_path(cx, cy, r_in, r_out, a0, a1):
    """Annular wedge path from angle a0 to a1 (clockwise on screen)."""
    x0o, y0o = _pt(cx, cy, r_out, a0)
    x1o, y1o = _pt(cx, cy, r_out, a1)
    x1i, y1i = _pt(cx, cy, r_in, a1)
    x0i, y0i = _pt(cx, cy, r_in, a0)
    return (f"M {_f(x0o)} {_f(y0o)} "
            f"A {_f(r_out)} {_f(r_out)} 0 0 1 {_f(x1o)} {_f(y1o)} "
            f"L {_f(x1i)} {_f(y1i)} "
            f"A {_f(r_in)} {_f(r_in)} 0 0 0 {_f(x0i)} {_f(y0i)} Z")


def _validate_summary(summary):
    if summary.vineyard_count <= 0:
        raise ValueError("summary has no member areas")
    if len(summary.months) != 12:
        raise ValueError("summary must carry 12 months")
    if summary.vineyard_count != len(summary.member_area_ids):
        raise ValueError("vineyard_count does not match member ids")
    for ms in summary.months:
        if ms.endangered_count + ms.safe_count != summary.vineyard_count:
            raise ValueError(f"month {ms.month}: counts do not sum to vineyard_count")
        for count, mean in ((ms.endangered_count, ms.mean_certainty_endangered),
                            (ms.safe_count, ms.mean_certainty_safe)):
            if count > 0:
                if mean is None or not 0.5 <= mean <= 1.0:
                    raise ValueError(f"month {ms.month}: mean certainty {mean} "
                                     f"invalid for count {count}")
            elif mean is not None:
                raise ValueError(f"month {ms.month}: certainty given for empty band")


def render_glyph(summary, radius_px, cell_size_m=None, encoding=DEFAULT_ENCODING):
    """Render one CellSummary as an SVG document string."""
    if radius_px < MIN_RADIUS_PX:
        raise ValueError(f"radius_px {radius_px} below minimum {MIN_RADIUS_PX}")
    _validate_summary(summary)

    r = float(radius_px)
    hub = HUB_RATIO * r
    cx = cy = r
    size = 2.0 * r
    i, j = summary.cell_index
    cell_attr = "" if cell_size_m is None else f' data-cell-size-m="{_f(float(cell_size_m))}"'

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(size)}" height="{_f(size)}" '
        f'viewBox="0 0 {_f(size)} {_f(size)}" data-cell-i="{i}" data-cell-j="{j}"'
        f'{cell_attr}>',
        '<g class="months">',
    ]
    for ms in summary.months:
        a0, a1 = month_angles(ms.month)
        fraction = ms.endangered_count / summary.vineyard_count
        r_split = split_radius(fraction, hub, r)
        if ms.endangered_count > 0:
            rgb = color_for("endangered", ms.mean_certainty_endangered, encoding)
            parts.append(
                f'<path class="band endangered" data-month="{ms.month}" '
                f'd="{_band_path(cx, cy, r_split, r, a0, a1)}" '
                f'fill="rgb({rgb[0]},{rgb[1]},{rgb[2]})" stroke="#ffffff" '
                f'stroke-width="0.5"/>')
        if ms.safe_count > 0:
            rgb = color_for("safe", ms.mean_certainty_safe, encoding)
            parts.append(
                f'<path class="band safe" data-month="{ms.month}" '
                f'd="{_band_path(cx, cy, hub, r_split, a0, a1)}" '
                f'fill="rgb({rgb[0]},{rgb[1]},{rgb[2]})" stroke="#ffffff" '
                f'stroke-width="0.5"/>')
    parts.append("</g>")
    parts.append(f'<circle class="hub" cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(hub)}" '
                 f'fill="#ffffff" stroke="#555555" stroke-width="1"/>')
    font_size = min(hub * 0.95, 2.2 * hub / len(str(summary.vineyard_count)))
    parts.append(f'<text class="count" x="{_f(cx)}" y="{_f(cy)}" text-anchor="middle" '
                 f'dominant-baseline="central" font-family="sans-serif" '
                 f'font-size="{_f(font_size)}">{summary.vineyard_count}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
