import math
import re

import numpy as np
import pytest

from pestcast.grid import CellSummary, MonthStats
from pestcast.glyph import color_for, month_angles, render_glyph, split_radius


def month_stats(month, endangered, safe, ce=None, cs=None, sd=0.0):
    return MonthStats(month=month, endangered_count=endangered, safe_count=safe,
                      mean_certainty_endangered=ce, mean_certainty_safe=cs,
                      stddev_certainty=sd)


def summary_with(fracs, count=10, ce=0.9, cs=0.7, cell=(4, 30)):
    months = []
    for m, f in enumerate(fracs, start=1):
        e = round(f * count)
        s = count - e
        months.append(month_stats(m, e, s, ce if e else None, cs if s else None, 0.05))
    return CellSummary(cell_index=cell, vineyard_count=count, months=tuple(months),
                       member_area_ids=tuple(f"A{i}" for i in range(count)))


ALL_RED = summary_with([1.0] * 12)
ALL_BLUE = summary_with([0.0] * 12)
MIXED = summary_with([0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 0.5])


class TestGeometry:
    def test_split_radius_endpoints(self):
        assert split_radius(1.0, 0.25, 1.0) == pytest.approx(0.25, abs=1e-12)
        assert split_radius(0.0, 0.25, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_split_radius_hand_value(self):
        # hub 0.25R, f = 0.5 -> sqrt(0.0625 + 0.5 * 0.9375)
        assert split_radius(0.5, 0.25, 1.0) == pytest.approx(math.sqrt(0.53125), abs=1e-9)

    def test_area_fraction_exact_for_grid_of_fractions(self):
        hub, r = 0.25, 1.0
        for f in np.arange(0.0, 1.0001, 0.1):
            r_b = split_radius(f, hub, r)
            outer_share = (r * r - r_b * r_b) / (r * r - hub * hub)
            assert outer_share == pytest.approx(f, abs=1e-6)

    def test_area_fraction_against_numeric_integration(self):
        # integrate band areas in polar coordinates as an independent check
        hub, r = 0.25, 1.0
        for f in (0.2, 0.5, 0.85):
            r_b = split_radius(f, hub, r)
            rr = np.linspace(r_b, r, 20001)
            outer = np.trapezoid(2 * np.pi * rr / 12, rr)
            rr_all = np.linspace(hub, r, 20001)
            wedge = np.trapezoid(2 * np.pi * rr_all / 12, rr_all)
            assert outer / wedge == pytest.approx(f, abs=1e-6)

    def test_month_angles_clock_layout(self):
        assert month_angles(1) == (-90.0, -60.0)  # January: 12 to 1 o'clock
        assert month_angles(4) == (0.0, 30.0)     # April starts at 3 o'clock
        spans = [month_angles(m) for m in range(1, 13)]
        assert sum(b - a for a, b in spans) == pytest.approx(360.0)
        for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
            assert a1 == b0  # contiguous, no gaps or overlaps


class TestColors:
    def test_endpoints(self):
        assert color_for("endangered", 1.0) == (180, 4, 38)
        assert color_for("safe", 1.0) == (59, 76, 192)
        assert color_for("endangered", 0.5) == (242, 242, 242)
        assert color_for("safe", 0.5) == (242, 242, 242)

    def test_linear_midpoint(self):
        # midpoint of (242,242,242) and (180,4,38)
        assert color_for("endangered", 0.75) == (211, 123, 140)

    def test_strictly_monotone_distance_from_neutral(self):
        for outcome in ("endangered", "safe"):
            last = -1.0
            for c in np.arange(0.5, 1.0001, 0.01):
                rgb = color_for(outcome, min(float(c), 1.0))
                dist = math.dist(rgb, (242, 242, 242))
                assert dist > last - 1e-9
                if c > 0.5:
                    assert dist > 0.0
                last = dist

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            color_for("endangered", 0.4)
        with pytest.raises(ValueError):
            color_for("endangered", 1.01)
        with pytest.raises(ValueError):
            color_for("mystery", 0.8)


class TestRender:
    def test_all_endangered_has_no_safe_bands(self):
        svg = render_glyph(ALL_RED, 64.0)
        assert svg.count('class="band endangered"') == 12
        assert 'class="band safe"' not in svg

    def test_all_safe_has_no_endangered_bands(self):
        svg = render_glyph(ALL_BLUE, 64.0)
        assert svg.count('class="band safe"') == 12
        assert 'class="band endangered"' not in svg

    def test_deterministic_bytes(self):
        a = render_glyph(MIXED, 64.0, cell_size_m=12500.0)
        b = render_glyph(MIXED, 64.0, cell_size_m=12500.0)
        assert a == b

    def test_root_data_attributes_and_count(self):
        svg = render_glyph(MIXED, 64.0, cell_size_m=12500.0)
        assert 'data-cell-i="4"' in svg
        assert 'data-cell-j="30"' in svg
        assert 'data-cell-size-m="12500.000"' in svg
        assert ">10</text>" in svg

    def test_radius_minimum_enforced(self):
        with pytest.raises(ValueError, match="radius"):
            render_glyph(MIXED, 15.9)

    def test_invalid_summary_rejected(self):
        bad = CellSummary(cell_index=(0, 0), vineyard_count=3,
                          months=MIXED.months, member_area_ids=("A", "B"))
        with pytest.raises(ValueError):
            render_glyph(bad, 64.0)
        months = list(MIXED.months)
        months[0] = month_stats(1, 5, 6, 0.9, 0.7)  # counts exceed vineyard_count
        bad2 = CellSummary(cell_index=(0, 0), vineyard_count=10,
                           months=tuple(months), member_area_ids=MIXED.member_area_ids)
        with pytest.raises(ValueError):
            render_glyph(bad2, 64.0)

    def test_fixed_decimal_precision(self):
        svg = render_glyph(MIXED, 64.0)
        for num in re.findall(r'd="M ([0-9.]+) ', svg):
            assert re.fullmatch(r"\d+\.\d{3}", num)

    def test_golden_files(self, tmp_path):
        import pathlib
        golden_dir = pathlib.Path(__file__).parent / "golden"
        for name, summary, radius in (("all_red", ALL_RED, 64.0),
                                      ("all_blue", ALL_BLUE, 32.0),
                                      ("mixed", MIXED, 64.0)):
            svg = render_glyph(summary, radius, cell_size_m=12500.0)
            golden = golden_dir / f"{name}.svg"
            assert golden.exists(), f"golden file {golden} missing"
            assert svg == golden.read_text(encoding="utf-8"), name
