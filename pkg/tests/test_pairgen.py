import json

import numpy as np
import pytest

from chromapulse import colorspace as cs
from chromapulse import pairgen as pg
from chromapulse.pairgen import Symbol


GRAY = (128, 128, 128)
WHITE = (255, 255, 255)
DEFAULTS = pg.PairConstraints()


def sweep_max_half_excursion(target, symbol, constraints, step=1e-4):
    """Brute-force oracle: exhaustive amplitude sweep instead of bisection."""
    best = None
    for a in np.arange(0.001, 0.2 + step / 2, step):
        if pg.construct_at_amplitude(target, symbol, a, constraints) is not None:
            best = a
    return best


def test_delta_e_basics():
    assert pg.delta_e([50, 10, -3], [50, 10, -3]) == 0.0
    assert abs(pg.delta_e([50, 0, 0], [53, 4, 0]) - 5.0) < 1e-12
    rng = np.random.default_rng(0)
    for _ in range(1000):
        x = rng.uniform(-100, 100, 3)
        y = rng.uniform(-100, 100, 3)
        assert pg.delta_e(x, y) == pg.delta_e(y, x)


def test_none_pair_degenerate():
    pair = pg.find_pair(GRAY, Symbol.NONE)
    assert pair.c1 == GRAY and pair.c2 == GRAY and pair.amplitude == 0.0


def test_gray_rb_pair_exists_with_min_depth():
    # Oracle sweep confirms gray has symmetric headroom for the RB symbol.
    a_max = sweep_max_half_excursion(GRAY, Symbol.RB, DEFAULTS, step=5e-4)
    assert a_max is not None and 2 * a_max >= 0.05
    pair = pg.find_pair(GRAY, Symbol.RB)
    assert pair.amplitude >= 0.05


def test_white_r_pair_lowers_red_about_shifted_center():
    # White has no headroom to raise R; the pair lowers both colors' R
    # symmetrically about a slightly darker operating point.
    a_max = sweep_max_half_excursion(WHITE, Symbol.R, DEFAULTS, step=5e-4)
    assert a_max is not None  # feasible, at reduced luminance
    pair = pg.find_pair(WHITE, Symbol.R)
    r1 = cs.srgb_to_linear(pair.c1)[0]
    r2 = cs.srgb_to_linear(pair.c2)[0]
    assert max(r1, r2) <= 1.0
    assert 0.5 * (r1 + r2) < 1.0
    assert pair.center_shifted


def test_bisection_matches_sweep_oracle():
    for target, symbol in [(GRAY, Symbol.RB), (GRAY, Symbol.R), (WHITE, Symbol.R)]:
        a_sweep = sweep_max_half_excursion(target, symbol, DEFAULTS, step=1e-4)
        pair = pg.find_pair(target, symbol)
        assert abs(pair.search_amplitude - 2 * a_sweep) <= 3e-4


def test_black_infeasible_at_default_constraints():
    # Any detectable depth on a channel that emits no light costs far more
    # than the default per-color color-difference budget.
    for symbol in (Symbol.R, Symbol.B, Symbol.RB):
        with pytest.raises(pg.InfeasiblePairError):
            pg.find_pair((0, 0, 0), symbol)


def test_generated_pairs_satisfy_all_invariants():
    for cons in (DEFAULTS, pg.FUSION_CONSTRAINTS):
        palette = pg.build_palette(list(pg.REPRESENTATIVE_COLORS.values()), cons)
        checked = 0
        for (idx, sym), pair in palette.pairs.items():
            if pair is None or sym == Symbol.NONE:
                continue
            ok, det = pg.validate_pair_linear(
                cs.srgb_to_linear(pair.c1), cs.srgb_to_linear(pair.c2),
                pair.target, sym, cons)
            assert ok, (pair.target, sym, det)
            checked += 1
        assert checked >= 7


def test_palette_nine_colors_three_symbols_under_fusion_constraints():
    palette = pg.build_palette(list(pg.REPRESENTATIVE_COLORS.values()),
                               pg.FUSION_CONSTRAINTS)
    for idx in range(len(palette.colors)):
        assert len(palette.feasible_symbols(idx)) >= 3
    assert palette.feasible_count() >= 27


def test_palette_default_constraints_records_infeasible():
    palette = pg.build_palette(list(pg.REPRESENTATIVE_COLORS.values()), DEFAULTS)
    black_idx = palette.colors.index((0, 0, 0))
    assert palette.feasible_symbols(black_idx) == []
    assert palette.get(black_idx, Symbol.R) is None
    gray_idx = palette.colors.index(GRAY)
    assert len(palette.feasible_symbols(gray_idx)) == 3


def test_empty_palette():
    palette = pg.build_palette([])
    assert palette.colors == [] and palette.pairs == {}


def test_single_gray_three_feasible():
    palette = pg.build_palette([GRAY])
    assert len(palette.feasible_symbols(0)) == 3


def test_symbols_distinguishable_by_ideal_sensor():
    palette = pg.build_palette([GRAY, WHITE])
    for (idx, sym), pair in palette.pairs.items():
        if pair is None:
            continue
        assert pg.classify_pair(pair.c1, pair.c2) == sym


def test_palette_json_roundtrip():
    palette = pg.build_palette(list(pg.REPRESENTATIVE_COLORS.values()), DEFAULTS)
    text = palette.to_json()
    doc = json.loads(text)
    assert all(set(e) == {"target", "symbol", "c1", "c2", "amplitude"} for e in doc)
    loaded = pg.Palette.from_json(text)
    assert loaded.colors == palette.colors
    for key, pair in palette.pairs.items():
        other = loaded.pairs[key]
        if pair is None:
            assert other is None
        else:
            assert other.c1 == pair.c1 and other.c2 == pair.c2


def test_out_of_range_target_rejected():
    with pytest.raises(ValueError):
        pg.find_pair((300, 0, 0), Symbol.R)


def test_random_targets_generated_pairs_valid():
    rng = np.random.default_rng(11)
    symbols = [Symbol.R, Symbol.B, Symbol.RB]
    feasible = 0
    for i in range(60):
        target = tuple(int(v) for v in rng.integers(0, 256, 3))
        sym = symbols[i % 3]
        try:
            pair = pg.find_pair(target, sym)
        except pg.InfeasiblePairError:
            continue
        ok, det = pg.validate_pair_linear(
            cs.srgb_to_linear(pair.c1), cs.srgb_to_linear(pair.c2),
            target, sym, DEFAULTS)
        assert ok, (target, sym, det)
        feasible += 1
    assert feasible >= 10
