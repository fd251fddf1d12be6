"""Tests for witness clouds: u-functions, skeleton separation, synthesis."""

import random

import pytest

from datum_gen import sample_data
from padictrees.datum import (
    SideBranchDatum,
    SkeletonDatum,
    TERMINAL,
    TreeDatum,
    cusp_datum,
    point_datum,
    star_branch,
    terminal_branch,
    y_datum,
    zpn_datum,
)
from padictrees.errors import (
    DomainError,
    LevelCap,
    NotLeafless,
    NotRealizable,
)
from padictrees.gamma import INFINITY, const_fn, linear, whole_quadrant
from padictrees.padic import PadicApprox, from_int, val, vec
from padictrees.realize import (
    RealizationContext,
    WitnessCloud,
    realize,
    separating_depth,
    skeleton_fns,
    u_fn,
    verify_realization,
)
from padictrees.trees import Ball, from_points, is_isomorphic


def test_u_fn_integer_linear():
    ctx = RealizationContext(5, 12)
    x = vec(5, 12, [5**3 * 2])
    u = u_fn(linear([1], 0), x, ctx)
    assert val(u) == 3
    u2 = u_fn(linear([2], 1), x, ctx)
    assert val(u2) == 7


def test_u_fn_half_integer():
    # ell(k) = (k+1)/2 at v(x) = 3 gives v(u) = 2
    ctx = RealizationContext(5, 16)
    x = vec(5, 16, [5**3 * 3])
    u = u_fn(linear(["1/2"], "1/2"), x, ctx)
    assert val(u) == 2


def test_u_fn_rejects_bad_values():
    ctx = RealizationContext(5, 12)
    x = vec(5, 12, [5**3])
    with pytest.raises(DomainError):
        u_fn(linear(["1/2"], 0), x, ctx)  # 3/2 is not an integer
    with pytest.raises(DomainError):
        u_fn(linear([1], -7), x, ctx)  # negative valuation


def test_u_fn_valuation_is_exact_randomized():
    rng = random.Random(5)
    fns = [
        linear([1], 0),
        linear(["1/2"], "1/2"),
        linear([2, 1], 1),
        linear(["1/3", "2/3"], 0),
        linear(["3/4", "1/2"], "1/4"),
    ]
    for p in (3, 5):
        ctx = RealizationContext(p, 24)
        for ell in fns:
            m = len(ell.coeffs)
            for _ in range(40):
                ks = [rng.randint(0, 4) for _ in range(m)]
                lv = ell.value(ks)
                if lv.denominator != 1 or lv < 0:
                    continue
                # unit parts 1 mod p keep the coordinate valuations exact
                coords = [p**k * (1 + p * rng.randrange(p**5)) for k in ks]
                x = vec(p, 24, coords)
                assert val(u_fn(ell, x, ctx)) == int(lv)


def test_u_fn_lipschitz_sampled():
    # whenever ell >= every coordinate valuation, u is 1-Lipschitz on the
    # set with that valuation vector
    rng = random.Random(17)
    violations = 0
    checked = 0
    for p in (3, 5):
        ctx = RealizationContext(p, 24)
        for _ in range(10):
            m = rng.randint(1, 2)
            e = rng.randint(1, 4)
            bs = [e + rng.randint(0, 2 * e) for _ in range(m)]
            beta = rng.randint(0, 2) * e
            ell = linear(
                [f"{b}/{e}" for b in bs], f"{beta}/{e}"
            )
            for _ in range(50):
                ks = [rng.randint(0, 3) for _ in range(m)]
                if ell.value(ks).denominator != 1:
                    continue
                xs = [p**k * (1 + p * rng.randrange(p**5)) for k in ks]
                d = rng.randint(max(ks) + 1, 12)
                ys = [
                    a + p**d * rng.randrange(p**4) for a in xs
                ]
                x, y = vec(p, 24, xs), vec(p, 24, ys)
                diff = min(
                    v if isinstance(v, int) else 99
                    for v in [val(c) for c in (x - y).coords]
                )
                ux, uy = u_fn(ell, x, ctx), u_fn(ell, y, ctx)
                du = val(ux - uy)
                checked += 1
                if isinstance(du, int) and du < min(diff, 20):
                    violations += 1
    assert checked > 200
    assert violations == 0


def test_skeleton_separation_depths():
    # skeleton of Y(3): the two branch joints separate at depth 3
    D = y_datum(3, m=0)
    sep = separating_depth(D, 2, 3)
    assert sep.value(()) == 3
    fns = skeleton_fns(D)
    ctx = RealizationContext(5, 20)
    vals = [fns.value(j, ctx=ctx) for j in range(4)]
    # distinct virtual joints must differ exactly at the separation depth
    d23 = min(
        v if isinstance(v, int) else 99
        for v in [val(a - b) for a, b in zip(vals[2], vals[3])]
    )
    assert d23 == 3


def test_realize_point_is_path():
    cloud = realize(point_datum(), 6, p=3)
    report = verify_realization(cloud, point_datum(), 3, 6)
    assert report.ok, report.message
    assert report.cloud_layers == [1] * 7


def test_realize_named_data():
    cases = [
        (y_datum(0, m=0), 3, 6),
        (y_datum(3, m=0), 3, 8),
        (zpn_datum(1, 3), 3, 5),
        (zpn_datum(2, 3), 3, 4),
        (cusp_datum(3), 3, 6),
        (cusp_datum(5), 5, 4),
    ]
    for D, p, cap in cases:
        cloud = realize(D, cap, p=p)
        report = verify_realization(cloud, D, p, cap)
        assert report.ok, (report.message, D)


def test_realize_rejects_parametrized():
    with pytest.raises(NotRealizable):
        realize(y_datum(linear([1]), m=1), 4, p=3)


def test_realize_rejects_level_3():
    with pytest.raises(LevelCap):
        realize(zpn_datum(3, 2), 3, p=2)


def test_realize_rejects_leafy_datum():
    # a side branch that stops at depth 1 creates tree leaves
    sk = SkeletonDatum((-1, 0), (INFINITY,))
    whole = whole_quadrant(0)
    from padictrees.datum import _whole_strip

    D = TreeDatum(
        level=0, m=0, domain=whole, rho=1, skeleton=sk,
        joint_branches=((0, star_branch(1, TERMINAL)),),
        bone_branches=((1, _whole_strip(whole), terminal_branch()),),
    )
    with pytest.raises(NotLeafless):
        realize(D, 4, p=3)


def test_realize_rejects_dead_end_joint():
    sk = SkeletonDatum((-1, 0), (const_fn(2, 0),))
    whole = whole_quadrant(0)
    from padictrees.datum import _whole_strip

    D = TreeDatum(
        level=0, m=0, domain=whole, rho=1, skeleton=sk,
        joint_branches=((0, terminal_branch()), (1, terminal_branch())),
        bone_branches=((1, _whole_strip(whole), terminal_branch()),),
    )
    with pytest.raises(NotLeafless):
        realize(D, 4, p=3)


def test_cloud_json_round_trip(tmp_path):
    cloud = realize(y_datum(2, m=0), 5, p=3)
    path = tmp_path / "cloud.json"
    path.write_text(__import__("json").dumps(cloud.to_json()))
    back = WitnessCloud.load(str(path))
    assert back == cloud
    report = verify_realization(back, y_datum(2, m=0), 3, 5)
    assert report.ok


def test_cloud_points_have_declared_shape():
    cloud = realize(cusp_datum(3), 4, p=3)
    assert cloud.m == 0
    for pt in cloud.points:
        assert len(pt) == cloud.N
        assert pt.prec == cloud.prec
    assert len(cloud.provenance) == len(cloud.points)


def test_realize_random_data():
    for seed, p in ((101, 3), (202, 5)):
        for D in sample_data(seed, 4, p, 6, max_nodes=20000):
            cloud = realize(D, 6, p=p)
            report = verify_realization(cloud, D, p, 6)
            assert report.ok, (report.message, D)


def test_verify_detects_wrong_cloud():
    cloud = realize(y_datum(1, m=0), 5, p=3)
    report = verify_realization(cloud, y_datum(2, m=0), 3, 5)
    assert not report.ok
    assert "mismatch" in report.message
