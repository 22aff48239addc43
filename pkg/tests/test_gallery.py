import math

import numpy as np
import pytest

from fixpoint.core import check_modulus_admissible, verify_contractive
from fixpoint.errors import ArgumentError, UnknownMapError
from fixpoint.gallery import list_maps, make_map, map_summary

ALL_NAMES = ("affine-halfline", "rakotch-decay", "constant",
             "planar-rotation", "damped-rational")


def test_registry_lists_all_maps():
    assert list_maps() == ALL_NAMES


def test_make_map_unknown_name():
    with pytest.raises(UnknownMapError):
        make_map("moebius")


def test_make_map_unknown_parameter():
    with pytest.raises(ArgumentError):
        make_map("rakotch-decay", b=2.0)
    with pytest.raises(ArgumentError):
        make_map("affine-halfline", a=1.0)


def test_make_map_range_validation():
    with pytest.raises(ArgumentError):
        make_map("rakotch-decay", a=0.0)
    with pytest.raises(ArgumentError):
        make_map("rakotch-decay", a=101.0)
    with pytest.raises(ArgumentError):
        make_map("planar-rotation", theta=0.01)


def test_rotation_radius_margin_enforced():
    # theta = pi/4 with unit translation needs radius >= 2 sqrt(2)
    with pytest.raises(ArgumentError):
        make_map("planar-rotation", radius=2.0)
    make_map("planar-rotation", radius=3.0)


def test_constant_box_must_straddle_zero():
    with pytest.raises(ArgumentError):
        make_map("constant", lo=-2.0, hi=-1e-6)


@pytest.mark.parametrize("name", ALL_NAMES)
def test_known_fixed_points_are_fixed(name):
    e = make_map(name)
    if e.known_fixed_point is None:
        return
    T = e.mapping
    img = T.apply(e.known_fixed_point)
    assert T.space.distance(e.known_fixed_point, img) <= 1e-12


def test_constant_outside_box_has_no_fixed_point():
    assert make_map("constant", c=2.0).known_fixed_point is None
    e = make_map("constant", c=0.25)
    assert e.known_fixed_point is not None
    assert e.known_fixed_point[0] == 0.25


@pytest.mark.parametrize("name", ALL_NAMES)
def test_samplers_land_in_domain(name):
    e = make_map(name)
    rng = np.random.default_rng(47)
    for _ in range(300):
        p = e.sampler(rng)
        assert p.shape == (e.mapping.space.dimension,)
        assert e.mapping.domain.contains(p)


@pytest.mark.parametrize("name", ALL_NAMES)
def test_declared_moduli_hold_on_sampled_pairs(name):
    e = make_map(name)
    rng = np.random.default_rng(53)
    pairs = [(e.sampler(rng), e.sampler(rng)) for _ in range(200)]
    # rotations are isometries: distances are preserved, not shrunk, and
    # the recomputation costs an ulp either way
    rep = verify_contractive(e.mapping, pairs, slack=1e-12)
    assert rep.passed, [c for c in rep.checks if not c.passed][:3]


@pytest.mark.parametrize("name", ALL_NAMES)
def test_declared_moduli_admissible_except_sentinel(name):
    e = make_map(name)
    grid = np.concatenate([[0.0], np.geomspace(1e-6, 50.0, 100)])
    rep = check_modulus_admissible(e.mapping.declared_modulus, grid)
    if name == "planar-rotation":
        assert not rep.admissible
        assert len(rep.not_below_one) == 100
    else:
        assert rep.admissible


@pytest.mark.parametrize("name,ts", [
    ("affine-halfline", (0.0, 0.3, 0.9, 0.99)),
    ("rakotch-decay", (0.0, 0.5, 0.9)),
    ("damped-rational", (0.0, 0.5, 0.9)),
    ("planar-rotation", (0.0, 0.5, 0.9)),
    ("constant", (0.0, 0.2, 0.4)),     # t c inside the box only up to 1/2
])
def test_known_paths_satisfy_the_homotopy_equation(name, ts):
    e = make_map(name)
    T = e.mapping
    for t in ts:
        x = e.known_path(t)
        assert T.space.distance(x, t * T.apply(x)) <= 1e-12


def test_rotation_path_stays_within_half_the_disk():
    e = make_map("planar-rotation")
    radius = e.params["radius"]
    for t in np.linspace(0.0, 0.999, 50):
        assert np.linalg.norm(e.known_path(t)) <= radius / 2.0 + 1e-9


def test_map_summaries_mention_parameters():
    s = map_summary("rakotch-decay")
    assert "a = 1.0" in s
    assert "rakotch-decay" in s
    with pytest.raises(UnknownMapError):
        map_summary("nope")


def test_entries_carry_notes_and_params():
    for name in ALL_NAMES:
        e = make_map(name)
        assert e.notes
        assert e.name == name
    assert make_map("rakotch-decay", a=2.5).params["a"] == 2.5
