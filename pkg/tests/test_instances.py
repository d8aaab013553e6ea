import json
import math

import numpy as np
import pytest

from freezetag import instances as I


def test_empty_random_instance():
    inst = I.gen_random("disk_l2", 0, 3)
    assert inst.n == 0 and inst.asleep.shape == (0, 2)


@pytest.mark.parametrize("space", I.SPACES)
def test_generator_deterministic(space):
    assert I.gen_random(space, 25, 99) == I.gen_random(space, 25, 99)
    assert I.gen_random(space, 25, 99) != I.gen_random(space, 25, 100)


def test_l1_ball_containment_scan():
    inst = I.gen_random("ball_l1_r3", 10_000, 5)
    assert np.all(np.abs(inst.asleep).sum(axis=1) <= 1.0)


def test_l1_boundary_on_surface():
    inst = I.gen_random("ball_l1_r3", 500, 5, on_boundary=True)
    assert np.allclose(np.abs(inst.asleep).sum(axis=1), 1.0, atol=1e-12)


def test_disk_uniformity():
    inst = I.gen_random("disk_l2", 100_000, 1)
    r = np.linalg.norm(inst.asleep, axis=1)
    # radius density 2r on [0,1]: mean 2/3, variance 1/18
    sigma = math.sqrt(1 / 18 / len(r))
    assert abs(r.mean() - 2 / 3) <= 3 * sigma


def test_sphere_boundary_only():
    with pytest.raises(I.InstanceError):
        I.gen_random("sphere_boundary", 3, 1, on_boundary=False)


def test_surface_source_on_sphere():
    inst = I.gen_random("sphere_surface", 4, 2)
    assert np.linalg.norm(inst.source) == pytest.approx(1.0, abs=1e-12)


def test_unknown_space():
    with pytest.raises(I.InstanceError):
        I.gen_random("torus", 3, 1)


def test_circle_four():
    inst = I.gen_equally_spaced_circle(4)
    assert np.allclose(inst.asleep, [(1, 0), (0, 1), (-1, 0), (0, -1)], atol=1e-15)


def test_circle_zero_is_error():
    with pytest.raises(I.InstanceError):
        I.gen_equally_spaced_circle(0)


@pytest.mark.parametrize("name,n,first", [("fig5-n5", 5, (0.954, 0.298)), ("fig5-n7", 7, (0.852, 0.522))])
def test_fixtures(name, n, first):
    inst = I.paper_instance(name)
    assert inst.n == n
    assert tuple(inst.asleep[0]) == first


@pytest.mark.parametrize("name", I.fixture_names())
def test_fixture_angles_consistent(name):
    inst = I.paper_instance(name)
    angles = [math.degrees(math.atan2(y, x)) % 360 for x, y in inst.asleep]
    assert np.allclose(angles, I.FIXTURE_ANGLES_DEG[name], atol=0.06)


def test_unknown_fixture():
    with pytest.raises(I.InstanceError):
        I.paper_instance("fig9")


@pytest.mark.parametrize("name", I.fixture_names())
def test_round_trip_fixtures(name):
    inst = I.paper_instance(name)
    assert I.parse_instance(I.serialize_instance(inst)) == inst


@pytest.mark.parametrize("space", I.SPACES)
def test_round_trip_random(space):
    for seed in range(100):
        inst = I.gen_random(space, seed % 13, seed)
        back = I.parse_instance(I.serialize_instance(inst))
        assert back == inst
        assert np.array_equal(back.asleep, inst.asleep)


def test_fixture_file(fixture_dir):
    inst = I.load_instance(fixture_dir / "fig5-n7.json")
    assert inst.n == 7 and inst.name == "fig5-n7"


def test_parse_rejects_outside_point():
    doc = {"space": "disk_l2", "source": [0, 0], "asleep": [[0.1, 0.1], [1.01, 0.0]]}
    with pytest.raises(I.InstanceError, match="robot 2"):
        I.parse_instance(json.dumps(doc))


@pytest.mark.parametrize("text", ["{", "[]", '{"space": "disk_l2"}', '{"space": "disk_l2", "source": [0, 0], "asleep": [[1, "a"]]}'])
def test_parse_rejects_malformed(text):
    with pytest.raises(I.InstanceError):
        I.parse_instance(text)


def test_source_must_be_origin():
    with pytest.raises(I.InstanceError):
        I.Instance("disk_l2", (0.1, 0.0), [(0.5, 0.0)])


def test_instance_arrays_read_only():
    inst = I.gen_random("disk_l2", 3, 1)
    with pytest.raises(ValueError):
        inst.asleep[0, 0] = 5.0


def test_points_csv_layout():
    text = I.points_csv(I.paper_instance("fig5-n5"))
    lines = text.splitlines()
    assert lines[0] == "point,theta_deg,x,y"
    assert lines[1].startswith("p1,17.3")
    assert len(lines) == 6
