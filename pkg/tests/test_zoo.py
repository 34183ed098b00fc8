import numpy as np
import pytest

from framecurv import zoo
from framecurv.collapse import SplitSpec, collapse_profile, npb_indicator, restricted_scalars
from framecurv.curvature import scalar_curvature_frame, scalar_curvature_lie
from framecurv.geometry import frame_matrix, metric_from_frame, sample_points


@pytest.mark.parametrize("zoo_id", zoo.ZOO_IDS)
def test_lookup(zoo_id):
    e = zoo.get(zoo_id)
    assert e.id == zoo_id
    for exp in e.expected.values():
        assert exp.provenance in zoo.PROVENANCE


@pytest.mark.parametrize("zoo_id", zoo.ZOO_IDS)
def test_expected_scalar(zoo_id):
    e = zoo.get(zoo_id)
    want = e.expected["scalar_curvature"].value
    for x in sample_points(e.manifold, 10, seed=1):
        assert scalar_curvature_frame(e.manifold, x) == pytest.approx(want, abs=1e-6)
    if e.constants is not None:
        assert scalar_curvature_lie(e.constants) == pytest.approx(want, abs=1e-14)


@pytest.mark.parametrize("zoo_id", ["s3", "seven", "flat2", "flat7"])
def test_expected_profile(zoo_id):
    e = zoo.get(zoo_id)
    x = sample_points(e.manifold, 1, seed=0)[0]
    p = collapse_profile(e.manifold, e.default_split, x)
    for name in ("q4", "q2", "q0", "qm2"):
        assert getattr(p, name) == pytest.approx(e.expected[name].value, abs=1e-7)


def test_seven_extras():
    e = zoo.seven_manifold()
    x = sample_points(e.manifold, 1, seed=0)[0]
    assert restricted_scalars(e.manifold, e.default_split, x)[1] == pytest.approx(
        e.expected["S2"].value)
    assert npb_indicator(e.manifold, e.default_split, x) == pytest.approx(
        e.expected["npb_indicator"].value)
    assert e.expected["q0_as_printed"].value == zoo.seven_manifold(-2.0).expected["q0"].value


def test_seven_labels_and_split():
    e = zoo.seven_manifold()
    assert e.manifold.frame_labels[-3:] == ("e1", "e4", "e5")
    assert e.default_split == SplitSpec(4, 3)


@pytest.mark.parametrize("bad", [0.0, 1.0])
def test_seven_rejects_non_negative_curvature(bad):
    with pytest.raises(ValueError):
        zoo.seven_manifold(bad)


def test_flat_range():
    with pytest.raises(ValueError):
        zoo.flat(0)
    with pytest.raises(ValueError):
        zoo.flat(9)
    assert zoo.get("flat5").dim == 5


def test_unknown_ids():
    for bad in ("torus", "lie:so3", "flat"):
        with pytest.raises(KeyError):
            zoo.get(bad)


def test_lie_group_validation():
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = 1.0  # missing antisymmetric partner
    with pytest.raises(ValueError):
        zoo.lie_group(c, "broken")
    with pytest.raises(ValueError):
        zoo.lie_group(np.zeros((2, 2, 3)), "broken")
    entry = zoo.lie_group(np.zeros((2, 2, 2)), "plane")
    assert entry.manifold is None and entry.dim == 2


def test_s3_chart_inside_ball():
    box = np.array(zoo.sphere3().manifold.sample_box)
    assert np.linalg.norm(np.max(np.abs(box), axis=1)) < 2.0


@pytest.mark.parametrize("entry", zoo.chart_entries(), ids=lambda e: e.id)
def test_box_is_regular(entry):
    m = entry.manifold
    box = np.array(m.sample_box)
    corners = np.array(np.meshgrid(*box)).reshape(m.dim, -1).T
    for x in np.vstack([corners[:64], sample_points(m, 50, seed=3)]):
        assert abs(np.linalg.det(frame_matrix(m, x))) > 1e-10
        assert np.min(np.linalg.eigvalsh(metric_from_frame(m, x))) > 0
