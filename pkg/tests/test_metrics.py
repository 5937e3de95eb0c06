import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from rfsweep.annotate import Annotation
from rfsweep.metrics import IOU_THRESHOLDS, Detection, average_precision, iou, map_scores

G = (0.5, 0.5, 0.5, 0.5)
D = (0.625, 0.5, 0.5, 0.5)  # IoU with G: 0.1875 / 0.3125 = 0.6
FAR = (0.1, 0.1, 0.1, 0.1)


def gt(c, box):
    return Annotation(c, *box)


def test_iou_examples():
    assert iou(G, G) == 1.0
    assert iou((0.2, 0.2, 0.1, 0.1), (0.8, 0.8, 0.1, 0.1)) == 0.0
    assert iou((0.5, 0.5, 1, 1), (0.75, 0.5, 0.5, 1)) == pytest.approx(0.5)
    assert iou(G, D) == pytest.approx(0.6, abs=1e-15)
    assert iou((0.5, 0.5, 0.0, 0.2), (0.5, 0.5, 0.0, 0.2)) == 0.0


def test_thresholds():
    np.testing.assert_array_equal(IOU_THRESHOLDS, [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95])


def test_perfect_predictions():
    gts = [[gt(0, G), gt(3, FAR)], [gt(1, (0.3, 0.6, 0.2, 0.1))]]
    dets = [[Detection(g.class_id, (g.cx, g.cy, g.w, g.h), 1.0) for g in img] for img in gts]
    r = map_scores(dets, gts)
    assert r.map50 == 1.0 and r.map50_95 == 1.0


def test_empty_predictions():
    r = map_scores([[], []], [[gt(0, G)], [gt(2, FAR)]])
    assert r.map50 == 0.0 and r.map50_95 == 0.0


def test_errors():
    with pytest.raises(ValueError):
        map_scores([[]], [[], []])
    with pytest.raises(ValueError):
        map_scores([[Detection(0, G, 1.0)]], [[]])


def hand_fixture():
    """Three images, two classes; per class one TP at IoU 0.6, one FP, one missed GT.

    class 0: TP (0.9) ranked above FP (0.8)      -> PR points (r .5, p 1), (r .5, p .5)
    class 1: FP (0.95) ranked above TP (0.7)     -> PR points (r 0, p 0), (r .5, p .5)
    """
    gts = [
        [gt(0, G)],
        [gt(1, G)],
        [gt(0, (0.8, 0.8, 0.2, 0.2)), gt(1, (0.8, 0.8, 0.2, 0.2))],
    ]
    dets = [
        [Detection(0, D, 0.9)],
        [Detection(1, D, 0.7), Detection(1, FAR, 0.95)],
        [Detection(0, FAR, 0.8)],
    ]
    return dets, gts


# Hand-worked from the staircases above with 101 recall points 0, .01, ..., 1:
# recall points 0..0.50 (51 of them) see the envelope, the remaining 50 see 0.
HAND_AP50 = {0: 51 / 101, 1: 0.5 * 51 / 101}
HAND_MAP50 = 38.25 / 101
# the TP holds at IoU thresholds 0.50, 0.55, 0.60 only
HAND_MAP50_95 = (3 * 51 + 3 * 25.5) / (101 * 20)


def test_hand_worked_fixture():
    dets, gts = hand_fixture()
    r = map_scores(dets, gts)
    assert r.ap[0][0] == pytest.approx(HAND_AP50[0], abs=1e-15)
    assert r.ap[1][0] == pytest.approx(HAND_AP50[1], abs=1e-15)
    np.testing.assert_allclose(r.ap[0][:3], HAND_AP50[0], atol=1e-15)
    np.testing.assert_array_equal(r.ap[0][3:], 0.0)
    assert r.map50 == pytest.approx(HAND_MAP50, abs=1e-15)
    assert r.map50_95 == pytest.approx(HAND_MAP50_95, abs=1e-15)


def test_class_agnostic_collapse():
    dets, gts = hand_fixture()
    r = map_scores(dets, gts, class_agnostic=True)
    assert list(r.ap) == [0]
    # ranking .95 FP, .9 TP, .8 FP, .7 TP over 4 GT
    tp = np.array([False, True, False, True])
    assert r.ap[0][0] == pytest.approx(average_precision(tp, 4))


def test_report_serialization():
    dets, gts = hand_fixture()
    r = map_scores(dets, gts)
    d = r.to_dict(["a", "b"])
    assert set(d["per_class"]) == {"a", "b"}
    assert d["mAP50"] == r.map50
    assert "all" in r.table()


# -- properties ----------------------------------------------------------------

coord = st.floats(0.05, 0.95)
size = st.floats(0.01, 0.5)
box = st.tuples(coord, coord, size, size)


@given(box, box)
def test_iou_symmetry_and_bounds(a, b):
    assert iou(a, b) == iou(b, a)
    assert 0.0 <= iou(a, b) <= 1.0
    assert iou(a, a) == pytest.approx(1.0)


@st.composite
def scenes(draw):
    n_img = draw(st.integers(1, 4))
    gts, dets = [], []
    for _ in range(n_img):
        g = draw(st.lists(st.tuples(st.integers(0, 2), st.floats(0.1, 0.4), st.floats(0.1, 0.4),
                                    st.floats(0.05, 0.2), st.floats(0.05, 0.2)), max_size=4))
        gts.append([Annotation(*t) for t in g])
        img_dets = []
        for t in g:
            if draw(st.booleans()):
                jitter = draw(st.tuples(*[st.floats(-0.03, 0.03)] * 4))
                bx = (t[1] + jitter[0], t[2] + jitter[1], max(0.01, t[3] + jitter[2]), max(0.01, t[4] + jitter[3]))
                img_dets.append((t[0], bx))
        for _ in range(draw(st.integers(0, 3))):
            img_dets.append((draw(st.integers(0, 2)),
                             (draw(st.floats(0.1, 0.45)), draw(st.floats(0.1, 0.45)), 0.1, 0.1)))
        dets.append([Detection(c, bx, draw(st.integers(1, 64)) / 64) for c, bx in img_dets])
    assume(any(gts))
    return dets, gts


@given(scenes())
def test_threshold_monotonicity(data):
    dets, gts = data
    r = map_scores(dets, gts)
    for v in r.ap.values():
        assert np.all(np.diff(v) <= 1e-12)
        assert np.all((0 <= v) & (v <= 1))
    assert 0 <= r.map50_95 <= r.map50 <= 1


@given(scenes(), st.floats(0.01, 100.0))
def test_score_scale_invariance(data, k):
    dets, gts = data
    scaled = [[Detection(d.class_id, d.box, d.score * k) for d in img] for img in dets]
    a, b = map_scores(dets, gts), map_scores(scaled, gts)
    for c in a.ap:
        np.testing.assert_array_equal(a.ap[c], b.ap[c])


@given(scenes(), st.integers(0, 2), st.integers(0, 3))
def test_low_score_false_positive_never_helps(data, cls, where):
    dets, gts = data
    lowest = min([d.score for img in dets for d in img], default=1.0) / 2
    extra = [list(img) for img in dets]
    # GT lives in [0, 0.5]^2, so this box cannot match anything
    extra[where % len(extra)].append(Detection(cls, (0.9, 0.9, 0.05, 0.05), lowest))
    a, b = map_scores(dets, gts), map_scores(extra, gts)
    for c in a.ap:
        assert np.all(b.ap[c] <= a.ap[c] + 1e-15)
