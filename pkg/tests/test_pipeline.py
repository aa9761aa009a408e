import numpy as np
import pytest

from wavecube.arch import build, paper_spec
from wavecube.errors import ShapeMismatchError
from wavecube.pipeline import assemble, iou, partition, segment_volume

rng = np.random.default_rng(41)


def test_partition_two_cubes_along_z():
    grid, cubes = partition(np.zeros((64, 128, 128), dtype=np.float32), (32, 128, 128))
    assert [o[0] for o in grid.origins] == [0, 32]
    assert len(cubes) == 2


def test_partition_pads_to_multiples():
    grid, cubes = partition(np.zeros((40, 130, 128), dtype=np.float32), (32, 128, 128))
    assert grid.padded_extents == (64, 256, 128)
    assert len(cubes) == 4


def test_partition_exact_cube_no_padding():
    grid, cubes = partition(np.zeros((32, 128, 128), dtype=np.float32), (32, 128, 128))
    assert grid.padded_extents == (32, 128, 128)
    assert len(cubes) == 1


def test_partition_rejects_bad_cube_shape():
    with pytest.raises(ValueError):
        partition(np.zeros((32, 32, 32)), (30, 32, 32))


def test_assemble_inverts_partition():
    labels = (rng.random((40, 50, 70)) < 0.5).astype(np.uint8)
    grid, cubes = partition(labels, (16, 32, 32))
    back = assemble(grid, cubes)
    assert np.array_equal(back, labels)


def test_assemble_order_independent():
    labels = (rng.random((20, 30, 30)) < 0.5).astype(np.uint8)
    grid, cubes = partition(labels, (16, 16, 16))
    shuffled = list(reversed(cubes))
    assert np.array_equal(assemble(grid, shuffled), labels)


def test_assemble_missing_and_extra_cubes():
    labels = np.zeros((32, 32, 32), dtype=np.uint8)
    grid, cubes = partition(labels, (16, 16, 16))
    with pytest.raises(ShapeMismatchError):
        assemble(grid, cubes[:-1])
    with pytest.raises(ShapeMismatchError):
        assemble(grid, cubes + [((99, 0, 0), cubes[0][1])])
    bad = [(o, c[:8]) for o, c in cubes]
    with pytest.raises(ShapeMismatchError):
        assemble(grid, bad)


def test_partition_assemble_identity_fuzz():
    for seed in range(50):
        r = np.random.default_rng(seed)
        extents = tuple(int(r.integers(1, 70)) for _ in range(3))
        vol = (r.random(extents) * 100).astype(np.float32)
        grid, cubes = partition(vol, (16, 16, 16))
        assert np.array_equal(assemble(grid, cubes), vol)


# -- segmentation -----------------------------------------------------------------

def _bias_network(bias=(1.0, -1.0)):
    """All-zero parameters except a head bias: constant class preference."""
    net = build(paper_spec("PU"), seed=0)
    for _, t in net.named_parameters():
        t.data[...] = 0.0
    net.head.bias.data[:] = bias
    return net


def test_segment_constant_background_network():
    net = _bias_network((1.0, -1.0))  # background wins everywhere
    result = segment_volume(rng.random((20, 40, 40)).astype(np.float32), net,
                            (16, 32, 32))
    assert result.labels.shape == (20, 40, 40)
    assert result.labels.sum() == 0
    assert result.provenance["arch"] == "PU"


def test_segment_argmax_tie_resolves_to_background():
    net = _bias_network((0.5, 0.5))  # equal logits everywhere
    result = segment_volume(np.zeros((16, 16, 16), dtype=np.float32), net,
                            (16, 16, 16))
    assert result.labels.sum() == 0


def test_segment_worker_count_invariance():
    net = build(paper_spec("PU"), seed=2)
    net.head.weight.data[...] = np.random.default_rng(1).standard_normal(
        net.head.weight.data.shape).astype(np.float32)
    vol = rng.random((20, 40, 40)).astype(np.float32)
    a = segment_volume(vol, net, (16, 32, 32), workers=1)
    b = segment_volume(vol, net, (16, 32, 32), workers=3)
    assert a.labels.tobytes() == b.labels.tobytes()


def test_segment_padding_neutrality():
    # a zero-biased network maps zero padding to background, so appending
    # explicit zero slabs then cropping equals segmenting the original
    net = build(paper_spec("PU"), seed=4)
    net.head.weight.data[...] = np.random.default_rng(3).standard_normal(
        net.head.weight.data.shape).astype(np.float32)
    net.head.bias.data[:] = (0.1, 0.0)
    vol = rng.random((16, 32, 32)).astype(np.float32)
    direct = segment_volume(vol, net, (16, 32, 32)).labels
    padded = np.zeros((20, 40, 40), dtype=np.float32)
    padded[:16, :32, :32] = vol
    via_pad = segment_volume(padded, net, (16, 32, 32)).labels[:16, :32, :32]
    assert np.array_equal(direct, via_pad)


def test_segment_retains_logits_when_asked():
    net = _bias_network()
    result = segment_volume(np.zeros((16, 16, 16), dtype=np.float32), net,
                            (16, 16, 16), retain_logits=True)
    assert set(result.cube_logits) == {(0, 0, 0)}
    assert result.cube_logits[(0, 0, 0)].shape == (2, 16, 16, 16)


# -- IoU ----------------------------------------------------------------------------

def test_iou_identical_volumes():
    v = (rng.random((8, 8, 8)) < 0.4).astype(np.uint8)
    assert iou(v, v) == (1.0, 1.0, 1.0)


def test_iou_all_background_prediction():
    truth = np.zeros((8, 8, 8), dtype=np.uint8)
    truth[:2] = 1
    pred = np.zeros_like(truth)
    bg, fg, mean = iou(pred, truth)
    assert fg == 0.0
    assert 0 < bg < 1


def test_iou_shifted_cube_overlap():
    # truth: 2x2x2 cube (8 voxels); pred: shifted to overlap exactly 4
    truth = np.zeros((8, 8, 8), dtype=np.uint8)
    truth[2:4, 2:4, 2:4] = 1
    pred = np.zeros_like(truth)
    pred[2:4, 2:4, 3:5] = 1
    bg, fg, mean = iou(pred, truth)
    assert fg == pytest.approx(4 / 12)


def test_iou_absent_class_scores_one():
    a = np.ones((4, 4, 4), dtype=np.uint8)
    b = np.ones((4, 4, 4), dtype=np.uint8)
    bg, fg, mean = iou(a, b)
    assert bg == 1.0 and fg == 1.0 and mean == 1.0


def test_iou_symmetry():
    a = (rng.random((8, 8, 8)) < 0.3).astype(np.uint8)
    b = (rng.random((8, 8, 8)) < 0.3).astype(np.uint8)
    assert iou(a, b) == iou(b, a)
    if not np.array_equal(a, b):
        assert iou(a, b)[2] < 1.0


def test_iou_extent_mismatch():
    with pytest.raises(ShapeMismatchError):
        iou(np.zeros((4, 4, 4), dtype=np.uint8), np.zeros((4, 4, 8), dtype=np.uint8))
