import numpy as np
import pytest

from edgeadain.core import to_gray, write_image
from edgeadain.edge import SCHARR_X, SCHARR_Y, EdgeProviderConfig, detect_edges, scharr_edges
from oracles import naive_correlate3


def test_constant_is_all_zero():
    em = detect_edges(np.full((16, 16, 3), 0.3, dtype=np.float32))
    assert em.provenance == "classical-fallback"
    assert not em.data.any()


def test_vertical_step_peaks_at_step():
    img = np.zeros((10, 12, 1), dtype=np.float32)
    img[:, 6:] = 1.0
    em = scharr_edges(img).data
    assert set(np.argmax(em, axis=1).tolist()) <= {5, 6}
    assert em.max() == 1.0


def test_matches_naive_convolution(rng):
    img = rng.random((13, 17, 3)).astype(np.float32)
    gray = to_gray(img)[:, :, 0].astype(np.float64)
    gx = naive_correlate3(gray, SCHARR_X.tolist())
    gy = naive_correlate3(gray, SCHARR_Y.tolist())
    mag = np.sqrt(gx ** 2 + gy ** 2)
    np.testing.assert_allclose(scharr_edges(img).data, mag / mag.max(), atol=1e-6)


def test_range_and_constant_shift_invariance(rng):
    img = rng.random((20, 20, 1)).astype(np.float32) * 0.5
    a = scharr_edges(img).data
    b = scharr_edges(img + 0.25).data
    assert a.min() >= 0 and a.max() == pytest.approx(1.0)
    np.testing.assert_allclose(a, b, atol=1e-5)


def test_file_provider(tmp_path, rng):
    edge = rng.random((8, 9)).astype(np.float32)
    write_image(tmp_path / "e.png", edge)
    em = detect_edges(np.zeros((8, 9, 1)), EdgeProviderConfig("file", str(tmp_path / "e.png")))
    assert em.provenance == "external-file"
    np.testing.assert_allclose(em.data, edge, atol=0.5 / 255 + 1e-6)


def test_file_provider_size_mismatch(tmp_path):
    write_image(tmp_path / "e.png", np.zeros((8, 8)))
    with pytest.raises(ValueError, match="edge map size mismatch"):
        detect_edges(np.zeros((9, 8, 1)), EdgeProviderConfig("file", str(tmp_path / "e.png")))


def test_file_provider_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        detect_edges(np.zeros((4, 4, 1)), EdgeProviderConfig("file", str(tmp_path / "none.png")))


def test_provider_validation():
    with pytest.raises(ValueError):
        EdgeProviderConfig("dexined")
    with pytest.raises(ValueError):
        EdgeProviderConfig("file")
