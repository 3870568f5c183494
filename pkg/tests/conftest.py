import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from edgeadain._backend import available_backends  # noqa: E402
from edgeadain.core import write_image  # noqa: E402
from edgeadain.stylenet import build_network  # noqa: E402


# criterion number -> [title, passed so far]
_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, [title, True])
    if rep.when == "call":
        entry[1] = entry[1] and rep.passed
    elif rep.failed:
        entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=available_backends())
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def tiny_net():
    return build_network("tiny", seed=0)


def synthetic_vessels(size=64, seed=0, noise=0.0):
    """Dark curvilinear 'vessels' on a bright, smoothly varying background."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size] / size
    img = 0.7 + 0.1 * np.sin(2 * np.pi * xx) * np.cos(np.pi * yy)
    for _ in range(3):
        a, b, c = rng.uniform(-1, 1, 3)
        curve = 0.5 + 0.3 * a * np.sin(2 * np.pi * (xx * b + c))
        img = np.where(np.abs(yy - curve) < 0.025, 0.25, img)
    if noise:
        img = img + noise * rng.standard_normal(img.shape)
    return np.clip(img, 0, 1).astype(np.float32)[:, :, None]


def write_training_set(root, n_content=8, n_style=2, size=64, seed=1):
    root = Path(root)
    cdir, sdir = root / "content", root / "style"
    cdir.mkdir(parents=True, exist_ok=True)
    sdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size] / size
    for i in range(n_content):
        f = rng.uniform(1, 4, 2)
        ph = rng.uniform(0, 6, 3)
        img = np.stack([0.5 + 0.4 * np.sin(2 * np.pi * (f[0] * xx + f[1] * yy) + p) for p in ph], -1)
        write_image(cdir / f"content_{i}.png", img)
    for i in range(n_style):
        img = np.ones((size, size, 3))
        img[np.abs(np.sin(8 * xx + 3 * i * yy)) < 0.2] = 0.0
        write_image(sdir / f"style_{i}.png", img)
    return cdir, sdir


@pytest.fixture(scope="session")
def training_set(tmp_path_factory):
    return write_training_set(tmp_path_factory.mktemp("data"))


@pytest.fixture(scope="session")
def ckpt_dir(tmp_path_factory, tiny_net):
    from edgeadain.stylenet import save_network

    path = tmp_path_factory.mktemp("ckpt")
    save_network(tiny_net, path)
    return path


@pytest.fixture(scope="session")
def xca_like(tmp_path_factory):
    """A small vessel image and a stroke style image on disk."""
    root = tmp_path_factory.mktemp("xca")
    img = synthetic_vessels(48, seed=3, noise=0.02)
    write_image(root / "img.png", img)
    yy, xx = np.mgrid[0:48, 0:48] / 48
    style = np.ones((48, 48, 3))
    style[np.abs(np.sin(10 * xx + 4 * yy)) < 0.25] = 0.0
    write_image(root / "style.png", style)
    return root
