import numpy as np
import pytest

from wavefuse.analysis import entropy_report
from wavefuse.errors import ShapeError
from wavefuse.synth import box_blur, synth_pair


def test_blur_complement_high_share():
    rgb, ir = synth_pair("blur-complement", (32, 32), 3)
    sharp, blurred = entropy_report(rgb), entropy_report(ir)
    assert 1 - sharp.energy_share["ll"] > 1 - blurred.energy_share["ll"]


@pytest.mark.parametrize("kind", ["blur-complement", "checker-smooth", "noise"])
def test_deterministic(kind):
    a = synth_pair(kind, (16, 12), 7)
    b = synth_pair(kind, (16, 12), 7)
    assert a[0].tobytes() == b[0].tobytes() and a[1].tobytes() == b[1].tobytes()
    assert a[0].shape == (3, 16, 12) and a[1].shape == (1, 16, 12)


def test_noise_seeds_differ():
    assert synth_pair("noise", (8, 8), 1)[0].tobytes() != synth_pair("noise", (8, 8), 2)[0].tobytes()


def test_errors():
    with pytest.raises(ShapeError):
        synth_pair("noise", (0, 8), 1)
    with pytest.raises(ValueError):
        synth_pair("plaid", (8, 8), 1)


def test_odd_size_blur_complement():
    rgb, ir = synth_pair("blur-complement", (7, 5), 0, (1, 1))
    assert rgb.shape == ir.shape == (1, 7, 5)


def test_box_blur_matches_direct_mean(rng):
    x = rng.standard_normal((1, 6, 7)).astype(np.float32)
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)), mode="edge")
    want = np.array([[[xp[0, i:i + 3, j:j + 3].mean() for j in range(7)] for i in range(6)]])
    np.testing.assert_allclose(box_blur(x, 3), want, rtol=1e-5, atol=1e-6)
