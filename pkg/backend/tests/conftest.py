import numpy as np
import pytest
from PIL import Image

from backend_helpers import SIZE


@pytest.fixture
def job_dir(tmp_path):
    """mask/before PNGs plus a ready-to-serve Inpaint manifest."""
    mask = np.zeros((SIZE, SIZE), dtype=np.uint8)
    mask[64:256, 128:384] = 255
    Image.fromarray(mask, mode="L").save(tmp_path / "mask_512.png")
    rng = np.random.default_rng(9)
    before = rng.integers(80, 180, size=(SIZE, SIZE, 3)).astype(np.uint8)
    Image.fromarray(before).save(tmp_path / "before_512.png")
    return tmp_path
