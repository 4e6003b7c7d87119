import numpy as np
import pytest

from burnbench.core import PaletteStats, RegionStats


@pytest.fixture
def simple_palette() -> PaletteStats:
    return PaletteStats(
        burned=RegionStats(mean=np.array([45.0, 38.0, 32.0]),
                           std=np.array([8.0, 7.0, 6.0]), pixel_count=1000),
        intact=RegionStats(mean=np.array([70.0, 110.0, 60.0]),
                           std=np.array([12.0, 14.0, 10.0]), pixel_count=3000),
        source_sample_ids=("pal0", "pal1"),
    )


@pytest.fixture(scope="session")
def demo_corpus(tmp_path_factory):
    """Session-scoped 60-sample synthetic corpus at the standard tile size."""
    from burnbench.demo import build_demo_corpus

    root = tmp_path_factory.mktemp("demo_corpus")
    ids = build_demo_corpus(root, n_samples=60, seed=7)
    return root, ids
