import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# JIT compilation makes first calls slow and wall-clock deadlines noisy.
settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("suite")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile every JIT kernel once up front.

    Timed checks in the suite measure the steady-state algorithms, not the
    one-off compilation cost, so the warm-up happens before any test runs.
    """
    import curvtopo as ct

    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.4, 1.7]])
    d = ct.pairwise_distances(pts)
    ct.reduce(ct.build_flag_filtration(d, float(d.max())))
    mask = np.zeros((8, 8), dtype=np.uint8)
    mask[2:6, 2:6] = 1
    ct.skeletonize(mask)
    ct.mask_betti(mask)
