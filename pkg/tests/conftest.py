import hypothesis
import numpy as np
import pytest

# JIT warm-up on the first kernel call can blow the default deadline.
hypothesis.settings.register_profile(
    "leakwave", deadline=None, max_examples=60, derandomize=True
)
hypothesis.settings.load_profile("leakwave")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger one tiny call per hot kernel so one-time JIT compilation
    (cold numba cache) never lands inside a runtime-limited test."""
    from leakwave import _kernels

    _kernels.cosine_bank(
        np.zeros(4), np.ones(1), np.ones(1), np.zeros(1)
    )
    eye = np.tile(np.eye(4, dtype=np.complex128), (2, 1, 1))
    _kernels.solve_batch(eye, np.ones((2, 4), dtype=np.complex128))
