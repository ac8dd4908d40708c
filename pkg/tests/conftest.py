import pytest
from mpmath import mp

from cubicmm.numkernel import PrecisionContext


@pytest.fixture(scope="session")
def ctx40():
    return PrecisionContext(digits=40)


@pytest.fixture(scope="session")
def reference():
    """Median-seeded trajectory from -30 past the first two poles."""
    from cubicmm.painleve1 import reference_trajectory

    ctx = PrecisionContext(digits=90)
    return reference_trajectory(6, mp.mpf("1e-10"), ctx), ctx
