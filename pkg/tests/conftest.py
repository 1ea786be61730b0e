import mpmath as mp
import pytest

from dyckmoments import numerics


@pytest.fixture(autouse=True)
def default_precision():
    numerics.set_working_precision(numerics.DEFAULT_PRECISION)
    yield


@pytest.fixture
def hi():
    """mpmath context comfortably above the default working precision."""
    with mp.workprec(320):
        yield mp
