import pytest

from blowflies import stability_chart
from blowflies.presets import HARVEST_FREE, SWITCHING, SWITCHING_RECONCILED, TWO_EQUILIBRIA


@pytest.fixture(scope="session")
def two_eq():
    return TWO_EQUILIBRIA


@pytest.fixture(scope="session")
def switching():
    return SWITCHING


@pytest.fixture(scope="session")
def reconciled():
    return SWITCHING_RECONCILED


@pytest.fixture(scope="session")
def harvest_free():
    return HARVEST_FREE


@pytest.fixture(scope="session")
def reconciled_chart():
    return stability_chart(SWITCHING_RECONCILED)


@pytest.fixture(scope="session")
def harvest_free_chart():
    return stability_chart(HARVEST_FREE)
