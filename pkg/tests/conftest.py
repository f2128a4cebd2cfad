import pytest

from slicedadc.config import preset


@pytest.fixture(scope="session")
def small_cfg():
    """30 ns record: fast enough for unit tests, same plan and linewidths as desk."""
    return preset("desk").with_(grid={"n_samples": 100_000}, run={"runs": 2})
