import pytest

from mistakelab.harness import DEFAULT_BASE_SEED, sweep


@pytest.fixture(scope="session")
def desk_records():
    """The default desk-scale sweep (300 runs), shared across test modules."""
    return sweep(base_seed=DEFAULT_BASE_SEED)
