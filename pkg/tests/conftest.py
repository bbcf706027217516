import pytest

from qslabels.catalog import full_report


@pytest.fixture(scope="session")
def report12():
    return full_report(12)
