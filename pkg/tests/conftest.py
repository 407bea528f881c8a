import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from smoothcount import build_rho, primes_upto  # noqa: E402


@pytest.fixture(scope="session")
def primes():
    return primes_upto(1 << 20)


@pytest.fixture(scope="session")
def rho_table():
    return build_rho()
