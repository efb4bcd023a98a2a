import pytest

from sievelab import build_intervals, build_prime_table


@pytest.fixture(scope="session")
def table_small():
    return build_prime_table(2000)


@pytest.fixture(scope="session")
def table():
    # Covers p_10001 = 104743 and counting up to bound^2 ~ 1.4e10.
    return build_prime_table(120_000)


@pytest.fixture(scope="session")
def set200(table):
    return build_intervals(200, table)


@pytest.fixture(scope="session")
def set1000(table):
    return build_intervals(1000, table)
