import numpy as np
import pytest

from magnoncool.config import load_config

TWO_PI = 2 * np.pi


@pytest.fixture(scope="session")
def top_cfg():
    return load_config("table1_top_cpw")


@pytest.fixture(scope="session")
def cfg45():
    return load_config("table2_45deg")


@pytest.fixture(scope="session")
def top_device(top_cfg):
    return top_cfg.device


@pytest.fixture(scope="session")
def device45(cfg45):
    return cfg45.device


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[number])
