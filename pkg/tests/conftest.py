import warnings
from pathlib import Path

import numpy as np
import pytest

from conewedge import ConeProblem, ExtensionSpec, SingularFunction, build_space

DATA = Path(__file__).resolve().parent.parent / "data"


def cl2(ell: float) -> ConeProblem:
    return ConeProblem(2, 1, {2: [1.0], 0: [ell**2]}, 1, f"cl2_l{ell:g}")


def pb(b: float = 1.0) -> ConeProblem:
    return ConeProblem(2, 1, {2: [1.0], 0: [0.25, b]}, 2, "pb")


def sys2x2() -> ConeProblem:
    return ConeProblem(2, 2, {2: [np.eye(2)], 1: [[[0, 1], [1, 0]]],
                              0: [np.diag([0.25, -1.0]), [[0, 0.5], [0.5, 0]]]}, 2, "sys2x2")


ONE = SingularFunction.monomial(0, [1.0])
LOGX = SingularFunction.monomial(0, [1.0], log_power=1)
FRIEDRICHS = ExtensionSpec("span", (ONE,), 0.5)


@pytest.fixture(scope="session")
def space256():
    return build_space(20.0, 256, 2)


@pytest.fixture(scope="session")
def space512():
    return build_space(20.0, 512, 2)


@pytest.fixture(autouse=True)
def _quiet_rank_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="ill-separated")
        yield
