import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from entcost import tensorcore as tc


@pytest.fixture(scope="session")
def qubit_pair():
    return tc.DimSpec.of(("A", 2), ("B", 2))


@pytest.fixture(scope="session")
def identity2(qubit_pair):
    return tc.identity_channel(qubit_pair)


@pytest.fixture(scope="session")
def swap2(qubit_pair):
    return tc.unitary_channel(tc.swap_unitary(2), qubit_pair)


@pytest.fixture(scope="session")
def cnot2(qubit_pair):
    u = np.eye(4)
    u[2, 2] = u[3, 3] = 0.0
    u[2, 3] = u[3, 2] = 1.0
    return tc.unitary_channel(u, qubit_pair)
