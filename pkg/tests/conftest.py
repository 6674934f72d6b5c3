import os

import numpy as np
import pytest
from threadpoolctl import threadpool_limits

from quatcomp import QMatrix
from quatcomp.synth import gaussian


@pytest.fixture(scope="session", autouse=True)
def _thread_cap():
    # mirror the CLI default: one BLAS thread unless QMC_THREADS says more
    limit = int(os.environ.get("QMC_THREADS", "1"))
    with threadpool_limits(limits=limit):
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rand_qm(rows, cols, rng) -> QMatrix:
    return gaussian(rows, cols, rng)


def qm_close(A: QMatrix, B: QMatrix, tol=1e-12) -> bool:
    return (np.allclose(A.a, B.a, rtol=0, atol=tol)
            and np.allclose(A.b, B.b, rtol=0, atol=tol))
