import numpy as np
import pytest

from hambif import systems as S


def central_fd(fun, x, step=1e-6):
    """Central-difference Jacobian of a vector map (oracle for all jet checks)."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * step))
    return np.stack(cols, axis=-1)


def build(name, **kw):
    if name == "bratu":
        kw.setdefault("C", 1.0)
    return S.catalog_build(name, **kw)


FLOW_SYSTEMS = [n for n in S.CATALOG_NAMES if n != "example5_fold"]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
