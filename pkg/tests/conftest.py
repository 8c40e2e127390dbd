import numpy as np
import pytest

from divdcov import DataMatrix, PairwiseDCovCache

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def random_cache(rng, p, low=0.0, high=1.0):
    a = rng.uniform(low, high, size=(p, p))
    return PairwiseDCovCache.from_matrix((a + a.T) / 2)


def block_cache(sizes, within=0.9, across=0.01):
    p = sum(sizes)
    m = np.full((p, p), across)
    start = 0
    for s in sizes:
        m[start:start + s, start:start + s] = within
        start += s
    return PairwiseDCovCache.from_matrix(m)


def planted_block_data(rng, n, p, noise=0.7):
    """Continuous data whose columns fall into two or three dependent blocks."""
    nblocks = min(3, max(1, p // 2))
    labels = rng.integers(0, nblocks, size=p)
    latent = rng.normal(size=(n, nblocks))
    x = latent[:, labels] + noise * rng.normal(size=(n, p))
    return DataMatrix(x)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""
    def record(criterion: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((criterion, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in _ACCEPTANCE:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {criterion}  {detail}")
