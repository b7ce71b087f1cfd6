import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_tensor(rng, L=4, M=6, N=3, C=1):
    return rng.integers(0, C + 1, size=(L, M, N))


def dominance_tensor(L=4, M=40, N=2):
    """System 0 beats 1 beats 2 ... on every cell, with a few ties mixed in."""
    data = np.zeros((L, M, N), dtype=np.int64)
    for l in range(L):
        data[l] = L - 1 - l
    data[:, ::7, :] = 1  # some all-tie cells
    return data


# -- acceptance summary ---------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(capsys):
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE[number] = (bool(ok), detail)
        with capsys.disabled():
            print(f"\ncriterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
