import numpy as np
import pytest
import scipy.linalg

from cdqaoa.pauli import PauliString, PauliSum

LETTERS = "IXYZ"


def random_label(rng, n):
    return "".join(rng.choice(list(LETTERS)) for _ in range(n))


def random_string(rng, n):
    return PauliString.from_label(random_label(rng, n), phase_power=int(rng.integers(4)))


def random_sum(rng, n, terms=5, hermitian=False):
    items = []
    for _ in range(terms):
        c = rng.normal()
        if not hermitian:
            c = c + 1j * rng.normal()
        items.append((c, random_label(rng, n)))
    return PauliSum.from_strings(n, items)


def dense_expm(h, t):
    return scipy.linalg.expm(-1j * t * h)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record_criterion(cid: str, passed: bool, detail: str) -> None:
    ACCEPTANCE[cid] = (bool(passed), detail)
    print(f"ACCEPTANCE {cid}: {'PASS' if passed else 'FAIL'} - {detail}")


def _criterion_order(cid: str):
    head = cid.rstrip("ab")
    return int(head), cid[len(head):]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=_criterion_order):
        passed, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"criterion {cid:>3}: {'PASS' if passed else 'FAIL'}  {detail}")
