import random

import pytest

from ecdsalab.curve import registry_get

_ACCEPTANCE_LINES = []


def record_criterion(label: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {label}" + (f"  ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return random.Random(0xEC)


@pytest.fixture(scope="session")
def toy16():
    return registry_get("toy16")


@pytest.fixture(scope="session")
def toy32():
    return registry_get("toy32")


@pytest.fixture(scope="session")
def k1():
    return registry_get("secp256k1")


@pytest.fixture(scope="session")
def p256():
    return registry_get("p256")


@pytest.fixture(scope="session")
def corpus_5_reuse_1_quad():
    from ecdsalab import scenarios

    return scenarios.planted_corpus(
        registry_get("secp256k1"), random.Random(20241016), records=10_000, reuse_pairs=5, quadruples=1
    )
