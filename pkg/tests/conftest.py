import numpy as np
import pytest

from iiaflow.geometry import Geometry, load_catalog, sample_typeiia_invariant, sample_typeiia_jet


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture(scope="session")
def jet_geometries():
    return [Geometry(sample_typeiia_jet(seed)) for seed in range(4)]


@pytest.fixture(scope="session")
def invariant_geometries(catalog):
    return [Geometry(sample_typeiia_invariant(a, seed)) for a in catalog.values() for seed in range(2)]


@pytest.fixture(scope="session")
def geometries(jet_geometries, invariant_geometries):
    return jet_geometries + invariant_geometries


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
