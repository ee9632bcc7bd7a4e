import shutil
import subprocess
from pathlib import Path

import pytest

from fgacsql.model import load_data_model, load_scenario
from fgacsql.ocl2sql import load_registry
from fgacsql.policy import load_security_model

REPO = Path(__file__).resolve().parent.parent
CASESTUDY = REPO / "casestudy"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def university():
    return load_data_model(str(CASESTUDY / "university.json"))


@pytest.fixture(scope="session")
def demo_scenario():
    return load_scenario(str(CASESTUDY / "scenario_demo.json"))


@pytest.fixture(scope="session")
def secvgu_a(university):
    return load_security_model(str(CASESTUDY / "policy_secvgu_a.json"), university)


@pytest.fixture(scope="session")
def secvgu_1(university):
    return load_security_model(str(CASESTUDY / "policy_secvgu_1.json"), university)


@pytest.fixture(scope="session")
def secvgu_2(university):
    return load_security_model(str(CASESTUDY / "policy_secvgu_2.json"), university)


REGISTRY_TYPINGS = [
    {"caller": "Lecturer", "self": "Student"},
    {"caller": "Lecturer", "self": "Lecturer"},
    {"caller": "Lecturer", "lecturers": "Lecturer", "students": "Student"},
]


@pytest.fixture(scope="session")
def registry(university):
    return load_registry(str(CASESTUDY / "registry.json"), university, REGISTRY_TYPINGS)


def query_text(name: str) -> str:
    return (CASESTUDY / "queries" / f"{name}.sql").read_text(encoding="utf-8")


def detect_solver() -> str | None:
    import os

    configured = os.environ.get("FGAC_SOLVER")
    if configured:
        return configured
    shim = REPO / "tools" / "z3wasm" / "z3cli.mjs"
    if shim.exists() and shutil.which("node"):
        return f"node {shim}"
    return None


@pytest.fixture(scope="session")
def solver_cmd():
    solver = detect_solver()
    if solver is None:
        pytest.skip("no SMT solver available (set FGAC_SOLVER)")
    probe = Path("/tmp/fgac_probe.smt2")
    probe.write_text("(set-logic ALL)\n(check-sat)\n", encoding="utf-8")
    try:
        result = subprocess.run(
            [*solver.split(), str(probe)], capture_output=True, text=True, timeout=60
        )
    except Exception:
        pytest.skip("solver probe failed")
    if "sat" not in result.stdout:
        pytest.skip(f"solver probe produced {result.stdout!r}")
    return solver
