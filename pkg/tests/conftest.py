import pytest

from argweave.engine import run_pipeline
from argweave.fixtures import fixture_path
from argweave.graph import VertexKind, make_vertex
from argweave.models import (
    parse_attacker,
    parse_system,
    parse_workflow,
    validate_environment,
)


@pytest.fixture(scope="session")
def fixture_files():
    return {
        "workflow": fixture_path("workflow"),
        "system": fixture_path("system"),
        "attacker": fixture_path("attacker"),
    }


@pytest.fixture(scope="session")
def workflow_model(fixture_files):
    return parse_workflow(fixture_files["workflow"].read_bytes())


@pytest.fixture(scope="session")
def system_model(fixture_files):
    return parse_system(fixture_files["system"].read_bytes())


@pytest.fixture(scope="session")
def attacker_model(fixture_files):
    return parse_attacker(fixture_files["attacker"].read_bytes())


@pytest.fixture(scope="session")
def env(workflow_model, system_model, attacker_model):
    return validate_environment(workflow_model, system_model, attacker_model)


@pytest.fixture(scope="session")
def fixture_goal():
    return make_vertex(
        VertexKind.GOAL, {"property": "availability", "subject": "wf-volt-ctrl"}
    )


@pytest.fixture(scope="session")
def pipeline(fixture_goal, env):
    return run_pipeline(fixture_goal, env)
