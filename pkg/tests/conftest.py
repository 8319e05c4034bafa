"""Shared pytest configuration for hypoagents tests."""
import json
from pathlib import Path

import pytest

from src.hypoagents.agents.models import AgentRole, Hypothesis, HypothesisSource
from src.hypoagents.config import load_config
from src.hypoagents.specdata import load_presence_table

REPO_ROOT = Path(__file__).resolve().parents[1]
DEMO_DIR = REPO_ROOT / "demo"
DEMO_CONFIG = DEMO_DIR / "demo.toml"
DEMO_TABLE = DEMO_DIR / "data" / "presence_table.tex"
DEMO_SCRIPT = DEMO_DIR / "script.json"


def make_hypothesis(
    hypothesis_id="H_one",
    statement="Dibenzothiophene co-occurs with pyrene in CM chondrites.",
    key_datapoints="Dibenzothiophene (ID 14) found in Orgueil",
    scientist=1,
    iteration=1,
):
    return Hypothesis(
        id=hypothesis_id,
        statement=statement,
        key_datapoints=key_datapoints,
        source=HypothesisSource(role=AgentRole.SCIENTIST, index=scientist),
        iteration=iteration,
    )


def demo_script_entries():
    return json.loads(DEMO_SCRIPT.read_text(encoding="utf-8"))["responses"]


@pytest.fixture(scope="session")
def matrix():
    """The demo presence table: 7 meteorites, 8 soils."""
    parsed, _ = load_presence_table(DEMO_TABLE)
    return parsed


@pytest.fixture
def demo_config(tmp_path):
    return load_config(DEMO_CONFIG, output_dir=str(tmp_path / "runs"))


@pytest.fixture
def write_script(tmp_path):
    """Write a scripted-response file and return its path."""

    def _write(entries, name="script.json"):
        path = tmp_path / name
        path.write_text(json.dumps({"responses": entries}), encoding="utf-8")
        return path

    return _write
