import subprocess
import sys
import time
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

REFERENCE_N = 100_000
REFERENCE_SEED = 7


def run_cli(*argv, check=True):
    """Run the CLI as a subprocess, the way an operator would."""
    proc = subprocess.run(
        [sys.executable, "-m", "geocorpus.cli", *map(str, argv)],
        capture_output=True, text=True,
    )
    if check and proc.returncode != 0:
        raise AssertionError(
            f"geocorpus {' '.join(map(str, argv))} failed ({proc.returncode}):\n{proc.stderr}"
        )
    return proc


@pytest.fixture(scope="session")
def texas_fixture_path() -> Path:
    return FIXTURES / "nominatim_texas.json"


@pytest.fixture(scope="session")
def reference_store(tmp_path_factory):
    """Full pipeline chain on the 100K-tweet seed-7 corpus.

    Shared by the calibration, statistics and service acceptance checks;
    ``chain_seconds`` is the wall time of the four CLI stages.
    """
    root = tmp_path_factory.mktemp("reference")
    corpus = root / "corpus.ndjson"
    fixture = root / "fixture.json"
    store = root / "store"
    t0 = time.perf_counter()
    run_cli("synth", "--n", REFERENCE_N, "--seed", REFERENCE_SEED,
            "--out", corpus, "--fixture-out", fixture)
    run_cli("ingest", "--input", corpus, "--store", store)
    run_cli("annotate", "--store", store, "--fixture", fixture)
    run_cli("postfilter", "--store", store)
    chain_seconds = time.perf_counter() - t0
    return {
        "root": root,
        "store": store,
        "corpus": corpus,
        "fixture": fixture,
        "chain_seconds": chain_seconds,
        "n": REFERENCE_N,
        "seed": REFERENCE_SEED,
    }
