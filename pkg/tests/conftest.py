import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from degradeiqa.synthetic import synthetic_corpus, write_corpus  # noqa: E402


@pytest.fixture(scope="session")
def corpus20():
    return synthetic_corpus(20, seed=7)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    write_corpus(d, 12, seed=3, height=96, width=96)
    return d


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one summary line per acceptance criterion, taken from test names test_criterion_<n>_*
def pytest_terminal_summary(terminalreporter):
    outcome = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            name = rep.nodeid.rsplit("::", 1)[-1]
            if not name.startswith("test_criterion_") or rep.when not in ("call", "setup"):
                continue
            n = int(name.split("_")[2])
            ok = status == "passed"
            outcome[n] = outcome.get(n, True) and ok
    if not outcome:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcome):
        terminalreporter.write_line(f"ACCEPTANCE criterion {n}: {'PASS' if outcome[n] else 'FAIL'}")
