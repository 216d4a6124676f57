import networkx as nx
import pytest

from robustgraph.graph import Graph


def atlas_connected(max_n: int = 6, min_n: int = 2) -> list[Graph]:
    """One representative per isomorphism class of connected graphs."""
    out = []
    for h in nx.graph_atlas_g():
        n = h.number_of_nodes()
        if min_n <= n <= max_n and nx.is_connected(h):
            out.append(Graph(n, h.edges()))
    return out


@pytest.fixture(scope="session")
def connected_upto6() -> list[Graph]:
    return atlas_connected(6)


@pytest.fixture(scope="session")
def connected5() -> list[Graph]:
    return atlas_connected(5, 5)


# -- acceptance reporting ----------------------------------------------------

ACCEPTANCE_TITLES = {
    1: "estimator agrees with exhaustive oracle (N <= 6)",
    2: "pinned exact values",
    3: "baselines pick path endpoints",
    4: "classical baseline rewards (N=20 grid) and greedy spot check",
    5: "finite-difference gradient check",
    6: "DQN learning signal at desk scale",
    7: "invariant suites",
    8: "spectral values",
}
_acceptance: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def acceptance():
    """``acceptance(criterion, ok, detail)`` records one checked item."""

    def record(criterion: int, ok: bool, detail: str) -> bool:
        _acceptance.setdefault(criterion, []).append((bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(ACCEPTANCE_TITLES):
        items = _acceptance.get(c)
        if not items:
            tr.write_line(f"[----] {c}. {ACCEPTANCE_TITLES[c]}: not run")
            continue
        bad = [d for ok, d in items if not ok]
        status = "PASS" if not bad else "FAIL"
        tr.write_line(f"[{status}] {c}. {ACCEPTANCE_TITLES[c]}: {len(items) - len(bad)}/{len(items)} checks")
        for d in bad:
            tr.write_line(f"         failed: {d}")
