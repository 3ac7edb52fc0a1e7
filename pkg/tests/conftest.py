from pathlib import Path

import pytest

import piezodamp as pd

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# Acceptance gate: criterion labels, the recorded one-line results, and the
# criteria whose tests were collected in this run. pytest_terminal_summary
# prints one line per criterion after the test summary, outside capture.
ACCEPTANCE_CRITERIA = {
    1: "quality factor to damping ratio conversion",
    2: "finite element frequencies match closed-form cantilever",
    3: "coupling factor round trip through frequency shift",
    4: "single-mode critical gain matches static stiffness crossing",
    5: "closed-loop damping grows monotonically with gain",
    6: "half-power bandwidth recovers known damping ratios",
    7: "placement scan equals exhaustive search",
    8: "zero-gain closed loop reproduces the open loop",
    9: "command line outputs are byte-for-byte reproducible",
}
_acceptance_results: dict[int, str] = {}
_acceptance_expected: set[int] = set()


@pytest.fixture
def acceptance_report():
    def record(num: int, ok: bool, detail: str = "") -> None:
        tag = "PASS" if ok else "FAIL"
        line = f"[{tag}] criterion {num}: {ACCEPTANCE_CRITERIA[num]}"
        if detail:
            line += f" ({detail})"
        _acceptance_results[num] = line
    return record


def pytest_collection_modifyitems(config, items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            _acceptance_expected.add(marker.args[0])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    nums = sorted(_acceptance_expected | set(_acceptance_results))
    if not nums:
        return
    terminalreporter.section("acceptance criteria")
    for num in nums:
        line = _acceptance_results.get(num)
        if line is None:
            line = (f"[FAIL] criterion {num}: {ACCEPTANCE_CRITERIA[num]} "
                    "(test errored before evaluating)")
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def unit_beam():
    return pd.BeamProperties(1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def unit_model(unit_beam):
    # Shared across tests; treat as read-only.
    return pd.analytic_cantilever_modes(unit_beam, 4, 201)


@pytest.fixture(scope="session")
def material():
    return pd.PiezoMaterial(-1.8e-10, 1.6e-11, 1.6e-8)


@pytest.fixture(scope="session")
def patch():
    return pd.PatchGeometry.on_host(0.1, 0.02, 0.0005, 0.002)


@pytest.fixture(scope="session")
def gripper_ini():
    return FIXTURES / "gripper" / "gripper.ini"


@pytest.fixture(scope="session")
def gripper_frf_csv():
    return FIXTURES / "gripper" / "gripper_frf.csv"


@pytest.fixture(scope="session")
def gripper_shapes_csv():
    return FIXTURES / "gripper" / "gripper_shapes.csv"


@pytest.fixture(scope="session")
def gripper_model(gripper_shapes_csv):
    return pd.load_measured_modes(gripper_shapes_csv, [58.0, 76.0],
                                  [0.01, 0.01])
