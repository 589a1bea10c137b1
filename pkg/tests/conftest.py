"""
conftest module - shared fixtures, the --Scale option and pytest-html customization
"""
import os
import pytest
from pytest_html import extras
from config.settings import EVIDENCE_PATH
from config.map_profiles import CATMAP, DISTINCT_PRODUCT, DOUBLING, EXPANDING, SECOND_AUTOMORPHISM
from toral.dynamics import MapSpec, TorusPoint, build_map, TorusMap
from toral.spectrum import EmpiricalMeasure

SCALES = {
    "quick": {"points": 5, "balls": 30, "words": 2000, "orbit": 100_000},
    "full": {"points": 20, "balls": 200, "words": 10_000, "orbit": 1_000_000},
}


def pytest_addoption(parser: pytest.Parser) -> None:
    """
    Add custom command-line options for pytest.

    Args:
        parser (pytest.Parser): The pytest parser object.
    """
    parser.addoption("--Scale",
                     action="store",
                     default="quick",
                     choices=sorted(SCALES),
                     help="size of the statistical tests")


def pytest_configure(config: pytest.Config) -> None:
    """
    Create the evidence folder the figure-writing tests and the report links use.

    Args:
        config (pytest.Config): The pytest config object.
    """
    os.makedirs(EVIDENCE_PATH, exist_ok=True)


@pytest.fixture(name='scale', scope="session")
def get_scale(request: pytest.FixtureRequest) -> dict:
    """
    Fixture to retrieve the sample sizes selected with --Scale.

    Args:
        request (pytest.FixtureRequest): The pytest fixture request object.

    Returns:
        dict: Sample sizes for statistical tests.
    """
    return SCALES[request.config.getoption('--Scale')]


@pytest.fixture(name='catmap', scope="session")
def get_catmap() -> TorusMap:
    """
    Fixture to build the cat map [[2, 1], [1, 1]].

    Returns:
        TorusMap: The cat map.
    """
    return build_map(CATMAP)


@pytest.fixture(name='second_automorphism', scope="session")
def get_second_automorphism() -> TorusMap:
    return build_map(SECOND_AUTOMORPHISM)


@pytest.fixture(name='expanding', scope="session")
def get_expanding() -> TorusMap:
    """
    Fixture to build the expanding endomorphism [[6, 3], [3, 3]].

    Returns:
        TorusMap: The expanding map.
    """
    return build_map(EXPANDING)


@pytest.fixture(name='doubling', scope="session")
def get_doubling() -> TorusMap:
    return build_map(DOUBLING)


@pytest.fixture(name='product', scope="session")
def get_product() -> TorusMap:
    """
    Fixture to build the product of the cat map and the second automorphism on T^4.

    Returns:
        TorusMap: The product map.
    """
    return build_map(DISTINCT_PRODUCT)


@pytest.fixture(name='typical_point')
def get_typical_point() -> TorusPoint:
    return TorusPoint.of(0.337, 0.521)


@pytest.fixture(name='catmap_measure', scope="session")
def get_catmap_measure() -> EmpiricalMeasure:
    """
    Fixture to build a Lebesgue-typical orbit measure of the cat map.

    Returns:
        EmpiricalMeasure: 200 000 point lattice orbit indexed with 5e-3 buckets.
    """
    return EmpiricalMeasure.from_map(CATMAP, 200_000, seed=7, cell_size=5e-3)


@pytest.fixture(name='map_json')
def get_map_json(tmp_path) -> str:
    """
    Fixture to write a map description file.

    Returns:
        str: Path of a JSON file describing the cat map.
    """
    path = tmp_path / "catmap.json"
    path.write_text(MapSpec.model_validate({"kind": "toral_auto_2d", "matrix": [[2, 1], [1, 1]]})
                    .model_dump_json(exclude_none=True), encoding="utf-8")
    return str(path)


# ========== pytest-html customization ==========

def pytest_html_report_title(report):
    """
    Customize the HTML report title.

    Args:
        report: The HTML report object.
    """
    report.title = "Toral Recurrence Test Report"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item):
    """
    Hook to attach the evidence figures a test wrote as links in the HTML report.

    Tests that produce figures save them under EVIDENCE_PATH with the test name
    as prefix; they are linked rather than embedded.

    Args:
        item: pytest test item.
    """
    outcome = yield
    report = outcome.get_result()

    extras_list = getattr(report, "extras", [])

    if report.when == "call":
        try:
            if os.path.exists(EVIDENCE_PATH):
                evidence_files = sorted([
                    f for f in os.listdir(EVIDENCE_PATH)
                    if f.startswith(item.name) and f.endswith(('.svg', '.csv'))
                ])

                for evidence_file in evidence_files:
                    # Create relative path from report to evidence
                    relative_path = os.path.join('evidences', evidence_file)
                    label = os.path.splitext(evidence_file)[0].replace('_', ' ')
                    link_html = f'<a href="{relative_path}" target="_blank">{label} (click to view evidence)</a>'
                    extras_list.append(extras.html(link_html))
        except (OSError, IOError):
            # If evidence folder can't be read, skip evidence links
            pass

    report.extras = extras_list
