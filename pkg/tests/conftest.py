import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--long",
        action="store_true",
        default=False,
        help="run long-suite tests (n > 8, minutes to hours)",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--long"):
        return
    skip = pytest.mark.skip(reason="long suite; pass --long to run")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)
