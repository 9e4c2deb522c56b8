import os
import tempfile

from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def pytest_configure(config):
    # keep test builds out of the user's cache
    os.environ.setdefault("DDGRAPHS_CACHE_DIR", tempfile.mkdtemp(prefix="ddgraphs-test-cache-"))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
