import random

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ceverify import oracle

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
instances = seeds.map(lambda s: oracle.random_instance(random.Random(s)))
nets = seeds.map(lambda s: oracle.random_net(random.Random(s), max_binary=10))

# acceptance criteria report one line each at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
