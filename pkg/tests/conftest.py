from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from sapkit.core import SapInstance, Task

settings.register_profile("repo", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@st.composite
def instances(draw, max_n=5, max_m=4, max_u=8, uniform=None):
    """Small random instances; ``uniform=None`` draws both kinds."""
    m = draw(st.integers(1, max_m))
    if uniform is None:
        uniform = draw(st.booleans())
    if uniform:
        caps = [draw(st.integers(2, max_u))] * m
    else:
        caps = draw(st.lists(st.integers(1, max_u), min_size=m, max_size=m))
    n = draw(st.integers(0, max_n))
    tasks = []
    for k in range(n):
        s = draw(st.integers(0, m - 1))
        t = draw(st.integers(s + 1, m))
        tasks.append(Task(f"t{k}", s, t, draw(st.integers(1, max_u)), draw(st.integers(0, 9))))
    return SapInstance(tuple(caps), tuple(tasks))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        ok, detail = RESULTS[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
