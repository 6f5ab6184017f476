import numpy as np
import pytest
from hypothesis import strategies as st

from defensive_forecasting.protocol import History

forecasts = st.floats(0.0, 1.0, allow_nan=False)
labels = st.integers(0, 1)


@st.composite
def histories(draw, min_size=0, max_size=40):
    rounds = draw(st.lists(st.tuples(forecasts, labels), min_size=min_size, max_size=max_size))
    return History.from_arrays([p for p, _ in rounds], [y for _, y in rounds])


def random_history(rng: np.random.Generator, n: int, dim: int = 0) -> History:
    """Forecasts uniform on [0, 1], labels Bernoulli(forecast)."""
    p = rng.random(n)
    y = (rng.random(n) < p).astype(int)
    x = rng.random((n, dim))
    return History.from_arrays(p, y, x)


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
