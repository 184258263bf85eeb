import numpy as np
import pytest

from driftforest.stream import Instance

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def record_criterion():
    """Record one acceptance verdict; all verdicts are printed at the end of the run."""

    def record(name: str, passed: bool, detail: str = ""):
        _ACCEPTANCE.append((name, bool(passed), detail))
        print(f"{name}: {'PASS' if passed else 'FAIL'} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(_ACCEPTANCE, key=lambda r: int(r[0].split()[1])):
        terminalreporter.write_line(f"{name}: {'PASS' if passed else 'FAIL'}  {detail}")


def digits_instances() -> list[Instance]:
    from sklearn.datasets import load_digits

    X, y = load_digits(return_X_y=True)
    return [Instance(x, int(label), 8) for x, label in zip(X / 16.0, y)]


def threshold_stream(n, n_features=3, threshold=0.5, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.random((n, n_features))
    y = (X[:, 0] > threshold).astype(int)
    return X, y
