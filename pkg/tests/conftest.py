import numpy as np
import pytest

from fmcw_sar_lab import AdcConfig, ChirpParams

C = 299_792_458.0


@pytest.fixture
def base_chirp():
    return ChirpParams(1e9, 1e-5)


@pytest.fixture
def base_adc():
    return AdcConfig(low_rate_hz=1e8, high_rate_hz=2e9)


@pytest.fixture
def small_chirp():
    # 100 MHz / 10 us: k = 1e13 Hz/s, range cell 1.5 m, 2000 samples at 200 MHz
    return ChirpParams(1e8, 1e-5)


@pytest.fixture
def small_adc():
    return AdcConfig(low_rate_hz=1e7, high_rate_hz=2e8)


def rel_rms(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
