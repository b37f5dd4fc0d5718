"""Shared fixtures. Expensive rollouts are cached per session."""

import functools

import pytest
from hypothesis import settings

from ttcplanner.metrics import summarize
from ttcplanner.simulation import load_scenario, load_variants, run_ablation, run_scenario

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

# criterion number -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE = {}


def record(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = (passed, line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n][1])


@functools.lru_cache(maxsize=None)
def rollout(name: str, planner: str = "proposed"):
    cfg = load_scenario(name)
    log = run_scenario(cfg, planner)
    return cfg, log, summarize(log, cfg.safety)


@functools.lru_cache(maxsize=None)
def ablation(base: str = "scenario1", variants: str = "ablation_variants"):
    return run_ablation(base, load_variants(variants))


@pytest.fixture(scope="session")
def scenario1_proposed():
    return rollout("scenario1", "proposed")


@pytest.fixture(scope="session")
def comfort_pair():
    """(proposed, closed-form quintic) rollouts of the wide-shift comfort scenario."""
    return rollout("jerk_comparison", "proposed"), rollout("jerk_comparison", "quintic")


@pytest.fixture(scope="session")
def ablation_results():
    return ablation()


@pytest.fixture(scope="session")
def intersection_summaries():
    return {lvl: rollout(f"intersection_{lvl}", "proposed")[2] for lvl in ("normal", "light", "moderate", "emergency")}
