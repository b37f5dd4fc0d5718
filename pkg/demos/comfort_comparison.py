"""Optimized double quintic against the closed-form quintic on the wide-shift comfort scenario.

Run with ``python3 demos/comfort_comparison.py``.
"""

from ttcplanner.metrics import compare, summarize
from ttcplanner.simulation import load_scenario, run_scenario


def main():
    cfg = load_scenario("jerk_comparison")
    rows = []
    for planner in ("quintic", "proposed"):
        log = run_scenario(cfg, planner)
        rows.append((planner, summarize(log, cfg.safety)))
    print(compare(rows).to_text())


if __name__ == "__main__":
    main()
