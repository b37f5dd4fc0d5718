"""Time to collision and its penalty on a few hand-checkable configurations."""

from ttcplanner.safety import ttc, ttc_penalty

CASES = {
    "slower car 30 m ahead, closing 8 m/s": ((0, 0, 20, 0), (30, 0, 12, 0)),
    "slower car 12 m ahead, closing 8 m/s": ((0, 0, 20, 0), (12, 0, 12, 0)),
    "receding": ((0, 0, 10, 0), (30, 0, 12, 0)),
    "side by side, lateral approach": ((0, 0, 15, 1), (0, 3.5, 15, 0)),
}

if __name__ == "__main__":
    for label, (ego, obs) in CASES.items():
        s = ttc(ego, obs)
        print(f"{label:36s} gap {s.gap:6.2f} m  closing {s.closing_speed:6.2f} m/s  "
              f"TTC {s.ttc:6.2f} s  penalty {ttc_penalty(s.ttc, 3.0):.4f}")
