"""Two-sided approximation statistics along cuspidal expansions.

Reports, per group, how often q^2 |alpha - x| leaves the window
[1/(|W| + 2 mu), 2/|W|] and by how much, together with the horoball floor
and the Patterson constant.

    python3 scripts/run_diophantine.py --samples 150 --seed 1
"""
import argparse
from collections import Counter
from dataclasses import dataclass

import numpy as np

from fuchsdim import diophantine as dio
from fuchsdim.group_model import builtin


@dataclass
class DiophantineRun:
    samples: int = 100
    seed: int = 0
    depth: int = 15
    dps: int = 80
    Q: int = 400


def scan(g, cfg):
    rng = np.random.default_rng(cfg.seed)
    total, bad, excess, kinds = 0, 0, [], Counter()
    for _ in range(cfg.samples):
        vs = dio.expansion_approximation_check(g, dio.random_alpha(rng, dps=cfg.dps), R=cfg.depth, dps=cfg.dps)
        for v in vs:
            total += 1
            excess.append(1 / v.value - v.length)
            if not v.ok:
                bad += 1
                kinds["below lower" if v.value < v.lower else "above upper"] += 1
    return total, bad, max(excess), kinds


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    cfg = DiophantineRun(a.samples, a.seed)
    for name in ("gamma2", "punctured_torus"):
        g = builtin(name)
        total, bad, worst, kinds = scan(g, cfg)
        floors = [dio.horoball_separation_check(dio.enumerate_parabolic_points(g, q, (-2, 2)).points) for q in (50, 100)]
        rng = np.random.default_rng(cfg.seed)
        M = max(dio.patterson_check(g, float(dio.random_alpha(rng)), cfg.Q).M for _ in range(40))
        print(f"{name}: {bad}/{total} outside window {dict(kinds)}; max 1/value - |W| = {worst:.3f} (2 mu = {2 * g.mu_max:g})")
        print(f"  horoball floor Q=50 {floors[0]:.6f}, Q=100 {floors[1]:.6f}; Patterson max over 40 alpha {M:.4f}")


if __name__ == "__main__":
    main()
