"""Dimensions of E_N for the Gauss map and the extrapolated N (1 - dim E_N).

    python3 scripts/run_hensley.py --N 20 50 100 200 400
"""
import argparse
from dataclasses import dataclass, field

from fuchsdim.gauss_oracle import HENSLEY, UnitGrid, gauss_cylinder_bracket, gauss_dim, hensley_fit


@dataclass
class HensleyRun:
    Ns: list = field(default_factory=lambda: [20, 50, 100, 200])
    nodes: int = 256
    bracket_depth: int = 6


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, nargs="+", default=[20, 50, 100, 200])
    ap.add_argument("--nodes", type=int, default=256)
    a = ap.parse_args()
    cfg = HensleyRun(a.N, a.nodes)
    grid = UnitGrid(cfg.nodes)
    dims = [gauss_dim(n, grid).s for n in cfg.Ns]
    for n, d in zip(cfg.Ns, dims):
        print(f"N={n:5d}  dim={d:.12f}  N(1-dim)={n * (1 - d):.8f}")
    fit = hensley_fit(cfg.Ns, dims)
    print(f"extrapolated {fit.constant:.8f}   6/pi^2 = {HENSLEY:.8f}   rel {fit.constant / HENSLEY - 1:+.2e}")
    lo, hi = gauss_cylinder_bracket(2, cfg.bracket_depth)
    print(f"dim E_2 = {gauss_dim(2, grid).s:.10f}, cylinder bracket [{lo:.6f}, {hi:.6f}]")


if __name__ == "__main__":
    main()
