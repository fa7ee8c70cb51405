"""Bowen roots s_T and both Theta estimates for a group.

    python3 scripts/run_dimension.py --group gamma2 --T 25 50 100 200
"""
import argparse
import json
from dataclasses import asdict, dataclass, field

from fuchsdim.dimension import dimension_report
from fuchsdim.group_model import builtin, load_group_spec


@dataclass
class DimensionRun:
    group: str = "gamma2"
    Ts: list = field(default_factory=lambda: [25, 50, 100, 200])
    grid: int = 128
    spectral_grid: int = 256


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--group", default="gamma2", help="built-in name or path to a JSON spec")
    ap.add_argument("--T", type=float, nargs="+", default=[25, 50, 100, 200])
    ap.add_argument("--grid", type=int, default=128)
    a = ap.parse_args()
    cfg = DimensionRun(a.group, a.T, a.grid)
    g = load_group_spec(cfg.group) if cfg.group.endswith(".json") else builtin(cfg.group)
    rep = dimension_report(g, cfg.Ts, cfg.grid, cfg.spectral_grid)
    for T, s, res, m in rep.rows:
        print(f"T={T:7.1f}  s_T={s:.12f}  T(1-s_T)={T * (1 - s):.6f}  residual={res:.1e}")
    print(f"Theta spectral   {rep.theta_spectral:.9f}  (delta {rep.delta:.9f}, beta {rep.beta:.9f})")
    print(f"Theta regression {rep.theta_regression:.9f}")
    print(json.dumps({"config": asdict(cfg), "diagnostics": rep.diagnostics}, indent=2, default=float))


if __name__ == "__main__":
    main()
