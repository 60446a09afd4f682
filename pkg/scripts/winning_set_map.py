"""Text map of the pursuers' winning set over a planar grid of evader positions.

``#`` marks cells the pursuers win, ``.`` cells they lose, ``x`` terminal
cells and ``P`` pursuers.  The top row is the largest y.

    python3 scripts/winning_set_map.py                          # bundled two-disk scenario
    python3 scripts/winning_set_map.py my_target.json --grid 61,31 --csv map.csv
"""
import argparse

import numpy as np

from ovalgame.defense import sweep_winning_set
from ovalgame.scenario import bundled_dir, load_scenario


def render(res, state):
    nx, ny = res.shape
    win = np.array([-1 if w is None else int(w) for w in res.win]).reshape(nx, ny)
    chars = np.where(win == 1, "#", np.where(win == 0, ".", "x")).astype("<U1")
    xs, ys = res.axes
    for p in state.pursuers:
        i, j = int(np.argmin(np.abs(xs - p[0]))), int(np.argmin(np.abs(ys - p[1])))
        chars[i, j] = "P"
    return "\n".join("".join(chars[:, j]) for j in reversed(range(ny)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("scenario", nargs="?", default=str(bundled_dir() / "two_disk_defense.json"))
    ap.add_argument("--grid", default="61,31", help="cells along x and y")
    ap.add_argument("--csv", default=None, help="also write x,y,value,win rows")
    args = ap.parse_args()

    sc = load_scenario(args.scenario)
    if sc.state.n != 2 or not sc.defense_mode:
        raise SystemExit("need a planar target-defense scenario")
    nx, ny = (int(c) for c in args.grid.split(","))
    bounds = sc.options.sweep_bounds
    if bounds is None:
        r = 2.0 * sc.state.bounding_radius()
        bounds = [[c - r, c + r] for c in sc.state.evader]
    axes = [np.linspace(lo, hi, k) for (lo, hi), k in zip(bounds, (nx, ny))]
    res = sweep_winning_set(sc.state, sc.cost, axes)
    print(render(res, sc.state))
    ok = ~np.isnan(res.values)
    print(f"\nwin fraction {np.mean([w for w in res.win if w is not None]):.3f}, "
          f"terminal {res.terminal_fraction():.3f}, value range [{res.values[ok].min():.3f}, {res.values[ok].max():.3f}]")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("x,y,value,win\n")
            for (x, y), v, w in zip(res.points, res.values, res.win):
                fh.write(f"{x:.17g},{y:.17g},{v:.17g},{'na' if w is None else int(w)}\n")


if __name__ == "__main__":
    main()
