"""Required quality factor against sphere radius for every catalog transition.

Writes one CSV per (target, transition) plus a ranking of the transitions at
each radius.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from rareion_cqed import ion_catalog, wgm_design


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/design_curves")
    ap.add_argument("--rmin", type=float, default=0.1e-3, help="m")
    ap.add_argument("--rmax", type=float, default=5e-3, help="m")
    ap.add_argument("--npoints", type=int, default=50)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    radii = np.geomspace(args.rmin, args.rmax, args.npoints)
    catalog = ion_catalog.load_catalog()
    for target in ("N0_pop", "N0_ph"):
        curves = {}
        for rec in catalog:
            pts = wgm_design.radius_q_curve(rec, target, radii)
            curves[rec.id] = [p.Q_required for p in pts]
            slug = "".join(c if c.isalnum() else "_" for c in rec.id)
            (out / f"{target}_{slug}.csv").write_text(wgm_design.curve_to_csv(pts))
        with open(out / f"{target}_ranking.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["radius_m"] + [f"rank_{i + 1}" for i in range(len(catalog))])
            for i, r in enumerate(radii):
                w.writerow([repr(float(r))] + sorted(curves, key=lambda k: curves[k][i]))
    print(f"wrote curves for {len(catalog)} transitions to {out}")


if __name__ == "__main__":
    main()
