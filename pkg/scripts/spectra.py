"""Reflection/emission spectra, cooperativity sweep and FID traces for a bad and a good cavity."""

import argparse
import csv
import math
from pathlib import Path

import numpy as np

from rareion_cqed import linear_response as lr
from rareion_cqed.linear_response import ResponseSystem
from rareion_cqed.pulses import PulseSpec

MHZ = 2 * math.pi * 1e6
SYSTEMS = {
    "bad_cavity": ResponseSystem(1 * MHZ, 10 * MHZ, 0.01 * MHZ),
    "good_cavity": ResponseSystem(3.2 * MHZ, 0.32 * MHZ, 0.32 * MHZ),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/spectra")
    ap.add_argument("--npoints", type=int, default=4001)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, s in SYSTEMS.items():
        span = 3 * max(s.kappa, s.g)
        deltas = np.linspace(-span, span, args.npoints)
        (out / f"{name}_atom.csv").write_text(lr.spectrum(s, deltas).to_csv())
        (out / f"{name}_empty.csv").write_text(lr.spectrum(s.empty(), deltas).to_csv())

        fid = lr.fid_signal(s, lr.gaussian_probe(s))
        keep = np.flatnonzero(fid.t <= 8 / lr.slow_pole_rate(s))
        keep = keep[:: max(1, len(keep) // 2000)]
        (out / f"{name}_fid.csv").write_text(lr.fid_to_csv(PulseSpec(fid.t[keep], fid.values[keep])))

    with open(out / "cooperativity_sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["C", "phase0", "emission0"])
        for row in lr.cooperativity_sweep(1.0, 1.0, np.geomspace(1e-2, 1e2, 81)):
            w.writerow([repr(v) for v in row])
    print(f"wrote spectra to {out}")


if __name__ == "__main__":
    main()
