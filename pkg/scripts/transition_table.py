"""Dipole moments, radiative lifetimes and lifetime ratios for the bundled transitions."""

import argparse
import csv
import sys

from rareion_cqed import coupling, ion_catalog


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--catalog", help="catalog file (default: bundled)")
    ap.add_argument("--out", help="CSV path (default: stdout)")
    args = ap.parse_args()

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["id", "host_index", "mu_1e-32_Cm", "T_spon_ms", "T_spon_over_T1", "T_spon_over_T2"])
    for rec in ion_catalog.load_catalog(args.catalog):
        ts = coupling.spontaneous_time(rec)
        w.writerow([rec.id, rec.host_index, f"{coupling.dipole_moment(rec) / 1e-32:.4g}",
                    f"{ts * 1e3:.4g}", f"{ts / rec.T1:.4g}", f"{ts / rec.T2:.4g}"])
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
