#!/usr/bin/env python3
"""Regenerate tests/data/bessel_refs.json with 50-digit Bessel J values.

Run from the repository root:  python3 scripts/gen_bessel_refs.py
"""
import json
import pathlib

import mpmath as mp

mp.mp.dps = 50

ORDERS = [0, 1, 2, 3, 5, 7, 9, 11, 13, 15, 17, 19]
ARGUMENTS = [
    "0.001", "0.1", "0.5", "1", "2.5", "5", "8", "11.9", "12", "12.1",
    "13", "15", "19", "25", "50", "100", "316.2", "1000", "12345.678",
]


def main() -> None:
    rows = []
    for nu in ORDERS:
        for xs in ARGUMENTS:
            val = mp.besselj(nu, mp.mpf(xs))
            rows.append({"nu": nu, "x": xs, "j": mp.nstr(val, 50)})
    out = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "bessel_refs.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(rows, indent=1))
    print(f"wrote {len(rows)} reference values to {out}")


if __name__ == "__main__":
    main()
