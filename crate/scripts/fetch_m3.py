#!/usr/bin/env python3
"""Convert the M3 competition data bundled with the `fcompdata` package into
the wide CSV format read by `frugal bench`.

    pip install fcompdata
    python3 scripts/fetch_m3.py data/m3

Writes one file per frequency: m3_yearly.csv, m3_quarterly.csv,
m3_monthly.csv and m3_other.csv. Each row is

    id,period_s,horizon_h,category,v1,...,vN

where v1..vN are the in-sample values followed by the withheld test values.
"""
import json
import os
import sys

PERIODS = {"YEARLY": 1, "QUARTERLY": 4, "MONTHLY": 12, "OTHER": 1}


def main() -> int:
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "data/m3"
    try:
        import fcompdata
    except ImportError:
        print("fcompdata is not installed: pip install fcompdata", file=sys.stderr)
        return 1
    src = os.path.join(os.path.dirname(fcompdata.__file__), "data", "m3_data.json")
    with open(src) as fh:
        data = json.load(fh)

    os.makedirs(out_dir, exist_ok=True)
    rows = {k: [] for k in PERIODS}
    for sid in sorted(data):
        rec = data[sid]
        period = rec["period"][0]
        values = list(rec["x"]) + list(rec["xx"])
        assert len(rec["xx"]) == rec["h"][0]
        cells = [sid, str(PERIODS[period]), str(rec["h"][0]), rec["type"][0]]
        cells += [repr(float(v)) for v in values]
        rows[period].append(",".join(cells))

    for period, lines in rows.items():
        path = os.path.join(out_dir, f"m3_{period.lower()}.csv")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"{path}: {len(lines)} series")
    return 0


if __name__ == "__main__":
    sys.exit(main())
