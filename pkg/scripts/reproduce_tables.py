"""Reproduce both coefficient tables and write CSV/JSON reports.

    python scripts/reproduce_tables.py [outdir]
"""

import sys
import time
from pathlib import Path

from relaydde import experiments as ex


def main(outdir="results"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    t1 = ex.reproduce_table1()
    t2 = ex.reproduce_table2()
    elapsed = time.perf_counter() - t0
    (out / "table1_report.csv").write_text(ex.table_csv(t1))
    (out / "table2_report.csv").write_text(ex.table_csv(t2))
    (out / "tables_summary.json").write_text(ex.summary_json(table1=t1, table2=t2) + "\n")

    for name, rows in (("table 1", t1), ("table 2", t2)):
        s = ex.table_summary(rows)
        print(f"{name}: {s['match']}/{s['rows']} within 0.02, {s['rounding_consistent']} within 0.005, "
              f"{s['shape_ok']} shape-ok")
        for r in rows:
            if r.status != "rounding-consistent" or not r.shape_ok or r.note:
                extra = "" if r.shape_ok else f" shape fails: {', '.join(r.shape_failed)}"
                print(f"  row {r.index:2d} {r.status:20s} dev={max(r.deviation):.4f}{extra} {r.note}")
    print(f"elapsed {elapsed:.3f} s")


if __name__ == "__main__":
    main(*sys.argv[1:])
