"""Shared argument handling for the experiment scripts."""

import argparse
import json
import os

from survbenim.experiment import format_table


def parse(description: str, default_n_test: int):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--n-test", type=int, default=default_n_test)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--json", help="also write the per-method aggregates here")
    return p.parse_args()


def report(output, json_path=None):
    print(f"config {output.config.hash()}  n_test={output.config.n_test}  seed={output.config.seed}")
    print(format_table(output.reports))
    for name, rep in output.reports.items():
        a = rep.aggregates
        print(f"{name:<18} median MSFD {a['MSFD_median']:.4f}  skipped {a['n_skipped']}")
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump({m: r.aggregates for m, r in output.reports.items()}, fh, indent=2, sort_keys=True)
