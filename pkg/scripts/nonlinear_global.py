"""Nonlinear risk with two inert features: global SurvBeNIM and the mass it leaves on them."""

import numpy as np
from _common import parse, report

from survbenim.experiment import ExperimentConfig, run_experiment

if __name__ == "__main__":
    args = parse(__doc__, 10)
    cfg = ExperimentConfig(preset="nonlinear_direct", n_test=args.n_test, seed=args.seed, workers=args.workers,
                           methods=("survbenim-global", "survbenim-local", "survlime"))
    out = run_experiment(cfg)
    report(out, args.json)
    for name, rep in out.reports.items():
        imp = np.array([np.abs(r.importance) / np.abs(r.importance).sum() for r in rep.rows if r.importance])
        print(f"{name:<18} mean normalized importance {np.round(imp.mean(axis=0), 3).tolist()}")
