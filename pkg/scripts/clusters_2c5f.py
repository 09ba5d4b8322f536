"""Two clusters, five features: all local explainers against an RSF black box."""

from _common import parse, report

from survbenim.experiment import ExperimentConfig, run_experiment

if __name__ == "__main__":
    args = parse(__doc__, 20)
    cfg = ExperimentConfig(preset="2c5f", n_test=args.n_test, seed=args.seed, workers=args.workers)
    report(run_experiment(cfg), args.json)
