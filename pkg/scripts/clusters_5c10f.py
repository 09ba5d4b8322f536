"""Five clusters, ten features: neural kernel against the fixed Gaussian kernel."""

from _common import parse, report

from survbenim.experiment import ExperimentConfig, run_experiment

if __name__ == "__main__":
    args = parse(__doc__, 20)
    cfg = ExperimentConfig(preset="5c10f", n_test=args.n_test, seed=args.seed, workers=args.workers,
                           methods=("survbenim-local", "survbex", "survlime", "survnam"))
    report(run_experiment(cfg), args.json)
