"""Small-sample MNIST accuracy: plain, locality and translation-invariant SVMs.

Trains one-vs-one SVMs on 100 stratified digits and scores them on a fixed
1000-digit held-out set.  Two repetitions keep the run under a minute; the
``tisvm experiment`` command runs the full grid from an INI file.
"""
from pathlib import Path

from tisvm.experiments import DataConfig, ExperimentConfig, run_experiment

root = Path(__file__).resolve().parents[1] / "data" / "mnist5k"
config = ExperimentConfig(
    data=DataConfig(images=str(root / "images-idx3-ubyte.gz"), labels=str(root / "labels-idx1-ubyte.gz")),
    methods=("SVM", "L", "TI"),
    train_sizes=(100,),
    repetitions=2,
)
table = run_experiment(config)
print(table.to_text())
for run in table.runs:
    print(f"{run.method:>4} rep {run.repetition}: {run.accuracy:.1f}% in {run.seconds:.1f}s, "
          f"max KKT violation {run.max_kkt_violation:.1e}")
