"""How often is a best-fit Gram matrix positive definite?

The best-fit kernel is not positive definite in general, but for a handful
of samples in high dimension it almost always is.  This script estimates the
PD probability for i.i.d. Gaussian pixels at three image sizes and then
looks for the largest MNIST subsample whose best-fit Gram stays PD.
"""
from pathlib import Path

from tisvm.data import load_idx, subsample
from tisvm.experiments import method_spec
from tisvm.pd import PdTrialConfig, pd_threshold_search, run_pd_trials

spec = method_spec("TI-linear")
for side in (8, 16, 32):
    res = run_pd_trials(PdTrialConfig(side, side, spec, n=5, trials=50, seed=0))
    print(f"{side:2d}x{side:<2d} n=5: PD in {100 * res.pd_fraction:5.1f}% of trials, "
          f"Gershgorin certifies {100 * res.gershgorin_fraction:5.1f}%, "
          f"median lambda_min {sorted(res.min_eigenvalues)[len(res.min_eigenvalues) // 2]:.3f}")

root = Path(__file__).resolve().parents[1] / "data" / "mnist5k"
digits = subsample(load_idx(root / "images-idx3-ubyte.gz", root / "labels-idx1-ubyte.gz"), 200, seed=0)
for name in ("TI-linear", "TI-poly"):
    print(f"largest PD subsample of 200 digits, {name}: {pd_threshold_search(digits.images, method_spec(name))}")
