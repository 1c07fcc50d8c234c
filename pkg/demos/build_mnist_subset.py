"""Rebuild ``data/mnist5k`` from the 5000-digit MNIST sample shipped with mlxtend.

The mlxtend wheel bundles ``mnist_5k.csv.gz`` (500 training digits per class,
raw 0-255 bytes, label in the last column).  This script rewrites it as a pair
of gzipped IDX files so the rest of the package only ever reads IDX.

    pip download --no-deps mlxtend && python demos/build_mnist_subset.py mlxtend-*.whl
"""
import gzip
import io
import sys
import zipfile
from pathlib import Path

import numpy as np

from tisvm.data import write_idx

OUT = Path(__file__).resolve().parents[1] / "data" / "mnist5k"


def main(wheel):
    with zipfile.ZipFile(wheel) as zf:
        raw = zf.read("mlxtend/data/data/mnist_5k.csv.gz")
    table = np.loadtxt(io.BytesIO(gzip.decompress(raw)), delimiter=",", dtype=np.int64)
    images = table[:, :-1].astype(np.uint8).reshape(-1, 28, 28)
    labels = table[:, -1].astype(np.uint8)
    OUT.mkdir(parents=True, exist_ok=True)
    write_idx(OUT / "images-idx3-ubyte.gz", images)
    write_idx(OUT / "labels-idx1-ubyte.gz", labels)
    print(f"wrote {len(labels)} digits to {OUT}")


if __name__ == "__main__":
    main(sys.argv[1])
