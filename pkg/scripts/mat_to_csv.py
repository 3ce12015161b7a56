"""Convert a MATLAB feature-selection dataset (variables ``X`` and ``Y``) to CSV.

    python scripts/mat_to_csv.py colon.mat data/colon.csv

The label is written to the last column, which is what ``melfs`` expects by default.
"""
import sys

import numpy as np
from scipy.io import loadmat

from melfs.dataset import Dataset, save_csv


def main(src: str, dst: str) -> None:
    m = loadmat(src)
    X = np.asarray(m["X"], dtype=np.float64)
    raw = np.asarray(m["Y"]).ravel()
    names, y = np.unique(raw, return_inverse=True)
    save_csv(Dataset(X, y, label_names=tuple(str(n) for n in names)), dst)
    print(f"{dst}: {X.shape[0]} samples, {X.shape[1]} features, {len(names)} classes")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
