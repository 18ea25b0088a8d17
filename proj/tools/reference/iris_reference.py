#!/usr/bin/env python3
"""Independent Iris baseline on the split used by a bayeshead run.

Reads train/test row ids from a run's metrics.json, standardises with train
statistics and fits scikit-learn models. The acceptance threshold for the
Iris accuracy check is pinned from this output.

    python3 tools/reference/iris_reference.py data/iris.csv out/iris/metrics.json
"""

import json
import sys

import numpy as np
from sklearn.linear_model import LogisticRegression
from sklearn.neural_network import MLPClassifier


def main():
    data = np.genfromtxt(sys.argv[1], delimiter=",", skip_header=1)
    x, y = data[:, :-1], data[:, -1].astype(int)
    with open(sys.argv[2]) as f:
        split = json.load(f)["data"]
    tr, te = split["train_rows"], split["test_rows"]
    mu, sd = x[tr].mean(axis=0), x[tr].std(axis=0)
    xs = (x - mu) / sd

    # L2 strength 1/2 matches a unit Gaussian prior on the weights.
    models = {
        "logistic": LogisticRegression(C=1.0, max_iter=5000),
        "mlp_tanh_8": MLPClassifier(hidden_layer_sizes=(8,), activation="tanh", alpha=1.0 / len(tr),
                                    max_iter=5000, random_state=0),
    }
    for name, model in models.items():
        model.fit(xs[tr], y[tr])
        print(f"{name}: test accuracy {model.score(xs[te], y[te]):.4f} on {len(te)} rows")


if __name__ == "__main__":
    main()
