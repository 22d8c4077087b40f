"""Least-squares slope of log(mean fast-MLE MSE) against log(n) for each CSV given."""
import csv
import statistics
import sys

import numpy as np

for path in sys.argv[1:]:
    rows = list(csv.DictReader(open(path)))
    ns = sorted({int(r["n"]) for r in rows})
    sigma = rows[0]["sigma"]
    means, medians = [], []
    for n in ns:
        mse = [float(r["mse"]) for r in rows if int(r["n"]) == n]
        means.append(statistics.mean(mse))
        medians.append(statistics.median(mse))
    x = np.log(ns)
    s_mean = np.polyfit(x, np.log(means), 1)[0]
    s_med = np.polyfit(x, np.log(medians), 1)[0]
    pts = " ".join(f"{n}:{m:.4g}" for n, m in zip(ns, means))
    print(f"sigma={sigma} trials={len(mse)} mean_mse {{{pts}}} slope_of_means={s_mean:.3f} slope_of_medians={s_med:.3f}")
