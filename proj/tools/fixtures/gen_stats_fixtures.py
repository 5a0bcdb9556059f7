"""Freezes reference statistics for the analysis tests.

Run from the repository root:  python3 tools/fixtures/gen_stats_fixtures.py
Writes tests/fixtures/stats_reference.json. Values come from scipy and
statsmodels; the C++ suite compares against them without needing Python.
"""
import json

import numpy as np
import scipy
import statsmodels
import statsmodels.api as sm
from scipy import stats

rng = np.random.default_rng(20240611)


def r(x):
    return [float(v) for v in x]


ttests = []
for i in range(24):
    na, nb = int(rng.integers(2, 30)), int(rng.integers(2, 30))
    a = rng.normal(rng.uniform(200, 400), rng.uniform(5, 60), na).round(2)
    b = rng.normal(rng.uniform(200, 400), rng.uniform(5, 60), nb).round(2)
    welch = bool(i % 4 == 3)
    res = stats.ttest_ind(a, b, equal_var=not welch)
    ttests.append({"a": r(a), "b": r(b), "welch": welch, "t": float(res.statistic), "p": float(res.pvalue),
                   "df": float(res.df)})

olss = []
for i in range(22):
    n = int(rng.integers(6, 40))
    k = int(rng.integers(1, 4))
    x = rng.normal(0, rng.uniform(0.5, 5), (n, k)).round(3)
    beta = rng.uniform(-30, 30, k + 1)
    y = (beta[0] + x @ beta[1:] + rng.normal(0, rng.uniform(0.5, 10), n)).round(3)
    fit = sm.OLS(y, sm.add_constant(x, has_constant="add")).fit()
    olss.append({"y": r(y), "x": [r(row) for row in x], "estimate": r(fit.params), "std_error": r(fit.bse),
                 "t": r(fit.tvalues), "p": r(fit.pvalues), "r_squared": float(fit.rsquared),
                 "adj_r_squared": float(fit.rsquared_adj)})

pearsons = []
for i in range(24):
    n = int(rng.integers(3, 50))
    x = rng.normal(0, 10, n).round(2)
    y = (rng.uniform(-2, 2) * x + rng.normal(0, rng.uniform(1, 20), n)).round(2)
    res = stats.pearsonr(x, y)
    pearsons.append({"x": r(x), "y": r(y), "r": float(res.statistic), "p": float(res.pvalue)})

out = {"generator": "scipy %s, statsmodels %s" % (scipy.__version__, statsmodels.__version__),
       "t_test": ttests, "ols": olss, "pearson": pearsons}
with open("tests/fixtures/stats_reference.json", "w") as f:
    json.dump(out, f, indent=1)
    f.write("\n")
