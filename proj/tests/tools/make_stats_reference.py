"""Regenerates data/stats_reference.json from SciPy.

The C++ statistics are checked against these values, so SciPy acts as the
independent reference implementation. Run from the tests directory:

    python3 tools/make_stats_reference.py
"""

import json
import pathlib

import numpy as np
from scipy import stats

rng = np.random.default_rng(20240611)
out = {"generator": f"scipy {__import__('scipy').__version__}", "welch": [], "chi2": [], "spearman": []}

for _ in range(50):
    a = rng.normal(rng.uniform(-2, 2), rng.uniform(0.2, 3), rng.integers(2, 30)).round(6)
    b = rng.normal(rng.uniform(-2, 2), rng.uniform(0.2, 3), rng.integers(2, 30)).round(6)
    r = stats.ttest_ind(a, b, equal_var=False)
    df = (a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b)) ** 2 / (
        (a.var(ddof=1) / len(a)) ** 2 / (len(a) - 1) + (b.var(ddof=1) / len(b)) ** 2 / (len(b) - 1))
    out["welch"].append({"a": a.tolist(), "b": b.tolist(), "statistic": float(r.statistic),
                         "p_value": float(r.pvalue), "df": float(df)})

while len(out["chi2"]) < 50:
    rows, cols = rng.integers(2, 5), rng.integers(2, 5)
    table = rng.integers(0, 40, size=(rows, cols))
    if (table.sum(axis=0) == 0).any() or (table.sum(axis=1) == 0).any():
        continue
    stat, p, dof, _ = stats.chi2_contingency(table, correction=False)
    out["chi2"].append({"table": table.tolist(), "statistic": float(stat), "p_value": float(p), "df": int(dof)})

for i in range(50):
    n = int(rng.integers(5, 40))
    x = rng.normal(size=n)
    y = 0.5 * x + rng.normal(size=n)
    if i % 3 == 0:  # exercise tie handling
        x, y = x.round(0), y.round(0)
    r = stats.spearmanr(x, y)
    out["spearman"].append({"a": x.tolist(), "b": y.tolist(), "statistic": float(r.statistic),
                            "p_value": float(r.pvalue)})

r = stats.spearmanr([1, 2, 3, 4, 5], [2, 1, 4, 3, 5])
out["spearman_worked_example"] = {"a": [1, 2, 3, 4, 5], "b": [2, 1, 4, 3, 5], "statistic": float(r.statistic),
                                  "p_value": float(r.pvalue)}

path = pathlib.Path(__file__).resolve().parent.parent / "data" / "stats_reference.json"
path.write_text(json.dumps(out, indent=1) + "\n")
print(f"wrote {path}")
