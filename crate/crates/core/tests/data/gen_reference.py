"""Regenerates stats_reference.json from scipy.

Run from this directory: python3 gen_reference.py
The Rust tests only read the JSON; scipy is not needed to run them.
"""
import json

import numpy as np
from scipy import special, stats

rng = np.random.default_rng(7331)


def draw(n):
    kind = rng.integers(0, 5)
    if kind == 0:
        return rng.normal(rng.uniform(-5, 5), rng.uniform(0.1, 10), n)
    if kind == 1:
        return rng.exponential(rng.uniform(0.5, 20), n)
    if kind == 2:
        return rng.lognormal(rng.uniform(0, 3), rng.uniform(0.2, 1.5), n)
    if kind == 3:
        return rng.poisson(rng.uniform(0.5, 30), n).astype(float)
    return (rng.pareto(1.3, n) + 1.0).round()


def welch(a, b):
    out = {}
    for alt in ("greater", "less", "two-sided"):
        r = stats.ttest_ind(a, b, equal_var=False, alternative=alt)
        out[alt] = float(r.pvalue)
        out["statistic"] = float(r.statistic)
    va, vb = a.var(ddof=1) / len(a), b.var(ddof=1) / len(b)
    out["df"] = float((va + vb) ** 2 / (va**2 / (len(a) - 1) + vb**2 / (len(b) - 1)))
    return out


def ks(a, b):
    d = float(stats.ks_2samp(a, b, method="asymp").statistic)
    en = len(a) * len(b) / (len(a) + len(b))
    lam = (np.sqrt(en) + 0.12 + 0.11 / np.sqrt(en)) * d
    return {"d": d, "p": float(special.kolmogorov(lam))}


welch_cases, ks_cases, dp_cases = [], [], []

# Fixed fixtures named in the operation examples come first.
a, b = rng.normal(10, 2, 30), rng.normal(11, 3, 30)
welch_cases.append({"a": a.tolist(), "b": b.tolist(), **welch(a, b)})
a, b = rng.normal(0, 1, 50), rng.normal(0.5, 1.5, 60)
ks_cases.append({"a": a.tolist(), "b": b.tolist(), **ks(a, b)})

while len(welch_cases) < 100:
    a, b = draw(int(rng.integers(2, 80))), draw(int(rng.integers(2, 80)))
    if a.var() == 0 and b.var() == 0:
        continue
    welch_cases.append({"a": a.tolist(), "b": b.tolist(), **welch(a, b)})

while len(ks_cases) < 100:
    a, b = draw(int(rng.integers(1, 120))), draw(int(rng.integers(1, 120)))
    ks_cases.append({"a": a.tolist(), "b": b.tolist(), **ks(a, b)})

while len(dp_cases) < 30:
    a = draw(int(rng.integers(20, 400)))
    if a.var() == 0:
        continue
    r = stats.normaltest(a)
    dp_cases.append({"a": a.tolist(), "statistic": float(r.statistic), "p": float(r.pvalue)})

with open("stats_reference.json", "w") as f:
    json.dump({"welch": welch_cases, "ks": ks_cases, "dagostino_pearson": dp_cases}, f)
