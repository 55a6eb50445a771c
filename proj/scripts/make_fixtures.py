#!/usr/bin/env python3
"""Generates the plain-text fixtures for the built-in problems S1/S2/S3.

Each problem ships a sensing matrix A (m x D), offset b (m) and a feasible
reference state xstar (D); S2 adds a constraint table C whose rows are
[g_i (D values), t_i] for constraints g_i . x_norm - t_i <= 0.

The forward family is F_j(x) = sum_i A_ji * sin(pi/2 * xn_i) + b_j on the
min-max normalized state xn (S3 applies the monotone reshaping first), and
the target observation is y = F(xstar). The S1 amplitude is calibrated by
bisection so that 3-4% of uniformly drawn states are feasible at the default
threshold 0.075 (accumulated error = reconstruction + 0.1*boundary +
0.1*balance). Run from the repository root:

    python3 scripts/make_fixtures.py

The outputs in data/fixtures/ are committed; regenerate only when changing
the problem definitions.
"""

import os

import numpy as np

OUT = os.path.join(os.path.dirname(__file__), "..", "data", "fixtures")

# must mirror the bounds in src/evaluators.cpp
S1_LO = np.array([0.0, -0.5, 0.2, 0.0, -1.0, 0.5, 0.0, -0.3, 0.1, 0.0, -0.8])
S1_HI = np.array([1.0, 1.5, 1.2, 2.0, 1.0, 2.5, 0.9, 0.7, 1.1, 1.6, 1.2])


def save_table(name, rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    path = os.path.join(OUT, name)
    with open(path, "w") as f:
        f.write(f"{rows.shape[0]} {rows.shape[1]}\n")
        for r in rows:
            f.write(" ".join(repr(float(v)) for v in r) + "\n")
    print(f"wrote {path} ({rows.shape[0]}x{rows.shape[1]})")


def forward(A, b, xn):
    return np.sin(np.pi / 2.0 * xn) @ A.T + b


def reconstruction(F, y):
    return np.sum(np.abs(F - y) / (len(y) * np.abs(y)), axis=-1)


def balance(xn):
    return np.std(xn, axis=-1)  # population convention


def postprocess(xn):
    first = xn[..., :1]
    partial = np.cumsum(xn, axis=-1)
    out = first + (1.0 - first) / (1.0 + np.exp(-partial))
    out[..., 0] = first[..., 0]
    return out


def s1_feasible_fraction(A, b, xstar, eps, n=100_000, seed=7):
    rng = np.random.default_rng(seed)
    xn = rng.uniform(0.0, 1.0, size=(n, len(S1_LO)))  # normalized space
    y = forward(A, b, (xstar - S1_LO) / (S1_HI - S1_LO))
    acc = reconstruction(forward(A, b, xn), y) + 0.1 * balance(xn)  # boundary = 0 in box
    return float(np.mean(acc <= eps))


def make_s1():
    rng = np.random.default_rng(12345)
    direction = rng.normal(size=(2, 11))
    b = np.array([100.0, 20.0])
    xn_star = rng.uniform(0.35, 0.65, size=11)
    xstar = S1_LO + xn_star * (S1_HI - S1_LO)

    lo_scale, hi_scale = 0.1, 400.0
    for _ in range(60):  # bisection: fraction decreases with amplitude
        s = 0.5 * (lo_scale + hi_scale)
        frac = s1_feasible_fraction(s * direction, b, xstar, eps=0.075)
        if frac > 0.035:
            lo_scale = s
        else:
            hi_scale = s
    A = 0.5 * (lo_scale + hi_scale) * direction

    for eps in (0.05, 0.075, 0.1):
        print(f"S1 feasible fraction at eps={eps}: "
              f"{s1_feasible_fraction(A, b, xstar, eps):.4f}")
    save_table("S1.A", A)
    save_table("S1.b", [b])
    save_table("S1.xstar", [xstar])


def make_s2():
    rng = np.random.default_rng(23456)
    D = 20
    A = 6.0 * rng.normal(size=(2, D))
    b = np.array([80.0, 40.0])
    xn_star = rng.uniform(0.3, 0.7, size=D)
    xstar = -1.0 + 2.0 * xn_star  # bounds [-1, 1]

    G = rng.normal(size=(7, D)) / np.sqrt(D)
    margins = rng.uniform(0.15, 0.4, size=7)
    t = G @ xn_star + margins  # c_i(xstar) = -margin_i < 0
    C = np.hstack([G, t[:, None]])

    y = forward(A, b, xn_star)
    n = 100_000
    xn = rng.uniform(0.0, 1.0, size=(n, D))
    cons = np.maximum(xn @ G.T - t, 0.0).mean(axis=1)
    acc = reconstruction(forward(A, b, xn), y) + cons
    for eps in (0.05, 0.075, 0.1):
        print(f"S2 feasible fraction at eps={eps}: {np.mean(acc <= eps):.4f}")

    save_table("S2.A", A)
    save_table("S2.b", [b])
    save_table("S2.xstar", [xstar])
    save_table("S2.C", C)


def make_s3():
    rng = np.random.default_rng(34567)
    D = 30
    A = 3.0 * rng.normal(size=(2, D))
    b = np.array([60.0, 30.0])
    steps = rng.uniform(0.5, 1.5, size=D)
    xstar = 0.05 + 0.9 * np.cumsum(steps) / np.sum(steps)  # strictly increasing in (0,1)

    y = forward(A, b, postprocess(xstar))
    n = 100_000
    xn = rng.uniform(0.0, 1.0, size=(n, D))
    gaps = np.maximum(xn[:, :-1] - xn[:, 1:], 0.0).mean(axis=1)
    acc = reconstruction(forward(A, b, postprocess(xn)), y) + 10.0 * gaps
    for eps in (0.05, 0.075, 0.1):
        print(f"S3 feasible fraction at eps={eps}: {np.mean(acc <= eps):.6f}")

    save_table("S3.A", A)
    save_table("S3.b", [b])
    save_table("S3.xstar", [xstar])


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    make_s1()
    make_s2()
    make_s3()
