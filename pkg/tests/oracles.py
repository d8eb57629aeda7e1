"""Independent reference implementations used only by the tests.

These are deliberately written as plain loops over Python floats and share
no code with the package.
"""

import itertools
import math


def naive_tnfin_output(centers, widths, rule_centers, rule_spreads, x, eps=1e-12):
    n_inputs = len(centers)
    n_mfs = len(centers[0])
    mu = [
        [1.0 / (1.0 + ((x[i] - centers[i][j]) / widths[i][j]) ** 2) for j in range(n_mfs)]
        for i in range(n_inputs)
    ]
    firing = []
    for digits in itertools.product(range(n_mfs), repeat=n_inputs):
        prod = 1.0
        for i, d in enumerate(digits):
            prod *= mu[i][d]
        firing.append(prod)
    total = sum(firing)
    out = 0.0
    for k, w in enumerate(firing):
        wb = min(max(w / total, eps), 1.0)
        one_based = k + 1
        if one_based % 2 == 1:
            y = rule_centers[k] - rule_spreads[k] * math.sqrt(1.0 / wb - 1.0)
        else:
            y = rule_centers[k] + rule_spreads[k] * math.sqrt(1.0 / wb - 1.0)
        out += wb * y
    return out


def naive_firing(centers, widths, x):
    n_inputs = len(centers)
    n_mfs = len(centers[0])
    out = []
    for digits in itertools.product(range(n_mfs), repeat=n_inputs):
        prod = 1.0
        for i, d in enumerate(digits):
            prod *= 1.0 / (1.0 + ((x[i] - centers[i][d]) / widths[i][d]) ** 2)
        out.append(prod)
    return out


def naive_glcm(pixels, levels, dy, dx):
    H, W = len(pixels), len(pixels[0])
    counts = [[0] * levels for _ in range(levels)]
    for r in range(H):
        for c in range(W):
            r2, c2 = r + dy, c + dx
            if 0 <= r2 < H and 0 <= c2 < W:
                counts[pixels[r][c]][pixels[r2][c2]] += 1
    sym = [[counts[i][j] + counts[j][i] for j in range(levels)] for i in range(levels)]
    total = sum(map(sum, sym))
    return [[sym[i][j] / total for j in range(levels)] for i in range(levels)]


def naive_features(pixels, levels, dy=0, dx=1):
    p = naive_glcm(pixels, levels, dy, dx)
    L = levels
    contrast = energy = homogeneity = 0.0
    mu = 0.0
    for i in range(L):
        for j in range(L):
            contrast += (i - j) ** 2 * p[i][j]
            energy += p[i][j] ** 2
            homogeneity += p[i][j] / (1 + (i - j) ** 2)
            mu += i * p[i][j]
    var = 0.0
    for i in range(L):
        for j in range(L):
            var += (i - mu) ** 2 * p[i][j]
    if var == 0:
        correlation = 1.0
    else:
        correlation = 0.0
        for i in range(L):
            for j in range(L):
                correlation += p[i][j] * (i - mu) * (j - mu) / var
    flat = [v for row in pixels for v in row]
    n = len(flat)
    mean = sum(flat) / n
    std = math.sqrt(sum((v - mean) ** 2 for v in flat) / n)
    return [contrast, correlation, energy, homogeneity, mean, std]


def pair_count_u(a, b):
    """Pairs with a < b, ties counted one half."""
    u = 0.0
    for x in a:
        for y in b:
            if x < y:
                u += 1.0
            elif x == y:
                u += 0.5
    return u


def hand_confusion(predicted, actual, positive):
    tp = sum(1 for p, a in zip(predicted, actual) if a == positive and p == positive)
    fn = sum(1 for p, a in zip(predicted, actual) if a == positive and p != positive)
    fp = sum(1 for p, a in zip(predicted, actual) if a != positive and p == positive)
    tn = sum(1 for p, a in zip(predicted, actual) if a != positive and p != positive)
    return tp, fp, tn, fn
