"""Reference implementations used to check the package.

Nothing here imports muqmc. Measures are described by small tuples:

* ``("power", alphas)``: product measure with CDF ``prod t_j**alpha_j``
  (``alphas`` all 1 is the uniform measure),
* ``("atoms", points, weights)``: a finite weighted point mass.
"""

import itertools

import numpy as np


def power_mass(alphas, t_axes):
    """Grid of ``prod_j t_j**a_j`` over the product of the 1-d arrays ``t_axes``."""
    out = np.ones(())
    for a, t in zip(alphas, t_axes):
        out = np.multiply.outer(out, np.asarray(t, dtype=float) ** a)
    return out


def atom_mass(points, weights, t_axes, closed):
    """Grid of ``sum_a w_a prod_j 1[p_aj <= t_j]`` (``<`` on open axes)."""
    points = np.asarray(points, dtype=float)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    ind = []
    for j, t in enumerate(t_axes):
        t = np.asarray(t, dtype=float)
        if closed[j]:
            ind.append(points[:, j][:, None] <= t[None, :])
        else:
            ind.append(points[:, j][:, None] < t[None, :])
    letters = "abcdefgh"[: len(t_axes)]
    expr = "z," + ",".join("z" + c for c in letters) + "->" + letters
    return np.einsum(expr, w, *[i.astype(float) for i in ind])


def grid_mass(measure, t_axes, closed):
    if measure[0] == "power":
        return power_mass(measure[1], t_axes)
    return atom_mass(measure[1], measure[2], t_axes, closed)


def point_count(points, t_axes, closed):
    """Number of points inside each anchored box of the grid."""
    return atom_mass(points, np.ones(len(points)), t_axes, closed) * len(points)


def lattice_sweep(points, measure, steps=1000):
    """Brute-force ``sup |A(t)/n - mu(t)|`` over lattice corners ``t_j = i/steps``.

    Every corner is evaluated for each closed/open pattern, so point sets
    and atoms lying on the lattice are handled exactly.
    """
    points = np.asarray(points, dtype=float)
    n, d = points.shape
    t = np.arange(steps + 1) / steps
    axes = [t] * d
    best = 0.0
    for closed in itertools.product((True, False), repeat=d):
        frac = point_count(points, axes, closed) / n
        mu = grid_mass(measure, axes, closed)
        best = max(best, float(np.abs(frac - mu).max()))
    return best


def random_corners(points, measure, trials=10**6, seed=0, chunk=10**5):
    """Largest ``|A(t)/n - mu([0, t])|`` over seeded random closed corners."""
    points = np.asarray(points, dtype=float)
    n, d = points.shape
    rng = np.random.default_rng(seed)
    best = 0.0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        t = rng.random((m, d))
        inside = np.all(points[None, :, :] <= t[:, None, :], axis=2)
        frac = inside.sum(axis=1) / n
        if measure[0] == "power":
            mu = np.prod(t ** np.asarray(measure[1], dtype=float), axis=1)
        else:
            a = np.asarray(measure[1], dtype=float)
            w = np.asarray(measure[2], dtype=float)
            w = w / w.sum()
            mu = np.all(a[None, :, :] <= t[:, None, :], axis=2).astype(float) @ w
        best = max(best, float(np.abs(frac - mu).max()))
        done += m
    return best


def ks_statistic(x, cdf):
    """Order-statistics formula for the 1-d star discrepancy of an atomless CDF."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    F = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n), 0.0))


def comb_disc_1d(x, y):
    """max over t of |sum_{x_i <= t} y_i|, grouping tied coordinates."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    s = np.cumsum(ys)
    ends = np.append(xs[1:] != xs[:-1], True)
    return int(np.abs(s[ends]).max()) if len(s) else 0


def comb_disc_brute(points, y):
    """Closed anchored boxes at every combination of point coordinates (and 1)."""
    points = np.asarray(points, dtype=float)
    y = np.asarray(y, dtype=int)
    d = points.shape[1]
    axes = [np.unique(np.append(points[:, j], 1.0)) for j in range(d)]
    best = 0
    for t in itertools.product(*axes):
        inside = np.all(points <= np.asarray(t), axis=1)
        best = max(best, abs(int(y[inside].sum())))
    return best


def star_disc_brute(points, measure):
    """Exact discrepancy by checking every corner of the point/atom grid with every closure.

    Slow (``O(grid * n)``) but structurally simple; for small inputs only.
    """
    points = np.asarray(points, dtype=float)
    n, d = points.shape
    axes = []
    for j in range(d):
        vals = list(points[:, j]) + [1.0]
        if measure[0] == "atoms":
            vals += list(np.asarray(measure[1], dtype=float)[:, j])
        axes.append(np.unique(vals))
    best = 0.0
    for closed in itertools.product((True, False), repeat=d):
        frac = point_count(points, axes, closed) / n
        mu = grid_mass(measure, axes, closed)
        best = max(best, float(np.abs(frac - mu).max()))
    return best
