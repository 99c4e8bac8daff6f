"""Seeded synthetic datasets and independent oracles shared by the tests."""
import numpy as np

from imbalance_boost import Dataset


def linear_fixture(m=200, n=5, seed=20240101, noise=0.5):
    """Linearly separable labels with Gaussian logit noise (the 200x5 fixture)."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(m, n))
    w = np.linspace(2.0, -1.0, n)
    logit = X @ w + rng.normal(scale=noise, size=m)
    return Dataset(X, (logit > 0).astype(float))


def imbalanced_fixture(m=500, minority_fraction=0.1, seed=7):
    """9:1 data with label 1 as the minority; the classes overlap."""
    rng = np.random.default_rng(seed)
    n_pos = int(round(m * minority_fraction))
    y = np.zeros(m)
    y[:n_pos] = 1.0
    X = rng.normal(size=(m, 4))
    X[:n_pos, 0] += 1.5
    X[:n_pos, 1] += 1.0
    perm = rng.permutation(m)
    return Dataset(X[perm], y[perm])


# -- loss oracles: written from the loss definitions, not the derivative formulas

def sigmoid_ref(z):
    return 1.0 / (1.0 + np.exp(-z))


def loss_ref(kind, y, z, param=None):
    p = sigmoid_ref(z)
    if kind == "plain":
        return -(y * np.log(p) + (1 - y) * np.log(1 - p))
    if kind == "weighted":
        return -(param * y * np.log(p) + (1 - y) * np.log(1 - p))
    return -(y * (1 - p) ** param * np.log(p) + (1 - y) * p ** param * np.log(1 - p))


def fd_grad(kind, y, z, param=None, h=1e-5):
    return (loss_ref(kind, y, z + h, param) - loss_ref(kind, y, z - h, param)) / (2 * h)


# -- split oracle ----------------------------------------------------------------

def score_term_ref(G, H, lam):
    return G * G / (H + lam) if H + lam >= 1e-16 else 0.0


def gain_ref(GL, HL, GR, HR, lam):
    return 0.5 * (score_term_ref(GL, HL, lam) + score_term_ref(GR, HR, lam)
                  - score_term_ref(GL + GR, HL + HR, lam))


def brute_force_split(X, g, h, rows, lam, min_gain, min_child_h, tol=0.0):
    """Enumerate every (feature, midpoint) split and return the best by the pinned order.

    Returns (feature, threshold, gain) or None. Sums are taken over member
    lists in instance order. With ``tol`` > 0, gains within relative ``tol``
    of the maximum count as ties, absorbing summation-order rounding.
    """
    if len(rows) < 2:
        return None
    candidates = []
    for j in range(X.shape[1]):
        vals = sorted(set(X[rows, j].tolist()))
        for lo, hi in zip(vals[:-1], vals[1:]):
            thr = lo + (hi - lo) * 0.5
            if not (lo <= thr < hi):
                thr = lo
            left = [i for i in rows if X[i, j] <= thr]
            right = [i for i in rows if X[i, j] > thr]
            GL = sum(g[i] for i in left)
            HL = sum(h[i] for i in left)
            GR = sum(g[i] for i in right)
            HR = sum(h[i] for i in right)
            if HL < min_child_h or HR < min_child_h:
                continue
            gain = gain_ref(GL, HL, GR, HR, lam) - min_gain
            # gains within relative ``tol`` of the child terms are rounding noise
            child = 0.5 * (score_term_ref(GL, HL, lam) + score_term_ref(GR, HR, lam))
            if gain <= 0 or gain <= tol * child:
                continue
            candidates.append((j, thr, gain))
    if not candidates:
        return None
    top = max(c[2] for c in candidates)
    # candidates are already in (feature, threshold) order
    return next(c for c in candidates if c[2] >= top - tol * top)


def brute_force_tree(X, g, h, rows, depth, max_depth, lam, lr, min_gain, min_child_h, tol=0.0):
    """Nested tuples: ('leaf', w) or ('split', feature, threshold, left, right)."""
    split = None
    if depth < max_depth:
        split = brute_force_split(X, g, h, rows, lam, min_gain, min_child_h, tol)
    if split is None:
        G = sum(g[i] for i in rows)
        H = sum(h[i] for i in rows)
        w = 0.0 if H + lam < 1e-16 else -G / (H + lam)
        return ("leaf", w * lr)
    j, thr, _ = split
    left = [i for i in rows if X[i, j] <= thr]
    right = [i for i in rows if X[i, j] > thr]
    return (
        "split", j, thr,
        brute_force_tree(X, g, h, left, depth + 1, max_depth, lam, lr, min_gain, min_child_h, tol),
        brute_force_tree(X, g, h, right, depth + 1, max_depth, lam, lr, min_gain, min_child_h, tol),
    )


def tree_as_tuple(node):
    if node.is_leaf:
        return ("leaf", node.weight)
    return ("split", node.feature_index, node.threshold,
            tree_as_tuple(node.left), tree_as_tuple(node.right))


# -- metric oracle ---------------------------------------------------------------

def materialize(tp, fp, tn, fn):
    """Per-instance (label, prediction) arrays realizing a confusion matrix."""
    y = np.array([1] * tp + [0] * fp + [0] * tn + [1] * fn)
    pred = np.array([1] * tp + [1] * fp + [0] * tn + [0] * fn)
    return y, pred


def metrics_from_instances(y, pred):
    """Metrics computed instance by instance with plain Python loops."""
    n = len(y)
    correct = sum(1 for a, b in zip(y, pred) if a == b)
    pos_pred = [a for a, b in zip(y, pred) if b == 1]
    actual_pos = [b for a, b in zip(y, pred) if a == 1]
    prec = (sum(pos_pred) / len(pos_pred)) if pos_pred else 0.0
    rec = (sum(actual_pos) / len(actual_pos)) if actual_pos else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
    # MCC as the Pearson correlation between label and prediction
    my = sum(y) / n
    mp = sum(pred) / n
    cov = sum((a - my) * (b - mp) for a, b in zip(y, pred))
    vy = sum((a - my) ** 2 for a in y)
    vp = sum((b - mp) ** 2 for b in pred)
    mcc = cov / (vy * vp) ** 0.5 if vy > 0 and vp > 0 else 0.0
    return {"accuracy": correct / n, "precision": prec, "recall": rec, "f1": f1, "mcc": mcc}
