"""Greedy decision-list learning from labelled points (Rivest's consistent-rule search)."""

from __future__ import annotations

import numpy as np

from .boolfn import DecisionList
from .errors import LearnFail


def greedy_decision_list(X: np.ndarray, y: np.ndarray) -> DecisionList:
    """A decision list consistent with every labelled row of ``X``.

    ``X`` is a boolean ``(m, n)`` matrix and ``y`` the boolean labels. Each step adds
    the rule ``(x_i, b, v)`` on an unused variable that captures the most remaining
    rows while agreeing with all of them (ties go to the smallest ``(i, b)``). The
    default is set once the remaining rows share a label. Raises :class:`LearnFail`
    when no consistent rule exists, which certifies that no decision list fits.
    """
    X = np.asarray(X, dtype=bool)
    y = np.asarray(y, dtype=bool)
    m, n = X.shape
    remaining = np.ones(m, dtype=bool)
    unused = np.ones(n, dtype=bool)
    rules = []
    while True:
        r = int(remaining.sum())
        pos = int(y[remaining].sum())
        if pos == 0 or pos == r:
            return DecisionList(n, rules, 1 if (r and pos == r) else 0)
        Xr = X[remaining]
        yr = y[remaining]
        c1 = Xr.sum(axis=0)
        c1y = Xr[yr].sum(axis=0)
        c0 = r - c1
        c0y = pos - c1y
        # candidate capture sizes indexed [b, i]; zero where inconsistent or used
        cap = np.zeros((2, n), dtype=np.int64)
        for b, cnt, cy in ((0, c0, c0y), (1, c1, c1y)):
            ok = unused & (cnt > 0) & ((cy == 0) | (cy == cnt))
            cap[b, ok] = cnt[ok]
        if not cap.any():
            raise LearnFail("no rule is consistent with the remaining points")
        # order candidates by (i, b)
        flat = cap.T.ravel()
        best = int(np.argmax(flat))
        i, b = divmod(best, 2)
        v = int((c1y if b else c0y)[i] > 0)
        rules.append((i, b, v))
        unused[i] = False
        remaining &= X[:, i] != bool(b)


def fits_decision_list(X: np.ndarray, y: np.ndarray) -> bool:
    try:
        greedy_decision_list(X, y)
    except LearnFail:
        return False
    return True
