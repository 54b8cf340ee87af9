"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import FieldOutOfRange, ValidationError
from .model import Portfolio, Tranche, validate_portfolio


def check_portfolio(X, allow_partial_notional: bool = False) -> Portfolio:
    """Coerce ``X`` to a :class:`Portfolio`.

    ``X`` is either a Portfolio or an array-like of shape (n_loans, 3 + m)
    whose columns are ``f, p, r, w_1, ..., w_m``.
    """
    if isinstance(X, Portfolio):
        return X
    try:
        arr = check_array(X, dtype=np.float64, ensure_min_samples=1)
    except ValueError as exc:
        raise ValidationError(f"invalid loan matrix: {exc}") from None
    if arr.shape[1] < 4:
        raise ValidationError(
            f"loan matrix needs columns f, p, r, w1[, w2, ...]; got {arr.shape[1]} columns"
        )
    records = [
        {"id": f"loan_{i + 1}", "f": row[0], "p": row[1], "r": row[2], "w": row[3:]}
        for i, row in enumerate(arr)
    ]
    return validate_portfolio(records, arr.shape[1] - 3, allow_partial_notional)


def check_tranches(X) -> list[Tranche]:
    """Coerce ``X`` to a list of tranches.

    Accepts a Tranche, a sequence of Tranches, or an array-like of
    (attachment, detachment) rows.
    """
    if isinstance(X, Tranche):
        return [X]
    if isinstance(X, (list, tuple)) and X and all(isinstance(t, Tranche) for t in X):
        return list(X)
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise FieldOutOfRange(f"expected (n_tranches, 2) attachment/detachment pairs, got {arr.shape}")
    return [Tranche(a, b) for a, b in arr]
