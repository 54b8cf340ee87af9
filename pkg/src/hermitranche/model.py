"""Loans, portfolios and tranches of the Gaussian m-factor default model."""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .exceptions import (
    EmptyPortfolio,
    FieldOutOfRange,
    FractionSumMismatch,
    LoadingNormTooLarge,
    UnknownPreset,
    ValidationError,
)

FRACTION_SUM_TOL = 1e-9

PRESET_SIZES = {
    "paper125": 125,
    "paper25": 25,
    "paper30": 30,
    "paper50": 50,
    "paper100": 100,
}


@dataclass(frozen=True)
class Loan:
    """A single obligor.

    ``f`` is the notional as a fraction of the whole portfolio, ``p`` the
    unconditional default probability, ``r`` the recovery rate and ``w`` the
    loadings on the systematic factors.
    """

    id: str
    f: float
    p: float
    r: float
    w: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(float(x) for x in self.w))
        if not (0.0 < self.f <= 1.0):
            raise FieldOutOfRange(f"loan {self.id!r}: f={self.f} outside (0, 1]")
        if not (0.0 < self.p < 1.0):
            raise FieldOutOfRange(f"loan {self.id!r}: p={self.p} outside (0, 1)")
        if not (0.0 <= self.r < 1.0):
            raise FieldOutOfRange(f"loan {self.id!r}: r={self.r} outside [0, 1)")
        if not self.w:
            raise FieldOutOfRange(f"loan {self.id!r}: empty loading vector")
        for k, wk in enumerate(self.w, start=1):
            if not (-1.0 < wk < 1.0):
                raise FieldOutOfRange(f"loan {self.id!r}: w{k}={wk} outside (-1, 1)")
        norm2 = math.fsum(wk * wk for wk in self.w)
        if norm2 >= 1.0:
            raise LoadingNormTooLarge(
                f"loan {self.id!r}: sum of squared loadings {norm2:.6g} >= 1"
            )

    @property
    def m(self) -> int:
        return len(self.w)


def effective_exposure(loan: Loan) -> float:
    """Portfolio fraction lost if ``loan`` defaults, ``f * (1 - r)``."""
    return loan.f * (1.0 - loan.r)


@dataclass(frozen=True)
class Portfolio:
    """An immutable, validated collection of loans with a common factor count."""

    loans: tuple[Loan, ...]
    m: int
    allow_partial_notional: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "loans", tuple(self.loans))
        if not self.loans:
            raise EmptyPortfolio("portfolio has no loans")
        if int(self.m) != self.m or self.m < 1:
            raise FieldOutOfRange(f"factor dimension m={self.m} must be a positive integer")
        for loan in self.loans:
            if loan.m != self.m:
                raise FieldOutOfRange(
                    f"loan {loan.id!r}: {loan.m} loadings, portfolio has m={self.m}"
                )
        total = math.fsum(loan.f for loan in self.loans)
        if self.allow_partial_notional:
            if total > 1.0 + FRACTION_SUM_TOL:
                raise FractionSumMismatch(f"notional fractions sum to {total!r} > 1")
        elif abs(total - 1.0) > FRACTION_SUM_TOL:
            raise FractionSumMismatch(f"notional fractions sum to {total!r}, expected 1")

    def __len__(self):
        return len(self.loans)

    @property
    def n(self) -> int:
        return len(self.loans)

    @cached_property
    def exposures(self) -> np.ndarray:
        return np.array([effective_exposure(loan) for loan in self.loans])

    @cached_property
    def probabilities(self) -> np.ndarray:
        return np.array([loan.p for loan in self.loans])

    @cached_property
    def loadings(self) -> np.ndarray:
        return np.array([loan.w for loan in self.loans], dtype=float).reshape(self.n, self.m)

    @cached_property
    def thresholds(self) -> np.ndarray:
        """Default thresholds ``Phi^-1(p_i)``."""
        return ndtri(self.probabilities)

    @cached_property
    def idiosyncratic_scale(self) -> np.ndarray:
        """``sqrt(1 - sum_k w_ik^2)`` per loan."""
        return np.sqrt(1.0 - np.sum(self.loadings**2, axis=1))


@dataclass(frozen=True)
class Tranche:
    """Slice of portfolio loss between attachment ``a`` and detachment ``b``."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)) or not (0.0 <= a < b <= 1.0):
            raise FieldOutOfRange(f"tranche ({self.a}, {self.b}) violates 0 <= a < b <= 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def width(self) -> float:
        return self.b - self.a


def _loan_from_record(rec, index: int) -> Loan:
    if isinstance(rec, Loan):
        return rec
    if not isinstance(rec, Mapping):
        raise ValidationError(f"loan record {index} is not a mapping: {rec!r}")
    try:
        w = rec["w"]
        if np.isscalar(w):
            w = (w,)
        return Loan(
            id=str(rec.get("id", f"loan_{index + 1}")),
            f=float(rec["f"]),
            p=float(rec["p"]),
            r=float(rec["r"]),
            w=tuple(float(x) for x in w),
        )
    except KeyError as exc:
        raise ValidationError(f"loan record {index} missing field {exc}") from None


def validate_portfolio(raw: Iterable, m: int, allow_partial_notional: bool = False) -> Portfolio:
    """Build a :class:`Portfolio` from loan records.

    Records may be :class:`Loan` instances or mappings with keys
    ``id`` (optional), ``f``, ``p``, ``r`` and ``w``.
    """
    records = list(raw)
    if not records:
        raise EmptyPortfolio("portfolio has no loans")
    loans = tuple(_loan_from_record(rec, i) for i, rec in enumerate(records))
    return Portfolio(loans, m, allow_partial_notional=allow_partial_notional)


def _linear_preset(n: int) -> Portfolio:
    loans = []
    for i in range(1, n + 1):
        s = (i - 1) / (n - 1)
        loans.append(
            Loan(
                id=f"loan_{i}",
                f=1.0 / n,
                p=0.015 + 0.05 * s,
                r=0.5 - 0.1 * s,
                w=(0.5 - 0.1 * s,),
            )
        )
    return Portfolio(tuple(loans), 1)


def preset_portfolio(name: str) -> Portfolio:
    """One of the single-factor test portfolios ``paper125``, ``paper25``, ...

    Loan ``i`` of ``n`` has ``f = 1/n``, ``p = 0.015 + 0.05 s``,
    ``r = 0.5 - 0.1 s`` and ``w = 0.5 - 0.1 s`` with ``s = (i-1)/(n-1)``.
    """
    try:
        n = PRESET_SIZES[name]
    except KeyError:
        raise UnknownPreset(
            f"unknown preset {name!r}; choose from {', '.join(PRESET_SIZES)}"
        ) from None
    return _linear_preset(n)


def truncate_portfolio(portfolio: Portfolio, n: int) -> Portfolio:
    """First ``n`` loans with notionals rescaled to sum to one."""
    if not (1 <= n <= portfolio.n):
        raise FieldOutOfRange(f"cannot keep {n} of {portfolio.n} loans")
    head = portfolio.loans[:n]
    total = math.fsum(loan.f for loan in head)
    loans = tuple(Loan(l.id, l.f / total, l.p, l.r, l.w) for l in head)
    return Portfolio(loans, portfolio.m, allow_partial_notional=portfolio.allow_partial_notional)


# -- CSV: id,f,p,r,w1[,w2,...,wm] -------------------------------------------


def parse_portfolio_csv(text: str, allow_partial_notional: bool = False) -> Portfolio:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [row for row in rows if any(cell.strip() for cell in row)]
    if not rows:
        raise EmptyPortfolio("portfolio file is empty")
    header = [h.strip() for h in rows[0]]
    m = len(header) - 4
    expected = ["id", "f", "p", "r"] + [f"w{k}" for k in range(1, m + 1)]
    if m < 1 or header != expected:
        raise ValidationError(
            f"bad portfolio header {','.join(header)!r}; expected id,f,p,r,w1[,w2,...]"
        )
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValidationError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            values = [float(cell) for cell in row[1:]]
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
        records.append({"id": row[0].strip(), "f": values[0], "p": values[1],
                        "r": values[2], "w": values[3:]})
    if not records:
        raise EmptyPortfolio("portfolio file has a header but no loans")
    return validate_portfolio(records, m, allow_partial_notional=allow_partial_notional)


def read_portfolio_csv(path: str | Path, allow_partial_notional: bool = False) -> Portfolio:
    text = Path(path).read_text(encoding="utf-8")
    return parse_portfolio_csv(text, allow_partial_notional=allow_partial_notional)


def format_portfolio_csv(portfolio: Portfolio) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "f", "p", "r"] + [f"w{k}" for k in range(1, portfolio.m + 1)])
    for loan in portfolio.loans:
        # repr round-trips floats exactly
        writer.writerow([loan.id, repr(loan.f), repr(loan.p), repr(loan.r)]
                        + [repr(x) for x in loan.w])
    return buf.getvalue()


def write_portfolio_csv(portfolio: Portfolio, path: str | Path) -> None:
    Path(path).write_text(format_portfolio_csv(portfolio), encoding="utf-8")


def as_tranches(pairs: Sequence) -> list[Tranche]:
    return [t if isinstance(t, Tranche) else Tranche(*t) for t in pairs]
