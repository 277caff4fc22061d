"""Dense two-phase primal simplex with Bland's pivoting rule.

Solves ``min c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and
``x >= 0``. The same code runs over floats (with a tolerance) or over
``Fraction`` values for exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


class InfeasibleError(ArithmeticError):
    pass


class UnboundedError(ArithmeticError):
    pass


class SolverError(ArithmeticError):
    pass


@dataclass
class LpResult:
    x: list
    fun: object
    iterations: int


def _rows(A, n) -> list[list]:
    if A is None:
        return []
    return [list(r) for r in A]


def linprog(c: Sequence, A_ub=None, b_ub=None, A_eq=None, b_eq=None, *,
            exact: bool = False, tol: float = 1e-9, max_iter: int = 50_000) -> LpResult:
    n = len(c)
    ub, eq = _rows(A_ub, n), _rows(A_eq, n)
    b_ub = list(b_ub) if b_ub is not None else []
    b_eq = list(b_eq) if b_eq is not None else []
    m_ub, m_eq = len(ub), len(eq)
    m = m_ub + m_eq
    if exact:
        conv = Fraction
        eps = Fraction(0)
        zero = Fraction(0)
        dtype = object
    else:
        conv = float
        eps = tol
        zero = 0.0
        dtype = float

    # Column layout: originals | slacks (one per <= row) | artificials.
    rows = []
    rhs = []
    basis = []
    needs_art = []
    for i, (r, b) in enumerate(zip(ub, b_ub)):
        slack = [zero] * m_ub
        slack[i] = conv(1)
        row = [conv(v) for v in r] + slack
        b = conv(b)
        if b < 0:
            row = [-v for v in row]
            b = -b
            needs_art.append(len(rows))
        else:
            basis.append((len(rows), n + i))
        rows.append(row)
        rhs.append(b)
    for r, b in zip(eq, b_eq):
        row = [conv(v) for v in r] + [zero] * m_ub
        b = conv(b)
        if b < 0:
            row = [-v for v in row]
            b = -b
        needs_art.append(len(rows))
        rows.append(row)
        rhs.append(b)

    n_art = len(needs_art)
    n_cols = n + m_ub + n_art
    T = np.empty((m + 1, n_cols + 1), dtype=dtype)
    T[:, :] = zero
    for i, row in enumerate(rows):
        T[i, : n + m_ub] = row
        T[i, -1] = rhs[i]
    bas = [0] * m
    for i, col in basis:
        bas[i] = col
    for k, i in enumerate(needs_art):
        col = n + m_ub + k
        T[i, col] = conv(1)
        bas[i] = col

    iters = 0

    def pivot(r: int, col: int) -> None:
        T[r, :] = T[r, :] / T[r, col]
        for i in range(T.shape[0]):
            if i != r and T[i, col] != 0:
                T[i, :] = T[i, :] - T[i, col] * T[r, :]
        bas[r] = col

    def run(allowed: int) -> None:
        nonlocal iters
        while True:
            iters += 1
            if iters > max_iter:
                raise SolverError("simplex iteration limit reached")
            obj = T[-1, :allowed]
            enter = -1
            for j in range(allowed):          # Bland: lowest index improving column
                if obj[j] < -eps:
                    enter = j
                    break
            if enter < 0:
                return
            best = None
            leave = -1
            for i in range(m):
                a = T[i, enter]
                if a > eps:
                    ratio = T[i, -1] / a
                    if best is None or ratio < best - eps or (abs(ratio - best) <= eps and bas[i] < bas[leave]):
                        best = ratio
                        leave = i
            if leave < 0:
                raise UnboundedError("objective unbounded")
            pivot(leave, enter)

    # Phase 1: minimise the sum of artificials.
    if n_art:
        T[-1, :] = zero
        for k in range(n_art):
            T[-1, n + m_ub + k] = conv(1)
        for i in needs_art:
            T[-1, :] = T[-1, :] - T[i, :]
        run(n_cols)
        if -T[-1, -1] > (eps if not exact else 0) * max(1, m) * 10:
            raise InfeasibleError("linear program is infeasible")
        # Drive remaining artificials out of the basis.
        drop = []
        for i in range(m):
            if bas[i] >= n + m_ub:
                col = next((j for j in range(n + m_ub) if abs(T[i, j]) > eps), None)
                if col is None:
                    drop.append(i)
                else:
                    pivot(i, col)
        if drop:
            keep = [i for i in range(m) if i not in drop]
            T = np.vstack([T[keep, :], T[-1:, :]])
            bas = [bas[i] for i in keep]
            m = len(keep)

    # Phase 2 on the original objective, artificial columns frozen.
    T[-1, :] = zero
    for j, cj in enumerate(c):
        T[-1, j] = conv(cj)
    for i in range(m):
        col = bas[i]
        if T[-1, col] != 0:
            T[-1, :] = T[-1, :] - T[-1, col] * T[i, :]
    run(n + m_ub)

    x = [zero] * n
    for i in range(m):
        if bas[i] < n:
            x[bas[i]] = T[i, -1]
    fun = sum((conv(cj) * xj for cj, xj in zip(c, x)), zero)
    return LpResult(x, fun, iters)


def snap(value: float, max_denominator: int = 10**6) -> Fraction:
    return Fraction(value).limit_denominator(max_denominator)
