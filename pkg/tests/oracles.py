"""Reference computations independent of the package code paths.

States are treated as polynomials in creation operators: a ket
``|n>`` is ``prod_l x_l^{n_l} / sqrt(n_l!)``. Mode changes substitute
``x_l -> sum_j U[l, j] y_j`` and re-read the coefficients.
"""

import itertools
import math

import sympy as sp


def _symbols(m):
    return sp.symbols(f"x0:{m}")


def state_polynomial_amplitudes(gamma):
    """Normalized amplitudes of prod_k (sum_l gamma[k][l] x_l) |vac>, keyed by occupation."""
    rows = [[sp.nsimplify(v) if isinstance(v, int) else sp.sympify(v) for v in row] for row in gamma]
    m = len(rows[0])
    xs = _symbols(m)
    poly = sp.Poly(sp.expand(sp.Mul(*[sum(c * x for c, x in zip(row, xs)) for row in rows])), *xs)
    amps = {}
    for monom, coeff in poly.terms():
        amps[tuple(monom)] = coeff * sp.sqrt(sp.Mul(*[sp.factorial(n) for n in monom]))
    norm = sp.sqrt(sum(sp.Abs(a) ** 2 for a in amps.values()))
    return {occ: sp.simplify(a / norm) for occ, a in amps.items()}


def transform_amplitudes(amplitudes, u):
    """Amplitudes after a_l^dag -> sum_j u[l][j] b_j^dag, using sympy expansion."""
    m = len(u)
    xs = _symbols(m)
    ys = sp.symbols(f"y0:{m}")
    subs = {xs[l]: sum(sp.sympify(u[l][j]) * ys[j] for j in range(m)) for l in range(m)}
    poly = 0
    for occ, amp in amplitudes.items():
        term = sp.sympify(amp) / sp.sqrt(sp.Mul(*[sp.factorial(n) for n in occ]))
        for l, n in enumerate(occ):
            term *= xs[l] ** n
        poly += term
    poly = sp.Poly(sp.expand(poly.subs(subs, simultaneous=True)), *ys)
    out = {}
    for monom, coeff in poly.terms():
        out[tuple(monom)] = complex(sp.N(coeff * sp.sqrt(sp.Mul(*[sp.factorial(n) for n in monom])), 30))
    return out


def brute_force_permanent(mat):
    n = len(mat)
    return sum(math.prod(mat[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
