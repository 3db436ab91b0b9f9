"""Retrieval-capacity upper bounds via an exact rational linear program.

The bound has a max-min shape: an adversarial choice of a branching
sequence ``(n_1, ..., n_{M-1})`` in ``{1..N}^{M-1}`` drives the download
lower bound, and the defender picks the download-share vector ``tau`` on
the N-simplex.  Each sequence contributes one linear constraint
``R <= c(n) . tau``, so the whole thing is a small linear program in
``(tau, R)`` and can be solved exactly over rationals.

Two solution routes are provided:

- :func:`upper_bound` — delayed constraint generation around an exact
  primal simplex (Bland's rule, ``Fraction`` arithmetic).  The restricted
  program only ever holds a handful of constraints; the candidate optimum
  is certified by evaluating every sequence, so the result is the exact
  optimum of the full program.
- :func:`upper_bound_by_enumeration` — literal vertex enumeration: every
  vertex of the feasible polytope is the intersection of the
  normalization hyperplane with N more active constraints.  Exponentially
  many basis sets, so it is budgeted; it exists as an independent
  cross-check of the simplex route.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import comb
from typing import Iterator, Sequence

from .schemes import (
    EavesdropProfile,
    RationalLike,
    as_fraction,
    best_scheme,
)

SequenceVector = tuple[int, ...]

_SEQUENCE_BUDGET = 500_000  # default cap on N^(M-1) enumerated sequences
_VERTEX_BUDGET = 2_000_000  # default cap on candidate basis sets


class EnumerationBudgetError(ValueError):
    """Raised when a bound computation would enumerate too many objects."""


@dataclass(frozen=True)
class BoundResult:
    """Exact LP optimum: the bound value, a maximizing download-share
    vector, and every sequence whose constraint is tight there."""

    value: Fraction
    argmax_tau: tuple[Fraction, ...]
    active_sequences: tuple[SequenceVector, ...]


# ---------------------------------------------------------------------------
# Constraint construction
# ---------------------------------------------------------------------------

def sequence_vectors(M: int, N: int) -> Iterator[SequenceVector]:
    """All N^(M-1) adversarial sequences, lexicographically."""
    return product(range(1, N + 1), repeat=M - 1)


def constraint_coefficients(n_vec: SequenceVector, mu: EavesdropProfile) -> tuple[Fraction, ...]:
    """Coefficients c with bound(n, tau) = c . tau.

    With prefix products P_0 = 1, P_i = n_1 * ... * n_i and thresholds
    l_0 = 0, l_i = n_i, the bound for sequence n is

        [ phi(l_0)/P_0 + ... + phi(l_{M-1})/P_{M-1} ] / sum_i 1/P_i

    where phi(l) = sum_{d > l} (1 - mu_d) tau_d.  Collecting the tau_d
    terms gives c_d = (1 - mu_d) * (sum of 1/P_i over i with l_i < d)
    divided by the full 1/P_i sum.
    """
    thresholds = [0] + list(n_vec)
    inv = Fraction(1)
    invs = [inv]
    for v in n_vec:
        inv /= v
        invs.append(inv)
    total = sum(invs)
    coeffs = []
    for d in range(1, mu.N + 1):
        share = sum(iv for l, iv in zip(thresholds, invs) if l < d)
        coeffs.append((1 - mu.mu[d - 1]) * share / total)
    return tuple(coeffs)


def _dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum(x * y for x, y in zip(a, b))


def inner_bound_at(tau: Sequence[RationalLike], mu: EavesdropProfile, M: int) -> Fraction:
    """Exact min over all N^(M-1) sequence constraints at a fixed tau."""
    tvec = tuple(as_fraction(v) for v in tau)
    if len(tvec) != mu.N:
        raise ValueError(f"tau has {len(tvec)} entries, profile has {mu.N}")
    if any(v < 0 for v in tvec) or sum(tvec) != 1:
        raise ValueError("tau outside the download-share simplex")
    best: Fraction | None = None
    for n_vec in sequence_vectors(M, mu.N):
        v = _dot(constraint_coefficients(n_vec, mu), tvec)
        if best is None or v < best:
            best = v
    assert best is not None
    return best


def _pool(M: int, N: int, mu: EavesdropProfile) -> tuple[list[SequenceVector], list[tuple[Fraction, ...]]]:
    """Deduplicated constraint pool, keeping the lex-first sequence of
    each distinct coefficient vector, in enumeration order."""
    seen: dict[tuple[Fraction, ...], int] = {}
    seqs: list[SequenceVector] = []
    vecs: list[tuple[Fraction, ...]] = []
    for n_vec in sequence_vectors(M, N):
        cv = constraint_coefficients(n_vec, mu)
        if cv not in seen:
            seen[cv] = len(vecs)
            seqs.append(n_vec)
            vecs.append(cv)
    return seqs, vecs


def _prune_dominated(vecs: list[tuple[Fraction, ...]]) -> list[int]:
    """Indices of constraints not pointwise-dominated by another.

    Constraint j is redundant when some j' has c_{j'} <= c_j in every
    coordinate (then R <= c_{j'} . tau already implies R <= c_j . tau on
    tau >= 0).  Quadratic scan; call sites keep the pool small.
    """
    keep = []
    for j, cj in enumerate(vecs):
        dominated = False
        for i, ci in enumerate(vecs):
            if i == j:
                continue
            if all(a <= b for a, b in zip(ci, cj)) and ci != cj:
                dominated = True
                break
        if not dominated:
            keep.append(j)
    return keep


# ---------------------------------------------------------------------------
# Exact restricted simplex
# ---------------------------------------------------------------------------

def _solve_restricted(cvecs: Sequence[tuple[Fraction, ...]]) -> tuple[Fraction, tuple[Fraction, ...]]:
    """Exact optimum of: max R s.t. R <= c_j . tau for all j, tau in simplex.

    Full-tableau primal simplex over Fractions with Bland's rule (which
    guarantees termination under degeneracy).  Variables are ordered
    (tau_1..tau_N, R, s_1..s_J); the starting vertex is tau = e_1 with
    R = min_j c_j[0], whose basis is always nonsingular and feasible.
    """
    J = len(cvecs)
    N = len(cvecs[0])
    ncols = N + 1 + J
    rhs = ncols
    zero = Fraction(0)
    T: list[list[Fraction]] = []
    for j, cv in enumerate(cvecs):
        row = [zero] * (ncols + 1)
        for d in range(N):
            row[d] = -cv[d]
        row[N] = Fraction(1)
        row[N + 1 + j] = Fraction(1)
        T.append(row)
    norm = [zero] * (ncols + 1)
    for d in range(N):
        norm[d] = Fraction(1)
    norm[rhs] = Fraction(1)
    T.append(norm)
    nrows = J + 1

    jstar = min(range(J), key=lambda j: cvecs[j][0])
    start = [0, N] + [N + 1 + j for j in range(J) if j != jstar]
    basis = [-1] * nrows
    used = [False] * nrows
    for var in start:
        pr = next(i for i in range(nrows) if not used[i] and T[i][var] != 0)
        piv = T[pr][var]
        if piv != 1:
            T[pr] = [v / piv for v in T[pr]]
        for i in range(nrows):
            if i != pr and T[i][var] != 0:
                f = T[i][var]
                T[i] = [a - f * b for a, b in zip(T[i], T[pr])]
        used[pr] = True
        basis[pr] = var

    # reduced-cost row for the objective "maximize R"
    z = [zero] * (ncols + 1)
    z[N] = Fraction(-1)
    for i, var in enumerate(basis):
        if z[var] != 0:
            f = z[var]
            z = [a - f * b for a, b in zip(z, T[i])]

    while True:
        enter = next((q for q in range(ncols) if z[q] < 0), None)
        if enter is None:
            break
        ratio: Fraction | None = None
        leave = -1
        for i in range(nrows):
            a = T[i][enter]
            if a > 0:
                r = T[i][rhs] / a
                if ratio is None or r < ratio or (r == ratio and basis[i] < basis[leave]):
                    ratio = r
                    leave = i
        if leave < 0:
            raise ArithmeticError("restricted program unbounded; constraints malformed")
        piv = T[leave][enter]
        if piv != 1:
            T[leave] = [v / piv for v in T[leave]]
        for i in range(nrows):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * b for a, b in zip(T[i], T[leave])]
        if z[enter] != 0:
            f = z[enter]
            z = [a - f * b for a, b in zip(z, T[leave])]
        basis[leave] = enter

    tau = [zero] * N
    value = zero
    for i, var in enumerate(basis):
        if var < N:
            tau[var] = T[i][rhs]
        elif var == N:
            value = T[i][rhs]
    return value, tuple(tau)


# ---------------------------------------------------------------------------
# Public bound computations
# ---------------------------------------------------------------------------

def _check_sequence_budget(M: int, N: int, budget: int | None) -> None:
    count = N ** (M - 1)
    limit = _SEQUENCE_BUDGET if budget is None else budget
    if count > limit:
        raise EnumerationBudgetError(
            f"enumeration too large: N^(M-1) = {count} sequences exceeds the "
            f"budget of {limit}; for M in {{2, 3}} use closed_form_capacity, "
            "or raise the budget explicitly"
        )


def upper_bound(M: int, N: int, mu: EavesdropProfile, budget: int | None = None) -> BoundResult:
    """Exact optimum of the capacity-bound LP by constraint generation.

    Starts from the N all-equal sequences, solves the restricted program
    exactly, and adds the most-violated constraint (lex-smallest on ties)
    until the restricted optimum survives evaluation against every
    sequence — at which point it is the exact optimum of the full LP.
    """
    if M < 1 or N < 1:
        raise ValueError("need M >= 1 and N >= 1")
    if mu.N != N:
        raise ValueError(f"profile covers {mu.N} databases, expected {N}")
    _check_sequence_budget(M, N, budget)
    seqs, vecs = _pool(M, N, mu)
    order = {cv: i for i, cv in enumerate(vecs)}

    work: list[int] = []
    for j in range(1, N + 1):
        idx = order[constraint_coefficients((j,) * (M - 1), mu)]
        if idx not in work:
            work.append(idx)

    while True:
        value, tau = _solve_restricted([vecs[i] for i in work])
        vmin: Fraction | None = None
        argmin = -1
        for i, cv in enumerate(vecs):
            v = _dot(cv, tau)
            if vmin is None or v < vmin:
                vmin = v
                argmin = i
        assert vmin is not None
        if vmin == value:
            break
        work.append(argmin)

    active = tuple(
        n_vec
        for n_vec in sequence_vectors(M, N)
        if _dot(constraint_coefficients(n_vec, mu), tau) == value
    )
    return BoundResult(value=value, argmax_tau=tau, active_sequences=active)


def upper_bound_by_enumeration(
    M: int, N: int, mu: EavesdropProfile, budget: int | None = None
) -> BoundResult:
    """The same LP solved by exhaustive vertex enumeration.

    Every vertex is the normalization hyperplane intersected with N more
    active constraints drawn from the sequence constraints (deduplicated,
    pointwise-dominated ones dropped) and the sign constraints tau_d >= 0.
    Kept as an independent route for cross-checking; combinatorial, so a
    budget guards the basis-set count.
    """
    if M < 1 or N < 1:
        raise ValueError("need M >= 1 and N >= 1")
    if mu.N != N:
        raise ValueError(f"profile covers {mu.N} databases, expected {N}")
    _check_sequence_budget(M, N, budget)
    seqs, vecs = _pool(M, N, mu)
    keep = _prune_dominated(vecs) if len(vecs) <= 5000 else list(range(len(vecs)))
    pool = [vecs[i] for i in keep]

    n_candidates = len(pool) + N
    basis_sets = comb(n_candidates, N)
    limit = _VERTEX_BUDGET if budget is None else budget
    if basis_sets > limit:
        raise EnumerationBudgetError(
            f"enumeration too large: C({n_candidates}, {N}) = {basis_sets} "
            f"candidate basis sets exceeds the budget of {limit}; use "
            "upper_bound (constraint generation) instead, or "
            "closed_form_capacity for M in {2, 3}"
        )

    best: Fraction | None = None
    best_tau: tuple[Fraction, ...] | None = None
    # candidate active sets: indices < len(pool) are sequence constraints
    # (R - c_j . tau = 0), the rest are sign constraints tau_d = 0
    for combo in combinations(range(n_candidates), N):
        rows: list[list[Fraction]] = []
        rhs: list[Fraction] = []
        for c in combo:
            if c < len(pool):
                rows.append([-v for v in pool[c]] + [Fraction(1)])
            else:
                d = c - len(pool)
                row = [Fraction(0)] * (N + 1)
                row[d] = Fraction(1)
                rows.append(row)
            rhs.append(Fraction(0))
        rows.append([Fraction(1)] * N + [Fraction(0)])
        rhs.append(Fraction(1))
        sol = _frac_solve(rows, rhs)
        if sol is None:
            continue
        tau, value = tuple(sol[:N]), sol[N]
        if any(v < 0 for v in tau):
            continue
        if any(_dot(cv, tau) < value for cv in pool):
            continue
        if best is None or value > best:
            best = value
            best_tau = tau
    if best is None or best_tau is None:
        raise ArithmeticError("no feasible vertex found; constraints malformed")
    active = tuple(
        n_vec
        for n_vec in sequence_vectors(M, N)
        if _dot(constraint_coefficients(n_vec, mu), best_tau) == best
    )
    return BoundResult(value=best, argmax_tau=best_tau, active_sequences=active)


def _frac_solve(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Solve a square rational system; None if singular."""
    n = len(rows)
    aug = [row[:] + [b] for row, b in zip(rows, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        piv = aug[col][col]
        aug[col] = [v / piv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


# ---------------------------------------------------------------------------
# Closed forms and the gap
# ---------------------------------------------------------------------------

def closed_form_capacity(M: int, N: int, mu: EavesdropProfile) -> Fraction:
    """Exact capacity for M = 2 or 3 messages over N databases.

    Maximizes the two/three-group closed forms over monotone tuples:

        M = 2: n0*n1 / [ (n0+1) * X(1..n0) + n0 * X(n0+1..n1) ]
        M = 3: n0*n1*n2 / [ (n0*n1+n0+1) * X(1..n0)
                            + (n0*n1+n0) * X(n0+1..n1) + n0*n1 * X(n1+1..n2) ]

    where X(a..b) sums 1/(1 - mu_n) over databases a..b.  For these M the
    value matches both the LP bound and the best scheme exactly.
    """
    if M not in (2, 3):
        raise ValueError(f"closed form covers M in {{2, 3}}, got {M}")
    if mu.N != N:
        raise ValueError(f"profile covers {mu.N} databases, expected {N}")
    xs = [Fraction(0)]
    for n in range(1, N + 1):
        xs.append(xs[-1] + 1 / (1 - mu.mu[n - 1]))

    def xrange(a: int, b: int) -> Fraction:
        return xs[b] - xs[a - 1]

    best: Fraction | None = None
    if M == 2:
        for n0 in range(1, N + 1):
            for n1 in range(n0, N + 1):
                denom = (n0 + 1) * xrange(1, n0) + n0 * xrange(n0 + 1, n1)
                value = Fraction(n0 * n1) / denom
                if best is None or value > best:
                    best = value
    else:
        for n0 in range(1, N + 1):
            for n1 in range(n0, N + 1):
                for n2 in range(n1, N + 1):
                    denom = (
                        (n0 * n1 + n0 + 1) * xrange(1, n0)
                        + (n0 * n1 + n0) * xrange(n0 + 1, n1)
                        + (n0 * n1) * xrange(n1 + 1, n2)
                    )
                    value = Fraction(n0 * n1 * n2) / denom
                    if best is None or value > best:
                        best = value
    assert best is not None
    return best


def gap(M: int, N: int, mu: EavesdropProfile, budget: int | None = None) -> Fraction:
    """Exact bound-minus-scheme gap; zero exactly when bounds match."""
    ub = upper_bound(M, N, mu, budget=budget).value
    _, lb = best_scheme(M, N, mu)
    return ub - lb
