"""Algebraic separability of ``|Psi_{M,N}>`` through the factorization ``gamma = delta @ U``.

Rows of ``gamma`` are sorted so that each either extends the span of the
rows before it or lies in it, ordered by the earliest prefix of
independent rows that spans it. A QR factorization of the independent
rows then gives a staircase ``delta``: zero columns are vacuum modes,
column blocks with disjoint row supports are separable groups of modes.
``U`` maps back to the original basis, so ``transform_state(state, U^dag)``
is the state built from ``delta``.
"""

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import check_excitation_matrix
from .witness import Bipartition

RANK_RTOL = 1e-10
# residuals this far around the rank threshold (either side) are ambiguous
AMBIGUITY_FACTOR = 1e3
GRAM_TOL = 1e-10


def _rank_scale(gamma):
    return RANK_RTOL * np.max(np.linalg.norm(gamma, axis=1))


def _ambiguous(residual, threshold):
    return threshold / AMBIGUITY_FACTOR < residual < threshold * AMBIGUITY_FACTOR


def _greedy_basis(gamma, threshold):
    """Orthonormal basis from rows taken in order, plus bookkeeping for sorting."""
    basis = []
    generators = []
    levels = []
    ambiguous = False
    for k, row in enumerate(gamma):
        level = None
        resid = row.copy()
        # smallest prefix of the basis whose span contains the row
        r0 = np.linalg.norm(resid)
        for j, e in enumerate(basis):
            if r0 <= threshold:
                level = j
                break
            resid = resid - np.vdot(e, resid) * e
            r0 = np.linalg.norm(resid)
            ambiguous = ambiguous or _ambiguous(r0, threshold)
        if level is None and r0 <= threshold:
            level = len(basis)
        ambiguous = ambiguous or _ambiguous(r0, threshold)
        if level is None:
            basis.append(resid / r0)
            generators.append(k)
            levels.append(len(basis))
        else:
            levels.append(level)
    return basis, generators, levels, ambiguous


def sort_rows(gamma):
    """Stable reorder placing each dependent row right after the prefix it depends on.

    Returns
    -------
    sorted_gamma : ndarray
    permutation : tuple of int
        ``sorted_gamma = gamma[list(permutation)]``.
    """
    gamma = check_excitation_matrix(gamma)
    _, generators, levels, _ = _greedy_basis(gamma, _rank_scale(gamma))
    gen = set(generators)
    key = [(levels[k], k not in gen, k) for k in range(len(gamma))]
    perm = tuple(sorted(range(len(gamma)), key=lambda k: key[k]))
    return gamma[list(perm)], perm


@dataclass
class StaircaseFactorization:
    """``gamma[permutation] = delta @ unitary`` with ``delta`` in generalized lower-triangular form."""

    delta: np.ndarray
    unitary: np.ndarray
    permutation: tuple
    block_starts: tuple
    rank: int
    ambiguous: bool = False

    @property
    def zero_columns(self):
        return tuple(range(self.rank, self.delta.shape[1]))

    @property
    def pivots(self):
        """Column of the last nonzero entry in each row of ``delta``."""
        tol = RANK_RTOL * np.max(np.abs(self.delta))
        return tuple(int(np.flatnonzero(np.abs(row) > tol)[-1]) for row in self.delta)


def qr_factor(gamma):
    """Householder QR of the independent rows giving ``gamma = delta @ U``.

    Pivots (last nonzero entry of each independent row of ``delta``) are
    made real positive; entries right of each row's pivot are exactly zero.
    """
    gamma = check_excitation_matrix(gamma)
    n_photons, n_modes = gamma.shape
    threshold = _rank_scale(gamma)
    sorted_gamma, perm = sort_rows(gamma)
    _, generators, levels, ambiguous = _greedy_basis(sorted_gamma, threshold)
    rank = len(generators)
    q, r = np.linalg.qr(sorted_gamma[generators].conj().T, mode="complete")
    diag = np.diag(r)[:rank]
    phases = diag / np.abs(diag)
    q[:, :rank] = q[:, :rank] * phases[np.newaxis, :]
    delta = sorted_gamma @ q
    for k, level in enumerate(levels):
        delta[k, level:] = 0.0
    return StaircaseFactorization(
        delta=delta,
        unitary=q.conj().T,
        permutation=perm,
        block_starts=tuple(generators),
        rank=rank,
        ambiguous=ambiguous,
    )


def pairwise_gram(gamma, tol=GRAM_TOL):
    """Gram matrix of the excited modes and a flag for every pair of rows.

    Returns
    -------
    gram : ndarray, shape (N, N)
        ``gram[k, k'] = <gamma_k, gamma_k'>``.
    flags : dict
        ``(k, k') -> "parallel" | "orthogonal" | "generic"`` for ``k < k'``,
        judged on normalized overlaps.
    """
    gamma = check_excitation_matrix(gamma)
    gram = gamma.conj() @ gamma.T
    norms = np.sqrt(np.real(np.diag(gram)))
    flags = {}
    for k, kk in itertools.combinations(range(len(gamma)), 2):
        overlap = abs(gram[k, kk]) / (norms[k] * norms[kk])
        if overlap > 1 - tol:
            flags[(k, kk)] = "parallel"
        elif overlap < tol:
            flags[(k, kk)] = "orthogonal"
        else:
            flags[(k, kk)] = "generic"
    return gram, flags


def _column_split(delta, tol):
    """Smallest-index column bipartition with every row supported on one side, if any."""
    n_cols = delta.shape[1]
    supports = [frozenset(np.flatnonzero(np.abs(row) > tol).tolist()) for row in delta]
    rest = list(range(1, n_cols))
    for size in range(0, n_cols - 1):
        for extra in itertools.combinations(rest, size):
            side = frozenset((0,) + extra)
            if all(s <= side or not (s & side) for s in supports):
                return Bipartition(sorted(side), [c for c in range(n_cols) if c not in side])
    return None


@dataclass
class SeparabilityVerdict:
    """Outcome of :func:`classify` together with the algebra behind it.

    ``classification`` is one of ``partially-separable-vacuum``,
    ``block-separable``, ``mi-fully-inseparable`` or ``indeterminate``.
    For the separable outcomes ``partition`` refers to the modes of the
    basis reached by ``transform_state(state, separating_unitary)``.
    """

    classification: str
    factorization: StaircaseFactorization = field(repr=False)
    gram: np.ndarray = field(repr=False)
    flags: dict = field(repr=False)
    partition: Optional[Bipartition] = None
    vacuum_modes: tuple = ()
    separating_unitary: Optional[np.ndarray] = field(default=None, repr=False)
    reduced: Optional["SeparabilityVerdict"] = None
    reason: str = ""

    def to_dict(self):
        from .io import encode_matrix

        fac = self.factorization
        return {
            "type": "separability_verdict",
            "classification": self.classification,
            "reason": self.reason,
            "partition": None if self.partition is None else [list(p) for p in self.partition.parts],
            "vacuum_modes": list(self.vacuum_modes),
            "separating_unitary": None if self.separating_unitary is None else encode_matrix(self.separating_unitary),
            "evidence": {
                "delta": encode_matrix(fac.delta),
                "unitary": encode_matrix(fac.unitary),
                "permutation": list(fac.permutation),
                "block_starts": list(fac.block_starts),
                "rank": fac.rank,
                "gram": encode_matrix(self.gram),
                "flags": {f"{k},{kk}": v for (k, kk), v in sorted(self.flags.items())},
            },
            "reduced": None if self.reduced is None else self.reduced.to_dict(),
        }


def classify(gamma):
    """Decide separability of ``build_state(gamma)`` from the staircase factorization.

    The ladder: zero columns of ``delta`` give vacuum factors (and the
    photon-carrying block is classified on its own); a column split with no
    row straddling it gives a block-separable state; ``M`` independent,
    pairwise nonorthogonal generating rows admit no separating unitary at
    all; anything else is left to the numerical witness.
    """
    gamma = check_excitation_matrix(gamma)
    n_modes = gamma.shape[1]
    fac = qr_factor(gamma)
    gram, flags = pairwise_gram(gamma)
    common = dict(factorization=fac, gram=gram, flags=flags)
    if fac.ambiguous:
        return SeparabilityVerdict("indeterminate", reason="numerical rank is ambiguous", **common)
    if n_modes == 1:
        return SeparabilityVerdict("indeterminate", reason="a single mode has no bipartition", **common)

    separating = fac.unitary.conj().T
    if fac.rank < n_modes:
        photon_modes = tuple(range(fac.rank))
        reduced = classify(fac.delta[:, : fac.rank]) if fac.rank > 1 else None
        return SeparabilityVerdict(
            "partially-separable-vacuum",
            partition=Bipartition(photon_modes, fac.zero_columns),
            vacuum_modes=fac.zero_columns,
            separating_unitary=separating,
            reduced=reduced,
            reason=f"{n_modes - fac.rank} zero column(s) in delta",
            **common,
        )

    split = _column_split(fac.delta, RANK_RTOL * np.max(np.abs(fac.delta)))
    if split is not None:
        return SeparabilityVerdict(
            "block-separable",
            partition=split,
            separating_unitary=separating,
            reason="delta is block diagonal under a column split",
            **common,
        )

    _, gen_flags = pairwise_gram(fac.delta[list(fac.block_starts)])
    if all(v == "generic" for v in gen_flags.values()):
        return SeparabilityVerdict(
            "mi-fully-inseparable",
            reason="M independent pairwise nonorthogonal excitations admit no separating unitary",
            **common,
        )
    return SeparabilityVerdict(
        "indeterminate",
        reason="orthogonal pair among the generating rows without a block split",
        **common,
    )


def separating_candidates(gamma, max_modes=6):
    """Unitaries ``U^dag P`` over column permutations ``P`` of the staircase basis.

    Useful as seeds for :func:`miqe.witness.g_mi_numeric`: when ``delta``
    has vacuum columns, some permutation parks them on the requested side
    of any bipartition.
    """
    fac = qr_factor(gamma)
    m = fac.unitary.shape[0]
    base = fac.unitary.conj().T
    if m > max_modes:
        return [base]
    eye = np.eye(m)
    return [base @ eye[:, list(p)] for p in itertools.permutations(range(m))]


@dataclass
class GLCheck:
    verdict: str
    split: Optional[tuple] = None


def gl_invariance_check(gamma):
    """Whether no invertible (not only unitary) mode change separates the state.

    With ``rank == M``, a general linear change of basis separates the
    excitations iff the rows split into two nonempty groups whose spans
    are independent, ``rank(A) + rank(B) == M``. ``gl-inseparable`` is
    returned when no such split exists, which also requires ``N > M``.
    ``split`` reports a separating row grouping when one is found.
    """
    gamma = check_excitation_matrix(gamma)
    n_photons, n_modes = gamma.shape
    tol = _rank_scale(gamma)
    rank = np.linalg.matrix_rank(gamma, tol=tol)
    if rank < n_modes:
        return GLCheck("not-established", None)
    if n_photons <= n_modes:
        return GLCheck("not-established", (tuple(range(n_modes - 1)), (n_modes - 1,)))
    rest = list(range(1, n_photons))
    for size in range(0, n_photons - 1):
        for extra in itertools.combinations(rest, size):
            group_a = (0,) + extra
            group_b = tuple(k for k in range(n_photons) if k not in group_a)
            ra = np.linalg.matrix_rank(gamma[list(group_a)], tol=tol)
            rb = np.linalg.matrix_rank(gamma[list(group_b)], tol=tol)
            if ra + rb == n_modes:
                return GLCheck("not-established", (group_a, group_b))
    return GLCheck("gl-inseparable", None)
