"""Fixed-photon-number multimode Fock states generated by excitation matrices.

A state with ``N`` photons in ``M`` modes is stored sparsely as a map from
occupation vectors ``(n_1, ..., n_M)`` with ``sum(n) == N`` to complex
amplitudes. Row ``k`` of an excitation matrix ``gamma`` holds the mode
coefficients of the ``k``-th created photon, ``c_k^dag = sum_l gamma[k, l] a_l^dag``.

Mode changes follow ``a_l^dag = sum_j U[l, j] b_j^dag``, so an excitation
matrix transforms as ``gamma -> gamma @ U``.
"""

import functools
import itertools
import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from ._validation import (
    DENSITY_ATOL,
    PSD_ATOL,
    check_excitation_matrix,
    check_occupation,
    check_probability,
    check_same_space,
    check_unitary,
)

PRUNE_ATOL = 1e-15
NORM_ATOL = 1e-12
# dense symmetric tensors of shape (M,)*N are used for mode transforms
MAX_TENSOR_SIZE = 2**22


@functools.lru_cache(maxsize=None)
def fock_basis(mode_count, photon_number):
    """Occupation vectors of the fixed-N subspace in ascending lexicographic order."""
    if mode_count < 1 or photon_number < 0:
        raise ValueError(f"invalid subspace (M={mode_count}, N={photon_number})")
    basis = []
    for modes in itertools.combinations_with_replacement(range(mode_count), photon_number):
        counts = [0] * mode_count
        for m in modes:
            counts[m] += 1
        basis.append(tuple(counts))
    return tuple(sorted(basis))


def subspace_dimension(mode_count, photon_number):
    return math.comb(photon_number + mode_count - 1, photon_number)


@functools.lru_cache(maxsize=None)
def _basis_index(mode_count, photon_number):
    return {occ: i for i, occ in enumerate(fock_basis(mode_count, photon_number))}


class _SymmetricTensorMap:
    """Bookkeeping between amplitude vectors and symmetric coefficient tensors.

    A state ``sum_n psi_n |n>`` equals ``P(a^dag)|vac>`` for the homogeneous
    polynomial ``P(x) = sum_{i_1..i_N} T[i_1, .., i_N] x_{i_1} ... x_{i_N}``
    with symmetric ``T``. Then ``psi_n = N! / sqrt(prod n_l!) * T[rep(n)]``.
    """

    def __init__(self, mode_count, photon_number):
        size = mode_count**photon_number
        if size > MAX_TENSOR_SIZE:
            raise ValueError(
                f"mode transform of M={mode_count}, N={photon_number} needs a "
                f"{size}-entry tensor (limit {MAX_TENSOR_SIZE})"
            )
        basis = fock_basis(mode_count, photon_number)
        index = _basis_index(mode_count, photon_number)
        shape = (mode_count,) * photon_number
        ids = np.empty(shape, dtype=np.intp)
        for idx in np.ndindex(*shape):
            counts = [0] * mode_count
            for m in idx:
                counts[m] += 1
            ids[idx] = index[tuple(counts)]
        reps = []
        for occ in basis:
            reps.append([m for m, c in enumerate(occ) for _ in range(c)])
        reps = np.array(reps, dtype=np.intp).reshape(len(basis), photon_number)
        self.mode_count = mode_count
        self.photon_number = photon_number
        self.ids = ids
        self.reps = tuple(reps[:, k] for k in range(photon_number))
        self.scale = np.array(
            [math.factorial(photon_number) / math.sqrt(math.prod(math.factorial(c) for c in occ))
             for occ in basis]
        )

    def to_tensor(self, vec):
        return (np.asarray(vec) / self.scale)[self.ids]

    def from_tensor(self, tensor):
        return tensor[self.reps] * self.scale

    def transform(self, vec, u):
        """Amplitudes after the substitution ``a_l^dag -> sum_j u[l, j] b_j^dag``."""
        t = self.to_tensor(vec)
        # contract the leading axis and append the new one; N passes restore the order
        for _ in range(self.photon_number):
            t = np.tensordot(t, u, axes=([0], [0]))
        return self.from_tensor(t)

    def transform_batch(self, vec, us):
        """Same as :meth:`transform` for a stack of unitaries ``us`` of shape (K, M, M)."""
        t = np.einsum("i...,bij->b...j", self.to_tensor(vec), us)
        for _ in range(self.photon_number - 1):
            t = np.einsum("bi...,bij->b...j", t, us)
        return t[(slice(None),) + self.reps] * self.scale


@functools.lru_cache(maxsize=64)
def _tensor_map(mode_count, photon_number):
    return _SymmetricTensorMap(mode_count, photon_number)


@dataclass(frozen=True, eq=False)
class FockState:
    """Pure state with ``photon_number`` photons spread over ``mode_count`` modes.

    ``amplitudes`` maps occupation tuples to complex amplitudes; entries below
    ``PRUNE_ATOL`` in modulus are dropped. The map is read-only.
    """

    mode_count: int
    photon_number: int
    amplitudes: MappingProxyType = field(repr=False)

    def __post_init__(self):
        if self.mode_count < 1:
            raise ValueError("a state needs at least one mode")
        if self.photon_number < 1:
            raise ValueError("the vacuum (N=0) is not represented as a FockState")
        clean = {}
        for occ, amp in dict(self.amplitudes).items():
            occ = check_occupation(occ, self.mode_count, self.photon_number)
            amp = complex(amp)
            if abs(amp) >= PRUNE_ATOL:
                clean[occ] = amp
        if not clean:
            raise ValueError("state has no nonzero amplitude")
        ordered = {occ: clean[occ] for occ in sorted(clean)}
        object.__setattr__(self, "amplitudes", MappingProxyType(ordered))

    @classmethod
    def from_vector(cls, mode_count, photon_number, vec):
        """Build a state from a dense vector over :func:`fock_basis`."""
        basis = fock_basis(mode_count, photon_number)
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (len(basis),):
            raise ValueError(f"vector of shape {vec.shape} does not match dimension {len(basis)}")
        return cls(mode_count, photon_number, dict(zip(basis, vec.tolist())))

    @property
    def dimension(self):
        return subspace_dimension(self.mode_count, self.photon_number)

    def vector(self):
        """Dense amplitude vector in the canonical basis order."""
        index = _basis_index(self.mode_count, self.photon_number)
        vec = np.zeros(len(index), dtype=complex)
        for occ, amp in self.amplitudes.items():
            vec[index[occ]] = amp
        return vec

    def amplitude(self, occupation):
        return self.amplitudes.get(check_occupation(occupation), 0j)

    def norm(self):
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self):
        nrm = self.norm()
        return FockState(
            self.mode_count,
            self.photon_number,
            {occ: a / nrm for occ, a in self.amplitudes.items()},
        )

    def allclose(self, other, atol=1e-10):
        check_same_space(self, other)
        return bool(np.max(np.abs(self.vector() - other.vector())) <= atol)

    def __repr__(self):
        terms = ", ".join(f"{occ}: {amp:.6g}" for occ, amp in self.amplitudes.items())
        return f"FockState(M={self.mode_count}, N={self.photon_number}, {{{terms}}})"


def _apply_creation(amplitudes, row):
    """Apply ``sum_l row[l] a_l^dag`` to a sparse amplitude map."""
    out = {}
    for occ, amp in amplitudes.items():
        for mode, coeff in enumerate(row):
            if coeff == 0:
                continue
            new = list(occ)
            new[mode] += 1
            new = tuple(new)
            out[new] = out.get(new, 0j) + amp * coeff * math.sqrt(new[mode])
    return out


def build_state(gamma):
    """Normalized state ``N c_1^dag ... c_N^dag |vac>`` for an excitation matrix.

    Each row of ``gamma`` is applied in turn as a creation-operator
    superposition on the vacuum.

    Examples
    --------
    >>> state = build_state([[1, 0], [1, 1]])
    >>> round(abs(state.amplitude((2, 0))) ** 2, 12)
    0.666666666667
    """
    gamma = check_excitation_matrix(gamma)
    n_photons, n_modes = gamma.shape
    amplitudes = {(0,) * n_modes: 1.0 + 0j}
    for row in gamma:
        amplitudes = _apply_creation(amplitudes, row)
    nrm = math.sqrt(sum(abs(a) ** 2 for a in amplitudes.values()))
    if nrm == 0.0:
        # only possible through underflow; zero rows are rejected above
        raise ValueError("excitation matrix produced a zero-norm state")
    return FockState(n_modes, n_photons, {occ: a / nrm for occ, a in amplitudes.items()})


def transform_gamma(gamma, u):
    """Re-express the excited modes in the transformed basis: ``gamma @ u``."""
    gamma = check_excitation_matrix(gamma)
    u = check_unitary(u, gamma.shape[1])
    return gamma @ u


def transform_state(state, u):
    """Rewrite ``state`` in the mode basis ``b`` defined by ``a_l^dag = sum_j u[l, j] b_j^dag``."""
    u = check_unitary(u, state.mode_count)
    tmap = _tensor_map(state.mode_count, state.photon_number)
    return FockState.from_vector(state.mode_count, state.photon_number, tmap.transform(state.vector(), u))


def inner_product(s1, s2):
    """``<s1|s2>``, conjugate-linear in ``s1``."""
    check_same_space(s1, s2)
    return complex(sum(a.conjugate() * s2.amplitudes.get(occ, 0j) for occ, a in s1.amplitudes.items()))


def _permanent(mat):
    n = mat.shape[0]
    if n == 0:
        return 1.0 + 0j
    total = 0j
    for perm in itertools.permutations(range(n)):
        prod = 1.0 + 0j
        for i, j in enumerate(perm):
            prod *= mat[i, j]
        total += prod
    return total


def amplitude_permanent_oracle(gamma, occupation):
    """Unnormalized amplitude ``<n| c_1^dag ... c_N^dag |vac>`` from a permanent.

    Column ``l`` of ``gamma`` is repeated ``n_l`` times to give a square
    matrix; the amplitude is its permanent divided by ``sqrt(prod n_l!)``.
    The permanent is a naive sum over permutations, so keep ``N <= 6``.
    """
    gamma = check_excitation_matrix(gamma)
    n_photons, n_modes = gamma.shape
    occupation = check_occupation(occupation, n_modes, n_photons)
    if n_photons > 8:
        raise ValueError("naive permanent is limited to N <= 8")
    cols = [l for l, c in enumerate(occupation) for _ in range(c)]
    sub = gamma[:, cols]
    return _permanent(sub) / math.sqrt(math.prod(math.factorial(c) for c in occupation))


class DensityMatrix:
    """Density operator on the fixed-N subspace, in the :func:`fock_basis` order."""

    def __init__(self, mode_count, photon_number, matrix):
        dim = subspace_dimension(mode_count, photon_number)
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (dim, dim):
            raise ValueError(f"matrix of shape {matrix.shape} does not match dimension {dim}")
        herm_err = np.max(np.abs(matrix - matrix.conj().T))
        if herm_err > DENSITY_ATOL:
            raise ValueError(f"density matrix is not Hermitian (error {herm_err:.3e})")
        tr = np.trace(matrix).real
        if abs(tr - 1.0) > DENSITY_ATOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        min_eig = np.linalg.eigvalsh(matrix).min()
        if min_eig < -PSD_ATOL:
            raise ValueError(f"density matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")
        matrix.setflags(write=False)
        self.mode_count = mode_count
        self.photon_number = photon_number
        self.matrix = matrix

    @property
    def basis(self):
        return fock_basis(self.mode_count, self.photon_number)

    @classmethod
    def from_state(cls, state):
        vec = state.vector()
        vec = vec / np.linalg.norm(vec)
        return cls(state.mode_count, state.photon_number, np.outer(vec, vec.conj()))

    @classmethod
    def maximally_mixed(cls, mode_count, photon_number):
        dim = subspace_dimension(mode_count, photon_number)
        return cls(mode_count, photon_number, np.eye(dim) / dim)

    @classmethod
    def white_noise(cls, state, p):
        """``(1 - p) |psi><psi| + p * id / D``."""
        p = check_probability(p)
        pure = cls.from_state(state).matrix
        dim = pure.shape[0]
        return cls(state.mode_count, state.photon_number, (1 - p) * pure + p * np.eye(dim) / dim)

    def eigh(self):
        return np.linalg.eigh(self.matrix)

    def __repr__(self):
        return f"DensityMatrix(M={self.mode_count}, N={self.photon_number}, D={self.matrix.shape[0]})"


def fidelity(rho, psi):
    """``<psi| rho |psi>`` for a normalized target state ``psi``."""
    check_same_space(rho, psi)
    vec = psi.vector()
    vec = vec / np.linalg.norm(vec)
    return float(np.real(vec.conj() @ rho.matrix @ vec))
