"""Mode unitaries: two-mode forms, Givens parametrization, Haar sampling.

Every matrix here is used in the convention ``a_l^dag = sum_j U[l, j] b_j^dag``
of :func:`miqe.fock.transform_state`.
"""

import numpy as np
from scipy.linalg import expm
from scipy.stats import unitary_group

from ._validation import UNITARY_ATOL


def two_mode_unitary(t, r, atol=UNITARY_ATOL):
    """``[[t, r], [-r*, t*]]`` for transmission/reflection amplitudes with ``|t|^2 + |r|^2 = 1``."""
    t, r = complex(t), complex(r)
    if abs(abs(t) ** 2 + abs(r) ** 2 - 1.0) > atol:
        raise ValueError(f"|t|^2 + |r|^2 = {abs(t) ** 2 + abs(r) ** 2!r}, expected 1")
    return np.array([[t, r], [-r.conjugate(), t.conjugate()]])


def rotation_unitary(theta):
    """Real rotation realizing ``b_1 = cos(theta) a_1 + sin(theta) a_2``, ``b_2 = -sin(theta) a_1 + cos(theta) a_2``.

    ``theta`` is in radians.
    """
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def givens(mode_count, i, j, theta, phi):
    """Rotation by ``theta`` with relative phase ``phi`` acting on modes ``i`` and ``j``."""
    g = np.eye(mode_count, dtype=complex)
    c, s = np.cos(theta), np.sin(theta)
    g[i, i] = c
    g[j, j] = c
    g[i, j] = np.exp(1j * phi) * s
    g[j, i] = -np.exp(-1j * phi) * s
    return g


def n_givens_angles(mode_count):
    return mode_count * (mode_count - 1)


def givens_unitary(mode_count, angles, phases=None):
    """Product of two-mode rotations over all pairs ``i < j`` followed by output phases.

    ``angles`` holds ``(theta, phi)`` for each pair in lexicographic pair
    order, flattened to length ``M(M-1)``; ``phases`` has length ``M``. For
    ``theta`` in ``[0, pi/2]`` and ``phi``, ``phases`` in ``[0, 2 pi)`` this
    covers ``U(M)``. The trailing phases act on single output modes and
    never change a Schmidt spectrum.
    """
    angles = np.asarray(angles, dtype=float).reshape(-1, 2)
    pairs = [(i, j) for i in range(mode_count) for j in range(i + 1, mode_count)]
    if len(angles) != len(pairs):
        raise ValueError(f"expected {2 * len(pairs)} angles for M={mode_count}, got {2 * len(angles)}")
    u = np.eye(mode_count, dtype=complex)
    for (i, j), (theta, phi) in zip(pairs, angles):
        u = u @ givens(mode_count, i, j, theta, phi)
    if phases is not None:
        u = u * np.exp(1j * np.asarray(phases, dtype=float))[np.newaxis, :]
    return u


def givens_grid(resolution):
    """All two-mode unitaries on a ``resolution x resolution`` grid of (theta, phi)."""
    thetas = np.linspace(0.0, np.pi / 2, resolution)
    phis = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    c, s = np.cos(tt).ravel(), np.sin(tt).ravel()
    e = np.exp(1j * pp).ravel()
    us = np.empty((c.size, 2, 2), dtype=complex)
    us[:, 0, 0] = c
    us[:, 1, 1] = c
    us[:, 0, 1] = e * s
    us[:, 1, 0] = -e.conj() * s
    return us


def random_unitary(mode_count, size=None, seed=None):
    """Haar-random unitaries; ``size=None`` returns a single matrix."""
    rng = np.random.default_rng(seed)
    if mode_count == 1:
        ph = np.exp(2j * np.pi * rng.random(1 if size is None else size))
        return ph.reshape(1, 1) if size is None else ph.reshape(size, 1, 1)
    out = unitary_group.rvs(mode_count, size=1 if size is None else size, random_state=rng)
    if size is None:
        return out
    return out.reshape(size, mode_count, mode_count)


def local_chart(mode_count):
    """Map from ``R^{M(M-1)}`` to unitaries near the identity, ``x -> expm(i H(x))``.

    ``H`` is Hermitian with zero diagonal; diagonal generators are omitted
    because output-mode phases are irrelevant to every partition bound.
    """
    iu = np.triu_indices(mode_count, k=1)

    def chart(x):
        x = np.asarray(x, dtype=float)
        h = np.zeros((mode_count, mode_count), dtype=complex)
        h[iu] = x[0::2] + 1j * x[1::2]
        h = h + h.conj().T
        return expm(1j * h)

    return chart
