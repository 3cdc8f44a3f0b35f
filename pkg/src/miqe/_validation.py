"""Input validation helpers shared by the public functions and estimators."""

import numbers

import numpy as np

UNITARY_ATOL = 1e-12
DENSITY_ATOL = 1e-12
PSD_ATOL = 1e-10


def check_excitation_matrix(gamma, name="gamma"):
    """Return ``gamma`` as a 2-d complex array with no zero rows.

    Rows index the created photons, columns the modes.
    """
    gamma = np.array(gamma, dtype=complex)
    if gamma.ndim == 1:
        gamma = gamma[np.newaxis, :]
    if gamma.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {gamma.shape}")
    n_photons, n_modes = gamma.shape
    if n_photons < 1 or n_modes < 1:
        raise ValueError(f"{name} needs at least one photon and one mode, got shape {gamma.shape}")
    if not np.all(np.isfinite(gamma)):
        raise ValueError(f"{name} contains non-finite entries")
    zero_rows = np.flatnonzero(~np.any(gamma != 0, axis=1))
    if zero_rows.size:
        raise ValueError(f"{name} has zero rows at positions {zero_rows.tolist()}")
    return gamma


def check_unitary(u, n_modes=None, atol=UNITARY_ATOL, name="u"):
    """Return ``u`` as a square complex array after checking ``u^dagger u = id``."""
    u = np.array(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"{name} must be square, got shape {u.shape}")
    if n_modes is not None and u.shape[0] != n_modes:
        raise ValueError(f"{name} acts on {u.shape[0]} modes, expected {n_modes}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > atol:
        raise ValueError(f"{name} is not unitary (max |U^dag U - id| = {err:.3e})")
    return u


def check_occupation(counts, n_modes=None, n_photons=None):
    """Return ``counts`` as a tuple of nonnegative ints."""
    counts = tuple(int(c) for c in counts)
    if not counts:
        raise ValueError("occupation vector must cover at least one mode")
    if any(c < 0 for c in counts):
        raise ValueError(f"negative photon count in {counts}")
    if n_modes is not None and len(counts) != n_modes:
        raise ValueError(f"occupation {counts} has {len(counts)} modes, expected {n_modes}")
    if n_photons is not None and sum(counts) != n_photons:
        raise ValueError(f"occupation {counts} holds {sum(counts)} photons, expected {n_photons}")
    return counts


def check_probability(p, name="p"):
    if not isinstance(p, numbers.Real) or not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must be a real number in [0, 1], got {p!r}")
    return float(p)


def check_same_space(a, b):
    """Raise unless two states/operators live on the same fixed-N subspace."""
    if (a.mode_count, a.photon_number) != (b.mode_count, b.photon_number):
        raise ValueError(
            f"shape mismatch: (M={a.mode_count}, N={a.photon_number}) vs "
            f"(M={b.mode_count}, N={b.photon_number})"
        )
