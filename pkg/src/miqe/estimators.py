"""scikit-learn style wrappers around the witness search and the QR classifier."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_excitation_matrix
from .fock import DensityMatrix, FockState, build_state, fidelity
from .qr import classify, qr_factor
from .witness import OptimizerConfig, effective_lambda, g_mi_closed, g_mi_numeric


def _as_state(X):
    if isinstance(X, FockState):
        return X
    return build_state(check_excitation_matrix(X))


def _as_densities(X):
    if isinstance(X, (DensityMatrix, FockState)):
        X = [X]
    return [DensityMatrix.from_state(x) if isinstance(x, FockState) else x for x in X]


class MIQEWitness(BaseEstimator):
    """Mode-independent fidelity witness for a target state.

    ``fit`` finds (a lower bound on) ``g_MI`` of the target, the largest
    overlap a state separable in some mode basis can reach. ``predict``
    then certifies mode-independent entanglement of candidate states whose
    fidelity with the target exceeds that bound.

    Parameters
    ----------
    partition : str or Bipartition, default="all"
    grid : int or None, default=None
        Per-angle grid for two-mode searches (64 when None).
    n_samples : int, default=4096
        Haar samples for the coarse stage with three or more modes.
    restarts : int, default=8
    tol : float, default=1e-9
    seed : int, default=0
    n_jobs : int, default=1
    closed_form : bool, default=True
        Use the exact two-photon bound when the target is two photons in
        two modes.

    Attributes
    ----------
    target_ : FockState
    g_mi_ : float
    report_ : WitnessReport
    unitary_ : ndarray
    """

    def __init__(self, partition="all", grid=None, n_samples=4096, restarts=8, tol=1e-9, seed=0, n_jobs=1,
                 closed_form=True):
        self.partition = partition
        self.grid = grid
        self.n_samples = n_samples
        self.restarts = restarts
        self.tol = tol
        self.seed = seed
        self.n_jobs = n_jobs
        self.closed_form = closed_form

    def _config(self):
        return OptimizerConfig(grid=self.grid, n_samples=self.n_samples, restarts=self.restarts, tol=self.tol,
                               seed=self.seed, n_jobs=self.n_jobs)

    def fit(self, X, y=None):
        self.target_ = _as_state(X)
        self.report_ = g_mi_numeric(self.target_, self.partition, self._config())
        self.unitary_ = self.report_.unitary
        self.g_mi_ = self.report_.g
        if self.closed_form and not isinstance(X, FockState):
            gamma = check_excitation_matrix(X)
            if gamma.shape == (2, 2):
                lam = effective_lambda(gamma)
                self.g_mi_ = 1.0 if lam in (0.0, np.inf) else g_mi_closed(lam)
        return self

    def decision_function(self, X):
        """Fidelity with the target minus ``g_mi_``; positive means certified."""
        check_is_fitted(self, "g_mi_")
        return np.array([fidelity(rho, self.target_) - self.g_mi_ for rho in _as_densities(X)])

    def predict(self, X):
        return self.decision_function(X) > 0


class StaircaseClassifier(BaseEstimator):
    """Algebraic separability verdict for the state generated by an excitation matrix.

    Attributes
    ----------
    verdict_ : SeparabilityVerdict
    factorization_ : StaircaseFactorization
    classification_ : str
    n_vacuum_modes_ : int
    """

    def fit(self, X, y=None):
        self.verdict_ = classify(X)
        self.factorization_ = self.verdict_.factorization
        self.classification_ = self.verdict_.classification
        self.n_vacuum_modes_ = len(self.verdict_.vacuum_modes)
        return self

    def transform(self, X):
        """The staircase factor ``delta`` of ``X``."""
        return qr_factor(X).delta

    def predict(self, X):
        """Classification labels for a sequence of excitation matrices."""
        return np.array([classify(g).classification for g in X])
