"""Separable-state bounds for pure fixed-N states and their mode-independent optimum.

For a pure target ``|psi>`` the test operator ``L = |psi><psi|`` has
separable bound ``g`` equal to the largest squared Schmidt coefficient
across the chosen partition; ``g < 1`` iff ``|psi>`` is entangled there.
Maximizing ``g`` over all mode unitaries gives the mode-independent bound
``g_MI``; a state or mixture with fidelity above ``g_MI`` is entangled in
every mode basis.
"""

import functools
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from ._validation import check_excitation_matrix, check_same_space, check_unitary
from .fock import DensityMatrix, FockState, _tensor_map, build_state, fidelity, fock_basis
from .unitary import givens_grid, local_chart, random_unitary, rotation_unitary

SEPARABLE_ATOL = 1e-9
TIE_ATOL = 1e-12


# --------------------------------------------------------------------------- partitions


@dataclass(frozen=True)
class Multipartition:
    """Ordered split of the modes ``0..M-1`` into disjoint nonempty parts."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(tuple(sorted(int(m) for m in p)) for p in self.parts)
        if len(parts) < 2:
            raise ValueError("a partition needs at least two parts")
        if any(len(p) == 0 for p in parts):
            raise ValueError(f"empty part in {parts}")
        modes = [m for p in parts for m in p]
        if sorted(modes) != list(range(len(modes))):
            raise ValueError(f"parts {parts} do not partition modes 0..{len(modes) - 1}")
        object.__setattr__(self, "parts", parts)

    @property
    def mode_count(self):
        return sum(len(p) for p in self.parts)

    def __str__(self):
        return "|".join(",".join(str(m) for m in p) for p in self.parts)


class Bipartition(Multipartition):
    """Split of the modes into ``part_a`` and its complement ``part_b``."""

    def __init__(self, part_a, part_b):
        super().__init__((tuple(part_a), tuple(part_b)))

    def __post_init__(self):
        super().__post_init__()
        if len(self.parts) != 2:
            raise ValueError("a bipartition has exactly two parts")

    @classmethod
    def from_part(cls, part_a, mode_count):
        part_a = sorted(set(int(m) for m in part_a))
        return cls(part_a, [m for m in range(mode_count) if m not in part_a])

    @property
    def part_a(self):
        return self.parts[0]

    @property
    def part_b(self):
        return self.parts[1]

    def __repr__(self):
        return f"Bipartition({self.part_a}, {self.part_b})"


def parse_partition(text, mode_count=None):
    """Parse ``"0,1|2"`` into a :class:`Bipartition` or :class:`Multipartition`."""
    parts = [tuple(int(m) for m in chunk.split(",") if m.strip()) for chunk in text.split("|")]
    part = Bipartition(*parts) if len(parts) == 2 else Multipartition(tuple(parts))
    if mode_count is not None and part.mode_count != mode_count:
        raise ValueError(f"partition {text!r} covers {part.mode_count} modes, state has {mode_count}")
    return part


def all_bipartitions(mode_count):
    """Each unordered bipartition once, with mode 0 always in ``part_a``."""
    if mode_count < 2:
        raise ValueError("bipartitions need at least two modes")
    rest = list(range(1, mode_count))
    out = []
    for size in range(0, mode_count - 1):
        for extra in itertools.combinations(rest, size):
            out.append(Bipartition.from_part((0,) + extra, mode_count))
    return out


def _check_partition(partition, state):
    if partition.mode_count != state.mode_count:
        raise ValueError(f"partition {partition} covers {partition.mode_count} modes, state has {state.mode_count}")


@functools.lru_cache(maxsize=256)
def _layout(mode_count, photon_number, parts):
    """Per-part local basis indices for every global basis vector."""
    local_index = []
    for p in parts:
        local = [occ for n in range(photon_number + 1) for occ in fock_basis(len(p), n)] if len(p) else [()]
        local_index.append({occ: i for i, occ in enumerate(local)})
    idx = np.empty((len(parts), len(fock_basis(mode_count, photon_number))), dtype=np.intp)
    for g, occ in enumerate(fock_basis(mode_count, photon_number)):
        for k, p in enumerate(parts):
            idx[k, g] = local_index[k][tuple(occ[m] for m in p)]
    shape = tuple(len(li) for li in local_index)
    return shape, tuple(idx[k] for k in range(len(parts)))


def _partition_tensor(state, partition, vec=None):
    shape, idx = _layout(state.mode_count, state.photon_number, partition.parts)
    out = np.zeros(shape, dtype=complex)
    out[idx] = state.vector() if vec is None else vec
    return out


# --------------------------------------------------------------------------- reports


@dataclass
class WitnessReport:
    """Separable bound ``g`` with the partition and mode basis achieving it.

    ``lower_bound`` marks numeric optima over the unitary group, which can
    only under-estimate the true supremum.
    """

    g: float
    method: str
    partition: Optional[Multipartition] = None
    unitary: Optional[np.ndarray] = field(default=None, repr=False)
    argmax: tuple = ()
    lower_bound: bool = False
    converged: bool = True
    n_evaluations: int = 0

    def to_dict(self):
        from .io import encode_matrix

        return {
            "type": "witness_report",
            "g": self.g,
            "method": self.method,
            "partition": None if self.partition is None else [list(p) for p in self.partition.parts],
            "unitary": None if self.unitary is None else encode_matrix(self.unitary),
            "argmax": list(self.argmax),
            "lower_bound": self.lower_bound,
            "converged": self.converged,
            "n_evaluations": self.n_evaluations,
        }


@dataclass(frozen=True)
class OptimizerConfig:
    """Budget for searching the unitary group.

    ``grid`` is the per-angle resolution of the two-mode (theta, phi) grid;
    ``None`` picks 64. For three or more modes the coarse stage draws
    ``n_samples`` Haar unitaries instead. The best ``restarts`` coarse points
    are refined by Nelder-Mead until ``tol``.
    """

    grid: Optional[int] = None
    n_samples: int = 4096
    restarts: int = 8
    tol: float = 1e-9
    max_iter: int = 4000
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.grid is not None and self.grid < 8:
            raise ValueError(f"grid resolution must be >= 8, got {self.grid}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.restarts < 1 or self.n_samples < 1 or self.max_iter < 1 or self.n_jobs < 1:
            raise ValueError("restarts, n_samples, max_iter and n_jobs must be positive")


# --------------------------------------------------------------------------- fixed basis


def schmidt_spectrum(state, partition):
    """Squared Schmidt coefficients of ``state`` across a bipartition, descending."""
    if len(partition.parts) != 2:
        raise ValueError("Schmidt decomposition needs a bipartition")
    _check_partition(partition, state)
    mat = _partition_tensor(state, partition)
    sv = np.linalg.svd(mat, compute_uv=False)
    spectrum = sv**2
    return spectrum / spectrum.sum()


def g_separable_pure(state, partition):
    """Largest squared Schmidt coefficient; equals 1 iff ``state`` is a product across ``partition``."""
    spectrum = schmidt_spectrum(state, partition)
    g = float(spectrum[0])
    argmax = tuple(int(i) for i in np.flatnonzero(spectrum >= g - TIE_ATOL))
    return WitnessReport(g=g, method="svd", partition=partition, argmax=argmax)


def is_separable(state, partition, atol=SEPARABLE_ATOL):
    return g_separable_pure(state, partition).g >= 1.0 - atol


# --------------------------------------------------------------------------- two-photon closed forms


def schmidt_coeffs_closed(lam, t, r, atol=1e-12):
    """Schmidt coefficients ``(l20, l11, l02)`` of ``(sqrt2|2,0> + lam|1,1>)/sqrt(2+|lam|^2)``.

    They are the amplitudes in the mode basis given by ``a_1^dag = t* b_1^dag + r b_2^dag``
    and ``a_2^dag = -r* b_1^dag + t b_2^dag``, i.e.
    ``transform_state(state, two_mode_unitary(conj(t), r))``.
    """
    lam, t, r = complex(lam), complex(t), complex(r)
    if abs(abs(t) ** 2 + abs(r) ** 2 - 1.0) > atol:
        raise ValueError(f"|t|^2 + |r|^2 = {abs(t) ** 2 + abs(r) ** 2!r}, expected 1")
    norm = math.sqrt(2 + abs(lam) ** 2)
    tc, rc = t.conjugate(), r.conjugate()
    l20 = math.sqrt(2) * tc * (tc - lam * rc) / norm
    l02 = math.sqrt(2) * r * (r + lam * t) / norm
    l11 = (2 * tc * r + lam * (abs(t) ** 2 - abs(r) ** 2)) / norm
    return l20, l11, l02


def lambda_surfaces(lam, theta):
    """``(L20, L02, L11)``: squared Schmidt coefficients for real ``lam`` and ``t, r = cos, sin(theta)``.

    Vectorized over ``theta`` (radians).
    """
    theta = np.asarray(theta, dtype=float)
    c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
    denom = 2 + lam**2
    l20 = 0.5 * (1 + c2 - lam * s2) ** 2 / denom
    l02 = 0.5 * (1 - c2 + lam * s2) ** 2 / denom
    l11 = (s2 + lam * c2) ** 2 / denom
    return l20, l02, l11


def g_mi_branches(lam):
    """The two crossing branches whose maximum is ``g_MI`` for the two-photon family."""
    a = abs(lam) ** 2
    return 0.5 + math.sqrt(1 + a) / (2 + a), 1 - 1 / (2 + a)


def g_mi_closed(lam):
    """Mode-independent bound of ``(sqrt2|2,0> + lam|1,1>)/sqrt(2+|lam|^2)``.

    Depends on ``|lam|`` only. ``lam = 0`` is rejected: both photons then
    share a mode and the state is separable.
    """
    if abs(lam) == 0:
        raise ValueError("lambda = 0 gives parallel photons (separable, bound 1)")
    return max(g_mi_branches(lam))


def optimal_lambda():
    """``(|lambda|, g_MI)`` at the most robust two-photon state, in closed form."""
    return math.sqrt(2 * (1 + math.sqrt(2))), (2 + math.sqrt(2)) / 4


def minimize_g_mi_closed(upper=10.0, tol=1e-14):
    """Numerically minimize :func:`g_mi_closed` over ``|lambda|`` in ``(0, upper]``.

    Golden-section search: the bound is the maximum of a decreasing and an
    increasing branch, so it is unimodal with a kink at the optimum, where
    interpolating methods stall.
    """
    lo = 1e-6
    mid = min(2.0, 0.5 * upper)
    res = minimize_scalar(g_mi_closed, bracket=(lo, mid, upper), method="golden", tol=tol)
    if not lo <= res.x <= upper:
        raise RuntimeError(f"minimizer left the search interval: {res.x}")
    return float(res.x), float(res.fun)


def effective_lambda(gamma):
    """``|lambda|`` of the two-photon family equivalent to a 2x2 excitation matrix.

    Any two photons in two modes are unitarily equivalent to rows
    ``(1, 0), (1, lambda)``; ``|lambda|`` is the tangent of the angle between
    the excited modes (``inf`` for orthogonal, ``0`` for parallel photons).
    """
    gamma = check_excitation_matrix(gamma)
    if gamma.shape != (2, 2):
        raise ValueError("effective lambda is defined for two photons in two modes")
    c1 = gamma[0] / np.linalg.norm(gamma[0])
    c2 = gamma[1] / np.linalg.norm(gamma[1])
    alpha = np.vdot(c1, c2)
    beta = np.linalg.norm(c2 - alpha * c1)
    if abs(alpha) == 0:
        return math.inf
    return float(beta / abs(alpha))


def rotation_sweep(gamma, theta_deg):
    """Rows ``(theta_deg, L20, L02, L11, g_U)`` under the real rotation by ``theta``.

    ``gamma`` must describe two photons in two modes; the b-basis is
    ``b_1 = cos(theta) a_1 + sin(theta) a_2``.
    """
    gamma = check_excitation_matrix(gamma)
    if gamma.shape != (2, 2):
        raise ValueError("rotation sweeps are defined for two photons in two modes")
    theta_deg = np.asarray(theta_deg, dtype=float)
    state = build_state(gamma)
    us = np.stack([rotation_unitary(np.deg2rad(th)) for th in theta_deg])
    amps = _tensor_map(2, 2).transform_batch(state.vector(), us)
    probs = np.abs(amps) ** 2
    # basis order (0,2), (1,1), (2,0)
    l02, l11, l20 = probs[:, 0], probs[:, 1], probs[:, 2]
    g_u = np.maximum(np.maximum(l20, l02), l11)
    return np.column_stack([theta_deg, l20, l02, l11, g_u])


# --------------------------------------------------------------------------- unitary search


class _BoundObjective:
    """Batched ``max over partitions of g`` as a function of the mode unitary."""

    def __init__(self, state, partitions):
        self.state = state
        self.partitions = list(partitions)
        self.vec = state.vector()
        self.tmap = _tensor_map(state.mode_count, state.photon_number)
        self.layouts = [_layout(state.mode_count, state.photon_number, p.parts) for p in self.partitions]
        self.n_evaluations = 0

    def values(self, us, chunk=4096):
        """``(g, partition_index)`` arrays for a stack of unitaries."""
        us = np.asarray(us, dtype=complex).reshape(-1, self.state.mode_count, self.state.mode_count)
        best = np.empty(len(us))
        which = np.empty(len(us), dtype=np.intp)
        for start in range(0, len(us), chunk):
            block = us[start:start + chunk]
            amps = self.tmap.transform_batch(self.vec, block)
            norms = np.sum(np.abs(amps) ** 2, axis=1)
            gs = np.empty((len(self.partitions), len(block)))
            for k, (shape, idx) in enumerate(self.layouts):
                mats = np.zeros((len(block),) + shape, dtype=complex)
                mats[(slice(None),) + idx] = amps
                gs[k] = np.linalg.svd(mats, compute_uv=False)[:, 0] ** 2 / norms
            which[start:start + len(block)] = np.argmax(gs, axis=0)
            best[start:start + len(block)] = np.max(gs, axis=0)
        self.n_evaluations += len(us)
        return best, which

    def __call__(self, u):
        g, _ = self.values(u[np.newaxis])
        return g[0]


def _resolve_partitions(state, partition):
    if partition is None or partition == "all":
        return all_bipartitions(state.mode_count)
    if isinstance(partition, str):
        partition = parse_partition(partition, state.mode_count)
    if len(partition.parts) != 2:
        raise ValueError("unitary search is defined over bipartitions; use best_product_overlap for more parts")
    _check_partition(partition, state)
    return [partition]


def random_unitary_scan(state, partition="all", n_samples=10_000, seed=0):
    """Largest ``g`` over Haar-random mode bases (a plain lower bound on ``g_MI``)."""
    objective = _BoundObjective(state, _resolve_partitions(state, partition))
    us = random_unitary(state.mode_count, size=n_samples, seed=seed)
    g, which = objective.values(us)
    best = int(np.argmax(g))
    return WitnessReport(
        g=float(g[best]),
        method="random-scan",
        partition=objective.partitions[which[best]],
        unitary=us[best],
        lower_bound=True,
        n_evaluations=n_samples,
    )


def _refine(objective, u0, step, cfg):
    chart = local_chart(objective.state.mode_count)
    dim = objective.state.mode_count * (objective.state.mode_count - 1)
    simplex = np.vstack([np.zeros(dim), step * np.eye(dim)])
    res = minimize(
        lambda x: -objective(u0 @ chart(x)),
        np.zeros(dim),
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": cfg.tol, "fatol": cfg.tol * 1e-3, "maxiter": cfg.max_iter},
    )
    u = u0 @ chart(res.x)
    return -float(res.fun), u, bool(res.success), int(res.nfev)


def g_mi_numeric(state, partition="all", config=None, candidates=None):
    """Lower bound on ``sup_U g`` by a coarse search over ``U(M)`` and local refinement.

    Parameters
    ----------
    state : FockState
    partition : Bipartition, str or "all"
        ``"all"`` maximizes over every bipartition as well.
    config : OptimizerConfig, optional
    candidates : sequence of unitaries, optional
        Extra starting bases evaluated in the coarse stage.

    Returns
    -------
    WitnessReport
        Tagged ``lower_bound=True``; ``unitary`` maps the state to the best
        basis found via :func:`miqe.fock.transform_state`.
    """
    cfg = config or OptimizerConfig()
    m = state.mode_count
    objective = _BoundObjective(state, _resolve_partitions(state, partition))

    if m == 2:
        coarse = givens_grid(cfg.grid or 64)
        method = "grid+refine"
        step = 0.5 * (np.pi / 2) / ((cfg.grid or 64) - 1)
    else:
        coarse = random_unitary(m, size=cfg.n_samples, seed=cfg.seed)
        method = "sample+refine"
        step = 0.1
    coarse = np.concatenate([np.eye(m, dtype=complex)[np.newaxis], coarse])
    if candidates is not None:
        extra = np.stack([check_unitary(c, m) for c in candidates])
        coarse = np.concatenate([extra, coarse])
    g, _ = objective.values(coarse)
    order = np.argsort(-g, kind="stable")[: cfg.restarts]

    def run(i):
        return _refine(objective, coarse[i], step, cfg)

    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            results = list(pool.map(run, order))
    else:
        results = [run(i) for i in order]

    # coarse optimum always competes, so refinement can never lose ground
    best_g, best_u, converged = float(g[order[0]]), coarse[order[0]], True
    for value, u, ok, _ in results:
        converged = converged and ok
        if value > best_g:
            best_g, best_u = value, u
    gs, which = objective.values(best_u[np.newaxis])
    best_g = min(float(gs[0]), 1.0)
    return WitnessReport(
        g=best_g,
        method=method,
        partition=objective.partitions[which[0]],
        unitary=best_u,
        lower_bound=True,
        converged=converged,
        n_evaluations=objective.n_evaluations,
    )


# --------------------------------------------------------------------------- product-state overlap


def _contract_except(tensor, vectors, k):
    out = tensor
    for j in reversed(range(len(vectors))):
        if j != k:
            out = np.tensordot(out, vectors[j].conj(), axes=([j], [0]))
    return out


def _hosvd_start(tensor):
    vecs = []
    for k in range(tensor.ndim):
        unfolded = np.moveaxis(tensor, k, 0).reshape(tensor.shape[k], -1)
        u, _, _ = np.linalg.svd(unfolded, full_matrices=False)
        vecs.append(u[:, 0])
    return vecs


def _random_start(shape, rng):
    vecs = []
    for d in shape:
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        vecs.append(v / np.linalg.norm(v))
    return vecs


def best_product_overlap(state, partition, config=None):
    """Maximal ``|<psi| phi_1, ..., phi_K>|^2`` over product states of a fixed partition.

    Alternating maximization: each local factor is replaced by the
    normalized contraction of ``psi`` with the other factors, which is the
    dominant eigenvector of the partially contracted projector. The first
    restart starts from the leading singular vectors of each unfolding,
    the rest from random product states.
    """
    cfg = config or OptimizerConfig()
    if isinstance(partition, str):
        partition = parse_partition(partition, state.mode_count)
    _check_partition(partition, state)
    tensor = _partition_tensor(state, partition)
    tensor = tensor / np.linalg.norm(tensor)
    rng = np.random.default_rng(cfg.seed)

    best, converged_all, n_iter = -1.0, True, 0
    for restart in range(cfg.restarts):
        vecs = _hosvd_start(tensor) if restart == 0 else _random_start(tensor.shape, rng)
        value, converged = 0.0, False
        for _ in range(cfg.max_iter):
            n_iter += 1
            prev = value
            for k in range(len(vecs)):
                v = _contract_except(tensor, vecs, k)
                nrm = np.linalg.norm(v)
                if nrm == 0:
                    v = rng.normal(size=v.shape) + 0j
                    nrm = np.linalg.norm(v)
                vecs[k] = v / nrm
                value = nrm**2
            if abs(value - prev) <= cfg.tol * 1e-3:
                converged = True
                break
        converged_all = converged_all and converged
        best = max(best, float(value))
    return WitnessReport(
        g=min(best, 1.0),
        method="alternating",
        partition=partition,
        lower_bound=True,
        converged=converged_all,
        n_evaluations=n_iter,
    )


# --------------------------------------------------------------------------- certification


class Certification(NamedTuple):
    fidelity: float
    threshold: float
    verdict: str

    @property
    def certified(self):
        return self.verdict == "certified"


def certify_miqe(rho, psi, g_mi):
    """``certified`` iff ``<psi|rho|psi> > g_mi``, with no slack on the inequality."""
    if not 0.0 < g_mi < 1.0:
        raise ValueError(f"g_mi must lie in (0, 1), got {g_mi!r}")
    check_same_space(rho, psi)
    f = fidelity(rho, psi)
    return Certification(f, float(g_mi), "certified" if f > g_mi else "inconclusive")


def white_noise_threshold(psi, g_mi):
    """Largest white-noise weight ``p`` for which ``(1-p)|psi><psi| + p id/D`` still beats ``g_mi``."""
    dim = psi.dimension
    if g_mi <= 1.0 / dim:
        raise ValueError("g_mi below 1/D is beaten by every mixture")

    def margin(p):
        return fidelity(DensityMatrix.white_noise(psi, p), psi) - g_mi

    return float(brentq(margin, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps))


@dataclass
class SeparabilitySearch:
    found: bool
    g: float
    partition: Optional[Multipartition] = None
    unitary: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def verdict(self):
        return "separable-basis-found" if self.found else "no-basis-found"


def mi_separability_search(target, config=None, atol=SEPARABLE_ATOL):
    """Look for a mode basis in which ``target`` is a product across some bipartition.

    One-sided: a hit proves the state is separable in that basis, a miss
    proves nothing. Mixed input must have rank one.
    """
    if isinstance(target, DensityMatrix):
        evals, evecs = target.eigh()
        if len(evals) > 1 and evals[-2] > 1e-10:
            raise ValueError("mixed input must be rank one; use certify_miqe for general mixtures")
        target = FockState.from_vector(target.mode_count, target.photon_number, evecs[:, -1])
    report = g_mi_numeric(target, "all", config)
    return SeparabilitySearch(
        found=report.g >= 1.0 - atol,
        g=report.g,
        partition=report.partition,
        unitary=report.unitary,
    )
