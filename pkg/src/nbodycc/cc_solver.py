"""Central configurations as fixed points of the normalized gradient map.

On the unit ellipsoid the map ``q -> -grad_M U(q) / |grad_M U(q)|_M`` is a
self-map whenever U > 0, and its fixed points are exactly the configurations
with ``grad_M U = lambda q``.  The solver below runs a damped Newton
iteration for that equation on the gauge slice orthogonal to the rotation
orbit, re-projecting to the ellipsoid after every step; a multistart census
collects the solutions up to rotation.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import CollisionError, ConvergenceError, DomainError
from .mass_geometry import (
    align_rotation,
    isotropy_rank,
    mass_norm,
    min_max_distance,
    normalize_to_ellipsoid,
    orbit_directions,
    pair_distances,
    project_center,
    validate_configuration,
)
from .potentials import PairPotential, check_permutation, apply_symmetry

__all__ = [
    "SolverConfig",
    "CriticalRecord",
    "normalized_gradient_map",
    "centrality_residual",
    "find_central_configuration",
    "census",
    "random_seed_configuration",
    "distance_signature",
    "same_class",
    "projection_inequality",
    "quotient_lift_check",
    "equivariance_defect",
]


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-11
    max_iter: int = 100
    damping: float = 1.0
    rng_seed: int = 0
    n_starts: int = 50

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError("tolerance must be positive")
        if self.n_starts < 1:
            raise ValueError("need at least one start")


@dataclass(frozen=True)
class CriticalRecord:
    """A converged central configuration on the unit ellipsoid.

    ``lam`` is the multiplier of ``grad_M U = lam q`` and equals
    ``-alpha U(q)``; ``distance_signature`` is the sorted multiset of mutual
    distances used for census deduplication.
    """

    q: np.ndarray
    lam: float
    residual: float
    u_value: float
    distance_signature: np.ndarray
    isotropy_rank: int
    iterations: int
    multiplicity: int = 1


def normalized_gradient_map(potential: PairPotential, q: np.ndarray) -> np.ndarray:
    """Normalized negative mass-metric gradient; a self-map of the ellipsoid.

    Requires ``U(q) > 0``, which forces the gradient to be non-zero because
    its mass-pairing with ``q`` equals ``-alpha U(q)``.
    """
    m = potential.masses
    if potential.value(q) <= 0.0:
        raise DomainError("normalized gradient map needs a positive potential value")
    g = potential.mass_gradient(q)
    return -g / mass_norm(g, m)


def centrality_residual(potential: PairPotential, q: np.ndarray) -> float:
    """Scale-free distance from centrality: |grad + alpha U q| / |grad|."""
    m = potential.masses
    g = potential.mass_gradient(q)
    u = potential.value(q)
    return mass_norm(g + potential.alpha * u * q, m) / mass_norm(g, m)


def distance_signature(q: np.ndarray) -> np.ndarray:
    r = pair_distances(q)
    iu = np.triu_indices(q.shape[0], 1)
    return np.sort(r[iu])


def same_class(q1: np.ndarray, q2: np.ndarray, m: np.ndarray, tol: float = 1e-7) -> bool:
    """Rotation equivalence of two labeled configurations.

    The sorted-distance signature is a cheap rotation-invariant prefilter;
    candidates are then aligned by a determinant +1 orthogonal fit, so mirror
    images remain distinct classes.
    """
    s1, s2 = distance_signature(q1), distance_signature(q2)
    if np.abs(s1 - s2).max() > tol * max(1.0, float(s1.max())):
        return False
    g = align_rotation(q1, q2, m)
    return mass_norm(q2 - q1 @ g.T, m) <= 1e3 * tol


def _y_basis(n: int, d: int, m: np.ndarray) -> np.ndarray:
    """Orthonormal basis (in sqrt-mass coordinates) of the centered subspace."""
    t = np.zeros((d, n * d))
    for a in range(d):
        v = np.zeros((n, d))
        v[:, a] = np.sqrt(m)
        t[a] = v.ravel()
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    proj = np.eye(n * d) - t.T @ t
    w, vecs = np.linalg.eigh(proj)
    return vecs[:, w > 0.5]


def _gauge_slice_basis(q: np.ndarray, m: np.ndarray, killed: list[np.ndarray]) -> np.ndarray:
    """Mass-orthonormal basis of the centered subspace with the given
    directions removed; columns live in q-space."""
    n, d = q.shape
    sm = np.sqrt(np.repeat(m, d))
    by = _y_basis(n, d, m)
    a = np.stack([sm * v.ravel() for v in killed], axis=1)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    keep = u[:, s > 1e-9 * s[0]]
    c = by - keep @ (keep.T @ by)
    qmat, r = np.linalg.qr(c)
    diag = np.abs(np.diag(r))
    bx = qmat[:, diag > 1e-9 * diag.max()]
    return bx / sm[:, None]


def _check_iterate(potential: PairPotential, q: np.ndarray) -> float:
    rmin, rmax = min_max_distance(q)
    if rmin <= 1e-9 * rmax:
        raise CollisionError("iterate approached a collision")
    u = potential.value(q)
    if u <= 0.0:
        raise DomainError("iterate reached a non-positive potential value")
    return u


def find_central_configuration(
    potential: PairPotential, seed: np.ndarray, cfg: SolverConfig = SolverConfig()
) -> CriticalRecord:
    """Solve ``grad_M U + alpha U q = 0`` on the unit ellipsoid.

    Damped Newton steps are taken on the slice mass-orthogonal to the
    rotation orbit (gauge fixing) and re-projected to the ellipsoid; when a
    step fails to reduce the residual, one application of the normalized
    gradient map is used as a fallback.  Raises ``ConvergenceError`` after
    ``cfg.max_iter`` iterations, ``CollisionError`` if an iterate approaches
    a collision, and ``DomainError`` if the potential value becomes
    non-positive along the way.
    """
    m = potential.masses
    alpha = potential.alpha
    seed = validate_configuration(seed)
    n, d = seed.shape
    mw = np.repeat(m, d)
    q = normalize_to_ellipsoid(project_center(seed, m), m)

    for it in range(cfg.max_iter):
        u = _check_iterate(potential, q)
        g = potential.mass_gradient(q)
        gn = mass_norm(g, m)
        res_vec = g + alpha * u * q
        res = mass_norm(res_vec, m) / gn
        if res <= cfg.tol:
            return CriticalRecord(
                q=q,
                lam=-alpha * u,
                residual=res,
                u_value=u,
                distance_signature=distance_signature(q),
                isotropy_rank=isotropy_rank(q, m),
                iterations=it,
            )

        # gauge slice: tangent to the ellipsoid, orthogonal to the rotation orbit
        basis = _gauge_slice_basis(q, m, [q, *orbit_directions(q, m)])
        hess = potential.hessian(q)
        grad_flat = potential.euclid_gradient(q).ravel()
        # Linearization of q -> grad_M U + alpha U q along the slice.
        jb = (
            (hess @ basis) / mw[:, None]
            + alpha * np.outer(q.ravel(), grad_flat @ basis)
            + alpha * u * basis
        )
        amat = basis.T @ (mw[:, None] * jb)
        rhs = -basis.T @ (mw * res_vec.ravel())
        try:
            coeff = np.linalg.solve(amat, rhs)
        except np.linalg.LinAlgError:
            coeff, *_ = np.linalg.lstsq(amat, rhs, rcond=None)
        step = (basis @ coeff).reshape(n, d)

        lam, moved = cfg.damping, False
        for _ in range(30):
            try:
                qn = normalize_to_ellipsoid(project_center(q + lam * step, m), m)
                un = _check_iterate(potential, qn)
            except (CollisionError, DomainError):
                lam *= 0.5
                continue
            gn_new = potential.mass_gradient(qn)
            res_new = mass_norm(gn_new + alpha * un * qn, m) / mass_norm(gn_new, m)
            if res_new < res or lam < 2e-4 * cfg.damping:
                q, moved = qn, True
                break
            lam *= 0.5
        if not moved:
            q = normalized_gradient_map(potential, q)

    raise ConvergenceError(f"no convergence to tol {cfg.tol:g} in {cfg.max_iter} iterations")


def random_seed_configuration(
    n: int, d: int, m: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Centered Gaussian point on the ellipsoid, resampled away from collisions."""
    while True:
        raw = rng.standard_normal((n, d))
        q = normalize_to_ellipsoid(project_center(raw, m), m)
        rmin, rmax = min_max_distance(q)
        if rmin > 0.05 * rmax:
            return q


def census(
    potential: PairPotential, d: int, cfg: SolverConfig = SolverConfig()
) -> list[CriticalRecord]:
    """Multistart search for central configurations, deduplicated up to rotation.

    Starts are drawn from a generator fixed by ``cfg.rng_seed``, solved
    sequentially, and merged into rotation classes (mirror images stay
    separate).  The output order is deterministic: sorted by potential value,
    then by distance signature, with discovery order breaking ties.  Failed
    starts (non-convergence, collision, non-positive potential) are skipped.
    """
    m = potential.masses
    rng = np.random.default_rng(cfg.rng_seed)
    records: list[CriticalRecord] = []
    for _ in range(cfg.n_starts):
        seed = random_seed_configuration(potential.n, d, m, rng)
        try:
            rec = find_central_configuration(potential, seed, cfg)
        except (ConvergenceError, CollisionError, DomainError):
            continue
        for idx, known in enumerate(records):
            if abs(rec.u_value - known.u_value) <= 1e-6 * max(1.0, abs(known.u_value)) and same_class(
                known.q, rec.q, m
            ):
                records[idx] = replace(known, multiplicity=known.multiplicity + 1)
                break
        else:
            records.append(rec)
    records.sort(key=lambda r: (r.u_value, tuple(r.distance_signature)))
    return records


def projection_inequality(
    potential: PairPotential, q: np.ndarray, plane: np.ndarray
) -> tuple[int, float, float]:
    """Sign check for the plane projection of the gradient at the outermost body.

    ``plane`` is an orthonormal (d, 2) frame.  With ``j`` the body whose
    projection onto the plane is longest, returns
    ``(j, p(dU/dq_j) . p(q_j), p(F(q)_j) . p(q_j))`` where ``F`` is the
    normalized gradient map.  For potentials with positive pair coefficients
    the middle value is always <= 0 and the last >= 0.
    """
    plane = np.asarray(plane, dtype=float)
    d = q.shape[1]
    if plane.shape != (d, 2) or np.abs(plane.T @ plane - np.eye(2)).max() > 1e-10:
        raise ValueError("plane must be an orthonormal (d, 2) frame")
    iu = np.triu_indices(potential.n, 1)
    if np.any(potential.kappa[iu] <= 0.0):
        raise DomainError("projection inequality requires positive pair coefficients")
    proj_q = q @ plane
    j = int(np.argmax((proj_q * proj_q).sum(axis=1)))
    grad = potential.euclid_gradient(q)
    value = float((grad[j] @ plane) @ proj_q[j])
    fmap = normalized_gradient_map(potential, q)
    map_value = float((fmap[j] @ plane) @ proj_q[j])
    return j, value, map_value


def quotient_lift_check(
    potential: PairPotential, q: np.ndarray, tol: float = 1e-9
) -> tuple[np.ndarray, bool]:
    """For a fixed point of the rotation-quotient dynamics, find the aligning
    rotation g with F(q) = g q and test whether it is the identity.

    Raises ``DomainError`` when the alignment residual exceeds ``tol`` (the
    point is not a quotient fixed point).  Returns ``(g, is_identity)`` with
    ``is_identity`` true when ``|g - I| <= 10 tol``.
    """
    m = potential.masses
    fq = normalized_gradient_map(potential, q)
    g = align_rotation(q, fq, m)
    resid = mass_norm(fq - q @ g.T, m)
    if resid > tol:
        raise DomainError(f"not a quotient fixed point: alignment residual {resid:.3e}")
    # for rank-deficient point sets (e.g. collinear) the minimizer is not
    # unique; when the identity aligns equally well, it is the canonical pick
    if mass_norm(fq - q, m) <= resid + 10.0 * tol:
        g = np.eye(q.shape[1])
    return g, bool(np.linalg.norm(g - np.eye(q.shape[1])) <= 10.0 * tol)


def equivariance_defect(
    potential: PairPotential,
    q: np.ndarray,
    rotation: np.ndarray | None = None,
    perm=None,
) -> float:
    """Mass-norm of F(sigma g q) - sigma g F(q) for a symmetry (sigma, g)."""
    if perm is not None:
        check_permutation(potential, perm)
    gq = apply_symmetry(q, perm, rotation)
    lhs = normalized_gradient_map(potential, gq)
    rhs = apply_symmetry(normalized_gradient_map(potential, q), perm, rotation)
    return mass_norm(lhs - rhs, potential.masses)
