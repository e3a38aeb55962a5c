"""Mass-weighted linear algebra on configuration space.

Configurations are (n, d) arrays of body positions.  The mass metric
``<v, w> = sum_j m_j v_j . w_j`` turns the centered configurations of unit
mass-norm into an ellipsoid; everything downstream (solvers, spectra,
indices) is expressed in this metric.
"""

import numpy as np

from .errors import CollisionError, DomainError

# Pairs closer than this fraction of the configuration diameter count as
# a collision.
COLLISION_GUARD = 1e-9

ELLIPSOID_TOL = 1e-12


def as_masses(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 1 or m.size < 2:
        raise ValueError("masses must be a 1-d array with at least two entries")
    if np.any(m <= 0.0):
        raise DomainError("all masses must be positive")
    return m


def pair_distances(q: np.ndarray) -> np.ndarray:
    """Full (n, n) matrix of mutual distances."""
    diff = q[:, None, :] - q[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def min_max_distance(q: np.ndarray) -> tuple[float, float]:
    r = pair_distances(q)
    iu = np.triu_indices(q.shape[0], 1)
    return float(r[iu].min()), float(r[iu].max())


def validate_configuration(q, d: int | None = None) -> np.ndarray:
    """Check shape, dimension and the collision guard; return the array."""
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] < 2:
        raise ValueError("configuration must be an (n, d) array with n >= 2")
    if q.shape[1] not in (2, 3):
        raise ValueError("only dimensions 2 and 3 are supported")
    if d is not None and q.shape[1] != d:
        raise ValueError(f"expected dimension {d}, got {q.shape[1]}")
    rmin, rmax = min_max_distance(q)
    if rmin <= COLLISION_GUARD * max(rmax, 1e-300):
        raise CollisionError(f"minimum pair distance {rmin:.3e} under collision guard")
    return q


def mass_inner(v: np.ndarray, w: np.ndarray, m: np.ndarray) -> float:
    """Mass-weighted inner product sum_j m_j v_j . w_j."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != w.shape or v.shape[0] != len(m):
        raise ValueError("shape mismatch in mass_inner")
    return float((m[:, None] * v * w).sum())


def mass_norm(v: np.ndarray, m: np.ndarray) -> float:
    return np.sqrt(mass_inner(v, v, m))


def center_of_mass(q: np.ndarray, m: np.ndarray) -> np.ndarray:
    return (m[:, None] * q).sum(axis=0) / m.sum()


def project_center(q: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Translate so the center of mass sits at the origin.

    Idempotent, and leaves all mutual distances unchanged.
    """
    return q - center_of_mass(q, m)


def normalize_to_ellipsoid(q: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Rescale a centered configuration to unit mass-norm.

    Raises ``DomainError`` for zero mass-norm input and ``ValueError`` if the
    configuration is not centered.
    """
    nrm = mass_norm(q, m)
    if nrm <= 0.0 or not np.isfinite(nrm):
        raise DomainError("cannot normalize configuration with zero mass-norm")
    if np.linalg.norm(center_of_mass(q, m)) > 1e-10 * max(nrm, 1.0):
        raise ValueError("configuration must be centered before normalization")
    return q / nrm


def ensure_ellipsoid_point(q: np.ndarray, m: np.ndarray, tol: float = ELLIPSOID_TOL) -> np.ndarray:
    """Validate membership in the unit mass-norm ellipsoid of centered points."""
    q = validate_configuration(q)
    if np.linalg.norm(center_of_mass(q, m)) > max(tol, 1e-12):
        raise ValueError("point is not centered")
    if abs(mass_inner(q, q, m) - 1.0) > tol:
        raise ValueError("point does not have unit mass-norm")
    return q


def so_generators(d: int) -> list[np.ndarray]:
    """Fixed basis of the skew-symmetric d x d matrices.

    d=2: the single plane generator; d=3: rotations about the x, y, z axes.
    """
    if d == 2:
        return [np.array([[0.0, -1.0], [1.0, 0.0]])]
    if d == 3:
        gx = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
        gy = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
        gz = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        return [gx, gy, gz]
    raise ValueError("only dimensions 2 and 3 are supported")


def orbit_directions(q: np.ndarray, m: np.ndarray) -> list[np.ndarray]:
    """Tangent directions generated by rigid rotations of the configuration.

    Each direction is mass-orthogonal to ``q``; their span has dimension
    d(d-1)/2 exactly when the configuration has trivial rotational isotropy.
    Rank deficiency is reported by :func:`isotropy_rank`, not treated as an
    error.
    """
    return [q @ gen.T for gen in so_generators(q.shape[1])]


def isotropy_rank(q: np.ndarray, m: np.ndarray, tol: float = 1e-8) -> int:
    """Numerical rank of the rotation orbit directions at ``q``."""
    sm = np.sqrt(np.repeat(m, q.shape[1]))
    cols = np.stack([sm * d.ravel() for d in orbit_directions(q, m)], axis=1)
    s = np.linalg.svd(cols, compute_uv=False)
    return int((s > tol * s[0]).sum()) if s[0] > 0 else 0


def rotation_matrix(d: int, angle: float, axis: int = 2) -> np.ndarray:
    """Plane rotation for d=2, rotation about a coordinate axis for d=3."""
    c, s = np.cos(angle), np.sin(angle)
    if d == 2:
        return np.array([[c, -s], [s, c]])
    if d == 3:
        out = np.eye(3)
        i, j = [(1, 2), (2, 0), (0, 1)][axis]
        out[i, i] = c
        out[j, j] = c
        out[i, j] = -s
        out[j, i] = s
        return out
    raise ValueError("only dimensions 2 and 3 are supported")


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random rotation via QR of a Gaussian matrix, det +1."""
    a = rng.standard_normal((d, d))
    qmat, r = np.linalg.qr(a)
    qmat = qmat * np.sign(np.diag(r))
    if np.linalg.det(qmat) < 0:
        qmat[:, 0] = -qmat[:, 0]
    return qmat


def block_rotation_generator(thetas, d: int) -> np.ndarray:
    """Skew generator with 2x2 plane blocks of the given angles on the diagonal."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if 2 * len(thetas) > d:
        raise ValueError("too many plane angles for dimension")
    out = np.zeros((d, d))
    for i, th in enumerate(thetas):
        out[2 * i, 2 * i + 1] = -th
        out[2 * i + 1, 2 * i] = th
    return out


def _block_angles(omega: np.ndarray) -> np.ndarray:
    d = omega.shape[0]
    if omega.shape != (d, d) or np.abs(omega + omega.T).max() > 1e-12:
        raise ValueError("generator must be a skew-symmetric square matrix")
    probe = omega.copy()
    thetas = np.zeros(d // 2)
    for i in range(d // 2):
        thetas[i] = omega[2 * i + 1, 2 * i]
        probe[2 * i, 2 * i + 1] = 0.0
        probe[2 * i + 1, 2 * i] = 0.0
    if np.abs(probe).max() > 1e-12:
        raise ValueError("generator is not in rotation-plane block form")
    return thetas


def block_rotation_exp(omega: np.ndarray) -> np.ndarray:
    """Matrix exponential of a block-form generator, evaluated per plane block."""
    thetas = _block_angles(omega)
    d = omega.shape[0]
    out = np.eye(d)
    for i, th in enumerate(thetas):
        c, s = np.cos(th), np.sin(th)
        out[2 * i, 2 * i] = c
        out[2 * i, 2 * i + 1] = -s
        out[2 * i + 1, 2 * i] = s
        out[2 * i + 1, 2 * i + 1] = c
    return out


def rotation_quadratic_form(omega: np.ndarray, x: np.ndarray) -> tuple[float, float]:
    """Evaluate (exp(omega) x) . (omega x) and its plane-block closed form.

    For a block generator with plane angles theta_i the pairing equals
    sum_i theta_i sin(theta_i) |z_i|^2, where z_i is the component of x in
    the i-th rotation plane; in particular it is non-negative whenever every
    theta_i lies in [-pi, pi].
    """
    thetas = _block_angles(omega)
    x = np.asarray(x, dtype=float)
    lhs = float((block_rotation_exp(omega) @ x) @ (omega @ x))
    rhs = float(
        sum(th * np.sin(th) * (x[2 * i] ** 2 + x[2 * i + 1] ** 2) for i, th in enumerate(thetas))
    )
    return lhs, rhs


def align_rotation(source: np.ndarray, target: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Rotation g (det +1) minimizing the mass-norm of target - source @ g.T.

    Mass-weighted orthogonal alignment of two labeled point sets; the
    determinant constraint excludes reflections.
    """
    c = (m[:, None] * target).T @ source
    u, _, vt = np.linalg.svd(c)
    dfix = np.eye(c.shape[0])
    dfix[-1, -1] = np.sign(np.linalg.det(u @ vt))
    return u @ dfix @ vt
