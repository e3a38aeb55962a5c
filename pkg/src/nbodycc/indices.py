"""Morse data and fixed-point indices of central configurations.

In rescaled coordinates ``x_j = sqrt(m_j) q_j`` the mass metric becomes
Euclidean and a converged central configuration can be rotated to the first
coordinate axis.  In the resulting chart the restricted Hessian of the
potential on the ellipsoid and the Jacobian of the normalized gradient map
are small dense symmetric matrices tied together by the exact relation

    alpha U(q) (I - F') = D2(U restricted)

which the test suite verifies against finite differences.  The fixed-point
index of the rotation-quotient map at a non-degenerate class is the sign of
``det(I - F')`` on the orbit-orthogonal slice, which by the relation above
equals ``(-1)**morse_index``.
"""

from dataclasses import dataclass

import numpy as np

from .cc_solver import CriticalRecord, _y_basis
from .errors import DegenerateRecordError, DomainError
from .mass_geometry import ensure_ellipsoid_point, mass_inner, mass_norm, orbit_directions
from .potentials import PairPotential

__all__ = [
    "AdaptedFrame",
    "IndexRecord",
    "adapted_frame",
    "restricted_hessian",
    "gradient_map_jacobian",
    "identity_residual",
    "slice_dimension",
    "fixed_point_index",
]

# Eigenvalues within KERNEL_BAND * spectral radius count as kernel; the
# smallest surviving eigenvalue must clear the band by GAP_RATIO.
KERNEL_BAND = 1e-6
GAP_RATIO = 1e3


def slice_dimension(n: int, d: int) -> int:
    """Dimension of the rotation-quotient slice at a trivially isotropic point:
    d(n-1) - 1 - d(d-1)/2."""
    if n < 2 or d not in (2, 3):
        raise ValueError("need n >= 2 and d in {2, 3}")
    return d * (n - 1) - 1 - d * (d - 1) // 2


@dataclass(frozen=True)
class AdaptedFrame:
    """Orthonormal chart of the ellipsoid centered at a base configuration.

    ``chart`` holds l = d(n-1) - 1 configuration-space directions that are
    mass-orthonormal and mass-orthogonal to the base point; together with the
    base point they are an isometric image of the standard sphere chart.
    The orthogonal completion is built from a Householder reflection composed
    to determinant +1; any other completion yields the same invariants.
    """

    qbar: np.ndarray
    masses: np.ndarray
    chart: np.ndarray  # (n*d, l), columns in configuration space

    @property
    def l(self) -> int:
        return self.chart.shape[1]

    def point(self, u: np.ndarray) -> np.ndarray:
        """Chart map u -> sqrt(1 - |u|^2) qbar + sum u_b chart_b, on the ellipsoid."""
        u = np.asarray(u, dtype=float)
        uu = float(u @ u)
        if uu >= 1.0:
            raise ValueError("chart coordinates must satisfy |u| < 1")
        flat = np.sqrt(1.0 - uu) * self.qbar.ravel() + self.chart @ u
        return flat.reshape(self.qbar.shape)

    def coords(self, v: np.ndarray) -> np.ndarray:
        """Chart coordinates of a configuration-space vector (mass pairing)."""
        mw = np.repeat(self.masses, self.qbar.shape[1])
        return self.chart.T @ (mw * np.asarray(v, dtype=float).ravel())


def adapted_frame(record_or_q, masses) -> AdaptedFrame:
    """Build the adapted chart at a converged central configuration.

    Accepts a :class:`CriticalRecord` or a bare ellipsoid point plus masses.
    """
    qbar = record_or_q.q if isinstance(record_or_q, CriticalRecord) else record_or_q
    m = masses
    qbar = ensure_ellipsoid_point(qbar, m, tol=1e-9)
    n, d = qbar.shape
    sm = np.sqrt(np.repeat(m, d))
    x0 = sm * qbar.ravel()
    by = _y_basis(n, d, m)
    a = by.T @ x0  # unit vector: coordinates of the base point
    k = a.size
    e0 = np.zeros(k)
    e0[0] = 1.0
    v = a - e0
    if np.linalg.norm(v) < 1e-14:
        rot = np.eye(k)
    else:
        v = v / np.linalg.norm(v)
        rot = np.eye(k) - 2.0 * np.outer(v, v)  # reflection sending a to e0
        rot[-1] *= -1.0  # restore determinant +1; leaves rot @ a = e0 intact
    wmat = by @ rot.T  # column 0 is x0 itself
    chart = wmat[:, 1:] / sm[:, None]
    return AdaptedFrame(qbar=qbar, masses=m, chart=chart)


def restricted_hessian(potential: PairPotential, frame: AdaptedFrame) -> np.ndarray:
    """Hessian of the ellipsoid-restricted potential in the chart, shape (l, l).

    Entry (a, b) is the second chart derivative minus the radial first-order
    term: ``H[chart_a, chart_b] - delta_ab dU/dx0`` with ``dU/dx0`` the
    derivative along the base point.
    """
    q = frame.qbar
    hess = potential.hessian(q)
    du_dx0 = mass_inner(potential.mass_gradient(q), q, potential.masses)
    v = frame.chart
    return v.T @ hess @ v - du_dx0 * np.eye(frame.l)


def gradient_map_jacobian(potential: PairPotential, frame: AdaptedFrame) -> np.ndarray:
    """Chart Jacobian of the normalized gradient map at the base fixed point:
    ``-H_chart / |grad_M U|_M``.

    Valid at central configurations, where the tangential gradient vanishes.
    As a side consistency check, the gradient norm must agree with
    ``alpha U(q)`` (both equal minus the radial derivative of U there).
    """
    q = frame.qbar
    m = potential.masses
    gn = mass_norm(potential.mass_gradient(q), m)
    u = potential.value(q)
    if abs(gn - potential.alpha * u) > 1e-6 * max(1.0, abs(potential.alpha * u)):
        raise DomainError("base point is not central: |grad| != alpha U")
    v = frame.chart
    return -(v.T @ potential.hessian(q) @ v) / gn


def identity_residual(potential: PairPotential, record_or_q, masses=None) -> float:
    """Relative defect of ``alpha U (I - F') = D2(U restricted)`` at a
    central configuration: ``|alpha U (I - J) - D2| / (alpha U)`` in the
    Frobenius norm."""
    frame = adapted_frame(record_or_q, potential.masses if masses is None else masses)
    au = potential.alpha * potential.value(frame.qbar)
    d2 = restricted_hessian(potential, frame)
    jac = gradient_map_jacobian(potential, frame)
    return float(np.linalg.norm(au * (np.eye(frame.l) - jac) - d2) / au)


@dataclass(frozen=True)
class IndexRecord:
    """Morse and fixed-point data of an accepted central configuration.

    ``fixed_point_index`` is the sign of ``det(I - F')`` on the
    orbit-orthogonal slice and always equals ``(-1)**morse_index``;
    ``slice_dim`` is the dimension of that slice.
    """

    morse_index: int
    kernel_dim: int
    fixed_point_index: int
    slice_dim: int
    spectrum: np.ndarray
    identity_residual: float


def fixed_point_index(
    potential: PairPotential, record: CriticalRecord, kernel_band: float = KERNEL_BAND
) -> IndexRecord:
    """Compute Morse index and quotient fixed-point index at a census record.

    The restricted Hessian must have exactly d(d-1)/2 near-zero eigenvalues
    (the rotation orbit) with a clear spectral gap, and the record must have
    trivial isotropy; otherwise the record is refused with
    ``DegenerateRecordError``.  The index is computed two ways: as the sign
    of ``det(I - F')`` restricted to the orbit-orthogonal slice, and as
    ``(-1)**morse_index`` through the exact identity; disagreement (never
    observed at an accepted record) is an error.
    """
    m = potential.masses
    q = record.q
    n, d = q.shape
    k0 = d * (d - 1) // 2
    if record.isotropy_rank < k0:
        raise DegenerateRecordError(
            f"non-maximal isotropy: orbit rank {record.isotropy_rank} < {k0}"
        )

    frame = adapted_frame(record, m)
    d2 = restricted_hessian(potential, frame)
    jac = gradient_map_jacobian(potential, frame)
    evals = np.linalg.eigvalsh(d2)
    radius = float(np.abs(evals).max())
    band = kernel_band * radius
    in_band = np.abs(evals) <= band
    kernel_dim = int(in_band.sum())
    if kernel_dim != k0:
        raise DegenerateRecordError(f"kernel dimension {kernel_dim}, expected {k0}")
    nonzero = np.abs(evals[~in_band])
    band_top = float(np.abs(evals[in_band]).max())
    if band_top > 0.0 and nonzero.min() / band_top < GAP_RATIO:
        raise DegenerateRecordError(
            f"ambiguous kernel band: gap ratio {nonzero.min() / band_top:.1e}"
        )
    mu = int((evals < -band).sum())

    # slice = orthogonal complement of the orbit directions inside the chart
    orbit_coords = np.stack([frame.coords(w) for w in orbit_directions(q, m)], axis=1)
    qorb, _ = np.linalg.qr(orbit_coords)
    proj = np.eye(frame.l) - qorb @ qorb.T
    w, vecs = np.linalg.eigh(proj)
    slice_basis = vecs[:, w > 0.5]
    sdim = slice_basis.shape[1]
    sign, _ = np.linalg.slogdet(slice_basis.T @ (np.eye(frame.l) - jac) @ slice_basis)
    det_route = int(sign)
    if det_route != (-1) ** mu:
        raise DegenerateRecordError(
            f"index routes disagree: det sign {det_route} vs parity {(-1) ** mu}"
        )

    resid = float(
        np.linalg.norm(
            potential.alpha * record.u_value * (np.eye(frame.l) - jac) - d2
        )
        / (potential.alpha * record.u_value)
    )
    return IndexRecord(
        morse_index=mu,
        kernel_dim=kernel_dim,
        fixed_point_index=det_route,
        slice_dim=sdim,
        spectrum=evals,
        identity_residual=resid,
    )
