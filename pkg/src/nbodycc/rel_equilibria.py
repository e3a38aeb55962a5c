"""Relative equilibria: rigidly rotating solutions of the Newton equations.

A configuration rotating about the vertical axis with angular speed omega
solves the equations of motion exactly when ``grad_M U(q) = -omega^2 P q``,
with P the projection onto the horizontal plane.  Such points are the
critical points of U restricted to the cylinder ``<Pq, q>_M = c`` that have
positive potential value; ``omega^2 = alpha U / |Pq|_M^2`` follows from
homogeneity.  The module also certifies the six-body charged example of a
non-planar, non-central relative equilibrium, and integrates the equations
of motion to measure the drift of candidate rotating solutions.
"""

from dataclasses import dataclass

import numpy as np

from .cc_solver import CriticalRecord, SolverConfig, _gauge_slice_basis
from .errors import CollisionError, ConvergenceError, DomainError
from .mass_geometry import (
    mass_inner,
    mass_norm,
    min_max_distance,
    project_center,
    rotation_matrix,
    validate_configuration,
)
from .potentials import PairPotential, charged

__all__ = [
    "CylinderSpec",
    "RelEquilibriumRecord",
    "AxisPairCharges",
    "cylinder_value",
    "find_relative_equilibrium",
    "is_central",
    "strip_potential",
    "strip_gradient",
    "strip_hessian",
    "interior_max_gates",
    "maximize_strip_potential",
    "lift_axis_configuration",
    "certify_axis_pair_equilibrium",
    "integrate_newton",
    "rotating_solution_drift",
    "verify_dynamics",
]

PLANAR_Z_TOL = 1e-9


@dataclass(frozen=True)
class CylinderSpec:
    """Level c > 0 of the horizontal inertia <Pq, q>_M; the rotation plane is
    fixed to the xy-plane, so this is meaningful for d = 3 only."""

    c: float

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValueError("cylinder level must be positive")


@dataclass(frozen=True)
class RelEquilibriumRecord:
    q: np.ndarray
    omega_sq: float
    residual: float
    u_value: float
    planar: bool
    central: bool
    iterations: int


def _pq(q: np.ndarray) -> np.ndarray:
    out = q.copy()
    out[:, 2] = 0.0
    return out


def cylinder_value(q: np.ndarray, m: np.ndarray) -> float:
    """Horizontal part of the inertia: sum_j m_j |P q_j|^2."""
    if q.shape[1] != 3:
        raise ValueError("cylinder level is defined for d = 3")
    p = _pq(q)
    return mass_inner(p, p, m)


def is_central(potential: PairPotential, q: np.ndarray, tol: float = 1e-8) -> bool:
    """True when grad_M U(q) is parallel to q within angle ~tol."""
    m = potential.masses
    g = potential.mass_gradient(q)
    gn = mass_norm(g, m)
    if gn == 0.0:
        raise DomainError("gradient vanishes; centrality is undefined")
    qhat = q / mass_norm(q, m)
    tangential = g - mass_inner(g, qhat, m) * qhat
    return mass_norm(tangential, m) / gn <= tol


def find_relative_equilibrium(
    potential: PairPotential,
    spec: CylinderSpec,
    seed: np.ndarray,
    cfg: SolverConfig = SolverConfig(),
) -> RelEquilibriumRecord:
    """Newton solve of ``grad_M U + omega^2 P q = 0`` on the cylinder.

    Steps are confined to the slice tangent to the cylinder, inside the
    centered subspace, and orthogonal to the vertical-axis rotation orbit;
    the iterate is retracted to the cylinder by rescaling its horizontal
    block.  A converged critical point with non-positive potential value is
    not an equilibrium and is reported via ``DomainError``.  Points whose
    horizontal inertia nearly vanishes are refused (omega is not
    reconstructible there).
    """
    m = potential.masses
    alpha = potential.alpha
    seed = validate_configuration(seed, d=3)
    n, d = seed.shape
    mw = np.repeat(m, d)
    oz = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])

    def retract(qq: np.ndarray) -> np.ndarray:
        qq = project_center(qq, m)
        level = cylinder_value(qq, m)
        if level < 1e-8 * mass_inner(qq, qq, m):
            raise DomainError("horizontal inertia too small to define a rotation speed")
        out = qq.copy()
        out[:, :2] *= np.sqrt(spec.c / level)
        return out

    def residual_parts(qq: np.ndarray):
        u = potential.value(qq)
        g = potential.mass_gradient(qq)
        p = _pq(qq)
        om2 = alpha * u / mass_inner(p, p, m)
        res_vec = g + om2 * p
        return u, g, p, om2, res_vec, mass_norm(res_vec, m) / max(mass_norm(g, m), 1e-300)

    q = retract(seed)
    for it in range(cfg.max_iter):
        rmin, rmax = min_max_distance(q)
        if rmin <= 1e-9 * rmax:
            raise CollisionError("iterate approached a collision")
        u, g, p, om2, res_vec, res = residual_parts(q)
        if res <= cfg.tol:
            if u <= 0.0:
                raise DomainError(
                    "converged to a cylinder critical point with non-positive potential; "
                    "not a relative equilibrium"
                )
            return RelEquilibriumRecord(
                q=q,
                omega_sq=om2,
                residual=res,
                u_value=u,
                planar=bool(np.abs(q[:, 2]).max() <= PLANAR_Z_TOL),
                central=is_central(potential, q),
                iterations=it,
            )

        # only the vertical-axis rotation preserves the cylinder; out-of-plane
        # rotations are genuine degrees of freedom here
        basis = _gauge_slice_basis(q, m, [p, q @ oz.T])
        hess = potential.hessian(q)
        grad_flat = potential.euclid_gradient(q).ravel()
        level = mass_inner(p, p, m)
        l = basis.shape[1]
        jb = np.empty((n * d, l))
        for b in range(l):
            v = basis[:, b]
            vq = v.reshape(n, d)
            dom2 = alpha * (grad_flat @ v) / level  # <Pq, v>_M = 0 on the slice
            jb[:, b] = (hess @ v) / mw + dom2 * p.ravel() + om2 * _pq(vq).ravel()
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
                qn = retract(q + lam * step)
                rmin, rmax = min_max_distance(qn)
                if rmin <= 1e-9 * rmax:
                    raise CollisionError
                res_new = residual_parts(qn)[5]
            except (CollisionError, DomainError):
                lam *= 0.5
                continue
            if res_new < res or lam < 2e-4 * cfg.damping:
                q, moved = qn, True
                break
            lam *= 0.5
        if not moved:
            raise ConvergenceError("line search stalled on the cylinder")

    raise ConvergenceError(f"no convergence to tol {cfg.tol:g} in {cfg.max_iter} iterations")


# ----------------------------------------------------------------------
# Six charged bodies in symmetric pairs on the coordinate axes.
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class AxisPairCharges:
    """Charges of three symmetric pairs pinned to the x, y, z axes.

    Bodies 1-2 carry charge c1 on the x-axis, bodies 3-4 charge c2 on the
    y-axis, bodies 5-6 charge c3 on the z-axis; all masses are one and the
    pair coefficients are 1 - gamma_i gamma_j.
    """

    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        if self.c1 == 0.0 or self.c2 == 0.0 or self.c3 == 0.0:
            raise ValueError("all three charges must be non-zero")

    @property
    def gamma(self) -> np.ndarray:
        return np.array([self.c1, self.c1, self.c2, self.c2, self.c3, self.c3])

    def potential(self) -> PairPotential:
        return charged(self.gamma)


def _strip_terms(p: AxisPairCharges):
    c1, c2, c3 = p.c1, p.c2, p.c3
    return (
        1.0 - c1 * c1,
        1.0 - c2 * c2,
        1.0 - c3 * c3,
        1.0 - c1 * c2,
        1.0 - c1 * c3,
        1.0 - c2 * c3,
    )


def _check_strip_point(t: float, z: float) -> None:
    if not (0.0 < t < np.pi / 2.0) or not z > 0.0:
        raise DomainError("strip coordinates must satisfy 0 < t < pi/2 and z > 0")


def strip_potential(t: float, z: float, p: AxisPairCharges) -> float:
    """Potential of the symmetric axis-pair family in strip coordinates.

    The configuration is constrained to the unit circle x = cos t, y = sin t
    in the horizontal chart, with the third pair at height z; the value
    agrees with the full six-body potential of the lifted configuration.
    """
    _check_strip_point(t, z)
    a1, a2, a3, b12, b13, b23 = _strip_terms(p)
    c, s = np.cos(t), np.sin(t)
    r1 = np.sqrt(c * c + z * z)
    r2 = np.sqrt(s * s + z * z)
    return a1 / (2 * c) + a2 / (2 * s) + a3 / (2 * z) + 4 * b12 + 4 * b13 / r1 + 4 * b23 / r2


def strip_gradient(t: float, z: float, p: AxisPairCharges) -> np.ndarray:
    _check_strip_point(t, z)
    a1, a2, a3, _, b13, b23 = _strip_terms(p)
    c, s = np.cos(t), np.sin(t)
    r1 = np.sqrt(c * c + z * z)
    r2 = np.sqrt(s * s + z * z)
    ut = a1 * s / (2 * c * c) - a2 * c / (2 * s * s) + 4 * c * s * (b13 / r1**3 - b23 / r2**3)
    uz = -a3 / (2 * z * z) - 4 * z * (b13 / r1**3 + b23 / r2**3)
    return np.array([ut, uz])


def strip_hessian(t: float, z: float, p: AxisPairCharges) -> np.ndarray:
    _check_strip_point(t, z)
    a1, a2, a3, _, b13, b23 = _strip_terms(p)
    c, s = np.cos(t), np.sin(t)
    r1 = np.sqrt(c * c + z * z)
    r2 = np.sqrt(s * s + z * z)
    utt = (
        (a1 / 2) * (1 / c + 2 * s * s / c**3)
        + (a2 / 2) * (1 / s + 2 * c * c / s**3)
        + 4 * (c * c - s * s) * (b13 / r1**3 - b23 / r2**3)
        + 12 * c * c * s * s * (b13 / r1**5 + b23 / r2**5)
    )
    utz = 12 * c * s * z * (b23 / r2**5 - b13 / r1**5)
    uzz = a3 / z**3 - 4 * (b13 / r1**3 + b23 / r2**3) + 12 * z * z * (b13 / r1**5 + b23 / r2**5)
    return np.array([[utt, utz], [utz, uzz]])


def interior_max_gates(p: AxisPairCharges) -> tuple[bool, bool, bool]:
    """Three inequalities forcing the strip potential to peak in the interior.

    (1) c1 > 1 with c2, c3 < -1; (2) 1 - c1^2 + 8(1 - c1 c3) < 0, which sends
    the potential to -inf at the strip boundary in t; (3)
    c3^2 - 1 + 8(c2 c3 - 1) < 8(1 - c1 c3), which makes it decrease for
    large z.
    """
    g0 = p.c1 > 1.0 and p.c2 < -1.0 and p.c3 < -1.0
    g1 = 1.0 - p.c1**2 + 8.0 * (1.0 - p.c1 * p.c3) < 0.0
    g2 = p.c3**2 - 1.0 + 8.0 * (p.c2 * p.c3 - 1.0) < 8.0 * (1.0 - p.c1 * p.c3)
    return g0, g1, g2


def maximize_strip_potential(
    p: AxisPairCharges, grid: int = 60, grad_tol: float = 1e-12, max_iter: int = 100
) -> tuple[float, float, float]:
    """Locate the interior maximum of the strip potential.

    Requires all three gates; scans a coarse grid of the strip and polishes
    with a damped Newton ascent.  Returns ``(t, z, U(t, z))`` with gradient
    norm below ``grad_tol`` and a negative-semidefinite Hessian; a maximizer
    drifting to the boundary contradicts the gates and raises
    ``ConvergenceError``.
    """
    if not all(interior_max_gates(p)):
        raise DomainError("charge gates fail; an interior maximum is not guaranteed")
    ts = np.linspace(0.05, np.pi / 2 - 0.05, grid)
    zs = np.geomspace(0.02, 5.0, grid)
    uval, t, z = max((strip_potential(tt, zz, p), tt, zz) for tt in ts for zz in zs)
    for _ in range(max_iter):
        g = strip_gradient(t, z, p)
        if np.linalg.norm(g) <= grad_tol:
            break
        try:
            dt, dz = np.linalg.solve(strip_hessian(t, z, p), -g)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular Hessian during strip ascent")
        lam = 1.0
        while lam > 1e-10:
            tn, zn = t + lam * dt, z + lam * dz
            if 0.0 < tn < np.pi / 2 and zn > 0.0 and strip_potential(tn, zn, p) >= uval - 1e-12:
                break
            lam *= 0.5
        else:
            raise ConvergenceError("strip ascent pushed against the boundary")
        t, z = tn, zn
        uval = strip_potential(t, z, p)
    g = strip_gradient(t, z, p)
    if np.linalg.norm(g) > max(grad_tol, 1e-10):
        raise ConvergenceError(f"strip ascent stalled with gradient norm {np.linalg.norm(g):.2e}")
    if np.linalg.eigvalsh(strip_hessian(t, z, p)).max() > 1e-9:
        raise ConvergenceError("strip critical point is not a maximum")
    return float(t), float(z), float(uval)


def lift_axis_configuration(t: float, z: float) -> np.ndarray:
    """Six-body configuration of the symmetric axis pairs at strip point (t, z)."""
    x, y = np.cos(t), np.sin(t)
    return np.array(
        [
            [x, 0.0, 0.0],
            [-x, 0.0, 0.0],
            [0.0, y, 0.0],
            [0.0, -y, 0.0],
            [0.0, 0.0, z],
            [0.0, 0.0, -z],
        ]
    )


def certify_axis_pair_equilibrium(
    p: AxisPairCharges, crit_tol: float = 1e-8, nonplanar_tol: float = 1e-3
) -> tuple[RelEquilibriumRecord, dict]:
    """Build and check the non-planar, non-central relative equilibrium.

    Maximizes the strip potential, lifts the maximizer to six bodies, and
    certifies four clauses on the full 18-coordinate problem:

    1. ``criticality``: |grad_M U + omega^2 P q|_M <= crit_tol with
       omega^2 = alpha U / <Pq, q>_M,
    2. ``nonplanar``: the vertical pair sits at height z > nonplanar_tol,
    3. ``noncentral``: the gradient is not parallel to q,
    4. ``positive_potential``: U(q) > 0.

    Returns the record plus a certificate dict with one boolean per clause.
    """
    gates = interior_max_gates(p)
    if not all(gates):
        raise DomainError(f"charge gates fail: {gates}")
    t, z, _ = maximize_strip_potential(p)
    potential = p.potential()
    q = lift_axis_configuration(t, z)
    m = potential.masses
    u = potential.value(q)
    pq = _pq(q)
    omega_sq = potential.alpha * u / mass_inner(pq, pq, m)
    resid = mass_norm(potential.mass_gradient(q) + omega_sq * pq, m)
    central = is_central(potential, q)
    certificate = {
        "gates": tuple(gates),
        "criticality": bool(resid <= crit_tol),
        "criticality_residual": float(resid),
        "nonplanar": bool(z > nonplanar_tol),
        "noncentral": bool(not central),
        "positive_potential": bool(u > 0.0),
        "t": float(t),
        "z": float(z),
    }
    record = RelEquilibriumRecord(
        q=q,
        omega_sq=float(omega_sq),
        residual=float(resid / mass_norm(potential.mass_gradient(q), m)),
        u_value=float(u),
        planar=bool(np.abs(q[:, 2]).max() <= PLANAR_Z_TOL),
        central=central,
        iterations=0,
    )
    return record, certificate


# ----------------------------------------------------------------------
# Trajectory verification.
# ----------------------------------------------------------------------


def integrate_newton(
    potential: PairPotential, q0: np.ndarray, v0: np.ndarray, total_time: float, steps: int
):
    """Fixed-step classical Runge-Kutta integration of qdd = grad_M U(q).

    Yields ``(time, q)`` after every step.  Raises ``CollisionError``,
    reporting the failure time, when the trajectory approaches a collision
    or when the conserved energy drifts (the signature of stepping across a
    near-singularity).
    """
    m = potential.masses
    h = total_time / steps
    q = q0.copy()
    v = v0.copy()
    t = 0.0
    scale0 = min_max_distance(q0)[1]
    energy0 = 0.5 * mass_inner(v, v, m) - potential.value(q)
    energy_budget = 1e-2 * (abs(energy0) + 1.0)
    for _ in range(steps):
        if not np.isfinite(q).all():
            raise CollisionError(f"trajectory blew up near t = {t:.6g}")
        rmin, rmax = min_max_distance(q)
        if rmin <= 1e-6 * max(rmax, scale0):
            raise CollisionError(f"trajectory reached a collision near t = {t:.6g}")
        if abs(0.5 * mass_inner(v, v, m) - potential.value(q) - energy0) > energy_budget:
            raise CollisionError(f"integration blew up (energy drift) near t = {t:.6g}")
        k1v = potential.mass_gradient(q)
        k1q = v
        k2v = potential.mass_gradient(q + 0.5 * h * k1q)
        k2q = v + 0.5 * h * k1v
        k3v = potential.mass_gradient(q + 0.5 * h * k2q)
        k3q = v + 0.5 * h * k2v
        k4v = potential.mass_gradient(q + h * k3q)
        k4q = v + h * k3v
        q = q + (h / 6.0) * (k1q + 2 * k2q + 2 * k3q + k4q)
        v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        t += h
        yield t, q


def rotating_solution_drift(
    potential: PairPotential,
    q0: np.ndarray,
    omega: float,
    total_time: float,
    steps: int,
    axis: int = 2,
) -> float:
    """Max mass-norm distance between the integrated trajectory and the rigid
    rotation of q0 with angular speed omega (omega = 0 compares against the
    static configuration)."""
    d = q0.shape[1]
    gen = np.array([[0.0, -1.0], [1.0, 0.0]]) if d == 2 else None
    if d == 3:
        gen = np.zeros((3, 3))
        i, j = [(1, 2), (2, 0), (0, 1)][axis]
        gen[i, j] = -1.0
        gen[j, i] = 1.0
    v0 = omega * (q0 @ gen.T)
    m = potential.masses
    drift = 0.0
    for t, q in integrate_newton(potential, q0, v0, total_time, steps):
        ref = q0 @ rotation_matrix(d, omega * t, axis).T
        drift = max(drift, mass_norm(q - ref, m))
    return drift


def verify_dynamics(
    potential: PairPotential,
    record,
    total_time: float | None = None,
    steps: int = 10000,
) -> float:
    """Drift of the rotating solution attached to a converged record.

    For a planar central configuration (d = 2) the angular speed satisfies
    ``omega^2 = alpha U``; for a cylinder record (d = 3) it is stored on the
    record.  The default window is one full revolution.
    """
    if isinstance(record, CriticalRecord):
        q0 = record.q
        if q0.shape[1] != 2:
            raise DomainError("central-configuration dynamics is supported for d = 2")
        omega_sq = potential.alpha * record.u_value
    elif isinstance(record, RelEquilibriumRecord):
        q0 = record.q
        omega_sq = record.omega_sq
    else:
        raise TypeError("record must be a CriticalRecord or RelEquilibriumRecord")
    if omega_sq <= 0.0:
        raise DomainError("record has no real rotation speed")
    omega = np.sqrt(omega_sq)
    if total_time is None:
        total_time = 2.0 * np.pi / omega
    return rotating_solution_drift(potential, q0, omega, total_time, steps)
