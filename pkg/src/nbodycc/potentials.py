"""Homogeneous pairwise power-law potentials and their derivatives.

A potential is determined by a symmetric coefficient matrix ``kappa`` with
zero diagonal and a homogeneity exponent ``alpha > 0``:

    U(q) = sum_{i<j} kappa_ij / |q_i - q_j|**alpha

The gravitational case has kappa_ij = m_i m_j; the charged case has
kappa_ij = 1 - gamma_i gamma_j.  Gradients and the Hessian are analytic;
finite-difference oracles live in the test suite.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SymmetryError
from .mass_geometry import as_masses, validate_configuration

__all__ = [
    "PairPotential",
    "SymmetrySpec",
    "newtonian",
    "charged",
    "apply_symmetry",
    "invariance_residuals",
]


@dataclass(frozen=True)
class PairPotential:
    """Pair-coefficient potential together with the masses defining the metric."""

    kappa: np.ndarray
    alpha: float
    masses: np.ndarray

    def __post_init__(self):
        kappa = np.asarray(self.kappa, dtype=float)
        masses = as_masses(self.masses)
        n = masses.size
        if kappa.shape != (n, n):
            raise ValueError("kappa must be square, one row per body")
        if np.abs(kappa - kappa.T).max() > 0.0:
            raise ValueError("kappa must be symmetric")
        if np.abs(np.diag(kappa)).max() > 0.0:
            raise ValueError("kappa must have zero diagonal")
        if not self.alpha > 0.0:
            raise ValueError("homogeneity exponent alpha must be positive")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "masses", masses)

    @property
    def n(self) -> int:
        return self.masses.size

    def value(self, q: np.ndarray) -> float:
        q = validate_configuration(q)
        diff = q[:, None, :] - q[None, :, :]
        r = np.sqrt((diff * diff).sum(axis=2))
        iu = np.triu_indices(self.n, 1)
        return float((self.kappa[iu] / r[iu] ** self.alpha).sum())

    def euclid_gradient(self, q: np.ndarray) -> np.ndarray:
        """Partial derivatives dU/dq_j, shape (n, d)."""
        q = validate_configuration(q)
        diff = q[None, :, :] - q[:, None, :]  # diff[j, k] = q_k - q_j
        r = np.sqrt((diff * diff).sum(axis=2))
        np.fill_diagonal(r, np.inf)
        w = self.alpha * self.kappa / r ** (self.alpha + 2.0)
        return (w[:, :, None] * diff).sum(axis=1)

    def mass_gradient(self, q: np.ndarray) -> np.ndarray:
        """Gradient with respect to the mass metric: m_j^{-1} dU/dq_j."""
        return self.euclid_gradient(q) / self.masses[:, None]

    def hessian(self, q: np.ndarray) -> np.ndarray:
        """Second partials of U in ambient coordinates, shape (nd, nd).

        Symmetric by construction, and annihilates uniform translations.
        """
        q = validate_configuration(q)
        n, d = q.shape
        a = self.alpha
        h = np.zeros((n * d, n * d))
        for i in range(n):
            si = slice(i * d, (i + 1) * d)
            for j in range(i + 1, n):
                if self.kappa[i, j] == 0.0:
                    continue
                sj = slice(j * d, (j + 1) * d)
                u = q[i] - q[j]
                r2 = float(u @ u)
                block = (a * (a + 2.0) * self.kappa[i, j] / r2 ** (0.5 * a + 2.0)) * np.outer(u, u)
                block -= (a * self.kappa[i, j] / r2 ** (0.5 * a + 1.0)) * np.eye(d)
                h[si, si] += block
                h[sj, sj] += block
                h[si, sj] -= block
                h[sj, si] -= block
        return h


def newtonian(masses, alpha: float = 1.0) -> PairPotential:
    """Gravitational coefficients kappa_ij = m_i m_j."""
    m = as_masses(masses)
    kappa = np.outer(m, m)
    np.fill_diagonal(kappa, 0.0)
    return PairPotential(kappa=kappa, alpha=alpha, masses=m)


def charged(gamma, alpha: float = 1.0, masses=None) -> PairPotential:
    """Charged coefficients kappa_ij = 1 - gamma_i gamma_j (unit masses by default)."""
    gamma = np.asarray(gamma, dtype=float)
    kappa = 1.0 - np.outer(gamma, gamma)
    np.fill_diagonal(kappa, 0.0)
    m = np.ones(gamma.size) if masses is None else as_masses(masses)
    return PairPotential(kappa=kappa, alpha=alpha, masses=m)


@dataclass(frozen=True)
class SymmetrySpec:
    """Permutation generators preserving both kappa and the masses.

    ``include_rotations`` records whether the ambient rotation group is part
    of the symmetry group used by equivariance tests; rotations are sampled
    randomly rather than enumerated.
    """

    permutations: tuple = ()
    include_rotations: bool = True

    def validate(self, potential: PairPotential) -> None:
        for perm in self.permutations:
            check_permutation(potential, perm)


def check_permutation(potential: PairPotential, perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=int)
    n = potential.n
    if sorted(perm.tolist()) != list(range(n)):
        raise SymmetryError("not a permutation of the bodies")
    if np.abs(potential.masses[perm] - potential.masses).max() > 0.0:
        raise SymmetryError("permutation does not preserve the masses")
    if np.abs(potential.kappa[np.ix_(perm, perm)] - potential.kappa).max() > 1e-15:
        raise SymmetryError("permutation does not preserve the pair coefficients")
    return perm


def apply_symmetry(q: np.ndarray, perm=None, rotation: np.ndarray | None = None) -> np.ndarray:
    """Act on a configuration: body i of the result is ``rotation @ q[perm^{-1}(i)]``."""
    out = np.asarray(q, dtype=float)
    if rotation is not None:
        out = out @ np.asarray(rotation, dtype=float).T
    if perm is not None:
        perm = np.asarray(perm, dtype=int)
        inv = np.argsort(perm)
        out = out[inv]
    return out


def invariance_residuals(
    potential: PairPotential, q: np.ndarray, perm=None, rotation: np.ndarray | None = None
) -> tuple[float, float]:
    """Residuals of U(gq) = U(q) and of the gradient intertwining relation.

    Returns ``(|U(gq) - U(q)|, mass-norm of grad(gq) - g grad(q))`` for the
    combined permutation/rotation action.  The permutation must preserve the
    potential data.
    """
    from .mass_geometry import mass_norm

    if perm is not None:
        check_permutation(potential, perm)
    gq = apply_symmetry(q, perm, rotation)
    val_res = abs(potential.value(gq) - potential.value(q))
    grad_image = apply_symmetry(potential.mass_gradient(q), perm, rotation)
    grad_res = mass_norm(potential.mass_gradient(gq) - grad_image, potential.masses)
    return val_res, grad_res
