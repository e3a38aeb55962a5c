import numpy as np
import pytest

from conftest import random_configuration, random_potential
from nbodycc import (
    SolverConfig,
    census,
    centrality_residual,
    charged,
    equivariance_defect,
    find_central_configuration,
    mass_inner,
    mass_norm,
    newtonian,
    normalize_to_ellipsoid,
    normalized_gradient_map,
    project_center,
    projection_inequality,
    quotient_lift_check,
    same_class,
)
from nbodycc.errors import CollisionError, DomainError, SymmetryError
from nbodycc.mass_geometry import random_rotation, rotation_matrix

TWO_BODY = np.array([[1.0 / np.sqrt(2.0), 0.0], [-1.0 / np.sqrt(2.0), 0.0]])


def equilateral(scale=1.0):
    ang = np.array([0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0])
    q = np.stack([np.cos(ang), np.sin(ang)], axis=1) / np.sqrt(3.0)
    return scale * q


# ----------------------------------------------------------------- map


def test_map_fixes_two_body():
    u = newtonian(np.ones(2))
    assert np.abs(normalized_gradient_map(u, TWO_BODY) - TWO_BODY).max() <= 1e-15


def test_map_fixes_equilateral():
    u = newtonian(np.ones(3))
    q = equilateral()
    assert np.abs(normalized_gradient_map(u, q) - q).max() <= 1e-14


def test_map_random_point_moves_but_stays_on_ellipsoid(rng):
    u = newtonian(np.ones(4))
    for _ in range(20):
        q = random_configuration(rng, 4, 3)
        fq = normalized_gradient_map(u, q)
        assert abs(mass_norm(fq, u.masses) - 1.0) <= 1e-12
        assert mass_norm(fq - q, u.masses) > 1e-6
        # image is centered
        assert np.linalg.norm((u.masses[:, None] * fq).sum(axis=0)) <= 1e-13


def test_map_requires_positive_potential():
    u = charged([2.0, 2.0])  # kappa = 1 - 4 < 0
    with pytest.raises(DomainError):
        normalized_gradient_map(u, TWO_BODY)


# ------------------------------------------------------------ residual


def test_residual_at_solutions():
    u2 = newtonian(np.ones(2))
    assert centrality_residual(u2, TWO_BODY) <= 1e-15
    u3 = newtonian(np.ones(3))
    assert centrality_residual(u3, equilateral()) <= 1e-14


def test_residual_perturbed_equilateral(rng):
    u = newtonian(np.ones(3))
    q = equilateral()
    for _ in range(5):
        dq = rng.standard_normal((3, 2))
        dq = project_center(dq, u.masses)
        dq -= mass_inner(dq, q, u.masses) * q
        dq /= mass_norm(dq, u.masses)
        qp = normalize_to_ellipsoid(q + 1e-3 * dq, u.masses)
        assert 1e-5 < centrality_residual(u, qp) < 1e-1


# ------------------------------------------------------------- find_cc


def test_find_two_body_from_any_seed(rng):
    u = newtonian(np.ones(2))
    for _ in range(5):
        rec = find_central_configuration(u, random_configuration(rng, 2, 2))
        assert rec.residual <= 1e-11
        assert np.abs(rec.distance_signature - np.sqrt(2.0)).max() <= 1e-10
        assert rec.u_value == pytest.approx(1.0 / np.sqrt(2.0), rel=1e-12)
        assert rec.lam == pytest.approx(-1.0 / np.sqrt(2.0), rel=1e-12)
        assert rec.lam < 0.0


def test_find_cc_collision_seed_rejected():
    u = newtonian(np.ones(3))
    seed = np.array([[0.0, 0.0], [1e-12, 0.0], [1.0, 1.0]])
    with pytest.raises(CollisionError):
        find_central_configuration(u, seed)


def test_record_invariants(rng):
    u = newtonian(np.array([1.0, 2.0, 3.0]))
    rec = find_central_configuration(u, random_configuration(rng, 3, 2, u.masses))
    assert abs(rec.lam + u.alpha * rec.u_value) <= 1e-9
    # multiplier two routes: pairing and gradient norm
    g = u.mass_gradient(rec.q)
    lam_pairing = mass_inner(g, rec.q, u.masses)
    lam_norm = -mass_norm(g, u.masses)
    assert abs(lam_pairing - lam_norm) <= 1e-10 * max(1.0, abs(lam_norm))


# -------------------------------------------------------------- census


def test_census_two_body():
    u = newtonian(np.ones(2))
    recs = census(u, 2, SolverConfig(n_starts=30, rng_seed=5))
    assert len(recs) == 1


def test_census_three_equal_masses_planar(census_bank):
    u, recs = census_bank.get(3, 2, "equal", n_starts=200)
    assert len(recs) == 5
    values = sorted(r.u_value for r in recs)
    assert values[0] == pytest.approx(3.0, rel=1e-10)
    assert values[1] == pytest.approx(3.0, rel=1e-10)
    for v in values[2:]:
        assert v == pytest.approx(2.5 * np.sqrt(2.0), rel=1e-10)
    # the two lowest-value classes are mirror images: same signature, different class
    eq = [r for r in recs if abs(r.u_value - 3.0) < 1e-6]
    assert not same_class(eq[0].q, eq[1].q, u.masses)


def test_census_three_bodies_spatial_all_planar(census_bank):
    u, recs = census_bank.get(3, 3, "equal", n_starts=60)
    values = sorted({round(r.u_value, 8) for r in recs})
    assert values == [3.0, round(2.5 * np.sqrt(2.0), 8)]


def test_census_deterministic():
    u = newtonian(np.ones(3))
    cfg = SolverConfig(n_starts=40, rng_seed=99)
    a = census(u, 2, cfg)
    b = census(u, 2, cfg)
    assert len(a) == len(b)
    for ra, rb in zip(a, b):
        assert np.array_equal(ra.q, rb.q)
        assert ra.u_value == rb.u_value and ra.multiplicity == rb.multiplicity


# ---------------------------------------------------- projection check


def test_projection_inequality_random(rng):
    for _ in range(200):
        n = int(rng.integers(2, 7))
        u = random_potential(rng, n, kind="newtonian")
        q = random_configuration(rng, n, 3, u.masses)
        frame = np.linalg.qr(rng.standard_normal((3, 2)))[0]
        j, value, map_value = projection_inequality(u, q, frame)
        assert value <= 1e-12
        assert map_value >= -1e-12
        proj = q @ frame
        if np.linalg.norm(proj, axis=1).max() > 0:
            assert np.linalg.norm(proj[j]) > 0


def test_projection_inequality_orthogonal_configuration():
    u = newtonian(np.ones(2))
    q = np.array([[0.0, 0.0, 0.5], [0.0, 0.0, -0.5]])
    frame = np.eye(3)[:, :2]
    j, value, map_value = projection_inequality(u, q, frame)
    assert value == 0.0 and map_value == 0.0


def test_projection_inequality_needs_positive_kappa():
    u = charged([2.0, 2.0, 2.0])
    with pytest.raises(DomainError):
        projection_inequality(u, equilateral(), np.eye(2))


# -------------------------------------------------------- quotient lift


def test_quotient_lift_at_fixed_point():
    u = newtonian(np.ones(3))
    g, is_id = quotient_lift_check(u, equilateral(), tol=1e-9)
    assert is_id and np.abs(g - np.eye(2)).max() <= 1e-10


def test_quotient_lift_rotated_two_body():
    u = newtonian(np.ones(2))
    q = TWO_BODY @ rotation_matrix(2, np.pi / 6.0).T
    g, is_id = quotient_lift_check(u, q, tol=1e-9)
    assert is_id


def test_quotient_lift_rejects_non_fixed(rng):
    u = newtonian(np.ones(4))
    q = random_configuration(rng, 4, 3)
    with pytest.raises(DomainError):
        quotient_lift_check(u, q, tol=1e-9)


# -------------------------------------------------------- equivariance


def test_equivariance_identity(rng):
    u = newtonian(np.ones(3))
    q = random_configuration(rng, 3, 2)
    assert equivariance_defect(u, q) == 0.0


def test_equivariance_random(rng):
    u = newtonian(np.ones(4))
    for _ in range(50):
        q = random_configuration(rng, 4, 3)
        rot = random_rotation(3, rng)
        perm = rng.permutation(4)
        assert equivariance_defect(u, q, rotation=rot, perm=perm) <= 1e-12


def test_equivariance_rejects_mass_breaking_permutation(rng):
    u = newtonian(np.array([1.0, 2.0, 3.0]))
    q = random_configuration(rng, 3, 2, u.masses)
    with pytest.raises(SymmetryError):
        equivariance_defect(u, q, perm=[1, 0, 2])
