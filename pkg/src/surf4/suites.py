"""Named property suites behind ``surf4 verify`` and the acceptance tests.

Each suite returns a list of CheckRow records; a suite passes when every
row does.  All randomness is seeded so identical invocations produce
identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr, frames, grassmann, lagrangian
from .expr import SurfaceDef, parse_surface
from .grassmann import (
    C_SWAP,
    BETA_TARGET,
    PluckerPoint,
    blaschke_check,
    graph_plane,
    isosup_residuals,
    klein_from_plucker,
    lift_so4,
    planes_isoclinic,
    plucker_from_pair,
    rotation_from_alpha,
    xy_plane,
)

SEED = 20240614


@dataclass
class CheckRow:
    suite: str
    name: str
    value: float
    threshold: float
    passed: bool


def _row(suite, name, value, threshold, better="below"):
    value = float(value)
    ok = value < threshold if better == "below" else value > threshold
    return CheckRow(suite, name, value, threshold, ok)


def _random_so4(rng):
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_polynomial_surface(rng, degree=3, scale=0.5):
    """SurfaceDef with random polynomial phi, psi of the given degree."""
    def coeffs():
        return {(i, j): scale * rng.uniform(-1.0, 1.0)
                for i in range(degree + 1) for j in range(degree + 1 - i)}

    return SurfaceDef(phi=expr.polynomial(coeffs()),
                      psi=expr.polynomial(coeffs()))


def random_gradient_surface(rng, degree=4, scale=0.4):
    """phi = dF/dx, psi = dF/dy for a random polynomial F (Lagrangean)."""
    f = {(i, j): scale * rng.uniform(-1.0, 1.0)
         for i in range(degree + 1) for j in range(degree + 1 - i)
         if i + j >= 2}
    phi = {(i - 1, j): i * c for (i, j), c in f.items() if i > 0}
    psi = {(i, j - 1): j * c for (i, j), c in f.items() if j > 0}
    return SurfaceDef(phi=expr.polynomial(phi), psi=expr.polynomial(psi))


EXAMPLE1_TEXT = """\
phi = x^2 - y^2
psi = a*x + b*y - 2*x*y
param a = 1
param b = 2
"""

RSURF_Z2_TEXT = """\
phi = x^2 - y^2
psi = 2*x*y
domain = [-0.5, 0.5] x [-0.5, 0.5]
"""

RSURF_Z3_TEXT = """\
phi = x^3 - 3*x*y^2
psi = 3*x^2*y - y^3
domain = [-0.5, 0.5] x [-0.5, 0.5]
"""


def suite_plucker(n_planes=1000):
    """Both quadric relations and unit Klein vectors on random planes."""
    rng = np.random.default_rng(SEED)
    worst_sphere = worst_quadric = worst_unit = 0.0
    for _ in range(n_planes):
        point = plucker_from_pair(rng.normal(size=4), rng.normal(size=4))
        worst_sphere = max(worst_sphere, point.sphere_residual())
        worst_quadric = max(worst_quadric, point.quadric_residual())
        klein = klein_from_plucker(point)
        worst_unit = max(worst_unit, abs(klein.a_norm - 1.0),
                         abs(klein.b_norm - 1.0))
    return [
        _row("plucker", f"sphere relation on {n_planes} planes",
             worst_sphere, 1e-12),
        _row("plucker", f"quadric relation on {n_planes} planes",
             worst_quadric, 1e-12),
        _row("plucker", "Klein vectors unit without renormalizing",
             worst_unit, 1e-10),
    ]


def suite_blaschke(n_surfaces=50, n_points=9):
    """Pullback identities and constant calibrated signs."""
    rng = np.random.default_rng(SEED + 1)
    grid = [(x, y) for x in (-0.3, 0.0, 0.3) for y in (-0.3, 0.0, 0.3)]
    worst = 0.0
    signs1, signs2 = set(), set()
    for _ in range(n_surfaces):
        sd = random_polynomial_surface(rng, degree=3)
        for pt in grid[:n_points]:
            result = blaschke_check(sd, pt, h=1e-4)
            worst = max(worst, result.residual1, result.residual2)
            if result.sign1:
                signs1.add(result.sign1)
            if result.sign2:
                signs2.add(result.sign2)
    rows = [
        _row("blaschke",
             f"| |t_i| - |K +- kappa| sqrt(W) | on {n_surfaces} surfaces x "
             f"{n_points} points", worst, 1e-5),
        _row("blaschke", "calibrated sign of the a-factor identity constant",
             float(len(signs1)), 1.5),
        _row("blaschke", "calibrated sign of the b-factor identity constant",
             float(len(signs2)), 1.5),
    ]
    # corollary: half-sum and half-difference reproduce K and kappa
    sd = parse_surface(EXAMPLE1_TEXT)
    eps1 = signs1.pop() if len(signs1) == 1 else 1.0
    eps2 = signs2.pop() if len(signs2) == 1 else 1.0
    worst_cor = 0.0
    for pt in grid:
        result = blaschke_check(sd, pt, h=1e-4)
        report = frames.curvature_report(sd, pt)
        mf = frames.monge_frame(sd, pt)
        sqw = np.sqrt(mf.W)
        k_est = 0.5 * (eps1 * result.t1 + eps2 * result.t2) / sqw
        kappa_est = 0.5 * (eps1 * result.t1 - eps2 * result.t2) / sqw
        worst_cor = max(worst_cor, abs(k_est - report.K),
                        abs(kappa_est - report.kappa))
    rows.append(_row(
        "blaschke", "corollary half-sum/half-difference gives K and kappa",
        worst_cor, 1e-5))
    return rows


def suite_wong(n_planes=200, n_swap=50):
    """Isoclinic machinery: Wong equivalence, swap map, algebraic tests."""
    rng = np.random.default_rng(SEED + 2)
    rows = []

    # Wong equivalence on suite surfaces
    tol = frames.ClassificationTolerances()
    mismatches = 0
    total = 0
    surfaces = [parse_surface(EXAMPLE1_TEXT), parse_surface(RSURF_Z2_TEXT)]
    surfaces += [random_polynomial_surface(rng, degree=3) for _ in range(10)]
    for sd in surfaces:
        for pt in lagrangian.grid_points(sd.domain, 5, 5):
            report = frames.curvature_report(sd, pt, tol=tol)
            wong_band = tol.wong * max(abs(report.K), abs(report.kappa), 1.0)
            predicted = min(abs(report.K - report.kappa),
                            abs(report.K + report.kappa)) <= wong_band
            exists = bool(report.isoclinic_dirs) or report.isoclinic_all
            mismatches += int(predicted != exists)
            total += 1
    rows.append(_row("wong", f"direction exists iff min|K -+ kappa| within "
                     f"band ({total} points)", float(mismatches), 0.5))

    # closedness of the isoclinic 1-form on K = kappa surfaces
    worst_closed = 0.0
    k_eq_kappa = [parse_surface(EXAMPLE1_TEXT),
                  random_gradient_surface(np.random.default_rng(SEED + 3))]
    for sd in k_eq_kappa:
        for pt in lagrangian.grid_points(sd.domain, 5, 5, shrink=0.4):
            worst_closed = max(
                worst_closed, frames.isoclinic_form_closedness(sd, pt))
    rows.append(_row("wong", "isoclinic 1-form closedness residual at 25 "
                     "points per K = kappa surface", worst_closed, 1e-4))

    # I+ = C I- under the lift of the coordinate swap
    lift_c = lift_so4(C_SWAP).m6
    worst_swap = 0.0
    for _ in range(n_swap):
        alpha = rng.normal(size=2)
        plane = plucker_from_pair(
            np.array([1.0, 0.0, alpha[0], alpha[1]]),
            np.array([0.0, 1.0, alpha[1], -alpha[0]]))
        image = PluckerPoint(lift_c @ plane.p)
        klein = klein_from_plucker(image)
        worst_swap = max(worst_swap, float(np.max(np.abs(
            klein.a_vec - np.array([1.0, 0.0, 0.0])))))
    rows.append(_row("wong", f"C maps the minus isocline set onto the plus "
                     f"set ({n_swap} planes)", worst_swap, 1e-10))

    # algebraic isoclinicity test agrees with the singular-value test
    base = xy_plane()
    disagreements = 0
    for k in range(n_planes):
        if k % 2 == 0:
            alpha = rng.normal(size=2)
            sign = 1.0 if k % 4 == 0 else -1.0
            beta = np.array([-sign * alpha[1], sign * alpha[0]])
        else:
            alpha, beta = rng.normal(size=2), rng.normal(size=2)
        algebraic = max(isosup_residuals(alpha, beta)) < 1e-8
        svd_test = planes_isoclinic(base, graph_plane(alpha, beta), tol=1e-8)
        disagreements += int(algebraic != svd_test)
    rows.append(_row("wong", f"algebraic vs singular-value isoclinic test "
                     f"({n_planes} planes)", float(disagreements), 0.5))
    return rows


def suite_lift(n_pairs=100, n_alphas=100):
    """Lift lemmas: homomorphism, orthogonality, equivariance, alpha map."""
    rng = np.random.default_rng(SEED + 4)
    worst_hom = worst_orth = worst_equi = 0.0
    for _ in range(n_pairs):
        a = _random_so4(rng)
        b = _random_so4(rng)
        la, lb = lift_so4(a).m6, lift_so4(b).m6
        lab = lift_so4(a @ b).m6
        worst_hom = max(worst_hom, float(np.max(np.abs(lab - la @ lb))))
        worst_orth = max(worst_orth, float(np.max(np.abs(
            la @ la.T - np.eye(6)))))
        v1, v2 = rng.normal(size=4), rng.normal(size=4)
        lhs = plucker_from_pair(a @ v1, a @ v2).p
        rhs = la @ plucker_from_pair(v1, v2).p
        worst_equi = max(worst_equi, float(np.max(np.abs(lhs - rhs))))
    worst_post = 0.0
    for _ in range(n_alphas):
        alpha = rng.normal(size=3)
        alpha /= np.linalg.norm(alpha)
        if alpha[0]**2 + alpha[1]**2 < 1e-12:
            continue
        rot = rotation_from_alpha(alpha)
        image = lift_so4(rot).m6 @ BETA_TARGET
        worst_post = max(worst_post, float(np.max(np.abs(
            image - np.concatenate([alpha, alpha])))))
    # the capped directions go through the documented pre-rotation
    for cap in (np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0])):
        rot = rotation_from_alpha(cap)
        image = lift_so4(rot).m6 @ BETA_TARGET
        worst_post = max(worst_post, float(np.max(np.abs(
            image - np.concatenate([cap, cap])))))
    return [
        _row("lift", f"homomorphism lift(AB) = lift(A) lift(B) "
             f"({n_pairs} pairs)", worst_hom, 1e-10),
        _row("lift", "lift orthogonality", worst_orth, 1e-10),
        _row("lift", "wedge equivariance on sampled vector pairs",
             worst_equi, 1e-10),
        _row("lift", f"alpha-rotation postcondition ({n_alphas} alphas "
             "plus caps)", worst_post, 1e-10),
    ]


def suite_lagrangean(n_surfaces=20):
    """Necessity and desk-scale sufficiency of the great-circle criterion."""
    rng = np.random.default_rng(SEED + 5)
    worst_b2 = worst_kk = worst_suff = 0.0
    factors = set()
    for _ in range(n_surfaces):
        sd = random_gradient_surface(rng)
        for pt in lagrangian.grid_points(sd.domain, 5, 5):
            _, klein = grassmann.gauss_map_at(sd, pt)
            worst_b2 = max(worst_b2, abs(float(klein.b_vec[1])))
            report = frames.curvature_report(sd, pt)
            worst_kk = max(worst_kk, abs(report.K - report.kappa))
        rotation = _random_so4(rng)
        rep = lagrangian.congruence_to_lagrangean(sd, pre_rotation=rotation)
        factors.add(rep.circle_factor)
        worst_suff = max(worst_suff, rep.symplectic_residual
                         if rep.matched_form != "none" else np.inf)
    return [
        _row("lagrangean", f"|b2| on Gauss samples of {n_surfaces} "
             "gradient graphs", worst_b2, 1e-10),
        _row("lagrangean", "K - kappa on gradient graphs", worst_kk, 1e-9),
        _row("lagrangean", "recovered symplectic residual after a random "
             "rotation", worst_suff, 1e-8),
        _row("lagrangean", "no rotated surface reported non-congruent",
             float("none" in factors), 0.5),
    ]


SUITES = {
    "plucker": suite_plucker,
    "blaschke": suite_blaschke,
    "wong": suite_wong,
    "lift": suite_lift,
    "lagrangean": suite_lagrangean,
}


def run_suites(names):
    rows = []
    for name in names:
        rows.extend(SUITES[name]())
    return rows
