r"""Energy, tension field, Jacobi operator and the linearization identity.

Sign conventions (fixed so that the linearization identity holds exactly for
flat targets, and recorded here once):

* curvature: R(X,Y)Z = [nabla_X, nabla_Y]Z - nabla_[X,Y]Z, so space forms
  have R(X,Y)Z = c(<Y,Z>X - <X,Z>Y);
* rough Laplacian with the geometer's sign, Delta = -trace nabla^2;
* the complex harmonicity residual is tau_c = D_zbar (d phi/dz), and the
  metric-normalized tension field is tau = 4 lambda^-2 tau_c;
* the complex Jacobi form is  Jc(v) = -D_zbar D_z v + R(phi_zbar, v) phi_z,
  its conjugate partner      Jc'(v) = -D_z D_zbar v + R(phi_z, v) phi_zbar,
  and J(v) = 2 lambda^-2 (Jc + Jc')(v); the two partners agree on any section
  by the first Bianchi identity.  With these choices
  Jc(v) = - (D/dt)|_0 tau_c(phi_t) for every variation tangent to v.

Quadrature: Gauss-Legendre in cos(theta) times uniform trapezoid in phi,
mapped to chart coordinates z = tan(theta/2) e^{i phi}; nodes never hit the
chart poles.  Accumulation is a single pairwise sum over the canonical node
order, which keeps reports bit-identical for any worker count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .jets import (Jet, JetOrder, d_dt, jadd, jet_extract, jet_mul,
                   jet_reciprocal, jet_scale, jet_variable, jmul, jsub,
                   t_slice)
from .pullback import (FLAT_CHART, NORTH, SOUTH, DomainChart, FieldGerm,
                       MapGerm, cov_D, curvature_field, field_add, field_norm,
                       field_scale, field_scale_jet, field_sub, field_values,
                       pairing, t_derivative)


class PreconditionError(RuntimeError):
    """An operation's mathematical hypothesis fails beyond tolerance."""


# ---------------------------------------------------------------------------
# quadrature grids
# ---------------------------------------------------------------------------

@dataclass
class NodeSet:
    """Batch of quadrature nodes living in one domain chart."""

    chart: DomainChart
    coords: np.ndarray    # complex chart coordinates
    weights: np.ndarray   # area weights (round measure)
    theta: np.ndarray
    phi: np.ndarray
    index: np.ndarray     # positions in the canonical node order


@dataclass
class QuadratureGrid:
    """Round-sphere product grid split by home chart, plus an overlap band."""

    n_theta: int
    n_phi: int
    north: NodeSet
    south: NodeSet
    band_north: np.ndarray  # north coordinates of overlap test points
    band_south: np.ndarray  # the same points in the south chart

    @property
    def n_nodes(self) -> int:
        return self.n_theta * self.n_phi

    @property
    def total_weight(self) -> float:
        w = np.zeros(self.n_nodes)
        w[self.north.index] = self.north.weights
        w[self.south.index] = self.south.weights
        return float(np.sum(w))

    def node_sets(self):
        return [s for s in (self.north, self.south) if s.coords.size]

    def canonical(self, per_set_values: list) -> np.ndarray:
        """Scatter per-node-set arrays into the canonical node order."""
        out = np.zeros(self.n_nodes, dtype=np.result_type(*[v.dtype for v in per_set_values]))
        for s, v in zip(self.node_sets(), per_set_values):
            out[s.index] = v
        return out


def build_grid(n_theta: int, n_phi: int, band: tuple = (0.75, 4.0 / 3.0)) -> QuadratureGrid:
    """Gauss-Legendre x trapezoid grid on the round sphere (total weight 4 pi)."""
    if n_theta < 8 or n_phi < 16:
        raise ValueError("resolution below the supported minimum 8x16")
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    wphi = 2.0 * np.pi / n_phi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    ww = np.repeat(wx * wphi, n_phi)
    zz = np.tan(tt / 2.0) * np.exp(1j * pp)
    flat_z = zz.reshape(-1)
    flat_t = tt.reshape(-1)
    flat_p = pp.reshape(-1)
    idx = np.arange(flat_z.size)
    north_mask = np.abs(flat_z) <= 1.0
    south_mask = ~north_mask

    def mk(chart, mask, coords):
        return NodeSet(chart, coords[mask], ww[mask], flat_t[mask],
                       flat_p[mask], idx[mask])

    north = mk(NORTH, north_mask, flat_z)
    with np.errstate(divide="ignore"):
        south_coords = np.where(flat_z == 0, np.inf, 1.0 / flat_z)
    south = mk(SOUTH, south_mask, south_coords)
    band_mask = (np.abs(flat_z) >= band[0]) & (np.abs(flat_z) <= band[1])
    band_north = flat_z[band_mask]
    return QuadratureGrid(n_theta, n_phi, north, south,
                          band_north, 1.0 / band_north)


@dataclass
class FlatDiskGrid:
    """Polar quadrature on a flat disk, for flat-domain-patch integrals."""

    radius: float
    coords: np.ndarray
    weights: np.ndarray


def build_disk_grid(radius: float = 1.5, n_r: int = 48, n_phi: int = 64) -> FlatDiskGrid:
    u, wu = np.polynomial.legendre.leggauss(n_r)
    u = 0.5 * (u + 1.0)       # map to (0, 1), u = (r/R)^2
    wu = 0.5 * wu
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    r = radius * np.sqrt(u)
    rr, pp = np.meshgrid(r, phi, indexing="ij")
    coords = (rr * np.exp(1j * pp)).reshape(-1)
    # area element r dr dphi = (R^2 / 2) du dphi
    w = np.repeat(wu * radius ** 2 / 2.0 * (2.0 * np.pi / n_phi), n_phi)
    return FlatDiskGrid(radius, coords, w)


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------

@dataclass
class EnergyReport:
    value: float
    densities: np.ndarray  # canonical node order
    t_derivative: Optional[np.ndarray] = None


def energy_density(germ: MapGerm) -> Jet:
    """e(phi) = 2 lambda^-2 <phi_z, phi_zbar> as a scalar jet."""
    lam2 = germ.chart.lambda_sq_jet(germ.coord)
    dens = pairing(germ.dmap("z"), germ.dmap("zbar"))
    return jet_scale(jmul(jet_reciprocal(lam2), dens), 2.0)


def energy(germs: list, grid: QuadratureGrid) -> EnergyReport:
    """E = 1/2 int |d phi|^2 over the round sphere by quadrature.

    ``germs`` holds one MapGerm per grid node set, in grid order.
    """
    per_set = [np.asarray(energy_density(g).value.real) for g in germs]
    dens = grid.canonical(per_set)
    w = grid.canonical([s.weights for s in grid.node_sets()])
    return EnergyReport(float(np.sum(w * dens)), dens)


def energy_t_jet(germs: list, grid: QuadratureGrid) -> EnergyReport:
    """Energy of a t-jet family: value at t=0 and dE/dt at t=0."""
    vals, dvals = [], []
    for g in germs:
        e = energy_density(g)
        vals.append(np.asarray(e.value.real))
        dvals.append(np.asarray(jet_extract(e, 0, 0, 1).real))
    w = grid.canonical([s.weights for s in grid.node_sets()])
    dens = grid.canonical(vals)
    ddens = grid.canonical(dvals)
    rep = EnergyReport(float(np.sum(w * dens)), dens, ddens)
    return rep


# ---------------------------------------------------------------------------
# tension and Jacobi forms
# ---------------------------------------------------------------------------

def tension_complex(germ: MapGerm) -> FieldGerm:
    """tau_c = D/dzbar of d phi/dz (zero exactly when phi is harmonic)."""
    if "tension_c" not in germ._cache:
        germ._cache["tension_c"] = cov_D("zbar", germ.dmap("z"))
    return germ._cache["tension_c"]


def tension_scale(germ: MapGerm) -> np.ndarray:
    """Cancellation envelope for the tension residual (per node).

    Splits tau_c into the plain mixed Wirtinger derivative and the connection
    correction; the sum of their norms is the magnitude the residual would
    have without cancellation.
    """
    from .jets import d_dzbar
    dz = germ.dmap("z")
    plain = FieldGerm(germ, dz.kind, [d_dzbar(j) for j in dz.jets])
    corr = field_sub(*_common_order(tension_complex(germ), plain))
    return field_norm(plain) + field_norm(corr)


def _common_order(a: FieldGerm, b: FieldGerm):
    from .jets import truncate
    jets = list(a.jets) + list(b.jets)
    target = JetOrder(min(j.order.z for j in jets),
                      min(j.order.zbar for j in jets),
                      min(j.order.t for j in jets))
    return (FieldGerm(a.germ, a.kind, [truncate(j, target) for j in a.jets]),
            FieldGerm(b.germ, b.kind, [truncate(j, target) for j in b.jets]))


def tension_real(germ: MapGerm) -> FieldGerm:
    """tau = trace of nabla d phi, assembled in the real chart.

    Uses tau = 2 lambda^-2 (D_z phi_zbar + D_zbar phi_z); for the round
    conformal charts the domain Christoffel contributions cancel in this
    combination.  Algebraically equal to 4 lambda^-2 tau_c, computed through
    the other mixed derivative as a cross-check route.
    """
    lam2 = germ.chart.lambda_sq_jet(germ.coord)
    mixed = field_add(cov_D("z", germ.dmap("zbar")),
                      cov_D("zbar", germ.dmap("z")))
    return field_scale_jet(mixed, jet_scale(jet_reciprocal(lam2), 2.0))


def tension_normalized(germ: MapGerm) -> FieldGerm:
    """tau = 4 lambda^-2 tau_c, the metric-normalized tension field."""
    lam2 = germ.chart.lambda_sq_jet(germ.coord)
    return field_scale_jet(tension_complex(germ),
                           jet_scale(jet_reciprocal(lam2), 4.0))


def jacobi_complex(germ: MapGerm, v: FieldGerm, conjugate_form: bool = False) -> FieldGerm:
    """Complex Jacobi form Jc(v) = -D_zbar D_z v + R(phi_zbar, v) phi_z.

    With ``conjugate_form`` the partner -D_z D_zbar v + R(phi_z, v) phi_zbar
    is returned; the two agree on real sections via the Bianchi identity.
    Jacobi fields are exactly the kernel: Jc(v) = 0.
    """
    d1, d2 = ("z", "zbar") if not conjugate_form else ("zbar", "z")
    dd = cov_D(d2, cov_D(d1, v))
    rterm = curvature_field(germ.dmap(d2), v, germ.dmap(d1))
    from .pullback import promote_to_full
    if rterm.kind != dd.kind:
        dd = promote_to_full(dd)
        rterm = promote_to_full(rterm)
    return field_sub(rterm, dd)


def jacobi_scale(germ: MapGerm, v: FieldGerm) -> np.ndarray:
    """Cancellation envelope for the Jacobi residual (per node)."""
    dd = cov_D("zbar", cov_D("z", v))
    rterm = curvature_field(germ.dmap("zbar"), v, germ.dmap("z"))
    return field_norm(dd) + field_norm(rterm)


def jacobi_real(germ: MapGerm, v: FieldGerm) -> FieldGerm:
    """J(v) = Delta v - trace R(d phi, v) d phi, as the normalized sum of the
    two complex forms (the intrinsic Laplacian is never formed directly)."""
    c1 = jacobi_complex(germ, v, conjugate_form=False)
    c2 = jacobi_complex(germ, v, conjugate_form=True)
    lam2 = germ.chart.lambda_sq_jet(germ.coord)
    return field_scale_jet(field_add(c1, c2),
                           jet_scale(jet_reciprocal(lam2), 2.0))


def harmonicity_residual(germ: MapGerm) -> np.ndarray:
    """Normalized per-node |tau_c|, the harmonicity certificate."""
    res = field_norm(tension_complex(germ))
    return res / (1.0 + tension_scale(germ))


def require_harmonic(germ: MapGerm, gate: float = 1e-8, what: str = "operation"):
    worst = float(np.max(harmonicity_residual(germ), initial=0.0))
    if worst > gate:
        raise PreconditionError(
            f"{what} requires a harmonic base map; "
            f"tension residual {worst:.3e} exceeds gate {gate:.1e}")


def linearized_tension(family: MapGerm, gate: float = 1e-8,
                       check_gate: bool = True) -> FieldGerm:
    """(D/dt)|_0 of tau_c(phi_t), the t-linearization of the tension residual.

    Equals -Jc(v) for the variation field v when the base map is harmonic,
    which is enforced up to ``gate`` unless ``check_gate`` is false.
    """
    if family.order.t < 1:
        raise ValueError("family germ carries no t direction")
    base, _v = t_derivative(family)
    if check_gate:
        require_harmonic(base, gate, "tension linearization")
    tau_t = tension_complex(family)
    dt_tau = cov_D("t", tau_t)
    return FieldGerm(base, dt_tau.kind, [t_slice(j, 0) for j in dt_tau.jets])


# ---------------------------------------------------------------------------
# integral functionals
# ---------------------------------------------------------------------------

def first_variation(family_germs: list, grid: QuadratureGrid):
    """Both sides of dE/dt|_0 = -int <tau, v>: returns (lhs, rhs).

    The left side is the t-derivative of the quadrature energy; the right
    side integrates the pairing of the normalized tension with the variation
    field, so the two routes are independent up to quadrature error.
    """
    from .pullback import real_section_from_part10
    rep = energy_t_jet(family_germs, grid)
    w_arr = grid.canonical([s.weights for s in grid.node_sets()])
    lhs = float(np.sum(w_arr * rep.t_derivative))
    vals = []
    for g in family_germs:
        base, v = t_derivative(g)
        tau = tension_normalized(base)
        vv = real_section_from_part10(v) if v.kind == "part10" else v
        vals.append(np.asarray(pairing(tau, vv).value.real))
    rhs = -float(np.sum(w_arr * grid.canonical(vals)))
    return lhs, rhs


@dataclass
class HessianValue:
    value: float
    integrand: np.ndarray


def hessian(germs: list, vs: list, ws: list, grid: QuadratureGrid,
            gate: float = 1e-8) -> HessianValue:
    """H(v, w) = int <J(v), w> over the sphere; requires a harmonic base."""
    from .pullback import real_section_from_part10
    vals = []
    for germ, v, w in zip(germs, vs, ws):
        require_harmonic(germ, gate, "Hessian")
        vv = real_section_from_part10(v) if v.kind == "part10" else v
        ww = real_section_from_part10(w) if w.kind == "part10" else w
        jv = jacobi_real(germ, vv)
        vals.append(np.asarray(pairing(jv, ww).value.real))
    w_arr = grid.canonical([s.weights for s in grid.node_sets()])
    integ = grid.canonical(vals)
    return HessianValue(float(np.sum(w_arr * integ)), integ)
