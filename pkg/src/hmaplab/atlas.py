r"""Closed-form test corpus: harmonic maps, variation families, Jacobi fields
and designed non-examples.

Every case provides constructors that evaluate the map in jet arithmetic at
arbitrary base points of either domain chart, so the same closed form feeds
grid evaluation, overlap-band cross-checks and t-jet families.  Cases carry a
property manifest (harmonic / conformal / real isotropic / complex isotropic /
holomorphic); a True entry is asserted to vanish by the verification suite, a
False entry is a designed control asserted to exceed a floor, None means not
applicable.

The corpus:

* ``identity-s2``          round sphere identity, embedded model;
* ``veronese-s4``          the classical degree-2 minimal immersion of the
                           sphere in S^4 (fully real isotropic);
* ``rational-d*-cp1/cp2``  holomorphic maps given by polynomial coefficient
                           matrices in homogeneous coordinates;
* ``veronese-cp2-mid``     the Gauss transform of the Veronese curve, the
                           standard harmonic non-holomorphic map to CP^2;
* ``nonharmonic-flat``     w = z + 0.1 z^2 zbar into flat R^2 (tension 0.2 z);
* ``nonconformal-flat``    (Re z^2, Im z^2 + 0.3 Re z), harmonic but not
                           conformal;
* ``nonisotropic-s2``      a generic smooth sphere map used as the curved
                           non-isotropic control and for chart-transition
                           consistency of nonvanishing differentials.

Families are tagged ``jacobi`` (variations through harmonic maps),
``non-jacobi`` (designed failures) or ``reparametrization`` (domain flows,
also through harmonic maps when the base is harmonic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import expm

from .jets import (Jet, JetOrder, d_dz, jadd, jet_conjugate, jet_const,
                   jet_exp, jet_mul, jet_pow, jet_reciprocal, jet_scale,
                   jet_tvar, jet_variable, jmul, jsub, truncate)
from .pullback import FLAT_CHART, NORTH, SOUTH, DomainChart, MapGerm
from .targets import (ComplexSpaceFormFS, Flat, SpaceFormEmbedded,
                      embed_project)

CHARTS = {"north": NORTH, "south": SOUTH, "flat": FLAT_CHART}


def _one(cj: Jet) -> Jet:
    return jet_const(np.ones(cj.batch_shape), cj.order, cj.base)


def sphere_chart_jets(chart: str, cj: Jet) -> list:
    """Unit-sphere coordinates (s1, s2, s3) of a domain chart point, as jets.

    North: s = (z + zb, -i(z - zb), 1 - z zb) / (1 + z zb);
    south (w = 1/z): s = (w + wb, i(w - wb), w wb - 1) / (1 + w wb).
    """
    cb = jet_conjugate(cj)
    q = jadd(_one(cj), jmul(cj, cb))
    r = jet_reciprocal(q)
    if chart == "north":
        s1 = jmul(jadd(cj, cb), r)
        s2 = jet_scale(jmul(jsub(cj, cb), r), -1j)
        s3 = jmul(jsub(_one(cj), jmul(cj, cb)), r)
    elif chart == "south":
        s1 = jmul(jadd(cj, cb), r)
        s2 = jet_scale(jmul(jsub(cj, cb), r), 1j)
        s3 = jmul(jsub(jmul(cj, cb), _one(cj)), r)
    else:
        raise ValueError(f"no sphere coordinates on chart {chart!r}")
    return [s1, s2, s3]


@dataclass
class Family:
    """One-parameter variation of a case map."""

    name: str
    tag: str  # jacobi | non-jacobi | reparametrization
    builder: Callable  # (chart, coord_jet, t) -> component jets; t Jet or float

    def components(self, chart: str, cj: Jet, t):
        return self.builder(chart, cj, t)


@dataclass
class AtlasCase:
    """A map with its geometry model, manifest and attached families."""

    name: str
    target: object
    manifest: dict
    builder: Callable  # (chart, coord_jet) -> component jets
    families: list = dc_field(default_factory=list)
    flat_domain: bool = False
    excluded: dict = dc_field(default_factory=dict)  # chart -> domain points
    chart_margin: float = 0.03
    homog_builder: Optional[Callable] = None  # projective cases only
    coeff_matrix: Optional[np.ndarray] = None
    gauss: bool = False
    extra_order: int = 0  # constructor differentiates internally (Gauss transform)

    def charts(self):
        return ["flat"] if self.flat_domain else ["north", "south"]

    def _build_order(self, order: JetOrder) -> JetOrder:
        if self.extra_order == 0:
            return order
        return JetOrder(order.z + self.extra_order,
                        order.zbar + self.extra_order, order.t)

    def _finish(self, comps: list, order: JetOrder) -> list:
        if self.extra_order == 0:
            return comps
        return [truncate(c, order) for c in comps]

    def germ(self, chart: str, values, order: JetOrder) -> MapGerm:
        cj = jet_variable(values, self._build_order(order))
        comps = self._finish(self.builder(chart, cj), order)
        return MapGerm(self.target, CHARTS[chart],
                       jet_variable(values, order), comps)

    def family_germ(self, family: Family, chart: str, values,
                    order: JetOrder) -> MapGerm:
        if order.t < 1:
            raise ValueError("family germs need t-order >= 1")
        bo = self._build_order(order)
        cj = jet_variable(values, bo)
        tj = jet_tvar(np.asarray(values, dtype=complex), bo, np.shape(values))
        comps = self._finish(family.components(chart, cj, tj), order)
        return MapGerm(self.target, CHARTS[chart],
                       jet_variable(values, order), comps)

    def family_map_at(self, family: Family, chart: str, values,
                      order: JetOrder, t: float) -> MapGerm:
        bo = self._build_order(order)
        cj = jet_variable(values, bo)
        comps = self._finish(family.components(chart, cj, float(t)), order)
        return MapGerm(self.target, CHARTS[chart],
                       jet_variable(values, order), comps)

    def check_margin(self, chart: str, values) -> Optional[complex]:
        """First node closer to the excluded locus than the margin, if any."""
        pts = self.excluded.get(chart, [])
        values = np.asarray(values)
        for p in pts:
            d = np.abs(values - p)
            bad = d < self.chart_margin
            if np.any(bad):
                return complex(values[bad][0])
        return None


# ---------------------------------------------------------------------------
# family builders
# ---------------------------------------------------------------------------

def _t_terms(tj, n_terms: int):
    """[1, t, t^2/2, ...] as jets (or floats when t is a number)."""
    if isinstance(tj, Jet):
        out = [jet_const(np.ones(tj.batch_shape), tj.order, tj.base)]
        power = None
        fac = 1.0
        for k in range(1, n_terms):
            power = tj if power is None else jet_mul(power, tj)
            fac /= k
            out.append(jet_scale(power, fac))
        return out
    return [tj ** k / math.factorial(k) for k in range(n_terms)]


def matrix_flow(mat: np.ndarray, comps: list, tj) -> list:
    """Apply the flow exp(t A) of a constant generator to component jets.

    For jet-valued t the exponential is truncated at the jet's t-order; for a
    numeric t the exact matrix exponential is used.
    """
    n = len(comps)
    if isinstance(tj, Jet):
        depth = tj.order.t + 1
        mats = [np.eye(n, dtype=complex)]
        for _ in range(depth - 1):
            mats.append(mats[-1] @ mat)
        terms = _t_terms(tj, depth)
        out = []
        for i in range(n):
            acc = None
            for k, tk in enumerate(terms):
                row = mats[k][i]
                lin = None
                for j in range(n):
                    if row[j] == 0:
                        continue
                    term = jet_scale(comps[j], row[j])
                    lin = term if lin is None else jadd(lin, term)
                if lin is None:
                    continue
                piece = lin if k == 0 else jmul(tk, lin)
                acc = piece if acc is None else jadd(acc, piece)
            out.append(acc)
        return out
    flow = expm(float(tj) * mat)
    return [_lincomb(flow[i], comps) for i in range(n)]


def _lincomb(row, comps):
    acc = None
    for a, c in zip(row, comps):
        if a == 0:
            continue
        term = jet_scale(c, a)
        acc = term if acc is None else jadd(acc, term)
    if acc is None:
        acc = jet_scale(comps[0], 0.0)
    return acc


def mobius_shift(chart: str, cj: Jet, t, gen: tuple) -> Jet:
    """Coordinate jet of the reparametrized point for generator q(z) = a + b z + c z^2.

    In the north chart z_t = z + t q(z); the matching south expression is
    w_t = w^2 / (w + t (a w^2 + b w + c)).
    """
    a, b, c = gen
    if chart in ("north", "flat"):
        q = jadd(jet_scale(_one(cj), a),
                 jadd(jet_scale(cj, b), jet_scale(jmul(cj, cj), c)))
        shift = jmul(t, q) if isinstance(t, Jet) else jet_scale(q, t)
        return jadd(cj, shift)
    if chart == "south":
        poly = jadd(jet_scale(jmul(cj, cj), a),
                    jadd(jet_scale(cj, b), jet_scale(_one(cj), c)))
        shift = jmul(t, poly) if isinstance(t, Jet) else jet_scale(poly, t)
        denom = jadd(cj, shift)
        return jmul(jmul(cj, cj), jet_reciprocal(denom))
    raise ValueError(chart)


def reparam_family(case_builder: Callable, gen=(0.2, 0.05 + 0.1j, -0.15)) -> Family:
    def build(chart, cj, t):
        return case_builder(chart, mobius_shift(chart, cj, t, gen))
    return Family("reparam", "reparametrization", build)


# ---------------------------------------------------------------------------
# sphere-target cases
# ---------------------------------------------------------------------------

def _identity_builder(chart, cj):
    return sphere_chart_jets(chart, cj)


def _veronese_psi(s: list) -> list:
    s1, s2, s3 = s
    r3 = np.sqrt(3.0)
    return [
        jet_scale(jmul(s1, s2), r3),
        jet_scale(jmul(s1, s3), r3),
        jet_scale(jmul(s2, s3), r3),
        jet_scale(jsub(jmul(s1, s1), jmul(s2, s2)), r3 / 2.0),
        jet_scale(jsub(jadd(jmul(s1, s1), jmul(s2, s2)),
                       jet_scale(jmul(s3, s3), 2.0)), 0.5),
    ]


def _veronese_builder(chart, cj):
    return _veronese_psi(sphere_chart_jets(chart, cj))


def _sphere_isometry_family(case_builder, mat, name) -> Family:
    def build(chart, cj, t):
        return matrix_flow(mat, case_builder(chart, cj), t)
    return Family(name, "jacobi", build)


def _bump_jet(chart, cj, peak=(0.6, 0.48, 0.64), sharp=4.0) -> Jet:
    """Smooth bump exp(k (s . p - 1)) peaked at the unit vector p."""
    s = sphere_chart_jets(chart, cj)
    acc = None
    for si, pi in zip(s, peak):
        term = jet_scale(si, pi)
        acc = term if acc is None else jadd(acc, term)
    acc = jsub(acc, _one(cj))
    return jet_exp(jet_scale(acc, sharp))


def _veronese_bump_family(model) -> Family:
    direction = np.array([1.0, -0.3, 0.2, 0.5, -0.1])

    def build(chart, cj, t):
        psi = _veronese_builder(chart, cj)
        b = _bump_jet(chart, cj)
        shift = [jet_scale(b, d) for d in direction]
        if isinstance(t, Jet):
            shifted = [jadd(p, jmul(t, s)) for p, s in zip(psi, shift)]
        else:
            shifted = [jadd(p, jet_scale(s, t)) for p, s in zip(psi, shift)]
        return embed_project(model, shifted)

    return Family("bump", "non-jacobi", build)


def _so3_generator():
    a = np.zeros((3, 3))
    a[0, 1], a[1, 0] = -1.0, 1.0
    return a


def _so3_generator_2():
    a = np.zeros((3, 3))
    a[1, 2], a[2, 1] = -1.0, 1.0
    a[0, 2], a[2, 0] = 0.5, -0.5
    return a


def _so5_generator():
    a = np.zeros((5, 5))
    a[0, 1], a[1, 0] = -1.0, 1.0
    a[2, 3], a[3, 2] = 0.7, -0.7
    return a


def _so5_generator_2():
    a = np.zeros((5, 5))
    a[0, 4], a[4, 0] = -0.8, 0.8
    a[1, 2], a[2, 1] = -0.5, 0.5
    a[3, 4], a[4, 3] = 0.3, -0.3
    return a


def make_identity_s2() -> AtlasCase:
    model = SpaceFormEmbedded(3, 1.0)
    case = AtlasCase(
        "identity-s2", model,
        manifest=dict(harmonic=True, conformal=True, real_isotropic=True,
                      complex_isotropic=None, holomorphic=None),
        builder=_identity_builder)
    case.families = [
        _sphere_isometry_family(_identity_builder, _so3_generator(), "rot-e3"),
        _sphere_isometry_family(_identity_builder, _so3_generator_2(), "rot-mixed"),
        reparam_family(_identity_builder),
    ]
    return case


def make_veronese_s4() -> AtlasCase:
    model = SpaceFormEmbedded(5, 1.0)
    case = AtlasCase(
        "veronese-s4", model,
        manifest=dict(harmonic=True, conformal=True, real_isotropic=True,
                      complex_isotropic=None, holomorphic=None),
        builder=_veronese_builder)
    case.families = [
        _sphere_isometry_family(_veronese_builder, _so5_generator(), "iso-a"),
        _sphere_isometry_family(_veronese_builder, _so5_generator_2(), "iso-b"),
        reparam_family(_veronese_builder),
        _veronese_bump_family(model),
    ]
    return case


def _nonisotropic_builder(chart, cj):
    model = SpaceFormEmbedded(5, 1.0)
    s1, s2, s3 = sphere_chart_jets(chart, cj)
    comps = [
        jadd(s1, jet_scale(jmul(s2, s2), 0.4)),
        s2,
        jsub(s3, jet_scale(jmul(s1, s2), 0.3)),
        jadd(jet_scale(_one(cj), 0.25), jet_scale(jmul(s1, s3), 0.2)),
        jet_scale(jmul(s2, s3), 0.1),
    ]
    return embed_project(model, comps)


def make_nonisotropic_s2() -> AtlasCase:
    model = SpaceFormEmbedded(5, 1.0)
    case = AtlasCase(
        "nonisotropic-s2", model,
        manifest=dict(harmonic=False, conformal=False, real_isotropic=False,
                      complex_isotropic=None, holomorphic=None),
        builder=_nonisotropic_builder)
    case.families = [reparam_family(_nonisotropic_builder)]
    return case


# ---------------------------------------------------------------------------
# projective cases
# ---------------------------------------------------------------------------

def _homog_jets(coeffs: np.ndarray, chart: str, cj: Jet, extra=None, t=None) -> list:
    """Homogeneous components of a polynomial curve in either domain chart.

    North: F_a(z) = sum_d coeffs[a, d] z^d; south (w = 1/z): the reversed
    polynomials F_a(1/w) w^D, so no reciprocal jets are needed.  ``extra``
    optionally adds t * (same construction from another matrix).
    """
    deg = coeffs.shape[1] - 1
    powers = [_one(cj)]
    for _ in range(deg):
        powers.append(jmul(powers[-1], cj))

    def poly(matrix_row):
        acc = None
        for d, a in enumerate(matrix_row):
            if a == 0:
                continue
            p = powers[d] if chart == "north" else powers[deg - d]
            term = jet_scale(p, a)
            acc = term if acc is None else jadd(acc, term)
        if acc is None:
            acc = jet_scale(powers[0], 0.0)
        return acc

    out = [poly(coeffs[a]) for a in range(coeffs.shape[0])]
    if extra is not None:
        pert = [poly(extra[a]) for a in range(extra.shape[0])]
        if isinstance(t, Jet):
            out = [jadd(f, jmul(t, p)) for f, p in zip(out, pert)]
        else:
            out = [jadd(f, jet_scale(p, t)) for f, p in zip(out, pert)]
    return out


def _affine(homog: list) -> list:
    f0inv = jet_reciprocal(homog[0])
    return [jmul(f, f0inv) for f in homog[1:]]


def _gauss_transform(homog: list) -> list:
    """First associated curve: G = dF - (<dF, F>_H / |F|^2) F, in jets."""
    dF = [d_dz(f) for f in homog]
    conjF = [jet_conjugate(f) for f in homog]
    num = None
    den = None
    for df, f, cf in zip(dF, homog, conjF):
        tn = jmul(df, cf)
        td = jmul(f, cf)
        num = tn if num is None else jadd(num, tn)
        den = td if den is None else jadd(den, td)
    lam = jmul(num, jet_reciprocal(den))
    return [jsub(df, jmul(lam, f)) for df, f in zip(dF, homog)]


def _su_generator(n: int, which: int = 0) -> np.ndarray:
    if n == 2:
        if which == 0:
            return np.diag([1j, -1j])
        return np.array([[0.2j, 0.5 + 0.1j], [-0.5 + 0.1j, -0.2j]])
    mats = [
        np.array([[1j, 0, 0], [0, -1j, 0], [0, 0, 0.5j]]),
        np.array([[0, 0.4 + 0.2j, 0], [-0.4 + 0.2j, 0, 0.3], [0, -0.3, 0]],
                 dtype=complex),
    ]
    return mats[which % len(mats)]


def _projective_case(name: str, coeffs: np.ndarray, n: int,
                     coefficient_direction: Optional[np.ndarray],
                     gauss: bool = False,
                     holomorphic: bool = True) -> AtlasCase:
    coeffs = np.asarray(coeffs, dtype=complex)
    model = ComplexSpaceFormFS(n)

    def homog_builder(chart, cj, t=None, direction=None):
        homog = _homog_jets(coeffs, chart, cj, extra=direction, t=t)
        if gauss:
            homog = _gauss_transform(homog)
        return homog

    case = AtlasCase(
        name, model,
        manifest=dict(harmonic=True, conformal=True, real_isotropic=True,
                      complex_isotropic=True, holomorphic=holomorphic),
        builder=lambda chart, cj: _affine(homog_builder(chart, cj)),
        excluded=_excluded_points(coeffs, gauss),
        homog_builder=homog_builder,
        coeff_matrix=coeffs,
        gauss=gauss,
        extra_order=1 if gauss else 0)

    case.families.append(
        make_isometry_variation(case, _su_generator(n + 1, 0), "unitary"))
    if coefficient_direction is not None:
        case.families.append(make_coefficient_variation(
            case, np.asarray(coefficient_direction, dtype=complex)))
    case.families.append(reparam_family(case.builder))
    return case


def make_isometry_variation(case: AtlasCase, generator: np.ndarray,
                            name: str = "isometry") -> Family:
    """Family phi_t = (flow of a target Killing generator) o phi, tag jacobi.

    Spheres take a real skew matrix acting on the ambient space, projective
    targets a skew-Hermitian matrix acting on homogeneous coordinates.
    """
    generator = np.asarray(generator)
    if isinstance(case.target, SpaceFormEmbedded):
        if generator.shape != (case.target.ambient_dim,) * 2 \
                or np.max(np.abs(generator + generator.T)) > 1e-12 \
                or np.max(np.abs(generator.imag)) > 1e-12:
            raise ValueError("sphere isometry generator must be real skew")
        return _sphere_isometry_family(case.builder, generator.real, name)
    if isinstance(case.target, ComplexSpaceFormFS):
        m = case.target.n + 1
        if generator.shape != (m, m) \
                or np.max(np.abs(generator + generator.conj().T)) > 1e-12:
            raise ValueError("projective isometry generator must be skew-Hermitian")

        def build(chart, cj, t):
            return _affine(matrix_flow(generator, case.homog_builder(chart, cj), t))
        return Family(name, "jacobi", build)
    raise ValueError(f"no isometry flows for target {type(case.target).__name__}")


def make_coefficient_variation(case: AtlasCase, direction: np.ndarray,
                               name: str = "coefficient") -> Family:
    """Holomorphic perturbation of the defining coefficient matrix, tag jacobi."""
    if case.coeff_matrix is None:
        raise ValueError("coefficient variations need a rational-curve case")
    direction = np.asarray(direction, dtype=complex)
    if direction.shape != case.coeff_matrix.shape:
        raise ValueError("direction shape must match the coefficient matrix")

    def build(chart, cj, t):
        return _affine(case.homog_builder(chart, cj, t=t, direction=direction))
    return Family(name, "jacobi", build)


def _poly_roots(ascending) -> list:
    asc = np.trim_zeros(np.asarray(ascending, dtype=complex), "b")
    if asc.size <= 1:
        return []
    return [complex(r) for r in np.roots(asc[::-1])]


def _excluded_points(coeffs: np.ndarray, gauss: bool) -> dict:
    """Domain points mapping to the hyperplane at infinity of the affine chart.

    Ordinary polynomial curves leave the chart where F_0 vanishes: in the
    south chart the reversed polynomial always has the root w = 0 (the domain
    point at infinity).  The Gauss transform of the Veronese curve crosses
    the hyperplane exactly over the chart origin of either chart (from the
    closed form of the transform).
    """
    if gauss:
        return {"north": [0j], "south": [0j]}
    return {"north": _poly_roots(coeffs[0]),
            "south": _poly_roots(coeffs[0][::-1])}


def make_rational_map(name: str, coeffs, n: int, direction=None) -> AtlasCase:
    return _projective_case(name, np.asarray(coeffs, dtype=complex), n,
                            None if direction is None
                            else np.asarray(direction, dtype=complex))


def make_veronese_cp2_mid() -> AtlasCase:
    coeffs = np.array([[1, 0, 0], [0, np.sqrt(2.0), 0], [0, 0, 1]],
                      dtype=complex)
    direction = np.array([[0, 0.2, 0], [0.3, 0, 0.1], [0, -0.2, 0]],
                         dtype=complex)
    case = _projective_case("veronese-cp2-mid", coeffs, 2, direction,
                            gauss=True, holomorphic=False)
    return case


def _antiholomorphic_family(coeffs: np.ndarray, n: int) -> Family:
    """w_t = w + t conj(delta(z)) with delta = z^2: not harmonic to first order."""
    def build(chart, cj, t):
        homog = _homog_jets(coeffs, chart, cj)
        aff = _affine(homog)
        if chart == "north":
            delta = jmul(cj, cj)
        else:
            delta = jet_pow(jet_reciprocal(cj), 2)
        pert = jet_conjugate(delta)
        shift = jmul(t, pert) if isinstance(t, Jet) else jet_scale(pert, t)
        return [jadd(aff[0], shift)] + aff[1:]
    return Family("antiholomorphic", "non-jacobi", build)


# ---------------------------------------------------------------------------
# flat-target controls
# ---------------------------------------------------------------------------

def _flat_comps(w: Jet) -> list:
    wb = jet_conjugate(w)
    u = jet_scale(jadd(w, wb), 0.5)
    v = jet_scale(jsub(w, wb), -0.5j)
    return [u, v]


def _nonharmonic_flat_builder(chart, cj):
    # w = z + 0.1 z^2 zbar; tension residual d_zbar d_z w = 0.2 z
    w = jadd(cj, jet_scale(jmul(jmul(cj, cj), jet_conjugate(cj)), 0.1))
    return _flat_comps(w)


def make_nonharmonic_flat() -> AtlasCase:
    case = AtlasCase(
        "nonharmonic-flat", Flat(2),
        manifest=dict(harmonic=False, conformal=False, real_isotropic=None,
                      complex_isotropic=None, holomorphic=None),
        builder=_nonharmonic_flat_builder,
        flat_domain=True)

    def descent(chart, cj, t):
        # variation in the direction of the (bump-localized) tension field
        b = _disk_bump(cj)
        tau_dir = jet_scale(cj, 0.8)  # 4 * d_zbar d_z w, as a complex function
        w = jadd(cj, jet_scale(jmul(jmul(cj, cj), jet_conjugate(cj)), 0.1))
        pert = jmul(b, tau_dir)
        shift = jmul(t, pert) if isinstance(t, Jet) else jet_scale(pert, t)
        return _flat_comps(jadd(w, shift))

    case.families = [Family("tension-descent", "non-jacobi", descent)]
    return case


def _disk_bump(cj: Jet, radius: float = 1.5, power: int = 6) -> Jet:
    """(1 - |z|^2/R^2)^power, vanishing to high order on the disk boundary."""
    u = jsub(_one(cj), jet_scale(jmul(cj, jet_conjugate(cj)), 1.0 / radius ** 2))
    return jet_pow(u, power)


def _nonconformal_flat_builder(chart, cj):
    # (Re z^2, Im z^2 + 0.3 Re z): harmonic components, not conformal
    z2 = jmul(cj, cj)
    z2b = jet_conjugate(z2)
    u = jet_scale(jadd(z2, z2b), 0.5)
    v = jadd(jet_scale(jsub(z2, z2b), -0.5j),
             jet_scale(jadd(cj, jet_conjugate(cj)), 0.15))
    return [u, v]


def make_nonconformal_flat() -> AtlasCase:
    case = AtlasCase(
        "nonconformal-flat", Flat(2),
        manifest=dict(harmonic=True, conformal=False, real_isotropic=False,
                      complex_isotropic=None, holomorphic=None),
        builder=_nonconformal_flat_builder,
        flat_domain=True)

    def harmonic_dir(chart, cj, t):
        base = _nonconformal_flat_builder(chart, cj)
        z3 = jmul(jmul(cj, cj), cj)
        pert = _flat_comps(jet_scale(z3, 0.4))
        if isinstance(t, Jet):
            return [jadd(b, jmul(t, p)) for b, p in zip(base, pert)]
        return [jadd(b, jet_scale(p, t)) for b, p in zip(base, pert)]

    case.families = [Family("harmonic-direction", "jacobi", harmonic_dir)]
    return case


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def make_negative_controls() -> list:
    """The designed non-examples: (case, family-or-None) pairs.

    (a) a bump-localized non-Jacobi field along the Veronese map,
    (b) the non-harmonic flat-target map with tension 0.2 z,
    (c) the harmonic but non-conformal flat-target map.
    """
    cases = atlas_cases()
    ver = cases["veronese-s4"]
    bump = next(f for f in ver.families if f.tag == "non-jacobi")
    return [(ver, bump),
            (cases["nonharmonic-flat"], None),
            (cases["nonconformal-flat"], None)]


def atlas_cases() -> dict:
    """All atlas cases by name (constructed fresh)."""
    d2cp1 = make_rational_map(
        "rational-d2-cp1", [[1, 0, 0], [0, 0, 1]], 1,
        direction=[[0, 0, 0], [1, 0, 0]])
    d2cp1.families.append(_antiholomorphic_family(
        np.array([[1, 0, 0], [0, 0, 1]], dtype=complex), 1))
    cases = [
        make_identity_s2(),
        make_veronese_s4(),
        make_rational_map("rational-d1-cp1", [[1, 0], [0, 1]], 1,
                          direction=[[0, 0], [1, 0.2]]),
        d2cp1,
        make_rational_map("rational-d3-cp1", [[1, 0, 0, 0], [0, 0, 0, 1]], 1,
                          direction=[[0, 0, 0, 0], [0.5, 0, 1, 0]]),
        make_rational_map("rational-d2-cp2",
                          [[1, 0, 0], [0, np.sqrt(2.0), 0], [0, 0, 1]], 2,
                          direction=[[0, 0, 0], [1, 0, 0], [0, 0.5, 0]]),
        make_rational_map("rational-d3-cp2",
                          [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1]], 2,
                          direction=[[0, 0, 0, 0], [0, 0, 1, 0], [0.3, 0, 0, 0]]),
        make_veronese_cp2_mid(),
        make_nonharmonic_flat(),
        make_nonconformal_flat(),
        make_nonisotropic_s2(),
    ]
    return {c.name: c for c in cases}
