r"""Map germs, field germs and the pulled-back connection.

A ``MapGerm`` is a target-valued jet of a map at a (batched) domain point; a
``FieldGerm`` is a jet of a section of the complexified pullback bundle along
it.  The covariant derivative ``cov_D`` realizes the pulled-back Levi-Civita
connection:

* flat / chart targets: Wirtinger derivative plus Christoffel correction,
* embedded spheres: tangential projection,
* Kaehler charts: block action with pure-type coefficients, so the (1,0)
  part of a section can be differentiated on its own.

Field kinds
    ``vector``  component list in the chart/ambient frame (real targets),
    ``part10``  (1,0) components on a Kaehler target,
    ``part01``  (0,1) components on a Kaehler target,
    ``full``    both blocks, listed (1,0) first.

The domain is covered by two stereographic charts with transition w = 1/z;
``DomainChart`` carries the conformal factor of the round metric in each.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .jets import (Jet, JetOrder, align, d_dt, d_dz, d_dzbar, jadd, jdiv,
                   jet_conjugate, jet_const, jet_mul, jet_pow,
                   jet_reciprocal, jet_scale, jet_variable, jmul, jsub,
                   t_slice, truncate)
from .targets import (ComplexSpaceFormFS, Flat, GeneralChart, MetricValue,
                      SpaceFormChart, SpaceFormEmbedded, UnsupportedTargetError,
                      christoffels_at, is_kahler, metric_at)


@dataclass(frozen=True)
class DomainChart:
    """Stereographic chart of the round 2-sphere, or a flat patch."""

    name: str

    @property
    def is_round(self) -> bool:
        return self.name in ("north", "south")

    def lambda_sq_jet(self, coord: Jet) -> Jet:
        """Conformal factor lambda^2 of the domain metric as a jet."""
        if not self.is_round:
            return jet_const(np.ones(coord.batch_shape), coord.order, coord.base)
        q = jadd(jet_const(np.ones(coord.batch_shape), coord.order, coord.base),
                 jmul(coord, jet_conjugate(coord)))
        return jet_scale(jet_pow(jet_reciprocal(q), 2), 4.0)

    def lambda_sq(self, values) -> np.ndarray:
        values = np.asarray(values)
        if not self.is_round:
            return np.ones(values.shape)
        return 4.0 / (1.0 + np.abs(values) ** 2) ** 2


NORTH = DomainChart("north")
SOUTH = DomainChart("south")
FLAT_CHART = DomainChart("flat")


@dataclass
class MapGerm:
    """Target-valued jet of a map at the base points of ``coord``."""

    target: object
    chart: DomainChart
    coord: Jet
    jets: list
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> JetOrder:
        return self.jets[0].order

    @property
    def batch_shape(self):
        return self.jets[0].batch_shape

    def metric(self) -> MetricValue:
        if "metric" not in self._cache:
            self._cache["metric"] = metric_at(self.target, self.jets)
        return self._cache["metric"]

    def christoffels(self):
        if "christoffels" not in self._cache:
            self._cache["christoffels"] = christoffels_at(self.target, self.jets)
        return self._cache["christoffels"]

    def dmap(self, direction: str) -> "FieldGerm":
        key = f"dmap_{direction}"
        if key not in self._cache:
            self._cache[key] = _dmap(self, direction)
        return self._cache[key]

    def dmap10(self, direction: str) -> "FieldGerm":
        key = f"dmap10_{direction}"
        if key not in self._cache:
            deriv = {"z": d_dz, "zbar": d_dzbar, "t": d_dt}[direction]
            self._cache[key] = FieldGerm(self, "part10",
                                         [deriv(j) for j in self.jets])
        return self._cache[key]

    def iterated(self, k: int, flavor: str) -> list:
        """[W, D W, ..., D^{k-1} W] for W and chain direction set by flavor.

        flavor "cz": W = complexified d phi / dz, direction z;
        flavor "pz": W = (1,0) part d phi / dz, direction z (Kaehler);
        flavor "pzbar": W = (1,0) part d phi / dzbar, direction zbar.
        """
        key = f"iter_{flavor}"
        chain = self._cache.setdefault(key, [])
        if not chain:
            if flavor == "cz":
                first = self.dmap("z")
            elif flavor == "pz":
                first = self.dmap10("z")
            elif flavor == "pzbar":
                first = self.dmap10("zbar")
            else:
                raise ValueError(flavor)
            # magnitude shadows are tracked where the chart frame can
            # degenerate (large affine coordinates on a Kaehler chart)
            shadow = _abs_jets(first.jets) if is_kahler(self.target) else None
            chain.append(FieldGerm(self, first.kind, first.jets, shadow))
        direction = "zbar" if flavor == "pzbar" else "z"
        while len(chain) < k:
            chain.append(cov_D(direction, chain[-1]))
        return chain[:k]

    def constraint_residual(self) -> float:
        """Embedded spheres: max deviation of <phi, phi> from 1/c over low orders."""
        model = self.target
        if not isinstance(model, SpaceFormEmbedded):
            return 0.0
        s = None
        for j in self.jets:
            term = jmul(j, j)
            s = term if s is None else jadd(s, term)
        coeffs = s.coeffs.copy()
        coeffs[..., 0, 0, 0] -= 1.0 / model.curvature
        return float(np.max(np.abs(coeffs)))


@dataclass
class FieldGerm:
    """Jet of a section of the complexified pullback bundle along ``germ``.

    ``shadow``, when present, carries absolute-coefficient jets propagated
    through the same operations without cancellation; it is the magnitude
    envelope used to normalize residual tolerances.
    """

    germ: MapGerm
    kind: str  # vector | part10 | part01 | full
    jets: list
    shadow: Optional[list] = None

    @property
    def order(self) -> JetOrder:
        return self.jets[0].order

    def blocks(self):
        """((1,0) components, (0,1) components) on a Kaehler target."""
        n = len(self.germ.jets)
        if self.kind == "part10":
            return self.jets, None
        if self.kind == "part01":
            return None, self.jets
        if self.kind == "full":
            return self.jets[:n], self.jets[n:]
        raise UnsupportedTargetError("blocks only defined for Kaehler fields")


def _dmap(germ: MapGerm, direction: str) -> FieldGerm:
    deriv = {"z": d_dz, "zbar": d_dzbar, "t": d_dt}[direction]
    if is_kahler(germ.target):
        up = [deriv(j) for j in germ.jets]
        down = [deriv(jet_conjugate(j)) for j in germ.jets]
        return FieldGerm(germ, "full", up + down)
    return FieldGerm(germ, "vector", [deriv(j) for j in germ.jets])


def _conj_shadow(shadow) -> Optional[list]:
    if shadow is None:
        return None
    return [Jet(np.swapaxes(s.coeffs, -3, -2), s.base) for s in shadow]


def conj_field(V: FieldGerm) -> FieldGerm:
    cs = _conj_shadow(V.shadow)
    if V.kind == "vector":
        return FieldGerm(V.germ, "vector", [jet_conjugate(j) for j in V.jets], cs)
    if V.kind == "part10":
        return FieldGerm(V.germ, "part01", [jet_conjugate(j) for j in V.jets], cs)
    if V.kind == "part01":
        return FieldGerm(V.germ, "part10", [jet_conjugate(j) for j in V.jets], cs)
    up, down = V.blocks()
    n = len(up)
    shadow = None
    if cs is not None:
        shadow = cs[n:] + cs[:n]
    return FieldGerm(V.germ, "full",
                     [jet_conjugate(j) for j in down]
                     + [jet_conjugate(j) for j in up], shadow)


def real_section_from_part10(v10: FieldGerm) -> FieldGerm:
    """v = v' + conj(v') as a full complexified field."""
    shadow = None
    if v10.shadow is not None:
        shadow = list(v10.shadow) + _conj_shadow(v10.shadow)
    return FieldGerm(v10.germ, "full",
                     list(v10.jets) + [jet_conjugate(j) for j in v10.jets],
                     shadow)


def field_add(a: FieldGerm, b: FieldGerm) -> FieldGerm:
    assert a.kind == b.kind
    return FieldGerm(a.germ, a.kind, [jadd(x, y) for x, y in zip(a.jets, b.jets)])


def field_sub(a: FieldGerm, b: FieldGerm) -> FieldGerm:
    assert a.kind == b.kind
    return FieldGerm(a.germ, a.kind, [jsub(x, y) for x, y in zip(a.jets, b.jets)])


def field_scale(a: FieldGerm, s) -> FieldGerm:
    return FieldGerm(a.germ, a.kind, [jet_scale(j, s) for j in a.jets])


def field_scale_jet(a: FieldGerm, s: Jet) -> FieldGerm:
    return FieldGerm(a.germ, a.kind, [jmul(s, j) for j in a.jets])


def field_values(a: FieldGerm) -> np.ndarray:
    """Order-0 component values, stacked on the last axis."""
    return np.stack([j.value for j in a.jets], axis=-1)


# ---------------------------------------------------------------------------
# pairings
# ---------------------------------------------------------------------------

def pairing(a: FieldGerm, b: FieldGerm, kind: str = "bilinear") -> Jet:
    """Scalar jet <a, b> with the target metric along the germ.

    ``bilinear`` is the complex-bilinear extension of the target inner
    product; ``hermitian`` conjugates the second argument first.
    """
    if a.germ is not b.germ and a.germ.jets is not b.germ.jets:
        if not np.array_equal(a.jets[0].base, b.jets[0].base):
            raise ValueError("pairing of fields over different base germs")
    if kind == "hermitian":
        return pairing(a, conj_field(b), "bilinear")
    model = a.germ.target
    if isinstance(model, (Flat, SpaceFormEmbedded)):
        out = None
        for x, y in zip(a.jets, b.jets):
            term = jmul(x, y)
            out = term if out is None else jadd(out, term)
        return out
    if isinstance(model, (SpaceFormChart, GeneralChart)):
        g = a.germ.metric().comps
        out = None
        for i in range(len(a.jets)):
            for j in range(len(b.jets)):
                gij = g[i, j]
                if isinstance(model, SpaceFormChart) and i != j:
                    continue
                term = jmul(gij, jmul(a.jets[i], b.jets[j]))
                out = term if out is None else jadd(out, term)
        return out
    if isinstance(model, ComplexSpaceFormFS):
        h = a.germ.metric().comps
        aup, adown = a.blocks()
        bup, bdown = b.blocks()
        out = None
        for i in range(model.n):
            for j in range(model.n):
                hij = h[i, j]
                if aup is not None and bdown is not None:
                    term = jet_scale(jmul(hij, jmul(aup[i], bdown[j])), 0.5)
                    out = term if out is None else jadd(out, term)
                if bup is not None and adown is not None:
                    term = jet_scale(jmul(hij, jmul(bup[i], adown[j])), 0.5)
                    out = term if out is None else jadd(out, term)
        if out is None:
            z = jet_scale((aup or adown)[0], 0.0)
            return z
        return out
    raise UnsupportedTargetError(type(model).__name__)


def field_norm(a: FieldGerm) -> np.ndarray:
    """Pointwise metric norm of the field (order-0 value)."""
    h = pairing(a, a, "hermitian").value
    return np.sqrt(np.maximum(h.real, 0.0))


def _abs_jet(j: Jet) -> Jet:
    return Jet(np.abs(j.coeffs).astype(np.complex128), j.base)


def pairing_envelope(a: FieldGerm, b: FieldGerm, kind: str = "bilinear") -> Jet:
    """No-cancellation envelope of ``pairing(a, b, kind)``.

    Runs the same contraction on the fields' magnitude shadows (absolute
    coefficients, propagated through derivative chains without cancellation),
    so the result bounds the magnitudes the computation actually passed
    through.  Residual tolerances are normalized against this envelope: it
    reduces to the product of field norms in a well-conditioned frame but
    stays honest where the chart frame degenerates.
    """
    if kind == "hermitian":
        return pairing_envelope(a, conj_field(b), "bilinear")
    model = a.germ.target
    sa, sb = _field_shadow(a), _field_shadow(b)
    if isinstance(model, (Flat, SpaceFormEmbedded)):
        out = None
        for x, y in zip(sa, sb):
            term = jmul(x, y)
            out = term if out is None else jadd(out, term)
        return out
    if isinstance(model, (SpaceFormChart, GeneralChart)):
        g = a.germ.metric().comps
        out = None
        for i in range(len(sa)):
            for j in range(len(sb)):
                if isinstance(model, SpaceFormChart) and i != j:
                    continue
                term = jmul(_abs_jet(g[i, j]), jmul(sa[i], sb[j]))
                out = term if out is None else jadd(out, term)
        return out
    if isinstance(model, ComplexSpaceFormFS):
        h = a.germ.metric().comps
        n = model.n

        def split(field, shadow):
            if field.kind == "part10":
                return shadow, None
            if field.kind == "part01":
                return None, shadow
            return shadow[:n], shadow[n:]

        aup, adown = split(a, sa)
        bup, bdown = split(b, sb)
        out = None
        for i in range(n):
            for j in range(n):
                habs = _abs_jet(h[i, j])
                if aup is not None and bdown is not None:
                    term = jet_scale(jmul(habs, jmul(aup[i], bdown[j])), 0.5)
                    out = term if out is None else jadd(out, term)
                if bup is not None and adown is not None:
                    term = jet_scale(jmul(habs, jmul(bup[i], adown[j])), 0.5)
                    out = term if out is None else jadd(out, term)
        if out is None:
            return jet_scale((aup or adown)[0], 0.0)
        return out
    raise UnsupportedTargetError(type(model).__name__)


# ---------------------------------------------------------------------------
# covariant derivative
# ---------------------------------------------------------------------------

def _abs_jets(jets) -> list:
    return [Jet(np.abs(j.coeffs).astype(np.complex128), j.base) for j in jets]


def _field_shadow(V: FieldGerm) -> list:
    return V.shadow if V.shadow is not None else _abs_jets(V.jets)


def cov_D(direction: str, V: FieldGerm) -> FieldGerm:
    """D/dz, D/dzbar or D/dt of a field germ along its map.

    A shadow on the input is propagated with the same formula on absolute
    coefficients, tracking the magnitudes the computation passes through.
    """
    germ = V.germ
    model = germ.target
    deriv = {"z": d_dz, "zbar": d_dzbar, "t": d_dt}[direction]
    track = V.shadow is not None
    if isinstance(model, SpaceFormEmbedded):
        dphi = germ.dmap(direction)

        def run(vjets, dpjets, pjets, c):
            pair = None
            for v, dp in zip(vjets, dpjets):
                term = jmul(v, dp)
                pair = term if pair is None else jadd(pair, term)
            pair = jet_scale(pair, c)
            return [jadd(deriv(v), jmul(pair, p)) for v, p in zip(vjets, pjets)]

        out = run(V.jets, dphi.jets, germ.jets, model.curvature)
        shadow = None
        if track:
            shadow = run(V.shadow, _abs_jets(dphi.jets), _abs_jets(germ.jets),
                         abs(model.curvature))
        return FieldGerm(germ, V.kind, out, shadow)
    if isinstance(model, Flat):
        shadow = [deriv(s) for s in V.shadow] if track else None
        return FieldGerm(germ, V.kind, [deriv(v) for v in V.jets], shadow)
    if isinstance(model, (SpaceFormChart, GeneralChart)):
        gamma = germ.christoffels().gamma
        dphi = germ.dmap(direction)
        d = len(germ.jets)

        def run(vjets, gfn, dpjets):
            out = []
            for k in range(d):
                acc = deriv(vjets[k])
                for i in range(d):
                    for j in range(d):
                        acc = jadd(acc, jmul(gfn(k, i, j),
                                             jmul(dpjets[i], vjets[j])))
                out.append(acc)
            return out

        out = run(V.jets, lambda k, i, j: gamma[k, i, j], dphi.jets)
        shadow = None
        if track:
            absdp = _abs_jets(dphi.jets)
            shadow = run(V.shadow,
                         lambda k, i, j: _abs_jet(gamma[k, i, j]), absdp)
        return FieldGerm(germ, V.kind, out, shadow)
    if isinstance(model, ComplexSpaceFormFS):
        gamma = germ.christoffels().gamma
        n = model.n
        dup = [deriv(j) for j in germ.jets]
        ddown = [deriv(jet_conjugate(j)) for j in germ.jets]

        def block(comps, dphi_comps, conjugate, absval=False):
            out = []
            for k in range(n):
                acc = deriv(comps[k])
                for i in range(n):
                    for j in range(n):
                        gk = gamma[k, i, j]
                        if conjugate:
                            gk = jet_conjugate(gk)
                        if absval:
                            gk = _abs_jet(gk)
                        acc = jadd(acc, jmul(gk, jmul(dphi_comps[i], comps[j])))
                out.append(acc)
            return out

        absup = _abs_jets(dup) if track else None
        absdown = _abs_jets(ddown) if track else None
        if V.kind == "part10":
            shadow = block(V.shadow, absup, False, True) if track else None
            return FieldGerm(germ, "part10", block(V.jets, dup, False), shadow)
        if V.kind == "part01":
            shadow = block(V.shadow, absdown, True, True) if track else None
            return FieldGerm(germ, "part01", block(V.jets, ddown, True), shadow)
        up, down = V.blocks()
        out = block(up, dup, False) + block(down, ddown, True)
        shadow = None
        if track:
            shadow = (block(V.shadow[:n], absup, False, True)
                      + block(V.shadow[n:], absdown, True, True))
        return FieldGerm(germ, "full", out, shadow)
    raise UnsupportedTargetError(type(model).__name__)


def iterated_D(germ: MapGerm, k: int) -> FieldGerm:
    """D^{k-1} of the complexified z-derivative of the map."""
    return germ.iterated(k, "cz")[k - 1]


def field_chain(V: FieldGerm, k: int, direction: str = "z") -> list:
    """[V, D V, ..., D^k V] along the chain direction.

    Magnitude shadows are seeded on Kaehler targets, matching the policy of
    ``MapGerm.iterated``.
    """
    if V.shadow is None and is_kahler(V.germ.target):
        V = FieldGerm(V.germ, V.kind, V.jets, _abs_jets(V.jets))
    chain = [V]
    for _ in range(k):
        chain.append(cov_D(direction, chain[-1]))
    return chain


def t_derivative(family: MapGerm, tangency_tol: float = 1e-10):
    """Base germ at t = 0 and the variation field of a t-jet family.

    For embedded spheres the tangency of the variation field is verified.
    Kaehler targets store the field through its (1,0) part.
    """
    base = MapGerm(family.target, family.chart, t_slice(family.coord, 0),
                   [t_slice(j, 0) for j in family.jets])
    vjets = [t_slice(j, 1) for j in family.jets]
    if is_kahler(family.target):
        v = FieldGerm(base, "part10", vjets)
    else:
        v = FieldGerm(base, "vector", vjets)
        if isinstance(family.target, SpaceFormEmbedded):
            pair = None
            for vj, pj in zip(vjets, base.jets):
                term = jmul(vj, pj)
                pair = term if pair is None else jadd(pair, term)
            resid = float(np.max(np.abs(pair.value)))
            scale = 1.0 + float(np.max(field_norm(v), initial=0.0))
            if resid > tangency_tol * scale:
                raise ValueError(
                    f"variation field not tangent: residual {resid:.3e}")
    return base, v


def promote_to_full(V: FieldGerm) -> FieldGerm:
    """Pad a pure-type Kaehler field with a zero block of the other type."""
    if V.kind == "full" or V.kind == "vector":
        return V
    zero = [jet_scale(j, 0.0) for j in V.jets]
    if V.kind == "part10":
        return FieldGerm(V.germ, "full", list(V.jets) + zero)
    return FieldGerm(V.germ, "full", zero + list(V.jets))


def _apply_J(V: FieldGerm) -> FieldGerm:
    up, down = V.blocks()
    return FieldGerm(V.germ, "full",
                     [jet_scale(j, 1j) for j in up]
                     + [jet_scale(j, -1j) for j in down])


def curvature_field(X: FieldGerm, Y: FieldGerm, Z: FieldGerm) -> FieldGerm:
    """R(X, Y)Z along the common germ, in the package sign convention.

    Space forms: R(X,Y)Z = c(<Y,Z> X - <X,Z> Y).  Complex space forms use the
    constant-holomorphic-curvature tensor with the chart complex structure.
    """
    germ = X.germ
    model = germ.target
    if isinstance(model, Flat):
        return FieldGerm(germ, X.kind, [jet_scale(j, 0.0) for j in X.jets])
    if isinstance(model, (SpaceFormEmbedded, SpaceFormChart)):
        c = model.curvature
        yz = pairing(Y, Z)
        xz = pairing(X, Z)
        return field_scale(
            field_sub(field_scale_jet(X, yz), field_scale_jet(Y, xz)), c)
    if isinstance(model, ComplexSpaceFormFS):
        X, Y, Z = promote_to_full(X), promote_to_full(Y), promote_to_full(Z)
        JX, JY, JZ = _apply_J(X), _apply_J(Y), _apply_J(Z)
        out = field_scale_jet(X, pairing(Y, Z))
        out = field_sub(out, field_scale_jet(Y, pairing(X, Z)))
        out = field_add(out, field_scale_jet(JX, pairing(JY, Z)))
        out = field_sub(out, field_scale_jet(JY, pairing(JX, Z)))
        out = field_add(out, field_scale_jet(JZ, jet_scale(pairing(X, JY), 2.0)))
        return field_scale(out, model.hol_curvature / 4.0)
    raise UnsupportedTargetError(type(model).__name__)
