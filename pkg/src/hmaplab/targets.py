r"""Target-manifold geometry: metric, Levi-Civita connection coefficients and
curvature operators.

Supported models

* ``Flat(dim)``: Euclidean chart, identity metric.
* ``SpaceFormEmbedded(ambient_dim, curvature)``: round sphere of curvature
  c > 0 sitting in Euclidean space; the connection is realized downstream by
  tangential projection, so no Christoffel symbols are exposed here.
* ``SpaceFormChart(dim, curvature)``: conformal chart of the same geometry,
  metric |dx|^2 / (1 + (c/4)|x|^2)^2, used as an independent cross-check of
  the embedded model.
* ``ComplexSpaceFormFS(n, hol_curvature)``: affine chart of complex
  projective space with the Fubini-Study metric.  Normalization: holomorphic
  sectional curvature 4 by default, so the chart metric on the line is
  |dw|^2 / (1 + |w|^2)^2 and CP^1 is a round sphere of radius 1/2.
* ``GeneralChart(dim, metric)``: arbitrary chart with a metric evaluator in
  jet arithmetic; supports pointwise Christoffel/curvature probes and serves
  as the numeric oracle for the two closed-form curvature tensors.

Curvature sign convention used throughout the package:
``R(X, Y)Z = [nabla_X, nabla_Y] Z - nabla_[X,Y] Z``, so a space form of
curvature c has ``R(X, Y)Z = c(<Y,Z> X - <X,Z> Y)`` and
``(D_z D_zbar - D_zbar D_z) V = R(phi_z, phi_zbar) V`` along a map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .jets import (Jet, JetOrder, OrderError, align, d_dz, d_dzbar, jadd,
                   jet_conjugate, jet_const, jet_extract, jet_mul,
                   jet_reciprocal, jet_scale, jet_sqrt, jmul, jsub, jdiv)


class ChartDomainError(ValueError):
    """Queried point lies outside the model's chart domain."""


class DegenerateInputError(ValueError):
    """Zero or degenerate input where a nonzero value is required."""


class UnsupportedTargetError(TypeError):
    """Operation not defined for this target model."""


@dataclass(frozen=True)
class Flat:
    dim: int
    tolerance: float = 1e-9


@dataclass(frozen=True)
class SpaceFormEmbedded:
    ambient_dim: int
    curvature: float
    tolerance: float = 1e-9

    @property
    def radius(self) -> float:
        return 1.0 / np.sqrt(self.curvature)


@dataclass(frozen=True)
class SpaceFormChart:
    dim: int
    curvature: float
    tolerance: float = 1e-9


@dataclass(frozen=True)
class ComplexSpaceFormFS:
    n: int
    hol_curvature: float = 4.0
    tolerance: float = 1e-9

    @property
    def metric_scale(self) -> float:
        # constant rescaling that moves holomorphic sectional curvature off 4
        return 4.0 / self.hol_curvature


@dataclass(frozen=True)
class GeneralChart:
    dim: int
    metric: Callable[[Sequence[Jet]], np.ndarray] = field(compare=False)
    tolerance: float = 1e-9


TargetModel = Union[Flat, SpaceFormEmbedded, SpaceFormChart, ComplexSpaceFormFS,
                    GeneralChart]


def is_kahler(model) -> bool:
    return isinstance(model, ComplexSpaceFormFS)


def component_count(model) -> int:
    """Number of component jets a map germ into this model carries."""
    if isinstance(model, Flat):
        return model.dim
    if isinstance(model, SpaceFormEmbedded):
        return model.ambient_dim
    if isinstance(model, SpaceFormChart):
        return model.dim
    if isinstance(model, ComplexSpaceFormFS):
        return model.n
    if isinstance(model, GeneralChart):
        return model.dim
    raise UnsupportedTargetError(type(model).__name__)


@dataclass
class MetricValue:
    """Metric components along a germ.

    ``kind == "real"``: comps[i][j] = g_ij, a symmetric real chart metric.
    ``kind == "hermitian"``: comps[i][j] = h_{i jbar} with the convention
    ds^2 = sum h_{i jbar} dw^i dwbar^j, so on the line h_{w wbar} is the full
    conformal factor of the real metric.
    """

    kind: str
    comps: np.ndarray  # object array (d, d) of Jet


@dataclass
class ChristoffelValue:
    """Connection coefficients Gamma^k_{ij} along a germ (pure type for FS)."""

    kind: str
    gamma: np.ndarray  # object array (d, d, d) of Jet, indices [k][i][j]


def _fs_q(comps: Sequence[Jet]) -> Jet:
    """1 + |w|^2 along a germ (jet of a real-valued function)."""
    q = None
    for w in comps:
        term = jmul(w, jet_conjugate(w))
        q = term if q is None else jadd(q, term)
    one = jet_const(np.ones(q.batch_shape), q.order, q.base)
    return jadd(one, q)


def fs_metric_jets(model: ComplexSpaceFormFS, comps: Sequence[Jet]) -> np.ndarray:
    """Fubini-Study h_{i jbar} = s * [(1+|w|^2) d_ij - wbar_i w_j] / (1+|w|^2)^2."""
    n = model.n
    q = _fs_q(comps)
    q0 = q.value
    if np.any(np.abs(q0) < 1e-300) or np.any(~np.isfinite(q0)):
        raise ChartDomainError("FS chart evaluation outside affine chart")
    qinv2 = jet_pow_recip(q, 2)
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            term = jmul(jet_conjugate(comps[i]), comps[j])
            if i == j:
                h = jmul(jsub(q, term), qinv2)
            else:
                h = jet_scale(jmul(term, qinv2), -1.0)
            out[i, j] = jet_scale(h, model.metric_scale)
    return out


def jet_pow_recip(j: Jet, n: int) -> Jet:
    r = jet_reciprocal(j)
    out = r
    for _ in range(n - 1):
        out = jet_mul(out, r)
    return out


def metric_at(model, comps: Sequence[Jet]) -> MetricValue:
    """Metric components as jets along the germ with components ``comps``."""
    order = comps[0].order
    base = comps[0].base
    if isinstance(model, (Flat, SpaceFormEmbedded)):
        d = len(comps)
        out = np.empty((d, d), dtype=object)
        bshape = comps[0].batch_shape
        for i in range(d):
            for j in range(d):
                out[i, j] = jet_const(np.full(bshape, 1.0 if i == j else 0.0),
                                      order, base)
        return MetricValue("real", out)
    if isinstance(model, SpaceFormChart):
        d = model.dim
        u = _conformal_u(model, comps)
        w = jet_pow_recip(u, 2)
        out = np.empty((d, d), dtype=object)
        zero = jet_scale(w, 0.0)
        for i in range(d):
            for j in range(d):
                out[i, j] = w if i == j else zero
        return MetricValue("real", out)
    if isinstance(model, ComplexSpaceFormFS):
        return MetricValue("hermitian", fs_metric_jets(model, comps))
    if isinstance(model, GeneralChart):
        return MetricValue("real", np.asarray(model.metric(comps), dtype=object))
    raise UnsupportedTargetError(type(model).__name__)


def _conformal_u(model: SpaceFormChart, comps: Sequence[Jet]) -> Jet:
    """u = 1 + (c/4)|x|^2 along a germ; the chart metric is u^-2 |dx|^2."""
    s = None
    for x in comps:
        term = jmul(x, x)
        s = term if s is None else jadd(s, term)
    s = jet_scale(s, model.curvature / 4.0)
    one = jet_const(np.ones(s.batch_shape), s.order, s.base)
    return jadd(one, s)


def christoffels_at(model, comps: Sequence[Jet]) -> ChristoffelValue:
    """Closed-form Christoffel jets along a germ.

    The embedded sphere has no chart coefficients (its connection is the
    tangential projection) and GeneralChart supports only the pointwise probe
    ``christoffels_numeric``.
    """
    if isinstance(model, Flat):
        d = model.dim
        zero = jet_scale(comps[0], 0.0)
        g = np.empty((d, d, d), dtype=object)
        g[...] = zero
        return ChristoffelValue("real", g)
    if isinstance(model, SpaceFormChart):
        d = model.dim
        u = _conformal_u(model, comps)
        uinv = jet_reciprocal(u)
        f = [jet_scale(jmul(x, uinv), -model.curvature / 2.0) for x in comps]
        zero = jet_scale(comps[0], 0.0)
        g = np.empty((d, d, d), dtype=object)
        for k in range(d):
            for i in range(d):
                for j in range(d):
                    acc = zero
                    if i == k:
                        acc = jadd(acc, f[j])
                    if j == k:
                        acc = jadd(acc, f[i])
                    if i == j:
                        acc = jsub(acc, f[k])
                    g[k, i, j] = acc
        return ChristoffelValue("real", g)
    if isinstance(model, ComplexSpaceFormFS):
        n = model.n
        q = _fs_q(comps)
        qinv = jet_reciprocal(q)
        wbar = [jet_conjugate(w) for w in comps]
        zero = jet_scale(comps[0], 0.0)
        g = np.empty((n, n, n), dtype=object)
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    acc = zero
                    if k == i:
                        acc = jadd(acc, wbar[j])
                    if k == j:
                        acc = jadd(acc, wbar[i])
                    g[k, i, j] = jet_scale(jmul(acc, qinv), -1.0)
        return ChristoffelValue("hermitian", g)
    if isinstance(model, SpaceFormEmbedded):
        raise UnsupportedTargetError(
            "embedded sphere uses tangential projection, no chart Christoffels")
    raise UnsupportedTargetError(
        f"christoffels_at not available for {type(model).__name__}; "
        "use christoffels_numeric for pointwise probes")


# ---------------------------------------------------------------------------
# pointwise probes: metric derivatives, Christoffels, Riemann tensor
# ---------------------------------------------------------------------------

def real_chart_metric_fn(model) -> tuple[int, Callable[[Sequence[Jet]], np.ndarray]]:
    """Real-chart metric evaluator (dim, fn) for probe differentiation.

    For the FS model the 2n real coordinates are (u_1..u_n, v_1..v_n) with
    w_k = u_k + i v_k, and the real metric blocks are
    [[Re h, Im h], [-Im h, Re h]].  The probe variables are independent real
    directions, so conjugation of evaluated functions is plain coefficient
    conjugation (no axis swap).
    """
    if isinstance(model, Flat):
        def fn(x):
            return metric_at(model, x).comps
        return model.dim, fn
    if isinstance(model, SpaceFormChart):
        def fn(x):
            return metric_at(model, x).comps
        return model.dim, fn
    if isinstance(model, GeneralChart):
        return model.dim, lambda x: np.asarray(model.metric(x), dtype=object)
    if isinstance(model, ComplexSpaceFormFS):
        n = model.n

        def fn(x):
            u, v = x[:n], x[n:]
            w = [jadd(u[i], jet_scale(v[i], 1j)) for i in range(n)]
            wb = [jsub(u[i], jet_scale(v[i], 1j)) for i in range(n)]
            q = None
            for i in range(n):
                term = jmul(wb[i], w[i])
                q = term if q is None else jadd(q, term)
            one = jet_const(np.ones(q.batch_shape), q.order, q.base)
            q = jadd(one, q)
            qinv2 = jet_pow_recip(q, 2)
            h = np.empty((n, n), dtype=object)
            for i in range(n):
                for j in range(n):
                    term = jmul(wb[i], w[j])
                    hij = jmul(jsub(q, term), qinv2) if i == j \
                        else jet_scale(jmul(term, qinv2), -1.0)
                    h[i, j] = jet_scale(hij, model.metric_scale)
            g = np.empty((2 * n, 2 * n), dtype=object)
            for i in range(n):
                for j in range(n):
                    re = jet_scale(jadd(h[i, j], _conj_realvars(h[i, j])), 0.5)
                    im = jet_scale(jsub(h[i, j], _conj_realvars(h[i, j])), -0.5j)
                    g[i, j] = re
                    g[n + i, n + j] = re
                    g[i, n + j] = im
                    g[n + i, j] = jet_scale(im, -1.0)
            return g
        return 2 * n, fn
    raise UnsupportedTargetError(type(model).__name__)


def _conj_realvars(j: Jet) -> Jet:
    # conjugate of a function of real probe variables: conjugate coefficients,
    # keep axes (the probe axes are not a conjugate pair)
    return Jet(np.conj(j.coeffs), j.base)


def metric_probe(model, point, order: int = 2):
    """Metric and its first (and second) chart derivatives at a real point.

    Returns (g, dg, ddg) with dg[a, i, j] = d_a g_ij and
    ddg[a, b, i, j] = d_a d_b g_ij (ddg is None when order < 2).
    Differentiation runs the metric evaluator on probe jets that move along
    pairs of coordinate directions.
    """
    dim, fn = real_chart_metric_fn(model)
    point = np.asarray(point, dtype=np.complex128)
    g = np.zeros((dim, dim), dtype=np.complex128)
    dg = np.zeros((dim, dim, dim), dtype=np.complex128)
    ddg = np.zeros((dim, dim, dim, dim), dtype=np.complex128) if order >= 2 else None
    jord = JetOrder(1, 1, 0)
    for a in range(dim):
        for b in range(a, dim):
            coords = []
            for i in range(dim):
                c = np.zeros((2, 2, 1), dtype=np.complex128)
                c[0, 0, 0] = point[i]
                if i == a:
                    c[1, 0, 0] += 1.0
                if i == b:
                    c[0, 1, 0] += 1.0
                coords.append(Jet(c, 0j))
            h = fn(coords)
            for i in range(dim):
                for j in range(dim):
                    hij = h[i, j]
                    if a == 0 and b == 0:
                        g[i, j] = jet_extract(hij, 0, 0, 0)
                    if b == a:
                        dg[a, i, j] = jet_extract(hij, 1, 0, 0)
                    if ddg is not None:
                        ddg[a, b, i, j] = jet_extract(hij, 1, 1, 0)
                        ddg[b, a, i, j] = ddg[a, b, i, j]
    return g, dg, ddg


def christoffels_numeric(model, point) -> np.ndarray:
    """Gamma^k_{ij} at a point from jet differentiation of the metric."""
    g, dg, _ = metric_probe(model, point, order=1)
    if np.min(np.abs(np.linalg.eigvals(g))) < 1e-14:
        raise DegenerateInputError("degenerate metric at probe point")
    ginv = np.linalg.inv(g)
    dim = g.shape[0]
    gamma = np.zeros((dim, dim, dim), dtype=np.complex128)
    for k in range(dim):
        for i in range(dim):
            for j in range(dim):
                gamma[k, i, j] = 0.5 * sum(
                    ginv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                    for l in range(dim))
    return gamma


def riemann_numeric(model, point) -> np.ndarray:
    """R^l_{ijk} at a point, assembled from Christoffel jets of the metric.

    Index convention: R(e_i, e_j) e_k = R^l_{ijk} e_l with
    R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
                + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}.
    """
    g, dg, ddg = metric_probe(model, point, order=2)
    dim = g.shape[0]
    ginv = np.linalg.inv(g)
    dginv = np.empty((dim, dim, dim), dtype=np.complex128)
    for a in range(dim):
        dginv[a] = -ginv @ dg[a] @ ginv
    gamma = np.zeros((dim, dim, dim), dtype=np.complex128)
    dgamma = np.zeros((dim, dim, dim, dim), dtype=np.complex128)  # [a,k,i,j]
    for k in range(dim):
        for i in range(dim):
            for j in range(dim):
                gamma[k, i, j] = 0.5 * sum(
                    ginv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                    for l in range(dim))
                for a in range(dim):
                    dgamma[a, k, i, j] = 0.5 * sum(
                        dginv[a, k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                        + ginv[k, l] * (ddg[a, i, j, l] + ddg[a, j, i, l]
                                        - ddg[a, l, i, j])
                        for l in range(dim))
    riem = np.zeros((dim, dim, dim, dim), dtype=np.complex128)  # [l,i,j,k]
    for l in range(dim):
        for i in range(dim):
            for j in range(dim):
                for k in range(dim):
                    riem[l, i, j, k] = (dgamma[i, l, j, k] - dgamma[j, l, i, k]
                                        + sum(gamma[l, i, m] * gamma[m, j, k]
                                              - gamma[l, j, m] * gamma[m, i, k]
                                              for m in range(dim)))
    return riem


def curvature_numeric(model, point, X, Y, Z) -> np.ndarray:
    """R(X, Y)Z at a point via the metric-probe Riemann tensor."""
    riem = riemann_numeric(model, point)
    return np.einsum("lijk,i,j,k->l", riem, X, Y, Z)


# ---------------------------------------------------------------------------
# closed-form curvature tensors (pointwise, on component vectors)
# ---------------------------------------------------------------------------

def curvature_space_form(c: float, X, Y, Z, inner=None) -> np.ndarray:
    """R(X, Y)Z = c (<Y,Z> X - <X,Z> Y) with a complex-bilinear pairing."""
    X = np.asarray(X, dtype=np.complex128)
    Y = np.asarray(Y, dtype=np.complex128)
    Z = np.asarray(Z, dtype=np.complex128)
    if inner is None:
        inner = lambda a, b: np.sum(a * b, axis=-1)
    return c * (inner(Y, Z)[..., None] * X - inner(X, Z)[..., None] * Y)


def fs_metric_value(model: ComplexSpaceFormFS, w) -> np.ndarray:
    """h_{i jbar} at an affine-chart point (plain numbers)."""
    w = np.asarray(w, dtype=np.complex128)
    q = 1.0 + np.sum(np.abs(w) ** 2)
    h = (q * np.eye(model.n) - np.outer(np.conj(w), w)) / q ** 2
    return model.metric_scale * h


def curvature_complex_space_form(c4: float, Xp, Xpp, Yp, Ypp, Zp, Zpp, h) -> tuple:
    """Constant-holomorphic-curvature tensor on complexified block vectors.

    Arguments are the (1,0) and (0,1) components of X, Y, Z in an affine
    Kaehler chart with Hermitian metric h.  Implements, with the bilinear
    extension of the real inner product and complex-linear J,

    R(X,Y)Z = (c4/4) [<Y,Z>X - <X,Z>Y + <JY,Z>JX - <JX,Z>JY + 2<X,JY>JZ].

    Returns the (1,0) and (0,1) blocks of the value.
    """
    def pair(ap, app, bp, bpp):
        # bilinear pairing with <d_i, d_jbar> = h_{i jbar} / 2
        return 0.5 * (np.einsum("ij,...i,...j->...", h, ap, bpp)
                      + np.einsum("ij,...i,...j->...", h, bp, app))

    def J(p, pp):
        return 1j * p, -1j * pp

    def scalevec(s, p, pp):
        return s[..., None] * p, s[..., None] * pp

    def addvec(a, b):
        return a[0] + b[0], a[1] + b[1]

    X, Y, Z = (Xp, Xpp), (Yp, Ypp), (Zp, Zpp)
    JX, JY, JZ = J(*X), J(*Y), J(*Z)
    out = scalevec(pair(*Y, *Z), *X)
    out = addvec(out, scalevec(-pair(*X, *Z), *Y))
    out = addvec(out, scalevec(pair(*JY, *Z), *JX))
    out = addvec(out, scalevec(-pair(*JX, *Z), *JY))
    out = addvec(out, scalevec(2.0 * pair(*X, *JY), *JZ))
    return (c4 / 4.0) * out[0], (c4 / 4.0) * out[1]


# ---------------------------------------------------------------------------
# embedded sphere helpers
# ---------------------------------------------------------------------------

def embed_project(model: SpaceFormEmbedded, ambient: Sequence[Jet]) -> list:
    """Radially normalize ambient component jets onto |p| = 1/sqrt(c)."""
    s = None
    for a in ambient:
        term = jmul(a, a)
        s = term if s is None else jadd(s, term)
    if np.any(np.abs(s.value) < 1e-300):
        raise DegenerateInputError("zero ambient vector cannot be normalized")
    norm = jet_sqrt(s)
    scale = jet_scale(jet_reciprocal(norm), model.radius)
    return [jmul(a, scale) for a in ambient]


def field_project(model: SpaceFormEmbedded, point: Sequence[Jet],
                  ambient_field: Sequence[Jet]) -> list:
    """Project ambient field jets to the tangent space fiberwise: V - c <V,p> p."""
    c = model.curvature
    pairing = None
    for v, p in zip(ambient_field, point):
        term = jmul(v, p)
        pairing = term if pairing is None else jadd(pairing, term)
    pairing = jet_scale(pairing, -c)
    return [jadd(v, jmul(pairing, p)) for v, p in zip(ambient_field, point)]
