r"""Truncated Taylor (jet) arithmetic in two conjugate chart variables and one
real deformation parameter.

A jet stores the coefficients c_{a,b,c} of the monomials
(z - z0)^a (zbar - z0bar)^b t^c of a real-analytic function, truncated at a
fixed multi-order.  z and zbar are treated as independent variables
(Wirtinger formalism); whether a jet represents a real-valued function is a
checkable property (`is_real`), not a representation constraint.  t is a real
parameter, so no conjugate t axis exists.

All operations are exact polynomial algebra up to floating-point rounding;
this is what makes residuals of differential-geometric identities meaningful
at the 1e-9 .. 1e-14 level.

Coefficient arrays carry the three polynomial axes last; any leading axes are
broadcast batch axes, which is how whole grids of base points are processed in
single numpy operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_ORDER_Z = 8
MAX_ORDER_ZBAR = 8
MAX_ORDER_T = 2


class JetError(ValueError):
    """Invalid jet operation (order/base mismatch, index out of range)."""


class OrderError(JetError):
    """A derivative or composition exhausted the available jet order."""


class SingularCompositionError(JetError):
    """Outer series is not expandable at the inner jet's constant term."""


@dataclass(frozen=True)
class JetOrder:
    """Truncation order per variable."""

    z: int
    zbar: int
    t: int = 0

    def __post_init__(self):
        if not (0 <= self.z <= MAX_ORDER_Z
                and 0 <= self.zbar <= MAX_ORDER_ZBAR
                and 0 <= self.t <= MAX_ORDER_T):
            raise JetError(f"jet order {self} outside supported ceilings "
                           f"({MAX_ORDER_Z},{MAX_ORDER_ZBAR},{MAX_ORDER_T})")

    @property
    def shape(self):
        return (self.z + 1, self.zbar + 1, self.t + 1)


class Jet:
    """Dense truncated Taylor expansion at a (possibly batched) base point."""

    __slots__ = ("coeffs", "base")

    def __init__(self, coeffs, base=0j):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim < 3:
            raise JetError("jet coefficients need three trailing polynomial axes")
        self.coeffs = coeffs
        self.base = np.asarray(base, dtype=np.complex128)

    @property
    def order(self) -> JetOrder:
        nz, nb, nt = self.coeffs.shape[-3:]
        return JetOrder(nz - 1, nb - 1, nt - 1)

    @property
    def batch_shape(self):
        return self.coeffs.shape[:-3]

    @property
    def value(self):
        """Order-0 coefficient, the represented function at the base point."""
        return self.coeffs[..., 0, 0, 0]

    def is_real(self, tol: float = 1e-12) -> bool:
        """True if the jet represents a real-valued function: c_{a,b,c} = conj(c_{b,a,c})."""
        sym = np.conj(np.swapaxes(self.coeffs, -3, -2))
        scale = 1.0 + float(np.max(np.abs(self.coeffs), initial=0.0))
        return float(np.max(np.abs(self.coeffs - sym), initial=0.0)) <= tol * scale

    def __repr__(self):
        o = self.order
        return f"Jet(order=({o.z},{o.zbar},{o.t}), batch={self.batch_shape})"


def _same_base(a: Jet, b: Jet) -> bool:
    if a.base.shape == b.base.shape:
        return bool(np.array_equal(a.base, b.base))
    # scalar base against batched base
    return bool(np.all(a.base == b.base))


def _check_compatible(a: Jet, b: Jet):
    if a.coeffs.shape[-3:] != b.coeffs.shape[-3:]:
        raise JetError(f"jet order mismatch: {a.order} vs {b.order}")
    if not _same_base(a, b):
        raise JetError("jet base point mismatch")


def jet_const(value, order: JetOrder, base=0j) -> Jet:
    value = np.asarray(value, dtype=np.complex128)
    coeffs = np.zeros(value.shape + order.shape, dtype=np.complex128)
    coeffs[..., 0, 0, 0] = value
    return Jet(coeffs, base)


def jet_variable(base, order: JetOrder) -> Jet:
    """The coordinate function z as a jet at z0: z0 + (z - z0)."""
    if order.z < 1:
        raise OrderError("jet_variable needs z-order >= 1")
    base = np.asarray(base, dtype=np.complex128)
    coeffs = np.zeros(base.shape + order.shape, dtype=np.complex128)
    coeffs[..., 0, 0, 0] = base
    coeffs[..., 1, 0, 0] = 1.0
    return Jet(coeffs, base)


def jet_variable_bar(base, order: JetOrder) -> Jet:
    """The conjugate coordinate zbar as a jet at z0."""
    if order.zbar < 1:
        raise OrderError("jet_variable_bar needs zbar-order >= 1")
    base = np.asarray(base, dtype=np.complex128)
    coeffs = np.zeros(base.shape + order.shape, dtype=np.complex128)
    coeffs[..., 0, 0, 0] = np.conj(base)
    coeffs[..., 0, 1, 0] = 1.0
    return Jet(coeffs, base)


def jet_tvar(base, order: JetOrder, batch_shape=()) -> Jet:
    """The deformation parameter t as a jet (t = 0 at the base)."""
    if order.t < 1:
        raise OrderError("jet_tvar needs t-order >= 1")
    coeffs = np.zeros(tuple(batch_shape) + order.shape, dtype=np.complex128)
    coeffs[..., 0, 0, 1] = 1.0
    return Jet(coeffs, base)


def jet_add(a: Jet, b: Jet) -> Jet:
    _check_compatible(a, b)
    return Jet(a.coeffs + b.coeffs, a.base)


def jet_sub(a: Jet, b: Jet) -> Jet:
    _check_compatible(a, b)
    return Jet(a.coeffs - b.coeffs, a.base)


def jet_neg(a: Jet) -> Jet:
    return Jet(-a.coeffs, a.base)


def jet_scale(a: Jet, s) -> Jet:
    """Multiply by a constant (scalar, or one value per batch entry)."""
    s = np.asarray(s, dtype=np.complex128)
    if s.ndim > 0:
        s = s[(...,) + (None,) * 3]
    return Jet(a.coeffs * s, a.base)


try:
    from numba import njit as _njit

    @_njit(cache=True)
    def _conv3_kernel(ca, cb, out):
        # arrays laid out (nz, nb, nt, batch); fixed loop order, strict IEEE,
        # so results are bit-identical for any batch decomposition
        nz, nb, nt, nbatch = ca.shape
        for i1 in range(nz):
            for j1 in range(nb):
                for k1 in range(nt):
                    blk = ca[i1, j1, k1]
                    nonzero = False
                    for b in range(nbatch):
                        if blk[b] != 0:
                            nonzero = True
                            break
                    if not nonzero:
                        continue
                    for i2 in range(nz - i1):
                        for j2 in range(nb - j1):
                            for k2 in range(nt - k1):
                                o = out[i1 + i2, j1 + j2, k1 + k2]
                                c2 = cb[i2, j2, k2]
                                for b in range(nbatch):
                                    o[b] += blk[b] * c2[b]

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


def _block_mask(c: np.ndarray) -> np.ndarray:
    """Which monomial blocks carry any nonzero coefficient across the batch."""
    if c.ndim == 3:
        return c != 0
    flat = c.reshape(-1, *c.shape[-3:])
    return np.add.reduce(flat != 0, axis=0) > 0


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Truncated Cauchy product in the three variables."""
    _check_compatible(a, b)
    ca, cb = a.coeffs, b.coeffs
    nz, nb, nt = ca.shape[-3:]
    out_batch = np.broadcast_shapes(ca.shape[:-3], cb.shape[:-3])
    nbatch = int(np.prod(out_batch, dtype=np.int64)) if out_batch else 1
    if _HAVE_NUMBA and nbatch >= 64:
        shape = out_batch + (nz, nb, nt)
        cat = np.empty((nz, nb, nt, nbatch), dtype=np.complex128)
        cbt = np.empty_like(cat)
        cat[...] = np.moveaxis(np.broadcast_to(ca, shape), (-3, -2, -1),
                               (0, 1, 2)).reshape(nz, nb, nt, nbatch)
        cbt[...] = np.moveaxis(np.broadcast_to(cb, shape), (-3, -2, -1),
                               (0, 1, 2)).reshape(nz, nb, nt, nbatch)
        out_t = np.zeros_like(cat)
        _conv3_kernel(cat, cbt, out_t)
        out = np.moveaxis(out_t.reshape((nz, nb, nt) + out_batch),
                          (0, 1, 2), (-3, -2, -1))
        out = np.ascontiguousarray(out)
    else:
        mask_a = _block_mask(ca)
        mask_b = _block_mask(cb)
        if mask_b.sum() < mask_a.sum():
            ca, cb, mask_a = cb, ca, mask_b
        out = np.zeros(out_batch + (nz, nb, nt), dtype=np.complex128)
        for i, j, k in zip(*np.nonzero(mask_a)):
            out[..., i:, j:, k:] += ca[..., i, j, k][(...,) + (None,) * 3] \
                * cb[..., : nz - i, : nb - j, : nt - k]
    return Jet(out, a.base if a.base.ndim >= b.base.ndim else b.base)


def truncate(a: Jet, order: JetOrder) -> Jet:
    nz, nb, nt = a.coeffs.shape[-3:]
    if order.z + 1 > nz or order.zbar + 1 > nb or order.t + 1 > nt:
        raise OrderError(f"cannot truncate {a.order} up to {order}")
    return Jet(np.ascontiguousarray(
        a.coeffs[..., : order.z + 1, : order.zbar + 1, : order.t + 1]), a.base)


def align(*jets: Jet):
    """Truncate all jets to the smallest common order (bases must agree)."""
    oz = min(j.order.z for j in jets)
    ob = min(j.order.zbar for j in jets)
    ot = min(j.order.t for j in jets)
    target = JetOrder(oz, ob, ot)
    return tuple(truncate(j, target) if j.order != target else j for j in jets)


def jmul(a: Jet, b: Jet) -> Jet:
    """Product with automatic truncation to the common order."""
    a, b = align(a, b)
    return jet_mul(a, b)


def jadd(a: Jet, b: Jet) -> Jet:
    a, b = align(a, b)
    return jet_add(a, b)


def jsub(a: Jet, b: Jet) -> Jet:
    a, b = align(a, b)
    return jet_sub(a, b)


def jet_conjugate(a: Jet) -> Jet:
    """Jet of the complex-conjugate function: swap (a, b) indices, conjugate coefficients.

    Valid because t is real: conj(f)(z, zbar, t) has Taylor coefficients
    conj(c_{b,a,c}).
    """
    return Jet(np.conj(np.swapaxes(a.coeffs, -3, -2)), a.base)


def jet_extract(a: Jet, i: int, j: int, k: int = 0):
    """Mixed partial derivative d_z^i d_zbar^j d_t^k at the base point."""
    nz, nb, nt = a.coeffs.shape[-3:]
    if not (0 <= i < nz and 0 <= j < nb and 0 <= k < nt):
        raise JetError(f"extraction index ({i},{j},{k}) outside order {a.order}")
    fac = math.factorial(i) * math.factorial(j) * math.factorial(k)
    return a.coeffs[..., i, j, k] * fac


def d_dz(a: Jet) -> Jet:
    if a.order.z < 1:
        raise OrderError("z-order exhausted")
    nz = a.coeffs.shape[-3]
    mult = np.arange(1, nz, dtype=np.float64)[:, None, None]
    return Jet(a.coeffs[..., 1:, :, :] * mult, a.base)


def d_dzbar(a: Jet) -> Jet:
    if a.order.zbar < 1:
        raise OrderError("zbar-order exhausted")
    nb = a.coeffs.shape[-2]
    mult = np.arange(1, nb, dtype=np.float64)[None, :, None]
    return Jet(a.coeffs[..., :, 1:, :] * mult, a.base)


def d_dt(a: Jet) -> Jet:
    if a.order.t < 1:
        raise OrderError("t-order exhausted")
    nt = a.coeffs.shape[-1]
    mult = np.arange(1, nt, dtype=np.float64)[None, None, :]
    return Jet(a.coeffs[..., :, :, 1:] * mult, a.base)


def t_slice(a: Jet, k: int = 0) -> Jet:
    """Coefficient of t^k as a jet in (z, zbar) alone (no factorial applied)."""
    nt = a.coeffs.shape[-1]
    if not 0 <= k < nt:
        raise JetError(f"t-slice {k} outside order {a.order}")
    return Jet(np.ascontiguousarray(a.coeffs[..., :, :, k : k + 1]), a.base)


def jet_real_part(a: Jet) -> Jet:
    c = jet_conjugate(a)
    return Jet(0.5 * (a.coeffs + c.coeffs), a.base)


def jet_imag_part(a: Jet) -> Jet:
    c = jet_conjugate(a)
    return Jet(-0.5j * (a.coeffs - c.coeffs), a.base)


# ---------------------------------------------------------------------------
# composition with analytic series
# ---------------------------------------------------------------------------

class AnalyticSeries:
    """One-variable analytic function given by a Taylor-coefficient factory.

    ``coeffs_at(center, n)`` must return the coefficients a_0 .. a_n of the
    expansion around ``center``; ``center`` may be an array, in which case the
    result has shape ``(n + 1,) + center.shape``.
    """

    def __init__(self, coeffs_at, name="series"):
        self._coeffs_at = coeffs_at
        self.name = name

    def coeffs_at(self, center, n: int):
        return self._coeffs_at(np.asarray(center, dtype=np.complex128), n)


def _recip_coeffs(c, n):
    if np.any(np.abs(c) == 0.0):
        raise SingularCompositionError("reciprocal series centered at zero")
    k = np.arange(n + 1)
    shape = (n + 1,) + (1,) * c.ndim
    return ((-1.0) ** k).reshape(shape) / c[None, ...] ** (k + 1).reshape(shape)


def _sqrt_coeffs(c, n):
    if np.any(np.abs(c) == 0.0):
        raise SingularCompositionError("sqrt series centered at zero")
    out = np.empty((n + 1,) + c.shape, dtype=np.complex128)
    root = np.sqrt(c)
    coef = 1.0
    for k in range(n + 1):
        out[k] = coef * root / c ** k
        coef *= (0.5 - k) / (k + 1.0)
    return out


def _exp_coeffs(c, n):
    base = np.exp(c)
    facs = np.array([1.0 / math.factorial(k) for k in range(n + 1)])
    return base[None, ...] * facs.reshape((n + 1,) + (1,) * c.ndim)


def _log_coeffs(c, n):
    if np.any(np.abs(c) == 0.0):
        raise SingularCompositionError("log series centered at zero")
    out = np.empty((n + 1,) + c.shape, dtype=np.complex128)
    out[0] = np.log(c)
    for k in range(1, n + 1):
        out[k] = ((-1.0) ** (k + 1)) / (k * c ** k)
    return out


RECIP = AnalyticSeries(_recip_coeffs, "1/w")
SQRT = AnalyticSeries(_sqrt_coeffs, "sqrt")
EXP = AnalyticSeries(_exp_coeffs, "exp")
LOG = AnalyticSeries(_log_coeffs, "log")


def poly_series(coefficients) -> AnalyticSeries:
    """Polynomial p(w) = sum coefficients[d] w^d as a composable series."""
    coefficients = np.asarray(coefficients, dtype=np.complex128)

    def coeffs_at(c, n):
        # Taylor shift by synthetic division: repeated Horner evaluation.
        work = list(coefficients.reshape(coefficients.shape + (1,) * c.ndim)
                    * np.ones_like(c))
        out = []
        for _ in range(n + 1):
            if not work:
                out.append(np.zeros_like(c))
                continue
            acc = np.zeros_like(c)
            new = []
            for a in work:  # Horner, keeping the quotient
                acc = acc * c + a
                new.append(acc)
            out.append(acc)
            work = new[:-1]
        return np.stack(out, axis=0)

    return AnalyticSeries(coeffs_at, "poly")


def jet_compose(outer: AnalyticSeries, inner: Jet, n_terms: int | None = None) -> Jet:
    """Truncated composition outer(inner) by Horner evaluation in jet arithmetic.

    The outer series is re-expanded at the inner jet's constant term, so the
    shifted inner jet is nilpotent and the Horner loop terminates after the
    total order.
    """
    o = inner.order
    depth = o.z + o.zbar + o.t if n_terms is None else n_terms
    c0 = inner.coeffs[..., 0, 0, 0]
    a = outer.coeffs_at(c0, depth)
    u = Jet(inner.coeffs.copy(), inner.base)
    u.coeffs[..., 0, 0, 0] = 0.0
    res = jet_const(a[depth], o, inner.base)
    for k in range(depth - 1, -1, -1):
        res = jet_mul(res, u)
        res.coeffs[..., 0, 0, 0] += a[k]
    return res


def jet_reciprocal(a: Jet) -> Jet:
    return jet_compose(RECIP, a)


def jet_sqrt(a: Jet) -> Jet:
    return jet_compose(SQRT, a)


def jet_exp(a: Jet) -> Jet:
    return jet_compose(EXP, a)


def jet_pow(a: Jet, n: int) -> Jet:
    if n < 0:
        return jet_reciprocal(jet_pow(a, -n))
    out = jet_const(np.ones(a.batch_shape), a.order, a.base)
    for _ in range(n):
        out = jet_mul(out, a)
    return out


def jdiv(a: Jet, b: Jet) -> Jet:
    a, b = align(a, b)
    return jet_mul(a, jet_reciprocal(b))
