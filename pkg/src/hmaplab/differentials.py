r"""Isotropy differentials and first-order preservation residuals.

Scalar families computed here, for a map phi of a Riemann-surface domain and
a vector field v along it:

* eta = <d phi/dz, d phi/dz>, vanishing iff phi is weakly conformal;
* eta_real(r, s) = <D^{r-1} d phi/dz, D^{s-1} d phi/dz>, the real-isotropy
  pairings of iterated covariant z-derivatives;
* j_real(r, s)(v), the first-order change of eta_real(r, s) under a
  variation tangent to v;
* eta_cx(r, s) and j_cx(r, s), the Hermitian analogues on Kaehler targets;
* conformal_pairing(v) = <Dv/dz, d phi/dz>, the conformality residual of v;
* holomorphic_residual(v) = D v'/dzbar, the holomorphicity residual on a
  Kaehler target.

Each scalar is returned as a jet, so its dzbar coefficient (the residual
whose vanishing makes eta dz^k a holomorphic k-differential) and its t
coefficient (for families) are direct extractions.  All residuals come with
a cancellation envelope ("scale"): the sum of products of the norms of the
paired factors, used to normalize tolerances across grid nodes of very
different conditioning.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .jets import Jet, jet_extract, jet_scale
from .pullback import (FieldGerm, MapGerm, cov_D, curvature_field,
                       field_chain, field_norm, field_sub, field_values,
                       pairing, pairing_envelope, promote_to_full,
                       real_section_from_part10, t_derivative)
from .targets import ComplexSpaceFormFS, UnsupportedTargetError, fs_metric_value
from .variational import PreconditionError


@dataclass
class DifferentialSample:
    """A scalar differential evaluated over a node batch.

    ``scale`` entries are no-cancellation envelopes of the defining pairing at
    the matching jet order (see ``pairing_envelope``), so each normalized
    residual measures how completely the pairing cancels in units of its own
    term sizes.
    """

    k: int                      # total order r + s (2 for the conformality eta)
    value: np.ndarray           # eta at the nodes
    dbar: Optional[np.ndarray]  # d/dzbar of the scalar, when representable
    dt: Optional[np.ndarray]    # d/dt at t=0, for families
    scale: np.ndarray
    scale_dbar: Optional[np.ndarray] = None
    scale_dt: Optional[np.ndarray] = None

    @property
    def normalized(self) -> np.ndarray:
        return np.abs(self.value) / (1.0 + self.scale)

    def normalized_dbar(self) -> np.ndarray:
        return np.abs(self.dbar) / (1.0 + self.scale_dbar)

    def normalized_dt(self) -> np.ndarray:
        return np.abs(self.dt) / (1.0 + self.scale_dt)


def _sample(scalar: Jet, k: int, envelope: Jet) -> DifferentialSample:
    o = scalar.order
    dbar = jet_extract(scalar, 0, 1, 0) if o.zbar >= 1 else None
    dt = jet_extract(scalar, 0, 0, 1) if o.t >= 1 else None
    env0 = np.abs(envelope.value)
    envb = np.abs(jet_extract(envelope, 0, 1, 0)) if o.zbar >= 1 else None
    envt = np.abs(jet_extract(envelope, 0, 0, 1)) if o.t >= 1 else None
    return DifferentialSample(k, scalar.value, dbar, dt, env0, envb, envt)


def eta_real(germ: MapGerm) -> DifferentialSample:
    """Conformality differential <d phi/dz, d phi/dz> (a quadratic differential)."""
    dz = germ.dmap("z")
    return _sample(pairing(dz, dz), 2, pairing_envelope(dz, dz))


def eta_real_rs(germ: MapGerm, r: int, s: int) -> DifferentialSample:
    """Real isotropy pairing of D^{r-1} d phi/dz with D^{s-1} d phi/dz."""
    chain = germ.iterated(max(r, s), "cz")
    a, b = chain[r - 1], chain[s - 1]
    return _sample(pairing(a, b), r + s, pairing_envelope(a, b))


def j_real_rs(germ: MapGerm, v: FieldGerm, r: int, s: int,
              v_chain: Optional[list] = None,
              via_hermitian: Optional[bool] = None) -> DifferentialSample:
    """First-order real-isotropy residual of v at orders (r, s).

    j = <D^r v, D^{s-1} d phi/dz> + <D^{r-1} d phi/dz, D^s v>.

    On a Kaehler target the bilinear pairing splits into Hermitian blocks and
    j_real(r, s) = j_cx(r, s) + j_cx(s, r); that route only needs chains of
    the (1,0) part and is the default there (``via_hermitian=False`` forces
    the direct full-field computation, used to cross-check the identity).
    """
    if isinstance(germ.target, ComplexSpaceFormFS) and via_hermitian is not False \
            and v.kind == "part10" and v_chain is None:
        a = j_cx_rs(germ, v, r, s)
        b = j_cx_rs(germ, v, s, r)
        return DifferentialSample(r + s, a.value + b.value, None,
                                  None, a.scale + b.scale)
    if v.kind == "part10":
        v = real_section_from_part10(v)
    from .jets import jadd
    chain = germ.iterated(max(r, s), "cz")
    vch = v_chain if v_chain is not None else field_chain(v, max(r, s), "z")
    t1 = pairing(vch[r], chain[s - 1])
    t2 = pairing(chain[r - 1], vch[s])
    env = jadd(pairing_envelope(vch[r], chain[s - 1]),
               pairing_envelope(chain[r - 1], vch[s]))
    return _sample(jadd(t1, t2), r + s, env)


def eta_cx_rs(germ: MapGerm, r: int, s: int) -> DifferentialSample:
    """Complex isotropy pairing <D^{r-1} d phi/dz, Dbar^{s-1} d phi/dzbar>_Herm."""
    if not isinstance(germ.target, ComplexSpaceFormFS):
        raise UnsupportedTargetError("complex isotropy needs a Kaehler target")
    za = germ.iterated(r, "pz")[r - 1]
    zb = germ.iterated(s, "pzbar")[s - 1]
    return _sample(pairing(za, zb, "hermitian"), r + s,
                   pairing_envelope(za, zb, "hermitian"))


def j_cx_rs(germ: MapGerm, v10: FieldGerm, r: int, s: int,
            vz_chain: Optional[list] = None,
            vzbar_chain: Optional[list] = None) -> DifferentialSample:
    """First-order complex-isotropy residual of v (stored via its (1,0) part).

    j = <D^r v/dz^r, Dbar^{s-1} d phi/dzbar>_H + <D^{r-1} d phi/dz, D^s v/dzbar^s>_H;
    only the (1,0) part of v enters either slot on a Kaehler target.
    """
    if not isinstance(germ.target, ComplexSpaceFormFS):
        raise UnsupportedTargetError("complex isotropy needs a Kaehler target")
    from .jets import jadd
    vz = vz_chain if vz_chain is not None else field_chain(v10, r, "z")
    vzb = vzbar_chain if vzbar_chain is not None else field_chain(v10, s, "zbar")
    za = germ.iterated(r, "pz")[r - 1]
    zb = germ.iterated(s, "pzbar")[s - 1]
    t1 = pairing(vz[r], zb, "hermitian")
    t2 = pairing(za, vzb[s], "hermitian")
    env = jadd(pairing_envelope(vz[r], zb, "hermitian"),
               pairing_envelope(za, vzb[s], "hermitian"))
    return _sample(jadd(t1, t2), r + s, env)


def conformal_pairing(germ: MapGerm, v: FieldGerm) -> DifferentialSample:
    """<Dv/dz, d phi/dz>; vanishes exactly when v is a conformal field."""
    if v.kind == "part10":
        v = real_section_from_part10(v)
    dv = cov_D("z", v)
    dz = germ.dmap("z")
    return _sample(pairing(dv, dz), 2, pairing_envelope(dv, dz))


def holomorphic_residual(germ: MapGerm, v10: FieldGerm):
    """D v'/dzbar as a field, with its normalized per-node magnitude.

    Returns (field, residual_norm, scale).
    """
    if not isinstance(germ.target, ComplexSpaceFormFS):
        raise UnsupportedTargetError("holomorphicity residual needs a Kaehler target")
    if v10.kind != "part10":
        raise ValueError("pass the (1,0) part of the field")
    res = cov_D("zbar", v10)
    # envelope: plain derivative plus the connection correction
    from .jets import d_dzbar
    plain = FieldGerm(germ, "part10", [d_dzbar(j) for j in v10.jets])
    o = res.order
    from .jets import truncate
    plain_t = FieldGerm(germ, "part10", [truncate(j, o) for j in plain.jets])
    corr = field_sub(res, plain_t)
    scale = field_norm(plain_t) + field_norm(corr)
    return res, field_norm(res), scale


def eta_dt_identity_residual(germ_family: MapGerm, r: int, s: int,
                             kind: str = "real"):
    """|j_{r,s}(v) - d/dt eta_{r,s}(phi_t)| and its scale, per node.

    The two sides come from independent routes: the left from covariant
    derivatives of the variation field along the base map, the right from the
    t-jet of the family's own eta.
    """
    base, v = t_derivative(germ_family)
    if kind == "real":
        fam = eta_real_rs(germ_family, r, s)
        jv = j_real_rs(base, v, r, s)
    else:
        fam = eta_cx_rs(germ_family, r, s)
        jv = j_cx_rs(base, v, r, s)
    resid = np.abs(jv.value - fam.dt)
    scale = 1.0 + jv.scale + fam.scale_dt
    return resid / scale, jv, fam


def theta_span_residual(germ_family: MapGerm, k: int,
                        isotropy_tol: float = 1e-7,
                        require_isotropic: bool = True) -> np.ndarray:
    """Distance of (D/dt)|_0 D^{k-1} d phi_t/dz - D^k v to span{d phi, ..., D^{k-2} d phi}.

    Normalized least-squares residual per node, computed in the ambient frame
    of an embedded space form.  The inclusion is the inductive commutation
    mechanism; it needs the base map to be real isotropic, which is enforced
    up to ``isotropy_tol`` unless disabled (the negative control disables it).
    """
    base, v = t_derivative(germ_family)
    if require_isotropic:
        worst = 0.0
        for rr in range(1, k + 1):
            for ss in range(1, k + 1):
                samp = eta_real_rs(base, rr, ss)
                worst = max(worst, float(np.max(samp.normalized, initial=0.0)))
        if worst > isotropy_tol:
            raise PreconditionError(
                f"theta-span inclusion assumes a real isotropic base map; "
                f"eta residual {worst:.3e} exceeds {isotropy_tol:.1e}")
    chain_t = germ_family.iterated(k, "cz")
    dt_chain = cov_D("t", chain_t[k - 1])
    from .jets import t_slice
    lhs_vals = field_values(FieldGerm(base, dt_chain.kind,
                                      [t_slice(j, 0) for j in dt_chain.jets]))
    vch = field_chain(v, k, "z")
    rhs_vals = field_values(vch[k])
    b = lhs_vals - rhs_vals
    base_chain = base.iterated(max(k - 1, 1), "cz")
    cols = [field_values(base_chain[i]) for i in range(k - 1)]
    scale = 1.0 + field_norm(vch[k]) + np.linalg.norm(lhs_vals, axis=-1)
    out = np.empty(b.shape[:-1])
    flat_b = b.reshape(-1, b.shape[-1])
    if cols:
        amat = np.stack(cols, axis=-1).reshape(-1, b.shape[-1], len(cols))
    for i in range(flat_b.shape[0]):
        if not cols:
            out.flat[i] = np.linalg.norm(flat_b[i])
            continue
        sol, _, _, _ = np.linalg.lstsq(amat[i], flat_b[i], rcond=1e-12)
        out.flat[i] = np.linalg.norm(flat_b[i] - amat[i] @ sol)
    return out / scale


def lemma_cx_span_residual(germ: MapGerm, k: int, X_up: np.ndarray,
                           X_down: np.ndarray) -> np.ndarray:
    """Residual of R(X, d phi/dz^C) D^{k-1} d phi/dz against its predicted span.

    The span is {d phi/dz, D^{k-1} d phi/dz, eta_cx(k,1) X'} in the (1,0)
    frame of a complex space form.  Normalized per-node least-squares
    residual.
    """
    model = germ.target
    if not isinstance(model, ComplexSpaceFormFS):
        raise UnsupportedTargetError("the span lemma needs a complex space form")
    chain = germ.iterated(k, "pz")
    w_vals = field_values(chain[k - 1])          # (1,0) components of W
    dz_full = germ.dmap("z")
    dzu, dzd = (field_values(FieldGerm(germ, "part10", dz_full.jets[:model.n])),
                field_values(FieldGerm(germ, "part01", dz_full.jets[model.n:])))
    eta = eta_cx_rs(germ, k, 1).value
    phis = field_values(germ.dmap10("z"))
    batch = w_vals.shape[:-1]
    out = np.empty(batch)
    pts = np.stack([j.value for j in germ.jets], axis=-1)
    flat_pts = pts.reshape(-1, model.n)
    flat_w = w_vals.reshape(-1, model.n)
    flat_dzu = dzu.reshape(-1, model.n)
    flat_dzd = dzd.reshape(-1, model.n)
    flat_phi = phis.reshape(-1, model.n)
    flat_eta = np.asarray(eta).reshape(-1)
    Xu = np.asarray(X_up, dtype=complex)
    Xd = np.asarray(X_down, dtype=complex)
    from .targets import curvature_complex_space_form
    for i in range(flat_w.shape[0]):
        h = fs_metric_value(model, flat_pts[i])
        up, down = curvature_complex_space_form(
            model.hol_curvature, Xu, Xd, flat_dzu[i], flat_dzd[i],
            flat_w[i], np.zeros(model.n, dtype=complex), h)
        cols = np.stack([flat_phi[i], flat_w[i], flat_eta[i] * Xu], axis=-1)
        sol, _, _, _ = np.linalg.lstsq(cols, up, rcond=1e-12)
        resid = np.linalg.norm(up - cols @ sol) + np.linalg.norm(down)
        scale = 1.0 + np.linalg.norm(up) + sum(
            np.linalg.norm(cols[:, c]) for c in range(3))
        out.flat[i] = resid / scale
    return out


def dbar_transition_factor(coords_north: np.ndarray, k: int) -> np.ndarray:
    """(d w_south / d z_north)^k = (-1/z^2)^k, the k-differential factor."""
    return (-1.0 / coords_north ** 2) ** k
