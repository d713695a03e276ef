"""Several-variable Schwarzian tensors and their transformation rules.

For a locally biholomorphic map F = (f_1, ..., f_n) the tensor entries are

    S^k_ij F = sum_l (d^2 f_l / dz_i dz_j) (DF^{-1})_{k l}
               - (delta^k_i d_j + delta^k_j d_i) (log JF) / (n + 1),

together with the S^0_ij coefficients fixed by the requirement that
u_0 = (JF)^{-1/(n+1)} solves the associated second-order linear system

    d^2 u / dz_i dz_j = sum_k S^k_ij d_k u + S^0_ij u.

S^0 is therefore computed as (d^2_ij u_0 - sum_k S^k_ij d_k u_0) / u_0; the
solution property is the anchor every consumer of S^0 relies on, and
``pde_residual`` re-derives both sides through an independent jet route as a
regression guard.  Tensors vanish exactly on Moebius maps and obey the
composition rule implemented in :func:`chain_rule_transform`.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import (
    BasePointMismatchError,
    BranchCutError,
    DimensionError,
    SingularDifferentialError,
)
from .jets import JetVector, jet_compose, jet_det, jet_jacobian, jet_pow
from .maps import MapSpec, map_jet_at

MIN_JET_DEGREE = 3


@dataclass(frozen=True)
class SchwarzianTensor:
    """Schwarzian data of a map at a base point.

    ``Sk[k][i, j]`` holds S^{k+1}_ij (the n symmetric matrices of the
    quadratic-form operator) and ``S0[i, j]`` the zero-index coefficients.
    Both are symmetrized on construction.
    """

    z: np.ndarray
    Sk: np.ndarray
    S0: np.ndarray

    @property
    def n(self) -> int:
        return self.Sk.shape[0]

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.Sk)), np.max(np.abs(self.S0))))


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def _second_derivatives(jv: JetVector) -> np.ndarray:
    """H[l, i, j] = d^2 f_l / dz_i dz_j at the center."""
    n = jv.n
    h = np.zeros((n, n, n), dtype=complex)
    for l in range(n):
        for i in range(n):
            for j in range(i, n):
                key = [0] * n
                key[i] += 1
                key[j] += 1
                v = jv[l].derivative_value(tuple(key))
                h[l, i, j] = v
                h[l, j, i] = v
    return h


def _principal_power(c: complex, p: float) -> complex:
    if c == 0:
        raise BranchCutError("Jacobian vanishes at the base point")
    if c.imag == 0 and c.real < 0:
        raise BranchCutError(f"Jacobian {c} lies on the cut (-inf, 0]")
    return cmath.exp(p * cmath.log(c))


def _jacobian_jet_data(jv: JetVector):
    """Jacobian determinant jet plus its value/gradient/Hessian at the center."""
    n = jv.n
    jf_jet = jet_det(jet_jacobian(jv))
    jf0 = jf_jet.constant_term
    grad = np.zeros(n, dtype=complex)
    hess = np.zeros((n, n), dtype=complex)
    for i in range(n):
        key = [0] * n
        key[i] = 1
        grad[i] = jf_jet.derivative_value(tuple(key))
        for j in range(i, n):
            key2 = [0] * n
            key2[i] += 1
            key2[j] += 1
            hess[i, j] = jf_jet.derivative_value(tuple(key2))
            hess[j, i] = hess[i, j]
    return jf_jet, jf0, grad, hess


def schwarzian_at(jv: JetVector, z=None) -> SchwarzianTensor:
    """Schwarzian tensor from the jet of F at a point.

    Parameters
    ----------
    jv : JetVector
        Jet of the map about the base point, degree >= 3, with nonsingular
        linear part.
    z : array_like, optional
        Base point recorded on the tensor (defaults to the origin).
    """
    n = jv.n
    if len(jv) != n:
        raise DimensionError("Schwarzian needs a square map (n components in n variables)")
    if n < 2:
        raise DimensionError("Schwarzian tensors require n >= 2")
    if jv.d < MIN_JET_DEGREE:
        raise DimensionError(f"jet degree {jv.d} < {MIN_JET_DEGREE} cannot carry third derivatives")
    z = np.zeros(n, dtype=complex) if z is None else np.asarray(z, dtype=complex).reshape(-1)

    dmat = jv.linear_matrix()
    det = np.linalg.det(dmat)
    if abs(det) < 1e-12:
        raise SingularDifferentialError("differential singular at the base point")
    dinv = np.linalg.inv(dmat)
    hess_f = _second_derivatives(jv)

    _, jf0, grad_jf, hess_jf = _jacobian_jet_data(jv)
    if jf0 == 0 or (jf0.imag == 0 and jf0.real < 0):
        raise BranchCutError(f"Jacobian {jf0} is zero or on the cut (-inf, 0]")
    glog = grad_jf / jf0

    sk = np.einsum("lij,kl->kij", hess_f, dinv)
    for k in range(n):
        sk[k, k, :] -= glog / (n + 1)
        sk[k, :, k] -= glog / (n + 1)
    sk = _symmetrize(sk)

    # u0 = JF^{-1/(n+1)} derivative values by the power chain rule
    p = -1.0 / (n + 1)
    u0 = _principal_power(jf0, p)
    du0 = p * u0 / jf0 * grad_jf
    d2u0 = p * (p - 1) * u0 / jf0**2 * np.outer(grad_jf, grad_jf) + p * u0 / jf0 * hess_jf
    s0 = (d2u0 - np.einsum("kij,k->ij", sk, du0)) / u0
    s0 = _symmetrize(s0)
    return SchwarzianTensor(z=z, Sk=sk, S0=s0)


def schwarzian_of(m: MapSpec, z, degree: int = MIN_JET_DEGREE) -> SchwarzianTensor:
    """Convenience wrapper: expand the map at ``z`` and build its tensor."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    return schwarzian_at(map_jet_at(m, z, degree), z=z)


def schwarzian_apply(t: SchwarzianTensor, v) -> np.ndarray:
    """Quadratic-form operator value (v^t S^1 v, ..., v^t S^n v)."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if len(v) != t.n:
        raise DimensionError("direction dimension does not match tensor dimension")
    return np.einsum("kij,i,j->k", t.Sk, v, v)


def canonical_residual(t: SchwarzianTensor) -> float:
    """max_i |sum_j S^j_ij|, identically zero for genuine Schwarzian tensors."""
    n = t.n
    return float(max(abs(sum(t.Sk[j, i, j] for j in range(n))) for i in range(n)))


def pde_residual(jv: JetVector, z=None) -> float:
    """Residual of the u_0 solution property, evaluated through jet powers.

    Both sides of d^2_ij u_0 = sum_k S^k_ij d_k u_0 + S^0_ij u_0 are
    recomputed from scratch: the tensor by the value route of
    :func:`schwarzian_at`, the u_0 derivatives from ``jet_pow`` applied to the
    Jacobian-determinant jet.  Nonzero output means the two differentiation
    routes disagree.
    """
    t = schwarzian_at(jv, z=z)
    n = jv.n
    jf_jet, _, _, _ = _jacobian_jet_data(jv)
    u0_jet = jet_pow(jf_jet, -1.0 / (n + 1))
    u0 = u0_jet.constant_term
    du0 = np.zeros(n, dtype=complex)
    for k in range(n):
        key = [0] * n
        key[k] = 1
        du0[k] = u0_jet.derivative_value(tuple(key))
    worst = 0.0
    for i in range(n):
        for j in range(n):
            key = [0] * n
            key[i] += 1
            key[j] += 1
            lhs = u0_jet.derivative_value(tuple(key))
            rhs = sum(t.Sk[k, i, j] * du0[k] for k in range(n)) + t.S0[i, j] * u0
            worst = max(worst, abs(lhs - rhs))
    return worst


def chain_rule_transform(
    t_f: SchwarzianTensor,
    t_g: SchwarzianTensor,
    jet_f: JetVector,
    jet_g: JetVector,
) -> SchwarzianTensor:
    """Schwarzian tensor of G o F at z from the tensors of F at z and G at F(z).

    The k >= 1 matrices follow the composition rule

        S^k_ij(G o F) = S^k_ij F + sum_{l,m,r} S^r_lm G (DF)_li (DF)_mj (DF^{-1})_kr,

    applied to the tensors as given.  The S^0 block has no such finite rule,
    so it is recomputed from the composed jet; ``jet_f`` supplies DF(z), the
    base-point consistency check F(z) = t_g.z, and the composition input.
    """
    n = t_f.n
    if t_g.n != n or jet_f.n != n or jet_g.n != n:
        raise DimensionError("chain rule inputs mix dimensions")
    w = jet_f.constants()
    if np.max(np.abs(w - t_g.z)) > 1e-9:
        raise BasePointMismatchError(
            "outer tensor base point does not equal F(z) from the inner jet"
        )
    df = jet_f.linear_matrix()
    if abs(np.linalg.det(df)) < 1e-12:
        raise SingularDifferentialError("DF(z) singular in chain rule")
    dfinv = np.linalg.inv(df)
    pulled = np.einsum("li,rlm,mj->rij", df, t_g.Sk, df)
    sk = t_f.Sk + np.einsum("kr,rij->kij", dfinv, pulled)
    sk = _symmetrize(sk)
    centered = jet_f.shifted(-w)
    composed = JetVector([jet_compose(jet_g[l], centered.jets) for l in range(n)])
    s0 = schwarzian_at(composed, z=t_f.z).S0
    return SchwarzianTensor(z=t_f.z, Sk=sk, S0=s0)
