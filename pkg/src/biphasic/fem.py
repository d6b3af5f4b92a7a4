"""Reference-element machinery and coupled u-p element kernels.

Conventions fixed here and relied on everywhere else:

* Tet10 node order: corners 0-3 at reference coordinates (0,0,0), (1,0,0),
  (0,1,0), (0,0,1), then edge midpoints 4-9 on edges (0,1), (1,2), (2,0),
  (0,3), (1,3), (2,3).
* Voigt order is (11, 22, 33, 12, 23, 13) with engineering shear in strain
  vectors, so B-matrices pair with a tangent whose shear diagonal carries
  mu (not 2 mu).
* Element dof order: [u0x, u0y, u0z, ..., u9z] (30 displacement dofs),
  pressures [p0..p3] on the corner nodes.
* Coupling block K_up = -integral(B_div^T N^p dv), the sign that makes the
  assembled block system symmetric for total stress sigma - p*I.
* All volume integrals run over the current configuration (isoparametric
  map evaluated at the current displacement iterate).
* The stabilization force penalizes the divergence of the displacement
  increment over the time step (the discrete velocity times dt):
  f_gls_u = k_uu_gls @ (u - u_prev).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvertedElementError

TET10_EDGES = ((0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3))

# Stabilization force reference state: False penalizes div of the step
# increment (the discrete velocity), True the total displacement.
GLS_FORCE_ON_TOTAL = False

# Reference coordinates of the 10 nodes (corners then edge midpoints).
TET10_REF_COORDS = np.array(
    [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.5, 0.0, 0.0],
        [0.5, 0.5, 0.0],
        [0.0, 0.5, 0.0],
        [0.0, 0.0, 0.5],
        [0.5, 0.0, 0.5],
        [0.0, 0.5, 0.5],
    ]
)

_DL = np.array(
    [
        [-1.0, -1.0, -1.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ]
)


def _barycentric(xi):
    xi = np.asarray(xi, dtype=float)
    l1 = xi[..., 0]
    l2 = xi[..., 1]
    l3 = xi[..., 2]
    l0 = 1.0 - l1 - l2 - l3
    return l0, l1, l2, l3


def shape_tet4(xi):
    """Linear shape functions on the reference tetrahedron.

    Parameters
    ----------
    xi : array_like, shape (..., 3)
        Reference coordinates.

    Returns
    -------
    values : ndarray, shape (..., 4)
    gradients : ndarray, shape (..., 4, 3)
        Gradients with respect to the reference coordinates (constant).
    """
    l0, l1, l2, l3 = _barycentric(xi)
    values = np.stack([l0, l1, l2, l3], axis=-1)
    gradients = np.broadcast_to(_DL, values.shape + (3,)).copy()
    return values, gradients


def shape_tet10(xi):
    """Quadratic shape functions on the reference tetrahedron.

    Node order: corners 0-3, then midpoints of TET10_EDGES.

    Returns
    -------
    values : ndarray, shape (..., 10)
    gradients : ndarray, shape (..., 10, 3)
    """
    l0, l1, l2, l3 = _barycentric(xi)
    L = np.stack([l0, l1, l2, l3], axis=-1)
    values = np.empty(L.shape[:-1] + (10,))
    gradients = np.empty(L.shape[:-1] + (10, 3))
    for i in range(4):
        values[..., i] = L[..., i] * (2.0 * L[..., i] - 1.0)
        gradients[..., i, :] = (4.0 * L[..., i] - 1.0)[..., None] * _DL[i]
    for m, (a, b) in enumerate(TET10_EDGES):
        values[..., 4 + m] = 4.0 * L[..., a] * L[..., b]
        gradients[..., 4 + m, :] = 4.0 * (
            L[..., a][..., None] * _DL[b] + L[..., b][..., None] * _DL[a]
        )
    return values, gradients


@dataclass(frozen=True)
class QuadratureRule:
    """Quadrature points in reference coordinates; weights sum to 1/6."""

    points: np.ndarray
    weights: np.ndarray


def quadrature_tet4pt() -> QuadratureRule:
    """Degree-2 four-point rule on the reference tetrahedron.

    Barycentric points (a, b, b, b) and permutations with
    a = 0.585410196624969, b = 0.138196601125011, weight 1/24 each.
    Exact for polynomials of total degree <= 2 (not degree 3).
    """
    a = 0.585410196624969
    b = 0.138196601125011
    bary = np.full((4, 4), b)
    np.fill_diagonal(bary, a)
    points = bary[:, 1:].copy()  # (L1, L2, L3) are the reference coords
    weights = np.full(4, 1.0 / 24.0)
    return QuadratureRule(points=points, weights=weights)


_QUAD = quadrature_tet4pt()
_N10_Q, _DN10_Q = shape_tet10(_QUAD.points)  # (4,10), (4,10,3)
_N4_Q, _DN4_Q = shape_tet4(_QUAD.points)  # (4,4), (4,4,3)


@dataclass(frozen=True)
class GlsParams:
    """Stabilization factor tau (N/mm^2) and on/off flag."""

    tau: float = 0.0
    enabled: bool = False

    def __post_init__(self):
        if not np.isfinite(self.tau) or self.tau < 0.0:
            raise ConfigError(f"tau must be finite and >= 0, got {self.tau}")


def tau_gls(h: float, k: float, dt: float) -> float:
    """Stabilization factor tau = h^2 / (4 k dt).

    h is the element circumsphere radius (mm), k the permeability
    (mm^4 N^-1 s^-1) and dt the time step (s).
    """
    if h <= 0.0 or k <= 0.0 or dt <= 0.0:
        raise ConfigError(
            f"tau_gls requires positive h, k, dt (got h={h}, k={k}, dt={dt})"
        )
    return h * h / (4.0 * k * dt)


@dataclass
class ElementMatrices:
    """Element blocks and internal forces for one Tet10 u-p element.

    k_pp is the (positive semidefinite) pressure Laplacian; the solver
    applies the -dt scaling when it places the block. f_int_p is the
    unscaled fluid residual k_pp @ p + M_pu @ (u - u_prev)/dt with
    M_pu = -k_up^T.
    """

    k_uu: np.ndarray
    k_up: np.ndarray
    k_pp: np.ndarray
    k_uu_gls: np.ndarray
    f_int_u: np.ndarray
    f_int_p: np.ndarray
    f_gls_u: np.ndarray


def _det3(a):
    return (
        a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
        - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
        + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0])
    )


def _inv3(a, det=None):
    if det is None:
        det = _det3(a)
    inv = np.empty_like(a)
    inv[..., 0, 0] = a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1]
    inv[..., 0, 1] = a[..., 0, 2] * a[..., 2, 1] - a[..., 0, 1] * a[..., 2, 2]
    inv[..., 0, 2] = a[..., 0, 1] * a[..., 1, 2] - a[..., 0, 2] * a[..., 1, 1]
    inv[..., 1, 0] = a[..., 1, 2] * a[..., 2, 0] - a[..., 1, 0] * a[..., 2, 2]
    inv[..., 1, 1] = a[..., 0, 0] * a[..., 2, 2] - a[..., 0, 2] * a[..., 2, 0]
    inv[..., 1, 2] = a[..., 0, 2] * a[..., 1, 0] - a[..., 0, 0] * a[..., 1, 2]
    inv[..., 2, 0] = a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0]
    inv[..., 2, 1] = a[..., 0, 1] * a[..., 2, 0] - a[..., 0, 0] * a[..., 2, 1]
    inv[..., 2, 2] = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    return inv / det[..., None, None]


def element_matrices_batch(
    X,
    u,
    u_prev,
    p,
    lam,
    mu,
    k,
    tau,
    dt,
    element_ids=None,
):
    """Evaluate the coupled element kernels for a batch of elements.

    Parameters
    ----------
    X : (n, 10, 3) reference nodal coordinates, mm
    u, u_prev : (n, 30) nodal displacements at the current iterate and the
        previous converged step, mm
    p : (n, 4) corner pressures, MPa
    lam, mu : Lame constants, MPa
    k : permeability, mm^4 N^-1 s^-1
    tau : (n,) per-element stabilization factor (zeros disable GLS)
    dt : time step, s
    element_ids : optional (n,) global ids used in error messages

    Returns
    -------
    dict with stacked arrays: k_uu (n,30,30), k_up (n,30,4), k_pp (n,4,4),
    k_uu_gls (n,30,30), f_int_u (n,30), f_int_p (n,4), f_gls_u (n,30).
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    u = np.asarray(u, dtype=float).reshape(n, 30)
    u_prev = np.asarray(u_prev, dtype=float).reshape(n, 30)
    p = np.asarray(p, dtype=float).reshape(n, 4)
    tau = np.asarray(tau, dtype=float).reshape(n)

    u_nodes = u.reshape(n, 10, 3)
    x_cur = X + u_nodes  # current configuration

    k_uu = np.zeros((n, 30, 30))
    k_up = np.zeros((n, 30, 4))
    k_pp = np.zeros((n, 4, 4))
    k_gls = np.zeros((n, 30, 30))
    f_u_stress = np.zeros((n, 30))

    eye3 = np.eye(3)

    for q in range(4):
        G = _DN10_Q[q]  # (10,3) reference gradients
        w = _QUAD.weights[q]

        jac_x = np.matmul(x_cur.transpose(0, 2, 1), G)  # (n,3,3)
        det_x = _det3(jac_x)
        jac_X = np.matmul(X.transpose(0, 2, 1), G)
        det_X = _det3(jac_X)

        # deformation gradient F = I + du/dX
        dn_X = np.matmul(G, _inv3(jac_X, det_X))  # (n,10,3)
        F = np.matmul(u_nodes.transpose(0, 2, 1), dn_X) + eye3
        J = _det3(F)

        bad = (det_x <= 0.0) | (J <= 0.0)
        if np.any(bad):
            idx = int(np.argmax(bad))
            eid = int(element_ids[idx]) if element_ids is not None else idx
            raise InvertedElementError(eid, quad_point=q)

        dn_x = np.matmul(G, _inv3(jac_x, det_x))  # (n,10,3) spatial gradients
        wdet = w * det_x

        # Cauchy stress and spatial tangent of the Neo-Hooke model
        lnJ = np.log(J)
        b = np.matmul(F, F.transpose(0, 2, 1))
        sig = (mu / J)[:, None, None] * (b - eye3) + (
            lam * lnJ / J
        )[:, None, None] * eye3
        lam_p = lam / J
        mu_p = (mu - lam * lnJ) / J

        D = np.zeros((n, 6, 6))
        for i in range(3):
            for j in range(3):
                D[:, i, j] = lam_p
            D[:, i, i] += 2.0 * mu_p
            D[:, 3 + i, 3 + i] = mu_p

        gx = dn_x[:, :, 0]
        gy = dn_x[:, :, 1]
        gz = dn_x[:, :, 2]
        B = np.zeros((n, 6, 30))
        B[:, 0, 0::3] = gx
        B[:, 1, 1::3] = gy
        B[:, 2, 2::3] = gz
        B[:, 3, 0::3] = gy
        B[:, 3, 1::3] = gx
        B[:, 4, 1::3] = gz
        B[:, 4, 2::3] = gy
        B[:, 5, 0::3] = gz
        B[:, 5, 2::3] = gx

        sig_v = np.stack(
            [
                sig[:, 0, 0],
                sig[:, 1, 1],
                sig[:, 2, 2],
                sig[:, 0, 1],
                sig[:, 1, 2],
                sig[:, 0, 2],
            ],
            axis=1,
        )

        Bt = B.transpose(0, 2, 1)
        k_uu += wdet[:, None, None] * np.matmul(Bt, np.matmul(D, B))

        # geometric stiffness: (grad N)^T sigma (grad N) on each 3x3 diagonal
        S = np.matmul(dn_x, np.matmul(sig, dn_x.transpose(0, 2, 1)))  # (n,10,10)
        Sw = wdet[:, None, None] * S
        for a in range(3):
            k_uu[:, a::3, a::3] += Sw

        b_div = dn_x.reshape(n, 30)  # div(u) = b_div @ u_el
        Np = _N4_Q[q]  # (4,)
        k_up -= (wdet[:, None] * b_div)[:, :, None] * Np[None, None, :]

        dnp_x = np.matmul(_DN4_Q[q], _inv3(jac_x, det_x))  # (n,4,3)
        k_pp += (k * wdet)[:, None, None] * np.matmul(
            dnp_x, dnp_x.transpose(0, 2, 1)
        )

        k_gls += (tau * wdet)[:, None, None] * np.matmul(
            b_div[:, :, None], b_div[:, None, :]
        )

        f_u_stress += wdet[:, None] * np.matmul(Bt, sig_v[:, :, None])[:, :, 0]

    du = u - u_prev
    f_int_u = f_u_stress + np.matmul(k_up, p[:, :, None])[:, :, 0]
    gls_arg = u if GLS_FORCE_ON_TOTAL else du
    f_gls_u = np.matmul(k_gls, gls_arg[:, :, None])[:, :, 0]
    m_pu = -k_up.transpose(0, 2, 1)
    f_int_p = (
        np.matmul(k_pp, p[:, :, None])[:, :, 0]
        + np.matmul(m_pu, du[:, :, None])[:, :, 0] / dt
    )

    return {
        "k_uu": k_uu,
        "k_up": k_up,
        "k_pp": k_pp,
        "k_uu_gls": k_gls,
        "f_int_u": f_int_u,
        "f_int_p": f_int_p,
        "f_gls_u": f_gls_u,
    }


def element_matrices(X, u, u_prev, p, mat, perm, gls, dt) -> ElementMatrices:
    """Single-element kernel; see element_matrices_batch for conventions.

    Parameters
    ----------
    X : (10, 3) reference coordinates
    u, u_prev : (30,) or (10, 3) displacements
    p : (4,) corner pressures
    mat : material.NeoHookeParams
    perm : material.PermeabilityParams
    gls : GlsParams (tau is this element's stabilization factor)
    dt : time step, s
    """
    tau = gls.tau if gls.enabled else 0.0
    out = element_matrices_batch(
        np.asarray(X, dtype=float)[None],
        np.asarray(u, dtype=float).reshape(1, 30),
        np.asarray(u_prev, dtype=float).reshape(1, 30),
        np.asarray(p, dtype=float).reshape(1, 4),
        mat.lam,
        mat.mu,
        perm.k,
        np.array([tau]),
        dt,
    )
    return ElementMatrices(
        k_uu=out["k_uu"][0],
        k_up=out["k_up"][0],
        k_pp=out["k_pp"][0],
        k_uu_gls=out["k_uu_gls"][0],
        f_int_u=out["f_int_u"][0],
        f_int_p=out["f_int_p"][0],
        f_gls_u=out["f_gls_u"][0],
    )
