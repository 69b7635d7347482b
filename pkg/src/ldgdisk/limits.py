"""Closed-form escape limits, the tangent projection, and the tubular split.

The deep-sample limit of a minimizer with even winding is a uniaxial field
over an explicit unit director that escapes out of plane at the center.  This
module evaluates that field, projects tensors onto the tangent space of the
uniaxial manifold along it, and splits a nearby field into a director
perturbation plus a normal remainder scaled by eps^2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import io as ldgio
from .radial import RadialGrid, RadialProfile, make_profile
from .tensors import MaterialParams, derive_params, frame_basis
from .tolerances import TOL

SQRT2 = math.sqrt(2.0)
SQRT6 = math.sqrt(6.0)


class OutOfNeighborhoodError(ValueError):
    """A sample sits too far from the limit manifold for the split."""


def w_star_profiles(rho: np.ndarray, k: int, params: MaterialParams,
                    sign: int = +1) -> np.ndarray:
    """Frame coordinates of the escaped limit on the unit disk, sampled at
    radii ``rho``; only components 0, 1, 3 are nonzero."""
    rho = np.asarray(rho, dtype=float)
    s = params.s_plus
    rk = rho**abs(k)
    denom = (1.0 + rk) ** 2
    out = np.zeros(rho.shape + (5,))
    out[..., 0] = s * (2.0 * (1.0 - rk) ** 2 - 4.0 * rk) / (SQRT6 * denom)
    out[..., 1] = 4.0 * s * rk / (SQRT2 * denom)
    out[..., 3] = sign * 4.0 * s * rho ** (abs(k) / 2.0) * (1.0 - rk) / (SQRT2 * denom)
    return out


def n3_scalar(rho: np.ndarray, k: int) -> np.ndarray:
    """Vertical director component (1 - r^k)/(1 + r^k), the zero mode of the
    unconstrained second variation around the limit."""
    rho = np.asarray(rho, dtype=float)
    rk = rho**abs(k)
    return (1.0 - rk) / (1.0 + rk)


@dataclass(frozen=True)
class HarmonicLimit:
    """Escaped harmonic director field and its uniaxial tensor, unit disk."""

    k: int
    params: MaterialParams
    sign: int = +1

    def __post_init__(self) -> None:
        k = int(self.k)
        if k == 0 or k % 2 != 0:
            raise ValueError(f"winding must be even and nonzero, got k={k}")
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "k", k)

    def n_star(self, rho, phi) -> np.ndarray:
        """Unit director at polar unit-disk coordinates; shape (..., 3)."""
        rho = np.asarray(rho, dtype=float)
        phi = np.asarray(phi, dtype=float)
        rho, phi = np.broadcast_arrays(rho, phi)
        k = self.k
        rk = rho ** abs(k)
        denom = 1.0 + rk
        half = 0.5 * k * phi
        out = np.empty(rho.shape + (3,))
        out[..., 0] = 2.0 * rho ** (abs(k) / 2.0) * np.cos(half) / denom
        out[..., 1] = 2.0 * rho ** (abs(k) / 2.0) * np.sin(half) / denom
        out[..., 2] = self.sign * (1.0 - rk) / denom
        return out

    def q_star(self, rho, phi) -> np.ndarray:
        """Uniaxial tensor s_plus (n (x) n - I/3); shape (..., 3, 3)."""
        n = self.n_star(rho, phi)
        s = self.params.s_plus
        eye = np.eye(3)
        return s * (n[..., :, None] * n[..., None, :] - eye / 3.0)

    def w_profiles(self, rho) -> np.ndarray:
        return w_star_profiles(rho, self.k, self.params, self.sign)

    def grad_n_sq(self, rho) -> np.ndarray:
        """|grad n_*|^2 = 2 k^2 r^(k-2) / (1 + r^k)^2 on the unit disk."""
        rho = np.asarray(rho, dtype=float)
        k = abs(self.k)
        return 2.0 * k * k * rho ** (k - 2) / (1.0 + rho**k) ** 2


def pi_tangent(a: np.ndarray, q_star: np.ndarray, params: MaterialParams) -> np.ndarray:
    """Projection of ``a`` onto the tangent space of the uniaxial manifold at
    ``q_star``; its kernel is exactly the matrices commuting with q_star."""
    a = np.asarray(a, dtype=float)
    q = np.asarray(q_star, dtype=float)
    s = params.s_plus
    eye = np.eye(3)
    inner = (s / 3.0) * a - a @ q - q @ a
    return a + (2.0 / s**2) * inner @ (q - (s / 6.0) * eye)


@dataclass(frozen=True)
class Decomposition:
    """Split Q = s_plus (v (x) v - I/3) + eps^2 P with v the normalized tilt
    of the limit director by psi (psi . n_* = 0) and P normal at Q_*."""

    limit: HarmonicLimit
    grid: object
    psi: np.ndarray
    P: np.ndarray
    eps: float

    def __post_init__(self) -> None:
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")


def _tangent_frame_vectors(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal pair spanning the plane normal to the unit field n."""
    helper = np.zeros_like(n)
    use_e3 = np.abs(n[..., 2]) < 0.9
    helper[..., 2] = np.where(use_e3, 1.0, 0.0)
    helper[..., 0] = np.where(use_e3, 0.0, 1.0)
    t1 = helper - (np.einsum("...i,...i->...", helper, n))[..., None] * n
    t1 = t1 / np.linalg.norm(t1, axis=-1, keepdims=True)
    t2 = np.cross(n, t1)
    return t1, t2


def _sym_basis(n: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Normalized symmetric product (t (x) n + n (x) t)/sqrt(2)."""
    return (t[..., :, None] * n[..., None, :] + n[..., :, None] * t[..., None, :]) / SQRT2


def field_matrices(f) -> np.ndarray:
    """Tensor samples of a disk field, via the winding frame at each angle."""
    frames = frame_basis(f.k, f.grid.phi_nodes())      # (N_phi, 5, 3, 3)
    return np.einsum("ijc,jcab->ijab", f.values, frames)


def matrices_to_w(q: np.ndarray, k: int, phi: np.ndarray) -> np.ndarray:
    frames = frame_basis(k, phi)
    return np.einsum("...jab,jcab->...jc", q, frames)


def decompose(f, eps: float, limit: HarmonicLimit | None = None,
              radius: float | None = None, vdotn_min: float | None = None,
              max_iter: int = 50) -> Decomposition:
    """Per-sample Newton split of a disk field around the escaped limit.

    The two unknowns per sample are the tilt coordinates of the director in
    the tangent plane at n_*(x); the two equations kill the components of
    Q - Q_sharp along the tangent space of the manifold at Q_*(x), so the
    remainder is normal there by construction.
    """
    params = f.params
    s = params.s_plus
    radius = 0.5 * s if radius is None else float(radius)
    vdotn_min = TOL["min_v_dot_n"] if vdotn_min is None else float(vdotn_min)
    if limit is None:
        limit = _pick_limit_sign(f)

    g = f.grid
    rho = (g.r_nodes() / g.R)[:, None]
    phi = g.phi_nodes()[None, :]
    q = field_matrices(f)                                # (N_r, N_phi, 3, 3)
    n = limit.n_star(rho, phi)                           # (N_r, N_phi, 3)
    q_lim = limit.q_star(rho, phi)

    dist = np.linalg.norm(q - q_lim, axis=(-2, -1))
    if np.any(dist > radius):
        i, j = np.unravel_index(int(np.argmax(dist)), dist.shape)
        raise OutOfNeighborhoodError(
            f"sample (i={i}, j={j}) at r={g.r_nodes()[i]:.4g}, "
            f"phi={g.phi_nodes()[j]:.4g} lies {dist[i, j]:.4g} from the limit "
            f"(radius {radius:.4g})"
        )

    t1, t2 = _tangent_frame_vectors(n)
    g1 = _sym_basis(n, t1)
    g2 = _sym_basis(n, t2)

    u = np.zeros(q.shape[:2] + (2,))
    eye = np.eye(3)
    tol = TOL["decomp_newton"] * s
    converged = np.zeros(q.shape[:2], dtype=bool)
    for _ in range(max_iter):
        y = n + u[..., 0:1] * t1 + u[..., 1:2] * t2
        ynorm = np.linalg.norm(y, axis=-1, keepdims=True)
        v = y / ynorm
        q_sharp = s * (v[..., :, None] * v[..., None, :] - eye / 3.0)
        resid = q - q_sharp
        f1 = np.einsum("...ab,...ab->...", resid, g1)
        f2 = np.einsum("...ab,...ab->...", resid, g2)
        fmax = np.maximum(np.abs(f1), np.abs(f2))
        converged = fmax <= tol
        if bool(np.all(converged)):
            break

        proj = eye - v[..., :, None] * v[..., None, :]
        dv1 = np.einsum("...ab,...b->...a", proj, t1) / ynorm
        dv2 = np.einsum("...ab,...b->...a", proj, t2) / ynorm

        def dq(dv):
            return s * (dv[..., :, None] * v[..., None, :] + v[..., :, None] * dv[..., None, :])

        j11 = np.einsum("...ab,...ab->...", dq(dv1), g1)
        j12 = np.einsum("...ab,...ab->...", dq(dv2), g1)
        j21 = np.einsum("...ab,...ab->...", dq(dv1), g2)
        j22 = np.einsum("...ab,...ab->...", dq(dv2), g2)
        det = j11 * j22 - j12 * j21
        if np.any(np.abs(det) < 1e-14):
            i, j = np.unravel_index(int(np.argmin(np.abs(det))), det.shape)
            raise OutOfNeighborhoodError(
                f"singular Newton system at sample (i={i}, j={j})"
            )
        du1 = (j22 * f1 - j12 * f2) / det
        du2 = (-j21 * f1 + j11 * f2) / det
        u = u + np.stack([du1, du2], axis=-1)
    else:
        i, j = np.unravel_index(int(np.argmax(fmax)), fmax.shape)
        raise OutOfNeighborhoodError(
            f"Newton did not converge at sample (i={i}, j={j}) "
            f"(residual {fmax[i, j]:.3e})"
        )

    vdotn = np.einsum("...i,...i->...", v, n)
    if np.any(vdotn < vdotn_min):
        i, j = np.unravel_index(int(np.argmin(vdotn)), vdotn.shape)
        raise OutOfNeighborhoodError(
            f"director tilt too large at sample (i={i}, j={j}): "
            f"v.n = {vdotn[i, j]:.4g} < {vdotn_min}"
        )

    psi = v / vdotn[..., None] - n
    p_field = (q - s * (v[..., :, None] * v[..., None, :] - eye / 3.0)) / eps**2
    return Decomposition(limit=limit, grid=g, psi=psi, P=p_field, eps=float(eps))


def _pick_limit_sign(f) -> HarmonicLimit:
    """Escape sign maximizing alignment with the field's w3 component."""
    g = f.grid
    wstar = w_star_profiles(g.r_nodes() / g.R, f.k, f.params, +1)
    score = float(np.einsum("ij,i->", f.values[:, :, 3], wstar[:, 3]))
    return HarmonicLimit(k=f.k, params=f.params, sign=+1 if score >= 0.0 else -1)


def reconstruct(dec: Decomposition) -> np.ndarray:
    """Tensor samples of the field encoded by a decomposition."""
    g = dec.grid
    rho = (g.r_nodes() / g.R)[:, None]
    phi = g.phi_nodes()[None, :]
    n = dec.limit.n_star(rho, phi)
    y = n + dec.psi
    v = y / np.linalg.norm(y, axis=-1, keepdims=True)
    s = dec.limit.params.s_plus
    eye = np.eye(3)
    return s * (v[..., :, None] * v[..., None, :] - eye / 3.0) + dec.eps**2 * dec.P


def manifold_defect(f) -> float:
    """L2 distance of a field from the limit manifold.

    Chart-free companion to :func:`decompose`: the nearest preferred-order
    uniaxial tensor at every sample comes from the top eigenvector, so the
    number stays defined for fields that leave the tubular neighborhood
    entirely, which a mountain-pass saddle does by necessity.
    """
    q = field_matrices(f)
    s = f.params.s_plus
    _, vecs = np.linalg.eigh(q)
    v = vecs[..., :, 2]
    eye = np.eye(3)
    q_star = s * (v[..., :, None] * v[..., None, :] - eye / 3.0)
    diff = q - q_star
    dist2 = np.einsum("...ab,...ab->...", diff, diff)
    g = f.grid
    return math.sqrt(float(dist2.sum(axis=1) @ g.r_nodes()) * g.h * g.dphi)


def eps_norm(p_field: np.ndarray, eps: float, grid) -> float:
    """L2 norm plus eps-weighted first and second difference quotients.

    Derivatives are polar: d_r via np.gradient (central inside, one-sided at
    the ends), d_phi periodic central; the second-order block uses d_rr, the
    mixed d_r (d_phi / r) and d_phiphi / r^2 as a surrogate for the full
    Hessian norm.
    """
    p = np.asarray(p_field, dtype=float)
    r = grid.r_nodes()
    h, dphi = grid.h, grid.dphi
    rcol = r.reshape((-1,) + (1,) * (p.ndim - 1))

    def l2(arr) -> float:
        comp = arr.reshape(arr.shape[0], arr.shape[1], -1)
        dens = np.einsum("ijc,ijc->i", comp, comp)
        return float(dens @ r) * h * dphi

    dr = np.gradient(p, r, axis=0)
    dphi_p = (np.roll(p, -1, axis=1) - np.roll(p, 1, axis=1)) / (2.0 * dphi) / rcol
    first = l2(dr) + l2(dphi_p)

    drr = np.gradient(dr, r, axis=0)
    drphi = np.gradient(dphi_p, r, axis=0)
    dphiphi = (np.roll(p, -1, axis=1) - 2.0 * p + np.roll(p, 1, axis=1)) / (dphi * rcol) ** 2
    second = l2(drr) + 2.0 * l2(drphi) + l2(dphiphi)

    return math.sqrt(l2(p)) + eps * math.sqrt(first) + eps * eps * math.sqrt(second)


def init_harmonic_radial(grid: RadialGrid, k: int, params: MaterialParams,
                         sign: int = +1, ansatz: str = "O2") -> RadialProfile:
    """Radial profile of the escaped limit rescaled to the grid radius."""
    vals = w_star_profiles(grid.nodes() / grid.R, k, params, sign)
    return make_profile(grid, ansatz, k, params, vals)


def save_decomposition(path_base: str, dec: Decomposition) -> None:
    """Two tagged binary containers plus a small JSON sidecar holding eps and
    the escape sign (the container header has no slot for them)."""
    g = dec.grid
    prm = dec.limit.params
    coeffs = (prm.a2, prm.b2, prm.c2)
    k = dec.limit.k
    ldgio.write_container(f"{path_base}.psi.ldg2", k=k, R=g.R, n_r=g.N_r,
                          n_phi=g.N_phi, coeffs=coeffs, payload=dec.psi,
                          tag=ldgio.TAG_PSI)
    p_w = matrices_to_w(dec.P, k, g.phi_nodes())
    ldgio.write_container(f"{path_base}.pnormal.ldg2", k=k, R=g.R, n_r=g.N_r,
                          n_phi=g.N_phi, coeffs=coeffs, payload=p_w,
                          tag=ldgio.TAG_P)
    with open(f"{path_base}.meta.json", "w", encoding="utf-8") as fh:
        json.dump({"eps": dec.eps, "sign": dec.limit.sign}, fh)


def load_decomposition(path_base: str):
    """Inverse of :func:`save_decomposition`; imports the polar grid type
    lazily to keep this module free of a dependency cycle."""
    from .disk import PolarGrid

    rec_psi = ldgio.read_container(f"{path_base}.psi.ldg2")
    rec_p = ldgio.read_container(f"{path_base}.pnormal.ldg2")
    with open(f"{path_base}.meta.json", "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    if rec_psi["tag"] != ldgio.TAG_PSI or rec_p["tag"] != ldgio.TAG_P:
        raise ValueError("payload tags do not match the expected pair")
    grid = PolarGrid(R=rec_psi["R"], N_r=rec_psi["n_r"], N_phi=rec_psi["n_phi"])
    params = derive_params(*rec_psi["coeffs"])
    limit = HarmonicLimit(k=rec_psi["k"], params=params, sign=int(meta["sign"]))
    frames = frame_basis(limit.k, grid.phi_nodes())
    p_mat = np.einsum("ijc,jcab->ijab", rec_p["payload"], frames)
    return Decomposition(limit=limit, grid=grid, psi=rec_psi["payload"],
                         P=p_mat, eps=float(meta["eps"]))
