"""Linearized operators and second-variation probes.

Three instruments: the scalar and tangent-constrained spectra of the escape
linearization -laplace - |grad n_*|^2 on the unit disk, the pointwise
zeroth-order operator acting on the normal space of the uniaxial manifold,
and matrix-free finite-difference Hessian probes of the discrete energies at
converged critical points.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .disk import DiskField, PolarGrid, disk_gradient
from .limits import HarmonicLimit, _tangent_frame_vectors, n3_scalar
from .radial import RadialProfile, make_profile, radial_gradient
from .tensors import MaterialParams
from .tolerances import TOL


@dataclass(frozen=True)
class SpectralReport:
    """Few smallest eigenvalues of a discretized operator, with residuals."""

    operator: str
    constraint: str
    eigenvalues: np.ndarray
    residuals: np.ndarray
    grid: dict
    eigenvectors: np.ndarray | None = None

    def __post_init__(self) -> None:
        ev = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "residuals", np.asarray(self.residuals, dtype=float))

    def to_json(self) -> str:
        return json.dumps({
            "operator": self.operator,
            "constraint": self.constraint,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "residuals": [float(v) for v in self.residuals],
            "grid": self.grid,
        }, indent=2)

    @staticmethod
    def from_json(text: str) -> "SpectralReport":
        rec = json.loads(text)
        return SpectralReport(operator=rec["operator"], constraint=rec["constraint"],
                              eigenvalues=np.array(rec["eigenvalues"]),
                              residuals=np.array(rec["residuals"]), grid=rec["grid"])


def save_report(path, report: SpectralReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())


def load_report(path) -> SpectralReport:
    with open(path, "r", encoding="utf-8") as fh:
        return SpectralReport.from_json(fh.read())


def _grad_n_sq_profile(rho: np.ndarray, k: int) -> np.ndarray:
    k = abs(k)
    return 2.0 * k * k * rho ** (k - 2) / (1.0 + rho**k) ** 2


def _tangent_frames_polar(rho: np.ndarray, phi: np.ndarray, k: int) -> np.ndarray:
    """Smooth orthonormal tangent pair of the escaped director, shape
    (N_r, N_phi, 3, 2): the meridian direction and the in-plane normal."""
    rk = rho**abs(k)
    cos_t = (1.0 - rk) / (1.0 + rk)
    sin_t = 2.0 * rho ** (abs(k) / 2.0) / (1.0 + rk)
    half = 0.5 * k * phi
    c, s = np.cos(half), np.sin(half)
    cos_t, c = np.broadcast_arrays(cos_t, c)
    sin_t, s = np.broadcast_arrays(sin_t, s)
    b = np.empty(cos_t.shape + (3, 2))
    b[..., 0, 0] = cos_t * c
    b[..., 1, 0] = cos_t * s
    b[..., 2, 0] = -sin_t
    b[..., 0, 1] = -s
    b[..., 1, 1] = c
    b[..., 2, 1] = np.zeros_like(c)
    return b


def assemble_l_parallel(k: int, constrained: bool, grid: PolarGrid):
    """Sparse stiffness and mass for the escape linearization on the unit
    disk, Dirichlet at r = 1.

    Scalar fields carry one degree of freedom per node; the constrained
    problem carries the two coordinates of a tangent vector field in the
    smooth frame, so the pointwise constraint is eliminated exactly.  Both
    keep explicit origin ghost unknowns (Cartesian at the center) tied to the
    first ring by half-cell faces.
    """
    if k == 0 or k % 2 != 0:
        raise ValueError(f"winding must be even and nonzero, got k={k}")
    if abs(grid.R - 1.0) > 1e-12:
        raise ValueError("the operator lives on the unit disk; use grid R = 1")

    n_r, n_phi = grid.N_r, grid.N_phi
    h, dphi = grid.h, grid.dphi
    r = grid.r_nodes()
    phi = grid.phi_nodes()
    pot = _grad_n_sq_profile(r, k)
    pot0 = float(_grad_n_sq_profile(np.array(0.0), k))

    ncomp = 2 if constrained else 1
    nghost = 3 if constrained else 1
    ndof = n_r * n_phi * ncomp + nghost
    ghost0 = n_r * n_phi * ncomp

    def idx(i, j, c=0):
        return (i * n_phi + j) * ncomp + c

    rows, cols, vals = [], [], []

    def add(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    if constrained:
        frames = _tangent_frames_polar(r[:, None], phi[None, :], k)  # (n_r, n_phi, 3, 2)

    def add_face(a, b, coeff, bt_b=None):
        """Face energy coeff*|zeta_a - zeta_b|^2 in the local coordinates;
        bt_b is the 2x2 (or scalar) frame overlap between the two nodes."""
        for c in range(ncomp):
            add(a + c, a + c, coeff)
            add(b + c, b + c, coeff)
        if bt_b is None:
            for c in range(ncomp):
                add(a + c, b + c, -coeff)
                add(b + c, a + c, -coeff)
        else:
            for c1 in range(ncomp):
                for c2 in range(ncomp):
                    add(a + c1, b + c2, -coeff * bt_b[c1, c2])
                    add(b + c2, a + c1, -coeff * bt_b[c1, c2])

    # radial faces
    for i in range(n_r - 1):
        coeff = (i + 1.0) * dphi  # r_f/h * dphi with r_f = (i+1) h
        for j in range(n_phi):
            a, b = idx(i, j), idx(i + 1, j)
            if constrained:
                bt = frames[i, j].T @ frames[i + 1, j]
                add_face(a, b, coeff, bt)
            else:
                add_face(a, b, coeff)

    # Dirichlet boundary half-face
    cb = 2.0 * (1.0 - 0.25 * h) * dphi / h
    for j in range(n_phi):
        for c in range(ncomp):
            add(idx(n_r - 1, j, c), idx(n_r - 1, j, c), cb)

    # angular faces
    for i in range(n_r):
        coeff = h / (r[i] * dphi)
        for j in range(n_phi):
            jn = (j + 1) % n_phi
            a, b = idx(i, j), idx(i, jn)
            if constrained:
                bt = frames[i, j].T @ frames[i, jn]
                add_face(a, b, coeff, bt)
            else:
                add_face(a, b, coeff)

    # origin ghost faces; the ghost is Cartesian for the constrained problem
    co = 0.5 * dphi
    for j in range(n_phi):
        if constrained:
            bmat = frames[0, j]  # 3x2
            for c in range(2):
                add(idx(0, j, c), idx(0, j, c), co)
            for c in range(2):
                for c3 in range(3):
                    add(idx(0, j, c), ghost0 + c3, -co * bmat[c3, c])
                    add(ghost0 + c3, idx(0, j, c), -co * bmat[c3, c])
        else:
            add(idx(0, j), idx(0, j), co)
            add(idx(0, j), ghost0, -co)
            add(ghost0, idx(0, j), -co)
    for c3 in range(nghost):
        add(ghost0 + c3, ghost0 + c3, co * n_phi)

    # potential and mass
    mass = np.zeros(ndof)
    for i in range(n_r):
        cell = r[i] * h * dphi
        for j in range(n_phi):
            for c in range(ncomp):
                add(idx(i, j, c), idx(i, j, c), -pot[i] * cell)
                mass[idx(i, j, c)] = cell
    mghost = math.pi * (0.25 * h) ** 2
    for c3 in range(nghost):
        add(ghost0 + c3, ghost0 + c3, -float(pot0) * mghost)
        mass[ghost0 + c3] = mghost

    a_mat = sp.csr_matrix((vals, (rows, cols)), shape=(ndof, ndof))
    a_mat = 0.5 * (a_mat + a_mat.T)
    m_mat = sp.diags(mass).tocsr()
    return a_mat, m_mat


def l_parallel_spectrum(k: int, constrained: bool, grid: PolarGrid, m: int = 6,
                        keep_vectors: bool = False) -> SpectralReport:
    """Smallest eigenvalues of the escape linearization, Dirichlet on the
    unit disk, by shift-inverted Lanczos below the spectrum."""
    a_mat, m_mat = assemble_l_parallel(k, constrained, grid)
    sigma = -(2.0 * k * k + 1.0)
    vals, vecs = eigsh(a_mat, k=m, M=m_mat, sigma=sigma, which="LM")
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]

    a_norm = float(np.abs(a_mat).sum(axis=1).max())
    residuals = np.array([
        float(np.linalg.norm(a_mat @ vecs[:, i] - vals[i] * (m_mat @ vecs[:, i])))
        for i in range(len(vals))
    ])
    return SpectralReport(
        operator="escape_linearization",
        constraint="tangent_fiber" if constrained else "none",
        eigenvalues=vals,
        residuals=residuals,
        grid={"N_r": grid.N_r, "N_phi": grid.N_phi, "R": grid.R, "k": k,
              "a_norm": a_norm},
        eigenvectors=vecs if keep_vectors else None,
    )


def scalar_mode_correlation(report: SpectralReport, grid: PolarGrid, k: int) -> float:
    """Mass-weighted correlation of the first scalar eigenvector with the
    vertical director component of the escape limit."""
    if report.eigenvectors is None:
        raise ValueError("report was built without keep_vectors=True")
    v = report.eigenvectors[:, 0]
    n_r, n_phi = grid.N_r, grid.N_phi
    target = np.empty(n_r * n_phi + 1)
    target[:-1] = np.repeat(n3_scalar(grid.r_nodes(), k), n_phi)
    target[-1] = 1.0
    mass = np.empty_like(target)
    mass[:-1] = np.repeat(grid.r_nodes() * grid.h * grid.dphi, n_phi)
    mass[-1] = math.pi * (0.25 * grid.h) ** 2
    num = abs(float(np.sum(mass * v * target)))
    den = math.sqrt(float(np.sum(mass * v * v)) * float(np.sum(mass * target * target)))
    return num / den


def l_perp_point_eigs(params: MaterialParams, x, k: int = 2, sign: int = +1) -> np.ndarray:
    """Eigenvalues of the zeroth-order bulk linearization restricted to the
    normal space at the limit tensor over the point x = (x1, x2)."""
    x = np.asarray(x, dtype=float)
    rho = float(np.hypot(x[0], x[1]))
    if rho >= 1.0:
        raise ValueError("x must lie in the open unit disk")
    phi = float(np.arctan2(x[1], x[0]))
    limit = HarmonicLimit(k=k, params=params, sign=sign)
    n = limit.n_star(np.array(rho), np.array(phi))
    basis = normal_basis(n)
    mat = np.empty((3, 3))
    for a in range(3):
        lp = _l_perp_apply(basis[a], n, params)
        for b in range(3):
            mat[a, b] = float(np.sum(lp * basis[b]))
    return np.sort(np.linalg.eigvalsh(0.5 * (mat + mat.T)))


def normal_basis(n: np.ndarray) -> np.ndarray:
    """Orthonormal basis (3, 3, 3) of matrices commuting with n (x) n."""
    t1, t2 = _tangent_frame_vectors(n)
    n1 = math.sqrt(1.5) * (np.outer(n, n) - np.eye(3) / 3.0)
    n2 = (np.outer(t1, t1) - np.outer(t2, t2)) / math.sqrt(2.0)
    n3 = (np.outer(t1, t2) + np.outer(t2, t1)) / math.sqrt(2.0)
    return np.stack([n1, n2, n3])


def _l_perp_apply(p: np.ndarray, n: np.ndarray, params: MaterialParams) -> np.ndarray:
    s = params.s_plus
    q_star = s * (np.outer(n, n) - np.eye(3) / 3.0)
    pnn = float(n @ p @ n)
    return params.b2 * s * p + 2.0 * (params.c2 * s - params.b2) * pnn * q_star


def l_perp_quadratic(p: np.ndarray, n: np.ndarray, params: MaterialParams) -> float:
    """Rayleigh quotient of the zeroth-order normal operator at a matrix."""
    denom = float(np.sum(p * p))
    return float(np.sum(_l_perp_apply(p, n, params) * p)) / denom


@dataclass(frozen=True)
class HessianProbe:
    """Smallest Ritz values of the finite-difference Hessian at a critical
    point, restricted to a component subspace, in squared-L2 units."""

    base_kind: str
    subspace: str
    eigenvalues: np.ndarray
    witnesses: np.ndarray
    grid: dict

    @property
    def smallest(self) -> float:
        return float(self.eigenvalues[0])


_SUBSPACE_COMPONENTS = {
    "w3-direction": (3,),
    "full-o2": (0, 1, 3),
    "z2o2": (0, 1),
    "full-5": (0, 1, 2, 3, 4),
}


def _base_machinery(base):
    if isinstance(base, RadialProfile):
        # re-host on the unmasked ansatz: probes deliberately perturb
        # components outside the base's own symmetry class
        kind = f"radial:{base.ansatz}"
        if base.ansatz != "FULL5":
            base = make_profile(base.grid, "FULL5", base.k, base.params,
                                base.values.copy())
        meas = 2.0 * math.pi * base.grid.nodes() * base.grid.h
        shape = (base.grid.N, 5)
        meas_full = np.repeat(meas[:, None], 5, axis=1)
        grad = lambda vals: radial_gradient(base.with_values(vals))
        grid_meta = {"N": base.grid.N, "R": base.grid.R}
    elif isinstance(base, DiskField):
        g = base.grid
        meas = g.r_nodes() * g.h * g.dphi
        shape = (g.N_r, g.N_phi, 5)
        meas_full = np.broadcast_to(meas[:, None, None], shape).copy()
        grad = lambda vals: disk_gradient(base.with_values(vals))
        grid_meta = {"N_r": g.N_r, "N_phi": g.N_phi, "R": g.R}
        kind = "disk"
    else:
        raise TypeError(f"unsupported base {type(base).__name__}")
    return base.values, grad, meas_full, shape, grid_meta, kind


def hessian_vector_product(base, direction: np.ndarray) -> np.ndarray:
    """Central finite-difference Hessian action on a full-shape direction.

    The direction is normalized before differencing and rescaled afterwards,
    so the product is exactly homogeneous of degree one.
    """
    values, grad, _, _, _, _ = _base_machinery(base)
    scale = float(np.max(np.abs(direction)))
    if scale == 0.0:
        return np.zeros_like(direction)
    e = direction / scale
    hstep = 1e-5 * (1.0 + float(np.max(np.abs(values))))
    gp = grad(values + hstep * e)
    gm = grad(values - hstep * e)
    return scale * (gp - gm) / (2.0 * hstep)


def hessian_smallest(base, subspace: str, m: int = 1, max_restarts: int = 5) -> HessianProbe:
    """Matrix-free Lanczos on the mass-normalized finite-difference Hessian,
    restricted to a component subspace; Ritz values are in L2 units so they
    are comparable across grids."""
    if subspace not in _SUBSPACE_COMPONENTS:
        raise ValueError(f"unknown subspace {subspace!r}; "
                         f"expected one of {sorted(_SUBSPACE_COMPONENTS)}")
    comps = _SUBSPACE_COMPONENTS[subspace]
    values, grad, meas_full, shape, grid_meta, kind = _base_machinery(base)

    sel = np.zeros(shape, dtype=bool)
    sel[..., list(comps)] = True
    flat_idx = np.flatnonzero(sel.ravel())
    sqrt_m = np.sqrt(meas_full.ravel()[flat_idx])
    ndof = flat_idx.size

    def matvec(x):
        full = np.zeros(shape).ravel()
        full[flat_idx] = x / sqrt_m
        hv = hessian_vector_product(base, full.reshape(shape)).ravel()
        return hv[flat_idx] / sqrt_m

    op = LinearOperator((ndof, ndof), matvec=matvec, dtype=float)
    rng = np.random.default_rng(1234)
    last_err: Exception | None = None
    for attempt in range(max_restarts):
        try:
            ncv = min(ndof, max(4 * m + 20, 40 * (attempt + 1)))
            vals, vecs = eigsh(op, k=m, which="SA", ncv=ncv,
                               maxiter=4000 * (attempt + 1),
                               v0=rng.standard_normal(ndof))
            break
        except ArpackNoConvergence as err:
            last_err = err
    else:
        raise RuntimeError(f"Lanczos failed after {max_restarts} restarts") from last_err

    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    witnesses = np.zeros((m,) + shape)
    for i in range(m):
        full = np.zeros(np.prod(shape))
        full[flat_idx] = vecs[:, i] / sqrt_m
        witnesses[i] = full.reshape(shape)
    return HessianProbe(base_kind=kind, subspace=subspace, eigenvalues=vals,
                        witnesses=witnesses, grid=grid_meta)


def rayleigh_quotient(base, direction: np.ndarray) -> float:
    """L2-normalized second-variation quotient at a full-shape direction."""
    _, _, meas_full, _, _, _ = _base_machinery(base)
    hv = hessian_vector_product(base, direction)
    num = float(np.sum(direction * hv))
    den = float(np.sum(meas_full * direction * direction))
    return num / den
