"""Unconstrained five-component energy minimization on a polar grid.

The field keeps its frame coordinates on a tensor-product grid, cell-centered
in radius and periodic nodal in angle.  Angular derivatives live on the faces
between neighboring angles with the frame-rotation couplings evaluated as
face averages; this reduces the two-dimensional energy exactly to the radial
one on angle-independent fields and leaves no angular mode invisible to the
quadrature.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from . import io as ldgio
from .radial import MU, RadialGrid, RadialProfile, SolverOptions, NonConvergenceError, make_profile
from .tensors import (FrameContinuityError, MaterialParams, boundary_w, bulk_grad_w,
                      derive_params, f_bulk_w)
from .tolerances import TOL


@dataclass(frozen=True)
class PolarGrid:
    """Cell-centered radii crossed with uniform periodic angles."""

    R: float
    N_r: int
    N_phi: int

    def __post_init__(self) -> None:
        if not (self.R > 0.0 and self.N_r >= 4):
            raise ValueError(f"need R > 0 and N_r >= 4, got R={self.R}, N_r={self.N_r}")
        if self.N_phi % 4 != 0 or self.N_phi < 8:
            raise ValueError(f"N_phi must be a multiple of 4 and >= 8, got {self.N_phi}")
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "N_r", int(self.N_r))
        object.__setattr__(self, "N_phi", int(self.N_phi))

    @property
    def h(self) -> float:
        return self.R / self.N_r

    @property
    def dphi(self) -> float:
        return 2.0 * math.pi / self.N_phi

    def r_nodes(self) -> np.ndarray:
        return (np.arange(self.N_r) + 0.5) * self.h

    def phi_nodes(self) -> np.ndarray:
        return np.arange(self.N_phi) * self.dphi

    def radial_grid(self) -> RadialGrid:
        return RadialGrid(R=self.R, N=self.N_r)


@dataclass(frozen=True)
class DiskField:
    """Five frame components sampled on a polar grid."""

    grid: PolarGrid
    values: np.ndarray
    k: int
    params: MaterialParams

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float)
        expected = (self.grid.N_r, self.grid.N_phi, 5)
        if vals.shape != expected:
            raise ValueError(f"values must have shape {expected}, got {vals.shape}")
        k = int(self.k)
        if self.grid.N_phi < 8 * abs(k):
            raise ValueError(f"N_phi={self.grid.N_phi} under-resolves winding k={k}")
        if k % 2 != 0 and np.any(vals[:, :, 3:] != 0.0):
            raise FrameContinuityError(
                "odd winding: out-of-plane components w3/w4 are not representable"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "k", k)

    @property
    def boundary(self) -> np.ndarray:
        return boundary_w(self.params)

    def with_values(self, values: np.ndarray) -> "DiskField":
        return replace(self, values=values)

    def norm_l2(self) -> float:
        g = self.grid
        dens = np.einsum("ijc,ijc->i", self.values, self.values)
        return math.sqrt(float(dens @ g.r_nodes()) * g.h * g.dphi)


def _origin_ghost(ring: np.ndarray, k: int) -> np.ndarray:
    """Frame coordinates of the single lab tensor closest to the innermost
    ring.  A tensor that is one value at r=0 looks φ-dependent in the winding
    frame: mode 0 in w0, mode k in (w1,w2), mode k/2 in (w3,w4); everything
    else in the ring is genuinely multivalued and must be flushed to zero."""
    n_phi = ring.shape[0]
    phi = np.arange(n_phi) * (2.0 * math.pi / n_phi)
    ghost = np.zeros_like(ring)
    ghost[:, 0] = ring[:, 0].mean()

    def project(pair: np.ndarray, mode: float) -> np.ndarray:
        z = pair[:, 0] + 1j * pair[:, 1]
        # demeaning is the identity on the mode != 0 component but makes the
        # projection of a phi-independent ring vanish bitwise, so uniform
        # fields keep exactly zero gradient in the paired component
        z = z - z.mean()
        coeff = np.mean(z * np.exp(1j * mode * phi))
        zp = coeff * np.exp(-1j * mode * phi)
        return np.stack([zp.real, zp.imag], axis=-1)

    if k == 0:
        ghost[:, 1:3] = ring[:, 1:3].mean(axis=0)
        ghost[:, 3:5] = ring[:, 3:5].mean(axis=0)
    else:
        ghost[:, 1:3] = project(ring[:, 1:3], float(k))
        if k % 2 == 0:
            ghost[:, 3:5] = project(ring[:, 3:5], 0.5 * k)
    return ghost


def _angular_faces(w: np.ndarray, k: int, dphi: float) -> np.ndarray:
    """Covariant angular differences on the faces between angle j and j+1."""
    wn = np.roll(w, -1, axis=1)
    d = (wn - w) / dphi
    av = 0.5 * (wn + w)
    a = np.empty_like(w)
    a[:, :, 0] = d[:, :, 0]
    a[:, :, 1] = d[:, :, 1] - k * av[:, :, 2]
    a[:, :, 2] = d[:, :, 2] + k * av[:, :, 1]
    a[:, :, 3] = d[:, :, 3] - 0.5 * k * av[:, :, 4]
    a[:, :, 4] = d[:, :, 4] + 0.5 * k * av[:, :, 3]
    return a


def disk_energy_parts(f: DiskField) -> dict:
    """Elastic and bulk pieces of the discrete energy."""
    g, w, k = f.grid, f.values, f.k
    h, dphi, r = g.h, g.dphi, g.r_nodes()
    wb = f.boundary

    dw = w[1:] - w[:-1]
    faces = np.arange(1, g.N_r) * h
    elastic = float(np.einsum("i,ijc,ijc->", faces, dw, dw)) * dphi / (2.0 * h)

    dwb = wb[None, :] - w[-1]
    elastic += (g.R - 0.25 * h) / h * dphi * float(np.sum(dwb * dwb))

    dev = w[0] - _origin_ghost(w[0], k)
    elastic += 0.25 * dphi * float(np.sum(dev * dev))

    a = _angular_faces(w, k, dphi)
    elastic += 0.5 * h * dphi * float(np.einsum("ijc,ijc,i->", a, a, 1.0 / r))

    bulk = h * dphi * float(r @ f_bulk_w(w, f.params).sum(axis=1))
    return {"elastic": elastic, "bulk": bulk}


def disk_energy(f: DiskField) -> float:
    parts = disk_energy_parts(f)
    return parts["elastic"] + parts["bulk"]


def disk_gradient(f: DiskField) -> np.ndarray:
    """Gradient of :func:`disk_energy` in the nodal values."""
    g, w, k = f.grid, f.values, f.k
    h, dphi, r = g.h, g.dphi, g.r_nodes()
    wb = f.boundary
    grad = np.zeros_like(w)

    dw = w[1:] - w[:-1]
    faces = np.arange(1, g.N_r) * h
    flux = (faces / h)[:, None, None] * dw * dphi
    grad[1:] += flux
    grad[:-1] -= flux

    grad[-1] += 2.0 * (g.R - 0.25 * h) / h * dphi * (w[-1] - wb[None, :])

    grad[0] += 0.5 * dphi * (w[0] - _origin_ghost(w[0], k))

    a = _angular_faces(w, k, dphi)
    ga = (h * dphi / r)[:, None, None] * a
    for c in range(5):
        grad[:, :, c] += (np.roll(ga[:, :, c], 1, axis=1) - ga[:, :, c]) / dphi
    gz = np.roll(ga, 1, axis=1) + ga
    grad[:, :, 2] += -0.5 * k * gz[:, :, 1]
    grad[:, :, 1] += 0.5 * k * gz[:, :, 2]
    grad[:, :, 4] += -0.25 * k * gz[:, :, 3]
    grad[:, :, 3] += 0.25 * k * gz[:, :, 4]

    grad += (h * dphi * r)[:, None, None] * bulk_grad_w(w, f.params)
    if k % 2 != 0:
        grad[:, :, 3:] = 0.0
    return grad


class _DiskPreconditioner:
    """Separable model Hessian: angular modes decouple under the real FFT,
    leaving one symmetric tridiagonal radial system per (mode, component).
    The factorization is precomputed once and reused every iteration."""

    def __init__(self, f: DiskField):
        g, k, prm = f.grid, f.k, f.params
        h, dphi, r = g.h, g.dphi, g.r_nodes()
        n, modes = g.N_r, g.N_phi // 2 + 1
        m = np.arange(modes)
        lam = (2.0 * np.sin(0.5 * m * dphi) / dphi) ** 2
        sigma = 2.0 * prm.a2 + prm.b2 * prm.s_plus + prm.c2 * prm.s_plus**2

        faces = np.arange(1, n, dtype=float)  # face stiffness r_f/h with r_f = i h
        base = np.zeros(n)
        base[1:] += faces
        base[:-1] += faces
        base[-1] += 2.0 * (g.R - 0.25 * h) / h
        base = base + sigma * r * h

        diag = np.empty((n, modes, 5))
        for c in range(5):
            d = base[:, None] + (h / r)[:, None] * (lam[None, :] + MU[c] * k * k)
            if c >= 1:
                if k != 0:
                    d = d.copy()
                    d[0] += 0.5
            else:
                d = d.copy()
                d[0, 1:] += 0.5
            diag[:, :, c] = d

        off = -faces  # length n-1, same for every mode and component
        self.dphi = dphi
        self.off = off
        self.diag = diag
        # symmetric LDL^T sweep: dtil_0 = d_0, l_i = off_i/dtil_i
        dtil = np.empty_like(diag)
        lmul = np.empty((n - 1, modes, 5))
        dtil[0] = diag[0]
        for i in range(n - 1):
            lmul[i] = off[i] / dtil[i]
            dtil[i + 1] = diag[i + 1] - off[i] * lmul[i]
        self.dtil = dtil
        self.lmul = lmul
        self.n = n
        self.n_phi = g.N_phi

    def solve(self, grad: np.ndarray) -> np.ndarray:
        b = np.fft.rfft(grad, axis=1) / self.dphi
        y = np.empty_like(b)
        y[0] = b[0]
        for i in range(1, self.n):
            y[i] = b[i] - self.lmul[i - 1] * y[i - 1]
        x = y / self.dtil
        for i in range(self.n - 2, -1, -1):
            x[i] -= self.lmul[i] * x[i + 1]
        return np.fft.irfft(x, n=self.n_phi, axis=1)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        v = np.fft.rfft(vec, axis=1)
        out = self.diag * v
        out[:-1] += self.off[:, None, None] * v[1:]
        out[1:] += self.off[:, None, None] * v[:-1]
        return np.fft.irfft(out * self.dphi, n=self.n_phi, axis=1)


def minimize_disk(init: DiskField, opts: SolverOptions | None = None) -> DiskField:
    """Preconditioned Barzilai-Borwein descent with an Armijo fallback; the
    anchored boundary data enters only through the boundary face term and is
    never a degree of freedom."""
    opts = opts or SolverOptions(tol=TOL["disk_solve"])
    g = init.grid
    meas = (g.r_nodes() * g.h * g.dphi)[:, None, None]
    pre = _DiskPreconditioner(init)

    f = init
    w = init.values.copy()
    energy = disk_energy(f)
    grad = disk_gradient(f)
    step = 1.0

    for _ in range(opts.max_iter):
        res = float(np.max(np.abs(grad / meas)))
        if res <= opts.tol:
            return f

        direction = pre.solve(grad)
        gd = float(np.sum(grad * direction))
        t = step
        for _ in range(60):
            w_new = w - t * direction
            f_new = init.with_values(w_new)
            e_new = disk_energy(f_new)
            if e_new <= energy - opts.armijo * t * gd:
                break
            t *= 0.5
        else:
            raise NonConvergenceError("line search failed to decrease the energy", f)

        if not np.any(w_new != w):
            # the step underflowed: the energy cannot decrease in double
            # precision, so the requested tolerance sits below the rounding
            # floor of this grid
            raise NonConvergenceError(
                f"descent stalled at machine precision "
                f"(scaled gradient {res:.3e}, tolerance {opts.tol:g})", f)

        grad_new = disk_gradient(f_new)
        s = w_new - w
        y = grad_new - grad
        sy = float(np.sum(s * y))
        if sy > 0.0:
            sPs = float(np.sum(s * pre.apply(s)))
            step = min(max(sPs / sy, opts.step_min), opts.step_max)
        else:
            step = 1.0
        w, f, energy, grad = w_new, f_new, e_new, grad_new

    raise NonConvergenceError(
        f"no convergence after {opts.max_iter} iterations "
        f"(scaled gradient {float(np.max(np.abs(grad / meas))):.3e})",
        f,
    )


@dataclass(frozen=True)
class SymmetryReport:
    """Scalar diagnostics quantifying rotational equivariance and the two
    reflection symmetries of a field."""

    angular_variance: np.ndarray
    z2_defect: float
    so2_defect: float
    equivariance_error: float


def symmetry_diagnostics(f: DiskField, rotation_stride: int = 1) -> SymmetryReport:
    g, w = f.grid, f.values
    r, h, dphi = g.r_nodes(), g.h, g.dphi

    var = np.var(w, axis=1)                     # (N_r, 5) per-radius variance
    angular_variance = var.mean(axis=0)

    def l2(comp_sq: np.ndarray) -> float:
        return math.sqrt(float(comp_sq.sum(axis=1) @ r) * h * dphi)

    z2 = l2(w[:, :, 3] ** 2 + w[:, :, 4] ** 2)
    so2 = l2(w[:, :, 2] ** 2 + w[:, :, 4] ** 2)

    err = 0.0
    for j in range(rotation_stride, g.N_phi, rotation_stride):
        err = max(err, float(np.max(np.abs(np.roll(w, j, axis=1) - w))))
    return SymmetryReport(angular_variance=angular_variance, z2_defect=z2,
                          so2_defect=so2, equivariance_error=err)


def lift_profile(p: RadialProfile, n_phi: int) -> DiskField:
    """Angle-independent field carrying a radial profile."""
    grid = PolarGrid(R=p.grid.R, N_r=p.grid.N, N_phi=n_phi)
    vals = np.repeat(p.values[:, None, :], n_phi, axis=1)
    return DiskField(grid=grid, values=vals, k=p.k, params=p.params)


def angular_mean_profile(f: DiskField, ansatz: str = "FULL5") -> RadialProfile:
    """Radial profile of the angular means, for comparisons against 1D runs."""
    vals = f.values.mean(axis=1)
    return make_profile(f.grid.radial_grid(), ansatz, f.k, f.params, vals)


def perturbed_field(base: DiskField, amplitude: float, seed: int,
                    smooth_passes: int = 2) -> DiskField:
    """Seeded random perturbation of a field, lightly smoothed so the initial
    gradient energy stays finite-looking on fine grids."""
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-1.0, 1.0, size=base.values.shape)
    for _ in range(smooth_passes):
        noise = (noise + np.roll(noise, 1, axis=1) + np.roll(noise, -1, axis=1)) / 3.0
        inner = (noise[:-2] + noise[1:-1] + noise[2:]) / 3.0
        noise[1:-1] = inner
    vals = base.values + amplitude * noise
    if base.k % 2 != 0:
        vals[:, :, 3:] = 0.0
    return base.with_values(vals)


def constant_field(grid: PolarGrid, k: int, params: MaterialParams) -> DiskField:
    vals = np.tile(boundary_w(params), (grid.N_r, grid.N_phi, 1))
    return DiskField(grid=grid, values=vals, k=k, params=params)


def save_field(path, f: DiskField) -> None:
    prm = f.params
    ldgio.write_container(path, k=f.k, R=f.grid.R, n_r=f.grid.N_r, n_phi=f.grid.N_phi,
                          coeffs=(prm.a2, prm.b2, prm.c2), payload=f.values)


def load_field(path) -> DiskField:
    rec = ldgio.read_container(path)
    if rec["tag"] is not None:
        raise ValueError("container holds a decomposition payload, not a field")
    grid = PolarGrid(R=rec["R"], N_r=rec["n_r"], N_phi=rec["n_phi"])
    params = derive_params(*rec["coeffs"])
    return DiskField(grid=grid, values=rec["payload"], k=rec["k"], params=params)


def save_field_summary_csv(path, f: DiskField) -> None:
    """Angular means and variances per radius, one row per radial node."""
    g = f.grid
    prm = f.params
    rep = symmetry_diagnostics(f, rotation_stride=max(1, g.N_phi // 16))
    means = f.values.mean(axis=1)
    var = f.values.var(axis=1)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# k={f.k} R={g.R!r} N_r={g.N_r} N_phi={g.N_phi} "
                 f"a2={prm.a2!r} b2={prm.b2!r} c2={prm.c2!r} "
                 f"energy={disk_energy(f)!r} z2_defect={rep.z2_defect!r} "
                 f"so2_defect={rep.so2_defect!r}\n")
        writer = csv.writer(fh)
        writer.writerow(["r"] + [f"mean_w{c}" for c in range(5)]
                        + [f"var_w{c}" for c in range(5)])
        r = g.r_nodes()
        for i in range(g.N_r):
            writer.writerow([repr(float(r[i]))]
                            + [repr(float(v)) for v in means[i]]
                            + [repr(float(v)) for v in var[i]])
