"""Equivariant radial profiles: finite-volume energy, descent solver, ODE residual.

A profile stores the five frame coordinates on a cell-centered grid.  The
energy is the reduced one-dimensional functional (angular derivatives dropped,
centrifugal weights mu = (0, 1, 1, 1/4, 1/4)); its discrete stationarity
conditions at interior cells coincide exactly with the central-difference
residuals of the radial Euler-Lagrange system, which is what makes the
``ode_residual`` postcondition of the solver a structural fact rather than an
accident of tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import eig_banded, solve_banded, solveh_banded

from .tensors import (
    MaterialParams,
    boundary_w,
    bulk_grad_w,
    bulk_hess_w,
    derive_params,
    f_bulk_w,
)
from .tolerances import TOL

# centrifugal weights: w1/w2 multiply frame tensors of winding k, w3/w4 of winding k/2
MU = np.array([0.0, 1.0, 1.0, 0.25, 0.25])

ANSATZ_MASKS: dict[str, tuple[int, ...]] = {
    "FULL5": (0, 1, 2, 3, 4),
    "O2": (0, 1, 3),
    "Z2O2": (0, 1),
    "ODDK": (0, 1),
}


class NonConvergenceError(RuntimeError):
    """Descent hit its iteration cap; ``last`` carries the best iterate."""

    def __init__(self, message: str, last):
        super().__init__(message)
        self.last = last


def check_ansatz(ansatz: str, k: int) -> tuple[int, ...]:
    """Component mask for the ansatz, rejecting masks whose out-of-plane
    components would be multivalued for the given winding parity."""
    if ansatz not in ANSATZ_MASKS:
        raise ValueError(f"unknown ansatz {ansatz!r}")
    if ansatz == "ODDK":
        if k % 2 == 0:
            raise ValueError("ODDK ansatz requires odd winding")
    elif k % 2 != 0:
        raise ValueError(f"{ansatz} ansatz requires even winding, got k={k}")
    return ANSATZ_MASKS[ansatz]


def mask_bool(ansatz: str) -> np.ndarray:
    out = np.zeros(5, dtype=bool)
    out[list(ANSATZ_MASKS[ansatz])] = True
    return out


@dataclass(frozen=True)
class RadialGrid:
    """Uniform cell-centered grid on (0, R): nodes r_i = (i + 1/2) R/N."""

    R: float
    N: int

    def __post_init__(self) -> None:
        if not (self.R > 0.0 and self.N >= 4):
            raise ValueError(f"need R > 0 and N >= 4, got R={self.R}, N={self.N}")
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "N", int(self.N))

    @property
    def h(self) -> float:
        return self.R / self.N

    def nodes(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.h

    def faces(self) -> np.ndarray:
        """Interior face radii, between consecutive cells."""
        return np.arange(1, self.N) * self.h


@dataclass(frozen=True)
class RadialProfile:
    """Frame coordinates sampled at the grid nodes, restricted to an ansatz.

    Components outside the ansatz mask are stored as exact zeros; the
    anchored boundary value lives in ``boundary`` and is never a degree of
    freedom.
    """

    grid: RadialGrid
    ansatz: str
    values: np.ndarray
    k: int
    params: MaterialParams

    def __post_init__(self) -> None:
        check_ansatz(self.ansatz, self.k)
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.N, 5):
            raise ValueError(f"values must have shape ({self.grid.N}, 5), got {vals.shape}")
        off = ~mask_bool(self.ansatz)
        if np.any(vals[:, off] != 0.0):
            raise ValueError("components outside the ansatz mask must be exactly zero")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "k", int(self.k))

    @property
    def boundary(self) -> np.ndarray:
        return boundary_w(self.params)

    def with_values(self, values: np.ndarray) -> "RadialProfile":
        return replace(self, values=values)


def _apply_mask(arr: np.ndarray, ansatz: str) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out[..., ~mask_bool(ansatz)] = 0.0
    return out


def energy_pieces(p: RadialProfile):
    """Per-face and per-cell energy contributions, before the 2 pi factor.

    ``face_terms[j]`` sits at radius (j+1) h; the two cell arrays split the
    centrifugal and bulk parts at the nodes; origin and boundary terms close
    the two half-cells.  The total is their plain sum, which is what makes
    the energy additive over face-aligned subintervals.
    """
    g, w, k = p.grid, p.values, p.k
    h, r = g.h, g.nodes()
    wb = p.boundary

    dw = w[1:] - w[:-1]
    face_terms = g.faces() * np.einsum("ij,ij->i", dw, dw) / (2.0 * h)

    cent = (MU * k * k) * w * w
    cent_terms = 0.5 * h * cent.sum(axis=1) / r
    bulk_terms = h * r * f_bulk_w(w, p.params)

    dwb = wb - w[-1]
    boundary_term = (g.R - 0.25 * h) * float(dwb @ dwb) / h

    origin_term = 0.0
    if k != 0:
        origin_term = 0.25 * float(w[0, 1:] @ w[0, 1:])

    return face_terms, cent_terms, bulk_terms, boundary_term, origin_term


def radial_energy(
    p: RadialProfile,
    r_lo: float | None = None,
    r_hi: float | None = None,
    include_bulk: bool = True,
) -> float:
    """Discrete energy, times 2pi.

    With ``r_lo``/``r_hi`` given (they must sit on cell faces) only the
    contributions attributed to (r_lo, r_hi] are summed: cells with centers
    inside, faces with radii in (r_lo, r_hi], the origin terms when r_lo = 0
    and the boundary term when r_hi = R.  Under this attribution the energy
    is exactly additive over disjoint subintervals.  ``include_bulk=False``
    drops the potential cells and returns the elastic part alone.
    """
    g = p.grid
    face_terms, cent_terms, bulk_terms, boundary_term, origin_term = energy_pieces(p)
    cell_terms = cent_terms + bulk_terms if include_bulk else cent_terms
    if r_lo is None and r_hi is None:
        total = face_terms.sum() + cell_terms.sum() + boundary_term + origin_term
        return 2.0 * math.pi * total

    lo = 0.0 if r_lo is None else float(r_lo)
    hi = g.R if r_hi is None else float(r_hi)
    for val in (lo, hi):
        if abs(val / g.h - round(val / g.h)) > 1e-9:
            raise ValueError(f"subinterval endpoint {val} does not sit on a cell face")
    ilo, ihi = int(round(lo / g.h)), int(round(hi / g.h))
    if not (0 <= ilo < ihi <= g.N):
        raise ValueError("empty or out-of-range subinterval")

    # interior face j sits at radius (j+1) h; it is attributed to the
    # half-open interval (lo, hi] containing it
    total = cell_terms[ilo:ihi].sum() + face_terms[ilo : min(ihi, g.N - 1)].sum()
    if ilo == 0:
        total += origin_term
    if ihi == g.N:
        total += boundary_term
    return 2.0 * math.pi * total


def radial_gradient(p: RadialProfile) -> np.ndarray:
    """Gradient of :func:`radial_energy` in the node values (masked)."""
    g, w, k = p.grid, p.values, p.k
    h, r = g.h, g.nodes()
    wb = p.boundary

    grad = np.zeros_like(w)
    dw = w[1:] - w[:-1]
    flux = (g.faces() / h)[:, None] * dw
    grad[1:] += flux
    grad[:-1] -= flux

    grad[-1] += 2.0 * (g.R - 0.25 * h) / h * (w[-1] - wb)
    if k != 0:
        grad[0, 1:] += 0.5 * w[0, 1:]

    grad += ((MU * k * k)[None, :] / r[:, None]) * w * h
    grad += (h * r)[:, None] * bulk_grad_w(w, p.params)
    return 2.0 * math.pi * _apply_mask(grad, p.ansatz)


def scaled_gradient(p: RadialProfile) -> np.ndarray:
    """Gradient divided by the cell measure 2 pi r_i h; at interior cells this
    is minus the central-difference residual of the radial ODE system."""
    g = p.grid
    return radial_gradient(p) / (2.0 * math.pi * g.nodes()[:, None] * g.h)


def ode_residual(p: RadialProfile) -> np.ndarray:
    """Central-difference residual of w'' + w'/r - (mu k^2/r^2) w - dV/dw.

    Endpoint rows use the regularity ghosts (odd reflection for w1..w4, even
    for w0) and a boundary ghost linearly extrapolated through the anchored
    value, so the array keeps one row per node; accuracy statements in tests
    address interior rows.
    """
    g, w, k = p.grid, p.values, p.k
    h, r = g.h, g.nodes()

    ghost0 = np.empty(5)
    ghost0[0] = w[0, 0]
    ghost0[1:] = -w[0, 1:]
    ghostN = 2.0 * p.boundary - w[-1]

    wext = np.vstack([ghost0, w, ghostN])
    d2 = (wext[2:] - 2.0 * wext[1:-1] + wext[:-2]) / h**2
    d1 = (wext[2:] - wext[:-2]) / (2.0 * h)

    res = d2 + d1 / r[:, None] - ((MU * k * k)[None, :] / r[:, None] ** 2) * w
    res -= bulk_grad_w(w, p.params)
    return _apply_mask(res, p.ansatz)


@dataclass
class SolverOptions:
    """Descent controls; ``tol`` bounds the max-norm of the scaled gradient.

    Descent runs Barzilai-Borwein steps until the scaled gradient falls below
    ``newton_gate``, then polishes with damped Newton steps on the banded
    Hessian; the quadratic tail is what makes tight tolerances affordable at
    large radii, where first-order methods stall on the soft dilation mode.
    """

    tol: float = TOL["radial_solve"]
    max_iter: int = 50000
    armijo: float = 1e-4
    step_min: float = 1e-10
    step_max: float = 1e4
    newton_gate: float = 1e-3
    newton_max: int = 40


class _Preconditioner:
    """Symmetric tridiagonal model Hessian per component: face stiffness plus
    centrifugal and a constant bulk-curvature mass term."""

    def __init__(self, p: RadialProfile):
        g, k, prm = p.grid, p.k, p.params
        h, r = g.h, g.nodes()
        faces = g.faces() / h
        sigma = 2.0 * prm.a2 + prm.b2 * prm.s_plus + prm.c2 * prm.s_plus**2
        self.mask = list(ANSATZ_MASKS[p.ansatz])
        self.off = -faces
        self.diag = np.zeros((g.N, 5))
        base = np.zeros(g.N)
        base[1:] += faces
        base[:-1] += faces
        base[-1] += 2.0 * (g.R - 0.25 * h) / h
        for c in range(5):
            d = base + (MU[c] * k * k / r) * h + sigma * r * h
            if k != 0 and c >= 1:
                d = d.copy()
                d[0] += 0.5
            self.diag[:, c] = d
        # match the 2 pi normalization of radial_energy and its gradient
        self.off = 2.0 * math.pi * self.off
        self.diag = 2.0 * math.pi * self.diag
        self.ab = {}
        for c in self.mask:
            ab = np.zeros((2, g.N))
            ab[0] = self.diag[:, c]
            ab[1, :-1] = self.off
            self.ab[c] = ab

    def solve(self, grad: np.ndarray) -> np.ndarray:
        out = np.zeros_like(grad)
        for c in self.mask:
            out[:, c] = solveh_banded(self.ab[c], grad[:, c], lower=True)
        return out

    def apply(self, vec: np.ndarray) -> np.ndarray:
        out = self.diag * vec
        out[:-1] += self.off[:, None] * vec[1:]
        out[1:] += self.off[:, None] * vec[:-1]
        out[:, [c for c in range(5) if c not in self.mask]] = 0.0
        return out


def hessian_banded(p: RadialProfile) -> np.ndarray:
    """Lower banded storage of the energy Hessian on the active components.

    Unknowns are ordered node-major over the ansatz components, so the only
    inter-node coupling (the face stiffness, componentwise) sits exactly m
    rows below the diagonal and the in-node bulk blocks fill the band.
    """
    g, w, k = p.grid, p.values, p.k
    h, r = g.h, g.nodes()
    comps = list(ANSATZ_MASKS[p.ansatz])
    m = len(comps)
    n = g.N * m
    ab = np.zeros((m + 1, n))

    faces = g.faces() / h
    diag_geom = np.zeros(g.N)
    diag_geom[1:] += faces
    diag_geom[:-1] += faces
    diag_geom[-1] += 2.0 * (g.R - 0.25 * h) / h

    blocks = (h * r)[:, None, None] * bulk_hess_w(w, p.params)[:, comps][:, :, comps]
    for a, c in enumerate(comps):
        blocks[:, a, a] += diag_geom + (MU[c] * k * k / r) * h
        if k != 0 and c >= 1:
            blocks[0, a, a] += 0.5

    for a in range(m):
        for b in range(a, m):
            ab[b - a, a::m] += blocks[:, b, a]
    for a in range(m):
        ab[m, a : n - m : m] = -faces
    return 2.0 * math.pi * ab


def _newton_polish(init: RadialProfile, w, energy, grad, meas, opts):
    """Damped Newton steps on the banded Hessian; returns the improved state
    or None when the direction fails (indefinite block or stalled search)."""
    comps = list(ANSATZ_MASKS[init.ansatz])
    p = init.with_values(w)
    for _ in range(opts.newton_max):
        if float(np.max(np.abs(grad / meas))) <= opts.tol:
            return p, w, energy, grad
        ab = hessian_banded(p)
        g_flat = grad[:, comps].ravel()
        delta = None
        shift = 0.0
        scale = float(np.max(np.abs(ab[0]))) or 1.0
        for _ in range(6):
            try:
                trial = ab.copy()
                trial[0] += shift
                sol = solveh_banded(trial, g_flat, lower=True)
            except np.linalg.LinAlgError:
                sol = None
            if sol is not None and float(g_flat @ sol) > 0.0:
                delta = sol
                break
            shift = 1e-8 * scale if shift == 0.0 else 10.0 * shift
        if delta is None:
            return None
        direction = np.zeros_like(w)
        direction[:, comps] = delta.reshape(init.grid.N, len(comps))
        gd = float(np.sum(grad * direction))
        t = 1.0
        for _ in range(30):
            w_new = w - t * direction
            p_new = init.with_values(w_new)
            e_new = radial_energy(p_new)
            if e_new <= energy - opts.armijo * t * gd:
                break
            t *= 0.5
        else:
            return None
        w, p, energy = w_new, p_new, e_new
        grad = radial_gradient(p)
    if float(np.max(np.abs(grad / meas))) <= opts.tol:
        return p, w, energy, grad
    return None


def newton_stationary(init: RadialProfile, tol: float | None = None,
                      max_iter: int = 60) -> RadialProfile:
    """Damped Newton iteration on the stationarity system, any index.

    Unlike :func:`minimize_radial` this drives the gradient itself to zero
    through a general banded LU solve, so it converges to whichever critical
    point sits nearest, saddles included; the line search backtracks on the
    residual norm, which is the right merit function when energy descent is
    not the goal.
    """
    tol = TOL["radial_solve"] if tol is None else tol
    comps = list(ANSATZ_MASKS[init.ansatz])
    m = len(comps)
    meas = 2.0 * math.pi * (init.grid.nodes() * init.grid.h)[:, None]

    p = init
    w = init.values.copy()
    res = radial_gradient(p)
    for _ in range(max_iter):
        if float(np.max(np.abs(res / meas))) <= tol:
            return p
        ab = hessian_banded(p)
        n = ab.shape[1]
        full = np.zeros((2 * m + 1, n))
        full[m] = ab[0]
        for d in range(1, m + 1):
            full[m + d, : n - d] = ab[d, : n - d]
            full[m - d, d:] = ab[d, : n - d]
        rhs = res[:, comps].ravel()
        delta = solve_banded((m, m), full, -rhs)
        step = np.zeros_like(w)
        step[:, comps] = delta.reshape(init.grid.N, m)

        norm0 = float(np.linalg.norm(rhs))
        t = 1.0
        for _ in range(30):
            p_new = init.with_values(w + t * step)
            res_new = radial_gradient(p_new)
            if float(np.linalg.norm(res_new[:, comps])) <= (1.0 - 1e-4 * t) * norm0:
                break
            t *= 0.5
        else:
            raise NonConvergenceError("residual line search stalled", p)
        w, p, res = w + t * step, p_new, res_new

    if float(np.max(np.abs(res / meas))) <= tol:
        return p
    raise NonConvergenceError(
        f"no stationarity after {max_iter} Newton steps "
        f"(scaled residual {float(np.max(np.abs(res / meas))):.3e})", p)


def refine_saddle(init: RadialProfile, tol: float | None = None,
                  max_iter: int = 120, trust: float = 0.5) -> RadialProfile:
    """Index-1 refinement by partitioned rational-function steps.

    Plain Newton fails near a saddle with one soft unstable mode (a slowly
    translating out-of-plane wall, say): the Jacobian is nearly singular
    along that mode and the residual line search stalls.  Here each step is
    built in the exact eigenbasis of the banded Hessian: the lowest mode
    takes a bounded uphill step through its own rational shift while the
    remaining modes take Newton steps with denominators shifted positive,
    which drives the iteration onto a one-negative-direction critical point.
    A max-norm trust cap, grown on residual decrease and shrunk when a step
    inflates the residual, globalizes the whole thing.
    """
    tol = TOL["radial_solve"] if tol is None else tol
    comps = list(ANSATZ_MASKS[init.ansatz])
    m = len(comps)
    meas = 2.0 * math.pi * (init.grid.nodes() * init.grid.h)[:, None]

    p = init
    w = init.values.copy()
    res = radial_gradient(p)
    scaled = float(np.max(np.abs(res / meas)))
    cap = trust
    for _ in range(max_iter):
        if scaled <= tol:
            return p
        lam, vec = eig_banded(hessian_banded(p), lower=True)
        gc = vec.T @ res[:, comps].ravel()
        d = np.empty_like(gc)
        l1, g1 = float(lam[0]), float(gc[0])
        den1 = 0.5 * (l1 - math.hypot(l1, 2.0 * g1))
        d[0] = 0.0 if den1 == 0.0 else -g1 / den1
        reg = max(1e-10, min(1e-2, float(np.linalg.norm(gc))))
        sig2 = min(0.0, float(lam[1]) - reg)
        d[1:] = -gc[1:] / (lam[1:] - sig2)
        step_flat = vec @ d
        sn = float(np.max(np.abs(step_flat)))
        if sn > cap:
            step_flat *= cap / sn
        step = np.zeros_like(w)
        step[:, comps] = step_flat.reshape(init.grid.N, m)
        p_new = init.with_values(w + step)
        res_new = radial_gradient(p_new)
        scaled_new = float(np.max(np.abs(res_new / meas)))
        if scaled_new <= 1.5 * scaled:
            w, p, res = w + step, p_new, res_new
            if scaled_new < scaled:
                cap = min(trust, cap * 1.5)
            scaled = scaled_new
        else:
            cap *= 0.25
            if cap < 1e-8:
                raise NonConvergenceError("trust region collapsed", p)
    if scaled <= tol:
        return p
    raise NonConvergenceError(
        f"no index-1 stationarity after {max_iter} rational-function steps "
        f"(scaled residual {scaled:.3e})", p)


def minimize_radial(init: RadialProfile, opts: SolverOptions | None = None) -> RadialProfile:
    """Preconditioned Barzilai-Borwein descent with a damped Newton tail.

    Energy never increases across accepted iterates; convergence is declared
    on the max-norm of the scaled gradient, which bounds the interior ODE
    residual of the returned profile by the same number.
    """
    opts = opts or SolverOptions()
    p = init
    pre = _Preconditioner(init)
    meas = 2.0 * math.pi * (init.grid.nodes() * init.grid.h)[:, None]

    w = init.values.copy()
    energy = radial_energy(p)
    grad = radial_gradient(p)
    step = 1.0
    gate = max(opts.newton_gate, opts.tol)

    for _ in range(opts.max_iter):
        scaled = float(np.max(np.abs(grad / meas)))
        if scaled <= opts.tol:
            return p
        if scaled <= gate:
            polished = _newton_polish(init, w, energy, grad, meas, opts)
            if polished is not None:
                p_new, w_new, e_new, grad_new = polished
                if float(np.max(np.abs(grad_new / meas))) <= opts.tol:
                    return p_new
                w, p, energy, grad = w_new, p_new, e_new, grad_new
            # Newton refused (saddle-ish block or stalled); earn a better
            # basin with more descent before retrying
            gate *= 0.1

        direction = pre.solve(grad)
        gd = float(np.sum(grad * direction))
        t = step
        for _ in range(60):
            w_new = w - t * direction
            p_new = init.with_values(w_new)
            e_new = radial_energy(p_new)
            if e_new <= energy - opts.armijo * t * gd:
                break
            t *= 0.5
        else:
            raise NonConvergenceError("line search failed to decrease the energy", p)

        grad_new = radial_gradient(p_new)
        s = w_new - w
        y = grad_new - grad
        sy = float(np.sum(s * y))
        if sy > 0.0:
            sPs = float(np.sum(s * pre.apply(s)))
            step = min(max(sPs / sy, opts.step_min), opts.step_max)
        else:
            step = 1.0
        w, p, energy, grad = w_new, p_new, e_new, grad_new

    raise NonConvergenceError(
        f"no convergence after {opts.max_iter} iterations "
        f"(scaled gradient {float(np.max(np.abs(grad / meas))):.3e})",
        p,
    )


def make_profile(grid: RadialGrid, ansatz: str, k: int, params: MaterialParams,
                 values: np.ndarray) -> RadialProfile:
    return RadialProfile(grid=grid, ansatz=ansatz, values=_apply_mask(values, ansatz),
                         k=k, params=params)


def init_constant(grid: RadialGrid, ansatz: str, k: int, params: MaterialParams) -> RadialProfile:
    """Boundary value extended to the whole interval."""
    vals = np.tile(boundary_w(params), (grid.N, 1))
    return make_profile(grid, ansatz, k, params, vals)


def init_ramp(grid: RadialGrid, ansatz: str, k: int, params: MaterialParams) -> RadialProfile:
    """Constant w0 with w1 ramped linearly up to radius 1, the explicit
    logarithmic-energy test function."""
    r = grid.nodes()
    s = params.s_plus
    vals = np.zeros((grid.N, 5))
    vals[:, 0] = -s / math.sqrt(6.0)
    vals[:, 1] = (s / math.sqrt(2.0)) * np.minimum(r, 1.0)
    return make_profile(grid, ansatz, k, params, vals)


def init_biaxial_core(grid: RadialGrid, ansatz: str, k: int, params: MaterialParams) -> RadialProfile:
    """Core sitting in the third zero of the in-plane potential (uniaxial
    along e3), blended to the boundary value across r in [1, 2]."""
    r = grid.nodes()
    s = params.s_plus
    t = np.clip(r - 1.0, 0.0, 1.0)
    vals = np.zeros((grid.N, 5))
    vals[:, 0] = (1.0 - t) * (2.0 * s / math.sqrt(6.0)) + t * (-s / math.sqrt(6.0))
    vals[:, 1] = (s / math.sqrt(2.0)) * t
    return make_profile(grid, ansatz, k, params, vals)


def resample_profile(p: RadialProfile, grid: RadialGrid) -> RadialProfile:
    """Linear interpolation onto another grid; outside the source range the
    first node value (toward 0) and the anchored value (toward R) are used."""
    src = p.grid.nodes()
    dst = grid.nodes()
    vals = np.zeros((grid.N, 5))
    for c in range(5):
        vals[:, c] = np.interp(dst, src, p.values[:, c],
                               left=p.values[0, c], right=p.boundary[c])
    return make_profile(grid, p.ansatz, p.k, p.params, vals)


def alpha_R(params: MaterialParams, k: int, R: float, N: int | None = None,
            opts: SolverOptions | None = None) -> float:
    """Least reduced energy over the two-component reflection-symmetric
    ansatz, taken across three independent initializations."""
    if k == 0:
        raise ValueError("winding must be nonzero")
    ansatz = "Z2O2" if k % 2 == 0 else "ODDK"
    if N is None:
        N = 4096
    grid = RadialGrid(R=R, N=N)
    best = math.inf
    for builder in (init_ramp, init_constant, init_biaxial_core):
        sol = minimize_radial(builder(grid, ansatz, k, params), opts)
        best = min(best, radial_energy(sol))
    return best


def save_profile_csv(p: RadialProfile, path) -> None:
    """Columns r, w0..w4 with masked components as zeros; a leading comment
    row records winding, radius, ansatz and material parameters."""
    prm = p.params
    header = (f"# k={p.k} R={p.grid.R!r} N={p.grid.N} ansatz={p.ansatz} "
              f"a2={prm.a2!r} b2={prm.b2!r} c2={prm.c2!r}")
    r = p.grid.nodes()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        fh.write("r,w0,w1,w2,w3,w4\n")
        for i in range(p.grid.N):
            row = ",".join(repr(float(v)) for v in (r[i], *p.values[i]))
            fh.write(row + "\n")


def load_profile_csv(path) -> RadialProfile:
    with open(path, "r", encoding="utf-8") as fh:
        meta_line = fh.readline().strip()
        if not meta_line.startswith("#"):
            raise ValueError("missing metadata row")
        meta = dict(item.split("=", 1) for item in meta_line[1:].split())
        cols = fh.readline().strip().split(",")
        if cols != ["r", "w0", "w1", "w2", "w3", "w4"]:
            raise ValueError(f"unexpected columns {cols}")
        data = np.loadtxt(fh, delimiter=",")
    params = derive_params(float(meta["a2"]), float(meta["b2"]), float(meta["c2"]))
    grid = RadialGrid(R=float(meta["R"]), N=int(meta["N"]))
    data = np.atleast_2d(data)
    return make_profile(grid, meta["ansatz"], int(meta["k"]), params, data[:, 1:6])
