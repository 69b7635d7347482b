"""Q-tensor algebra for a planar sample with winding boundary anchoring.

Symmetric traceless 3x3 order tensors are represented either as matrices
(``QTensor``) or as five coordinates (``WVector``) in a moving orthonormal
basis that rotates with half the prescribed boundary winding.  All
conversions pass through an explicit :class:`Frame` so the winding number
is never implicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tolerances import TOL

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)

# reflection about the xz-plane; conjugation by it flips the out-of-plane
# director component
J_REFLECT = np.diag([1.0, 1.0, -1.0])
# reflection about the xz-plane within the sample plane (y -> -y)
L_REFLECT = np.diag([1.0, -1.0, 1.0])

# sign pattern of the five frame tensors under each reflection, used by the
# coordinate-level group actions
Z2_SIGNS = np.array([1.0, 1.0, 1.0, -1.0, -1.0])
O2_REFLECT_SIGNS = np.array([1.0, 1.0, -1.0, 1.0, -1.0])


class FrameContinuityError(ValueError):
    """Raised when an operation needs the out-of-plane frame tensors to be
    single-valued but the winding is odd and those components are nonzero."""


@dataclass(frozen=True)
class MaterialParams:
    """Bulk potential coefficients together with the derived constants.

    ``s_plus`` is the preferred uniaxial order and ``f_star`` the bulk
    minimum value; both are functions of (a2, b2, c2) and are computed at
    construction so the shifted potential vanishes exactly on the uniaxial
    minimum manifold.
    """

    a2: float = 1.0
    b2: float = 1.0
    c2: float = 1.0
    s_plus: float = field(init=False)
    f_star: float = field(init=False)

    def __post_init__(self) -> None:
        if not (self.a2 >= 0.0 and self.b2 > 0.0 and self.c2 > 0.0):
            raise ValueError(
                f"need a2 >= 0, b2 > 0, c2 > 0; got a2={self.a2}, b2={self.b2}, c2={self.c2}"
            )
        a2, b2, c2 = float(self.a2), float(self.b2), float(self.c2)
        s = (b2 + math.sqrt(b2 * b2 + 24.0 * a2 * c2)) / (4.0 * c2)
        fstar = -(a2 / 3.0) * s * s - (2.0 * b2 / 27.0) * s**3 + (c2 / 9.0) * s**4
        object.__setattr__(self, "a2", a2)
        object.__setattr__(self, "b2", b2)
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "s_plus", s)
        object.__setattr__(self, "f_star", fstar)


def derive_params(a2: float = 1.0, b2: float = 1.0, c2: float = 1.0) -> MaterialParams:
    """Validate raw coefficients and attach the derived constants."""
    return MaterialParams(a2=a2, b2=b2, c2=c2)


@dataclass(frozen=True)
class QTensor:
    """A symmetric traceless 3x3 tensor stored as a full matrix."""

    m: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
        scale = np.linalg.norm(m)
        if np.linalg.norm(m - m.T) > TOL["qtensor_symmetry"] * max(scale, 1.0):
            raise ValueError("matrix is not symmetric")
        if abs(np.trace(m)) > TOL["qtensor_trace_rel"] * max(scale, 1.0):
            raise ValueError("matrix is not traceless")
        m = 0.5 * (m + m.T)
        m -= (np.trace(m) / 3.0) * np.eye(3)
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def norm(self) -> float:
        return float(np.linalg.norm(self.m))


@dataclass(frozen=True)
class WVector:
    """Coordinates of a Q-tensor in a moving frame, ordered (w0..w4)."""

    w: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.w, dtype=float)
        if w.shape != (5,):
            raise ValueError(f"expected 5 coordinates, got shape {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


def frame_basis(k: int, phi) -> np.ndarray:
    """Five orthonormal symmetric traceless tensors at angle(s) ``phi``.

    The director pair (n, m) rotates by k*phi/2, so E1/E2 pick up winding k
    and E3/E4 winding k/2.  Returns shape phi.shape + (5, 3, 3).
    """
    phi = np.asarray(phi, dtype=float)
    half = 0.5 * k * phi
    c, s = np.cos(half), np.sin(half)
    zero = np.zeros_like(c)
    one = np.ones_like(c)

    n = np.stack([c, s, zero], axis=-1)
    m = np.stack([-s, c, zero], axis=-1)
    e3 = np.stack([zero, zero, one], axis=-1)

    def outer(u, v):
        return u[..., :, None] * v[..., None, :]

    eye = np.broadcast_to(np.eye(3), phi.shape + (3, 3))
    i2 = np.zeros(phi.shape + (3, 3))
    i2[..., 0, 0] = 1.0
    i2[..., 1, 1] = 1.0

    e0 = math.sqrt(1.5) * (outer(e3, e3) - eye / 3.0)
    e1 = SQRT2 * (outer(n, n) - 0.5 * i2)
    e2 = (outer(n, m) + outer(m, n)) / SQRT2
    e3t = (outer(n, e3) + outer(e3, n)) / SQRT2
    e4t = (outer(m, e3) + outer(e3, m)) / SQRT2
    return np.stack([e0, e1, e2, e3t, e4t], axis=-3)


@dataclass(frozen=True)
class Frame:
    """Moving orthonormal frame at a single angle for winding ``k``."""

    k: int
    phi: float
    n: np.ndarray = field(init=False)
    m_vec: np.ndarray = field(init=False)
    e3: np.ndarray = field(init=False)
    E: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        k = int(self.k)
        phi = float(self.phi)
        half = 0.5 * k * phi
        n = np.array([math.cos(half), math.sin(half), 0.0])
        m = np.array([-math.sin(half), math.cos(half), 0.0])
        e3 = np.array([0.0, 0.0, 1.0])
        E = frame_basis(k, phi)
        for arr in (n, m, e3, E):
            arr.setflags(write=False)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m_vec", m)
        object.__setattr__(self, "e3", e3)
        object.__setattr__(self, "E", E)


def w_from_q(q: QTensor | np.ndarray, fr: Frame) -> WVector:
    """Coordinates of ``q`` in the frame; rejects out-of-plane components
    when the winding is odd since E3/E4 are then not single-valued."""
    m = q.m if isinstance(q, QTensor) else np.asarray(q, dtype=float)
    w = np.einsum("iab,ab->i", fr.E, m)
    if fr.k % 2 != 0:
        scale = max(float(np.linalg.norm(w)), 1.0)
        if max(abs(w[3]), abs(w[4])) > TOL["odd_k_component"] * scale:
            raise FrameContinuityError(
                "odd winding: out-of-plane coordinates w3/w4 are not single-valued"
            )
    return WVector(w)


def q_from_w(w: WVector | np.ndarray, fr: Frame) -> QTensor:
    """Reassemble the tensor from frame coordinates."""
    wv = w.w if isinstance(w, WVector) else np.asarray(w, dtype=float)
    if fr.k % 2 != 0:
        scale = max(float(np.linalg.norm(wv)), 1.0)
        if max(abs(wv[3]), abs(wv[4])) > TOL["odd_k_component"] * scale:
            raise FrameContinuityError(
                "odd winding: out-of-plane coordinates w3/w4 are not single-valued"
            )
    return QTensor(np.einsum("i,iab->ab", wv, fr.E))


def act_z2(obj):
    """Conjugation by the reflection e3 -> -e3.

    On matrices this is J Q J; in frame coordinates it flips the signs of
    (w3, w4) and fixes the in-plane block.
    """
    if isinstance(obj, QTensor):
        return QTensor(J_REFLECT @ obj.m @ J_REFLECT)
    if isinstance(obj, WVector):
        return WVector(obj.w * Z2_SIGNS)
    arr = np.asarray(obj, dtype=float)
    if arr.shape[-1] == 5:
        return arr * Z2_SIGNS
    if arr.shape[-2:] == (3, 3):
        return np.einsum("ab,...bc,cd->...ad", J_REFLECT, arr, J_REFLECT)
    raise TypeError("expected a QTensor, WVector, (...,5) or (...,3,3) array")


def o2_reflect_w(w: np.ndarray) -> np.ndarray:
    """Target part of the in-plane reflection in frame coordinates."""
    return np.asarray(w, dtype=float) * O2_REFLECT_SIGNS


def rot_e3(angle: float) -> np.ndarray:
    """Rotation about e3 by ``angle``."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def act_o2_point(q: QTensor, k: int, alpha: int, psi: float, phi: float) -> tuple[QTensor, float]:
    """Pointwise form of the in-plane symmetry action.

    Returns the transformed tensor value together with the source angle at
    which the original field must be evaluated; the radial coordinate is
    untouched.  ``alpha`` in {0, 1} selects the reflection component.
    """
    if alpha not in (0, 1):
        raise ValueError("alpha must be 0 or 1")
    g = rot_e3(0.5 * k * psi)
    if alpha:
        g = g @ L_REFLECT
    src_phi = (phi + psi) if alpha == 0 else -(phi + psi)
    return QTensor(g.T @ q.m @ g), src_phi


def compose_o2(g1: tuple[int, float], g2: tuple[int, float]) -> tuple[int, float]:
    """Group law for (reflection bit, rotation angle) pairs, with g1 acting
    after g2: the result satisfies act(g1) o act(g2) = act(g1 * g2)."""
    a1, p1 = g1
    a2, p2 = g2
    return ((a1 + a2) % 2, p1 + (-1.0) ** a1 * p2)


def f_bulk(q, params: MaterialParams):
    """Shifted bulk potential on matrices; zero exactly on the uniaxial
    minimum manifold and nonnegative everywhere."""
    m = q.m if isinstance(q, QTensor) else np.asarray(q, dtype=float)
    tr2 = np.einsum("...ab,...ab->...", m, m)
    m2 = np.einsum("...ab,...bc->...ac", m, m)
    tr3 = np.einsum("...ab,...ba->...", m2, m)
    val = (
        -0.5 * params.a2 * tr2
        - (params.b2 / 3.0) * tr3
        + 0.25 * params.c2 * tr2 * tr2
        - params.f_star
    )
    return float(val) if np.ndim(val) == 0 else val

def tr_q3_w(w: np.ndarray):
    """tr(Q^3) expressed in frame coordinates (frame-angle independent)."""
    w = np.asarray(w, dtype=float)
    w0, w1, w2, w3, w4 = (w[..., i] for i in range(5))
    return (SQRT6 / 12.0) * (
        2.0 * w0**3
        - 6.0 * w0 * (w1**2 + w2**2)
        + 3.0 * w0 * (w3**2 + w4**2)
        + 3.0 * SQRT3 * w1 * (w3**2 - w4**2)
        + 6.0 * SQRT3 * w2 * w3 * w4
    )


def f_bulk_w(w: np.ndarray, params: MaterialParams):
    """Shifted bulk potential in frame coordinates."""
    w = np.asarray(w, dtype=float)
    tr2 = np.einsum("...i,...i->...", w, w)
    tr3 = tr_q3_w(w)
    val = (
        -0.5 * params.a2 * tr2
        - (params.b2 / 3.0) * tr3
        + 0.25 * params.c2 * tr2 * tr2
        - params.f_star
    )
    return float(val) if np.ndim(val) == 0 else val


def bulk_grad_w(w: np.ndarray, params: MaterialParams) -> np.ndarray:
    """Gradient of :func:`f_bulk_w` with respect to the five coordinates."""
    w = np.asarray(w, dtype=float)
    w0, w1, w2, w3, w4 = (w[..., i] for i in range(5))
    tr2 = np.einsum("...i,...i->...", w, w)
    pre = -params.a2 + params.c2 * tr2
    c3 = params.b2 * SQRT6 / 36.0  # (b2/3) * (sqrt6/12)
    g = np.empty_like(w)
    g[..., 0] = pre * w0 - c3 * (6.0 * w0**2 - 6.0 * (w1**2 + w2**2) + 3.0 * (w3**2 + w4**2))
    g[..., 1] = pre * w1 - c3 * (-12.0 * w0 * w1 + 3.0 * SQRT3 * (w3**2 - w4**2))
    g[..., 2] = pre * w2 - c3 * (-12.0 * w0 * w2 + 6.0 * SQRT3 * w3 * w4)
    g[..., 3] = pre * w3 - c3 * (6.0 * w0 * w3 + 6.0 * SQRT3 * w1 * w3 + 6.0 * SQRT3 * w2 * w4)
    g[..., 4] = pre * w4 - c3 * (6.0 * w0 * w4 - 6.0 * SQRT3 * w1 * w4 + 6.0 * SQRT3 * w2 * w3)
    return g


def bulk_hess_w(w: np.ndarray, params: MaterialParams) -> np.ndarray:
    """Hessian of :func:`f_bulk_w`, shape (..., 5, 5)."""
    w = np.asarray(w, dtype=float)
    w0, w1, w2, w3, w4 = (w[..., i] for i in range(5))
    tr2 = np.einsum("...i,...i->...", w, w)
    pre = -params.a2 + params.c2 * tr2
    c3 = params.b2 * SQRT6 / 36.0

    hess = 2.0 * params.c2 * w[..., :, None] * w[..., None, :]
    idx = np.arange(5)
    hess[..., idx, idx] += pre[..., None]

    cubic = np.zeros(w.shape[:-1] + (5, 5))
    cubic[..., 0, 0] = 12.0 * w0
    cubic[..., 0, 1] = cubic[..., 1, 0] = -12.0 * w1
    cubic[..., 0, 2] = cubic[..., 2, 0] = -12.0 * w2
    cubic[..., 0, 3] = cubic[..., 3, 0] = 6.0 * w3
    cubic[..., 0, 4] = cubic[..., 4, 0] = 6.0 * w4
    cubic[..., 1, 1] = -12.0 * w0
    cubic[..., 1, 3] = cubic[..., 3, 1] = 6.0 * SQRT3 * w3
    cubic[..., 1, 4] = cubic[..., 4, 1] = -6.0 * SQRT3 * w4
    cubic[..., 2, 2] = -12.0 * w0
    cubic[..., 2, 3] = cubic[..., 3, 2] = 6.0 * SQRT3 * w4
    cubic[..., 2, 4] = cubic[..., 4, 2] = 6.0 * SQRT3 * w3
    cubic[..., 3, 3] = 6.0 * w0 + 6.0 * SQRT3 * w1
    cubic[..., 3, 4] = cubic[..., 4, 3] = 6.0 * SQRT3 * w2
    cubic[..., 4, 4] = 6.0 * w0 - 6.0 * SQRT3 * w1
    return hess - c3 * cubic


def boundary_w(params: MaterialParams) -> np.ndarray:
    """Frame coordinates of the anchored boundary tensor (same at every
    angle by construction of the moving frame)."""
    s = params.s_plus
    return np.array([-s / SQRT6, s / SQRT2, 0.0, 0.0, 0.0])


def g_cubic(x, y, z):
    """Cubic form steering the out-of-plane escape direction; bounded by
    2 |v|^3 with equality only on the two uniaxial rays."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    val = 2.0 * x**3 - 6.0 * x * y**2 + 3.0 * x * z**2 + 3.0 * SQRT3 * y * z**2
    return float(val) if np.ndim(val) == 0 else val


def h_bulk2(x, y, params: MaterialParams):
    """Bulk potential restricted to the in-plane coordinate plane (w0, w1);
    vanishes exactly at the anchored value and at the opposite uniaxial
    point, positive elsewhere."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    val = (
        (-0.5 * params.a2 + 0.25 * params.c2 * r2) * r2
        - (params.b2 * SQRT6 / 18.0) * y * (y * y - 3.0 * x * x)
        - params.f_star
    )
    return float(val) if np.ndim(val) == 0 else val
