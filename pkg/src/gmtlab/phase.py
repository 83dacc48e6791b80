"""Two-point phase families and their rotational curvature.

A phase is a scalar function phi(x, y) of two d-dimensional points.  The
families here are the ones the experiment scenarios need: Euclidean distance,
dot product, a translated paraboloid graph, distance measured after a smooth
warp of the y variable, the max-norm (non-smooth control case), and a cubic
polynomial family whose level curves compress onto the surface X = Y*Z.

Curvature of a family at (x, y) is the determinant of the (d+1) x (d+1)
bordered matrix

    [ 0          grad_x phi ]
    [ -grad_y phi^T   d2phi/dxdy ]

which is nonzero exactly when the level surfaces curve in the way the
positivity scenarios rely on.  Analytic derivative formulas are provided for
every smooth family; an independent central finite-difference path exists so
the two can be checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, EmptyLevelError, SingularityError, UnsupportedOperationError

KIND_UNIT_DISTANCE = "unit-distance"
KIND_DOT_PRODUCT = "dot-product"
KIND_PARABOLOID = "translated-paraboloid"
KIND_DIFFEO_DISTANCE = "diffeo-distance"
KIND_MAX_NORM = "max-norm"
KIND_BOURGAIN_CURVE = "bourgain-curve"

ALL_KINDS = (
    KIND_UNIT_DISTANCE,
    KIND_DOT_PRODUCT,
    KIND_PARABOLOID,
    KIND_DIFFEO_DISTANCE,
    KIND_MAX_NORM,
    KIND_BOURGAIN_CURVE,
)

# max-norm has corners, so every derivative-based operation refuses it.
SMOOTH_KINDS = tuple(k for k in ALL_KINDS if k != KIND_MAX_NORM)

FD_STEP = 1e-5          # central-difference step for the independent oracle
LEVEL_TOL = 1e-10       # |phi(x, y) - t| tolerance for level-set points

DEFAULT_KAPPA = 0.3


@dataclass(frozen=True)
class PhaseSpec:
    """A member of the phase catalogue: kind tag, ambient dimension, parameters."""

    kind: str
    dim: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ArgumentError(f"unknown phase kind {self.kind!r}")
        if self.dim < 2:
            raise ArgumentError("phase families need dim >= 2")
        if self.kind == KIND_BOURGAIN_CURVE and self.dim != 3:
            raise ArgumentError("bourgain-curve is a 3-parameter family: dim must be 3")
        if self.kind == KIND_DIFFEO_DISTANCE:
            kappa = self.params.get("kappa", DEFAULT_KAPPA)
            if abs(kappa) >= 1.0:
                raise ArgumentError("diffeo-distance needs |kappa| < 1 to stay invertible")

    @property
    def kappa(self) -> float:
        return float(self.params.get("kappa", DEFAULT_KAPPA))

    @property
    def is_smooth(self) -> bool:
        return self.kind in SMOOTH_KINDS


@dataclass(frozen=True)
class CurvatureSample:
    """One curvature evaluation: the pair, the determinant, and gradient sizes."""

    x: tuple
    y: tuple
    det_value: float
    grad_x_norm: float
    grad_y_norm: float


def _check_pair(spec: PhaseSpec, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (spec.dim,) or y.shape != (spec.dim,):
        raise ArgumentError(
            f"point dimension mismatch: kind {spec.kind} has dim {spec.dim}, "
            f"got shapes {x.shape} and {y.shape}"
        )
    return x, y


# ---------------------------------------------------------------------------
# warp used by the diffeo-distance family
# ---------------------------------------------------------------------------

def diffeo_map(spec: PhaseSpec, y):
    """Phi(y) = y + kappa * (sin y_2, sin y_3, ..., sin y_1), vectorized over rows."""
    y = np.asarray(y, dtype=float)
    return y + spec.kappa * np.sin(np.roll(y, -1, axis=-1))


def diffeo_jacobian(spec: PhaseSpec, y):
    y = np.asarray(y, dtype=float)
    d = y.shape[-1]
    jac = np.eye(d)
    cos = spec.kappa * np.cos(np.roll(y, -1))
    for i in range(d):
        jac[i, (i + 1) % d] += cos[i]
    return jac


def diffeo_inverse(spec: PhaseSpec, z, tol=1e-13, max_iter=60):
    """Solve Phi(y) = z by Newton iteration.  Converges for |kappa| < 1."""
    z = np.asarray(z, dtype=float)
    y = z.copy()
    for _ in range(max_iter):
        res = diffeo_map(spec, y) - z
        if np.max(np.abs(res)) < tol:
            break
        y = y - np.linalg.solve(diffeo_jacobian(spec, y), res)
    return y


def check_diffeo(spec: PhaseSpec, box, samples=200, seed=0) -> float:
    """Smallest |det DPhi| over seeded sample points of the box; > 0 means invertible."""
    lo, hi = np.asarray(box[0], float), np.asarray(box[1], float)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo, hi, size=(samples, spec.dim))
    dets = [abs(np.linalg.det(diffeo_jacobian(spec, p))) for p in pts]
    return float(min(dets))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval_phase(spec: PhaseSpec, x, y) -> float:
    x, y = _check_pair(spec, x, y)
    return float(eval_phase_batch(spec, x, y[None, :])[0])


def eval_phase_batch(spec: PhaseSpec, x, ys) -> np.ndarray:
    """phi(x, y_i) for a batch of y rows.  Used by rasterization and Monte Carlo."""
    x = np.asarray(x, dtype=float)
    ys = np.asarray(ys, dtype=float)
    kind = spec.kind
    if kind == KIND_UNIT_DISTANCE:
        return np.linalg.norm(ys - x, axis=-1)
    if kind == KIND_DOT_PRODUCT:
        return ys @ x
    if kind == KIND_PARABOLOID:
        diff = ys[..., :-1] - x[:-1]
        return ys[..., -1] - x[-1] - np.sum(diff * diff, axis=-1)
    if kind == KIND_DIFFEO_DISTANCE:
        return np.linalg.norm(diffeo_map(spec, ys) - x, axis=-1)
    if kind == KIND_MAX_NORM:
        return np.max(np.abs(ys - x), axis=-1)
    if kind == KIND_BOURGAIN_CURVE:
        # x = (x1, x2, t); only the first two y coordinates enter.
        x1, x2, t = x
        y1, y2 = ys[..., 0], ys[..., 1]
        return x1 * y1 + x2 * y2 + t * y1 * y2 + 0.5 * t * t * y1 * y1
    raise ArgumentError(f"unknown phase kind {kind!r}")


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------

def gradients(spec: PhaseSpec, x, y):
    """Analytic (grad_x phi, grad_y phi, d2 phi/dx dy) with mixed[i, j] = d2/dx_i dy_j."""
    x, y = _check_pair(spec, x, y)
    if not spec.is_smooth:
        raise UnsupportedOperationError(f"{spec.kind} phase has no derivatives")
    d = spec.dim
    kind = spec.kind

    if kind == KIND_DOT_PRODUCT:
        return y.copy(), x.copy(), np.eye(d)

    if kind == KIND_UNIT_DISTANCE:
        diff = x - y
        r = np.linalg.norm(diff)
        if r < 1e-12:
            raise SingularityError("unit-distance phase is singular at x == y")
        u = diff / r
        mixed = (np.outer(u, u) - np.eye(d)) / r
        return u, -u, mixed

    if kind == KIND_PARABOLOID:
        w = y[:-1] - x[:-1]
        gx = np.concatenate([2.0 * w, [-1.0]])
        gy = np.concatenate([-2.0 * w, [1.0]])
        mixed = np.zeros((d, d))
        mixed[: d - 1, : d - 1] = 2.0 * np.eye(d - 1)
        return gx, gy, mixed

    if kind == KIND_DIFFEO_DISTANCE:
        z = diffeo_map(spec, y) - x
        rho = np.linalg.norm(z)
        if rho < 1e-12:
            raise SingularityError("diffeo-distance phase is singular at Phi(y) == x")
        u = z / rho
        dphi = diffeo_jacobian(spec, y)
        gx = -u
        gy = dphi.T @ u
        mixed = (np.outer(u, u @ dphi) - dphi) / rho
        return gx, gy, mixed

    if kind == KIND_BOURGAIN_CURVE:
        x1, x2, t = x
        y1, y2 = y[0], y[1]
        gx = np.array([y1, y2, y1 * y2 + t * y1 * y1])
        gy = np.array([x1 + t * y2 + t * t * y1, x2 + t * y1, 0.0])
        mixed = np.array([
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [y2 + 2.0 * t * y1, y1, 0.0],
        ])
        return gx, gy, mixed

    raise ArgumentError(f"unknown phase kind {kind!r}")


def gradients_fd(spec: PhaseSpec, x, y, h: float = FD_STEP):
    """Central finite differences; independent oracle for the analytic path."""
    x, y = _check_pair(spec, x, y)
    if not spec.is_smooth:
        raise UnsupportedOperationError(f"{spec.kind} phase has no derivatives")
    d = spec.dim
    eye = h * np.eye(d)
    gx = np.array([
        (eval_phase(spec, x + eye[i], y) - eval_phase(spec, x - eye[i], y)) / (2 * h)
        for i in range(d)
    ])
    gy = np.array([
        (eval_phase(spec, x, y + eye[j]) - eval_phase(spec, x, y - eye[j])) / (2 * h)
        for j in range(d)
    ])
    mixed = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            mixed[i, j] = (
                eval_phase(spec, x + eye[i], y + eye[j])
                - eval_phase(spec, x + eye[i], y - eye[j])
                - eval_phase(spec, x - eye[i], y + eye[j])
                + eval_phase(spec, x - eye[i], y - eye[j])
            ) / (4 * h * h)
    return gx, gy, mixed


def bordered_matrix(gx, gy, mixed) -> np.ndarray:
    d = len(gx)
    m = np.zeros((d + 1, d + 1))
    m[0, 1:] = gx
    m[1:, 0] = -np.asarray(gy)
    m[1:, 1:] = mixed
    return m


def rotational_curvature(spec: PhaseSpec, x, y) -> float:
    """det of the bordered derivative matrix, from the analytic formulas."""
    gx, gy, mixed = gradients(spec, x, y)
    return float(np.linalg.det(bordered_matrix(gx, gy, mixed)))


def rotational_curvature_fd(spec: PhaseSpec, x, y, h: float = FD_STEP) -> float:
    """Same determinant built entirely from finite differences."""
    gx, gy, mixed = gradients_fd(spec, x, y, h=h)
    return float(np.linalg.det(bordered_matrix(gx, gy, mixed)))


def curvature_sample(spec: PhaseSpec, x, y) -> CurvatureSample:
    gx, gy, mixed = gradients(spec, x, y)
    det = float(np.linalg.det(bordered_matrix(gx, gy, mixed)))
    return CurvatureSample(
        x=tuple(float(v) for v in np.atleast_1d(x)),
        y=tuple(float(v) for v in np.atleast_1d(y)),
        det_value=det,
        grad_x_norm=float(np.linalg.norm(gx)),
        grad_y_norm=float(np.linalg.norm(gy)),
    )


# ---------------------------------------------------------------------------
# level-set sampling
# ---------------------------------------------------------------------------

def _default_box(spec: PhaseSpec):
    return (-2.0 * np.ones(spec.dim), 2.0 * np.ones(spec.dim))


def level_points(spec: PhaseSpec, x, t: float, count: int, seed: int = 0, box=None):
    """Sample points on {y : phi(x, y) = t}, each within LEVEL_TOL of the level.

    Distance-like and graph-like families use closed forms; the rest fall back
    to bisection along seeded rays from x.  Rays that never cross the level are
    skipped, and an empty result raises.
    """
    x, _ = _check_pair(spec, x, np.zeros(spec.dim))
    if count < 1:
        raise ArgumentError("count must be >= 1")
    if box is None:
        lo, hi = _default_box(spec)
    else:
        lo, hi = np.asarray(box[0], float), np.asarray(box[1], float)
    rng = np.random.default_rng(seed)
    d = spec.dim
    kind = spec.kind
    pts = []

    if kind == KIND_UNIT_DISTANCE or kind == KIND_DIFFEO_DISTANCE:
        if t <= 0:
            raise ArgumentError("distance level must be positive")
        dirs = _directions(rng, d, count)
        for w in dirs:
            target = x + t * w
            y = target if kind == KIND_UNIT_DISTANCE else diffeo_inverse(spec, target)
            pts.append(y)
    elif kind == KIND_DOT_PRODUCT:
        nx = float(x @ x)
        if nx < 1e-12:
            raise SingularityError("dot-product level sets through x = 0 are degenerate")
        base = (t / nx) * x
        tangent = _tangent_basis(x)
        spread = rng.uniform(-1.5, 1.5, size=(count, d - 1))
        for row in spread:
            pts.append(base + tangent @ row)
    elif kind == KIND_PARABOLOID:
        spread = rng.uniform(-1.2, 1.2, size=(count, d - 1))
        for row in spread:
            y = np.empty(d)
            y[:-1] = x[:-1] + row
            y[-1] = x[-1] + float(row @ row) + t
            pts.append(y)
    else:
        # generic path: bracket a sign change of phi - t along rays, then bisect
        dirs = _directions(rng, d, max(4 * count, 32))
        for w in dirs:
            y = _ray_bisect(spec, x, t, w, lo, hi)
            if y is not None:
                pts.append(y)
            if len(pts) == count:
                break

    pts = [p for p in pts if abs(eval_phase(spec, x, p) - t) <= LEVEL_TOL]
    if not pts:
        raise EmptyLevelError(f"no level-{t} points found for {spec.kind} from x={x.tolist()}")
    return [np.asarray(p) for p in pts[:count]]


def _directions(rng, d, count):
    if d == 2:
        # equi-angular fan with a seeded phase offset
        phase = rng.uniform(0.0, 2.0 * np.pi)
        ang = phase + 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    vecs = rng.normal(size=(count, d))
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)


def _tangent_basis(x):
    d = len(x)
    q, _ = np.linalg.qr(np.column_stack([x, np.eye(d)[:, : d - 1]]))
    return q[:, 1:]


def _ray_bisect(spec, x, t, w, lo, hi, scan=256):
    # longest step that keeps x + s*w inside the box
    with np.errstate(divide="ignore", invalid="ignore"):
        smax = np.min(np.where(w > 0, (hi - x) / w, np.where(w < 0, (lo - x) / w, np.inf)))
    if not np.isfinite(smax) or smax <= 0:
        return None
    ss = np.linspace(smax / scan, smax, scan)
    vals = eval_phase_batch(spec, x, x + ss[:, None] * w) - t
    sign = np.sign(vals)
    idx = np.nonzero(sign[:-1] * sign[1:] <= 0)[0]
    if len(idx) == 0:
        return None
    a, b = ss[idx[0]], ss[idx[0] + 1]
    fa = eval_phase(spec, x, x + a * w) - t
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = eval_phase(spec, x, x + m * w) - t
        if abs(fm) <= LEVEL_TOL * 0.5:
            return x + m * w
        if fa * fm <= 0:
            b = m
        else:
            a, fa = m, fm
    m = 0.5 * (a + b)
    if abs(eval_phase(spec, x, x + m * w) - t) <= LEVEL_TOL:
        return x + m * w
    return None


# ---------------------------------------------------------------------------
# frozen-parameter curve family of the cubic phase
# ---------------------------------------------------------------------------

def bourgain_curve(y1, y2, t):
    """Curve points (X, Y, Z) of the cubic family frozen at parameters (y1, y2, t).

    The family satisfies X = Y * Z identically, so every curve lies on that
    quadric surface; the compression scenario checks the residual numerically.
    """
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    t = np.asarray(t, dtype=float)
    X = -t * y2 - t * t * y1
    Y = -y2 - t * y1
    Z = t * np.ones_like(Y)
    return X, Y, Z
