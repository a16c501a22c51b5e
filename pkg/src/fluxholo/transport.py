"""Adiabatic connection, parallel transport and curvature.

Moving the fluxons drags the zero modes along the transport equation

    0 = g dp + (sum_a dzeta_a  d g / d zeta_a) p ,

so the coefficient vector is parallel with respect to the connection
A = g^{-1} (del g), where del is the holomorphic differential in the
fluxon positions.  Holonomy of a closed control loop transports the
whole monomial basis and assembles the D_f x D_f matrix u with
u^* g u = g (the holonomy is unitary in the zero-mode inner product,
not in the coefficient coordinates).

Position derivatives of the metric are taken by Richardson-extrapolated
central differences; differentiating under the metric integral is only
conditionally convergent near fluxons for reduced fluxes >= 1/2, while
the finite difference of the factorized metric is cheap and validated
against the exact scaling identity in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .config import ValidatedConfig
from .errors import (
    ClosedPathRequired,
    CollisionGuardTripped,
    IllConditionedMetric,
    ODEStepUnderflow,
    StepTooLarge,
)
from .metric import MetricEvaluator
from .modes import ModeVector

TWO_PI = 2.0 * np.pi


# --------------------------------------------------------------------------
# control paths
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class _Segment:
    pos: Callable
    vel: Callable
    start: np.ndarray
    end: np.ndarray


def _snap(fn_value, s, endpoint_value):
    return endpoint_value.copy() if s in (0.0, 1.0) else fn_value


class ControlPath:
    """Piecewise-C^1 path t in [0, 1] -> N fluxon positions.

    Segments share the global parameter equally.  Endpoints are stored
    and returned exactly (no trigonometric round-off at closure), because
    holonomy is only gauge invariant for exactly closed loops.
    """

    def __init__(self, segments: Sequence[_Segment]):
        if not segments:
            raise ValueError("a path needs at least one segment")
        for a, b in zip(segments[:-1], segments[1:]):
            if not np.array_equal(a.end, b.start):
                raise ValueError("path segments do not join exactly")
        self.segments = list(segments)

    # -- construction ------------------------------------------------------

    @staticmethod
    def _as_positions(base) -> np.ndarray:
        if isinstance(base, ValidatedConfig):
            return base.zeta
        return np.array([complex(z) for z in base], dtype=complex)

    @classmethod
    def circle(cls, base, mover: int, center: complex, turns: int = 1,
               radius: float | None = None) -> "ControlPath":
        """mover travels `turns` full counter-clockwise circles (negative
        turns for clockwise) around center, starting and ending at its
        base position."""
        base = cls._as_positions(base)
        if turns == 0 or turns != int(turns):
            raise ValueError("turns must be a nonzero integer")
        center = complex(center)
        r0 = base[mover] - center
        if radius is not None and abs(abs(r0) - radius) > 1e-9 * max(abs(r0), 1.0):
            raise ValueError("circle radius does not pass through the mover's position")
        if abs(r0) == 0.0:
            raise ValueError("mover sits at the circle center")
        w = TWO_PI * turns

        def pos(s, base=base):
            z = base.copy()
            z[mover] = center + r0 * np.exp(1j * w * s)
            return _snap(z, s, base)

        def vel(s):
            v = np.zeros(len(base), dtype=complex)
            v[mover] = 1j * w * r0 * np.exp(1j * w * s)
            return v

        return cls([_Segment(pos, vel, base.copy(), base.copy())])

    @classmethod
    def segment(cls, base, mover: int, to: complex) -> "ControlPath":
        base = cls._as_positions(base)
        end = base.copy()
        end[mover] = complex(to)
        d = end[mover] - base[mover]

        def pos(s):
            z = base.copy()
            z[mover] = base[mover] + d * s
            return _snap(z, s, end if s == 1.0 else base)

        def vel(s):
            v = np.zeros(len(base), dtype=complex)
            v[mover] = d
            return v

        return cls([_Segment(pos, vel, base.copy(), end)])

    @classmethod
    def exchange(cls, base, i: int, j: int, power: int = 1) -> "ControlPath":
        """Half-turn of fluxons i and j about their midpoint
        (counter-clockwise for power = +1), landing exactly on the
        swapped positions.  Odd powers swap, even powers return."""
        base = cls._as_positions(base)
        if power == 0 or power != int(power):
            raise ValueError("power must be a nonzero integer")
        c = 0.5 * (base[i] + base[j])
        end = base.copy()
        if power % 2:
            end[i], end[j] = base[j], base[i]
        w = np.pi * power

        def pos(s):
            z = base.copy()
            rot = np.exp(1j * w * s)
            z[i] = c + (base[i] - c) * rot
            z[j] = c + (base[j] - c) * rot
            return _snap(z, s, end if s == 1.0 else base)

        def vel(s):
            v = np.zeros(len(base), dtype=complex)
            rot = 1j * w * np.exp(1j * w * s)
            v[i] = (base[i] - c) * rot
            v[j] = (base[j] - c) * rot
            return v

        return cls([_Segment(pos, vel, base.copy(), end)])

    @classmethod
    def rotation(cls, base, turns: int = 1, center: complex = 0.0) -> "ControlPath":
        """Rigid rotation of the whole configuration about center."""
        base = cls._as_positions(base)
        if turns == 0 or turns != int(turns):
            raise ValueError("turns must be a nonzero integer")
        center = complex(center)
        w = TWO_PI * turns

        def pos(s):
            z = center + (base - center) * np.exp(1j * w * s)
            return _snap(z, s, base)

        def vel(s):
            return 1j * w * (base - center) * np.exp(1j * w * s)

        return cls([_Segment(pos, vel, base.copy(), base.copy())])

    @classmethod
    def parametric(cls, pos_fn, vel_fn, start, end) -> "ControlPath":
        """Arbitrary smooth segment; pos_fn(s) must equal start / end
        exactly at s = 0 / 1 (they are substituted, not checked)."""
        start = cls._as_positions(start)
        end = cls._as_positions(end)

        def pos(s):
            return _snap(np.asarray(pos_fn(s), dtype=complex), s,
                         end if s == 1.0 else start)

        def vel(s):
            return np.asarray(vel_fn(s), dtype=complex)

        return cls([_Segment(pos, vel, start, end)])

    def then(self, other: "ControlPath") -> "ControlPath":
        return ControlPath(self.segments + other.segments)

    @classmethod
    def from_json(cls, moves: Sequence[dict], base) -> "ControlPath":
        """Path from the JSON move list (0-based fluxon indices):
          {"type": "circle", "mover": a, "center": [x, y],
           "radius": r (optional), "turns": k}
          {"type": "segment", "mover": a, "to": [x, y]}
          {"type": "exchange", "pair": [a, b], "power": k}
        Each move starts from the previous move's final positions.
        """
        path = None
        current = cls._as_positions(base)
        for mv in moves:
            kind = mv["type"]
            if kind == "circle":
                piece = cls.circle(current, int(mv["mover"]),
                                   complex(*mv["center"]),
                                   turns=int(mv.get("turns", 1)),
                                   radius=mv.get("radius"))
            elif kind == "segment":
                piece = cls.segment(current, int(mv["mover"]), complex(*mv["to"]))
            elif kind == "exchange":
                i, j = mv["pair"]
                piece = cls.exchange(current, int(i), int(j),
                                     power=int(mv.get("power", 1)))
            else:
                raise ValueError(f"unknown path move type {kind!r}")
            path = piece if path is None else path.then(piece)
            current = path.end
        return path

    # -- evaluation ----------------------------------------------------------

    @property
    def start(self) -> np.ndarray:
        return self.segments[0].start.copy()

    @property
    def end(self) -> np.ndarray:
        return self.segments[-1].end.copy()

    def closure_permutation(self):
        """None if the path is open; otherwise the permutation p with
        end[i] == start[p[i]] exactly (identity for plainly closed loops)."""
        s, e = self.start, self.end
        if np.array_equal(s, e):
            return tuple(range(len(s)))
        perm = []
        for z in e:
            hit = np.nonzero(s == z)[0]
            if hit.size != 1:
                return None
            perm.append(int(hit[0]))
        return tuple(perm) if len(set(perm)) == len(s) else None

    def is_closed(self, fluxes=None) -> bool:
        perm = self.closure_permutation()
        if perm is None:
            return False
        if fluxes is None:
            return True
        fluxes = np.asarray(fluxes, dtype=float)
        return bool(np.all(fluxes[list(perm)] == fluxes))

    def _locate(self, t: float):
        n = len(self.segments)
        t = min(max(t, 0.0), 1.0)
        i = min(int(t * n), n - 1)
        return i, t * n - i

    def position(self, t: float) -> np.ndarray:
        i, s = self._locate(t)
        return self.segments[i].pos(s)

    def velocity(self, t: float) -> np.ndarray:
        i, s = self._locate(t)
        return self.segments[i].vel(s) * len(self.segments)

    def min_separation(self, samples: int = 257) -> float:
        out = np.inf
        for t in np.linspace(0.0, 1.0, samples):
            z = self.position(t)
            if len(z) > 1:
                d = np.abs(z[:, None] - z[None, :]) + np.diag([np.inf] * len(z))
                out = min(out, float(d.min()))
        return out


# --------------------------------------------------------------------------
# metric derivatives and the connection
# --------------------------------------------------------------------------

def _min_distance(positions) -> float:
    z = np.asarray(positions, dtype=complex)
    if len(z) == 1:
        return 1.0
    d = np.abs(z[:, None] - z[None, :]) + np.diag([np.inf] * len(z))
    return float(d.min())


def _holomorphic_fd(ev, positions, a, h):
    """Central-difference holomorphic derivative d g / d zeta_a =
    (d/dx - i d/dy) g / 2 at step h (4 metric evaluations)."""
    z = np.asarray(positions, dtype=complex)

    def shifted(dz):
        zz = z.copy()
        zz[a] += dz
        return ev(zz)

    gx = (shifted(h) - shifted(-h)) / (2.0 * h)
    gy = (shifted(1j * h) - shifted(-1j * h)) / (2.0 * h)
    return 0.5 * (gx - 1j * gy)


def _d_metric_raw(ev, positions, a, h):
    d1 = _holomorphic_fd(ev, positions, a, h)
    d2 = _holomorphic_fd(ev, positions, a, 0.5 * h)
    err = float(np.abs(d2 - d1).max()) / 3.0
    return (4.0 * d2 - d1) / 3.0, err


def metric_derivative(vc: ValidatedConfig, a: int, h: float | None = None,
                      tol: float = 1e-10, err_budget: float | None = None):
    """Richardson-extrapolated d g / d zeta_a and its error estimate."""
    ev = MetricEvaluator(vc.config.fluxes, tol=tol)
    positions = vc.zeta
    if h is None:
        h = 1e-3 * _min_distance(positions)
    if h >= 0.5 * _min_distance(positions):
        raise StepTooLarge(f"step {h:g} comparable to the nearest fluxon distance")
    deriv, err = _d_metric_raw(ev, positions, a, h)
    if err_budget is not None and err > err_budget * max(1.0, float(np.abs(deriv).max())):
        raise StepTooLarge(f"Richardson estimate {err:.3g} exceeds budget", attained=err)
    return deriv, err


def connection(vc: ValidatedConfig, tol: float = 1e-10) -> list:
    """Connection coefficients A_a = g^{-1} (d g / d zeta_a), one D_f x D_f
    matrix per fluxon."""
    ev = MetricEvaluator(vc.config.fluxes, tol=tol)
    g = ev(vc.zeta)
    cond = np.linalg.cond(g)
    if cond > 1e12:
        raise IllConditionedMetric(f"metric condition number {cond:.3g}")
    out = []
    for a in range(vc.n_fluxons):
        dg, _ = _d_metric_raw(ev, vc.zeta, a, 1e-3 * _min_distance(vc.zeta))
        out.append(np.linalg.solve(g, dg))
    return out


# --------------------------------------------------------------------------
# parallel transport and holonomy
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HolonomyResult:
    """Coefficient transport p -> u p around a closed loop."""

    u: np.ndarray
    eigenvalues: np.ndarray
    norm_drift: float
    method: str
    n_steps: int = 0
    nfev: int = 0
    base_positions: tuple = ()
    permutation: tuple = ()
    metadata: dict = field(default_factory=dict)

    @property
    def eigenphases(self) -> np.ndarray:
        return np.angle(self.eigenvalues)


class _TransportProblem:
    def __init__(self, vc: ValidatedConfig, path: ControlPath,
                 quad_tol: float, collision_guard: float | None):
        if not np.array_equal(path.start, vc.zeta):
            raise ValueError("path must start at the configuration's positions")
        self.vc = vc
        self.path = path
        self.ev = MetricEvaluator(vc.config.fluxes, tol=quad_tol)
        self.dim = vc.counts.D_f
        if collision_guard is None:
            collision_guard = 1e-2 * vc.diameter
        self.guard = collision_guard
        self.nfev = 0

    def rhs(self, t, y):
        self.nfev += 1
        z = self.path.position(t)
        if _min_distance(z) < self.guard:
            raise CollisionGuardTripped(
                f"fluxons within {self.guard:g} of each other at t = {t:.4f}")
        v = self.path.velocity(t)
        g = self.ev(z)
        h = 1e-3 * _min_distance(z)
        drive = np.zeros((self.dim, self.dim), dtype=complex)
        for a in np.nonzero(np.abs(v) > 0.0)[0]:
            dg, _ = _d_metric_raw(self.ev, z, a, h)
            drive += dg * v[a]
        U = y.reshape(self.dim, self.dim)
        return (-np.linalg.solve(g, drive @ U)).ravel()

    def solve(self, u0, ode_tol):
        sol = solve_ivp(self.rhs, (0.0, 1.0), u0.ravel(), method="RK45",
                        rtol=ode_tol, atol=ode_tol)
        if sol.status != 0 or not sol.success:
            raise ODEStepUnderflow(f"transport integrator failed: {sol.message}")
        return sol.y[:, -1].reshape(self.dim, self.dim), sol


def parallel_transport(vc: ValidatedConfig, path: ControlPath, p0,
                       ode_tol: float = 1e-8, quad_tol: float = 1e-10,
                       collision_guard: float | None = None):
    """Transport a coefficient vector along a control path.

    Returns (p_final, info); info reports the relative drift of the
    conserved zero-mode norm p^* g p, the accepted step count and the
    number of metric evaluations.
    """
    coeffs = np.asarray(p0.coefficients if isinstance(p0, ModeVector) else p0,
                        dtype=complex)
    dim = vc.counts.D_f
    if coeffs.shape != (dim,):
        raise ValueError(f"coefficient vector must have length D_f = {dim}")
    prob = _TransportProblem(vc, path, quad_tol, collision_guard)
    u, sol = prob.solve(np.eye(dim, dtype=complex), ode_tol)
    p1 = u @ coeffs
    g0 = prob.ev(path.start)
    g1 = prob.ev(path.end)
    n0 = float(np.real(coeffs.conj() @ g0 @ coeffs))
    n1 = float(np.real(p1.conj() @ g1 @ p1))
    info = {
        "norm_start": n0,
        "norm_end": n1,
        "norm_drift": abs(n1 - n0) / abs(n0),
        "n_steps": len(sol.t) - 1,
        "nfev": prob.nfev,
    }
    return p1, info


def holonomy(vc: ValidatedConfig, loop: ControlPath,
             ode_tol: float = 1e-8, quad_tol: float = 1e-10,
             collision_guard: float | None = None) -> HolonomyResult:
    """Numeric holonomy of a closed loop: transports the whole monomial
    basis and reports the transport matrix, its eigenvalues and the
    pseudo-unitarity drift |u^* g u - g| / |g|."""
    if not loop.is_closed(vc.config.fluxes):
        raise ClosedPathRequired("holonomy needs an exactly closed loop "
                                 "(same positions, same fluxes)")
    dim = vc.counts.D_f
    prob = _TransportProblem(vc, loop, quad_tol, collision_guard)
    u, sol = prob.solve(np.eye(dim, dtype=complex), ode_tol)
    g0 = prob.ev(loop.start)
    drift = float(np.abs(u.conj().T @ g0 @ u - g0).max() / np.abs(g0).max())
    return HolonomyResult(
        u=u,
        eigenvalues=np.linalg.eigvals(u),
        norm_drift=drift,
        method="ode",
        n_steps=len(sol.t) - 1,
        nfev=prob.nfev,
        base_positions=tuple(loop.start),
        permutation=loop.closure_permutation(),
        metadata={"ode_tol": ode_tol, "quad_tol": quad_tol},
    )


# --------------------------------------------------------------------------
# curvature
# --------------------------------------------------------------------------

def curvature_abelian(vc: ValidatedConfig, moving: int, h: float | None = None,
                      quad_tol: float = 1e-11, metric_fn=None) -> complex:
    """Adiabatic curvature coefficient d dbar log g in the moving fluxon's
    coordinate (D_f = 1 only), via the five-point Laplacian.

    metric_fn optionally replaces the factorized-metric evaluator by any
    positions -> scalar g callable (e.g. a closed form)."""
    if vc.counts.D_f != 1:
        raise ValueError("abelian curvature requires exactly one free mode")
    if metric_fn is None:
        ev = MetricEvaluator(vc.config.fluxes, tol=quad_tol)
        metric_fn = lambda z: float(np.real(ev(z)[0, 0]))
    z0 = vc.zeta
    if h is None:
        h = 2e-3 * _min_distance(z0)
    if h >= 0.5 * _min_distance(z0):
        raise StepTooLarge(f"curvature step {h:g} comparable to fluxon distances")

    def logg(dz):
        z = z0.copy()
        z[moving] += dz
        return math.log(metric_fn(z))

    lap = (logg(h) + logg(-h) + logg(1j * h) + logg(-1j * h) - 4.0 * logg(0.0)) / h ** 2
    return complex(0.25 * lap)


def curvature_nonabelian(vc: ValidatedConfig, h: float | None = None,
                         pairs=None, quad_tol: float = 1e-11) -> dict:
    """Curvature two-form coefficients R_{b-bar, a} = dbar_b (g^{-1} d_a g)
    as D_f x D_f matrices, for the requested (a, b) coordinate pairs
    (default: all diagonal pairs (a, a)).

    The purely holomorphic part of dA + A wedge A cancels identically, so
    the antiholomorphic derivative of the connection is the whole
    curvature."""
    ev = MetricEvaluator(vc.config.fluxes, tol=quad_tol)
    z0 = vc.zeta
    if h is None:
        h = 2e-3 * _min_distance(z0)
    if pairs is None:
        pairs = [(a, a) for a in range(vc.n_fluxons)]

    def A(positions, a):
        g = ev(positions)
        dg, _ = _d_metric_raw(ev, positions, a, 1e-3 * _min_distance(positions))
        return np.linalg.solve(g, dg)

    out = {}
    for a, b in pairs:
        def shifted(dz):
            z = z0.copy()
            z[b] += dz
            return A(z, a)

        ax = (shifted(h) - shifted(-h)) / (2.0 * h)
        ay = (shifted(1j * h) - shifted(-1j * h)) / (2.0 * h)
        out[(a, b)] = 0.5 * (ax + 1j * ay)
    return out
