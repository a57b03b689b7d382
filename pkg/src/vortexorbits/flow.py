"""Adaptive Dormand-Prince 5(4) integration with dense output.

The engine advances a batch of initial conditions at once; every member keeps
its own time and step size, so a batch of rotation-number evaluations costs
about as many Python iterations as its slowest member. Single trajectories
keep the per-step interpolation data for dense output, angle lifts and
section crossings.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .dynamics import VectorField
from .errors import (
    BudgetExceeded,
    DomainExit,
    IntegrationError,
    InvalidConfig,
    LiftAmbiguity,
    NonTransversal,
    StepFailure,
)

# Dormand & Prince (1980); dense output coefficients from Hairer, Norsett & Wanner.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
_D = np.array(
    [
        -12715105075 / 11282082432,
        0.0,
        87487479700 / 32700410799,
        -10690763975 / 1880347072,
        701980252875 / 199316789632,
        -1453857185 / 822651844,
        69997945 / 29380423,
    ]
)

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0


@dataclass(frozen=True)
class IntegratorSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = np.inf
    max_steps: int = 500_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidConfig("integration tolerances must be positive")
        if not self.max_steps > 0:
            raise InvalidConfig("max_steps must be positive")
        if not self.max_step > 0:
            raise InvalidConfig("max_step must be positive")

    def scaled(self, factor: float) -> "IntegratorSettings":
        """Both tolerances multiplied by ``factor``."""
        return IntegratorSettings(self.rel_tol * factor, self.abs_tol * factor, self.max_step, self.max_steps)

    def to_dict(self) -> dict:
        return {"rel_tol": self.rel_tol, "abs_tol": self.abs_tol}


def as_field(field) -> VectorField:
    if isinstance(field, VectorField):
        return field
    if callable(field):
        return VectorField(rhs=field, dim=-1)
    raise TypeError("field must be a VectorField or a callable")


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def _dense_eval(rcont, theta):
    """Continuous extension; ``rcont`` has shape (..., 5, n), ``theta`` (...)."""
    th = np.asarray(theta)[..., None]
    r0, r1, r2, r3, r4 = (rcont[..., i, :] for i in range(5))
    return r0 + th * (r1 + (1.0 - th) * (r2 + th * (r3 + (1.0 - th) * r4)))


@dataclass
class _StepData:
    t0: np.ndarray
    h: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    K: np.ndarray  # (m, 7, n)

    def rcont(self):
        y0, y1, h, K = self.y0, self.y1, self.h[:, None], self.K
        dy = y1 - y0
        bspl = h * K[:, 0] - dy
        r4 = h * np.einsum("j,mjn->mn", _D, K)
        return np.stack([y0, dy, bspl, dy - h * K[:, 6] - bspl, r4], axis=1)


@dataclass
class BatchResult:
    """Outcome of a batch integration to a common final time.

    ``turns`` holds the accumulated continuous angle increments (radians) of
    the tracked planar components, shape ``(B, k)``.
    """

    y: np.ndarray
    turns: np.ndarray
    energy_drift: np.ndarray
    invariant_drift: np.ndarray
    max_increment: np.ndarray
    max_radius_ratio: np.ndarray
    n_steps: np.ndarray
    failed: np.ndarray
    failure: list = dc_field(default_factory=list)


def _initial_step(fun, y0, f0, rtol, atol, cap):
    sc = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / sc) ** 2, axis=1))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2, axis=1))
    h0 = np.where((d0 < 1e-5) | (d1 < 1e-5), 1e-6, 0.01 * d0 / np.maximum(d1, 1e-300))
    h0 = np.minimum(h0, cap)
    with np.errstate(all="ignore"):
        y1 = y0 + h0[:, None] * f0
        f1 = fun(y1)
        d2 = np.sqrt(np.mean(((f1 - f0) / sc) ** 2, axis=1)) / h0
    d2 = np.where(np.isfinite(d2), d2, np.inf)
    big = np.maximum(d1, d2)
    h1 = np.where(big <= 1e-15, np.maximum(1e-6, h0 * 1e-3), (0.01 / np.maximum(big, 1e-300)) ** 0.2)
    return np.minimum(np.minimum(100.0 * h0, h1), cap)


def _run(
    field: VectorField,
    y0: np.ndarray,
    t0: float,
    t1,
    settings: IntegratorSettings,
    *,
    angles: Sequence[tuple] = (),
    record: bool = False,
    on_fail: str = "raise",
):
    """Core batch loop. Returns a BatchResult and, when ``record``, the step data."""
    fun = field.rhs
    y = np.array(y0, dtype=float, copy=True)
    if y.ndim != 2:
        raise ValueError("batch states must have shape (B, n)")
    B, n = y.shape
    t_end = np.broadcast_to(np.asarray(t1, float), (B,)).copy()
    t = np.full(B, float(t0))
    if np.any(t_end < t):
        raise ValueError("only forward integration is supported")
    rtol, atol = settings.rel_tol, settings.abs_tol

    def cap_of(ys):
        c = np.full(len(ys), settings.max_step)
        if field.max_step is not None:
            c = np.minimum(c, field.max_step(ys))
        return c

    with np.errstate(all="ignore"):
        k1 = fun(y)
    if not np.all(np.isfinite(k1)):
        raise StepFailure("vector field is not finite at the initial state")
    h = _initial_step(fun, y, k1, rtol, atol, cap_of(y))

    failed = np.zeros(B, dtype=bool)
    failure: list = [None] * B
    n_steps = np.zeros(B, dtype=int)
    n_ang = len(angles)
    turns = np.zeros((B, n_ang))
    max_inc = np.zeros(B)
    prev_ang = np.zeros((B, n_ang))
    r_start = np.ones((B, n_ang))
    max_ratio = np.ones(B)
    for a, (i, j, c) in enumerate(angles):
        rel = y[:, [i, j]] - np.asarray(c, float)
        prev_ang[:, a] = np.arctan2(rel[:, 1], rel[:, 0])
        r_start[:, a] = np.hypot(rel[:, 0], rel[:, 1])
    e0 = field.energy(y) if field.energy is not None else None
    i0 = field.invariant(y) if field.invariant is not None else None
    e_drift = np.zeros(B)
    i_drift = np.zeros(B)
    steps = [] if record else None

    active = t < t_end
    last_reject = np.zeros(B, dtype=bool)
    while np.any(active):
        idx = np.nonzero(active)[0]
        ya, ta, ha, ka = y[idx], t[idx], h[idx], k1[idx]
        remaining = t_end[idx] - ta
        ha = np.minimum(ha, cap_of(ya))
        # land exactly on the final time
        ha = np.where(ha >= remaining * (1 - 1e-12), remaining, np.minimum(ha, remaining))
        m = len(idx)
        K = np.empty((m, 7, n))
        K[:, 0] = ka
        with np.errstate(all="ignore"):
            for s in range(1, 6):
                ys = ya + ha[:, None] * np.einsum("j,mjn->mn", np.asarray(_A[s]), K[:, :s])
                K[:, s] = fun(ys)
            y_new = ya + ha[:, None] * np.einsum("j,mjn->mn", _B, K[:, :6])
            K[:, 6] = fun(y_new)
            err_vec = ha[:, None] * np.einsum("j,mjn->mn", _E, K)
            sc = atol + rtol * np.maximum(np.abs(ya), np.abs(y_new))
            err = np.sqrt(np.mean((err_vec / sc) ** 2, axis=1))
        ok_vals = np.all(np.isfinite(K), axis=(1, 2)) & np.all(np.isfinite(y_new), axis=1)
        if field.admissible is not None:
            ok_vals &= np.where(ok_vals, field.admissible(np.where(ok_vals[:, None], y_new, ya)), False)
        err = np.where(ok_vals & np.isfinite(err), err, np.inf)
        accept = err <= 1.0
        n_steps[idx] += 1

        with np.errstate(divide="ignore"):
            fac = SAFETY * np.where(err > 0, err, 1e-10) ** -0.2
        fac = np.clip(fac, FAC_MIN, FAC_MAX)
        fac = np.where(accept & last_reject[idx], np.minimum(fac, 1.0), fac)
        h_next = ha * fac
        last_reject[idx] = ~accept

        # step underflow / budget
        tiny = ha <= 16 * np.finfo(float).eps * np.maximum(np.abs(ta), 1.0)
        bad = (~accept & tiny) | (n_steps[idx] > settings.max_steps)
        if np.any(bad):
            for loc in np.nonzero(bad)[0]:
                member = idx[loc]
                if n_steps[member] > settings.max_steps:
                    exc: IntegrationError = BudgetExceeded(
                        f"step budget {settings.max_steps} exhausted at t={ta[loc]:.6g}"
                    )
                elif not ok_vals[loc]:
                    exc = DomainExit(ta[loc])
                else:
                    exc = StepFailure(f"step size underflow at t={ta[loc]:.6g}")
                if on_fail == "raise":
                    raise exc
                failed[member] = True
                failure[member] = exc
                active[member] = False
            accept &= ~bad

        acc = np.nonzero(accept)[0]
        if len(acc):
            members = idx[acc]
            yn = y_new[acc]
            if n_ang:
                data = None
                for a, (i, j, c) in enumerate(angles):
                    rel = yn[:, [i, j]] - np.asarray(c, float)
                    ang = np.arctan2(rel[:, 1], rel[:, 0])
                    inc = _wrap(ang - prev_ang[members, a])
                    big = np.abs(inc) > np.pi / 4
                    if np.any(big):
                        # resolve large increments on the dense interpolant
                        if data is None:
                            data = _StepData(ta[acc], ha[acc], ya[acc], yn, K[acc]).rcont()
                        sub = np.linspace(0.0, 1.0, 17)
                        pts = _dense_eval(data[big][:, None], sub[None, :])[..., [i, j]] - np.asarray(c, float)
                        sub_ang = np.arctan2(pts[..., 1], pts[..., 0])
                        sub_inc = _wrap(np.diff(sub_ang, axis=1))
                        if np.any(np.abs(sub_inc) >= np.pi / 2):
                            exc = LiftAmbiguity("angle increment could not be bounded below pi/2")
                            if on_fail == "raise":
                                raise exc
                            bad_m = members[big][np.any(np.abs(sub_inc) >= np.pi / 2, axis=1)]
                            failed[bad_m] = True
                            for bm in bad_m:
                                failure[bm] = exc
                        inc[big] = np.sum(sub_inc, axis=1)
                    turns[members, a] += inc
                    prev_ang[members, a] = ang
                    max_inc[members] = np.maximum(max_inc[members], np.abs(inc))
                    ratio = np.hypot(rel[:, 0], rel[:, 1]) / r_start[members, a]
                    if a == 0:
                        max_ratio[members] = np.maximum(max_ratio[members], ratio)
            if e0 is not None:
                e_drift[members] = np.maximum(e_drift[members], np.abs(field.energy(yn) - e0[members]))
            if i0 is not None:
                i_drift[members] = np.maximum(i_drift[members], np.abs(field.invariant(yn) - i0[members]))
            if record:
                steps.append(_StepData(ta[acc], ha[acc], ya[acc], yn, K[acc]))
            t_new = ta[acc] + ha[acc]
            done = ha[acc] >= remaining[acc]
            t[members] = np.where(done, t_end[members], t_new)
            y[members] = yn
            k1[members] = K[acc, 6]
            active[members[done]] = False
        h[idx] = h_next

    result = BatchResult(
        y=y,
        turns=turns,
        energy_drift=e_drift,
        invariant_drift=i_drift,
        max_increment=max_inc,
        max_radius_ratio=max_ratio,
        n_steps=n_steps,
        failed=failed,
        failure=failure,
    )
    if on_fail == "nan":
        result.y[failed] = np.nan
        result.turns[failed] = np.nan
    return result, steps


# -- trajectories -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted step nodes plus per-step continuous extensions (order 4)."""

    times: np.ndarray
    states: np.ndarray
    rcont: np.ndarray
    field: VectorField
    energy: np.ndarray | None = None
    invariant: np.ndarray | None = None
    settings: IntegratorSettings = IntegratorSettings()

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t1(self) -> float:
        return float(self.times[-1])

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    def __call__(self, t):
        """Dense evaluation at scalar or array times inside ``[t0, t1]``."""
        t = np.asarray(t, float)
        flat = np.atleast_1d(t)
        seg = np.clip(np.searchsorted(self.times, flat, side="right") - 1, 0, self.n_steps - 1)
        h = self.times[seg + 1] - self.times[seg]
        theta = (flat - self.times[seg]) / h
        out = _dense_eval(self.rcont[seg], theta)
        return out[0] if t.ndim == 0 else out.reshape(t.shape + (self.states.shape[1],))

    def derivative(self, t):
        return self.field.rhs(self(t))

    @property
    def energy_drift(self) -> float:
        if self.energy is None:
            return float("nan")
        return float(np.max(np.abs(self.energy - self.energy[0])))

    @property
    def relative_energy_drift(self) -> float:
        if self.energy is None:
            return float("nan")
        return self.energy_drift / (1.0 + abs(float(self.energy[0])))

    @property
    def invariant_drift(self) -> float:
        if self.invariant is None:
            return float("nan")
        return float(np.max(np.abs(self.invariant - self.invariant[0])))

    def sample_times(self, per_step: int = 4) -> np.ndarray:
        """Step nodes plus ``per_step - 1`` equispaced interior points per step."""
        frac = np.arange(per_step) / per_step
        h = np.diff(self.times)
        pts = (self.times[:-1, None] + h[:, None] * frac[None, :]).ravel()
        return np.append(pts, self.times[-1])


def _check_y0(field, y0):
    y0 = np.asarray(y0, float)
    if y0.ndim != 1:
        raise ValueError("initial state must be a 1-D array")
    if field.admissible is not None and not bool(field.admissible(y0[None])[0]):
        raise DomainExit(0.0, "initial state is not admissible")
    return y0


def integrate(field, y0, t_span, settings: IntegratorSettings | None = None) -> Trajectory:
    """Integrate one initial condition over ``t_span = (t0, t1)`` with dense output."""
    field = as_field(field)
    settings = settings or IntegratorSettings()
    y0 = _check_y0(field, y0)
    t0, t1 = map(float, t_span)
    if not (np.isfinite(t0) and np.isfinite(t1)):
        raise InvalidConfig("t_span must be finite")
    if t1 <= t0:
        raise InvalidConfig("t_span must be increasing")
    _, steps = _run(field, y0[None], t0, t1, settings, record=True)
    times = np.concatenate([[t0], np.concatenate([s.t0 + s.h for s in steps])])
    states = np.concatenate([y0[None], np.concatenate([s.y1 for s in steps])])
    rcont = np.concatenate([s.rcont() for s in steps])
    times[-1] = t1
    energy = field.energy(states) if field.energy is not None else None
    invariant = field.invariant(states) if field.invariant is not None else None
    return Trajectory(times, states, rcont, field, energy, invariant, settings)


def integrate_batch(
    field,
    y0,
    T,
    settings: IntegratorSettings | None = None,
    *,
    angles: Sequence[tuple] = (),
    on_fail: str = "raise",
) -> BatchResult:
    """Integrate many initial conditions over ``[0, T]``.

    ``angles`` lists ``(i, j, center)`` triples; the continuous angle of
    ``(y[i], y[j]) - center`` is accumulated step by step. With
    ``on_fail="nan"`` failing members are flagged instead of raising.
    """
    field = as_field(field)
    settings = settings or IntegratorSettings()
    y0 = np.atleast_2d(np.asarray(y0, float))
    if np.all(np.asarray(T) == 0):
        B = len(y0)
        z = np.zeros(B)
        return BatchResult(y0.copy(), np.zeros((B, len(angles))), z, z.copy(), z.copy(), np.ones(B),
                           np.zeros(B, int), np.zeros(B, bool), [None] * B)
    result, _ = _run(field, y0, 0.0, T, settings, angles=angles, on_fail=on_fail)
    return result


def flow_map(field, w0, T, settings: IntegratorSettings | None = None) -> np.ndarray:
    """Time-``T`` map of an autonomous field."""
    w0 = np.asarray(w0, float)
    if T == 0:
        return w0.copy()
    if T < 0:
        raise InvalidConfig("flow_map needs T >= 0")
    field = as_field(field)
    _check_y0(field, w0)
    res, _ = _run(field, w0[None], 0.0, float(T), settings or IntegratorSettings())
    return res.y[0]


def fd_steps(w0) -> np.ndarray:
    return 1e-6 * (1.0 + np.abs(np.asarray(w0, float)))


def flow_jacobian(field, w0, T, settings: IntegratorSettings | None = None, *, with_value: bool = False):
    """Central-difference Jacobian of the time-``T`` map.

    All ``2n + 1`` integrations (base point and perturbed columns) run as
    one batch, each member with its own adaptive steps.
    """
    w0 = np.asarray(w0, float)
    n = len(w0)
    if T == 0:
        return (np.eye(n), w0.copy()) if with_value else np.eye(n)
    delta = fd_steps(w0)
    pts = np.empty((2 * n + 1, n))
    pts[0] = w0
    for i in range(n):
        pts[1 + 2 * i] = w0
        pts[2 + 2 * i] = w0
        pts[1 + 2 * i, i] += delta[i]
        pts[2 + 2 * i, i] -= delta[i]
    res = integrate_batch(field, pts, float(T), settings)
    out = res.y
    jac = np.empty((n, n))
    for i in range(n):
        jac[:, i] = (out[1 + 2 * i] - out[2 + 2 * i]) / (2.0 * delta[i])
    return (jac, out[0]) if with_value else jac


# -- angle lifts --------------------------------------------------------------

@dataclass(frozen=True)
class AngleLift:
    """Continuous argument of a planar component sampled on a refined grid."""

    times: np.ndarray
    values: np.ndarray
    trajectory: Trajectory
    coords: tuple
    center: np.ndarray

    def _raw(self, t):
        p = self.trajectory(t)[..., list(self.coords)] - self.center
        return np.arctan2(p[..., 1], p[..., 0])

    def at(self, t):
        t = np.asarray(t, float)
        k = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 1)
        base = self.values[k]
        return base + _wrap(self._raw(t) - _wrap(base))

    def increment(self, ta, tb) -> float:
        return float(self.at(tb) - self.at(ta))

    def rate(self, t):
        """Angular velocity from the vector field at the interpolated state."""
        y = self.trajectory(t)
        v = self.trajectory.field.rhs(y)[..., list(self.coords)]
        p = y[..., list(self.coords)] - self.center
        return (p[..., 0] * v[..., 1] - p[..., 1] * v[..., 0]) / np.sum(p * p, axis=-1)


def lift_angle(trajectory: Trajectory, coords=(0, 1), center=(0.0, 0.0), max_rounds: int = 30) -> AngleLift:
    """Continuous argument of ``trajectory[coords] - center``.

    Sampling starts from the step nodes and is refined on the dense
    interpolant until every increment is below pi/2.
    """
    center = np.asarray(center, float)
    times = trajectory.times.copy()

    def raw(ts):
        p = trajectory(ts)[..., list(coords)] - center
        if np.any(np.sum(p * p, axis=-1) == 0.0):
            raise LiftAmbiguity("trajectory passes through the lift center")
        return np.arctan2(p[..., 1], p[..., 0])

    ang = raw(times)
    for _ in range(max_rounds):
        inc = _wrap(np.diff(ang))
        big = np.abs(inc) >= np.pi / 2
        if not np.any(big):
            values = ang[0] + np.concatenate([[0.0], np.cumsum(inc)])
            return AngleLift(times, values, trajectory, tuple(coords), center)
        mids = 0.5 * (times[:-1][big] + times[1:][big])
        times = np.sort(np.concatenate([times, mids]))
        ang = raw(times)
    raise LiftAmbiguity("angle increments stay above pi/2 after refinement")


def lift_angles(trajectory: Trajectory, center2=(0.0, 0.0)):
    """Lifts of ``w1`` (around the origin) and of ``w2`` (around ``center2``)."""
    return lift_angle(trajectory, (0, 1), (0.0, 0.0)), lift_angle(trajectory, (2, 3), center2)


# -- section crossings --------------------------------------------------------

def section_crossings(
    trajectory: Trajectory,
    center=(0.0, 0.0),
    angle: float = 0.0,
    *,
    coords=(0, 1),
    orientation: int | None = None,
    t_tol: float = 1e-13,
) -> np.ndarray:
    """Times at which the planar component crosses the ray ``center + t e(angle)``.

    Crossings are located by root finding on the dense interpolant.
    ``orientation=+1`` keeps counter-clockwise crossings only.
    """
    center = np.asarray(center, float)
    u = np.array([np.cos(angle), np.sin(angle)])
    cols = list(coords)

    def side_of(y):
        rel = y[..., cols] - center
        return u[0] * rel[..., 1] - u[1] * rel[..., 0]

    def along_of(y):
        return np.sum((y[..., cols] - center) * u, axis=-1)

    s = side_of(trajectory.states)
    times = trajectory.times
    span = times[-1] - times[0]
    out = []
    cand = np.nonzero((np.sign(s[:-1]) != np.sign(s[1:])) | (s[1:] == 0.0))[0]
    for k in cand:
        ta, tb = times[k], times[k + 1]
        fa, fb = s[k], s[k + 1]
        if fb == 0.0:
            tc = tb
        elif fa == 0.0:
            tc = ta
        else:
            tc = brentq(lambda tt: side_of(trajectory(tt)), ta, tb, xtol=t_tol, rtol=4 * np.finfo(float).eps)
        if tc - times[0] <= 1e-9 * span:
            continue
        y = trajectory(tc)
        if along_of(y) <= 0.0:
            continue
        rel = y[cols] - center
        v = trajectory.field.rhs(y)[cols]
        rate = (rel[0] * v[1] - rel[1] * v[0]) / float(rel @ rel)
        if abs(rate) < 1e-8:
            raise NonTransversal(f"angular rate {rate:.3g} at crossing t={tc:.6g}")
        if orientation is not None and np.sign(rate) != np.sign(orientation):
            continue
        if out and abs(tc - out[-1]) <= 10 * t_tol:
            continue
        out.append(tc)
    return np.array(out)


# -- export -------------------------------------------------------------------

TRAJECTORY_COLUMNS = ("t", "z1x", "z1y", "z2x", "z2y", "H", "I", "Theta1", "Theta2")


def trajectory_table(trajectory: Trajectory, model, config, *, kind: str = "w", center2=(0.0, 0.0), per_step: int = 1):
    """Rows ``t, z1x, z1y, z2x, z2y, H, I, Theta1, Theta2`` for a pair trajectory."""
    from .dynamics import angular_impulse, eval_H, from_w, to_w

    ts = trajectory.sample_times(per_step)
    ys = trajectory(ts)
    if kind == "w":
        ws, zs = ys, from_w(config, ys)
    elif kind == "z":
        ws, zs = to_w(config, ys), ys
    else:
        raise ValueError("kind must be 'w' or 'z'")
    H = eval_H(model, config, zs)
    center = model.symmetry_center if model.symmetry_center is not None else np.zeros(2)
    I = angular_impulse(config, zs, center)
    # lifts from the sampled w states (sampling resolves the fast turn)
    th1 = np.unwrap(np.arctan2(ws[:, 1], ws[:, 0]))
    rel = ws[:, 2:4] - np.asarray(center2, float)
    th2 = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
    return np.column_stack([ts, zs, H, I, th1, th2])


def write_trajectory_csv(path, trajectory: Trajectory, model, config, **kw) -> None:
    table = trajectory_table(trajectory, model, config, **kw)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for row in table:
            writer.writerow([repr(float(v)) for v in row])
