"""Level lines of the Robin function and the period of single-vortex motion on them."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .domain import DomainModel, harmonic_center
from .dynamics import VortexConfig, center_system, e
from .errors import (
    GradientVanishes,
    InvalidConfig,
    NotPositiveDefinite,
    RayRootNotBracketed,
)
from .flow import IntegratorSettings, Trajectory, integrate, lift_angle, section_crossings

MARGIN_FLOOR = 1e-3
MONOTONE_GAP = 1e-10


@dataclass(frozen=True, eq=False)
class LevelOrbit:
    """A traced level line ``h = c`` around a star center.

    ``samples[i] = center + radii[i] * e(thetas[i])``. ``orientation`` is +1
    when the vortex runs counter-clockwise around the center. ``period`` is the
    first-return time of ``dz/dt = -kappa J grad h(z)`` to the ray through
    ``samples[0]``; ``period_quadrature`` is the same period computed from the
    samples alone, which serves as an independent check.
    """

    c: float
    kappa: float
    orientation: int
    star_center: np.ndarray
    thetas: np.ndarray
    radii: np.ndarray
    samples: np.ndarray
    star_margin: float
    winding: int
    period: float
    period_quadrature: float
    period_lift: float
    level_error: float
    trajectory: Trajectory = field(repr=False)

    def state_at(self, t):
        """Position on the level-line solution at time ``t`` (taken modulo the period)."""
        t = np.mod(np.asarray(t, float), self.period)
        return self.trajectory(t)

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "kappa": self.kappa,
            "orientation": self.orientation,
            "star_center": self.star_center.tolist(),
            "n_samples": len(self.thetas),
            "star_margin": self.star_margin,
            "winding": self.winding,
            "period": self.period,
            "period_quadrature": self.period_quadrature,
            "period_lift": self.period_lift,
            "level_error": self.level_error,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta", "r"])
            for th, r in zip(self.thetas, self.radii):
                writer.writerow([repr(float(th)), repr(float(r))])


def _default_center(model: DomainModel):
    seed = model.symmetry_center if model.symmetry_center is not None else np.zeros(2)
    return harmonic_center(model, seed)


def ray_radius(model: DomainModel, c: float, center, theta: float, t_guess: float = 0.1) -> float:
    """Distance ``t > 0`` from ``center`` along ``e(theta)`` at which ``h = c``."""
    center = np.asarray(center, float)
    u = e(theta)

    def phi(t):
        return float(model.eval_h(center + t * u)) - c

    if phi(0.0) >= 0.0:
        raise RayRootNotBracketed(theta, f"h(center) >= c = {c:g}; the level does not enclose the center")
    lo, hi = 0.0, max(t_guess, 1e-8)
    for _ in range(200):
        z = center + hi * u
        if not bool(model.inside(z)):
            # shrink onto the boundary, looking for h > c on the way
            out = hi
            for _ in range(200):
                mid = 0.5 * (lo + out)
                if bool(model.inside(center + mid * u)):
                    if phi(mid) > 0.0:
                        hi = mid
                        break
                    lo = mid
                else:
                    out = mid
                if out - lo <= 1e-15 * max(out, 1.0):
                    raise RayRootNotBracketed(theta)
            else:
                raise RayRootNotBracketed(theta)
            break
        if phi(hi) > 0.0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise RayRootNotBracketed(theta)
    return brentq(phi, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def star_margin(model: DomainModel, samples, center) -> float:
    """Smallest normalized transversality of the level curve to the rays from ``center``."""
    rel = np.asarray(samples, float) - np.asarray(center, float)
    grad = model.grad_h(samples)
    num = np.sum(grad * rel, axis=-1)
    return float(np.min(num / (np.linalg.norm(grad, axis=-1) * np.linalg.norm(rel, axis=-1))))


def _winding(samples, center) -> int:
    rel = np.asarray(samples, float) - np.asarray(center, float)
    ang = np.arctan2(rel[:, 1], rel[:, 0])
    steps = np.diff(np.append(ang, ang[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return int(round(np.sum(steps) / (2 * np.pi)))


def quadrature_period(model: DomainModel, kappa: float, thetas, samples, center) -> float:
    """Period from ``T = int r^2 / (|kappa| <grad h, z - z0>) dtheta`` (trapezoid rule)."""
    rel = samples - center
    r2 = np.sum(rel * rel, axis=-1)
    dens = r2 / (abs(kappa) * np.sum(model.grad_h(samples) * rel, axis=-1))
    return float(np.mean(dens) * 2 * np.pi)


def trace_level(
    model: DomainModel,
    config: VortexConfig,
    c: float,
    center=None,
    n_samples: int = 64,
    settings: IntegratorSettings | None = None,
) -> LevelOrbit:
    """Trace the level ``h = c`` that is star-shaped around ``center``.

    The vortex strength driving the single-vortex motion is
    ``kappa1 + kappa2``.
    """
    if n_samples < 4:
        raise InvalidConfig("n_samples must be at least 4")
    settings = settings or IntegratorSettings()
    center = _default_center(model) if center is None else np.asarray(center, float)
    kappa = config.kappa_sum
    thetas = 2 * np.pi * np.arange(n_samples) / n_samples
    radii = np.empty(n_samples)
    guess = 0.1
    for i, th in enumerate(thetas):
        radii[i] = ray_radius(model, c, center, th, guess)
        guess = 0.5 * radii[i]
    samples = center + radii[:, None] * e(thetas)
    gnorm = np.linalg.norm(model.grad_h(samples), axis=-1)
    if np.min(gnorm) < 1e-10:
        i = int(np.argmin(gnorm))
        raise GradientVanishes(f"|grad h| = {gnorm[i]:.3g} at theta = {thetas[i]:.6g}")
    margin = star_margin(model, samples, center)
    t_quad = quadrature_period(model, kappa, thetas, samples, center)
    field_ = center_system(model, kappa)
    z_start = samples[0]
    rel0 = z_start - center
    v0 = field_.rhs(z_start)
    orientation = 1 if rel0[0] * v0[1] - rel0[1] * v0[0] > 0 else -1

    t_end = 1.1 * t_quad if np.isfinite(t_quad) and t_quad > 0 else 10.0
    for _ in range(8):
        traj = integrate(field_, z_start, (0.0, t_end), settings)
        hits = section_crossings(traj, center, thetas[0], orientation=orientation)
        if len(hits):
            break
        t_end *= 2.0
    else:
        raise RayRootNotBracketed(thetas[0], "integrated level solution never returned to its section")
    period = float(hits[0])
    traj = integrate(field_, z_start, (0.0, period * 1.05), settings)

    lift = lift_angle(traj, (0, 1), center)
    target = lift.values[0] + 2 * np.pi * orientation
    period_lift = brentq(
        lambda t: float(lift.at(t)) - target, 0.9 * period, 1.05 * period, xtol=1e-13, rtol=4 * np.finfo(float).eps
    )
    ts = traj.sample_times(4)
    level_error = float(np.max(np.abs(model.eval_h(traj(ts[ts <= period])) - c)))
    return LevelOrbit(
        c=float(c),
        kappa=float(kappa),
        orientation=orientation,
        star_center=center,
        thetas=thetas,
        radii=radii,
        samples=samples,
        star_margin=margin,
        winding=_winding(samples, center),
        period=period,
        period_quadrature=t_quad,
        period_lift=float(period_lift),
        level_error=level_error,
        trajectory=traj,
    )


def _direction(T) -> str | None:
    diffs = np.diff(np.asarray(T, float))
    if len(diffs) and np.all(diffs > MONOTONE_GAP):
        return "increasing"
    if len(diffs) and np.all(diffs < -MONOTONE_GAP):
        return "decreasing"
    return None


@dataclass(frozen=True, eq=False)
class PeriodFunction:
    c: np.ndarray
    T: np.ndarray
    direction: str | None
    orbits: list = field(repr=False, default_factory=list)

    @property
    def monotone(self) -> bool:
        return self.direction is not None

    def rows(self):
        return list(zip(self.c.tolist(), self.T.tolist()))


def period_function(
    model: DomainModel,
    config: VortexConfig,
    c_grid,
    center=None,
    n_samples: int = 64,
    settings: IntegratorSettings | None = None,
) -> PeriodFunction:
    """Periods on a grid of levels; non-monotone grids are reported, not raised."""
    center = _default_center(model) if center is None else np.asarray(center, float)
    grid = np.asarray(c_grid, float)
    orbits = [trace_level(model, config, c, center, n_samples, settings) for c in grid]
    T = np.array([o.period for o in orbits])
    return PeriodFunction(grid, T, _direction(T), orbits)


def hessian_period_limit(model: DomainModel, config: VortexConfig, z0) -> float:
    """Small-orbit limit ``2 pi / (|kappa1 + kappa2| sqrt(det h''(z0)))``."""
    hess = np.asarray(model.hess_h(np.asarray(z0, float)), float)
    eig = np.linalg.eigvalsh(0.5 * (hess + hess.T))
    if not np.all(eig > 0.0):
        raise NotPositiveDefinite(f"Hessian of h at z0 has eigenvalues {eig}")
    return float(2 * np.pi / (abs(config.kappa_sum) * np.sqrt(np.prod(eig))))


@dataclass(frozen=True)
class AssumptionCertificate:
    c: float
    c0: float
    d0: float
    grid: tuple
    T: tuple
    star_margin: tuple
    direction: str | None
    min_margin: float
    margin_floor: float
    tolerances: dict

    @property
    def monotone(self) -> bool:
        return self.direction is not None

    @property
    def positive(self) -> bool:
        return self.monotone and self.min_margin > self.margin_floor

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "c0": self.c0,
            "d0": self.d0,
            "grid": list(self.grid),
            "T": list(self.T),
            "star_margin": list(self.star_margin),
            "monotone": self.monotone,
            "monotone_direction": self.direction,
            "min_margin": self.min_margin,
            "margin_floor": self.margin_floor,
            "positive": self.positive,
            "tolerances": self.tolerances,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def certify_assumption(
    model: DomainModel,
    config: VortexConfig,
    c: float,
    c0: float,
    d0: float,
    center=None,
    grid=None,
    *,
    n_grid: int = 9,
    n_samples: int = 64,
    margin_floor: float = MARGIN_FLOOR,
    settings: IntegratorSettings | None = None,
) -> AssumptionCertificate:
    """Star-shapedness and period monotonicity sampled on levels in ``[c0, d0]``."""
    if not c0 < c < d0:
        raise InvalidConfig(f"need c0 < c < d0 (got {c0}, {c}, {d0})")
    settings = settings or IntegratorSettings()
    grid = np.linspace(c0, d0, n_grid) if grid is None else np.sort(np.asarray(grid, float))
    pf = period_function(model, config, grid, center, n_samples, settings)
    margins = [o.star_margin for o in pf.orbits]
    return AssumptionCertificate(
        c=float(c),
        c0=float(c0),
        d0=float(d0),
        grid=tuple(grid.tolist()),
        T=tuple(pf.T.tolist()),
        star_margin=tuple(margins),
        direction=pf.direction,
        min_margin=float(min(margins)),
        margin_floor=float(margin_floor),
        tolerances=settings.to_dict(),
    )
