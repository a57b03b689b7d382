"""Rotation numbers over the window ``[0, T(c)]`` and the twist certificate.

The state ``w = (w1, w2)`` lives in the transformed coordinates of a
normalized configuration (``kappa1 + kappa2 = 1``). ``rot1`` counts turns of
the fast variable ``w1`` around the origin and ``rot2`` counts turns of the
center of vorticity ``w2`` around the star center of the level lines.

Certification samples the boundary of the product annulus: ``w2`` on the
level lines ``C_c1`` and ``C_d1`` (and on ``C_c`` for the fast-rotation
bounds) crossed with ``n_theta`` phases of ``w1`` and ``n_r`` radii in
``[a1, b1]``. The four margins reported are the distances of the sampled
rotation numbers from the thresholds; the certificate is positive only when
all four are positive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .domain import DomainModel
from .dynamics import VortexConfig, angular_rate_f, w_system
from .errors import CannotCertify, InvalidConfig
from .flow import IntegratorSettings, integrate, integrate_batch, lift_angle
from .levelset import LevelOrbit, certify_assumption, trace_level

TWO_PI = 2.0 * np.pi
NU_MARGIN = 0.05


@dataclass(frozen=True)
class Grids:
    n_boundary: int = 16
    n_theta: int = 8
    n_radii: int = 4
    theta_offset: float = 0.0

    def __post_init__(self):
        if min(self.n_boundary, self.n_theta, self.n_radii) < 1:
            raise InvalidConfig("grid sizes must be positive")

    def doubled(self) -> "Grids":
        return Grids(2 * self.n_boundary, 2 * self.n_theta, 2 * self.n_radii, self.theta_offset)

    def thetas(self) -> np.ndarray:
        return self.theta_offset + TWO_PI * np.arange(self.n_theta) / self.n_theta

    def to_dict(self) -> dict:
        return {
            "n_boundary": self.n_boundary,
            "n_theta": self.n_theta,
            "n_radii": self.n_radii,
            "theta_offset": self.theta_offset,
        }


def rot1(model: DomainModel, config: VortexConfig, w, T: float, settings: IntegratorSettings | None = None) -> float:
    traj = integrate(w_system(model, config), w, (0.0, T), settings)
    return lift_angle(traj, (0, 1), (0.0, 0.0)).increment(0.0, T) / TWO_PI


def rot2(
    model: DomainModel,
    config: VortexConfig,
    w,
    T: float,
    settings: IntegratorSettings | None = None,
    center=(0.0, 0.0),
) -> float:
    traj = integrate(w_system(model, config), w, (0.0, T), settings)
    return lift_angle(traj, (2, 3), center).increment(0.0, T) / TWO_PI


def rotation_numbers(
    model: DomainModel,
    config: VortexConfig,
    W,
    T: float,
    settings: IntegratorSettings | None = None,
    center=(0.0, 0.0),
):
    """Batched ``(rot1, rot2)`` for initial states ``W`` of shape ``(B, 4)``.

    Members whose integration fails come back as NaN.
    """
    res = integrate_batch(
        w_system(model, config),
        W,
        T,
        settings,
        angles=((0, 1, (0.0, 0.0)), (2, 3, np.asarray(center, float))),
        on_fail="nan",
    )
    return res.turns[:, 0] / TWO_PI, res.turns[:, 1] / TWO_PI, res


def fast_turns(config: VortexConfig, T: float, R1) -> np.ndarray:
    """Leading-order ``rot1`` of a pair with ``|w1| = R1``: ``k1 k2 T / (2 pi^2 R1^2)``."""
    return config.product * T / (2.0 * np.pi**2 * np.asarray(R1, float) ** 2)


def _subsample(level: LevelOrbit, n: int) -> np.ndarray:
    idx = np.round(np.linspace(0, len(level.samples), n, endpoint=False)).astype(int)
    return level.samples[idx]


def product_states(points, thetas, radii) -> np.ndarray:
    """States ``(R e(theta), p)`` for every boundary point, phase and radius.

    Shape ``(len(points), len(thetas), len(radii), 4)``.
    """
    points = np.asarray(points, float)
    radii = np.asarray(radii, float)
    th = np.asarray(thetas, float)
    out = np.empty((len(points), len(th), len(radii), 4))
    out[..., 0] = np.cos(th)[None, :, None] * radii[None, None, :]
    out[..., 1] = np.sin(th)[None, :, None] * radii[None, None, :]
    out[..., 2] = points[:, None, None, 0]
    out[..., 3] = points[:, None, None, 1]
    return out


def _range(x) -> tuple:
    x = np.asarray(x, float)
    if np.any(~np.isfinite(x)):
        return (float("nan"), float("nan"))
    return (float(np.min(x)), float(np.max(x)))


def choose_nu(sigma: int, rot1_outer: tuple) -> int:
    """Smallest ``|nu|`` strictly beyond the outer rot1 range with margin ``NU_MARGIN``."""
    lo, hi = rot1_outer
    if sigma > 0:
        return max(1, math.ceil(hi + NU_MARGIN))
    return min(-1, math.floor(lo - NU_MARGIN))


@dataclass(frozen=True)
class TwistCertificate:
    """Sampled twist inequalities on the annulus ``a1 <= |w1| <= b1``.

    ``rot1_inner`` / ``rot1_outer`` are the sampled ranges of rot1 on
    ``|w1| = a1`` and ``|w1| = b1``; ``rot2_c1`` / ``rot2_d1`` the ranges of
    rot2 with ``w2`` on the two boundary level lines. ``T`` is the window in
    normalized time; the physical period is ``T / |kappa1 + kappa2|``.
    """

    kappa1: float
    kappa2: float
    c: float
    c1: float
    d1: float
    a1: float
    b1: float
    nu: int
    sigma: int
    T: float
    period_direction: str
    rot1_inner: tuple
    rot1_outer: tuple
    rot2_c1: tuple
    rot2_d1: tuple
    margins: dict
    grids: Grids
    star_center: tuple
    tolerances: dict
    halvings: dict

    @property
    def positive(self) -> bool:
        return all(np.isfinite(m) and m > 0.0 for m in self.margins.values())

    @property
    def normalized_config(self) -> VortexConfig:
        return VortexConfig(self.kappa1, self.kappa2).normalized()

    @property
    def min_margin(self) -> float:
        return float(min(self.margins.values()))

    def to_dict(self) -> dict:
        return {
            "kappa1": self.kappa1,
            "kappa2": self.kappa2,
            "c": self.c,
            "c1": self.c1,
            "d1": self.d1,
            "a1": self.a1,
            "b1": self.b1,
            "nu": self.nu,
            "sigma": self.sigma,
            "T": self.T,
            "period_direction": self.period_direction,
            "rot1_inner": list(self.rot1_inner),
            "rot1_outer": list(self.rot1_outer),
            "rot2_on_C_c1": list(self.rot2_c1),
            "rot2_on_C_d1": list(self.rot2_d1),
            "margins": dict(self.margins),
            "positive": self.positive,
            "grids": self.grids.to_dict(),
            "star_center": list(self.star_center),
            "tolerances": dict(self.tolerances),
            "halvings": dict(self.halvings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _rot2_margins(direction: str, orientation: int, r2_c1, r2_d1) -> tuple[float, float]:
    """Margins of the rot2 inequalities; the threshold is one turn in the level's own sense."""
    a = orientation * np.asarray(r2_c1, float)
    b = orientation * np.asarray(r2_d1, float)
    if np.any(~np.isfinite(a)) or np.any(~np.isfinite(b)):
        return float("-inf"), float("-inf")
    if direction == "decreasing":
        return float(1.0 - np.max(a)), float(np.min(b) - 1.0)
    return float(np.min(a) - 1.0), float(1.0 - np.max(b))


def _rot1_margins(sigma: int, nu: int, inner, outer) -> tuple[float, float]:
    inner = np.asarray(inner, float)
    outer = np.asarray(outer, float)
    if np.any(~np.isfinite(inner)) or np.any(~np.isfinite(outer)):
        return float("-inf"), float("-inf")
    if sigma > 0:
        return float(np.min(inner) - nu), float(nu - np.max(outer))
    return float(nu - np.max(inner)), float(np.min(outer) - nu)


@dataclass(frozen=True, eq=False)
class Annulus:
    """The three level lines ``C_c1``, ``C_c``, ``C_d1`` and the period direction."""

    inner: LevelOrbit
    middle: LevelOrbit
    outer: LevelOrbit
    direction: str

    @property
    def T(self) -> float:
        return self.middle.period

    @property
    def center(self) -> np.ndarray:
        return self.middle.star_center


def build_annulus(
    model: DomainModel,
    config: VortexConfig,
    c: float,
    c1: float,
    d1: float,
    center=None,
    *,
    n_samples: int = 64,
    settings: IntegratorSettings | None = None,
) -> Annulus:
    """Trace ``C_c1, C_c, C_d1`` after certifying star shape and period monotonicity."""
    cfg = config.normalized()
    cert = certify_assumption(model, cfg, c, c1, d1, center, n_grid=5, n_samples=n_samples, settings=settings)
    if not cert.positive:
        raise CannotCertify(
            "assumption",
            cert.min_margin if not cert.monotone else cert.min_margin - cert.margin_floor,
            "levels between c1 and d1 are not star-shaped with monotone period",
        )
    levels = [trace_level(model, cfg, x, center, n_samples, settings) for x in (c1, c, d1)]
    return Annulus(levels[0], levels[1], levels[2], cert.direction)


def _evaluate(model, cfg, annulus: Annulus, grids: Grids, a1, b1, settings, *, radii=None):
    """Rotation numbers on the sampled product boundary.

    Returns a dict of arrays indexed (level, point, theta, radius) with levels
    ordered ``C_c1, C_c, C_d1``.
    """
    radii = np.linspace(a1, b1, grids.n_radii) if radii is None else np.asarray(radii, float)
    pts = [_subsample(lv, grids.n_boundary) for lv in (annulus.inner, annulus.middle, annulus.outer)]
    states = np.stack([product_states(p, grids.thetas(), radii) for p in pts])
    shape = states.shape[:-1]
    r1, r2, _ = rotation_numbers(model, cfg, states.reshape(-1, 4), annulus.T, settings, annulus.center)
    return radii, r1.reshape(shape), r2.reshape(shape)


def certify_twist(
    model: DomainModel,
    config: VortexConfig,
    c: float,
    c1: float,
    d1: float,
    trial_b1: float = 0.2,
    grids: Grids | None = None,
    *,
    annulus: Annulus | None = None,
    dynamics_model: DomainModel | None = None,
    center=None,
    settings: IntegratorSettings | None = None,
    max_halvings: int = 40,
    max_turns: float = 2000.0,
) -> TwistCertificate:
    """Search radii ``a1 < b1`` and an integer ``nu`` satisfying the twist inequalities.

    ``b1`` is halved until the rot2 inequalities hold on both boundary level
    lines for ``|w1|`` between a provisional ``a1 = b1 / 2`` and ``b1``. Then
    ``nu`` is the smallest integer beyond the sampled rot1 values on
    ``|w1| = b1`` and ``a1`` is halved until rot1 on ``|w1| = a1`` passes
    ``nu``; a cheap bound on the angular rate screens out radii that cannot
    work before integrating. Searches stop early once the predicted number of
    fast turns in a window exceeds ``max_turns``.

    ``annulus`` may be supplied to take the level lines from one model while
    the pair dynamics use ``dynamics_model``.
    """
    if not c1 < c < d1:
        raise InvalidConfig(f"need c1 < c < d1 (got {c1}, {c}, {d1})")
    if not trial_b1 > 0:
        raise InvalidConfig("trial_b1 must be positive")
    grids = grids or Grids()
    settings = settings or IntegratorSettings()
    cfg = config.normalized()
    dyn = dynamics_model or model
    if annulus is None:
        annulus = build_annulus(model, cfg, c, c1, d1, center, settings=settings)
    T = annulus.T
    sigma = cfg.sigma
    orient = annulus.middle.orientation

    # (i) outer radius: rot2 inequalities on both boundary level lines
    b1 = float(trial_b1)
    best = float("-inf")
    for nb in range(max_halvings + 1):
        a1 = 0.5 * b1
        if abs(fast_turns(cfg, T, a1)) > max_turns:
            raise CannotCertify("rot2", best, f"rot2 inequalities still fail at b1={2 * b1:.3g}; turn budget reached")
        radii, r1, r2 = _evaluate(dyn, cfg, annulus, grids, a1, b1, settings)
        m_c1, m_d1 = _rot2_margins(annulus.direction, orient, r2[0], r2[2])
        best = max(best, min(m_c1, m_d1))
        if m_c1 > 0 and m_d1 > 0:
            break
        b1 *= 0.5
    else:
        raise CannotCertify("rot2", best)
    halvings_b1 = nb

    # (ii) nu beyond the outer rot1 values
    outer = r1[..., -1]
    if np.any(~np.isfinite(outer)):
        raise CannotCertify("rot1_outer", float("-inf"), "integration failed on |w1| = b1")
    nu = choose_nu(sigma, _range(outer))

    # (iii) inner radius
    inner = r1[..., 0]
    halvings_a1 = 0
    th = grids.thetas()
    pts = np.concatenate([_subsample(lv, grids.n_boundary) for lv in (annulus.inner, annulus.middle, annulus.outer)])
    while True:
        m_in, _ = _rot1_margins(sigma, nu, inner, outer)
        if m_in > 0:
            break
        if halvings_a1 >= max_halvings:
            raise CannotCertify("rot1_inner", m_in)
        a1 *= 0.5
        halvings_a1 += 1
        if abs(fast_turns(cfg, T, a1)) > max_turns:
            raise CannotCertify("rot1_inner", m_in, "turn budget reached while shrinking a1")
        # angular-rate screen: the window-averaged rate must beat 2 pi nu / T
        R2 = np.linalg.norm(pts - annulus.center, axis=-1)
        Th2 = np.arctan2(pts[:, 1] - annulus.center[1], pts[:, 0] - annulus.center[0])
        f = angular_rate_f(dyn, cfg, a1, R2[:, None], th[None, :], Th2[:, None])
        est = f * T / TWO_PI
        if (sigma > 0 and np.min(est) <= nu) or (sigma < 0 and np.max(est) >= nu):
            continue
        _, r1a, r2a = _evaluate(dyn, cfg, annulus, grids, a1, a1, settings, radii=[a1])
        inner = r1a[..., 0]

    # re-verify rot2 on the final radial range
    if halvings_a1:
        radii, r1, r2 = _evaluate(dyn, cfg, annulus, grids, a1, b1, settings)
        inner, outer = r1[..., 0], r1[..., -1]
    return _assemble(cfg, config, annulus, grids, settings, a1, b1, nu, r1[..., 0], r1[..., -1], r2,
                     {"b1": halvings_b1, "a1": halvings_a1})


def _assemble(cfg, config, annulus, grids, settings, a1, b1, nu, inner, outer, r2, halvings):
    m_in, m_out = _rot1_margins(cfg.sigma, nu, inner, outer)
    m_c1, m_d1 = _rot2_margins(annulus.direction, annulus.middle.orientation, r2[0], r2[2])
    return TwistCertificate(
        kappa1=config.kappa1,
        kappa2=config.kappa2,
        c=annulus.middle.c,
        c1=annulus.inner.c,
        d1=annulus.outer.c,
        a1=float(a1),
        b1=float(b1),
        nu=int(nu),
        sigma=cfg.sigma,
        T=float(annulus.T),
        period_direction=annulus.direction,
        rot1_inner=_range(inner),
        rot1_outer=_range(outer),
        rot2_c1=_range(r2[0]),
        rot2_d1=_range(r2[2]),
        margins={"rot1_inner": m_in, "rot1_outer": m_out, "rot2_c1": m_c1, "rot2_d1": m_d1},
        grids=grids,
        star_center=tuple(float(x) for x in annulus.center),
        tolerances=settings.to_dict(),
        halvings=dict(halvings),
    )


def verify_twist(
    model: DomainModel,
    cert: TwistCertificate,
    grids: Grids,
    *,
    annulus: Annulus | None = None,
    settings: IntegratorSettings | None = None,
) -> TwistCertificate:
    """Re-evaluate a certificate's radii and ``nu`` on other sampling grids."""
    settings = settings or IntegratorSettings(cert.tolerances["rel_tol"], cert.tolerances["abs_tol"])
    cfg = cert.normalized_config
    if annulus is None:
        annulus = build_annulus(model, cfg, cert.c, cert.c1, cert.d1, cert.star_center, settings=settings)
    _, r1, r2 = _evaluate(model, cfg, annulus, grids, cert.a1, cert.b1, settings)
    out = _assemble(cfg, VortexConfig(cert.kappa1, cert.kappa2), annulus, grids, settings, cert.a1, cert.b1,
                    cert.nu, r1[..., 0], r1[..., -1], r2, cert.halvings)
    return out
