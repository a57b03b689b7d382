"""Two-vortex Hamiltonian, its vector field and the linear change ``w = A z``.

States are flat arrays ``(..., 4)``: ``z = (z1x, z1y, z2x, z2y)`` for the
physical pair and ``w = (w1x, w1y, w2x, w2y)`` for the transformed state, where
``w1`` is a scaled copy of the difference ``z1 - z2`` and ``w2`` is the center
of vorticity when ``kappa1 + kappa2 = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import DomainModel
from .errors import InvalidConfig, NotNormalized, SingularConfiguration

COLLISION_RADIUS = 1e-30

# J = [[0, 1], [-1, 0]]
J = np.array([[0.0, 1.0], [-1.0, 0.0]])


_FLIP = np.array([1.0, -1.0])


def apply_J(v):
    """``J v`` for arrays of 2-vectors."""
    return v[..., ::-1] * _FLIP


def e(theta):
    theta = np.asarray(theta, float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


@dataclass(frozen=True)
class VortexConfig:
    """Vortex strengths and the derived transform.

    ``A`` maps ``z`` to ``w``; its blocks are ``s E``, ``-s E``, ``kappa1 I``
    and ``kappa2 I`` with ``s = sqrt(|kappa1 kappa2|)`` and
    ``E = diag(sigma, 1)``.
    """

    kappa1: float
    kappa2: float
    A: np.ndarray = field(init=False, repr=False, compare=False)
    A_inv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        k1, k2 = float(self.kappa1), float(self.kappa2)
        if not (np.isfinite(k1) and np.isfinite(k2)):
            raise InvalidConfig("vortex strengths must be finite")
        if k1 == 0.0 or k2 == 0.0 or k1 + k2 == 0.0:
            raise InvalidConfig(
                f"need kappa1, kappa2 and kappa1 + kappa2 nonzero (got kappa1={k1}, kappa2={k2})"
            )
        object.__setattr__(self, "kappa1", k1)
        object.__setattr__(self, "kappa2", k2)
        s = np.sqrt(abs(k1 * k2))
        E = np.diag([self.sigma, 1.0])
        I2 = np.eye(2)
        A = np.block([[s * E, -s * E], [k1 * I2, k2 * I2]])
        K = k1 + k2
        # z1 = (w2 + k2 E w1 / s) / K,  z2 = (w2 - k1 E w1 / s) / K
        A_inv = np.block([[k2 * E / (s * K), I2 / K], [-k1 * E / (s * K), I2 / K]])
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "A_inv", A_inv)

    @property
    def kappa_sum(self) -> float:
        return self.kappa1 + self.kappa2

    @property
    def sigma(self) -> int:
        return 1 if self.kappa1 * self.kappa2 > 0 else -1

    @property
    def scale(self) -> float:
        """``sqrt(|kappa1 kappa2|)``."""
        return float(np.sqrt(abs(self.kappa1 * self.kappa2)))

    @property
    def product(self) -> float:
        return self.kappa1 * self.kappa2

    @property
    def is_normalized(self) -> bool:
        return abs(self.kappa_sum - 1.0) <= 1e-12

    def normalized(self) -> "VortexConfig":
        """Strengths divided by ``kappa1 + kappa2``.

        A solution ``zt(t)`` of the normalized system gives the solution
        ``z(t) = zt(K t)`` of the original one, ``K = kappa1 + kappa2``.
        """
        K = self.kappa_sum
        return VortexConfig(self.kappa1 / K, self.kappa2 / K)

    def to_dict(self) -> dict:
        return {"kappa1": self.kappa1, "kappa2": self.kappa2}


def _split(x):
    x = np.asarray(x, float)
    return x[..., 0:2], x[..., 2:4]


def _join(a, b):
    return np.concatenate([a, b], axis=-1)


def _sq(v):
    return v[..., 0] * v[..., 0] + v[..., 1] * v[..., 1]


def _check_separation(d2):
    if np.min(d2) < COLLISION_RADIUS**2:
        raise SingularConfiguration("vortex separation below the collision guard radius")


# -- physical coordinates ----------------------------------------------------

def eval_H(model: DomainModel, config: VortexConfig, z):
    """Two-vortex Hamiltonian at pair states ``z``."""
    z1, z2 = _split(z)
    d = z1 - z2
    d2 = _sq(d)
    _check_separation(d2)
    k1, k2 = config.kappa1, config.kappa2
    return (
        -(k1 * k2 / (2.0 * np.pi)) * np.log(d2)
        - 2.0 * k1 * k2 * model.eval_g(z1, z2)
        - k1 * k1 * model.eval_h(z1)
        - k2 * k2 * model.eval_h(z2)
    )


def _regular_gradients(model, config, z1, z2):
    """Gradients of the smooth part of H with respect to z1 and z2."""
    k1, k2 = config.kappa1, config.kappa2
    g1 = -2.0 * k1 * k2 * model.grad1_g(z1, z2) - k1 * k1 * model.grad_h(z1)
    g2 = -2.0 * k1 * k2 * model.grad2_g(z1, z2) - k2 * k2 * model.grad_h(z2)
    return g1, g2


def grad_H(model: DomainModel, config: VortexConfig, z):
    z1, z2 = _split(z)
    d = z1 - z2
    d2 = _sq(d)
    _check_separation(d2)
    log_term = -(config.product / np.pi) * d / d2[..., None]
    g1, g2 = _regular_gradients(model, config, z1, z2)
    return _join(log_term + g1, -log_term + g2)


def z_field(model: DomainModel, config: VortexConfig, z):
    """``(dz1/dt, dz2/dt) = (J grad_1 H / kappa1, J grad_2 H / kappa2)``."""
    grad = grad_H(model, config, z)
    return _join(apply_J(grad[..., 0:2]) / config.kappa1, apply_J(grad[..., 2:4]) / config.kappa2)


def angular_impulse(config: VortexConfig, z, center=(0.0, 0.0)):
    """``kappa1 |z1 - c|^2 + kappa2 |z2 - c|^2``; conserved for rotation-symmetric models."""
    z1, z2 = _split(z)
    c = np.asarray(center, float)
    return config.kappa1 * np.sum((z1 - c) ** 2, axis=-1) + config.kappa2 * np.sum((z2 - c) ** 2, axis=-1)


def center_of_vorticity(config: VortexConfig, z):
    z1, z2 = _split(z)
    return (config.kappa1 * z1 + config.kappa2 * z2) / config.kappa_sum


# -- transformed coordinates -------------------------------------------------

def to_w(config: VortexConfig, z):
    return np.asarray(z, float) @ config.A.T


def from_w(config: VortexConfig, w):
    return np.asarray(w, float) @ config.A_inv.T


def eval_H1(model: DomainModel, config: VortexConfig, w):
    """Transformed Hamiltonian with the singular term ``-(k1 k2 / pi) log|w1|``."""
    w = np.asarray(w, float)
    r2 = _sq(w[..., 0:2])
    _check_separation(r2)
    z1, z2 = _split(from_w(config, w))
    k1, k2 = config.kappa1, config.kappa2
    return (
        -(k1 * k2 / (2.0 * np.pi)) * np.log(r2)
        - 2.0 * k1 * k2 * model.eval_g(z1, z2)
        - k1 * k1 * model.eval_h(z1)
        - k2 * k2 * model.eval_h(z2)
    )


def w_field(model: DomainModel, config: VortexConfig, w):
    """Vector field of the transformed system, ``dw/dt = A z_field(A^-1 w)``.

    For a normalized configuration this is the Hamiltonian field of ``H1``.
    The singular part is evaluated directly from ``w1``:
    ``-K (k1 k2 / pi) J w1 / |w1|^2``.
    """
    w = np.asarray(w, float)
    w1 = w[..., 0:2]
    r2 = _sq(w1)
    _check_separation(r2)
    z = from_w(config, w)
    z1, z2 = z[..., 0:2], z[..., 2:4]
    g1, g2 = _regular_gradients(model, config, z1, z2)
    zdot_reg = _join(apply_J(g1) / config.kappa1, apply_J(g2) / config.kappa2)
    wdot = zdot_reg @ config.A.T
    singular = -(config.kappa_sum * config.product / np.pi) * apply_J(w1) / r2[..., None]
    wdot[..., 0:2] += singular
    return wdot


def remainder_Q(model: DomainModel, config: VortexConfig, w):
    """``Q(w) = grad_{w2} H1(w) + grad h(w2)``; vanishes as ``w1 -> 0``."""
    if not config.is_normalized:
        raise NotNormalized(f"remainder_Q needs kappa1 + kappa2 = 1 (got {config.kappa_sum})")
    w = np.asarray(w, float)
    z = from_w(config, w)
    g1, g2 = _regular_gradients(model, config, z[..., 0:2], z[..., 2:4])
    # dz1/dw2 = dz2/dw2 = I when K = 1; the log terms cancel
    return g1 + g2 + model.grad_h(w[..., 2:4])


def polar_positions(config: VortexConfig, R1, R2, Th1, Th2):
    """Pair positions for ``w1 = R1 e(Th1)``, ``w2 = R2 e(Th2)`` (normalized config)."""
    R1 = np.asarray(R1, float)
    w1 = R1[..., None] * e(Th1)
    w2 = np.asarray(R2, float)[..., None] * e(Th2)
    z = from_w(config, _join(*np.broadcast_arrays(w1, w2)))
    return z[..., 0:2], z[..., 2:4]


def coupling_k(model: DomainModel, config: VortexConfig, R1, R2, Th1, Th2):
    """Boundary coupling vector ``k(R, Theta)`` of the fast-rotation equation."""
    z1, z2 = polar_positions(config, R1, R2, Th1, Th2)
    k1, k2 = config.kappa1, config.kappa2
    s = config.scale
    return (
        2.0 * s * (k2 * model.grad1_g(z1, z2) - k1 * model.grad2_g(z1, z2))
        + k1 * s * model.grad_h(z1)
        - k2 * s * model.grad_h(z2)
    )


def angular_rate_f(model: DomainModel, config: VortexConfig, R1, R2, Th1, Th2):
    """Angular velocity of ``w1`` at the polar state ``(R1, R2, Th1, Th2)``.

    ``f = k1 k2 / (pi R1^2) + sigma <E k, e(Th1)> / R1`` with
    ``E = diag(sigma, 1)``; for ``sigma = +1`` the correction is
    ``<k, e(Th1)> / R1``.
    """
    if not config.is_normalized:
        raise NotNormalized(f"angular_rate_f needs kappa1 + kappa2 = 1 (got {config.kappa_sum})")
    R1 = np.asarray(R1, float)
    if np.any(R1 <= 0.0):
        raise InvalidConfig("R1 must be positive")
    k = coupling_k(model, config, R1, R2, Th1, Th2)
    sig = config.sigma
    Ek = np.stack([sig * k[..., 0], k[..., 1]], axis=-1)
    correction = sig * np.sum(Ek * e(Th1), axis=-1) / R1
    return config.product / (np.pi * R1 * R1) + correction


# -- systems for the integrator ----------------------------------------------

@dataclass(frozen=True)
class VectorField:
    """Autonomous vector field with optional diagnostics used by the integrator.

    ``rhs(y)`` evaluates the field on ``(..., n)`` arrays. ``admissible(y)``
    returns a boolean mask (collision guard, domain exit); ``max_step(y)``
    returns a per-state step cap; ``energy(y)`` is a first integral.
    """

    rhs: object
    dim: int
    energy: object = None
    admissible: object = None
    max_step: object = None
    invariant: object = None

    def __call__(self, y):
        return self.rhs(y)


def _pair_admissible(model, z):
    z1, z2 = z[..., 0:2], z[..., 2:4]
    d2 = _sq(z1 - z2)
    return (d2 > COLLISION_RADIUS**2) & model.inside(z1) & model.inside(z2)


def _fast_step_cap(config):
    # each step resolves at most an eighth of a fast turn
    rate_coef = abs(config.kappa_sum * config.product) / np.pi

    def cap(w):
        r2 = _sq(w[..., 0:2])
        return (np.pi / 4.0) * r2 / rate_coef

    return cap


def w_system(model: DomainModel, config: VortexConfig) -> VectorField:
    symmetric = model.rotation_symmetric
    return VectorField(
        rhs=lambda w: w_field(model, config, w),
        dim=4,
        energy=lambda w: eval_H1(model, config, w),
        admissible=lambda w: _pair_admissible(model, from_w(config, w)),
        max_step=_fast_step_cap(config),
        invariant=(lambda w: angular_impulse(config, from_w(config, w), model.symmetry_center))
        if symmetric
        else None,
    )


def z_system(model: DomainModel, config: VortexConfig) -> VectorField:
    cap = _fast_step_cap(config)
    return VectorField(
        rhs=lambda z: z_field(model, config, z),
        dim=4,
        energy=lambda z: eval_H(model, config, z),
        admissible=lambda z: _pair_admissible(model, z),
        max_step=lambda z: cap(to_w(config, z)),
        invariant=(lambda z: angular_impulse(config, z, model.symmetry_center))
        if model.rotation_symmetric
        else None,
    )


def center_system(model: DomainModel, kappa: float) -> VectorField:
    """Single vortex of strength ``kappa``: ``dz/dt = -kappa J grad h(z)``."""
    return VectorField(
        rhs=lambda z: -kappa * apply_J(model.grad_h(z)),
        dim=2,
        energy=model.eval_h,
        admissible=model.inside,
    )
