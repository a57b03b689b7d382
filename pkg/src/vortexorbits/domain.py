"""Domain models: regular part ``g`` of a Green's function and its Robin function ``h``.

All callables are vectorised: points are arrays whose last axis has length 2 and
any leading axes broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidConfig, NoConvergence

Array = np.ndarray

FD_STEP = 1e-5


def _dot(a, b):
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]


def _sq(z):
    return z[..., 0] * z[..., 0] + z[..., 1] * z[..., 1]


@dataclass(frozen=True)
class DomainModel:
    """Geometric data of a planar domain.

    Attributes
    ----------
    kind : {"disk", "radial_power", "user"}
    g, grad1, h, grad_h_fn, hess_h_fn, inside_fn : callables
        Vectorised implementations. ``grad1(z, w)`` is the gradient of ``g``
        in its first argument; the second-argument gradient follows from
        symmetry.
    p : float or None
        Exponent of the radial power model.
    symmetry_center : ndarray or None
        Center of a continuous rotational symmetry of ``g`` (disk and radial
        models). Periodic orbits of symmetric models come in rotation
        families, which the shooting solver has to factor out.
    """

    kind: str
    g: Callable
    grad1: Callable
    h: Callable
    grad_h_fn: Callable
    hess_h_fn: Callable
    inside_fn: Callable
    p: float | None = None
    symmetry_center: Array | None = None

    def eval_g(self, z, w):
        return self.g(np.asarray(z, float), np.asarray(w, float))

    def eval_h(self, z):
        return self.h(np.asarray(z, float))

    def grad1_g(self, z, w):
        return self.grad1(np.asarray(z, float), np.asarray(w, float))

    def grad2_g(self, z, w):
        # g(z, w) = g(w, z)
        return self.grad1(np.asarray(w, float), np.asarray(z, float))

    def grad_h(self, z):
        return self.grad_h_fn(np.asarray(z, float))

    def hess_h(self, z):
        return self.hess_h_fn(np.asarray(z, float))

    def inside(self, z):
        return self.inside_fn(np.asarray(z, float))

    @property
    def rotation_symmetric(self) -> bool:
        return self.symmetry_center is not None

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.p is not None:
            out["p"] = self.p
        return out


# -- unit disk -----------------------------------------------------------------

# outside the disk these return NaN, which the integrator treats as a rejected stage
@np.errstate(invalid="ignore", divide="ignore")
def _disk_g(z, w):
    den = 1.0 - 2.0 * _dot(z, w) + _sq(z) * _sq(w)
    return -np.log(den) / (4.0 * np.pi)


def _disk_grad1(z, w):
    w2 = _sq(w)
    den = 1.0 - 2.0 * _dot(z, w) + _sq(z) * w2
    return (w - w2[..., None] * z) / (2.0 * np.pi * den[..., None])


@np.errstate(invalid="ignore", divide="ignore")
def _disk_h(z):
    return -np.log1p(-_sq(z)) / (2.0 * np.pi)


def _disk_grad_h(z):
    return z / (np.pi * (1.0 - _sq(z)))[..., None]


def _disk_hess_h(z):
    q = 1.0 - _sq(z)
    eye = np.eye(2)
    outer = z[..., :, None] * z[..., None, :]
    return (eye / q[..., None, None] + 2.0 * outer / (q * q)[..., None, None]) / np.pi


def make_unit_disk() -> DomainModel:
    """Unit disk with ``h(z) = -log(1 - |z|^2) / (2 pi)``."""
    return DomainModel(
        kind="disk",
        g=_disk_g,
        grad1=_disk_grad1,
        h=_disk_h,
        grad_h_fn=_disk_grad_h,
        hess_h_fn=_disk_hess_h,
        inside_fn=lambda z: _sq(z) < 1.0,
        symmetry_center=np.zeros(2),
    )


# -- radial power model -------------------------------------------------------

def make_radial_power(p: float) -> DomainModel:
    """Synthetic model ``g(z, w) = (|z|^2p + |w|^2p) / 2``, so ``h(z) = |z|^2p``.

    Level lines are circles about the origin and the period of the level
    ``c`` is ``pi / (|kappa| p c^((p-1)/p))``.
    """
    p = float(p)
    if not p > 1.0:
        raise InvalidConfig(f"radial power model needs p > 1, got p={p}")

    def g(z, w):
        return 0.5 * (_sq(z) ** p + _sq(w) ** p)

    def grad1(z, w):
        z = np.broadcast_to(z, np.broadcast_shapes(np.shape(z), np.shape(w)))
        return p * (_sq(z) ** (p - 1.0))[..., None] * z

    def h(z):
        return _sq(z) ** p

    def grad_h(z):
        return 2.0 * p * (_sq(z) ** (p - 1.0))[..., None] * z

    def hess_h(z):
        r2 = _sq(z)
        safe = np.where(r2 > 0.0, r2, 1.0)
        unit_outer = z[..., :, None] * z[..., None, :] / safe[..., None, None]
        unit_outer = np.where((r2 > 0.0)[..., None, None], unit_outer, 0.0)
        radial = (r2 ** (p - 1.0))[..., None, None]
        return 2.0 * p * radial * (np.eye(2) + (2.0 * p - 2.0) * unit_outer)

    return DomainModel(
        kind="radial_power",
        g=g,
        grad1=grad1,
        h=h,
        grad_h_fn=grad_h,
        hess_h_fn=hess_h,
        inside_fn=lambda z: np.ones(np.shape(z)[:-1], dtype=bool),
        p=p,
        symmetry_center=np.zeros(2),
    )


# -- user supplied g ----------------------------------------------------------

def _fd_step(z):
    return FD_STEP * (1.0 + np.sqrt(_sq(z)))


def _fd_gradient(f, z):
    """Central-difference gradient of a vectorised scalar function of a point."""
    step = _fd_step(z)
    out = np.empty(np.shape(z))
    for i in range(2):
        e = np.zeros(2)
        e[i] = 1.0
        dz = step[..., None] * e
        out[..., i] = (f(z + dz) - f(z - dz)) / (2.0 * step)
    return out


def _fd_jacobian(F, z):
    step = _fd_step(z)
    out = np.empty(np.shape(z) + (2,))
    for i in range(2):
        e = np.zeros(2)
        e[i] = 1.0
        dz = step[..., None] * e
        out[..., :, i] = (F(z + dz) - F(z - dz)) / (2.0 * step[..., None])
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def make_user_g(
    g: Callable,
    grad1_g: Callable | None = None,
    *,
    grad_h: Callable | None = None,
    hess_h: Callable | None = None,
    inside: Callable | None = None,
    symmetry_center=None,
) -> DomainModel:
    """Model from a user supplied symmetric ``g``.

    ``g`` must accept two point arrays of shape ``(..., 2)``. Missing
    derivatives are replaced by central finite differences with step
    ``1e-5 * (1 + |z|)``. ``inside`` defaults to the whole plane.
    """

    def g_(z, w):
        z, w = np.broadcast_arrays(np.asarray(z, float), np.asarray(w, float))
        return np.broadcast_to(np.asarray(g(z, w), float), z.shape[:-1])

    def h(z):
        return g_(z, z)

    if grad1_g is None:
        def grad1(z, w):
            z, w = np.broadcast_arrays(z, w)
            return _fd_gradient(lambda zz: g_(zz, w), z)
    else:
        def grad1(z, w):
            z, w = np.broadcast_arrays(z, w)
            return np.broadcast_to(np.asarray(grad1_g(z, w), float), z.shape)

    if grad_h is None:
        def grad_h_(z):
            return grad1(z, z) + grad1(z, z)
    else:
        def grad_h_(z):
            return np.broadcast_to(np.asarray(grad_h(z), float), np.shape(z))

    if hess_h is None:
        def hess_h_(z):
            return _fd_jacobian(grad_h_, np.asarray(z, float))
    else:
        hess_h_ = hess_h

    if inside is None:
        def inside(z):
            return np.ones(np.shape(z)[:-1], dtype=bool)

    center = None if symmetry_center is None else np.asarray(symmetry_center, float)
    return DomainModel(
        kind="user",
        g=g_,
        grad1=grad1,
        h=h,
        grad_h_fn=grad_h_,
        hess_h_fn=hess_h_,
        inside_fn=inside,
        symmetry_center=center,
    )


def make_free_plane() -> DomainModel:
    """``g == 0``: the whole plane, no boundary influence."""
    zero = lambda z, w: np.zeros(np.broadcast_shapes(np.shape(z), np.shape(w))[:-1])
    return make_user_g(
        zero,
        lambda z, w: np.zeros(np.broadcast_shapes(np.shape(z), np.shape(w))),
        grad_h=lambda z: np.zeros(np.shape(z)),
        hess_h=lambda z: np.zeros(np.shape(z) + (2,)),
        symmetry_center=np.zeros(2),
    )


def make_model(kind: str, p: float | None = None) -> DomainModel:
    """Build a model from configuration keys ``domain.kind`` / ``domain.p``."""
    if kind == "disk":
        return make_unit_disk()
    if kind == "radial_power":
        if p is None:
            raise InvalidConfig("domain.kind=radial_power needs domain.p")
        return make_radial_power(p)
    if kind == "user":
        raise InvalidConfig("user models are built in code with make_user_g()")
    raise InvalidConfig(f"unknown domain kind {kind!r}")


def harmonic_center(model: DomainModel, seed, tol: float = 1e-10, max_iter: int = 200) -> Array:
    """Locate a local minimum of ``h`` by damped Newton iteration.

    Falls back to a gradient step wherever the Hessian is not positive
    definite. Returns the minimiser ``z0``; ``model.eval_h(z0)`` is the
    minimum value ``m``.
    """
    z = np.array(seed, dtype=float)
    if not model.inside(z):
        raise InvalidConfig("seed for harmonic_center lies outside the domain")
    hz = float(model.eval_h(z))
    for _ in range(max_iter):
        grad = model.grad_h(z)
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= tol:
            return z
        hess = model.hess_h(z)
        try:
            step = -np.linalg.solve(hess, grad)
            if float(step @ grad) >= 0.0:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = -grad / max(1.0, gnorm)
        lam = 1.0
        for _ in range(40):
            trial = z + lam * step
            if model.inside(trial):
                ht = float(model.eval_h(trial))
                if ht <= hz + 1e-4 * lam * float(step @ grad):
                    break
            lam *= 0.5
        else:
            # line search stalled: accept the full Newton step if it keeps us
            # inside; near a flat minimum h differences drop below rounding
            trial = z + step
            if not model.inside(trial):
                break
            ht = float(model.eval_h(trial))
        z, hz = trial, ht
    raise NoConvergence(
        f"|grad h| = {np.linalg.norm(model.grad_h(z)):.3g} > tol={tol:g} after {max_iter} iterations"
    )
