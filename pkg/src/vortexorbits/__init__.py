"""Periodic solutions of two point vortices in planar domains."""

from .domain import DomainModel, harmonic_center, make_free_plane, make_model, make_radial_power, make_unit_disk, make_user_g
from .dynamics import VortexConfig, eval_H, from_w, remainder_Q, to_w, w_field, z_field
from .flow import IntegratorSettings, Trajectory, flow_jacobian, flow_map, integrate, lift_angles, section_crossings
from .levelset import LevelOrbit, certify_assumption, hessian_period_limit, period_function, trace_level
from .orbits import PeriodicOrbit, action, refine_orbit, seed_orbit, sweep_family, verify_theorem
from .twist import Grids, TwistCertificate, certify_twist, rot1, rot2

__all__ = [
    "DomainModel", "harmonic_center", "make_free_plane", "make_model", "make_radial_power", "make_unit_disk",
    "make_user_g", "VortexConfig", "eval_H", "from_w", "remainder_Q", "to_w", "w_field", "z_field",
    "IntegratorSettings", "Trajectory", "flow_jacobian", "flow_map", "integrate", "lift_angles",
    "section_crossings", "LevelOrbit", "certify_assumption", "hessian_period_limit", "period_function",
    "trace_level", "PeriodicOrbit", "action", "refine_orbit", "seed_orbit", "sweep_family", "verify_theorem",
    "Grids", "TwistCertificate", "certify_twist", "rot1", "rot2",
]
