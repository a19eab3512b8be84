"""Rays, paraxial spreading and Gaussian-beam amplitudes in depth-stratified ocean sound-speed profiles.

Depth points down. A positive launch angle heads toward smaller depth.
Angles are in radians.
"""

from ._core import (
    GbeamError,
    Horizon,
    Profile,
    Ray,
    caustics,
    curvature_fd,
    cz_distance,
    fd_spreading,
    identity_suite,
    propagate_coupled,
    propagate_extrinsic,
    propagate_jacobi,
    range_integral,
    run_cli,
    spreading_snell,
    trace,
)

__all__ = [
    "GbeamError",
    "Horizon",
    "Profile",
    "Ray",
    "caustics",
    "curvature_fd",
    "cz_distance",
    "fd_spreading",
    "identity_suite",
    "propagate_coupled",
    "propagate_extrinsic",
    "propagate_jacobi",
    "range_integral",
    "run_cli",
    "spreading_snell",
    "trace",
]
