"""Two-state avoided-crossing model and its adiabatic representation.

Everything is in Hartree atomic units (hbar = 1).  The diabatic surfaces
are an antisymmetric pair saturating at +/- a,

    V1(q) = sgn(q) * a * (1 - exp(-b*|q|)),      V2(q) = -V1(q),

bridged by a strictly positive Gaussian coupling

    V12(q) = c * exp(-d_width * q**2).

Because V12 never vanishes, the adiabatic gap 2*sqrt(((V1-V2)/2)**2 + V12**2)
is bounded away from zero and the mixing angle

    phi(q) = atan2(2*V12, V1 - V2)

stays on a single continuous branch in (0, pi), decreasing monotonically from
pi (far left) to 0 (far right).  The nonadiabatic coupling is d = -phi'/2.

All evaluation functions broadcast: ``q`` may be a scalar or an ndarray, and
the returned bundles hold fields of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

HBAR = 1.0

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class ModelPotential:
    """Parameters of the avoided-crossing model (atomic units).

    a : asymptotic half-splitting of the diabatic surfaces
    b : saturation rate of the diabatic surfaces
    c : coupling strength at the crossing point
    d_width : Gaussian decay rate of the coupling (inverse length squared)
    mass : nuclear mass
    """

    a: float = 0.01
    b: float = 1.6
    c: float = 0.002
    d_width: float = 1.0
    mass: float = 2000.0

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d_width", "mass"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0.0):
                raise ValueError(
                    f"model parameter {name!r} must be positive and finite, got {value!r}"
                )

    def diabatic(self, q: ArrayLike) -> "DiabaticPoint":
        return eval_diabatic(self, q)

    def adiabatic(self, q: ArrayLike) -> "AdiabaticPoint":
        return eval_adiabatic(self, q)


@dataclass(frozen=True)
class DiabaticPoint:
    """Diabatic surfaces, coupling, and their q-gradients at one (or many) q."""

    v1: ArrayLike
    v2: ArrayLike
    v12: ArrayLike
    dv1: ArrayLike
    dv2: ArrayLike
    dv12: ArrayLike


@dataclass(frozen=True)
class AdiabaticPoint:
    """Adiabatic surfaces, gap frequency, mixing angle, and coupling at q.

    omega is the gap frequency (vplus - vminus) / hbar; d is the nonadiabatic
    coupling -phi'/2.
    """

    vplus: ArrayLike
    vminus: ArrayLike
    omega: ArrayLike
    phi: ArrayLike
    d: ArrayLike
    dvplus: ArrayLike
    dvminus: ArrayLike


@dataclass(frozen=True)
class DensityMatrix2:
    """A 2x2 Hermitian density matrix split into real components.

    In the diabatic representation the fields are (rho11, rho22, Re rho12,
    Im rho12); in the adiabatic representation they read (rho++, rho--,
    alpha, beta) with alpha + i*beta the upper/lower coherence.
    """

    rho11: ArrayLike
    rho22: ArrayLike
    re12: ArrayLike
    im12: ArrayLike


def eval_diabatic(model: ModelPotential, q: ArrayLike) -> DiabaticPoint:
    """Evaluate the diabatic surfaces, coupling, and gradients at q."""
    q = np.asarray(q, dtype=float)
    if not np.all(np.isfinite(q)):
        raise ValueError("position must be finite")
    decay = np.exp(-model.b * np.abs(q))
    v1 = np.sign(q) * model.a * (1.0 - decay)
    v12 = model.c * np.exp(-model.d_width * q * q)
    # dv1 is continuous at q = 0: both one-sided limits equal a*b.
    dv1 = model.a * model.b * decay
    dv12 = -2.0 * model.d_width * q * v12
    return DiabaticPoint(v1=v1, v2=-v1, v12=v12, dv1=dv1, dv2=-dv1, dv12=dv12)


def eval_adiabatic(model: ModelPotential, q: ArrayLike) -> AdiabaticPoint:
    """Evaluate the adiabatic surfaces, gap, mixing angle, and coupling at q.

    The upper/lower surfaces are (V1+V2)/2 +/- sqrt(((V1-V2)/2)**2 + V12**2);
    the square root never vanishes because V12 > 0, so the branch is smooth
    everywhere and phi = atan2(2*V12, V1-V2) lies in the open interval (0, pi).
    """
    dia = eval_diabatic(model, q)
    half_sum = 0.5 * (dia.v1 + dia.v2)
    half_diff = 0.5 * (dia.v1 - dia.v2)
    root = np.sqrt(half_diff * half_diff + dia.v12 * dia.v12)
    vplus = half_sum + root
    vminus = half_sum - root
    omega = 2.0 * root / HBAR

    x = dia.v1 - dia.v2
    y = 2.0 * dia.v12
    phi = np.arctan2(y, x)
    # d = -phi'/2 with phi' = (x*y' - y*x') / (x**2 + y**2).
    dx = dia.dv1 - dia.dv2
    dy = 2.0 * dia.dv12
    d = -0.5 * (x * dy - y * dx) / (x * x + y * y)

    half_dsum = 0.5 * (dia.dv1 + dia.dv2)
    droot = (half_diff * 0.5 * dx + dia.v12 * dia.dv12) / root
    return AdiabaticPoint(
        vplus=vplus,
        vminus=vminus,
        omega=omega,
        phi=phi,
        d=d,
        dvplus=half_dsum + droot,
        dvminus=half_dsum - droot,
    )


def _check_phi(phi: ArrayLike) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if not np.all((phi >= 0.0) & (phi <= np.pi)):
        raise ValueError("mixing angle must lie in [0, pi]")
    return phi


def density_to_adiabatic(rho_d: DensityMatrix2, phi: ArrayLike) -> DensityMatrix2:
    """Rotate a diabatic density matrix into the adiabatic representation.

    Returns a DensityMatrix2 whose fields read (rho++, rho--, alpha, beta).
    The transform is a rotation by phi in the (population-difference,
    real-coherence) plane; Im rho12 is representation-invariant.
    """
    phi = _check_phi(phi)
    half_sum = 0.5 * (rho_d.rho11 + rho_d.rho22)
    half_diff = 0.5 * (rho_d.rho11 - rho_d.rho22)
    cphi = np.cos(phi)
    sphi = np.sin(phi)
    return DensityMatrix2(
        rho11=half_sum + half_diff * cphi + rho_d.re12 * sphi,
        rho22=half_sum - half_diff * cphi - rho_d.re12 * sphi,
        re12=-half_diff * sphi + rho_d.re12 * cphi,
        im12=rho_d.im12,
    )


def density_to_diabatic(rho_a: DensityMatrix2, phi: ArrayLike) -> DensityMatrix2:
    """Inverse of :func:`density_to_adiabatic` (rotation by -phi)."""
    phi = _check_phi(phi)
    half_sum = 0.5 * (rho_a.rho11 + rho_a.rho22)
    half_diff = 0.5 * (rho_a.rho11 - rho_a.rho22)
    cphi = np.cos(phi)
    sphi = np.sin(phi)
    return DensityMatrix2(
        rho11=half_sum + half_diff * cphi - rho_a.re12 * sphi,
        rho22=half_sum - half_diff * cphi + rho_a.re12 * sphi,
        re12=half_diff * sphi + rho_a.re12 * cphi,
        im12=rho_a.im12,
    )
