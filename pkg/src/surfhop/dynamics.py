"""Single-trajectory propagation for the three trajectory engines.

Each trajectory carries a classical phase-space point (q, pk), a surface
label sigma (0 = lower, 1 = upper), and a proxy electronic density matrix in
the adiabatic representation: continuous upper population a_pp and coherence
alpha + i*beta.  The shared proxy equations of motion are

    da_pp/dt = -2 (d v) alpha
    dalpha/dt = omega beta + (d v) (2 a_pp - 1)
    dbeta/dt  = -omega alpha

with v = pk / m the kinematic velocity.  The engines differ only in the
nuclear force and in what a hop does:

* Born-Oppenheimer: classical force on the occupied surface, no hops, the
  coherence merely rotates at the local gap frequency.
* FSSH: classical force; a hop rescales the momentum so the kinematic energy
  pk**2/2m + V(q, sigma) is conserved exactly, and up-hops without enough
  kinetic energy are frustrated (state untouched).
* QTSH: the nuclear momentum is kinematic and feels the quantum force
  F = 2 hbar omega d alpha in addition to the classical force; a hop flips
  sigma and nothing else.  Work done by the quantum force is accumulated
  alongside the state with the same RK4 stages, so the per-trajectory ledger
  E(t) - E(0) = work(t) + (hop potential-energy changes) closes to
  integrator accuracy.

All functions broadcast over array-valued state fields, so a single scalar
trajectory and a vectorized batch follow literally the same code path.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

import numpy as np

from .errors import PropagationError, SingularJumpError
from .model import HBAR, AdiabaticPoint, ModelPotential

ArrayLike = Union[float, np.ndarray]

# Occupied-population floor below which hop probabilities are meaningless.
POPULATION_EPS = 1e-12


class EngineKind(Enum):
    BORN_OPPENHEIMER = "bo"
    FSSH = "fssh"
    QTSH = "qtsh"


class HopKind(Enum):
    NO_HOP = 0
    HOP_UP = 1
    HOP_DOWN = 2
    FRUSTRATED = 3


@dataclass(frozen=True)
class HopOutcome:
    kind: HopKind
    delta_pk: float = 0.0


@dataclass(frozen=True)
class TrajectoryState:
    """State bundle for one trajectory (or an array-valued batch).

    pk is the kinematic momentum; sigma is the occupied surface stored as a
    float 0.0/1.0 so the force selection and hop bookkeeping stay branchless;
    a_pp is the continuous upper-surface proxy population; work_acc is the
    accumulated quantum-force work (QTSH only, zero otherwise).
    """

    q: ArrayLike
    pk: ArrayLike
    sigma: ArrayLike
    alpha: ArrayLike
    beta: ArrayLike
    a_pp: ArrayLike
    work_acc: ArrayLike = 0.0
    t: float = 0.0


@dataclass(frozen=True)
class Derivatives:
    dq: ArrayLike
    dpk: ArrayLike
    dalpha: ArrayLike
    dbeta: ArrayLike
    da_pp: ArrayLike
    dwork: ArrayLike


def derivatives(
    state: TrajectoryState,
    model: ModelPotential,
    engine: EngineKind,
    ad: Optional[AdiabaticPoint] = None,
) -> Derivatives:
    """Time derivatives of the state under the given engine.

    ``ad`` may pass in a precomputed adiabatic evaluation at ``state.q`` to
    avoid recomputing it (the surfaces depend on q only, never on sigma).
    """
    if ad is None:
        ad = model.adiabatic(state.q)
    v = state.pk / model.mass
    grad_occ = state.sigma * ad.dvplus + (1.0 - state.sigma) * ad.dvminus
    classical = -grad_occ
    rot_alpha = ad.omega * state.beta
    rot_beta = -ad.omega * state.alpha
    zero = 0.0 * v

    if engine is EngineKind.BORN_OPPENHEIMER:
        return Derivatives(v, classical, rot_alpha, rot_beta, zero, zero)

    dv = ad.d * v
    dalpha = rot_alpha + dv * (2.0 * state.a_pp - 1.0)
    da_pp = -2.0 * dv * state.alpha
    if engine is EngineKind.QTSH:
        quantum_force = 2.0 * HBAR * ad.omega * ad.d * state.alpha
        return Derivatives(
            v, classical + quantum_force, dalpha, rot_beta, da_pp, quantum_force * v
        )
    return Derivatives(v, classical, dalpha, rot_beta, da_pp, zero)


def _shifted(state: TrajectoryState, scale: float, k: Derivatives) -> TrajectoryState:
    return replace(
        state,
        q=state.q + scale * k.dq,
        pk=state.pk + scale * k.dpk,
        alpha=state.alpha + scale * k.dalpha,
        beta=state.beta + scale * k.dbeta,
        a_pp=state.a_pp + scale * k.da_pp,
    )


def rk4_step(
    state: TrajectoryState,
    dt: float,
    model: ModelPotential,
    engine: EngineKind,
    k1: Optional[Derivatives] = None,
) -> TrajectoryState:
    """Advance the continuous part of the state by one classical RK4 step.

    sigma is untouched (hops are a separate, post-step event).  The
    accumulated work integrates dwork = F_quantum * v through the same four
    stages, keeping the work ledger at the integrator's order.  A
    precomputed first-stage derivative bundle may be passed as ``k1``.
    """
    if dt < 0.0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    if dt == 0.0:
        return state
    if k1 is None:
        k1 = derivatives(state, model, engine)
    k2 = derivatives(_shifted(state, 0.5 * dt, k1), model, engine)
    k3 = derivatives(_shifted(state, 0.5 * dt, k2), model, engine)
    k4 = derivatives(_shifted(state, dt, k3), model, engine)
    w = dt / 6.0
    new = TrajectoryState(
        q=state.q + w * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq),
        pk=state.pk + w * (k1.dpk + 2.0 * k2.dpk + 2.0 * k3.dpk + k4.dpk),
        sigma=state.sigma,
        alpha=state.alpha + w * (k1.dalpha + 2.0 * k2.dalpha + 2.0 * k3.dalpha + k4.dalpha),
        beta=state.beta + w * (k1.dbeta + 2.0 * k2.dbeta + 2.0 * k3.dbeta + k4.dbeta),
        a_pp=state.a_pp + w * (k1.da_pp + 2.0 * k2.da_pp + 2.0 * k3.da_pp + k4.da_pp),
        work_acc=state.work_acc + w * (k1.dwork + 2.0 * k2.dwork + 2.0 * k3.dwork + k4.dwork),
        t=state.t + dt,
    )
    if not (np.all(np.isfinite(new.q)) and np.all(np.isfinite(new.pk))):
        bad = np.argmax(~(np.isfinite(np.asarray(new.q)) & np.isfinite(np.asarray(new.pk))))
        raise PropagationError("state became non-finite", index=int(bad), t=float(new.t))
    return new


def _hop_probability_arrays(
    state: TrajectoryState,
    model: ModelPotential,
    dt: float,
    ad: Optional[AdiabaticPoint] = None,
):
    """Fewest-switches probability plus degeneracy mask and surface bundle."""
    if ad is None:
        ad = model.adiabatic(state.q)
    da_pp = -2.0 * ad.d * (state.pk / model.mass) * state.alpha
    on_upper = state.sigma == 1.0
    a_occ = np.where(on_upper, state.a_pp, 1.0 - state.a_pp)
    da_occ = np.where(on_upper, da_pp, -da_pp)
    degenerate = a_occ <= POPULATION_EPS
    g = -da_occ * dt / np.where(degenerate, 1.0, a_occ)
    g = np.clip(g, 0.0, 1.0)
    g = np.where(degenerate, 0.0, g)
    return g, degenerate, ad


def hop_probability(
    state: TrajectoryState, model: ModelPotential, dt: float
) -> ArrayLike:
    """Probability of leaving the occupied surface during one step of dt.

    g = max(0, -(da_occ/dt) * dt / a_occ), clamped to [0, 1].  An occupied
    population at or below 1e-12 signals proxy/surface inconsistency; the
    probability is then 0 and a warning is emitted.
    """
    g, degenerate, _ = _hop_probability_arrays(state, model, dt)
    if np.any(degenerate):
        warnings.warn(
            "occupied-surface proxy population <= 1e-12; hop probability gated to 0",
            RuntimeWarning,
            stacklevel=2,
        )
    if np.ndim(g) == 0:
        return float(g)
    return g


def apply_hops(
    state: TrajectoryState,
    model: ModelPotential,
    dt: float,
    u: ArrayLike,
    engine: EngineKind,
    ad: Optional[AdiabaticPoint] = None,
):
    """Stochastic hop test for one step, vectorized over the state.

    Returns ``(new_state, codes, delta_pk, ad, degenerate)`` where ``codes``
    holds HopKind values as integers, ``delta_pk`` the FSSH momentum
    adjustments (zero elsewhere), ``ad`` the adiabatic evaluation at state.q
    for reuse by the caller, and ``degenerate`` flags trajectories whose
    occupied proxy population was at the 1e-12 floor.  A drawn uniform
    ``u >= g`` leaves the trajectory untouched; at most one hop can occur
    per step.

    QTSH hops flip sigma and nothing else.  FSSH down-hops rescale the
    momentum to absorb the released gap energy hbar*omega, keeping the sign
    of pk; up-hops with pk**2/2m < hbar*omega are frustrated and leave the
    state exactly unchanged.
    """
    if engine is EngineKind.BORN_OPPENHEIMER:
        codes = np.zeros(np.shape(state.q), dtype=np.int8)
        if ad is None:
            ad = model.adiabatic(state.q)
        return state, codes, 0.0 * np.asarray(state.pk), ad, False

    g, degenerate, ad = _hop_probability_arrays(state, model, dt, ad=ad)
    want = np.asarray(u) < g
    on_upper = state.sigma == 1.0

    if engine is EngineKind.QTSH:
        hop = want
        sigma_new = np.where(hop, 1.0 - state.sigma, state.sigma)
        codes = np.where(
            hop,
            np.where(on_upper, HopKind.HOP_DOWN.value, HopKind.HOP_UP.value),
            HopKind.NO_HOP.value,
        ).astype(np.int8)
        new = replace(state, sigma=sigma_new)
        return new, codes, 0.0 * np.asarray(state.pk), ad, degenerate

    # FSSH: resolve the momentum jump from kinetic-energy bookkeeping.
    gap = HBAR * ad.omega
    two_m = 2.0 * model.mass
    pk2 = state.pk * state.pk
    down = want & on_upper
    up_try = want & ~on_upper
    frustrated = up_try & (pk2 / two_m < gap)
    up = up_try & ~frustrated
    pk2_new = pk2 + np.where(down, two_m * gap, 0.0) - np.where(up, two_m * gap, 0.0)
    sign = np.where(np.asarray(state.pk) >= 0.0, 1.0, -1.0)
    pk_new = np.where(down | up, sign * np.sqrt(np.abs(pk2_new)), state.pk)
    delta_pk = pk_new - state.pk
    sigma_new = np.where(down | up, 1.0 - state.sigma, state.sigma)
    codes = np.where(
        down,
        HopKind.HOP_DOWN.value,
        np.where(
            up,
            HopKind.HOP_UP.value,
            np.where(frustrated, HopKind.FRUSTRATED.value, HopKind.NO_HOP.value),
        ),
    ).astype(np.int8)
    new = replace(state, pk=pk_new, sigma=sigma_new)
    return new, codes, delta_pk, ad, degenerate


def attempt_hop(
    state: TrajectoryState,
    model: ModelPotential,
    dt: float,
    u: float,
    engine: EngineKind,
):
    """Scalar wrapper around :func:`apply_hops` for a single trajectory."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"uniform draw must lie in [0, 1], got {u}")
    new, codes, delta_pk, _, _ = apply_hops(state, model, dt, u, engine)
    return new, HopOutcome(HopKind(int(np.asarray(codes))), float(np.asarray(delta_pk)))


def impulsive_jump(
    model: ModelPotential, q_star: float, pk: float, direction: str = "down"
) -> float:
    """Leading-order momentum jump of a localized transition at q_star.

    delta_pk = +/- hbar*omega(q*) * d(q*) * m / (d(q*) * pk), positive for a
    downward transition (the released gap energy accelerates the nucleus),
    negative for an upward one.
    """
    if direction not in ("down", "up"):
        raise ValueError(f"direction must be 'down' or 'up', got {direction!r}")
    ad = model.adiabatic(q_star)
    denom = float(ad.d) * pk
    if denom == 0.0:
        raise SingularJumpError(
            f"impulsive jump singular at q*={q_star}: d(q*)*pk = 0"
        )
    sign = 1.0 if direction == "down" else -1.0
    return sign * HBAR * float(ad.omega) * float(ad.d) * model.mass / denom


def impulsive_jump_quadrature(
    model: ModelPotential,
    q_star: float,
    pk: float,
    direction: str = "down",
    n: int = 4097,
) -> float:
    """Recover the impulsive momentum jump by numerical quadrature.

    Integrates delta_pk = 2 hbar omega(q*) d(q*) * integral(alpha dt) for a
    transition whose mixing angle sweeps the full branch, with the
    localized-limit coherence alpha = -sin(phi)/2 and the time element
    frozen at the transition point, dt = -m dphi / (2 d(q*) pk).  The sweep
    runs 0 -> pi for a downward transition and pi -> 0 for an upward one.
    """
    if direction not in ("down", "up"):
        raise ValueError(f"direction must be 'down' or 'up', got {direction!r}")
    ad = model.adiabatic(q_star)
    d_star = float(ad.d)
    if d_star * pk == 0.0:
        raise SingularJumpError(
            f"impulsive jump singular at q*={q_star}: d(q*)*pk = 0"
        )
    phi = np.linspace(0.0, np.pi, n)
    if direction == "up":
        phi = phi[::-1]
    alpha = -0.5 * np.sin(phi)
    dt_dphi = -model.mass / (2.0 * d_star * pk)
    integral = np.trapezoid(alpha * dt_dphi, phi)
    return 2.0 * HBAR * float(ad.omega) * d_star * integral


def trajectory_energy(state: TrajectoryState, model: ModelPotential) -> ArrayLike:
    """Kinematic energy pk**2 / 2m + V(q, sigma)."""
    ad = model.adiabatic(state.q)
    v_occ = state.sigma * ad.vplus + (1.0 - state.sigma) * ad.vminus
    return state.pk * state.pk / (2.0 * model.mass) + v_occ


def canonical_momentum(state: TrajectoryState, model: ModelPotential) -> ArrayLike:
    """Canonical momentum p = pk + 2 hbar beta d(q)."""
    ad = model.adiabatic(state.q)
    return state.pk + 2.0 * HBAR * state.beta * ad.d


def trajectory_energy_canonical(
    state: TrajectoryState, model: ModelPotential
) -> ArrayLike:
    """Canonical energy p**2 / 2m + V(q, sigma) - 2 hbar beta d pk / m.

    Exceeds the kinematic form by exactly 2 hbar**2 beta**2 d**2 / m.
    """
    ad = model.adiabatic(state.q)
    v_occ = state.sigma * ad.vplus + (1.0 - state.sigma) * ad.vminus
    p = state.pk + 2.0 * HBAR * state.beta * ad.d
    coupling_term = 2.0 * HBAR * state.beta * ad.d * state.pk / model.mass
    return p * p / (2.0 * model.mass) + v_occ - coupling_term
