"""Ensemble sampling and propagation.

Initial conditions are phase-space draws matching a minimum-uncertainty
Gaussian wavepacket: independent normals with means (q0, hbar*k0) and widths
(sigma_q, hbar/(2*sigma_q)).  Every trajectory owns a counter-based random
stream keyed by (master seed, trajectory index), so the ensemble is
reproducible draw-for-draw regardless of execution order or batching.  The
stream consumption contract is frozen: two standard normals for the initial
condition, then exactly one uniform per time step for the hop test (the
Born-Oppenheimer engine consumes no uniforms).

Propagation is vectorized over fixed-size trajectory chunks; per-frame
ensemble sums are reduced in chunk-index order, which makes the emitted
frames bitwise identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .dynamics import (
    EngineKind,
    HopKind,
    TrajectoryState,
    apply_hops,
    derivatives,
    rk4_step,
)
from .errors import ConfigurationError, PropagationError
from .model import HBAR, ModelPotential

# Trajectories are propagated in fixed-size chunks; sums are combined in
# chunk order, so results do not depend on the worker count.
DEFAULT_CHUNK = 8192
# Hop uniforms are pre-drawn in blocks of this many steps per chunk.
_DRAW_BLOCK = 512


@dataclass(frozen=True)
class InitialCondition:
    """Wavepacket parameters behind the phase-space sampling."""

    q0: float = -5.0
    k0: float = 10.0
    sigma_q: float = 1.0
    surface0: str = "upper"

    def __post_init__(self) -> None:
        if not (np.isfinite(self.sigma_q) and self.sigma_q > 0.0):
            raise ConfigurationError(f"sigma_q must be positive, got {self.sigma_q!r}")
        if self.surface0 not in ("upper", "lower"):
            raise ConfigurationError(
                f"surface0 must be 'upper' or 'lower', got {self.surface0!r}"
            )
        if not (np.isfinite(self.q0) and np.isfinite(self.k0)):
            raise ConfigurationError("q0 and k0 must be finite")


@dataclass(frozen=True)
class EnsembleFrame:
    """Ensemble observables at one output time."""

    t: float
    p_plus: float
    p_minus: float
    mean_alpha: float
    mean_beta: float
    energy: float
    work: float
    frustrated_count: int
    consistency_gap: float


@dataclass(frozen=True)
class RunConfig:
    """Everything a trajectory-ensemble run needs.

    ``stride`` is the number of time steps between emitted frames; the
    horizon t_final must be an integer number of steps and of frames.
    """

    model: ModelPotential = field(default_factory=ModelPotential)
    ic: InitialCondition = field(default_factory=InitialCondition)
    engine: EngineKind = EngineKind.QTSH
    n: int = 10000
    dt: float = 0.25
    t_final: float = 2500.0
    seed: int = 42
    stride: int = 20

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigurationError(f"n must be >= 1, got {self.n}")
        if not (np.isfinite(self.dt) and self.dt > 0.0):
            raise ConfigurationError(f"dt must be positive, got {self.dt!r}")
        if not (np.isfinite(self.t_final) and self.t_final > 0.0):
            raise ConfigurationError(f"t_final must be positive, got {self.t_final!r}")
        if self.stride < 1:
            raise ConfigurationError(f"stride must be >= 1, got {self.stride}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be nonnegative, got {self.seed}")
        steps = self.t_final / self.dt
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigurationError(
                f"t_final={self.t_final} is not an integer number of steps of dt={self.dt}"
            )
        if round(steps) % self.stride != 0:
            raise ConfigurationError(
                f"step count {round(steps)} is not a multiple of stride={self.stride}"
            )

    @property
    def n_steps(self) -> int:
        return round(self.t_final / self.dt)

    @property
    def n_frames(self) -> int:
        return self.n_steps // self.stride + 1


@dataclass
class EnsembleResult:
    frames: list[EnsembleFrame]
    # Optional per-trajectory time series, keyed by field name, each of
    # shape (n_frames, n).  Populated only when requested.
    trajectories: Optional[dict[str, np.ndarray]] = None
    degenerate_hops: int = 0


@dataclass(frozen=True)
class ConsistencyReport:
    """Summaries of the three ensemble health diagnostics."""

    max_consistency_gap: float
    frustrated_total: int
    max_energy_drift: float
    consistency_gap_series: np.ndarray = field(repr=False, default=None)
    energy_drift_series: np.ndarray = field(repr=False, default=None)
    frustrated_series: np.ndarray = field(repr=False, default=None)


def _trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one trajectory, independent of all others."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, index))))


def _init_arrays(ic: InitialCondition, indices: Sequence[int], seed: int):
    """Initial state arrays plus the live per-trajectory generators."""
    n = len(indices)
    gens = [_trajectory_rng(seed, int(j)) for j in indices]
    q = np.empty(n)
    pk = np.empty(n)
    sigma_p = HBAR / (2.0 * ic.sigma_q)
    for jj, gen in enumerate(gens):
        z = gen.standard_normal(2)
        q[jj] = ic.q0 + ic.sigma_q * z[0]
        pk[jj] = HBAR * ic.k0 + sigma_p * z[1]
    sigma0 = 1.0 if ic.surface0 == "upper" else 0.0
    sigma = np.full(n, sigma0)
    state = TrajectoryState(
        q=q,
        pk=pk,
        sigma=sigma,
        alpha=np.zeros(n),
        beta=np.zeros(n),
        a_pp=sigma.copy(),
        work_acc=np.zeros(n),
        t=0.0,
    )
    return state, gens


def sample_initial(ic: InitialCondition, n: int, seed: int) -> TrajectoryState:
    """Draw n phase-space initial conditions (array-valued state bundle).

    Trajectory j's draws come from its own (seed, j) stream, so any prefix
    or reordering of indices yields the same per-trajectory values.
    """
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    state, _ = _init_arrays(ic, range(n), seed)
    return state


_RECORDABLE = ("q", "pk", "sigma", "alpha", "beta", "a_pp", "work", "energy", "hop_dv")


def _frame_sums(state, model, hop_dv, frustrated, degenerate):
    ad = model.adiabatic(state.q)
    v_occ = state.sigma * ad.vplus + (1.0 - state.sigma) * ad.vminus
    energy = state.pk * state.pk / (2.0 * model.mass) + v_occ
    return (
        np.array(
            [
                np.sum(state.sigma),
                np.sum(state.alpha),
                np.sum(state.beta),
                np.sum(energy),
                np.sum(state.work_acc),
                float(frustrated),
                np.sum(state.a_pp),
                np.sum(hop_dv),
                float(degenerate),
            ]
        ),
        energy,
    )


def _check_finite(state: TrajectoryState, offset: int) -> None:
    ok = (
        np.isfinite(state.q)
        & np.isfinite(state.pk)
        & np.isfinite(state.alpha)
        & np.isfinite(state.beta)
        & np.isfinite(state.a_pp)
    )
    if not np.all(ok):
        bad = int(np.argmax(~ok))
        raise PropagationError(
            "trajectory state became non-finite", index=offset + bad, t=float(state.t)
        )


def _propagate_chunk(cfg: RunConfig, indices: range, record: tuple[str, ...]):
    """Propagate one chunk of trajectories through all steps.

    Returns (partial frame sums of shape (n_frames, 9), per-trajectory
    records dict or None).
    """
    state, gens = _init_arrays(cfg.ic, indices, cfg.seed)
    model, engine, dt = cfg.model, cfg.engine, cfg.dt
    n_local = len(indices)
    hop_dv = np.zeros(n_local)
    frustrated = 0
    degenerate = 0
    needs_draws = engine is not EngineKind.BORN_OPPENHEIMER

    partials = np.empty((cfg.n_frames, 9))
    records = {name: np.empty((cfg.n_frames, n_local)) for name in record} or None

    def emit(frame_idx: int) -> None:
        sums, energy = _frame_sums(state, model, hop_dv, frustrated, degenerate)
        partials[frame_idx] = sums
        if records is not None:
            values = {
                "q": state.q,
                "pk": state.pk,
                "sigma": state.sigma,
                "alpha": state.alpha,
                "beta": state.beta,
                "a_pp": state.a_pp,
                "work": state.work_acc,
                "energy": energy,
                "hop_dv": hop_dv,
            }
            for name in record:
                records[name][frame_idx] = values[name]

    emit(0)
    draws = None
    k1 = None
    for step in range(cfg.n_steps):
        if needs_draws:
            block_pos = step % _DRAW_BLOCK
            if block_pos == 0:
                block_len = min(_DRAW_BLOCK, cfg.n_steps - step)
                draws = np.empty((n_local, block_len))
                for jj, gen in enumerate(gens):
                    draws[jj] = gen.random(block_len)
            u = draws[:, block_pos]
        try:
            state = rk4_step(state, dt, model, engine, k1=k1)
        except PropagationError as exc:
            raise PropagationError(
                "trajectory state became non-finite",
                index=indices.start + (exc.index or 0),
                t=exc.t,
            ) from None
        if needs_draws:
            state, codes, _, ad_here, degen = apply_hops(state, model, dt, u, engine)
            down = codes == HopKind.HOP_DOWN.value
            up = codes == HopKind.HOP_UP.value
            if np.any(down | up):
                gap = HBAR * ad_here.omega
                hop_dv = hop_dv - np.where(down, gap, 0.0) + np.where(up, gap, 0.0)
            frustrated += int(np.sum(codes == HopKind.FRUSTRATED.value))
            degenerate += int(np.sum(degen))
            # The surfaces depend on q only, so the hop test's adiabatic
            # evaluation doubles as the next step's first RK4 stage.
            k1 = derivatives(state, model, engine, ad=ad_here)
        if (step + 1) % cfg.stride == 0:
            _check_finite(state, indices.start)
            emit((step + 1) // cfg.stride)
    return partials, records


def run_ensemble(
    cfg: RunConfig,
    *,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
    record: tuple[str, ...] = (),
) -> EnsembleResult:
    """Propagate the configured ensemble and emit frames every stride steps.

    ``record`` selects optional per-trajectory time series (any of
    'q pk sigma alpha beta a_pp work energy hop_dv'.split()), sampled at the
    same frame times.  Results are deterministic for a given (cfg, chunk_size)
    and independent of ``workers``.
    """
    for name in record:
        if name not in _RECORDABLE:
            raise ConfigurationError(f"unknown record field {name!r}")
    chunks = [
        range(start, min(start + chunk_size, cfg.n))
        for start in range(0, cfg.n, chunk_size)
    ]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: _propagate_chunk(cfg, c, record), chunks))
    else:
        results = [_propagate_chunk(cfg, c, record) for c in chunks]

    totals = results[0][0].copy()
    for partials, _ in results[1:]:
        totals += partials

    records = None
    if record:
        records = {name: np.empty((cfg.n_frames, cfg.n)) for name in record}
        for chunk, (_, rec) in zip(chunks, results):
            for name in record:
                records[name][:, chunk.start : chunk.stop] = rec[name]

    frames = []
    inv_n = 1.0 / cfg.n
    for fi in range(cfg.n_frames):
        s_sigma, s_alpha, s_beta, s_energy, s_work, fr, s_app, _, _ = totals[fi]
        p_plus = s_sigma * inv_n
        frames.append(
            EnsembleFrame(
                t=fi * cfg.stride * cfg.dt,
                p_plus=p_plus,
                p_minus=1.0 - p_plus,
                mean_alpha=s_alpha * inv_n,
                mean_beta=s_beta * inv_n,
                energy=s_energy * inv_n,
                work=s_work * inv_n,
                frustrated_count=int(fr),
                consistency_gap=abs(p_plus - s_app * inv_n),
            )
        )
    return EnsembleResult(
        frames=frames,
        trajectories=records,
        degenerate_hops=int(totals[-1][8]),
    )


def consistency_report(frames: Sequence[EnsembleFrame]) -> ConsistencyReport:
    """Maxima and series for the gap, frustration, and energy diagnostics."""
    if not frames:
        raise ConfigurationError("cannot summarize an empty frame list")
    gaps = np.array([f.consistency_gap for f in frames])
    energies = np.array([f.energy for f in frames])
    frustrated = np.array([f.frustrated_count for f in frames])
    drift = np.abs(energies - energies[0])
    return ConsistencyReport(
        max_consistency_gap=float(np.max(gaps)),
        frustrated_total=int(frustrated[-1]),
        max_energy_drift=float(np.max(drift)),
        consistency_gap_series=gaps,
        energy_drift_series=drift,
        frustrated_series=frustrated,
    )
