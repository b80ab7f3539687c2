"""Time evolution of the master equation, state diagnostics, and the expm oracle.

Two independent propagation routes exist on purpose: :func:`evolve` steps
the density matrix with an adaptive embedded Runge-Kutta pair, while
:func:`oracle_propagate` vectorizes the state and applies the exact matrix
exponential of the Liouvillian supermatrix per pulse segment.  Their
agreement is the defining correctness check of this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import ode
from .linalg import ModeLayout, dagger, matrix_exponential
from .model import (
    FRAME_ROTATING,
    FRAMES,
    Channel,
    SystemConfig,
    build_channels,
    build_hamiltonian,
)

# Hard abort thresholds, one order looser than the bounds asserted in the
# verification suite: a breach means the integration itself went wrong.
ABORT_TRACE_ERR = 1e-7
ABORT_HERM_ERR = 1e-8
ABORT_MIN_EIG = -1e-6


class InvariantViolationError(RuntimeError):
    """A density-matrix invariant broke during integration."""

    def __init__(self, time: float, detail: str):
        super().__init__(f"state invariant violated at t = {time:.9g}: {detail}")
        self.time = time


class CorruptedStateError(RuntimeError):
    """A fidelity came out with a non-negligible imaginary part."""


class StateDiagnostics(NamedTuple):
    trace_error: float
    hermiticity_error: float
    min_eigenvalue: float
    purity: float


def check_state(rho: np.ndarray) -> StateDiagnostics:
    """Trace, Hermiticity, positivity and purity diagnostics of one state."""
    rho = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    herm = 0.5 * (rho + dagger(rho))
    eigs = np.linalg.eigvalsh(herm)
    return StateDiagnostics(
        trace_error=float(abs(np.trace(rho) - 1.0)),
        hermiticity_error=float(np.max(np.abs(rho - dagger(rho)))),
        min_eigenvalue=float(eigs[0]),
        purity=float(np.vdot(herm, herm).real),
    )


@dataclass(frozen=True)
class DensityMatrix:
    """Validated system state: Hermitian, unit trace, positive (to tolerance)."""

    matrix: np.ndarray
    layout: ModeLayout

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        d = self.layout.dim
        if m.shape != (d, d):
            raise ValueError(f"state shape {m.shape} does not match layout dimension {d}")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("state contains non-finite entries")
        diag = check_state(m)
        if diag.hermiticity_error > 1e-10:
            raise ValueError(f"state is not Hermitian (error {diag.hermiticity_error:.3e})")
        if diag.trace_error > 1e-9:
            raise ValueError(f"state trace deviates from 1 by {diag.trace_error:.3e}")
        if diag.min_eigenvalue < -1e-8:
            raise ValueError(f"state has negative eigenvalue {diag.min_eigenvalue:.3e}")

    @classmethod
    def pure(cls, state: np.ndarray, layout: ModeLayout) -> "DensityMatrix":
        v = np.asarray(state, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), layout)

    @classmethod
    def vacuum(cls, layout: ModeLayout) -> "DensityMatrix":
        return cls.pure(layout.basis_state(0, 0, 0), layout)


def fidelity(rho, psi: np.ndarray) -> float:
    """Overlap Tr(rho |psi><psi|) = <psi| rho |psi> as a real number.

    An imaginary residue above 1e-10 signals a corrupted state and raises.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else rho
    val = complex(np.vdot(psi, m @ psi))
    if abs(val.imag) > 1e-10:
        raise CorruptedStateError(f"fidelity has imaginary residue {val.imag:.3e}")
    return float(val.real)


@dataclass(frozen=True)
class TraceSource:
    """Provenance of a trajectory, enough to re-simulate on a finer grid."""

    cfg: SystemConfig
    target: np.ndarray
    frame: str
    rho0: np.ndarray
    dephasing_reservoir: bool = False


@dataclass
class Trajectory:
    """Sampled observables of one master-equation run."""

    times: np.ndarray
    fidelity: np.ndarray
    p_e00: np.ndarray
    p_g10: np.ndarray
    p_g01: np.ndarray
    p_g00: np.ndarray
    trace_err: np.ndarray
    min_eig: np.ndarray
    purity: np.ndarray
    source: TraceSource | None = None
    states: list[np.ndarray] | None = None

    @property
    def populations(self):
        return (self.p_e00, self.p_g10, self.p_g01, self.p_g00)


def _rhs_for_segment(cfg: SystemConfig, frame: str, drive_on: bool,
                     channels: list[Channel], dim: int):
    """Compile the master-equation right-hand side for one pulse segment.

    Algebraically identical to :func:`wsim.model.liouvillian_apply` but
    regrouped for speed: the anticommutator halves fold into a non-Hermitian
    drift G = -i H - sum_c r_c J_c^+ J_c, and the sandwich terms run as one
    batched product over rate-scaled jumps, so

        drho/dt = G rho + rho G^+ + sum_c (s_c J_c) rho (s_c J_c)^+

    with s_c = sqrt(2 r_c).  The drift is constant except in the driven
    lab-frame segment, where the oscillating drive is added per evaluation.
    """
    decay = np.zeros((dim, dim), dtype=complex)
    jumps = np.empty((len(channels), dim, dim), dtype=complex)
    for c, (rate, jump) in enumerate(channels):
        decay += rate * (dagger(jump) @ jump)
        jumps[c] = math.sqrt(2.0 * rate) * jump
    jumps_dag = np.conj(np.transpose(jumps, (0, 2, 1)))

    if frame == FRAME_ROTATING:
        h_const = build_hamiltonian(cfg, frame, 0.0 if drive_on else math.inf)
    elif not (drive_on and cfg.drive.rabi):
        h_const = build_hamiltonian(cfg, frame, math.inf)
    else:
        h_const = None

    if h_const is not None:
        g = -1j * h_const - decay
        gd = dagger(g)

        if len(channels) == 1:
            j0, j0d = jumps[0], jumps_dag[0]

            def rhs(t, y):
                rho = y.reshape(dim, dim)
                return (g @ rho + rho @ gd + j0 @ rho @ j0d).ravel()

            return rhs

        def rhs(t, y):
            rho = y.reshape(dim, dim)
            sandwich = np.tensordot(jumps @ rho, jumps_dag, axes=([0, 2], [0, 1]))
            return (g @ rho + rho @ gd + sandwich).ravel()

        return rhs

    from .model import build_mode_operators

    sigma = build_mode_operators(cfg.layout).sigma
    sigma_dag = dagger(sigma)
    g0 = -1j * build_hamiltonian(cfg, frame, math.inf) - decay
    g0d = dagger(g0)
    rabi, wd = cfg.drive.rabi, cfg.drive.omega_d

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        phase = np.exp(-1j * wd * t)
        drive = (-1j * rabi) * (phase * sigma_dag + np.conj(phase) * sigma)
        sandwich = np.tensordot(jumps @ rho, jumps_dag, axes=([0, 2], [0, 1]))
        return ((g0 + drive) @ rho + rho @ (g0d - drive) + sandwich).ravel()

    return rhs


def evolve(
    rho0,
    cfg: SystemConfig,
    target: np.ndarray,
    t_grid: np.ndarray,
    frame: str = FRAME_ROTATING,
    *,
    dephasing_reservoir: bool = False,
    store_states: bool = False,
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate the master equation and sample fidelity and diagnostics.

    The grid must start at 0.  The pulse edge at ``t0`` is a hard segment
    boundary: the integrator never steps across the Heaviside discontinuity.
    Invariant breaches beyond the abort thresholds raise
    :class:`InvariantViolationError` with the offending time.
    """
    if frame not in FRAMES:
        raise ValueError(f"frame must be one of {FRAMES}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0:
        raise ValueError("time grid must start at 0")
    layout = cfg.layout
    dm = rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix(rho0, layout)

    channels = build_channels(cfg, dephasing_reservoir)
    dim = layout.dim
    t0 = cfg.drive.t0
    t_end = float(t_grid[-1])

    y = dm.matrix.ravel().astype(complex)
    if cfg.drive.rabi == 0 or t0 >= t_end:
        # single segment; the whole grid lies inside the pulse window
        rhs = _rhs_for_segment(cfg, frame, drive_on=cfg.drive.rabi > 0, channels=channels, dim=dim)
        collected = list(ode.integrate(rhs, y, t_grid, cfg.rtol, cfg.atol, max_step=max_step))
    else:
        # a grid point within eps of the pulse edge serves as the edge itself,
        # so the two segments never receive near-duplicate sample times
        eps = 1e-12 * max(1.0, abs(t0))
        on_mask = t_grid <= t0 + eps
        seg1 = t_grid[on_mask]
        pad1 = t0 - seg1[-1] > eps
        boundary = t0 if pad1 else float(seg1[-1])
        if pad1:
            seg1 = np.append(seg1, t0)
        rhs_on = _rhs_for_segment(cfg, frame, drive_on=True, channels=channels, dim=dim)
        ys1 = ode.integrate(rhs_on, y, seg1, cfg.rtol, cfg.atol, max_step=max_step)
        collected = list(ys1[:-1] if pad1 else ys1)

        seg2 = np.concatenate([[boundary], t_grid[~on_mask]])
        rhs_off = _rhs_for_segment(cfg, frame, drive_on=False, channels=channels, dim=dim)
        ys2 = ode.integrate(rhs_off, ys1[-1], seg2, cfg.rtol, cfg.atol, max_step=max_step)
        collected.extend(ys2[1:])

    n = len(t_grid)
    assert len(collected) == n
    out = {
        name: np.empty(n)
        for name in ("fid", "pe", "pa", "pb", "pg", "tr", "me", "pu")
    }
    idx_e00 = layout.basis_index(1, 0, 0)
    idx_g10 = layout.basis_index(0, 1, 0)
    idx_g01 = layout.basis_index(0, 0, 1)
    idx_g00 = layout.basis_index(0, 0, 0)
    states = [] if store_states else None
    for i, yi in enumerate(collected):
        rho = yi.reshape(dim, dim)
        diag = check_state(rho)
        t_i = float(t_grid[i])
        if diag.trace_error > ABORT_TRACE_ERR:
            raise InvariantViolationError(t_i, f"trace error {diag.trace_error:.3e}")
        if diag.hermiticity_error > ABORT_HERM_ERR:
            raise InvariantViolationError(t_i, f"hermiticity error {diag.hermiticity_error:.3e}")
        if diag.min_eigenvalue < ABORT_MIN_EIG:
            raise InvariantViolationError(t_i, f"negative eigenvalue {diag.min_eigenvalue:.3e}")
        out["fid"][i] = fidelity(rho, target)
        out["pe"][i] = rho[idx_e00, idx_e00].real
        out["pa"][i] = rho[idx_g10, idx_g10].real
        out["pb"][i] = rho[idx_g01, idx_g01].real
        out["pg"][i] = rho[idx_g00, idx_g00].real
        out["tr"][i] = diag.trace_error
        out["me"][i] = diag.min_eigenvalue
        out["pu"][i] = diag.purity
        if store_states:
            states.append(rho.copy())

    return Trajectory(
        times=t_grid.copy(),
        fidelity=out["fid"],
        p_e00=out["pe"],
        p_g10=out["pa"],
        p_g01=out["pb"],
        p_g00=out["pg"],
        trace_err=out["tr"],
        min_eig=out["me"],
        purity=out["pu"],
        source=TraceSource(cfg, np.asarray(target, dtype=complex), frame, dm.matrix.copy(),
                           dephasing_reservoir),
        states=states,
    )


def resimulate(source: TraceSource, t_grid: np.ndarray) -> Trajectory:
    """Re-run a trajectory's exact configuration on a different grid."""
    return evolve(
        DensityMatrix(source.rho0, source.cfg.layout),
        source.cfg,
        source.target,
        t_grid,
        source.frame,
        dephasing_reservoir=source.dephasing_reservoir,
    )


def liouvillian_supermatrix(h: np.ndarray, channels: list[Channel]) -> np.ndarray:
    """Explicit Liouvillian on column-stacked states.

    Built from vec(A rho B) = (B^T kron A) vec(rho) with Fortran-order
    (column-stacking) vectorization.
    """
    d = h.shape[0]
    eye = np.eye(d, dtype=complex)
    lsup = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for rate, jump in channels:
        k = dagger(jump) @ jump
        lsup += rate * (
            2.0 * np.kron(jump.conj(), jump) - np.kron(eye, k) - np.kron(k.T, eye)
        )
    return lsup


def oracle_propagate(
    rho0,
    cfg: SystemConfig,
    t: float,
    frame: str = FRAME_ROTATING,
    *,
    dephasing_reservoir: bool = False,
) -> DensityMatrix:
    """Exact segment-wise propagation via the matrix exponential of the Liouvillian.

    Only the rotating frame is supported: there the generator is piecewise
    constant (one piece per pulse segment) and ``expm`` applies verbatim.
    Deliberately refuses large truncations; this is a verification oracle,
    not a production path.
    """
    if frame != FRAME_ROTATING:
        raise ValueError("oracle propagation requires the rotating frame (piecewise-constant generator)")
    layout = cfg.layout
    d = layout.dim
    if d * d > 2500:
        raise ValueError(f"oracle refuses supermatrix dimension {d * d} > 2500")
    if t < 0:
        raise ValueError("time must be non-negative")
    dm = rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix(rho0, layout)
    channels = build_channels(cfg, dephasing_reservoir)

    vec = dm.matrix.reshape(-1, order="F")
    t0 = cfg.drive.t0
    t_on = min(t, t0)
    if t_on > 0:
        l_on = liouvillian_supermatrix(build_hamiltonian(cfg, frame, 0.0), channels)
        vec = matrix_exponential(l_on * t_on) @ vec
    if t > t0:
        l_off = liouvillian_supermatrix(build_hamiltonian(cfg, frame, math.inf), channels)
        vec = matrix_exponential(l_off * (t - t0)) @ vec
    rho_t = vec.reshape(d, d, order="F")
    # symmetrize roundoff from the supermatrix product before validating
    rho_t = 0.5 * (rho_t + dagger(rho_t))
    return DensityMatrix(rho_t, layout)
