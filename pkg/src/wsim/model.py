"""Physical model: Hamiltonians, the collective jump operator, dissipation channels.

The master equation implemented everywhere in this package is

    drho/dt = -i[H, rho] + sum_c r_c (2 J_c rho J_c^+ - J_c^+ J_c rho - rho J_c^+ J_c)

where every channel rate r_c multiplies the factor-two dissipator.  Under a
single channel ``(r, J)`` with ``J`` a lowering operator, excited population
therefore decays as ``exp(-2 r t)``.  The qubit pure-dephasing term enters in
its sandwich form ``gamma_phi (sz rho sz - rho)``; since ``sz^2 = 1`` this is
represented exactly by a channel ``(gamma_phi / 2, sz)`` in the factor-two
normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .linalg import ModeLayout, dagger, embed

UNIT_MODES = ("dimensionless", "physical")

FRAME_LAB = "lab"
FRAME_ROTATING = "rotating_at_drive"
FRAMES = (FRAME_LAB, FRAME_ROTATING)


@dataclass(frozen=True)
class PulseSpec:
    """Rectangular drive pulse on the qubit: frequency, Rabi amplitude, duration.

    ``t0 = inf`` means the drive never switches off.
    """

    omega_d: float
    rabi: float
    t0: float = math.inf

    def __post_init__(self):
        if self.rabi < 0:
            raise ValueError("rabi must be non-negative")
        if not (self.t0 > 0):
            raise ValueError("pulse duration t0 must be positive (or inf)")


@dataclass(frozen=True)
class SystemConfig:
    """All physical parameters of one simulation.

    Rates are angular (rad per time unit); ``unit_mode`` records whether the
    time unit is 1/rate-unit ("dimensionless") or microseconds ("physical").
    ``tau`` is the coefficient multiplying the factor-two collective
    dissipator, and the ``gamma_*`` fields are likewise the coefficients of
    their factor-two terms (``gamma_phi`` multiplies the sandwich form
    directly).
    """

    eta_sigma: complex
    eta_a: complex
    eta_b: complex
    drive: PulseSpec
    tau: float = 1.0
    omega_sigma: float = 500.0
    omega_a: float = 500.0
    omega_b: float = 500.0
    gamma_sigma: float = 0.0
    gamma_a: float = 0.0
    gamma_b: float = 0.0
    gamma_phi: float = 0.0
    n_max: int = 2
    unit_mode: str = "dimensionless"
    rtol: float = 1e-8
    atol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "eta_sigma", complex(self.eta_sigma))
        object.__setattr__(self, "eta_a", complex(self.eta_a))
        object.__setattr__(self, "eta_b", complex(self.eta_b))
        if not (self.tau > 0):
            raise ValueError("tau must be positive")
        for name in ("gamma_sigma", "gamma_a", "gamma_b", "gamma_phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.n_max < 2:
            raise ValueError("n_max must be at least 2")
        if self.unit_mode not in UNIT_MODES:
            raise ValueError(f"unit_mode must be one of {UNIT_MODES}")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("integration tolerances must be positive")

    @property
    def layout(self) -> ModeLayout:
        return ModeLayout.for_n_max(self.n_max)

    @property
    def eta(self) -> tuple[complex, complex, complex]:
        return (self.eta_sigma, self.eta_a, self.eta_b)


class Channel(NamedTuple):
    """One dissipation channel: rate times the factor-two dissipator of jump."""

    rate: float
    jump: np.ndarray


class ModeOperators(NamedTuple):
    sigma: np.ndarray
    a: np.ndarray
    b: np.ndarray


def build_mode_operators(layout: ModeLayout) -> ModeOperators:
    """Lowering operators of the three modes on the full product space."""
    sigma_local = np.zeros((2, 2), dtype=complex)
    sigma_local[0, 1] = 1.0  # |g><e|
    ops = []
    for site in (1, 2):
        n = layout.dims[site]
        ops.append(np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex))
    return ModeOperators(
        sigma=embed(sigma_local, 0, layout),
        a=embed(ops[0], 1, layout),
        b=embed(ops[1], 2, layout),
    )


def number_operator(layout: ModeLayout) -> np.ndarray:
    """Total excitation number sigma^+ sigma + a^+ a + b^+ b."""
    sigma, a, b = build_mode_operators(layout)
    return dagger(sigma) @ sigma + dagger(a) @ a + dagger(b) @ b


def qubit_sigma_z(layout: ModeLayout) -> np.ndarray:
    """sigma_z = |e><e| - |g><g| on the full space."""
    return embed(np.diag([-1.0, 1.0]).astype(complex), 0, layout)


def build_jump_operator(cfg: SystemConfig) -> np.ndarray:
    """Collective jump operator o = eta_sigma sigma + eta_a a + eta_b b."""
    sigma, a, b = build_mode_operators(cfg.layout)
    return cfg.eta_sigma * sigma + cfg.eta_a * a + cfg.eta_b * b


def build_dephasing_jump(cfg: SystemConfig) -> np.ndarray:
    """Collective dephasing jump O = eta_sigma n_sigma + eta_a n_a + eta_b n_b.

    Number operators replace the lowering operators, so this channel cannot
    exchange energy between the modes; it is the negative control of the
    preparation scheme.
    """
    sigma, a, b = build_mode_operators(cfg.layout)
    return (
        cfg.eta_sigma * (dagger(sigma) @ sigma)
        + cfg.eta_a * (dagger(a) @ a)
        + cfg.eta_b * (dagger(b) @ b)
    )


def build_hamiltonian(cfg: SystemConfig, frame: str, t: float) -> np.ndarray:
    """System Hamiltonian at time ``t`` in the requested frame.

    Lab frame: mode energies plus, while the pulse is on, the co-rotating
    drive ``rabi (sigma^+ e^{-i w_d t} + sigma e^{+i w_d t})``.

    Rotating frame (generated by ``w_d N`` with N the total excitation
    number): detunings ``w_alpha - w_d`` on each mode plus a static drive
    ``rabi (sigma^+ + sigma)`` while the pulse is on.  Time enters only
    through the pulse window.
    """
    if frame not in FRAMES:
        raise ValueError(f"frame must be one of {FRAMES}")
    layout = cfg.layout
    sigma, a, b = build_mode_operators(layout)
    drive_on = t < cfg.drive.t0
    if frame == FRAME_ROTATING:
        wd = cfg.drive.omega_d
        h = (
            (cfg.omega_sigma - wd) * (dagger(sigma) @ sigma)
            + (cfg.omega_a - wd) * (dagger(a) @ a)
            + (cfg.omega_b - wd) * (dagger(b) @ b)
        )
        if drive_on and cfg.drive.rabi:
            h = h + cfg.drive.rabi * (dagger(sigma) + sigma)
        return h
    h = (
        cfg.omega_sigma * (dagger(sigma) @ sigma)
        + cfg.omega_a * (dagger(a) @ a)
        + cfg.omega_b * (dagger(b) @ b)
    )
    if drive_on and cfg.drive.rabi:
        phase = np.exp(-1j * cfg.drive.omega_d * t)
        h = h + cfg.drive.rabi * (phase * dagger(sigma) + np.conj(phase) * sigma)
    return h


def build_channels(cfg: SystemConfig, dephasing_reservoir: bool = False) -> list[Channel]:
    """All dissipation channels of the master equation.

    The collective channel always comes first; intrinsic channels appear only
    when their rate is nonzero.  With ``dephasing_reservoir`` the collective
    jump is the number-operator form (negative control).
    """
    jump = build_dephasing_jump(cfg) if dephasing_reservoir else build_jump_operator(cfg)
    channels = [Channel(cfg.tau, jump)]
    sigma, a, b = build_mode_operators(cfg.layout)
    for rate, op in ((cfg.gamma_sigma, sigma), (cfg.gamma_a, a), (cfg.gamma_b, b)):
        if rate > 0:
            channels.append(Channel(rate, op))
    if cfg.gamma_phi > 0:
        # sz^2 = 1, so rate gamma_phi/2 in the factor-two form reproduces the
        # sandwich term gamma_phi (sz rho sz - rho) exactly.
        channels.append(Channel(cfg.gamma_phi / 2.0, qubit_sigma_z(cfg.layout)))
    return channels


def liouvillian_apply(rho: np.ndarray, h: np.ndarray, channels: list[Channel]) -> np.ndarray:
    """Right-hand side of the master equation for one state.

    Pure function used both directly and as the reference for the
    integrator's precompiled right-hand side.  Output is Hermitian and
    traceless (to roundoff) whenever ``rho`` is Hermitian.
    """
    if rho.shape != h.shape:
        raise ValueError("state and Hamiltonian dimensions differ")
    drho = -1j * (h @ rho - rho @ h)
    for rate, jump in channels:
        if rho.shape != jump.shape:
            raise ValueError("state and jump operator dimensions differ")
        jd = dagger(jump)
        k = jd @ jump
        drho = drho + rate * (2.0 * (jump @ rho @ jd) - k @ rho - rho @ k)
    return drho


def effective_hamiltonian(cfg: SystemConfig) -> np.ndarray:
    """Non-Hermitian H_eff = H_s - i tau o^+ o (lab frame, no drive term)."""
    o = build_jump_operator(cfg)
    h = build_hamiltonian(cfg, FRAME_LAB, t=math.inf)  # t=inf: pulse certainly off
    return h - 1j * cfg.tau * (dagger(o) @ o)


def validate_config(cfg: SystemConfig) -> list[str]:
    """Check the validity conditions of the adiabatic-elimination model.

    Returns human-readable warnings; the simulation itself always proceeds.
    The three checks: near-resonance of the three modes, weak coupling to the
    common reservoir, and weak drive.
    """
    warnings = []
    ref = cfg.omega_sigma
    if ref > 0:
        for name, omega in (("resonator a", cfg.omega_a), ("resonator b", cfg.omega_b)):
            if abs(ref - omega) > 0.05 * ref:
                warnings.append(
                    f"near-resonance: {name} is detuned from the qubit by "
                    f"{abs(ref - omega) / ref:.1%} (> 5%); the collective-jump model "
                    "assumes nearly resonant modes"
                )
    omega0 = (cfg.omega_sigma + cfg.omega_a + cfg.omega_b) / 3.0
    if omega0 > 0:
        strongest = max(abs(e) ** 2 for e in cfg.eta) * cfg.tau
        if strongest / omega0 > 0.2:
            warnings.append(
                f"strong coupling: max |eta|^2 tau = {strongest:.3g} exceeds 20% of the "
                f"mode frequency {omega0:.3g}; the Born-Markov derivation may not hold"
            )
    if cfg.drive.rabi / cfg.tau > 0.2:
        warnings.append(
            f"strong drive: rabi/tau = {cfg.drive.rabi / cfg.tau:.3g} (> 0.2); dropping "
            "the drive from the dissipator assumes a weak pulse"
        )
    return warnings
