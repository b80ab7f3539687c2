"""Single-excitation spectral analysis: dark states, bright state, W-state targets.

Within the one-excitation subspace span{|e00>, |g10>, |g01>} the undriven
dynamics close, and the collective jump operator has a two-dimensional
kernel (the dark states) plus one super-radiant direction (the bright
state).  The dark state reached from |e00> is the preparation target; for
the right weight triples it is a tripartite W state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .linalg import ModeLayout, dagger, eig_nonhermitian
from .model import PulseSpec, SystemConfig, effective_hamiltonian

METHOD_CLOSED_FORM = "closed_form"
METHOD_KERNEL = "kernel"


class DegenerateEtaError(ValueError):
    """The closed-form dark-state expressions are singular for this eta triple."""


class NoDarkComponentError(ValueError):
    """|e00> has no overlap with the dark subspace; no target state exists."""


class Basis1Exc(NamedTuple):
    e00: np.ndarray
    g10: np.ndarray
    g01: np.ndarray
    g00: np.ndarray


def single_excitation_basis(layout: ModeLayout) -> Basis1Exc:
    """The four computational kets as full-space vectors."""
    return Basis1Exc(
        e00=layout.basis_state(1, 0, 0),
        g10=layout.basis_state(0, 1, 0),
        g01=layout.basis_state(0, 0, 1),
        g00=layout.basis_state(0, 0, 0),
    )


@dataclass(frozen=True)
class SpectralDecomposition:
    """Orthonormal eigenbasis of the one-excitation subspace.

    ``d1``/``d2`` span the kernel of the jump operator (eigenvalue ``e_d``,
    purely real); ``bright`` is the super-radiant state with complex
    eigenvalue ``e_b``.  ``k1..k3`` are the Gram-Schmidt coefficients of
    ``d2`` over (|e00>, |g10>, |g01>); they are zero when the decomposition
    came from the generic-eigensolver fallback (``method == "kernel"``).
    """

    d1: np.ndarray
    d2: np.ndarray
    bright: np.ndarray
    e_d: complex
    e_b: complex
    k1: complex
    k2: complex
    k3: complex
    method: str = METHOD_CLOSED_FORM


class TargetDarkState(NamedTuple):
    state: np.ndarray
    c1: complex
    c2: complex
    c3: complex


def _lift(coeffs, basis: Basis1Exc) -> np.ndarray:
    v = coeffs[0] * basis.e00 + coeffs[1] * basis.g10 + coeffs[2] * basis.g01
    return v / np.linalg.norm(v)


def dark_bright_states(cfg: SystemConfig) -> SpectralDecomposition:
    """Closed-form dark and bright states for the configured eta triple.

    Raises :class:`DegenerateEtaError` when ``eta_sigma == 0``, where the
    written expressions lose meaning; callers fall back to
    :func:`kernel_dark_states` (the physics, the kernel of the jump
    operator, is well defined regardless).
    """
    es, ea, eb = cfg.eta
    if es == 0:
        raise DegenerateEtaError(
            "closed-form dark states need eta_sigma != 0"
            + ("; all denominators vanish" if abs(es) ** 2 + abs(eb) ** 2 == 0 else "")
        )
    basis = single_excitation_basis(cfg.layout)
    nsb = abs(es) ** 2 + abs(eb) ** 2

    d1 = _lift((eb, 0.0, -es), basis)
    k1 = (abs(es) ** 2) * ea / nsb
    k2 = -es
    k3 = es * ea * np.conj(eb) / nsb
    d2 = _lift((k1, k2, k3), basis)
    bright = _lift((np.conj(es), np.conj(ea), np.conj(eb)), basis)

    omega0 = (cfg.omega_sigma + cfg.omega_a + cfg.omega_b) / 3.0
    total = abs(es) ** 2 + abs(ea) ** 2 + abs(eb) ** 2
    return SpectralDecomposition(
        d1=d1,
        d2=d2,
        bright=bright,
        e_d=complex(omega0),
        e_b=omega0 - 1j * total * cfg.tau,
        k1=complex(k1),
        k2=complex(k2),
        k3=complex(k3),
    )


def kernel_dark_states(cfg: SystemConfig) -> SpectralDecomposition:
    """Generic fallback: diagonalize H_eff restricted to the one-excitation subspace.

    Eigenvalues within ``1e-9 tau`` of the real axis classify as dark; the
    (possibly degenerate) dark pair is re-orthonormalized.  Works for any
    eta triple, including ``eta_sigma == 0``.
    """
    basis = single_excitation_basis(cfg.layout)
    sub = np.column_stack([basis.e00, basis.g10, basis.g01])
    heff = dagger(sub) @ effective_hamiltonian(cfg) @ sub
    pairs = sorted(eig_nonhermitian(heff), key=lambda p: abs(p.value.imag))
    dark = [p for p in pairs if abs(p.value.imag) <= 1e-9 * cfg.tau]
    brightish = [p for p in pairs if abs(p.value.imag) > 1e-9 * cfg.tau]
    if len(dark) != 2 or len(brightish) != 1:
        raise DegenerateEtaError(
            f"expected 2 dark + 1 bright eigenvalues, found {len(dark)} dark"
        )
    v1 = dark[0].vector
    v2 = dark[1].vector - np.vdot(v1, dark[1].vector) * v1
    norm2 = np.linalg.norm(v2)
    if norm2 < 1e-12:
        raise DegenerateEtaError("dark eigenvectors are numerically parallel")
    v2 = v2 / norm2
    vb = brightish[0].vector
    return SpectralDecomposition(
        d1=sub @ v1,
        d2=sub @ v2,
        bright=sub @ vb,
        e_d=complex(dark[0].value.real),
        e_b=complex(brightish[0].value),
        k1=0j,
        k2=0j,
        k3=0j,
        method=METHOD_KERNEL,
    )


def decompose(cfg: SystemConfig) -> SpectralDecomposition:
    """Closed-form decomposition when available, kernel fallback otherwise."""
    try:
        return dark_bright_states(cfg)
    except DegenerateEtaError:
        return kernel_dark_states(cfg)


def canonical_phase(state: np.ndarray) -> np.ndarray:
    """Rotate a state vector so its largest-magnitude amplitude is real positive."""
    k = int(np.argmax(np.abs(state)))
    pivot = state[k]
    if abs(pivot) == 0:
        return state.copy()
    return state * (np.conj(pivot) / abs(pivot))


def target_dark_state(cfg: SystemConfig) -> TargetDarkState:
    """Dark state reached from |e00> once the bright component has decayed.

    Decomposes |e00> = c1 |D1> + c2 |D2> + c3 |B| and returns the normalized
    dark part, phase-fixed to its canonical representative.
    """
    dec = decompose(cfg)
    e00 = single_excitation_basis(cfg.layout).e00
    c1 = complex(np.vdot(dec.d1, e00))
    c2 = complex(np.vdot(dec.d2, e00))
    c3 = complex(np.vdot(dec.bright, e00))
    weight = abs(c1) ** 2 + abs(c2) ** 2
    if weight <= 1e-12:
        raise NoDarkComponentError(
            "the excited qubit state lies entirely in the bright direction "
            f"for eta = {cfg.eta}; no dark target exists"
        )
    state = (c1 * dec.d1 + c2 * dec.d2) / math.sqrt(weight)
    return TargetDarkState(canonical_phase(state), c1, c2, c3)


class WStateEntry(NamedTuple):
    name: str
    eta: tuple[complex, complex, complex]
    state: np.ndarray


# Weight triples and the single-excitation states they prepare, as amplitudes
# over (|e00>, |g10>, |g01>).
_CATALOG_ROWS = (
    ("prototype_w", (2, -1, -1), (1, 1, 1)),
    ("agrawal_w", (math.sqrt(2), -1, -1), (math.sqrt(2), 1, 1)),
    ("common_w", (1, 1, 1), (2, -1, -1)),
    ("bell_pair", (1, 0, -1), (1, 0, 1)),
)


def catalog_w_states(n_max: int = 2) -> list[WStateEntry]:
    """The four cataloged W states with their eta triples.

    Every row is verified at construction against :func:`target_dark_state`;
    a mismatch is a programming error and raises immediately.
    """
    layout = ModeLayout.for_n_max(n_max)
    basis = single_excitation_basis(layout)
    entries = []
    for name, eta, amplitudes in _CATALOG_ROWS:
        expected = canonical_phase(_lift(amplitudes, basis))
        cfg = SystemConfig(
            eta_sigma=eta[0],
            eta_a=eta[1],
            eta_b=eta[2],
            drive=PulseSpec(omega_d=500.0, rabi=0.0),
            n_max=n_max,
        )
        prepared = target_dark_state(cfg).state
        overlap = abs(np.vdot(expected, prepared)) ** 2
        if overlap < 1.0 - 1e-10:
            raise RuntimeError(
                f"catalog row {name}: prepared dark state disagrees with the "
                f"tabulated form (overlap {overlap:.12f})"
            )
        entries.append(WStateEntry(name, tuple(complex(e) for e in eta), expected))
    return entries
