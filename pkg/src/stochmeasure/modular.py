"""Finite-dimensional modular evolution and the KMS condition for Gibbs states.

All exponentials of the Hamiltonian go through its eigendecomposition.  In the
eigenbasis ``Gamma_z(A)_{jk} = e^{i (E_j - E_k) z} A_{jk}`` for complex ``z``,
which covers both real-time evolution and the imaginary shift ``tau + i beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, SamplingError, ValidationError

__all__ = [
    "QuantumSystem",
    "PAULI",
    "as_density_matrix",
    "as_observable",
    "gibbs_state",
    "entropy",
    "expectation",
    "modular_evolve",
    "series_evolve",
    "kms_residual",
    "random_hermitian",
    "random_density_matrix",
    "MaxEntropyReport",
    "max_entropy_check",
    "parse_matrix",
    "matrix_to_json",
    "matrix_from_json",
]

HERMITIAN_TOL = 1e-12
MAX_DIM = 64

PAULI = {
    "pauli-x": np.array([[0, 1], [1, 0]], dtype=complex),
    "pauli-y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "pauli-z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _hermitian(a, what):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{what} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{what} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL * scale:
        raise ValidationError(f"{what} is not Hermitian")
    return a


def as_observable(a):
    return _hermitian(a, "observable")


def as_density_matrix(a, tol=1e-12):
    a = _hermitian(a, "density matrix")
    if abs(np.trace(a).real - 1.0) > tol:
        raise ValidationError(f"density matrix trace is {np.trace(a).real!r}, expected 1")
    if np.linalg.eigvalsh(a).min() < -tol:
        raise ValidationError("density matrix has negative eigenvalues")
    return a


@dataclass(frozen=True, eq=False)
class QuantumSystem:
    """Hermitian Hamiltonian of dimension 2..64 at inverse temperature ``beta``."""

    hamiltonian: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        h = _hermitian(self.hamiltonian, "hamiltonian")
        if not 2 <= h.shape[0] <= MAX_DIM:
            raise ValidationError(f"dimension must lie in 2..{MAX_DIM}, got {h.shape[0]}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValidationError(f"beta must be finite and > 0, got {self.beta}")
        h = 0.5 * (h + h.conj().T)
        h.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    @cached_property
    def spectrum(self):
        """Eigenvalues ``E`` and eigenvector matrix ``V`` (columns)."""
        return np.linalg.eigh(self.hamiltonian)

    def evolve_complex(self, a, z):
        """``e^{i H z} a e^{-i H z}`` for complex ``z``."""
        E, V = self.spectrum
        a_eig = V.conj().T @ a @ V
        phase = np.exp(1j * np.subtract.outer(E, E) * z)
        return V @ (phase * a_eig) @ V.conj().T


def _check_dim(sys: QuantumSystem, *mats):
    for m in mats:
        if m.shape != sys.hamiltonian.shape:
            raise DomainError(f"matrix shape {m.shape} does not match system dimension {sys.dim}")


def gibbs_state(sys: QuantumSystem) -> np.ndarray:
    """``e^{-beta H} / Tr e^{-beta H}``, shifted by the ground energy so it never overflows."""
    E, V = sys.spectrum
    w = np.exp(-sys.beta * (E - E.min()))
    p = w / math.fsum(w)
    return (V * p) @ V.conj().T


def entropy(rho) -> float:
    """von Neumann entropy in nats, with ``0 ln 0 = 0``."""
    rho = _hermitian(rho, "density matrix")
    lam = np.linalg.eigvalsh(rho)
    if lam.min() < -1e-8:
        raise DomainError(f"state has eigenvalue {lam.min():.3g} < 0")
    lam = lam[lam > 0]
    return float(max(0.0, -math.fsum(lam * np.log(lam))))


def _expect(rho, x):
    return np.trace(rho @ x) / np.trace(rho)


def expectation(rho, a, imag_tol=1e-10) -> float:
    """``Tr(rho A) / Tr(rho)`` for a Hermitian ``A``."""
    rho = np.asarray(rho, dtype=complex)
    a = as_observable(a)
    if rho.shape != a.shape:
        raise DomainError(f"state shape {rho.shape} does not match observable {a.shape}")
    val = _expect(rho, a)
    if abs(val.imag) > imag_tol * max(1.0, abs(val.real)):
        raise DomainError(f"expectation has imaginary part {val.imag:.3g}; inputs not Hermitian")
    return float(val.real)


def modular_evolve(sys: QuantumSystem, a, tau: float) -> np.ndarray:
    """Heisenberg evolution ``e^{i H tau} A e^{-i H tau}``."""
    a = as_observable(a)
    _check_dim(sys, a)
    return sys.evolve_complex(a, float(tau))


def series_evolve(sys: QuantumSystem, a, tau: float, order: int) -> np.ndarray:
    """Partial sum ``sum_{k<=order} (i tau)^k / k! [H, A]_k`` of nested commutators."""
    if order < 0:
        raise DomainError("truncation order must be >= 0")
    a = as_observable(a)
    _check_dim(sys, a)
    h = sys.hamiltonian
    term = a.copy()
    total = a.copy()
    for k in range(1, order + 1):
        term = (1j * tau / k) * (h @ term - term @ h)
        total = total + term
    return total


def kms_residual(sys: QuantumSystem, rho, N, M, tau: float) -> float:
    """``|<Gamma_tau(N) M> - <M Gamma_{tau + i beta}(N)>|`` in the state ``rho``.

    Both traces are taken in the energy eigenbasis so the large factors
    ``e^{-beta (E_k - E_l)}`` multiply Boltzmann-weighted entries directly
    instead of being mixed by a basis change.
    """
    rho = np.asarray(rho, dtype=complex)
    N = np.asarray(N, dtype=complex)
    M = np.asarray(M, dtype=complex)
    _check_dim(sys, rho, N, M)
    E, V = sys.spectrum
    Vh = V.conj().T
    rho_e, N_e, M_e = Vh @ rho @ V, Vh @ N @ V, Vh @ M @ V
    gap = np.subtract.outer(E, E)  # gap[k, l] = E_k - E_l
    n_tau = np.exp(1j * gap * tau) * N_e
    n_shift = np.exp(1j * gap * complex(tau, sys.beta)) * N_e
    norm = np.trace(rho_e)
    # Tr(rho Gamma(N) M) and Tr(rho M Gamma(N)) as elementwise sums
    lhs = np.sum((M_e @ rho_e).T * n_tau) / norm
    rhs = np.sum((rho_e @ M_e) * n_shift.T) / norm
    return float(abs(lhs - rhs))


def random_hermitian(dim, rng, scale=1.0):
    """Symmetrized complex Gaussian matrix."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (g + g.conj().T)


def random_density_matrix(dim, rng):
    """``G G^dagger / Tr`` for a complex Ginibre ``G``."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@dataclass(frozen=True)
class MaxEntropyReport:
    samples: int
    gibbs_entropy: float
    max_sampled_entropy: float
    max_energy_error: float

    @property
    def excess(self):
        return self.max_sampled_entropy - self.gibbs_entropy


def _energy_preserving_direction(h, rng):
    """Random Hermitian ``X`` with ``Tr X = 0`` and ``Tr X H = 0``."""
    dim = h.shape[0]
    x = random_hermitian(dim, rng)
    x = x - np.trace(x) / dim * np.eye(dim)
    h0 = h - np.trace(h) / dim * np.eye(dim)
    hh = np.vdot(h0, h0).real
    if hh > 0:
        x = x - (np.vdot(h0, x).real / hh) * h0
    return x


def max_entropy_check(sys: QuantumSystem, samples: int, seed: int, retries: int = 100) -> MaxEntropyReport:
    """Sample states sharing the Gibbs energy and compare their entropy to Gibbs.

    Each sample is ``rho_G + s X`` with ``X`` traceless and orthogonal to
    ``H``; ``s`` is drawn uniformly below the largest value keeping the state
    positive (found by bisection on the smallest eigenvalue).
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    rho_g = gibbs_state(sys)
    h = sys.hamiltonian
    e_g = _expect(rho_g, h).real
    s_g = entropy(rho_g)
    best, worst_err = -math.inf, 0.0
    for _ in range(samples):
        for _attempt in range(retries):
            x = _energy_preserving_direction(h, rng)
            lo, hi = 0.0, 1.0
            while np.linalg.eigvalsh(rho_g + hi * x).min() >= 0:
                hi *= 2.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if np.linalg.eigvalsh(rho_g + mid * x).min() >= 0:
                    lo = mid
                else:
                    hi = mid
            rho = rho_g + rng.uniform(0.0, lo) * x
            err = abs(_expect(rho, h).real - e_g)
            if err <= 1e-6:
                break
        else:
            raise SamplingError(f"could not match the Gibbs energy within 1e-6 after {retries} tries")
        worst_err = max(worst_err, err)
        best = max(best, entropy(rho))
    return MaxEntropyReport(samples, s_g, best, worst_err)


def parse_matrix(text) -> np.ndarray:
    """``pauli-x|y|z`` or ``diag:a,b,...``."""
    text = str(text).strip()
    if text.lower() in PAULI:
        return PAULI[text.lower()].copy()
    if text.lower().startswith("diag:"):
        try:
            vals = [float(v) for v in text[5:].split(",")]
        except ValueError:
            raise ValidationError(f"bad diagonal preset {text!r}") from None
        return np.diag(vals).astype(complex)
    raise ValidationError(f"unknown matrix preset {text!r}; use pauli-x|y|z or diag:a,b,...")


def matrix_to_json(a):
    """Row-major nested list of ``[re, im]`` pairs."""
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(doc) -> np.ndarray:
    arr = np.asarray(doc, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValidationError("matrix JSON must be rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]
