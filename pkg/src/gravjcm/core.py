"""Domain types shared by both solver backends.

Physical parameters, the coherent-field initial amplitudes, the Gauss-Hermite
discretization of the center-of-mass momentum wavepacket, and the per-node
branch-amplitude container.

Unit conventions: all rates (coupling, detuning, recoil frequency) are in
rad/s, the gravity knob ``qg`` is in rad/s^2, and the scalar momentum label
``p`` is dimensionless.  A physical momentum is recovered as ``p * p_unit``
with ``p_unit`` defaulting to one photon recoil (hbar*q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

HBAR = 1.054571817e-34  # J s

TRUNCATION_EPS = 1e-12


class TruncationError(ValueError):
    """Fock-space cutoff too small for the requested coherent amplitude."""


@dataclass(frozen=True)
class PhysicalParams:
    """Experiment constants for one run.

    q          running-wave wavenumber, 1/m
    mass       atomic mass, kg
    qg         gravity knob q.g, rad/s^2
    lam        atom-field coupling, rad/s
    omega_rec  recoil frequency hbar*q^2/(2*mass), rad/s
    delta0     static detuning, rad/s
    sigma0     momentum wavepacket width (dimensionless scaled momentum)
    alpha      coherent amplitude of the initial field
    p_unit     momentum scale converting the dimensionless p label to kg m/s
    """

    q: float
    mass: float
    qg: float
    lam: float
    omega_rec: float
    delta0: float
    sigma0: float
    alpha: complex
    p_unit: float = 0.0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("coupling lam must be positive")
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        if self.qg < 0:
            raise ValueError("qg must be nonnegative")
        if not np.isfinite(abs(self.alpha) ** 2):
            raise ValueError("|alpha|^2 must be finite")
        if self.q > 0 and self.mass > 0:
            derived = HBAR * self.q**2 / (2.0 * self.mass)
            if abs(derived - self.omega_rec) > 1e-12 * abs(self.omega_rec):
                raise ValueError(
                    "omega_rec inconsistent with hbar*q^2/(2*mass): "
                    f"{self.omega_rec} vs {derived}"
                )
        if self.p_unit == 0.0:
            object.__setattr__(self, "p_unit", HBAR * self.q)


def paper_defaults(qg: float = 0.0, **overrides) -> PhysicalParams:
    """Canonical parameter set of the reference experiment.

    q = 1e7 1/m, omega_rec = 0.5e6 rad/s, lam = 1e6 rad/s, sigma0 = 1,
    delta0 = 8.5e7 rad/s, alpha = 5 (mean photon number 25).  The atomic mass
    is derived from (q, omega_rec) so the recoil-consistency invariant holds
    exactly; it lands at 1.05e-26 kg, the quoted 1e-26 kg rounded.
    """
    kw = dict(
        q=1e7,
        omega_rec=0.5e6,
        qg=qg,
        lam=1e6,
        delta0=8.5e7,
        sigma0=1.0,
        alpha=5.0 + 0.0j,
    )
    kw.update(overrides)
    if "mass" not in kw:
        kw["mass"] = HBAR * kw["q"] ** 2 / (2.0 * kw["omega_rec"])
    return PhysicalParams(**kw)


@dataclass(frozen=True)
class CoherentField:
    """Truncated coherent-state amplitudes w_n = e^{-|a|^2/2} a^n / sqrt(n!)."""

    nmax: int
    w: np.ndarray

    def __post_init__(self):
        if self.w.shape != (self.nmax + 1,):
            raise ValueError("amplitude array must have nmax+1 entries")


def coherent_amplitudes(alpha: complex, nmax: int) -> CoherentField:
    """Coherent-state Fock amplitudes via the stable ratio recursion.

    w_{n+1} = w_n * alpha / sqrt(n+1), seeded with w_0 = e^{-|alpha|^2/2},
    which avoids factorial overflow at large n.  Raises TruncationError when
    the retained probability falls short of 1 - 1e-12.
    """
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    alpha = complex(alpha)
    w = np.empty(nmax + 1, dtype=np.complex128)
    w[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(nmax):
        w[n + 1] = w[n] * alpha / math.sqrt(n + 1)
    total = float(np.sum(np.abs(w) ** 2))
    if total < 1.0 - TRUNCATION_EPS:
        raise TruncationError(
            f"nmax={nmax} retains only {total:.15f} of the coherent state; "
            "increase the cutoff"
        )
    return CoherentField(nmax=nmax, w=w)


def adaptive_nmax(alpha: complex, eps: float = TRUNCATION_EPS) -> int:
    """Smallest cutoff with Poisson tail mass below eps, floored at 4|alpha|^2.

    The excitation number is conserved block by block, so no population can
    leak above the initially occupied subspace; the floor keeps a generous
    margin for the n+1 ground-branch shift.
    """
    nbar = abs(alpha) ** 2
    if nbar == 0.0:
        return 0
    # Complementary tail of the Poisson distribution, accumulated in log space.
    logp = -nbar
    cum = math.exp(logp)
    n = 0
    while 1.0 - cum >= eps and n < 100000:
        n += 1
        logp += math.log(nbar) - math.log(n)
        cum += math.exp(logp)
    return max(n, math.ceil(4.0 * nbar))


@dataclass(frozen=True)
class MomentumGrid:
    """Quadrature nodes and probability weights for the p wavepacket."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        s = float(np.sum(self.weights))
        if abs(s - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {s}")


def build_momentum_grid(sigma0: float, n_nodes: int) -> MomentumGrid:
    """Gauss-Hermite rule for the Gaussian measure |phi(p)|^2 ~ exp(-2p^2/sigma0^2).

    Substituting x = sqrt(2) p / sigma0 maps the measure onto the standard
    Hermite weight exp(-x^2); the rule is then exact for polynomials in p up
    to degree 2*n_nodes - 1.  Weights are renormalized to unit sum (the
    published wavepacket prefactor does not square-integrate to 1; we keep
    the shape and fix the normalization).
    """
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    if sigma0 <= 0:
        raise ValueError("sigma0 must be positive")
    x, v = np.polynomial.hermite.hermgauss(n_nodes)
    nodes = x * sigma0 / math.sqrt(2.0)
    weights = v / np.sum(v)
    if n_nodes == 1:
        nodes = np.zeros(1)
    return MomentumGrid(nodes=nodes, weights=weights)


@dataclass(frozen=True)
class BranchState:
    """Per-node, per-Fock-level amplitudes of the two atomic branches.

    ``c[k, n]`` is the excited-branch amplitude on Fock level n at momentum
    node k; ``d[k, n]`` the ground-branch amplitude.  Both arrays share the
    Fock axis (length nmax + 2) so that d[k, 0] = 0 and the ground branch can
    hold the one-level shift of the excitation ladder.
    """

    t: float
    c: np.ndarray
    d: np.ndarray
    grid: MomentumGrid
    meta: dict = field(default_factory=dict)

    @property
    def nfock(self) -> int:
        return self.c.shape[1]

    def norm(self) -> float:
        """Momentum-weighted total probability on both branches."""
        per_node = np.sum(np.abs(self.c) ** 2 + np.abs(self.d) ** 2, axis=1)
        return float(np.dot(self.grid.weights, per_node))
