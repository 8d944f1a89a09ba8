"""Reduced-field observables of a branch state.

Momentum-averaged overlaps, atomic inversion, the two-branch field entropy,
the Husimi Q quasiprobability on a phase-space grid, peak analysis of Q for
bimodality (cat) detection, and fidelity against the analytic cat ansatz.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import BranchState, PhysicalParams, coherent_amplitudes

NORM_SLACK = 1e-3
DISC_SLACK = 1e-9


@dataclass(frozen=True)
class OverlapTriple:
    """Momentum-averaged branch overlaps: <C|C>, <D|D>, <C|D>."""

    cc: float
    dd: float
    cd: complex


@dataclass(frozen=True)
class EntropyPair:
    """Eigenvalues of the reduced field density matrix and its entropy."""

    pi_plus: float
    pi_minus: float
    s_f: float


@dataclass(frozen=True)
class QGridSpec:
    """Axis-aligned phase-space window [xmin, xmax] x [ymin, ymax]."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.xmax <= self.xmin or self.ymax <= self.ymin:
            raise ValueError("grid extents must be increasing")
        if self.nx < 3 or self.ny < 3:
            raise ValueError("grids need at least 3 points per axis")


@dataclass(frozen=True)
class QGrid:
    """Husimi Q samples; values[iy, ix] = Q(x[ix] + i y[iy])."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class QPeakReport:
    """Local-maximum census of a Q grid.

    Peak locations/heights are refined on a quadratic fit to the 3x3
    neighbourhood; widths are RMS half-widths from the fitted curvature.
    ``bimodal`` requires exactly two peaks, a secondary/primary height ratio
    of at least 0.5, and a separation of at least twice the mean width.
    """

    count: int
    locations: list = field(default_factory=list)
    heights: list = field(default_factory=list)
    widths: list = field(default_factory=list)
    separation: float = 0.0
    height_ratio: float = 0.0
    bimodal: bool = False


def overlaps(state: BranchState) -> OverlapTriple:
    """Momentum-weighted overlaps of the two field branches.

    The branch arrays share the Fock axis, so the cross term is the plain
    inner product; through the one-level ladder shift it pairs the n-th
    excited amplitude with the (n+1)-th ground amplitude.
    """
    wk = state.grid.weights
    cc = float(np.dot(wk, np.sum(np.abs(state.c) ** 2, axis=1)))
    dd = float(np.dot(wk, np.sum(np.abs(state.d) ** 2, axis=1)))
    cd = complex(np.dot(wk, np.sum(np.conj(state.c) * state.d, axis=1)))
    return OverlapTriple(cc=cc, dd=dd, cd=cd)


def inversion(o: OverlapTriple) -> float:
    """Atomic population inversion W = <C|C> - <D|D>."""
    return o.cc - o.dd


def entropy(o: OverlapTriple) -> EntropyPair:
    """Von Neumann entropy of the reduced field state.

    The reduced density matrix has rank two; its eigenvalues are
    pi_pm = 1/2 (1 pm sqrt(1 - 4 (cc dd - |cd|^2))).  Overlaps are
    renormalized when the total strays from 1 by less than 1e-3 and rejected
    beyond that; the discriminant may leave [0, 1] only by rounding noise.
    """
    total = o.cc + o.dd
    if abs(total - 1.0) > NORM_SLACK:
        raise ValueError(f"branch norms sum to {total}, too far from 1")
    cc = o.cc / total
    dd = o.dd / total
    cd2 = abs(o.cd) ** 2 / total**2
    disc = 1.0 - 4.0 * (cc * dd - cd2)
    if disc < -DISC_SLACK or disc > 1.0 + DISC_SLACK:
        raise ValueError(f"entropy discriminant {disc} outside [0, 1]")
    disc = min(max(disc, 0.0), 1.0)
    root = math.sqrt(disc)
    pi_plus = 0.5 * (1.0 + root)
    pi_minus = 0.5 * (1.0 - root)
    s = 0.0
    for lam in (pi_plus, pi_minus):
        if lam > 0.0:
            s -= lam * math.log(lam)
    return EntropyPair(pi_plus=pi_plus, pi_minus=pi_minus, s_f=s)


def q_function(state: BranchState, spec: QGridSpec, params: PhysicalParams) -> QGrid:
    """Husimi Q(beta) = (1/pi) sum_k w_k (|<beta|C_k>|^2 + |<beta|D_k>|^2).

    The window must cover the coherent disk (half-width at least |alpha| + 4)
    so the quasiprobability mass is captured; significant weight on the
    boundary ring triggers a warning.
    """
    half_x = max(abs(spec.xmin), abs(spec.xmax))
    half_y = max(abs(spec.ymin), abs(spec.ymax))
    need = abs(params.alpha) + 4.0
    if half_x < need or half_y < need:
        raise ValueError(
            f"grid half-width must reach |alpha| + 4 = {need:.1f} on both axes"
        )
    x = np.linspace(spec.xmin, spec.xmax, spec.nx)
    y = np.linspace(spec.ymin, spec.ymax, spec.ny)
    nfock = state.nfock
    # <beta|n> = e^{-|b|^2/2} conj(b)^n / sqrt(n!) on the full grid at once
    bx, by = np.meshgrid(x, y)
    beta = bx + 1j * by
    conj_pow = np.ones(beta.shape + (nfock,), dtype=np.complex128)
    bc = np.conj(beta)
    inv_sqrt = 1.0 / np.sqrt(np.arange(1, nfock))
    for n in range(nfock - 1):
        conj_pow[..., n + 1] = conj_pow[..., n] * bc * inv_sqrt[n]
    gauss = np.exp(-0.5 * np.abs(beta) ** 2)
    vals = np.zeros(beta.shape)
    for k, wk in enumerate(state.grid.weights):
        amp_c = conj_pow @ state.c[k]
        amp_d = conj_pow @ state.d[k]
        vals += wk * (np.abs(amp_c) ** 2 + np.abs(amp_d) ** 2)
    vals *= gauss**2 / math.pi
    edge = np.concatenate([vals[0, :], vals[-1, :], vals[:, 0], vals[:, -1]])
    if edge.max() > 1e-6 * vals.max():
        warnings.warn(
            "Q-function mass on the window boundary; enlarge the grid",
            stacklevel=2,
        )
    return QGrid(x=x, y=y, values=vals)


def _refine_peak(q: QGrid, iy: int, ix: int) -> tuple[complex, float, float]:
    """Quadratic fit on the 3x3 stencil; returns (location, height, width)."""
    dx = q.x[1] - q.x[0]
    dy = q.y[1] - q.y[0]
    patch = q.values[iy - 1 : iy + 2, ix - 1 : ix + 2]
    ii, jj = np.meshgrid([-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], indexing="ij")
    a_mat = np.stack(
        [np.ones(9), jj.ravel(), ii.ravel(), jj.ravel() ** 2,
         ii.ravel() ** 2, (ii * jj).ravel()], axis=1
    )
    coef, *_ = np.linalg.lstsq(a_mat, patch.ravel(), rcond=None)
    c0, cx, cy, cxx, cyy, cxy = coef
    hess = np.array([[2 * cxx, cxy], [cxy, 2 * cyy]])
    grad = np.array([cx, cy])
    try:
        off = -np.linalg.solve(hess, grad)
    except np.linalg.LinAlgError:
        off = np.zeros(2)
    off = np.clip(off, -1.0, 1.0)
    height = float(c0 + grad @ off + 0.5 * off @ hess @ off)
    loc = complex(q.x[ix] + off[0] * dx, q.y[iy] + off[1] * dy)
    # curvature in physical units; RMS width of the osculating Gaussian
    scale = np.diag([1.0 / dx, 1.0 / dy])
    hphys = scale @ hess @ scale
    eigs = np.linalg.eigvalsh(hphys)
    eigs = np.abs(eigs[eigs < 0])
    if eigs.size == 0 or height <= 0:
        width = 0.0
    else:
        width = float(np.mean(np.sqrt(height / eigs)))
    return loc, height, width


def q_peak_analysis(q: QGrid, rel_threshold: float = 0.05) -> QPeakReport:
    """Census of interior local maxima above rel_threshold * max(Q).

    A grid point is a peak when it strictly exceeds all eight neighbours.
    Bimodality additionally needs a height ratio >= 0.5 and a separation of
    at least twice the mean refined width.
    """
    v = q.values
    cut = rel_threshold * float(v.max())
    inner = v[1:-1, 1:-1]
    mask = inner > cut
    for sy in (-1, 0, 1):
        for sx in (-1, 0, 1):
            if sy == 0 and sx == 0:
                continue
            mask &= inner > v[1 + sy : v.shape[0] - 1 + sy,
                              1 + sx : v.shape[1] - 1 + sx]
    iys, ixs = np.nonzero(mask)
    locs, heights, widths = [], [], []
    for iy, ix in zip(iys + 1, ixs + 1):
        loc, h, wid = _refine_peak(q, iy, ix)
        locs.append(loc)
        heights.append(h)
        widths.append(wid)
    order = np.argsort(heights)[::-1]
    locs = [locs[i] for i in order]
    heights = [heights[i] for i in order]
    widths = [widths[i] for i in order]
    count = len(locs)
    sep = 0.0
    ratio = 0.0
    bimodal = False
    if count == 2:
        sep = abs(locs[0] - locs[1])
        ratio = heights[1] / heights[0] if heights[0] > 0 else 0.0
        mean_w = 0.5 * (widths[0] + widths[1])
        bimodal = ratio >= 0.5 and sep >= 2.0 * mean_w > 0.0
    return QPeakReport(
        count=count,
        locations=locs,
        heights=heights,
        widths=widths,
        separation=sep,
        height_ratio=ratio,
        bimodal=bimodal,
    )


def cat_fidelity(
    state: BranchState,
    t: float,
    params: PhysicalParams,
    field_ansatz: str = "linear_n",
) -> float:
    """Overlap with the separable cat-time ansatz (|e> + i|g>)/sqrt(2) x |psi_f>.

    ``field_ansatz`` selects |psi_f>: "linear_n" weights the initial coherent
    amplitudes by the photon number, n w_n (normalized); "coherent" keeps the
    bare coherent tail w_n.  Fidelity is the momentum-weighted squared
    projection, 1 exactly when the state equals the ansatz.
    """
    nfock = state.nfock
    w = coherent_amplitudes(params.alpha, nfock - 1).w
    if field_ansatz == "linear_n":
        psi = np.arange(nfock) * w
    elif field_ansatz == "coherent":
        psi = w.copy()
    else:
        raise ValueError(f"unknown field ansatz {field_ansatz!r}")
    nrm = math.sqrt(float(np.sum(np.abs(psi) ** 2)))
    if nrm == 0.0:
        raise ValueError("field ansatz has zero norm")
    psi = psi / nrm
    proj_c = state.c @ np.conj(psi)
    proj_d = state.d @ np.conj(psi)
    amp = (proj_c - 1j * proj_d) / math.sqrt(2.0)
    return float(np.dot(state.grid.weights, np.abs(amp) ** 2))
