"""Disintegrated measures on Sigma = [0,1] x K and their norms.

A measure is stored as a marginal density over base cells (with respect to
either the conformal measure nu or the invariant measure m) together with
one atomic fiber measure per cell, attached at the cell midpoint.  For a
positive measure the fibers are probabilities and the restriction to the
leaf over cell j is phi1[j] * fiber[j]; signed measures produced by
operator arithmetic store the per-cell restrictions directly (the
restriction does not depend on the chosen decomposition, so this loses
nothing).

The four norms:
    L1   = sum_j nu_j * ||restriction_j||_o          (nu-referenced)
    Linf = max over m_j > 0 of ||restriction_j||_o   (m-referenced)
    S1   = |phi1|_zeta + L1,   Sinf = |phi1|_zeta + Linf,
with |phi1|_zeta the discrete Holder norm of the marginal density and
||.||_o the dual norm of the fiber module.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .baserpf import RPFDiscretization, discrete_holder_constant
from .dualnorm import _as_zeta, norm_value, distance_value
from .measures import AtomicSignedMeasure, canonicalize, zero_measure

__all__ = [
    "DisintegratedMeasure",
    "Observable",
    "l1_norm",
    "linf_norm",
    "s1_norm",
    "sinf_norm",
    "holder_constant",
    "disintegration_holder",
    "multiply_observable",
    "integrate",
    "product_measure",
    "convert_reference",
    "linf_distance",
    "l1_distance",
]


@dataclass(frozen=True)
class DisintegratedMeasure:
    """Marginal density plus one fiber measure per base cell.

    ``normalized`` selects the storage convention: True means fibers have
    unit mass and the restriction over cell j is phi1[j] * fibers[j]
    (positive measures and observable products); False means the fibers
    are the restrictions themselves and phi1[j] equals their mass.
    """

    x: np.ndarray
    ref_masses: np.ndarray
    phi1: np.ndarray
    fibers: tuple[AtomicSignedMeasure, ...]
    reference: str  # "nu" | "m"
    zeta: float = 1.0
    normalized: bool = True

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        rm = np.asarray(self.ref_masses, dtype=float)
        p1 = np.asarray(self.phi1, dtype=float)
        fibers = tuple(self.fibers)
        if not (x.size == rm.size == p1.size == len(fibers)):
            raise ValueError("x, ref_masses, phi1 and fibers must have equal length")
        if self.reference not in ("nu", "m"):
            raise ValueError(f"reference must be 'nu' or 'm', got {self.reference!r}")
        for arr in (x, rm, p1):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "ref_masses", rm)
        object.__setattr__(self, "phi1", p1)
        object.__setattr__(self, "fibers", fibers)
        object.__setattr__(self, "zeta", _as_zeta(self.zeta))

    @property
    def n(self) -> int:
        return int(self.x.size)

    def restriction(self, j: int) -> AtomicSignedMeasure:
        """The fiber restriction mu|_gamma over cell j."""
        if self.normalized:
            return float(self.phi1[j]) * self.fibers[j]
        return self.fibers[j]

    def restrictions(self) -> list[AtomicSignedMeasure]:
        return [self.restriction(j) for j in range(self.n)]

    def total_mass(self) -> float:
        return float(np.dot(self.ref_masses, self.phi1))

    def is_positive(self) -> bool:
        if np.any(self.phi1 < 0):
            return False
        return all(np.all(f.weights >= 0) for f in self.fibers)

    def scaled(self, c: float) -> "DisintegratedMeasure":
        if self.normalized:
            return replace(self, phi1=c * self.phi1)
        return replace(
            self, phi1=c * self.phi1, fibers=tuple(c * f for f in self.fibers)
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "reference": self.reference,
            "zeta": self.zeta,
            "normalized": self.normalized,
            "x": self.x.tolist(),
            "ref_masses": self.ref_masses.tolist(),
            "phi1": self.phi1.tolist(),
            "fibers": [f.to_pairs() for f in self.fibers],
        }

    @staticmethod
    def from_dict(d: dict) -> "DisintegratedMeasure":
        fibers = tuple(AtomicSignedMeasure.from_pairs(p) for p in d["fibers"])
        return DisintegratedMeasure(
            x=np.asarray(d["x"], dtype=float),
            ref_masses=np.asarray(d["ref_masses"], dtype=float),
            phi1=np.asarray(d["phi1"], dtype=float),
            fibers=fibers,
            reference=d["reference"],
            zeta=d.get("zeta", 1.0),
            normalized=d.get("normalized", True),
        )


@dataclass(frozen=True)
class Observable:
    """A function on Sigma with a declared zeta-Holder bound.

    ``holder_bound`` is |s|_zeta = H_zeta(s) + |s|_inf for the max metric
    on the product space; it must dominate every sampled quotient, which
    Observable.from_callable guarantees by construction.
    """

    fn: Callable[[float, np.ndarray], np.ndarray]
    zeta: float = 1.0
    holder_bound: float = np.inf
    name: str = "observable"

    def __call__(self, x, y):
        return self.fn(x, y)

    @staticmethod
    def from_callable(fn, zeta=1.0, gridsize: int = 48, name: str = "observable"):
        """Wrap a callable, estimating |s|_zeta on a product grid."""
        z = _as_zeta(zeta)
        xs = (np.arange(gridsize) + 0.5) / gridsize
        vals = np.empty((gridsize, gridsize))
        for i, xv in enumerate(xs):
            vals[i] = np.asarray(fn(float(xv), xs), dtype=float)
        pts_x = np.repeat(xs, gridsize)
        pts_y = np.tile(xs, gridsize)
        flat = vals.ravel()
        dx = np.abs(pts_x[:, None] - pts_x[None, :])
        dy = np.abs(pts_y[:, None] - pts_y[None, :])
        dist = np.maximum(dx, dy) ** z
        np.fill_diagonal(dist, np.inf)
        hoelder = float(np.max(np.abs(flat[:, None] - flat[None, :]) / dist))
        bound = hoelder + float(np.max(np.abs(flat)))
        return Observable(fn=fn, zeta=z, holder_bound=bound, name=name)

    @staticmethod
    def constant(c: float, zeta=1.0):
        return Observable(
            fn=lambda x, y, _c=float(c): np.full_like(np.asarray(y, dtype=float), _c),
            zeta=_as_zeta(zeta),
            holder_bound=abs(float(c)),
            name=f"const({c:g})",
        )

    @staticmethod
    def coord_y(zeta=1.0):
        return Observable(
            fn=lambda x, y: np.asarray(y, dtype=float),
            zeta=_as_zeta(zeta),
            holder_bound=2.0,
            name="y",
        )

    @staticmethod
    def coord_x(zeta=1.0):
        return Observable(
            fn=lambda x, y: np.full_like(np.asarray(y, dtype=float), float(x)),
            zeta=_as_zeta(zeta),
            holder_bound=2.0,
            name="x",
        )


def _fiber_eval(obs, x: float, mu: AtomicSignedMeasure) -> float:
    """Integral of obs(x, .) against an atomic fiber measure."""
    if mu.n_atoms == 0:
        return 0.0
    fn = obs.fn if isinstance(obs, Observable) else obs
    return float(np.dot(mu.weights, np.asarray(fn(x, mu.positions), dtype=float)))


def l1_norm(dm: DisintegratedMeasure, zeta=None) -> float:
    """Integral of the fiber dual norms against nu."""
    if dm.reference != "nu":
        raise ValueError("l1_norm needs a nu-referenced measure; convert first")
    z = dm.zeta if zeta is None else _as_zeta(zeta)
    return float(
        sum(
            rmj * norm_value(dm.restriction(j), z)
            for j, rmj in enumerate(dm.ref_masses)
            if rmj > 0
        )
    )


def linf_norm(dm: DisintegratedMeasure, zeta=None) -> float:
    """Largest fiber dual norm over cells of positive m-mass."""
    if dm.reference != "m":
        raise ValueError("linf_norm needs an m-referenced measure; convert first")
    z = dm.zeta if zeta is None else _as_zeta(zeta)
    vals = [
        norm_value(dm.restriction(j), z)
        for j in range(dm.n)
        if dm.ref_masses[j] > 0
    ]
    return float(max(vals)) if vals else 0.0


def holder_constant(values: Sequence[float], zeta=1.0, positions=None) -> float:
    """All-pairs discrete Holder constant of per-cell values.

    Positions default to the cell midpoints (i + 0.5) / n.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return 0.0
    if positions is None:
        positions = (np.arange(v.size) + 0.5) / v.size
    return discrete_holder_constant(np.asarray(positions, dtype=float), v, _as_zeta(zeta))


def _phi1_strong(dm: DisintegratedMeasure, z: float) -> float:
    return holder_constant(dm.phi1, z, dm.x) + float(np.max(np.abs(dm.phi1))) if dm.n else 0.0


def s1_norm(dm: DisintegratedMeasure, zeta=None) -> float:
    z = dm.zeta if zeta is None else _as_zeta(zeta)
    return _phi1_strong(dm, z) + l1_norm(dm, z)


def sinf_norm(dm: DisintegratedMeasure, zeta=None) -> float:
    z = dm.zeta if zeta is None else _as_zeta(zeta)
    return _phi1_strong(dm, z) + linf_norm(dm, z)


def disintegration_holder(dm: DisintegratedMeasure, zeta=None) -> float:
    """Holder constant of the disintegration path gamma -> mu|_gamma.

    Max over cell pairs of the fiber dual distance divided by the midpoint
    distance to the power zeta.  Defined for positive measures only.
    """
    if not dm.is_positive():
        raise ValueError("disintegration Holder constant is defined for positive measures")
    z = dm.zeta if zeta is None else _as_zeta(zeta)
    idx = [j for j in range(dm.n) if dm.ref_masses[j] > 0]
    restr = {j: dm.restriction(j) for j in idx}
    best = 0.0
    for a in range(len(idx)):
        i = idx[a]
        for b in range(a + 1, len(idx)):
            j = idx[b]
            d = distance_value(restr[i], restr[j], z)
            best = max(best, d / abs(dm.x[i] - dm.x[j]) ** z)
    return best


def multiply_observable(dm: DisintegratedMeasure, s) -> DisintegratedMeasure:
    """The signed measure s * mu for a positive probability-fibered mu.

    The new marginal is sbar(gamma_j) = integral of s(x_j, .) against the
    restriction; each new fiber reweights the old atoms by s and is scaled
    back to unit mass, so the restriction equals s restricted to the leaf.
    Cells where sbar vanishes get the zero fiber.
    """
    if not dm.normalized:
        raise ValueError("multiply_observable expects probability-fibered storage")
    fn = s.fn if isinstance(s, Observable) else s
    new_phi1 = np.empty(dm.n)
    new_fibers: list[AtomicSignedMeasure] = []
    for j in range(dm.n):
        fib = dm.fibers[j]
        if fib.n_atoms == 0:
            new_phi1[j] = 0.0
            new_fibers.append(zero_measure())
            continue
        sv = np.asarray(fn(float(dm.x[j]), fib.positions), dtype=float)
        z_j = float(np.dot(fib.weights, sv))
        sbar = float(dm.phi1[j]) * z_j
        if sbar == 0.0:
            new_phi1[j] = 0.0
            new_fibers.append(zero_measure())
            continue
        new_phi1[j] = sbar
        new_fibers.append(
            canonicalize(AtomicSignedMeasure(fib.positions, fib.weights * sv / z_j))
        )
    return replace(dm, phi1=new_phi1, fibers=tuple(new_fibers))


def integrate(dm: DisintegratedMeasure, g) -> float:
    """Integral of an observable: sum_j ref_j * <restriction_j, g(x_j, .)>."""
    total = 0.0
    for j in range(dm.n):
        rmj = float(dm.ref_masses[j])
        if rmj == 0.0:
            continue
        total += rmj * _fiber_eval(g, float(dm.x[j]), dm.restriction(j))
    return total


def product_measure(
    base_density,
    fiber: AtomicSignedMeasure,
    *,
    rpf: RPFDiscretization,
    reference: str = "m",
    zeta=1.0,
) -> DisintegratedMeasure:
    """Constant-path disintegration: the same fiber over every cell."""
    if abs(fiber.total_mass() - 1.0) > 1e-10:
        raise ValueError("product_measure expects a probability fiber")
    dens = np.asarray(base_density, dtype=float)
    if dens.ndim == 0:
        dens = np.full(rpf.n, float(dens))
    ref = rpf.nu if reference == "nu" else rpf.m
    return DisintegratedMeasure(
        x=rpf.x,
        ref_masses=ref.copy(),
        phi1=dens,
        fibers=tuple([fiber] * rpf.n),
        reference=reference,
        zeta=zeta,
        normalized=True,
    )


def convert_reference(
    dm: DisintegratedMeasure, rpf: RPFDiscretization, to: str
) -> DisintegratedMeasure:
    """Re-express the marginal density with respect to the other reference.

    The underlying measure is unchanged; densities divide or multiply by
    the eigenfunction h (m = h nu), and restriction-stored fibers rescale
    with them.
    """
    if to not in ("nu", "m"):
        raise ValueError("target reference must be 'nu' or 'm'")
    if dm.reference == to:
        return dm
    factor = 1.0 / rpf.h if to == "m" else rpf.h
    ref = rpf.nu if to == "nu" else rpf.m
    phi1 = dm.phi1 * factor
    if dm.normalized:
        fibers = dm.fibers
    else:
        fibers = tuple(float(factor[j]) * dm.fibers[j] for j in range(dm.n))
    return replace(
        dm, phi1=phi1, fibers=fibers, ref_masses=ref.copy(), reference=to
    )


def linf_distance(a: DisintegratedMeasure, b: DisintegratedMeasure, zeta=None) -> float:
    """m-essential sup of the fiber dual distances between two measures."""
    z = a.zeta if zeta is None else _as_zeta(zeta)
    best = 0.0
    for j in range(a.n):
        if a.ref_masses[j] <= 0:
            continue
        best = max(best, distance_value(a.restriction(j), b.restriction(j), z))
    return best


def l1_distance(a: DisintegratedMeasure, b: DisintegratedMeasure, zeta=None) -> float:
    """nu-average of the fiber dual distances between two measures."""
    z = a.zeta if zeta is None else _as_zeta(zeta)
    return float(
        sum(
            a.ref_masses[j] * distance_value(a.restriction(j), b.restriction(j), z)
            for j in range(a.n)
            if a.ref_masses[j] > 0
        )
    )
