"""Skew-product transfer operators and the equilibrium-state pipeline.

The skew product F(x, y) = (f(x), G(x, y)) acts on disintegrated measures
through two operators built on the base RPF discretization:

* the plain operator on nu-referenced measures, whose marginal action is
  the raw transfer matrix and whose fibers are branch-weighted pushforward
  sums with weights exp(phi(y_i));
* the normalized h-twisted operator on m-referenced measures, whose branch
  weights h(y_i) exp(phi(y_i)) / (lambda h(x)) are row-normalized exactly,
  so probabilities stay probabilities to machine precision.

Iterating the normalized operator from any probability converges to the
equilibrium state geometrically; the module measures the rate, estimates
the spectral gap on zero-average measures, and carries the regularity
bookkeeping for the disintegration Holder constant.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .baserpf import (
    Potential,
    RPFDiscretization,
    check_hypotheses,
    discrete_holder_constant,
    spectral_radius_on_kernel,
)
from .disint import (
    DisintegratedMeasure,
    Observable,
    linf_distance,
    l1_norm,
    s1_norm,
    sinf_norm,
)
from .dualnorm import _as_zeta
from .measures import (
    AtomicSignedMeasure,
    canonicalize,
    compress_to_cap,
    dirac,
    uniform_atoms,
    zero_measure,
)

__all__ = [
    "FiberMap",
    "SkewSystem",
    "ConvergenceReport",
    "GapReport",
    "RegularityBound",
    "apply_F_phi",
    "apply_F_phih_normalized",
    "iterate_to_equilibrium",
    "estimate_spectral_gap",
    "check_class_S",
    "reduce_potential",
    "verify_LY_S1",
    "regularity_constants",
    "initial_product",
]

DEFAULT_COMPRESS_DELTA = 1e-4
DEFAULT_ATOM_CAP = 64

# Any probability works on zero-marginal leaves (they carry no weight);
# a fixed uniform cloud keeps runs deterministic.
FALLBACK_FIBER_ATOMS = 16


@dataclass(frozen=True)
class FiberMap:
    """Fiber dynamics G(x, .): K -> K with declared contraction data.

    ``fn`` must be vectorized in y.  ``alpha`` bounds the fiber contraction
    |G(x, z1) - G(x, z2)| <= alpha |z1 - z2| and ``g_holder`` the
    per-branch x-Holder constant sup_y |G(x1, y) - G(x2, y)| / d(x1,x2)**zeta.
    """

    fn: Callable[[float, np.ndarray], np.ndarray]
    alpha: float
    g_holder: float = 0.0
    name: str = "fiber"

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"contraction factor must lie in [0, 1), got {self.alpha}")

    def __call__(self, x: float, y: np.ndarray) -> np.ndarray:
        return self.fn(x, y)


@dataclass(frozen=True)
class SkewSystem:
    """Base map, fiber map, potential and the Holder exponent in force."""

    base: BaseMap
    fiber: FiberMap
    potential: Potential
    zeta: float = 1.0
    name: str = "skew"

    def __post_init__(self):
        object.__setattr__(self, "zeta", _as_zeta(self.zeta))

    @property
    def alpha(self) -> float:
        return self.fiber.alpha

    @property
    def alpha_zeta(self) -> float:
        return self.alpha**self.zeta

    @property
    def regularity_precondition(self) -> float:
        """(alpha * L)**zeta with L the global inverse-Lipschitz bound."""
        return (self.alpha * self.base.lip_max) ** self.zeta

    def sampled_invariants(self, samples: int = 200, seed: int = 0) -> dict:
        """Spot-check the declared contraction and fiber-Holder bounds."""
        rng = np.random.default_rng(seed)
        worst_contract = 0.0
        for _ in range(samples):
            x = float(rng.uniform())
            z = rng.uniform(0, 1, size=2)
            d = abs(z[1] - z[0])
            if d < 1e-12:
                continue
            gz = self.fiber(x, z)
            worst_contract = max(worst_contract, abs(gz[1] - gz[0]) / d)
        worst_holder = 0.0
        for b in self.base.branches:
            xs = rng.uniform(b.lo, b.hi, size=samples)
            ys = rng.uniform(0, 1, size=8)
            vals = np.array([self.fiber(float(x), ys) for x in xs])
            for a in range(samples - 1):
                dx = abs(xs[a + 1] - xs[a])
                if dx < 1e-9:
                    continue
                q = float(np.max(np.abs(vals[a + 1] - vals[a]))) / dx**self.zeta
                worst_holder = max(worst_holder, q)
        return {
            "contraction_quotient": worst_contract,
            "alpha": self.alpha,
            "contraction_ok": worst_contract <= self.alpha + 1e-9,
            "fiber_holder_quotient": worst_holder,
            "g_holder": self.fiber.g_holder,
            "fiber_holder_ok": worst_holder <= self.fiber.g_holder + 1e-9,
            "alpha_l_zeta": self.regularity_precondition,
        }


def _fallback_fiber() -> AtomicSignedMeasure:
    return uniform_atoms(FALLBACK_FIBER_ATOMS)


def _combine_fibers(
    sys: SkewSystem,
    rpf: RPFDiscretization,
    dm: DisintegratedMeasure,
    branch_weights: np.ndarray,
    delta: float,
    cap: int,
) -> list[AtomicSignedMeasure]:
    """Per-cell weighted sum of pushforwards through the branch preimages.

    The source restriction at a preimage is read by the same two-cell
    linear stencil as the matrix, and both stencil cells share the fiber
    map G(y_ij, .), so one pushforward per branch suffices.
    """
    restr = dm.restrictions()
    out: list[AtomicSignedMeasure] = []
    deg = rpf.deg
    ys = rpf.preimages
    src = rpf.src
    for j in range(rpf.n):
        pos_parts = []
        w_parts = []
        for i in range(deg):
            blend_pos = []
            blend_w = []
            for s in range(2):
                wijs = float(branch_weights[i, j, s])
                if wijs == 0.0:
                    continue
                piece = restr[src[i, j, s]]
                if piece.n_atoms == 0:
                    continue
                blend_pos.append(piece.positions)
                blend_w.append(wijs * piece.weights)
            if not blend_pos:
                continue
            yij = float(ys[i, j])
            pos_parts.append(
                np.asarray(sys.fiber(yij, np.concatenate(blend_pos)), dtype=float)
            )
            w_parts.append(np.concatenate(blend_w))
        if not pos_parts:
            out.append(zero_measure())
            continue
        raw = canonicalize(
            AtomicSignedMeasure(np.concatenate(pos_parts), np.concatenate(w_parts))
        )
        if raw.n_atoms > 1:
            raw, _ = compress_to_cap(raw, delta, cap, sys.zeta)
        out.append(raw)
    return out


def _package_output(
    dm: DisintegratedMeasure,
    phi1_out: np.ndarray,
    fibers_raw: list[AtomicSignedMeasure],
    ref_masses: np.ndarray,
    reference: str,
) -> DisintegratedMeasure:
    """Positive inputs keep probability-fibered storage; signed inputs
    store the restrictions directly."""
    keep_normalized = dm.normalized and dm.is_positive()
    if keep_normalized:
        fibers = []
        for j, raw in enumerate(fibers_raw):
            mass = raw.total_mass()
            if phi1_out[j] == 0.0 or mass <= 0.0:
                fibers.append(_fallback_fiber())
            else:
                fibers.append((1.0 / mass) * raw)
        return replace(
            dm,
            phi1=phi1_out,
            fibers=tuple(fibers),
            ref_masses=ref_masses,
            reference=reference,
            normalized=True,
        )
    return replace(
        dm,
        phi1=phi1_out,
        fibers=tuple(fibers_raw),
        ref_masses=ref_masses,
        reference=reference,
        normalized=False,
    )


def apply_F_phi(
    sys: SkewSystem,
    rpf: RPFDiscretization,
    dm: DisintegratedMeasure,
    compress_delta: float = DEFAULT_COMPRESS_DELTA,
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> DisintegratedMeasure:
    """The unnormalized operator on nu-referenced measures.

    The output restriction over cell j is the sum over branches of
    exp(phi(y_ij)) times the pushforward of the source restriction through
    G(y_ij, .); the output marginal is the transfer matrix applied to the
    input marginal.  The equilibrium state is an eigenvector with
    eigenvalue lambda.
    """
    if dm.reference != "nu":
        raise ValueError("apply_F_phi acts on nu-referenced measures")
    if rpf.kind != "plain":
        raise ValueError("apply_F_phi needs the plain (untwisted) discretization")
    if dm.n != rpf.n:
        raise ValueError("measure and discretization sizes differ")
    phi1_out = rpf.matrix @ dm.phi1
    fibers_raw = _combine_fibers(sys, rpf, dm, rpf.wphi, compress_delta, atom_cap)
    return _package_output(dm, phi1_out, fibers_raw, rpf.nu.copy(), "nu")


def apply_F_phih_normalized(
    sys: SkewSystem,
    rpf: RPFDiscretization,
    dm: DisintegratedMeasure,
    compress_delta: float = DEFAULT_COMPRESS_DELTA,
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> DisintegratedMeasure:
    """The normalized h-twisted operator on m-referenced measures.

    Branch weights h(y_ij) exp(phi(y_ij)) / (lambda h(x_j)), row-normalized
    exactly, so a probability maps to a probability and total mass is
    conserved to machine precision.
    """
    if dm.reference != "m":
        raise ValueError("apply_F_phih_normalized acts on m-referenced measures")
    if dm.n != rpf.n:
        raise ValueError("measure and discretization sizes differ")
    phi1_out = rpf.stoch @ dm.phi1
    fibers_raw = _combine_fibers(sys, rpf, dm, rpf.weights, compress_delta, atom_cap)
    return _package_output(dm, phi1_out, fibers_raw, rpf.m.copy(), "m")


def initial_product(
    rpf: RPFDiscretization,
    fiber: AtomicSignedMeasure | None = None,
    reference: str = "m",
    zeta=1.0,
) -> DisintegratedMeasure:
    """The product probability (reference measure) x (given fiber)."""
    fib = fiber if fiber is not None else dirac(1.0)
    ref = rpf.nu if reference == "nu" else rpf.m
    return DisintegratedMeasure(
        x=rpf.x,
        ref_masses=ref.copy(),
        phi1=np.ones(rpf.n),
        fibers=tuple([fib] * rpf.n),
        reference=reference,
        zeta=zeta,
        normalized=True,
    )


@dataclass
class ConvergenceReport:
    """Per-iteration distances of the equilibrium iteration and rate data."""

    distances: list[float]
    converged: bool
    iterations: int
    tol: float
    fitted_rate: float
    fit_r2: float
    r_hat: float
    alpha_zeta: float
    beta3: float
    D3: float
    D4: float
    compress_delta: float
    atom_cap: int
    compress_error_bound: float

    def to_dict(self) -> dict:
        return {
            "distances": self.distances,
            "converged": self.converged,
            "iterations": self.iterations,
            "tol": self.tol,
            "fitted_rate": self.fitted_rate,
            "fit_r2": self.fit_r2,
            "r_hat": self.r_hat,
            "alpha_zeta": self.alpha_zeta,
            "beta3": self.beta3,
            "D3": self.D3,
            "D4": self.D4,
            "compress_delta": self.compress_delta,
            "atom_cap": self.atom_cap,
            "compress_error_bound": self.compress_error_bound,
        }


def _fit_geometric(values: list[float], floor: float = 1e-14):
    """Least-squares geometric rate on the tail half of a positive series.

    Points sitting on the terminal plateau (within 20x of the final level,
    where the iteration has hit its fixed point or the tolerance) are
    excluded so the fit sees the geometric phase only.
    """
    v = np.asarray(values, dtype=float)
    cut = max(floor, 20.0 * float(v.min()))
    usable = np.nonzero(v > cut)[0]
    if usable.size < 3:
        usable = np.nonzero(v > floor)[0]
    if usable.size < 3:
        return 0.0, 0.0
    tail = usable[usable.size // 2:]
    if tail.size < 2:
        tail = usable
    ns = tail.astype(float)
    logs = np.log(v[tail])
    slope, icept = np.polyfit(ns, logs, 1)
    pred = slope * ns + icept
    ss_res = float(np.sum((logs - pred) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(np.exp(slope)), r2


def homogeneous_delta(compress_delta: float, atom_cap: int) -> float:
    """The compression width actually realized under iteration.

    With fiber supports filling K, the atom cap forces buckets of width
    about 1/cap anyway; fixing that width up front keeps the iterated
    operator time-homogeneous (the same bucket grid every step), so the
    iteration converges to a genuine fixed point instead of churning
    between cluster layouts.
    """
    return max(compress_delta, 1.0 / max(atom_cap - 1, 1))


def iterate_to_equilibrium(
    sys: SkewSystem,
    rpf: RPFDiscretization,
    dm0: DisintegratedMeasure,
    tol: float = 1e-8,
    max_iter: int = 200,
    compress_delta: float = DEFAULT_COMPRESS_DELTA,
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> tuple[DisintegratedMeasure, ConvergenceReport]:
    """Iterate the normalized operator until successive iterates stall.

    Stops when the sup fiber distance between successive iterates drops
    below tol, or after max_iter steps (reported as converged=False, not
    an exception).  The fitted geometric rate comes from the tail half of
    the distance sequence; the theoretical rate is
    beta3 = max(sqrt(r_hat), sqrt(alpha**zeta)) with r_hat the measured
    kernel decay of the twisted base operator.
    """
    if abs(dm0.total_mass() - 1.0) > 1e-8:
        raise ValueError("iterate_to_equilibrium expects a probability measure")
    delta = homogeneous_delta(compress_delta, atom_cap)
    cur = dm0
    distances: list[float] = []
    converged = False
    for _ in range(max_iter):
        nxt = apply_F_phih_normalized(sys, rpf, cur, delta, atom_cap)
        d = linf_distance(nxt, cur, sys.zeta)
        distances.append(d)
        cur = nxt
        if d < tol:
            converged = True
            break
    rate, r2 = _fit_geometric(distances)
    tw = rpf.twisted()
    if tw.gap is None:
        spectral_radius_on_kernel(tw, sys.zeta)
    r_hat = tw.gap.r_hat
    az = sys.alpha_zeta
    beta3 = max(np.sqrt(r_hat), np.sqrt(az)) if max(r_hat, az) > 0 else 0.0
    alpha_bar1 = 1.0 / (1.0 - az) if az < 1 else np.inf
    alpha_bar2 = (1.0 + az) / (1.0 - az) if az < 1 else np.inf
    d_term = tw.gap.D_hat / np.sqrt(r_hat) if r_hat > 0 else 0.0
    a_term = 1.0 / np.sqrt(az) if az > 0 else 1.0
    report = ConvergenceReport(
        distances=distances,
        converged=converged,
        iterations=len(distances),
        tol=tol,
        fitted_rate=rate,
        fit_r2=r2,
        r_hat=r_hat,
        alpha_zeta=az,
        beta3=float(beta3),
        D3=float(a_term + alpha_bar1 * d_term),
        D4=float(a_term + alpha_bar2 * d_term),
        compress_delta=delta,
        atom_cap=atom_cap,
        compress_error_bound=delta**sys.zeta,
    )
    return cur, report


@dataclass
class GapReport:
    """Fitted decay of strong norms on zero-average measures."""

    xi: float
    R: float
    trials: int
    n_steps: int
    per_trial_rates: list[float]

    def to_dict(self) -> dict:
        return {
            "xi": self.xi,
            "R": self.R,
            "trials": self.trials,
            "n_steps": self.n_steps,
            "per_trial_rates": self.per_trial_rates,
        }


def _random_zero_average(
    rpf: RPFDiscretization, zeta: float, rng: np.random.Generator
) -> DisintegratedMeasure:
    """A random signed measure whose marginal density is m-zero-average.

    Restrictions combine a mass-carrying atom with a zero-mass dipole so
    both the marginal and the pure-fiber directions get exercised.
    """
    n = rpf.n
    freqs = rng.integers(1, 4, size=2)
    phi1 = sum(
        float(rng.standard_normal()) * np.cos(np.pi * f * rpf.x + rng.uniform(0, 2 * np.pi))
        for f in freqs
    )
    phi1 = np.asarray(phi1, dtype=float)
    phi1 -= float(np.dot(rpf.m, phi1))  # project off the fixed direction
    fibers = []
    for j in range(n):
        parts = [dirac(float(rng.uniform()), float(phi1[j]))] if phi1[j] != 0 else []
        w = float(rng.uniform(0.2, 1.0))
        a, b = rng.uniform(0, 1, size=2)
        parts.append(dirac(float(a), w) + dirac(float(b), -w))
        fiber = parts[0]
        for p in parts[1:]:
            fiber = fiber + p
        fibers.append(fiber)
    return DisintegratedMeasure(
        x=rpf.x,
        ref_masses=rpf.m.copy(),
        phi1=np.array([f.total_mass() for f in fibers]),
        fibers=tuple(fibers),
        reference="m",
        zeta=zeta,
        normalized=False,
    )


def estimate_spectral_gap(
    sys: SkewSystem,
    rpf: RPFDiscretization,
    trials: int = 8,
    n_steps: int = 15,
    seed: int = 0,
    compress_delta: float = DEFAULT_COMPRESS_DELTA,
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> GapReport:
    """Fit the decay rate of S-infinity norms on zero-average measures."""
    if trials < 5:
        raise ValueError("need at least 5 trials")
    rng = np.random.default_rng(seed)
    delta = homogeneous_delta(compress_delta, atom_cap)
    rates = []
    big_r = 1.0
    xi = 0.0
    for _ in range(trials):
        dm = _random_zero_average(rpf, sys.zeta, rng)
        s0 = sinf_norm(dm)
        if s0 < 1e-12:
            continue
        norms = []
        cur = dm
        for _ in range(n_steps):
            cur = apply_F_phih_normalized(sys, rpf, cur, delta, atom_cap)
            norms.append(sinf_norm(cur))
        rate, _ = _fit_geometric(norms, floor=1e-12 * s0)
        rates.append(rate)
        xi = max(xi, rate)
        if rate > 0:
            ns = np.arange(1, n_steps + 1, dtype=float)
            with np.errstate(over="ignore"):
                pref = np.asarray(norms) / (s0 * rate**ns)
            big_r = max(big_r, float(np.nanmax(pref[np.isfinite(pref)])))
    return GapReport(xi=float(xi), R=float(big_r), trials=trials,
                     n_steps=n_steps, per_trial_rates=rates)


def check_class_S(
    sys: SkewSystem, n_samples: int = 64, tol: float = 1e-10
) -> Optional[float]:
    """Search for a horizontal section fixed by every fiber map.

    Solves the 1-d fixed point of G(x, .) on a dense x-sample in every
    branch domain (the contraction makes plain iteration exact to roundoff)
    and intersects: returns y0 with sup_x |G(x, y0) - y0| below tol, or
    None when the fixed points disagree across x.
    """
    candidates = []
    xs_all = []
    for b in sys.base.branches:
        xs = np.linspace(b.lo + 1e-9, b.hi - 1e-9, n_samples)
        xs_all.append(xs)
        for x in xs:
            y = 0.5
            for _ in range(200):
                y_new = float(sys.fiber(float(x), np.array([y]))[0])
                if abs(y_new - y) < 1e-16:
                    y = y_new
                    break
                y = y_new
            candidates.append(y)
    y0 = float(np.median(candidates))
    worst = max(
        abs(float(sys.fiber(float(x), np.array([y0]))[0]) - y0)
        for xs in xs_all
        for x in xs
    )
    return y0 if worst < tol else None


def reduce_potential(Phi: Observable, y0: float) -> Potential:
    """Collapse a fiber-fixing potential to the base: x -> Phi(x, y0)."""
    yarr = np.array([float(y0)])

    def base_fn(xs):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        return np.array([float(Phi.fn(float(x), yarr)[0]) for x in xs])

    pot = Potential.from_callable(base_fn, zeta=Phi.zeta, name=f"{Phi.name}@y0={y0:g}")
    # the section inherits the ambient Holder bound
    if np.isfinite(Phi.holder_bound):
        pot = Potential(
            fn=pot.fn,
            zeta=pot.zeta,
            holder_const=min(pot.holder_const, Phi.holder_bound),
            sup=pot.sup,
            inf=pot.inf,
            name=pot.name,
        )
    return pot


@dataclass(frozen=True)
class LYS1Fit:
    """Fitted constants of ||Fbar^n mu||_S1 <= A beta2**n ||mu||_S1 + B2 ||mu||_1."""

    A: float
    beta2: float
    B2: float
    n_steps: int
    samples: int


def verify_LY_S1(
    sys: SkewSystem,
    rpf: RPFDiscretization,
    samples: int = 6,
    n_steps: int = 20,
    seed: int = 0,
    compress_delta: float = DEFAULT_COMPRESS_DELTA,
    atom_cap: int = DEFAULT_ATOM_CAP,
) -> LYS1Fit:
    """Fit the Lasota-Yorke constants of the normalized operator on S1."""
    rng = np.random.default_rng(seed)
    lam = rpf.lam
    trajs = []
    for _ in range(samples):
        dm = _random_zero_average(rpf, sys.zeta, rng)
        # steer to nu-referenced restriction storage for the plain operator
        dm = DisintegratedMeasure(
            x=dm.x, ref_masses=rpf.nu.copy(), phi1=dm.phi1, fibers=dm.fibers,
            reference="nu", zeta=dm.zeta, normalized=False,
        )
        s0 = s1_norm(dm)
        w0 = l1_norm(dm)
        cur = dm
        sn = []
        for _ in range(n_steps):
            cur = apply_F_phi(sys, rpf, cur, compress_delta, atom_cap)
            cur = replace(
                cur,
                phi1=cur.phi1 / lam,
                fibers=tuple((1.0 / lam) * f for f in cur.fibers),
            )
            sn.append(s1_norm(cur))
        trajs.append((s0, w0, sn))
    b2 = 1.0
    for s0, w0, sn in trajs:
        b2 = max(b2, max(sn[-3:]) / max(w0, 1e-300))
    rn = np.zeros(n_steps)
    for s0, w0, sn in trajs:
        rn = np.maximum(rn, np.maximum(0.0, np.asarray(sn) - b2 * w0) / max(s0, 1e-300))
    idx = np.nonzero(rn > 1e-12)[0]
    if idx.size >= 2:
        beta2 = 0.0
        for a in range(idx.size - 1):
            for b in range(a + 1, idx.size):
                i, j = idx[a], idx[b]
                beta2 = max(beta2, (rn[j] / rn[i]) ** (1.0 / (j - i)))
        a_const = float(np.max(rn[idx] / beta2 ** (idx + 1.0))) if beta2 > 0 else 1.0
    else:
        beta2 = 0.0
        a_const = 1.0
    return LYS1Fit(A=float(a_const), beta2=float(beta2), B2=float(b2),
                   n_steps=n_steps, samples=samples)


@dataclass(frozen=True)
class RegularityBound:
    """Constants of the one-step Holder recursion and its fixed bound.

    beta = (alpha L)**zeta, D = L**zeta (A1 sup h / inf h + eps_phi + |G|_zeta)
    with A1 the measured Holder constant of the eigenfunction ratios
    h(y_i(x)) / h(x) divided by L**zeta; the equilibrium Holder constant is
    bounded by D / (1 - beta).
    """

    beta: float
    D: float
    bound: float
    A1: float
    eps_phi: float
    g_holder: float
    L: float

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "D": self.D,
            "bound": self.bound,
            "A1": self.A1,
            "eps_phi": self.eps_phi,
            "g_holder": self.g_holder,
            "L": self.L,
        }


def regularity_constants(
    sys: SkewSystem, rpf: RPFDiscretization, eps_phi: float | None = None
) -> RegularityBound:
    """Evaluate the recursion constants from the computed eigendata."""
    z = sys.zeta
    big_l = sys.base.lip_max
    if eps_phi is None:
        eps_phi = check_hypotheses(sys.base, sys.potential, z, gridsize=4096).epsilon_phi
    a1 = 0.0
    for i in range(rpf.deg):
        # blended eigenfunction read at the branch preimages
        h_read = (rpf.wphi[i] * rpf.h[rpf.src[i]]).sum(axis=1) / rpf.wphi[i].sum(axis=1)
        a1 = max(a1, float(discrete_holder_constant(rpf.x, h_read / rpf.h, z) / big_l**z))
    cond_h = float(np.max(rpf.h) / np.min(rpf.h))
    d_const = big_l**z * (a1 * cond_h + eps_phi + sys.fiber.g_holder)
    beta = (sys.alpha * big_l) ** z
    bound = d_const / (1.0 - beta) if beta < 1 else np.inf
    return RegularityBound(beta=float(beta), D=float(d_const), bound=float(bound),
                           A1=float(a1), eps_phi=float(eps_phi),
                           g_holder=sys.fiber.g_holder, L=float(big_l))
