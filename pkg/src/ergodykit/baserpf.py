"""Base maps on [0, 1], Holder potentials, and the discretized RPF operator.

The transfer operator of a branched covering map f with potential phi acts
on functions by (L g)(x) = sum over branch preimages y of g(y) exp(phi(y)).
We discretize by collocation at cell midpoints with piecewise-constant
interpolation of g, which matches the pointwise operator formula directly.
The numerics are not rigorous (no validated enclosures); accuracy is
checked empirically through grid refinement and analytic special cases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dualnorm import NumericError, _as_zeta

__all__ = [
    "Branch",
    "BaseMap",
    "Potential",
    "RPFDiscretization",
    "HypothesisReport",
    "LYFit",
    "KernelDecay",
    "build_rpf",
    "twisted_operator",
    "check_hypotheses",
    "verify_lasota_yorke",
    "spectral_radius_on_kernel",
    "combined_expansion_bound",
    "discrete_holder_constant",
]

# Power iteration parameters: start from the constant vector, fixed
# relative tolerance, deterministic.
_PI_TOL = 1e-12
_PI_MAXIT = 100_000


class ConstructionError(ValueError):
    """Raised when a base map or discretization violates its contract."""


@dataclass(frozen=True)
class Branch:
    """One inverse branch of a covering map of [0, 1].

    ``forward`` maps the domain [lo, hi] onto [0, 1]; ``inverse`` is its
    right inverse defined on all of [0, 1] with image in [lo, hi] and
    Lipschitz constant at most ``lip_bound``.  ``meets_region`` marks the
    branches whose domain intersects the (possibly empty) non-expanding
    region of the map.  Both callables must accept numpy arrays.
    """

    lo: float
    hi: float
    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    lip_bound: float
    meets_region: bool = False


@dataclass(frozen=True)
class BaseMap:
    """A piecewise-invertible map of [0, 1] with declared expansion data.

    sigma > 1 is the expansion floor away from the non-expanding region,
    L >= the inverse-Lipschitz bound inside it, q counts the covering
    domains meeting the region.  Branch domains must tile [0, 1].
    """

    branches: tuple[Branch, ...]
    sigma: float
    L: float
    q: int
    region: Optional[tuple[float, float]] = None
    name: str = "basemap"

    def __post_init__(self):
        brs = tuple(self.branches)
        object.__setattr__(self, "branches", brs)
        if not brs:
            raise ConstructionError("base map needs at least one branch")
        lo = min(b.lo for b in brs)
        hi = max(b.hi for b in brs)
        if abs(lo) > 1e-12 or abs(hi - 1.0) > 1e-12:
            raise ConstructionError("branch domains must cover [0, 1]")
        spans = sorted((b.lo, b.hi) for b in brs)
        for (a, b), (c, d) in zip(spans, spans[1:]):
            if abs(b - c) > 1e-12:
                raise ConstructionError(
                    f"branch domains must tile [0, 1]; gap/overlap at ({b}, {c})"
                )
        if self.sigma <= 1.0:
            raise ConstructionError(f"sigma must exceed 1, got {self.sigma}")
        if not 0 <= self.q < len(brs):
            raise ConstructionError("q must satisfy 0 <= q < deg(f)")

    @property
    def deg(self) -> int:
        return len(self.branches)

    @property
    def lip_max(self) -> float:
        """Global inverse-Lipschitz bound max_i L_i (drives (alpha*L)**zeta)."""
        return max(b.lip_bound for b in self.branches)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Forward map, vectorized; branch chosen by domain membership."""
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        done = np.zeros(x.shape, dtype=bool)
        for k, b in enumerate(self.branches):
            if k == len(self.branches) - 1:
                mask = ~done
            else:
                mask = (~done) & (x >= b.lo) & (x < b.hi)
            if mask.any():
                out[mask] = b.forward(x[mask])
            done |= mask
        return np.clip(out, 0.0, 1.0)

    def preimages(self, x: np.ndarray) -> np.ndarray:
        """deg x len(x) array of branch preimages of x."""
        x = np.asarray(x, dtype=float)
        ys = np.empty((self.deg, x.size))
        for i, b in enumerate(self.branches):
            y = np.asarray(b.inverse(x), dtype=float)
            if np.any(y < b.lo - 1e-9) or np.any(y > b.hi + 1e-9):
                bad = y[(y < b.lo - 1e-9) | (y > b.hi + 1e-9)][0]
                raise ConstructionError(
                    f"branch {i} inverse value {bad!r} outside its domain "
                    f"[{b.lo}, {b.hi}]"
                )
            ys[i] = np.clip(y, b.lo, b.hi)
        return ys


def discrete_holder_constant(x: np.ndarray, v: np.ndarray, zeta: float) -> float:
    """All-pairs Holder quotient max |v_i - v_j| / |x_i - x_j|**zeta."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.size < 2:
        return 0.0
    if x.size <= 2048:
        dx = np.abs(x[:, None] - x[None, :])
        np.fill_diagonal(dx, np.inf)
        return float(np.max(np.abs(v[:, None] - v[None, :]) / dx**zeta))
    best = 0.0
    for i0 in range(0, x.size, 512):
        sl = slice(i0, i0 + 512)
        dx = np.abs(x[sl, None] - x[None, :]) ** zeta
        dv = np.abs(v[sl, None] - v[None, :])
        dx[dx == 0.0] = np.inf
        best = max(best, float(np.max(dv / dx)))
    return best


@dataclass(frozen=True)
class Potential:
    """A potential on [0, 1] with sampled regularity statistics."""

    fn: Callable[[np.ndarray], np.ndarray]
    zeta: float
    holder_const: float
    sup: float
    inf: float
    name: str = "potential"

    @staticmethod
    def from_callable(fn, zeta=1.0, gridsize: int = 4096, name: str = "potential"):
        z = _as_zeta(zeta)
        x = (np.arange(gridsize) + 0.5) / gridsize
        v = np.asarray(fn(x), dtype=float)
        return Potential(
            fn=fn,
            zeta=z,
            holder_const=discrete_holder_constant(x, v, z),
            sup=float(v.max()),
            inf=float(v.min()),
            name=name,
        )

    @staticmethod
    def constant(c: float, zeta=1.0, name: str | None = None):
        cc = float(c)
        return Potential(
            fn=lambda x, _c=cc: np.full_like(np.asarray(x, dtype=float), _c),
            zeta=_as_zeta(zeta),
            holder_const=0.0,
            sup=cc,
            inf=cc,
            name=name or f"const({cc:g})",
        )


def _power_iteration(matvec, n: int, tol: float = _PI_TOL, maxit: int = _PI_MAXIT):
    """Perron vector of a nonnegative operator by power iteration.

    Starts from the constant vector; returns (vector with unit l1 norm,
    eigenvalue, iterations).  Raises NumericError when the successive
    relative change has not dropped below tol after maxit steps.
    """
    v = np.full(n, 1.0 / n)
    lam = 1.0
    for it in range(1, maxit + 1):
        u = matvec(v)
        s = float(u.sum())
        if s <= 0 or not np.isfinite(s):
            raise NumericError(f"power iteration degenerated at step {it}")
        u /= s
        delta = float(np.max(np.abs(u - v)) / max(np.max(np.abs(u)), 1e-300))
        v = u
        lam = s
        if delta < tol:
            return v, lam, it
    raise NumericError(
        f"power iteration did not reach tol={tol} after {maxit} iterations"
    )


@dataclass
class RPFDiscretization:
    """Grid discretization of the transfer operator with its eigendata.

    Functions are reconstructed from cell values by piecewise-linear
    interpolation between midpoints, so every branch preimage reads two
    source cells with complementary split weights (``src`` and ``wphi``;
    the split weights carry the factor exp(phi(preimage)) and sum to it
    over the last axis).

    Eigendata follows the Perron structure of the nonnegative matrix:
    lam > 0, h > 0 entrywise (right eigenvector at midpoints, normalized
    so that sum(h * nu) = 1), nu >= 0 the left eigenvector as probability
    cell masses, and m = h * nu the invariant cell masses.  ``weights``
    holds the row-stochastic split weights of the normalized h-twisted
    operator and ``stoch`` the corresponding row-stochastic matrix, so
    mass is conserved to machine precision in operator applications.
    """

    n: int
    x: np.ndarray
    matrix: np.ndarray
    lam: float
    h: np.ndarray
    nu: np.ndarray
    m: np.ndarray
    preimages: np.ndarray      # (deg, n) branch preimages of midpoints
    src: np.ndarray            # (deg, n, 2) interpolation source cells
    wphi: np.ndarray           # (deg, n, 2) exp(phi) * split weights
    weights: np.ndarray        # (deg, n, 2) normalized twisted split weights
    stoch: np.ndarray          # (n, n) row-stochastic twisted matrix
    resid_right: float
    resid_left: float
    power_iters: int
    base: BaseMap
    potential: Potential
    kind: str = "plain"
    gap: Optional["KernelDecay"] = None
    _twisted: Optional["RPFDiscretization"] = field(default=None, repr=False)

    @property
    def deg(self) -> int:
        return self.base.deg

    def normalized_matrix(self) -> np.ndarray:
        return self.matrix / self.lam

    def twisted(self) -> "RPFDiscretization":
        if self.kind == "twisted":
            return self
        if self._twisted is None:
            self._twisted = twisted_operator(self)
        return self._twisted

    def eigen_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "h": self.h.tolist(),
            "nu": self.nu.tolist(),
            "m": self.m.tolist(),
            "resid_right": self.resid_right,
            "resid_left": self.resid_left,
        }

    def export_matrix(self, path, fmt: str = "csv"):
        """Dump the dense operator matrix as CSV rows or a JSON array."""
        import json

        if fmt == "csv":
            lines = [",".join(format(v, ".17g") for v in row) for row in self.matrix]
            with open(path, "w") as fh:
                fh.write("\n".join(lines) + "\n")
        elif fmt == "json":
            with open(path, "w") as fh:
                json.dump(self.matrix.tolist(), fh)
        else:
            raise ValueError(f"unknown format {fmt!r}")


def _interp_stencil(y: np.ndarray, n: int):
    """Piecewise-linear read stencil: source cells and split fractions.

    A value at y is (1 - frac) * v[k0] + frac * v[k1] with k0, k1 the
    midpoints bracketing y; beyond the first/last midpoint the read is
    constant on the edge cell.
    """
    t = y * n - 0.5
    k0 = np.clip(np.floor(t).astype(np.int64), 0, n - 1)
    frac = np.clip(t - k0, 0.0, 1.0)
    k1 = np.minimum(k0 + 1, n - 1)
    frac[k1 == k0] = 0.0
    return k0, k1, frac


def build_rpf(basemap: BaseMap, pot: Potential, n: int) -> RPFDiscretization:
    """Discretize the transfer operator on n midpoint-collocation cells.

    Row j of the matrix encodes (L g)(x_j) = sum_i g(y_ij) exp(phi(y_ij))
    with y_ij the branch-i preimage of the midpoint x_j and g read by
    piecewise-linear interpolation between midpoints.  The leading
    eigentriple comes from power iteration (right) and adjoint power
    iteration (left); nu is normalized to a probability and h so that
    sum(h * nu) = 1.
    """
    if n < 8:
        raise ConstructionError(f"need at least 8 cells, got n={n}")
    x = (np.arange(n) + 0.5) / n
    ys = basemap.preimages(x)
    deg = basemap.deg
    ephi = np.exp(np.asarray(pot.fn(ys), dtype=float))
    src = np.empty((deg, n, 2), dtype=np.int64)
    wphi = np.empty((deg, n, 2))
    for i in range(deg):
        k0, k1, frac = _interp_stencil(ys[i], n)
        src[i, :, 0], src[i, :, 1] = k0, k1
        wphi[i, :, 0] = ephi[i] * (1.0 - frac)
        wphi[i, :, 1] = ephi[i] * frac

    mat = np.zeros((n, n))
    rows = np.arange(n)
    for i in range(deg):
        for s in range(2):
            np.add.at(mat, (rows, src[i, :, s]), wphi[i, :, s])

    h_raw, lam, iters_r = _power_iteration(lambda v: mat @ v, n)
    if np.min(h_raw) <= 0:
        raise NumericError("right eigenvector lost positivity")

    # Exactly row-stochastic normalized twisted weights: share of output
    # cell j through branch i and stencil side s is A[i, j, s] / row sum.
    a = wphi * h_raw[src] / (lam * h_raw[None, :, None])
    srow = a.sum(axis=(0, 2))
    weights = a / srow[None, :, None]
    stoch = np.zeros((n, n))
    for i in range(deg):
        for s in range(2):
            np.add.at(stoch, (rows, src[i, :, s]), weights[i, :, s])

    m_vec, _, iters_l = _power_iteration(lambda v: stoch.T @ v, n)
    # nu and h rescaled so that nu is a probability and m = h * nu exactly
    nu_raw = m_vec / h_raw
    c = float(nu_raw.sum())
    nu = nu_raw / c
    h = h_raw * c
    m_vec = h * nu

    resid_right = float(np.max(np.abs(mat @ h - lam * h)) / (lam * np.max(np.abs(h))))
    resid_left = float(np.sum(np.abs(nu @ mat - lam * nu)) / (lam * np.sum(np.abs(nu))))

    return RPFDiscretization(
        n=n,
        x=x,
        matrix=mat,
        lam=float(lam),
        h=h,
        nu=nu,
        m=m_vec,
        preimages=ys,
        src=src,
        wphi=wphi,
        weights=weights,
        stoch=stoch,
        resid_right=resid_right,
        resid_left=resid_left,
        power_iters=iters_r + iters_l,
        base=basemap,
        potential=pot,
    )


def twisted_operator(rpf: RPFDiscretization) -> RPFDiscretization:
    """Conjugate the discretization by the eigenfunction h.

    Returns the discretization of L_h(g) = L(g h) / h, whose matrix is
    D_h^{-1} M D_h.  Its eigenfunction is constant, its conformal measure
    is m, and its normalized form fixes the constant vector: row sums of
    matrix / lambda equal 1 up to the eigen residual.
    """
    if rpf.kind == "twisted":
        return rpf
    if float(np.min(rpf.h)) < 1e-12:
        raise NumericError("eigenfunction too close to zero to conjugate")
    conj = rpf.matrix * (rpf.h[None, :] / rpf.h[:, None])
    ones = np.ones(rpf.n)
    resid_right = float(np.max(np.abs(conj @ ones - rpf.lam * ones)) / rpf.lam)
    resid_left = float(
        np.sum(np.abs(rpf.m @ conj - rpf.lam * rpf.m)) / (rpf.lam * np.sum(rpf.m))
    )
    return RPFDiscretization(
        n=rpf.n,
        x=rpf.x,
        matrix=conj,
        lam=rpf.lam,
        h=ones,
        nu=rpf.m.copy(),
        m=rpf.m.copy(),
        preimages=rpf.preimages,
        src=rpf.src,
        wphi=rpf.wphi,
        weights=rpf.weights,
        stoch=rpf.stoch,
        resid_right=resid_right,
        resid_left=resid_left,
        power_iters=rpf.power_iters,
        base=rpf.base,
        potential=rpf.potential,
        kind="twisted",
        gap=rpf.gap,
    )


# ---------------------------------------------------------------------------
# hypothesis checking
# ---------------------------------------------------------------------------

def combined_expansion_bound(
    deg: int, q: int, sigma: float, L: float, zeta: float, epsilon: float
) -> float:
    """The expansion/contraction balance that must stay below 1.

    exp(eps) * ((deg - q) * sigma**-zeta + q * L**zeta * (1 + (L-1)**zeta)) / deg
    """
    z = _as_zeta(zeta)
    if epsilon > 700.0:  # exp would overflow; the bound is violated anyway
        return np.inf
    excess = max(L - 1.0, 0.0) ** z
    return float(
        np.exp(epsilon) * ((deg - q) * sigma**-z + q * L**z * (1.0 + excess)) / deg
    )


@dataclass(frozen=True)
class HypothesisReport:
    """Measured constants and pass flags for the standing hypotheses."""

    f1_pass: bool
    branch_lipschitz: tuple[float, ...]
    f2_pass: bool
    deg: int
    q: int
    sigma: float
    L: float
    zeta: float
    oscillation: float          # sup phi - inf phi
    holder_exp_phi: float       # sampled Holder constant of exp(phi)
    epsilon_phi: float          # smallest eps making both bounds hold
    combined_value: float
    combined_pass: bool
    alpha: Optional[float] = None
    g_holder: Optional[float] = None
    alpha_l_value: Optional[float] = None
    alpha_l_ok: Optional[bool] = None

    def to_dict(self) -> dict:
        d = {
            "f1": {"pass": self.f1_pass, "branch_lipschitz": list(self.branch_lipschitz),
                   "L": self.L, "sigma": self.sigma},
            "f2": {"pass": self.f2_pass, "deg": self.deg, "q": self.q},
            "f3": {
                "oscillation": self.oscillation,
                "holder_exp_phi": self.holder_exp_phi,
                "epsilon_phi": self.epsilon_phi,
                "combined_value": self.combined_value,
                "pass": self.combined_pass,
            },
            "zeta": self.zeta,
        }
        if self.alpha is not None:
            d["fiber"] = {
                "alpha": self.alpha,
                "g_holder": self.g_holder,
                "alpha_l_value": self.alpha_l_value,
                "alpha_l_ok": self.alpha_l_ok,
            }
        return d


def check_hypotheses(
    basemap: BaseMap, pot: Potential, zeta=1.0, gridsize: int = 8192
) -> HypothesisReport:
    """Measure the standing inequalities; failures are report content.

    f1: per-branch inverse Lipschitz constants against L (branches meeting
    the non-expanding region) or 1/sigma (the rest).  f3: the smallest
    eps_phi with sup-inf oscillation and H_zeta(exp(phi)) / exp(inf phi)
    both below it, then the combined expansion bound evaluated at eps_phi.

    The Holder constant of exp(phi) is sampled per branch domain: every
    estimate that consumes it pairs preimages inside a single branch, and
    the potential (like the dynamics) may jump across branch boundaries.
    """
    z = _as_zeta(zeta)
    tol = 1e-9
    ygrid = np.linspace(0.0, 1.0, gridsize)
    lips = []
    ok1 = True
    for b in basemap.branches:
        inv = np.asarray(b.inverse(ygrid), dtype=float)
        quot = float(np.max(np.abs(np.diff(inv)) / np.diff(ygrid)))
        lips.append(quot)
        bound = basemap.L if b.meets_region else 1.0 / basemap.sigma
        if quot > bound + tol:
            ok1 = False
    ok2 = basemap.q < basemap.deg  # domain tiling is validated at construction

    per_branch = max(gridsize // basemap.deg, 512)
    h_exp = 0.0
    sup_phi = -np.inf
    inf_phi = np.inf
    for b in basemap.branches:
        xg = np.linspace(b.lo + 1e-12, b.hi - 1e-12, per_branch)
        phi_b = np.asarray(pot.fn(xg), dtype=float)
        sup_phi = max(sup_phi, float(phi_b.max()))
        inf_phi = min(inf_phi, float(phi_b.min()))
        h_exp = max(h_exp, discrete_holder_constant(xg, np.exp(phi_b), z))
    osc = sup_phi - inf_phi
    eps = max(osc, h_exp / float(np.exp(inf_phi)))
    value = combined_expansion_bound(
        basemap.deg, basemap.q, basemap.sigma, basemap.L, z, eps
    )
    return HypothesisReport(
        f1_pass=ok1,
        branch_lipschitz=tuple(lips),
        f2_pass=ok2,
        deg=basemap.deg,
        q=basemap.q,
        sigma=basemap.sigma,
        L=basemap.L,
        zeta=z,
        oscillation=osc,
        holder_exp_phi=h_exp,
        epsilon_phi=eps,
        combined_value=value,
        combined_pass=value < 1.0,
    )


# ---------------------------------------------------------------------------
# empirical spectral estimates
# ---------------------------------------------------------------------------

def _test_vectors(n: int, x: np.ndarray, samples: int, seed: int = 0) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    for k in range(samples):
        if k % 2 == 0:
            freqs = rng.integers(1, 5, size=3)
            amps = rng.standard_normal(3)
            g = sum(a * np.cos(np.pi * f * x + rng.uniform(0, 2 * np.pi))
                    for a, f in zip(amps, freqs))
        else:
            knots = np.sort(rng.uniform(0, 1, size=4))
            vals = rng.standard_normal(6)
            g = np.interp(x, np.concatenate([[0.0], knots, [1.0]]), vals)
        g = np.asarray(g, dtype=float)
        g /= max(np.max(np.abs(g)), 1e-12)
        out.append(g)
    return out


def _strong_norm(x: np.ndarray, v: np.ndarray, zeta: float) -> float:
    return discrete_holder_constant(x, v, zeta) + float(np.max(np.abs(v)))


@dataclass(frozen=True)
class LYFit:
    """Fitted constants of |L^n g|_s <= B1 * beta1**n * |g|_s + C1 * |g|_w."""

    B1: float
    beta1: float
    C1: float
    n_steps: int
    samples: int

    @property
    def contracting(self) -> bool:
        return self.beta1 < 1.0


def verify_lasota_yorke(
    rpf: RPFDiscretization, zeta=1.0, samples: int = 10, n_steps: int = 30, seed: int = 0
) -> LYFit:
    """Fit the smallest Lasota-Yorke triple on sampled Holder vectors.

    Uses the discrete strong norm |g|_s = H_zeta(g) + |g|_inf and weak
    norm |g|_w = |g|_inf.  C1 is the plateau level of |L^n g|_s / |g|_w
    (at least 1, forced by constant g), beta1 the smallest geometric
    envelope rate of the excess above the plateau, B1 its prefactor.
    """
    if samples < 10:
        raise ValueError("need at least 10 sample vectors")
    z = _as_zeta(zeta)
    mat = rpf.normalized_matrix()
    vecs = _test_vectors(rpf.n, rpf.x, samples, seed)
    floor = 1e-13
    c1 = 1.0
    trajs = []
    for g in vecs:
        s0 = _strong_norm(rpf.x, g, z)
        w0 = float(np.max(np.abs(g)))
        sn = []
        v = g.copy()
        for _ in range(n_steps):
            v = mat @ v
            sn.append(_strong_norm(rpf.x, v, z))
        trajs.append((s0, w0, sn))
        c1 = max(c1, max(sn[-5:]) / max(w0, 1e-300))
    rn = np.zeros(n_steps)
    for s0, w0, sn in trajs:
        excess = np.maximum(0.0, np.asarray(sn) - c1 * w0) / max(s0, 1e-300)
        rn = np.maximum(rn, excess)
    idx = np.nonzero(rn > floor)[0]
    if idx.size >= 2:
        beta1 = 0.0
        for a in range(idx.size - 1):
            for b in range(a + 1, idx.size):
                i, j = idx[a], idx[b]
                beta1 = max(beta1, (rn[j] / rn[i]) ** (1.0 / (j - i)))
        b1 = float(np.max(rn[idx] / beta1 ** (idx + 1.0))) if beta1 > 0 else 1.0
    elif idx.size == 1:
        beta1 = rn[idx[0]] ** (1.0 / (idx[0] + 1.0))
        b1 = 1.0
    else:
        beta1 = 0.0
        b1 = 1.0
    return LYFit(B1=float(b1), beta1=float(beta1), C1=float(c1),
                 n_steps=n_steps, samples=samples)


@dataclass(frozen=True)
class KernelDecay:
    """Measured decay |L^n g|_s <= D * r**n * |g|_s on the kernel of P."""

    r_hat: float
    D_hat: float
    n_steps: int
    samples: int


def spectral_radius_on_kernel(
    rpf: RPFDiscretization, zeta=1.0, samples: int = 10, n_steps: int = 30, seed: int = 0
) -> KernelDecay:
    """Estimate the sub-leading decay rate on the fixed-point complement.

    Random Holder vectors are projected off the leading eigendirection
    (g - (integral of g d nu) * h for the plain operator, g - integral of
    g dm for the twisted one) and the strong-norm decay under iteration is
    fitted by least squares on the log scale over the usable range.  The
    result is stored on the discretization as its measured gap.
    """
    if samples < 10:
        raise ValueError("need at least 10 sample vectors")
    z = _as_zeta(zeta)
    mat = rpf.normalized_matrix()
    if rpf.kind == "twisted":
        proj = lambda g: g - float(np.dot(rpf.m, g)) * np.ones(rpf.n)
    else:
        proj = lambda g: g - float(np.dot(rpf.nu, g)) * rpf.h
    r_hat = 0.0
    d_hat = 1.0
    for g in _test_vectors(rpf.n, rpf.x, samples, seed):
        v = proj(g)
        s0 = _strong_norm(rpf.x, v, z)
        if s0 < 1e-12:
            continue
        sn = []
        for _ in range(n_steps):
            v = mat @ v
            sn.append(_strong_norm(rpf.x, v, z))
        sn = np.asarray(sn)
        usable = np.nonzero(sn > 1e-13 * s0)[0]
        if usable.size < 4:
            continue
        tail = usable[usable.size // 2:]
        ns = tail + 1.0
        slope, icept = np.polyfit(ns, np.log(sn[tail]), 1)
        rate = float(np.exp(slope))
        r_hat = max(r_hat, rate)
        if rate > 0:
            d_hat = max(d_hat, float(np.max(sn[usable] / (s0 * rate ** (usable + 1.0)))))
    decay = KernelDecay(r_hat=r_hat, D_hat=d_hat, n_steps=n_steps, samples=samples)
    rpf.gap = decay
    return decay
