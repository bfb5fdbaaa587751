"""Sparse self-representation solvers and their projection kernels.

Three routes produce per-patch coefficient vectors over a dictionary of other
patches:

* ``solve_bpdn``      -- minimize ||c||_1 subject to ||Xc - b||_2 <= sigma,
  by root-finding on the residual-vs-l1-radius trade-off curve with an
  accelerated projected-gradient inner solver (l1-ball constrained least
  squares); the returned iterate sits on the feasible side of the bound.
* ``solve_nnc_lasso`` -- minimize ||Xc - b||_2 subject to c >= 0 and
  sum(c) <= tau, via monotone accelerated projected gradient with a capped
  simplex projection.
* ``solve_nn_lasso``  -- minimize 0.5*||Xc - b||_2^2 + alpha*||c||_1 over
  c >= 0, via cyclic coordinate descent with a non-negative soft threshold.

``self_representation`` runs any of the three over every column of a patch
matrix at once (each patch expressed over all the others, own coefficient
pinned to zero) using the same iterations in batched matrix form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_ALPHA_GRID = (0.001, 0.01, 0.1, 1.0, 10.0)

METHODS = ("bpdn", "nnc", "nn")


class SolverConvergenceError(RuntimeError):
    """Iteration budget exhausted before the stationarity tolerance was met."""

    def __init__(self, message: str, gap: float | None = None,
                 columns: list[int] | None = None):
        super().__init__(message)
        self.gap = gap
        self.columns = columns or []


@dataclass(frozen=True)
class SolverConfig:
    """Shared solver settings.

    sigma_fit   l2 residual bound used by the BPDN route.
    tau         l1 budget of the capped-simplex route.
    alpha_grid  ascending l1 weights searched by the penalized route.
    max_iter    iteration cap (gradient steps, or coordinate-descent sweeps).
    tol         relative tolerance on objective change / stationarity residual.
    """

    sigma_fit: float = 0.0
    tau: float = 1.0
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    max_iter: int = 2000
    tol: float = 1e-6

    def __post_init__(self):
        if self.sigma_fit < 0:
            raise ValueError("sigma_fit must be >= 0")
        if self.tau <= 0:
            raise ValueError("tau must be > 0")
        grid = tuple(float(a) for a in self.alpha_grid)
        if not grid or any(a <= 0 for a in grid) or list(grid) != sorted(set(grid)):
            raise ValueError("alpha_grid must be non-empty, positive, strictly ascending")
        object.__setattr__(self, "alpha_grid", grid)
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")


@dataclass(frozen=True, eq=False)
class CoefVector:
    """Coefficients over a dictionary that excludes the represented column.

    ``target_index`` records where the represented patch sits in the full
    dictionary so the vector can be re-embedded with an exact zero there.
    """

    coeffs: np.ndarray
    target_index: int | None = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.ndim != 1:
            raise ValueError("coeffs must be a vector")
        object.__setattr__(self, "coeffs", c)

    def embedded(self) -> np.ndarray:
        """Length n+1 vector with an exact zero at the target's own index."""
        if self.target_index is None:
            raise ValueError("no target index recorded")
        i = self.target_index
        if not 0 <= i <= self.coeffs.size:
            raise ValueError("target index out of range")
        out = np.zeros(self.coeffs.size + 1)
        out[:i] = self.coeffs[:i]
        out[i + 1:] = self.coeffs[i:]
        return out


# ---------------------------------------------------------------------------
# projection kernels
# ---------------------------------------------------------------------------

def project_l2_ball(v: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection of v onto the ball of given center and radius."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    v = np.asarray(v, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    diff = v - center
    nrm = float(np.linalg.norm(diff))
    if nrm <= radius:
        return v.copy()
    return center + (radius / nrm) * diff


def _simplex_thresholds(u: np.ndarray, budgets: np.ndarray) -> np.ndarray:
    """Per-column threshold theta with sum(max(u - theta, 0)) = budget.

    Columns of ``u`` must be non-negative with sums exceeding their budgets,
    and budgets must be positive.
    """
    s = -np.sort(-u, axis=0)
    css = np.cumsum(s, axis=0)
    k = np.arange(1, u.shape[0] + 1, dtype=np.float64)[:, None]
    rho = np.sum(s > (css - budgets[None, :]) / k, axis=0)
    idx = rho - 1
    return (css[idx, np.arange(u.shape[1])] - budgets) / rho


def _project_cols_simplex_cap(v: np.ndarray, tau: float) -> np.ndarray:
    """Columnwise projection onto {u >= 0, sum(u) <= tau} (in place)."""
    np.maximum(v, 0.0, out=v)
    over = v.sum(axis=0) > tau
    if np.any(over):
        sub = v[:, over]
        theta = _simplex_thresholds(sub, np.full(int(over.sum()), tau))
        v[:, over] = np.maximum(sub - theta[None, :], 0.0)
    return v


def project_simplex_cap(v: np.ndarray, tau: float) -> np.ndarray:
    """Euclidean projection of a vector onto {u >= 0, sum(u) <= tau}.

    Negative entries are clipped first; if the clipped vector already fits the
    budget it is returned, otherwise the sorted-threshold projection onto the
    scaled simplex {u >= 0, sum(u) = tau} applies.
    """
    if tau <= 0:
        raise ValueError("tau must be > 0")
    v = np.array(v, dtype=np.float64).reshape(-1, 1)
    return _project_cols_simplex_cap(v, tau)[:, 0]


def _project_cols_l1_ball(v: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Columnwise projection onto l1 balls of per-column radius (in place)."""
    zero = radii <= 0
    if np.any(zero):
        v[:, zero] = 0.0
    a = np.abs(v)
    over = (a.sum(axis=0) > radii) & ~zero
    if np.any(over):
        sub = a[:, over]
        theta = _simplex_thresholds(sub, radii[over])
        v[:, over] = np.sign(v[:, over]) * np.maximum(sub - theta[None, :], 0.0)
    return v


# ---------------------------------------------------------------------------
# accelerated projected gradient (batched, monotone)
# ---------------------------------------------------------------------------

def residual_and_gradient(x: np.ndarray, c: np.ndarray, b: np.ndarray):
    """Residual X c - b and gradient X^T (X c - b) of 0.5*||Xc - b||^2."""
    r = x @ c - b
    return r, x.T @ r


def _lipschitz_bound(x: np.ndarray, iters: int = 200, tol: float = 1e-12) -> float:
    """Upper bound on ||X||_2^2 by power iteration with a 2% safety margin."""
    n = x.shape[1]
    v = 1.0 + np.arange(n) / max(n, 1) * 1e-3  # deterministic, not axis-aligned
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = x.T @ (x @ v)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 1.0  # zero operator; any positive step is valid
        v = w / nw
        if abs(nw - lam) <= tol * nw:
            lam = nw
            break
        lam = nw
    return 1.02 * lam


def _colsq(a: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->j", a, a)


def _accel_pg(x, b, c0, project_cols, tol, max_iter, lipschitz,
              kkt_scale=None, record=None):
    """Columnwise min of 0.5*||Xc - b||^2 over constraint sets via projection.

    Accelerated projected gradient with a per-column monotone safeguard: an
    accelerated step that would raise a column's objective is replaced by the
    previous iterate and that column's momentum restarts, so objectives never
    increase. Stationarity is declared once one plain step from the current
    iterate moves it by at most tol * kkt_scale in gradient units.

    Returns (C, objectives, converged mask, stationarity residuals, iters).
    """
    m = b.shape[1]
    c = project_cols(np.array(c0, dtype=np.float64))
    r = x @ c - b
    f = 0.5 * _colsq(r)
    if kkt_scale is None:
        kkt_scale = np.maximum(1.0, np.abs(x.T @ b).max(axis=0) if m else 1.0)
    floor = 1e-12 * np.maximum(_colsq(b), 1e-300)
    z = c.copy()
    t = np.ones(m)
    if record is not None:
        record.append(f.copy())
    it = 0
    while it < max_iter:
        it += 1
        g = x.T @ (x @ z - b)
        cand = project_cols(z - g / lipschitz)
        fc = 0.5 * _colsq(x @ cand - b)
        worse = fc > f
        if np.any(worse):
            cand[:, worse] = c[:, worse]
            fc[worse] = f[worse]
            t[worse] = 1.0
        stalled = ~worse & (f - fc <= tol * np.maximum(f, floor))
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = cand + ((t - 1.0) / t_next)[None, :] * (cand - c)
        c, f, t = cand, fc, t_next
        if record is not None:
            record.append(f.copy())
        if np.all(stalled):
            # objective has flattened everywhere: verify stationarity with one
            # plain projected-gradient step from C itself
            g = x.T @ (x @ c - b)
            q = project_cols(c - g / lipschitz)
            kkt = lipschitz * np.abs(q - c).max(axis=0) if m else np.zeros(0)
            if np.all(kkt <= tol * kkt_scale):
                return c, f, np.ones(m, dtype=bool), kkt, it
            # adopt q unconditionally: a 1/L projected-gradient step cannot
            # increase the objective beyond evaluation noise, and skipping the
            # guard here lets stationarity keep improving once objective
            # differences fall below float resolution
            c = q
            f = 0.5 * _colsq(x @ q - b)
            z = c.copy()
            t = np.ones(m)
            if record is not None:
                record.append(f.copy())
    g = x.T @ (x @ c - b)
    q = project_cols(c - g / lipschitz)
    kkt = lipschitz * np.abs(q - c).max(axis=0) if m else np.zeros(0)
    return c, f, kkt <= tol * kkt_scale, kkt, it


# ---------------------------------------------------------------------------
# non-negative capped-simplex route
# ---------------------------------------------------------------------------

def solve_nnc_lasso(x: np.ndarray, xbar: np.ndarray, cfg: SolverConfig,
                    target_index: int | None = None) -> CoefVector:
    """Minimize ||Xc - xbar||_2 subject to c >= 0 and sum(c) <= cfg.tau."""
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(xbar, dtype=np.float64).reshape(-1, 1)
    tau = cfg.tau
    c, _, conv, kkt, _ = _accel_pg(
        x, b, np.zeros((x.shape[1], 1)),
        lambda v: _project_cols_simplex_cap(v, tau),
        cfg.tol, cfg.max_iter, _lipschitz_bound(x),
    )
    if not conv[0]:
        raise SolverConvergenceError(
            f"capped-simplex solve did not converge in {cfg.max_iter} iterations",
            gap=float(kkt[0]))
    return CoefVector(c[:, 0], target_index)


# ---------------------------------------------------------------------------
# penalized non-negative route (coordinate descent)
# ---------------------------------------------------------------------------

def _nn_lasso_cd(x, b, alpha, cfg, exclude_diagonal=False, record=None, c0=None):
    """Cyclic coordinate descent on 0.5*||Xc - b||^2 + alpha*sum(c), c >= 0.

    Runs all columns of ``b`` at once. With ``exclude_diagonal`` coefficient
    j of column j is pinned to zero (self-representation). Zero-norm
    dictionary columns are skipped with their coefficients fixed at zero.

    Returns (C, per-column KKT residuals, converged mask, sweeps).
    """
    d, m = b.shape
    n = x.shape[1]
    n2 = _colsq(x)
    atoms = np.flatnonzero(n2 > 0.0)
    if c0 is None:
        c = np.zeros((n, m))
        resid = b.copy()
    else:
        c = np.array(c0, dtype=np.float64)
        c[n2 <= 0.0, :] = 0.0
        np.maximum(c, 0.0, out=c)
        resid = b - x @ c
    tol_kkt = cfg.tol * max(1.0, float(np.abs(x.T @ b).max()) if b.size else 1.0)
    diag = np.arange(min(n, m))
    sweeps = 0
    viol_cols = np.full(m, np.inf)
    while sweeps < cfg.max_iter:
        sweeps += 1
        for j in atoms:
            xj = x[:, j]
            rho = xj @ resid + n2[j] * c[j]
            cnew = (rho - alpha) / n2[j]
            np.maximum(cnew, 0.0, out=cnew)
            if exclude_diagonal and j < m:
                cnew[j] = 0.0
            delta = cnew - c[j]
            if np.any(delta):
                resid -= np.outer(xj, delta)
                c[j] = cnew
        # fresh residual (kills incremental drift), then KKT certificate:
        # on the support |X_j^T r - alpha| small, off it X_j^T r <= alpha.
        resid = b - x @ c
        grad = x.T @ resid
        viol = np.where(c > 0.0, np.abs(grad - alpha),
                        np.maximum(grad - alpha, 0.0))
        viol[n2 <= 0.0, :] = 0.0
        if exclude_diagonal:
            viol[diag, diag] = 0.0
        if record is not None:
            record.append(0.5 * _colsq(resid) + alpha * c.sum(axis=0))
        viol_cols = viol.max(axis=0) if m else np.zeros(0)
        if np.all(viol_cols <= tol_kkt):
            return c, viol_cols, np.ones(m, dtype=bool), sweeps
    return c, viol_cols, viol_cols <= tol_kkt, sweeps


def solve_nn_lasso(x: np.ndarray, xbar: np.ndarray, alpha: float, cfg: SolverConfig,
                   target_index: int | None = None) -> CoefVector:
    """Minimize 0.5*||Xc - xbar||^2 + alpha*||c||_1 over c >= 0."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(xbar, dtype=np.float64).reshape(-1, 1)
    c, viol, conv, _ = _nn_lasso_cd(x, b, alpha, cfg)
    if not conv[0]:
        raise SolverConvergenceError(
            f"coordinate descent did not converge in {cfg.max_iter} sweeps",
            gap=float(viol[0]))
    return CoefVector(c[:, 0], target_index)


def _select_alpha(sums_by_alpha: np.ndarray) -> np.ndarray:
    """Grid index whose coefficient sum is closest to one, per column.

    Rows of ``sums_by_alpha`` follow the ascending alpha grid; ties go to the
    larger alpha, where the budget behaviour saturates.
    """
    gaps = np.abs(sums_by_alpha - 1.0)
    best = np.zeros(sums_by_alpha.shape[1], dtype=int)
    best_gap = gaps[0].copy()
    for i in range(1, sums_by_alpha.shape[0]):
        take = gaps[i] <= best_gap
        best[take] = i
        best_gap[take] = gaps[i][take]
    return best


def solve_nn_lasso_gridsearch(x: np.ndarray, xbar: np.ndarray, cfg: SolverConfig,
                              target_index: int | None = None) -> CoefVector:
    """Run solve_nn_lasso over cfg.alpha_grid, keep the most affine solution.

    The winner is the grid point whose coefficient sum lands closest to one;
    ties break toward the larger alpha. Individual grid-point failures are
    tolerated as long as at least one point succeeds.
    """
    solutions: dict[int, CoefVector] = {}
    failures: list[str] = []
    for i, alpha in enumerate(cfg.alpha_grid):
        try:
            solutions[i] = solve_nn_lasso(x, xbar, alpha, cfg, target_index)
        except SolverConvergenceError as exc:
            failures.append(f"alpha={alpha}: {exc}")
    if not solutions:
        raise SolverConvergenceError(
            "every grid point failed: " + "; ".join(failures))
    idx = sorted(solutions)
    sums = np.array([[solutions[i].coeffs.sum()] for i in idx])
    winner = idx[int(_select_alpha(sums)[0])]
    return solutions[winner]


# ---------------------------------------------------------------------------
# l1-minimization route with an l2 residual bound (BPDN)
# ---------------------------------------------------------------------------

def _bpdn_batch(x, b, sigma, cfg, exclude_diagonal=False, lipschitz=None,
                max_root_iter=80):
    """Per column: minimize ||c||_1 subject to ||Xc - b|| <= sigma.

    Root-finds the l1 radius at which the constrained least-squares residual
    meets sigma, driving the radius with safeguarded Newton steps on the
    (convex, decreasing) residual curve and overshooting by 5% so iterates
    cross onto the feasible side, which is the side returned.

    Returns (C, stationarity residuals, converged mask).
    """
    d, m = b.shape
    n = x.shape[1]
    if lipschitz is None:
        lipschitz = _lipschitz_bound(x)
    norms_b = np.linalg.norm(b, axis=0)
    corr = np.abs(x.T @ b)
    dd = np.arange(min(n, m))
    if exclude_diagonal:
        corr[dd, dd] = 0.0
    kkt_scale = np.maximum(1.0, corr.max(axis=0) if m else 1.0)
    del corr

    band = np.maximum(cfg.tol * np.maximum(sigma, 1e-3 * np.maximum(norms_b, 1.0)),
                      1e-13 * np.maximum(norms_b, 1.0))
    # residual target: sigma itself, or numerical zero when sigma == 0
    thresh = np.maximum(sigma, band) if sigma == 0.0 else np.full(m, float(sigma))

    c = np.zeros((n, m))
    done = norms_b <= thresh         # zero vector already feasible
    t_cur = np.zeros(m)
    phi = norms_b.copy()
    lo = np.zeros(m)                 # radius known infeasible
    hi = np.full(m, np.inf)          # radius known feasible
    c_hi = np.zeros((n, m))
    engine_ok = np.ones(m, dtype=bool)
    engine_ok_hi = np.ones(m, dtype=bool)
    inner_tol = 0.25 * cfg.tol       # keeps the final subgradient check within cfg.tol

    def solve_at(radii, mask):
        sub = c[:, mask].copy()
        bs = b[:, mask]
        if exclude_diagonal:
            gcols = np.flatnonzero(mask)
            in_rng = np.flatnonzero(gcols < n)
            rows = gcols[gcols < n]

            def proj(v):
                v[rows, in_rng] = 0.0
                return _project_cols_l1_ball(v, radii)
        else:
            def proj(v):
                return _project_cols_l1_ball(v, radii)
        out, f, conv, _, _ = _accel_pg(x, bs, sub, proj, inner_tol, cfg.max_iter,
                                       lipschitz, kkt_scale=kkt_scale[mask])
        return out, np.sqrt(2.0 * f), conv

    for _ in range(max_root_iter):
        work = ~done
        if not np.any(work):
            break
        rw = x @ c[:, work] - b[:, work]
        gw = np.abs(x.T @ rw)
        if exclude_diagonal:
            gcols = np.flatnonzero(work)
            sel_rows = gcols[gcols < n]
            gw[sel_rows, np.flatnonzero(gcols < n)] = 0.0
        gmax = gw.max(axis=0)
        phi_w = phi[work]
        t_w = t_cur[work]
        lo_w, hi_w = lo[work], hi[work]
        thr_w = thresh[work]

        stuck = gmax <= 1e-13 * kkt_scale[work]
        infeas = phi_w > thr_w
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (phi_w - thr_w) * phi_w / gmax
        prop = np.empty_like(t_w)
        # Newton from the infeasible side underestimates the root on a convex
        # decreasing curve; the 5% overshoot lets iterates cross it.
        prop[infeas] = t_w[infeas] + 1.05 * step[infeas]
        cross = infeas & np.isfinite(hi_w)
        prop[cross] = np.minimum(prop[cross], 0.5 * (t_w[cross] + hi_w[cross]))
        prop[~infeas] = 0.5 * (lo_w[~infeas] + t_w[~infeas])
        prop = np.maximum(prop, np.nextafter(lo_w, np.inf))

        cols = np.flatnonzero(work)[~stuck]
        done[np.flatnonzero(work)[stuck]] = True
        if cols.size == 0:
            continue
        mask = np.zeros(m, dtype=bool)
        mask[cols] = True
        radii = prop[~stuck]
        c_new, phi_new, eng_conv = solve_at(radii, mask)
        c[:, mask] = c_new
        phi[mask] = phi_new
        t_cur[mask] = radii
        engine_ok[mask] = eng_conv

        feas = phi_new <= thresh[cols]
        gidx = cols[feas]
        better = radii[feas] <= hi[gidx]
        hi[gidx] = np.where(better, radii[feas], hi[gidx])
        c_hi[:, gidx[better]] = c_new[:, np.flatnonzero(feas)[better]]
        engine_ok_hi[gidx[better]] = eng_conv[feas][better]
        bad = cols[~feas]
        lo[bad] = np.maximum(lo[bad], radii[~feas])
        close = feas & (thresh[cols] - phi_new <= band[cols])
        done[cols[close]] = True
        # radius slack while still infeasible: the unconstrained least-squares
        # minimum was reached, so the residual bound is unattainable; keep the
        # minimum-residual iterate
        slack = (radii - np.abs(c_new).sum(axis=0)) > 1e-6 * np.maximum(radii, 1.0)
        done[cols[slack & ~feas]] = True
        # a collapsed bracket also terminates (inner inexactness guard)
        tight = np.isfinite(hi) & ((hi - lo) <= 1e-12 * np.maximum(hi, 1.0))
        done |= tight

    have_hi = np.isfinite(hi) & (norms_b > thresh)
    c[:, have_hi] = c_hi[:, have_hi]
    engine_ok[have_hi] = engine_ok_hi[have_hi]
    zero_ok = norms_b <= thresh
    c[:, zero_ok] = 0.0

    # stationarity certificate: on the support, the correlation X^T (b - Xc)
    # must align with the active-set multiplier lam = max |X^T (b - Xc)|
    g = x.T @ (x @ c - b)
    if exclude_diagonal:
        g[dd, dd] = 0.0
    lam = np.abs(g).max(axis=0) if m else np.zeros(0)
    dev = np.where(c > 0.0, np.abs(g + lam[None, :]),
                   np.where(c < 0.0, np.abs(g - lam[None, :]), 0.0))
    stat = dev.max(axis=0) if m else np.zeros(0)
    stat[zero_ok] = 0.0
    converged = (done & engine_ok) | zero_ok
    return c, stat, converged


def solve_bpdn(x: np.ndarray, xbar: np.ndarray, cfg: SolverConfig,
               target_index: int | None = None) -> CoefVector:
    """Minimize ||c||_1 subject to ||Xc - xbar||_2 <= cfg.sigma_fit."""
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(xbar, dtype=np.float64).reshape(-1, 1)
    c, stat, conv = _bpdn_batch(x, b, cfg.sigma_fit, cfg)
    scale = max(1.0, float(np.abs(x.T @ b).max()))
    if not conv[0] or stat[0] > cfg.tol * scale:
        raise SolverConvergenceError(
            "residual-bound solve did not reach stationarity",
            gap=float(stat[0]))
    return CoefVector(c[:, 0], target_index)


# ---------------------------------------------------------------------------
# whole-matrix self-representation
# ---------------------------------------------------------------------------

def _diag_simplex_projector(tau: float):
    def proj(v):
        np.fill_diagonal(v, 0.0)
        return _project_cols_simplex_cap(v, tau)
    return proj


def self_representation(patches: np.ndarray, method: str, cfg: SolverConfig) -> np.ndarray:
    """Express every column of ``patches`` over all the others.

    Returns the N x N coefficient matrix C with an exact zero diagonal;
    column j holds patch j's coefficients. ``method`` is one of 'bpdn',
    'nnc', 'nn' (the 'nn' route runs its alpha grid search per column).
    """
    p = np.asarray(patches, dtype=np.float64)
    if p.ndim != 2:
        raise ValueError("patches must be a d x N matrix")
    n = p.shape[1]
    if method == "nnc":
        c, _, conv, kkt, _ = _accel_pg(
            p, p, np.zeros((n, n)), _diag_simplex_projector(cfg.tau),
            cfg.tol, cfg.max_iter, _lipschitz_bound(p))
        if not np.all(conv):
            bad = np.flatnonzero(~conv)
            raise SolverConvergenceError(
                f"{bad.size} columns unconverged after {cfg.max_iter} iterations",
                gap=float(kkt.max()), columns=bad.tolist())
    elif method == "nn":
        c = _nn_self_representation(p, cfg)
    elif method == "bpdn":
        c, stat, conv = _bpdn_batch(p, p, cfg.sigma_fit, cfg, exclude_diagonal=True)
        if not np.all(conv):
            bad = np.flatnonzero(~conv)
            raise SolverConvergenceError(
                f"{bad.size} columns unconverged in root finding",
                gap=float(stat.max()), columns=bad.tolist())
    else:
        raise ValueError(f"unknown method {method!r} (expected one of {METHODS})")
    np.fill_diagonal(c, 0.0)
    return c


def _nn_self_representation(p: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Grid-searched coordinate descent over every column at once."""
    n = p.shape[1]
    sums = np.zeros((len(cfg.alpha_grid), n))
    by_alpha: dict[int, np.ndarray] = {}
    warm = None
    # descending alphas: each solution warm-starts the next, denser one
    for i in range(len(cfg.alpha_grid) - 1, -1, -1):
        alpha = cfg.alpha_grid[i]
        c, viol, conv, _ = _nn_lasso_cd(p, p, alpha, cfg,
                                        exclude_diagonal=True, c0=warm)
        if not np.all(conv):
            bad = np.flatnonzero(~conv)
            raise SolverConvergenceError(
                f"{bad.size} columns unconverged at alpha={alpha}",
                gap=float(viol.max()), columns=bad.tolist())
        by_alpha[i] = c
        sums[i] = c.sum(axis=0)
        warm = c
    choice = _select_alpha(sums)
    out = np.empty((n, n))
    for i, c in by_alpha.items():
        cols = choice == i
        if np.any(cols):
            out[:, cols] = c[:, cols]
    return out
