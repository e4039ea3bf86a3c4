"""Small dense semidefinite programming solver.

Problems are given in linear-matrix-inequality form::

    minimize    c^T x + offset
    subject to  F0_b + sum_k x_k F_kb  >= 0     for every block b
                A x = b

with Hermitian (complex) blocks and real ``x``. The associated dual is::

    maximize    -sum_b Re Tr[F0_b Z_b] - b^T y + offset
    subject to  sum_b Re Tr[F_kb Z_b] = c_k + (A^T y)_k,   Z_b >= 0

The solver is a homogeneous self-dual primal-dual interior-point method with
Nesterov-Todd scaling and a Mehrotra predictor-corrector step. The embedding
variables ``tau``/``kappa`` give infeasibility certificates when ``tau``
collapses.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

log = logging.getLogger(__name__)

STEP = 0.99


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical-failure"


class SdpError(ValueError):
    """Inconsistent problem data."""


@dataclass(frozen=True)
class LmiBlock:
    """One constraint ``constant + sum_k x_k coefficients[k] >= 0``."""

    constant: np.ndarray
    coefficients: np.ndarray  # (n, d, d)

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    def evaluate(self, x) -> np.ndarray:
        return self.constant + np.einsum("k,kij->ij", np.asarray(x, dtype=float), self.coefficients)


@dataclass
class SdpProblem:
    objective: np.ndarray
    blocks: list[LmiBlock]
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    offset: float = 0.0
    x0: np.ndarray | None = None
    sense: str = "min"
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        if self.sense not in ("min", "max"):
            raise SdpError(f"sense must be 'min' or 'max', not {self.sense!r}")
        n = self.objective.size
        blocks = []
        for b in self.blocks:
            f0 = np.asarray(b.constant, dtype=complex)
            fk = np.asarray(b.coefficients, dtype=complex).reshape(-1, *f0.shape)
            if f0.ndim != 2 or f0.shape[0] != f0.shape[1]:
                raise SdpError("block constant must be square")
            if fk.shape[0] != n:
                raise SdpError(f"block has {fk.shape[0]} coefficient matrices for {n} variables")
            if np.max(np.abs(f0 - f0.conj().T), initial=0) > 1e-10 or np.max(
                np.abs(fk - fk.conj().transpose(0, 2, 1)), initial=0
            ) > 1e-10:
                raise SdpError("block matrices must be Hermitian")
            blocks.append(LmiBlock(f0, fk))
        self.blocks = blocks
        if not blocks:
            raise SdpError("at least one LMI block is required")
        if self.eq_matrix is not None:
            self.eq_matrix = np.asarray(self.eq_matrix, dtype=float).reshape(-1, n)
            self.eq_rhs = np.asarray(self.eq_rhs, dtype=float).reshape(-1)
            if self.eq_rhs.size != self.eq_matrix.shape[0]:
                raise SdpError("equality matrix and right-hand side disagree in length")
        else:
            self.eq_matrix = np.zeros((0, n))
            self.eq_rhs = np.zeros(0)

    @property
    def num_vars(self) -> int:
        return self.objective.size

    def primal_value(self, x) -> float:
        return float(self.objective @ x) + self.offset

    def min_objective(self) -> np.ndarray:
        return self.objective if self.sense == "min" else -self.objective


@dataclass(frozen=True)
class SolverOptions:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iters: int = 100
    infeas_tol: float = 1e-8


@dataclass
class SdpSolution:
    status: Status
    x: np.ndarray
    primal_value: float
    dual_value: float
    duals: list[np.ndarray]
    eq_duals: np.ndarray
    iterations: int
    complementarity: float
    primal_residual: float
    dual_residual: float
    infeasibility: str | None = None
    message: str = ""

    @property
    def gap(self) -> float:
        return abs(self.primal_value - self.dual_value)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


# ---------------------------------------------------------------------------
# cone helpers; a "cone point" is a list of Hermitian blocks


def _inner(u: list, v: list) -> float:
    return float(sum(np.real(np.vdot(a, b)) for a, b in zip(u, v)))


def _herm(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def _factor(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(a)
        return v * np.sqrt(np.maximum(w, 1e-300))


class _Scaling:
    """Nesterov-Todd scaling R for one block: R^H z R = R^{-1} s R^{-H} = diag(lam)."""

    __slots__ = ("r", "rinv", "lam")

    def __init__(self, s: np.ndarray, z: np.ndarray):
        ls = _factor(s)
        lz = _factor(z)
        u, lam, vh = np.linalg.svd(lz.conj().T @ ls)
        isq = 1 / np.sqrt(lam)
        self.r = (ls @ vh.conj().T) * isq
        self.rinv = isq[:, None] * (u.conj().T @ lz.conj().T)
        self.lam = lam

    def scale_z(self, dz):  # W dz
        return self.r.conj().T @ dz @ self.r

    def unscale_s(self, v):  # W^T v
        return self.r @ v @ self.r.conj().T

    def scale_s(self, ds):  # W^{-T} ds
        return self.rinv @ ds @ self.rinv.conj().T

    def unscale_z(self, v):  # W^{-1} v
        return self.rinv.conj().T @ v @ self.rinv


def _sym_div(lam: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Solve (diag(lam) X + X diag(lam))/2 = Y."""
    return 2 * y / (lam[:, None] + lam[None, :])


def _max_step(lam: np.ndarray, d: np.ndarray) -> float:
    """Largest alpha with diag(lam) + alpha d >= 0 (inf if unbounded)."""
    isq = 1 / np.sqrt(lam)
    m = _herm(isq[:, None] * d * isq[None, :])
    low = float(np.linalg.eigvalsh(m)[0])
    return np.inf if low >= 0 else -1.0 / low


# ---------------------------------------------------------------------------


def _reduce(problem: SdpProblem, tol: float = 1e-12):
    """Drop variable directions that no constraint sees and redundant equalities.

    Returns (basis V, c', A', b', status) where x = V x'. ``status`` is
    "unbounded" when the objective moves along an unconstrained direction and
    "inconsistent" when the equality system has no solution.
    """
    n = problem.num_vars
    if n == 0:
        ok = np.linalg.norm(problem.eq_rhs) <= 1e-9
        return np.zeros((0, 0)), np.zeros(0), np.zeros((0, 0)), np.zeros(0), np.zeros((problem.eq_rhs.size, 0)), (
            None if ok else "inconsistent"
        )
    cols = [np.concatenate([b.coefficients.reshape(n, -1).real, b.coefficients.reshape(n, -1).imag], axis=1) for b in problem.blocks]
    stacked = np.concatenate(cols + [problem.eq_matrix.T], axis=1)
    u, sv, _ = np.linalg.svd(stacked, full_matrices=False)
    rank = int(np.sum(sv > tol * max(1.0, sv[0] if sv.size else 0.0)))
    v = u[:, :rank]
    obj = problem.min_objective()
    c = v.T @ obj
    status = None
    if np.linalg.norm(obj - v @ c) > 1e-9 * max(1.0, np.linalg.norm(obj)):
        status = "unbounded"
    a = problem.eq_matrix @ v
    b = problem.eq_rhs
    if a.shape[0]:
        ua, sa, vah = np.linalg.svd(a, full_matrices=False)
        ra = int(np.sum(sa > tol * max(1.0, sa[0])))
        if np.linalg.norm(b - ua[:, :ra] @ (ua[:, :ra].T @ b)) > 1e-9 * max(1.0, np.linalg.norm(b)):
            status = status or "inconsistent"
        a = sa[:ra, None] * vah[:ra]
        b = ua[:, :ra].T @ b
        red_rows = ua[:, :ra]
    else:
        red_rows = np.zeros((0, 0))
    return v, c, a, b, red_rows, status


def solve(problem: SdpProblem, options: SolverOptions | None = None) -> SdpSolution:
    """Solve ``problem``; always returns a solution object with a status."""
    opts = options or SolverOptions()
    v, c, A, b, eq_rows, pre = _reduce(problem)
    blocks = [(blk.constant, np.einsum("kl,kij->lij", v, blk.coefficients)) for blk in problem.blocks]
    n, p = c.size, A.shape[0]
    dims = [f0.shape[0] for f0, _ in blocks]
    m = sum(dims)
    h = [f0 for f0, _ in blocks]

    def empty(status, msg, infeas=None, it=0):
        return SdpSolution(
            status, np.full(problem.num_vars, np.nan), np.nan, np.nan, [np.full((d, d), np.nan) for d in dims],
            np.full(problem.eq_rhs.size, np.nan), it, np.nan, np.nan, np.nan, infeas, msg,
        )

    if pre == "inconsistent":
        return empty(Status.INFEASIBLE, "equality constraints are inconsistent", "primal")
    if pre == "unbounded":
        return empty(Status.INFEASIBLE, "objective is unbounded along an unconstrained direction", "dual")
    if n == 0:
        ok = all(np.linalg.eigvalsh(f0)[0] >= -opts.feas_tol for f0 in h)
        if not ok:
            return empty(Status.INFEASIBLE, "constant constraints are violated", "primal")
        return SdpSolution(
            Status.OPTIMAL, np.zeros(problem.num_vars), problem.offset, problem.offset,
            [np.zeros((d, d), dtype=complex) for d in dims], np.zeros(problem.eq_rhs.size), 0, 0.0, 0.0, 0.0,
            None, "no free variables",
        )

    def G(x):  # G x = -sum_k x_k F_k, so that s = h - G x
        return [-np.einsum("k,kij->ij", x, fk) for _, fk in blocks]

    def GT(zs):
        out = np.zeros(n)
        for (_, fk), z in zip(blocks, zs):
            out -= np.real(np.einsum("kij,ji->k", fk, z))
        return out

    resx0 = max(1.0, np.linalg.norm(c))
    resy0 = max(1.0, np.linalg.norm(b))
    resz0 = max(1.0, np.sqrt(_inner(h, h)))

    # starting point
    x = np.zeros(n)
    s = [np.eye(d, dtype=complex) for d in dims]
    if problem.x0 is not None:
        x0 = v.T @ np.asarray(problem.x0, dtype=float)
        s0 = [f0 - g for f0, g in zip(h, G(x0))]
        if all(np.linalg.eigvalsh(si)[0] > 1e-8 for si in s0) and np.linalg.norm(A @ x0 - b) <= 1e-12:
            x, s = x0, s0
    z = [np.eye(d, dtype=complex) for d in dims]
    y = np.zeros(p)
    tau, kappa = 1.0, 1.0

    best = None
    status = Status.NUMERICAL_FAILURE
    infeas = None
    msg = "iteration limit reached"
    it = 0
    for it in range(opts.max_iters + 1):
        gx = G(x)
        rx = A.T @ y + GT(z) + c * tau
        ry = A @ x - b * tau
        rz = [si + gi - hi * tau for si, gi, hi in zip(s, gx, h)]
        ctx, bty, htz = float(c @ x), float(b @ y), _inner(h, z)
        rt = kappa + ctx + bty + htz
        sz = _inner(s, z)
        mu = (sz + tau * kappa) / (m + 1)

        pres = max(np.linalg.norm(ry) / resy0, np.sqrt(_inner(rz, rz)) / resz0) / tau
        dres = np.linalg.norm(rx) / resx0 / tau
        pcost, dcost = ctx / tau, -(bty + htz) / tau
        gap = sz / tau**2
        rel = max(gap, abs(pcost - dcost)) / (1 + min(abs(pcost), abs(dcost)))
        log.debug("it %d pcost %.9g dcost %.9g gap %.2e pres %.2e dres %.2e tau %.2e kappa %.2e",
                  it, pcost, dcost, gap, pres, dres, tau, kappa)
        score = max(pres, dres, rel)
        if best is None or score < best[0]:
            best = (score, x / tau, [zi / tau for zi in z], y / tau, it, sz / tau**2, pres, dres)
        if pres <= opts.feas_tol and dres <= opts.feas_tol and rel <= opts.gap_tol:
            status, msg = Status.OPTIMAL, "optimal"
            break

        # infeasibility certificates (ratio tests) and the tau/kappa collapse
        pinf = dinf = np.inf
        if htz + bty < 0:
            pinf = np.linalg.norm(A.T @ y + GT(z)) / resx0 / -(htz + bty)
        if ctx < 0:
            ray = [gi + si for gi, si in zip(gx, s)]
            dinf = max(np.linalg.norm(A @ x) / resy0, np.sqrt(_inner(ray, ray)) / resz0) / -ctx
        collapsed = tau / kappa < opts.infeas_tol
        if pinf <= opts.feas_tol or (collapsed and htz + bty < 0 and pinf < np.sqrt(opts.feas_tol)):
            status, infeas, msg = Status.INFEASIBLE, "primal", "primal infeasible (dual improving ray)"
            break
        if dinf <= opts.feas_tol or (collapsed and ctx < 0 and dinf < np.sqrt(opts.feas_tol)):
            status, infeas, msg = Status.INFEASIBLE, "dual", "dual infeasible (primal unbounded ray)"
            break
        if it == opts.max_iters:
            break

        try:
            scal = [_Scaling(si, zi) for si, zi in zip(s, z)]
        except np.linalg.LinAlgError:
            msg = "scaling failed"
            break
        lam = [sc.lam for sc in scal]

        # Schur complement of the scaled KKT system
        ft = [np.einsum("ab,kbc,dc->kad", sc.rinv, fk, sc.rinv.conj()) for sc, (_, fk) in zip(scal, blocks)]
        M = sum(np.real(f.reshape(n, -1) @ f.reshape(n, -1).conj().T) for f in ft)
        if p:
            K = np.block([[M, A.T], [A, np.zeros((p, p))]])
        else:
            K = M
        try:
            fac = scipy.linalg.lu_factor(K, check_finite=True)
        except (ValueError, np.linalg.LinAlgError):
            msg = "singular Newton system"
            break

        def kkt_once(bx, by, bz):
            bzt = [sc.scale_s(bi) for sc, bi in zip(scal, bz)]
            rhs_x = bx - sum(np.real(np.einsum("kij,ji->k", f, bt)) for f, bt in zip(ft, bzt))
            sol = scipy.linalg.lu_solve(fac, np.concatenate([rhs_x, by]))
            ux, uy = sol[:n], sol[n:]
            uz = [sc.unscale_z(-np.einsum("k,kij->ij", ux, f) - bt) for sc, f, bt in zip(scal, ft, bzt)]
            return ux, uy, uz

        def kkt(bx, by, bz):
            # solve [0 A^T G^T; A 0 0; G 0 -W^T W] u = rhs with two refinement passes
            ux, uy, uz = kkt_once(bx, by, bz)
            for _ in range(2):
                ex = bx - (A.T @ uy + GT(uz))
                ey = by - A @ ux
                gu = G(ux)
                ez = [bi - (gi - sc.unscale_s(sc.scale_z(zi))) for bi, gi, sc, zi in zip(bz, gu, scal, uz)]
                dx_, dy_, dz_ = kkt_once(ex, ey, ez)
                ux, uy = ux + dx_, uy + dy_
                uz = [a + b_ for a, b_ in zip(uz, dz_)]
            return ux, uy, uz

        x1, y1, z1 = kkt(-c, b, h)
        den1 = float(c @ x1 + b @ y1) + _inner(h, z1) - kappa / tau

        def direction(sigma, corr_s, corr_tk):
            eta = 1 - sigma
            bx, by = -eta * rx, -eta * ry
            bz = [-eta * r for r in rz]
            bt = -eta * rt
            rs = []
            for la, cs in zip(lam, corr_s):
                target = -np.diag(la**2) + sigma * mu * np.eye(la.size)
                if cs is not None:
                    target = target - cs
                rs.append(_sym_div(la, target))
            cent_t = -tau * kappa + sigma * mu - corr_tk
            bz2 = [bi - sc.unscale_s(r) for bi, sc, r in zip(bz, scal, rs)]
            ux, uy, uz = kkt(bx, by, bz2)
            num = bt - cent_t / tau - (float(c @ ux + b @ uy) + _inner(h, uz))
            dtau = num / den1
            dx, dy = ux + dtau * x1, uy + dtau * y1
            dz = [a + dtau * a1 for a, a1 in zip(uz, z1)]
            dzt = [sc.scale_z(d) for sc, d in zip(scal, dz)]
            dst = [_herm(r - d) for r, d in zip(rs, dzt)]
            dkappa = (cent_t - kappa * dtau) / tau
            return dx, dy, dz, dtau, dkappa, dst, [_herm(d) for d in dzt]

        def steplen(dtau, dkappa, dst, dzt):
            alpha = np.inf
            for la, a, b_ in zip(lam, dst, dzt):
                alpha = min(alpha, _max_step(la, a), _max_step(la, b_))
            if dtau < 0:
                alpha = min(alpha, -tau / dtau)
            if dkappa < 0:
                alpha = min(alpha, -kappa / dkappa)
            return alpha

        try:
            _, _, _, dtau_a, dkap_a, dst_a, dzt_a = direction(0.0, [None] * len(lam), 0.0)
            alpha_a = min(1.0, steplen(dtau_a, dkap_a, dst_a, dzt_a))
            sigma = (1 - alpha_a) ** 3
            corr = [_herm(a @ b_) for a, b_ in zip(dst_a, dzt_a)]
            dx, dy, dz, dtau, dkap, dst, dzt = direction(sigma, corr, dtau_a * dkap_a)
            alpha = min(1.0, STEP * steplen(dtau, dkap, dst, dzt))
        except np.linalg.LinAlgError:
            msg = "linear algebra failure"
            break
        if not np.isfinite(alpha) or alpha <= 0:
            msg = "zero step"
            break

        x = x + alpha * dx
        y = y + alpha * dy
        z = [_herm(zi + alpha * d) for zi, d in zip(z, dz)]
        s = [_herm(sc.unscale_s(np.diag(la) + alpha * d)) for sc, la, d in zip(scal, lam, dst)]
        tau += alpha * dtau
        kappa += alpha * dkap

    if status is Status.INFEASIBLE:
        # report normalized certificate directions
        if infeas == "primal":
            scale = -(htz + bty)
            zs, yv, xv = [zi / scale for zi in z], y / scale, np.full(n, np.nan)
        else:
            scale = -ctx
            xv, zs, yv = x / scale, [np.full_like(zi, np.nan) for zi in z], np.full(p, np.nan)
        return SdpSolution(
            status, v @ xv, np.nan, np.nan, zs, _lift_y(yv, eq_rows, problem), it, np.nan, pres, dres, infeas, msg
        )

    if status is Status.OPTIMAL:
        xs, zs, ys, comp = x / tau, [zi / tau for zi in z], y / tau, sz / tau**2
        pr, dr = pres, dres
    else:
        _, xs, zs, ys, it_best, comp, pr, dr = best
        msg = f"{msg}; best iterate from iteration {it_best} attached"
        log.warning("SDP solve did not converge: %s", msg)
    xfull = v @ xs
    sign = 1.0 if problem.sense == "min" else -1.0
    return SdpSolution(
        status,
        xfull,
        problem.primal_value(xfull),
        sign * -(float(b @ ys) + _inner(h, zs)) + problem.offset,
        [_herm(zi) for zi in zs],
        _lift_y(ys, eq_rows, problem),
        it,
        comp,
        pr,
        dr,
        None,
        msg,
    )


def _lift_y(y, eq_rows, problem):
    if problem.eq_rhs.size == 0:
        return np.zeros(0)
    return eq_rows @ y
