"""Primal-dual interior-point solver for block SDPs with free variables.

Problem form (all blocks symmetric PSD, ``x_f`` free)::

    min  sum_j <C_j, X_j> + c_f' x_f
    s.t. sum_j A_j(X_j) + A_f x_f = b

    max  b' y
    s.t. C_j - A_j^*(y) = S_j  psd,   A_f' y = c_f

Path following with Nesterov-Todd scaling and a Mehrotra predictor-corrector.
Blocks of equal size are stored as stacked tensors ``(nb, d, d)`` so that many
small blocks are processed in a handful of batched BLAS calls.
"""

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import smat, svec, svec_dim
from .model import SolveReport, Status

log = logging.getLogger(__name__)

# once the stopping test is met, keep centering while ||XS|| still improves,
# giving up after this many steps without progress
POLISH_STEPS = 3
CENTER_SIGMA = 0.1


@dataclass(frozen=True, eq=False)
class ConicProgram:
    """Standard-form data over svec-stacked block variables.

    Columns of ``A`` (and entries of ``c``) are ordered block by block, each
    block contributing ``svec_dim(d)`` columns, followed by ``free_vars``
    columns for the free scalars.
    """

    blocks: tuple
    free_vars: int
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        blocks = tuple(int(d) for d in self.blocks)
        ncols = sum(svec_dim(d) for d in blocks) + self.free_vars
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.size == 0:
            A = A.reshape(len(b), ncols)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if A.shape != (len(b), ncols) or c.shape != (ncols,):
            raise ValueError(f"inconsistent shapes: A {A.shape}, b {b.shape}, c {c.shape}, expected {ncols} columns")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def m(self):
        return self.A.shape[0]

    def block_offsets(self):
        return np.concatenate([[0], np.cumsum([svec_dim(d) for d in self.blocks])]).astype(int)


@dataclass(frozen=True)
class IpmSettings:
    max_iter: int = 100
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    step_fraction: float = 0.98
    presolve: bool = True

    def __post_init__(self):
        if self.max_iter < 1 or self.gap_tol <= 0 or self.feas_tol <= 0:
            raise ValueError("IpmSettings fields must be positive")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step_fraction must lie in (0, 1)")


@dataclass
class ConicSolution:
    status: Status
    primal_value: float
    dual_value: float
    X: list
    x_free: np.ndarray
    y: np.ndarray
    S: list
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    history: list = field(default_factory=list, repr=False)


# -- presolve -----------------------------------------------------------------


def presolve(prog):
    """Drop numerically dependent equality rows.

    Returns ``(reduced_program, kept_rows)``; the program is returned unchanged
    (same object) when it already has full row rank.
    """
    m = prog.m
    if m == 0:
        return prog, np.arange(0)
    R, piv = scipy.linalg.qr(prog.A.T, mode="r", pivoting=True)
    diag = np.abs(np.diag(R))
    scale = max(diag[0], np.finfo(float).tiny) if diag.size else 0.0
    rank = int(np.sum(diag > 1e-10 * scale))
    if rank == m:
        return prog, np.arange(m)
    kept = np.sort(piv[:rank])
    log.info("presolve removed %d dependent row(s); max rhs mismatch %.2e",
             m - rank, _rhs_mismatch(prog, kept))
    reduced = ConicProgram(prog.blocks, prog.free_vars, prog.c, prog.A[kept], prog.b[kept])
    return reduced, kept


def _rhs_mismatch(prog, kept):
    """Largest inconsistency of the dropped right-hand sides."""
    dropped = np.setdiff1d(np.arange(prog.m), kept)
    if dropped.size == 0:
        return 0.0
    if kept.size == 0:
        return float(np.max(np.abs(prog.b[dropped])))
    coef, *_ = np.linalg.lstsq(prog.A[kept].T, prog.A[dropped].T, rcond=None)
    return float(np.max(np.abs(coef.T @ prog.b[kept] - prog.b[dropped])))


def _inconsistent(prog):
    """Solution object for equality rows that no point can satisfy."""
    X = [np.zeros((d, d)) for d in prog.blocks]
    return ConicSolution(Status.INFEASIBLE, np.inf, np.inf, X, np.zeros(prog.free_vars),
                         np.zeros(prog.m), [x.copy() for x in X], 0, np.inf, 0.0, np.inf)


# -- block bookkeeping --------------------------------------------------------


class _Group:
    """All blocks of one size ``d``."""

    def __init__(self, d, positions, cols):
        self.d = d
        self.positions = positions  # block numbers in the program
        self.cols = cols  # (nb, svec_dim(d)) column indices
        self.nb = len(positions)


def _groups(prog):
    offsets = prog.block_offsets()
    by_size = {}
    for j, d in enumerate(prog.blocks):
        by_size.setdefault(d, []).append(j)
    groups = []
    for d in sorted(by_size):
        pos = by_size[d]
        cols = np.stack([np.arange(offsets[j], offsets[j + 1]) for j in pos])
        groups.append(_Group(d, pos, cols))
    return groups


def _sym(t):
    return (t + np.swapaxes(t, -1, -2)) * 0.5


class _Kernel:
    def __init__(self, prog, settings):
        self.s = settings
        self.m = prog.m
        self.b = prog.b
        self.groups = _groups(prog)
        nblockcols = prog.A.shape[1] - prog.free_vars
        self.Af = prog.A[:, nblockcols:]
        self.cf = prog.c[nblockcols:]
        self.Ag = []  # (m, nb*d*d) flattened full-matrix form
        self.Cg = []
        for g in self.groups:
            self.Ag.append(smat(prog.A[:, g.cols], g.d).reshape(self.m, g.nb * g.d * g.d))
            self.Cg.append(smat(prog.c[g.cols], g.d))
        self.nu = sum(g.d * g.nb for g in self.groups)
        self.norm_b = np.max(np.abs(self.b), initial=0.0)
        self.norm_c = np.max(np.abs(prog.c), initial=0.0)
        self.norm_A = np.max(np.abs(prog.A), initial=0.0)

    # linear maps
    def aop(self, X, xf):
        out = self.Af @ xf if self.Af.size else np.zeros(self.m)
        for Ag, Xg in zip(self.Ag, X):
            out = out + Ag @ Xg.reshape(-1)
        return out

    def aadj(self, y):
        return [(y @ Ag).reshape(g.nb, g.d, g.d) for g, Ag in zip(self.groups, self.Ag)]

    def _evaluate(self, X, xf, y, S):
        rp = self.b - self.aop(X, xf)
        aty = self.aadj(y)
        Rd = [Cg - a - Sg for Cg, a, Sg in zip(self.Cg, aty, S)]
        rf = self.cf - self.Af.T @ y
        pobj = sum(float(np.vdot(Cg, Xg)) for Cg, Xg in zip(self.Cg, X)) + float(self.cf @ xf)
        dobj = float(self.b @ y)
        xs = sum(float(np.vdot(Xg, Sg)) for Xg, Sg in zip(X, S))
        pres = np.max(np.abs(rp), initial=0.0) / (1.0 + self.norm_b)
        dres = max(max((np.max(np.abs(r)) for r in Rd), default=0.0),
                   np.max(np.abs(rf), initial=0.0)) / (1.0 + self.norm_c)
        gap = max(abs(pobj - dobj), xs) / (1.0 + abs(pobj) + abs(dobj))
        # complementarity measured on the product itself, not only its trace
        kkt = np.sqrt(sum(float(np.sum((Xg @ Sg) ** 2)) for Xg, Sg in zip(X, S)))
        kkt /= max(self.nu, 1) * (1.0 + abs(pobj))
        return dict(X=X, xf=xf, y=y, S=S, rp=rp, aty=aty, Rd=Rd, rf=rf, pobj=pobj, dobj=dobj,
                    mu=xs / self.nu if self.nu else 0.0, pres=pres, dres=dres, gap=gap, kkt=kkt)

    def _merit(self, st):
        s = self.s
        return max(st["pres"] / s.feas_tol, st["dres"] / s.feas_tol, st["gap"] / s.gap_tol)

    def run(self):
        s = self.s
        tau = 1.0 + max(self.norm_A, self.norm_b, self.norm_c)
        X = [np.broadcast_to(tau * np.eye(g.d), (g.nb, g.d, g.d)).copy() for g in self.groups]
        S = [x.copy() for x in X]
        st = self._evaluate(X, np.zeros(self.Af.shape[1]), np.zeros(self.m), S)
        best = st
        polished = None  # best complementarity among optimal iterates
        polish_left = POLISH_STEPS
        history = []
        status = Status.MAX_ITER
        stalls = 0
        it = 0
        while True:
            history.append((it, st["pobj"], st["dobj"], st["pres"], st["dres"], st["gap"]))
            log.debug("it %3d pobj %+.9e dobj %+.9e pres %.1e dres %.1e gap %.1e",
                      it, st["pobj"], st["dobj"], st["pres"], st["dres"], st["gap"])
            if self._merit(st) <= self._merit(best):
                best = st
            if self._merit(st) <= 1.0:
                if polished is None or st["kkt"] < 0.9 * polished["kkt"]:
                    polished, polish_left = st, POLISH_STEPS
                else:
                    polish_left -= 1
                if st["kkt"] <= s.gap_tol or polish_left <= 0:
                    break
            elif polished is not None:
                break
            else:
                cert = self._certificate(st)
                if cert is not None:
                    status = cert
                    break
            if it == s.max_iter:
                break
            try:
                X, xf, y, S, ap, ad = self._step(st, center=polished is not None)
            except np.linalg.LinAlgError as exc:
                log.debug("linear algebra failure: %s", exc)
                if polished is None:
                    status = Status.NUMERICAL_TROUBLE
                break
            it += 1
            st = self._evaluate(X, xf, y, S)
            stalls = stalls + 1 if max(ap, ad) < 1e-8 else 0
            if stalls >= 5:
                if polished is None:
                    status = Status.NUMERICAL_TROUBLE
                break
        if polished is not None:
            return Status.OPTIMAL, polished, it, history
        if status in (Status.MAX_ITER, Status.NUMERICAL_TROUBLE):
            st = best
        return status, st, it, history

    def _certificate(self, st):
        tol = self.s.feas_tol
        if st["dobj"] > 0:
            r = max(max((np.max(np.abs(a + Sg)) for a, Sg in zip(st["aty"], st["S"])), default=0.0),
                    np.max(np.abs(self.Af.T @ st["y"]), initial=0.0)) / st["dobj"]
            if r <= tol:
                return Status.INFEASIBLE
        if st["pobj"] < 0:
            r = np.max(np.abs(self.aop(st["X"], st["xf"])), initial=0.0) / -st["pobj"]
            if r <= tol:
                return Status.UNBOUNDED
        return None

    def _scaling(self, X, S):
        """NT scaling: G with G^-1 X G^-T = G' S G = diag(lam)."""
        scal = []
        for Xg, Sg in zip(X, S):
            L = np.linalg.cholesky(Xg)
            R = np.linalg.cholesky(Sg)
            U, lam, Vt = np.linalg.svd(np.swapaxes(R, -1, -2) @ L)
            G = L @ np.swapaxes(Vt, -1, -2) / np.sqrt(lam)[:, None, :]
            Ginv = np.sqrt(lam)[:, :, None] * (Vt @ np.linalg.inv(L))
            W = G @ np.swapaxes(G, -1, -2)
            scal.append((G, Ginv, W, lam))
        return scal

    def _schur(self, scal):
        m = self.m
        M = np.zeros((m, m))
        for g, Ag, (G, Ginv, W, lam) in zip(self.groups, self.Ag, scal):
            A4 = Ag.reshape(m, g.nb, g.d, g.d)
            WAW = (W @ A4 @ W).reshape(m, g.nb * g.d * g.d)
            M += Ag @ WAW.T
        M = (M + M.T) * 0.5
        return M

    def _factor(self, M):
        m = M.shape[0]
        if m == 0:
            return None
        reg = 0.0
        base = max(np.max(np.abs(np.diag(M))), 1.0)
        for _ in range(8):
            try:
                return scipy.linalg.cho_factor(M + reg * np.eye(m), check_finite=False)
            except np.linalg.LinAlgError:
                reg = base * (1e-14 if reg == 0.0 else reg / base * 100)
        raise np.linalg.LinAlgError("Schur complement is not positive definite")

    def _step(self, st, center=False):
        X, xf, y, S = st["X"], st["xf"], st["y"], st["S"]
        rp, Rd, rf, mu = st["rp"], st["Rd"], st["rf"], st["mu"]
        sig = self.s.step_fraction
        scal = self._scaling(X, S)
        M = self._schur(scal)
        Mf = self._factor(M)
        Af = self.Af
        if Af.size and self.m:
            MiAf = scipy.linalg.cho_solve(Mf, Af)
            Kf = self._factor(_sym(Af.T @ MiAf))
        else:
            MiAf = Kf = None

        def solve_once(h, g):
            Mih = scipy.linalg.cho_solve(Mf, h)
            if Kf is None:
                return Mih, np.zeros(Af.shape[1])
            dxf = scipy.linalg.cho_solve(Kf, Af.T @ Mih - g)
            return Mih - MiAf @ dxf, dxf

        def solve(h):
            if self.m == 0:
                return np.zeros(0), np.zeros(Af.shape[1])
            dy, dxf = solve_once(h, rf)
            for _ in range(2):
                # iterative refinement against the unregularized saddle system
                rh = h - M @ dy - (Af @ dxf if Af.size else 0.0)
                rg = rf - Af.T @ dy
                ey, exf = solve_once(rh, rg)
                dy, dxf = dy + ey, dxf + exf
            return dy, dxf

        def direction(rc):
            T = []
            GuG = []
            for (G, Ginv, W, lam), rcg, Rdg in zip(scal, rc, Rd):
                u = rcg * (2.0 / (lam[:, :, None] + lam[:, None, :]))
                gug = G @ u @ np.swapaxes(G, -1, -2)
                GuG.append(gug)
                T.append(gug - W @ Rdg @ W)
            h = rp - self.aop(T, np.zeros(Af.shape[1]))
            dy, dxf = solve(h)
            ady = self.aadj(dy)
            dS = [_sym(Rdg - a) for Rdg, a in zip(Rd, ady)]
            dX = [_sym(gug - W @ ds @ W) for gug, ds, (G, Ginv, W, lam) in zip(GuG, dS, scal)]
            return dX, dxf, dy, dS

        def scaled(dX, dS):
            dxs, dss = [], []
            for dx, ds, (G, Ginv, W, lam) in zip(dX, dS, scal):
                dxs.append(_sym(Ginv @ dx @ np.swapaxes(Ginv, -1, -2)))
                dss.append(_sym(np.swapaxes(G, -1, -2) @ ds @ G))
            return dxs, dss

        def max_step(d_scaled):
            lo = np.inf
            for dg, (G, Ginv, W, lam) in zip(d_scaled, scal):
                r = 1.0 / np.sqrt(lam)
                e = np.linalg.eigvalsh(r[:, :, None] * dg * r[:, None, :])
                lo = min(lo, float(e.min()))
            return np.inf if lo >= 0 else -1.0 / lo

        # predictor
        rc = [-np.einsum("ki,ij->kij", lam ** 2, np.eye(lam.shape[1])) for (_, _, _, lam) in scal]
        dX, dxf, dy, dS = direction(rc)
        dxs, dss = scaled(dX, dS)
        ap = min(1.0, max_step(dxs))
        ad = min(1.0, max_step(dss))
        if self.nu:
            xs_aff = sum(float(np.vdot(x + ap * dx, s_ + ad * ds)) for x, dx, s_, ds in zip(X, dX, S, dS))
            sigma = float(np.clip((xs_aff / (mu * self.nu)) ** 3, 0.0, 1.0)) if mu > 0 else 0.0
        else:
            sigma = 0.0
        if center:
            sigma = max(sigma, CENTER_SIGMA)
        # corrector
        rc = []
        for (G, Ginv, W, lam), dx, ds in zip(scal, dxs, dss):
            eye = np.eye(lam.shape[1])
            rc.append(sigma * mu * eye - np.einsum("ki,ij->kij", lam ** 2, eye) - _sym(dx @ ds))
        dX, dxf, dy, dS = direction(rc)
        dxs, dss = scaled(dX, dS)
        ap = min(1.0, sig * max_step(dxs))
        ad = min(1.0, sig * max_step(dss))
        X = [_sym(x + ap * d) for x, d in zip(X, dX)]
        S = [_sym(s_ + ad * d) for s_, d in zip(S, dS)]
        return X, xf + ap * dxf, y + ad * dy, S, ap, ad


def _pack(prog, X, xf):
    """Concatenated svec variable vector of a block solution."""
    parts = [svec(Xj) for Xj in X] + [np.asarray(xf, dtype=float)]
    return np.concatenate(parts) if parts else np.zeros(0)


def solve(prog, settings=None):
    """Solve a :class:`ConicProgram`; never raises on solver failure, the
    outcome is reported through ``status``."""
    settings = settings or IpmSettings()
    reduced, kept = presolve(prog) if settings.presolve else (prog, np.arange(prog.m))
    if reduced is not prog and _rhs_mismatch(prog, kept) > settings.feas_tol * (1.0 + np.max(np.abs(prog.b))):
        log.warning("dependent equality rows have inconsistent right-hand sides")
        return _inconsistent(prog)
    kern = _Kernel(reduced, settings)
    status, st, it, history = kern.run()
    X, S = st["X"], st["S"]
    y_full = np.zeros(prog.m)
    y_full[kept] = st["y"]
    Xb = [None] * len(prog.blocks)
    Sb = [None] * len(prog.blocks)
    for g, Xg, Sg in zip(kern.groups, X, S):
        for i, j in enumerate(g.positions):
            Xb[j] = Xg[i]
            Sb[j] = Sg[i]
    if reduced is not prog and status == Status.OPTIMAL:
        # nearly dependent rows may be violated once the solution is large
        r = prog.A @ _pack(prog, Xb, st["xf"]) - prog.b
        viol = np.max(np.abs(r)) / (1.0 + np.max(np.abs(prog.b)))
        if viol > 10 * settings.feas_tol:
            log.info("dropped rows violated by %.1e; solving without presolve", viol)
            return solve(prog, dataclasses.replace(settings, presolve=False))
    return ConicSolution(status, st["pobj"], st["dobj"], Xb, st["xf"], y_full, Sb, it,
                         st["pres"], st["dres"], st["gap"], history)


def sdp_to_conic(prob):
    """Single-block program for the full-cone problem."""
    A = svec(prob.A).reshape(prob.m, svec_dim(prob.n))
    return ConicProgram((prob.n,), 0, svec(prob.C), A, prob.b)


def solve_sdp(prob, settings=None):
    """Full-cone solve of an :class:`~blockfw.model.SdpProblem`."""
    sol = solve(sdp_to_conic(prob), settings)
    return SolveReport(
        primal_value=sol.primal_value,
        dual_value=sol.dual_value,
        X=sol.X[0],
        y=sol.y,
        Z=sol.S[0],
        status=sol.status,
        iterations=sol.iterations,
    )
