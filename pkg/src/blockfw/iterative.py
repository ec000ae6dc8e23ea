"""Inner (upper bound) and outer (lower bound) iterations with Cholesky basis updates.

Inner:  U_t = min <C, X> over X in FW(V_t),  V_{t+1} = chol(X_t)
Outer:  L_t = max b'y with C - sum y_i A_i in FW(V_t),  V_{t+1} = chol(C - sum y_i A_i)

Both start from V_1 = I.  Because X_t = V_{t+1}' I V_{t+1} and I lies in every
FW cone, the previous optimum stays feasible, so the bounds are monotone.
"""

import csv
import io
import logging
import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .cone import BlockCertificate
from .errors import FirstIterationInfeasible, NotFactorizable, NumericalTrouble, SolverFailure
from .ipm import IpmSettings, solve
from .linalg import CholFactor, chol_psd, min_eig, spectral_norm, svec
from .model import Status, residuals
from .partition import Partition
from .subproblem import build_outer_dual, gather, scatter

log = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-7
# solutions the kernel could not polish to full tolerance are still used when
# they are this accurate
FALLBACK_TOL = 1e-6
# iterates are lifted to this relative eigenvalue floor before factoring; it
# matches the threshold below which the strict-progress hypotheses are not flagged
BASIS_FLOOR = 1e-8


@dataclass(frozen=True)
class RunConfig:
    partition: Partition
    max_iter: int = 10
    stop_tol: float = 1e-9
    basis_update: str = "cholesky"
    settings: IpmSettings = field(default_factory=IpmSettings)

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be nonnegative")
        if self.basis_update != "cholesky":
            raise ValueError(f"unsupported basis update {self.basis_update!r}")


@dataclass
class IterationRecord:
    t: int
    bound: float
    basis_shift: float  # shift chol_psd needed to factor this iterate
    min_eig: float  # smallest eigenvalue of X_t (inner) or Z_t (outer)
    iterate_norm: float
    status: Status
    wall_ms: float


@dataclass
class IterationTrace:
    kind: str  # "inner" or "outer"
    partition: Partition
    records: list = field(default_factory=list)
    exact: bool = False

    CSV_HEADER = ("t", "bound", "basis_shift", "min_eig", "status", "wall_ms")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def bounds(self):
        return np.array([r.bound for r in self.records])

    def bound_at(self, t):
        """Bound after iteration t (the last one if the run stopped earlier)."""
        if not self.records:
            raise ValueError("empty trace")
        return self.records[min(t, len(self.records)) - 1].bound

    def best(self):
        b = self.bounds
        return float(b.min() if self.kind == "inner" else b.max())

    def is_monotone(self, slack=MONOTONE_SLACK):
        b = self.bounds
        for prev, cur in zip(b[:-1], b[1:]):
            tol = slack * (1.0 + abs(prev))
            if self.kind == "inner" and cur > prev + tol:
                return False
            if self.kind == "outer" and cur < prev - tol:
                return False
        return True

    def to_csv(self, fh=None):
        own = fh is None
        fh = io.StringIO() if own else fh
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.CSV_HEADER)
        for r in self.records:
            w.writerow([r.t, "%.17g" % r.bound, "%.17g" % r.basis_shift, "%.17g" % r.min_eig,
                        r.status.value, "%.3f" % r.wall_ms])
        return fh.getvalue() if own else None


class RunResult(NamedTuple):
    trace: IterationTrace
    bound: float
    solution: np.ndarray  # X (inner) or y (outer)


def _usable(sol):
    if sol.status == Status.OPTIMAL:
        return True
    return (
        sol.status in (Status.MAX_ITER, Status.NUMERICAL_TROUBLE)
        and max(sol.primal_residual, sol.dual_residual, sol.gap) <= FALLBACK_TOL
    )


def _fail(sol, t, trace, cfg):
    if t == 1 and sol.status == Status.INFEASIBLE:
        raise FirstIterationInfeasible(
            f"the first {trace.kind} subproblem with partition {cfg.partition} is infeasible; "
            "try a coarser partition",
            trace=trace,
        )
    raise SolverFailure(
        f"{trace.kind} subproblem at t={t} ended with status {sol.status.value}",
        status=sol.status,
        trace=trace,
    )


def _factor(M):
    """Next basis from an iterate, lifted to a minimum eigenvalue of
    BASIS_FLOOR * ||M|| so that the next subproblem stays well conditioned."""
    scale = max(spectral_norm(M), 1.0)
    lam = min_eig(M)
    if lam < -1e-2 * scale:
        return None
    lift = max(0.0, BASIS_FLOOR * scale - lam)
    try:
        f = chol_psd(M + lift * np.eye(M.shape[0]), eps=1e-12 * scale)
    except NotFactorizable:
        return None
    return CholFactor(f.upper, f.shift + lift)


def _check_monotone(trace, rec, prev):
    if prev is None:
        return
    slack = MONOTONE_SLACK * (1.0 + abs(prev.bound)) + prev.basis_shift * (1.0 + prev.iterate_norm)
    worse = rec.bound - prev.bound if trace.kind == "inner" else prev.bound - rec.bound
    if worse > slack:
        raise NumericalTrouble(
            f"{trace.kind} bound regressed by {worse:.3e} at t={rec.t} (allowed {slack:.3e})",
            status=Status.NUMERICAL_TROUBLE,
            trace=trace,
        )


def _stalled(trace, rec, prev, cfg):
    if prev is None:
        return False
    gain = prev.bound - rec.bound if trace.kind == "inner" else rec.bound - prev.bound
    return gain < cfg.stop_tol * max(1.0, abs(rec.bound))


def run_inner(prob, cfg):
    """Upper bounds U_t; returns ``(trace, best_upper, X_best)``."""
    part = cfg.partition
    trace = IterationTrace("inner", part, exact=part.p == 2)
    basis = CholFactor.identity(prob.n)
    X_best, prev = None, None
    for t in range(1, cfg.max_iter + 1):
        tic = time.perf_counter()
        sub = scatter(prob, part, basis)
        sol = solve(sub.to_conic(), cfg.settings)
        if not _usable(sol):
            _fail(sol, t, trace, cfg)
        flat = np.concatenate([svec(M) for M in sol.X])
        X = gather(BlockCertificate.from_flat(part, flat), basis)
        bound = sol.primal_value
        viol = np.max(np.abs(residuals(prob, X)), initial=0.0) / (1.0 + np.max(np.abs(prob.b), initial=0.0))
        if viol > FALLBACK_TOL:
            raise NumericalTrouble(f"inner iterate at t={t} violates the constraints by {viol:.2e}",
                                   status=Status.NUMERICAL_TROUBLE, trace=trace)
        nxt = _factor(X)
        rec = IterationRecord(
            t=t,
            bound=float(bound),
            basis_shift=np.inf if nxt is None else nxt.shift,
            min_eig=min_eig(X),
            iterate_norm=spectral_norm(X),
            status=sol.status,
            wall_ms=(time.perf_counter() - tic) * 1e3,
        )
        _check_monotone(trace, rec, prev)
        trace.records.append(rec)
        log.info("inner t=%d U=%.10g shift=%.1e", t, rec.bound, rec.basis_shift)
        if prev is None or rec.bound <= prev.bound:
            X_best = X
        if trace.exact or nxt is None or _stalled(trace, rec, prev, cfg):
            break
        basis, prev = nxt, rec
    return RunResult(trace, trace.bound_at(len(trace)), X_best)


def run_outer(prob, cfg):
    """Lower bounds L_t; returns ``(trace, best_lower, y_best)``."""
    part = cfg.partition
    trace = IterationTrace("outer", part, exact=part.p == 2)
    basis = CholFactor.identity(prob.n)
    y_best, prev = None, None
    for t in range(1, cfg.max_iter + 1):
        tic = time.perf_counter()
        sub = build_outer_dual(prob, part, basis)
        sol = solve(sub.to_conic(), cfg.settings)
        if not _usable(sol):
            _fail(sol, t, trace, cfg)
        y = np.array(sol.x_free, dtype=float)
        Z = prob.dual_slack(y)
        nxt = _factor(Z)
        rec = IterationRecord(
            t=t,
            bound=float(prob.b @ y) if prob.m else 0.0,
            basis_shift=np.inf if nxt is None else nxt.shift,
            min_eig=min_eig(Z),
            iterate_norm=spectral_norm(Z),
            status=sol.status,
            wall_ms=(time.perf_counter() - tic) * 1e3,
        )
        _check_monotone(trace, rec, prev)
        trace.records.append(rec)
        log.info("outer t=%d L=%.10g shift=%.1e", t, rec.bound, rec.basis_shift)
        if prev is None or rec.bound >= prev.bound:
            y_best = y
        if trace.exact or nxt is None or _stalled(trace, rec, prev, cfg):
            break
        basis, prev = nxt, rec
    return RunResult(trace, trace.bound_at(len(trace)), y_best)


def check_strict_hypotheses(trace):
    """(t, holds) with holds iff the iterate was safely positive definite."""
    out = []
    for r in trace.records:
        holds = r.basis_shift == 0.0 and r.min_eig > 1e-8 * max(r.iterate_norm, 1.0)
        out.append((r.t, bool(holds)))
    return out
