"""Standard-form SDP data and SDPA sparse (.dat-s) ingestion.

An :class:`SdpProblem` is the pair

    min <C, X>  s.t.  <A_i, X> = b_i,  X psd
    max b'y     s.t.  C - sum_i y_i A_i psd

SDPA files store the maximization ``max <F0, Y> s.t. <F_i, Y> = c_i``; parsing
sets ``C = -F0`` and records ``objective_flipped`` in ``meta``, so that the
internal minimum equals minus the SDPA objective.
"""

import enum
import logging
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, ParseError, UnsupportedFeature
from .linalg import svec, sym

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITER = "MaxIter"
    NUMERICAL_TROUBLE = "NumericalTrouble"


@dataclass(frozen=True, eq=False)
class SdpProblem:
    C: np.ndarray
    A: np.ndarray  # shape (m, n, n)
    b: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        C = sym(self.C)
        n = C.shape[0]
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = np.zeros((0, n, n))
        if A.ndim != 3 or A.shape[1:] != (n, n):
            raise DimensionMismatch(f"constraint stack has shape {A.shape}, expected (m, {n}, {n})")
        A = (A + A.transpose(0, 2, 1)) * 0.5
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if len(self.b) == 0:
            b = np.zeros(0)
        if b.shape != (A.shape[0],):
            raise DimensionMismatch(f"b has length {b.shape}, but there are {A.shape[0]} constraints")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if A.shape[0]:
            rank = np.linalg.matrix_rank(svec(A))
            if rank < A.shape[0]:
                log.warning("constraint matrices are linearly dependent (rank %d < m=%d)", rank, A.shape[0])

    @property
    def n(self):
        return self.C.shape[0]

    @property
    def m(self):
        return self.A.shape[0]

    def objective(self, X):
        return float(np.vdot(self.C, X))

    def dual_slack(self, y):
        """Z = C - sum_i y_i A_i."""
        y = np.asarray(y, dtype=float)
        return self.C - np.tensordot(y, self.A, axes=1) if self.m else self.C.copy()

    def same_data(self, other):
        return (
            self.n == other.n
            and self.m == other.m
            and np.array_equal(self.C, other.C)
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
        )


@dataclass
class SolveReport:
    """Solution of a full-cone :class:`SdpProblem`."""

    primal_value: float
    dual_value: float
    X: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    status: Status
    iterations: int = 0


def residuals(prob, X):
    """Vector of <A_i, X> - b_i."""
    X = np.asarray(X, dtype=float)
    if X.shape != (prob.n, prob.n):
        raise DimensionMismatch(f"X has shape {X.shape}, problem has n={prob.n}")
    return np.einsum("kij,ij->k", prob.A, X) - prob.b


# -- SDPA sparse format -------------------------------------------------------

_SEPARATORS = re.compile(r"[,{}()]")


def _parse_number(tok, lineno):
    try:
        return float(tok)
    except ValueError:
        pass
    try:
        complex(tok.replace("i", "j"))
    except ValueError:
        raise ParseError(f"cannot parse number {tok!r}", lineno) from None
    raise UnsupportedFeature(f"complex value {tok!r} is not supported", lineno)


def _data_lines(text):
    if isinstance(text, bytes):
        text = text.decode("ascii")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "\"*":
            continue
        yield lineno, _SEPARATORS.sub(" ", line).split()


def parse_sdpa(text):
    """Parse SDPA sparse text into an :class:`SdpProblem`.

    Multiple blocks are flattened into one block-diagonal matrix; the native
    block sizes are kept in ``meta["sdpa_blocks"]``.
    """
    lines = _data_lines(text)

    def header_int(what):
        try:
            lineno, toks = next(lines)
        except StopIteration:
            raise ParseError(f"unexpected end of input while reading {what}") from None
        try:
            return lineno, int(float(toks[0]))
        except ValueError:
            raise ParseError(f"expected integer {what}, got {toks[0]!r}", lineno) from None

    _, m = header_int("constraint count")
    _, nblocks = header_int("block count")
    if m < 0 or nblocks < 1:
        raise ParseError("constraint count must be >= 0 and block count >= 1")

    sizes = []
    lineno = None
    while len(sizes) < nblocks:
        try:
            lineno, toks = next(lines)
        except StopIteration:
            raise ParseError("unexpected end of input while reading block sizes") from None
        for tok in toks:
            try:
                size = int(float(tok))
            except ValueError:
                raise ParseError(f"bad block size {tok!r}", lineno) from None
            if size == 0:
                raise ParseError("block size 0", lineno)
            sizes.append(size)
    if len(sizes) != nblocks:
        raise ParseError(f"expected {nblocks} block sizes, got {len(sizes)}", lineno)

    rhs = []
    while len(rhs) < m:
        try:
            lineno, toks = next(lines)
        except StopIteration:
            raise ParseError("unexpected end of input while reading the b vector") from None
        rhs.extend(_parse_number(tok, lineno) for tok in toks)
    if len(rhs) != m:
        raise ParseError(f"expected {m} right-hand side values, got {len(rhs)}", lineno)

    dims = [abs(s) for s in sizes]
    offsets = np.concatenate([[0], np.cumsum(dims)])
    n = int(offsets[-1])
    F = np.zeros((m + 1, n, n))
    for lineno, toks in lines:
        if len(toks) < 5:
            raise ParseError(f"expected 5 fields (matno blkno i j value), got {len(toks)}", lineno)
        try:
            matno, blkno, i, j = (int(float(t)) for t in toks[:4])
        except ValueError:
            raise ParseError("non-integer index in entry", lineno) from None
        value = _parse_number(toks[4], lineno)
        if not 0 <= matno <= m:
            raise ParseError(f"matrix number {matno} out of range 0..{m}", lineno)
        if not 1 <= blkno <= nblocks:
            raise ParseError(f"block number {blkno} out of range 1..{nblocks}", lineno)
        d = dims[blkno - 1]
        if not (1 <= i <= d and 1 <= j <= d):
            raise ParseError(f"entry ({i}, {j}) outside block of size {d}", lineno)
        if sizes[blkno - 1] < 0 and i != j:
            raise ParseError(f"off-diagonal entry ({i}, {j}) in diagonal block", lineno)
        r, c = offsets[blkno - 1] + i - 1, offsets[blkno - 1] + j - 1
        F[matno, r, c] = value
        F[matno, c, r] = value
    meta = {"objective_flipped": True, "sdpa_blocks": sizes}
    return SdpProblem(-F[0], F[1:], np.array(rhs), meta)


def _fmt(x):
    return "%.17g" % x


def emit_sdpa(prob, comment=None):
    """Write ``prob`` in SDPA sparse format (inverse of :func:`parse_sdpa`)."""
    sizes = list(prob.meta.get("sdpa_blocks") or [prob.n])
    if sum(abs(s) for s in sizes) != prob.n:
        sizes = [prob.n]
    out = []
    if comment:
        out.extend(f'" {line}' for line in comment.splitlines())
    out.append(str(prob.m))
    out.append(str(len(sizes)))
    out.append(" ".join(str(s) for s in sizes))
    out.append(" ".join(_fmt(v) for v in prob.b) if prob.m else "")
    mats = [-prob.C] + list(prob.A)
    offsets = np.concatenate([[0], np.cumsum([abs(s) for s in sizes])])
    for matno, M in enumerate(mats):
        for blk, size in enumerate(sizes):
            lo, d = offsets[blk], abs(size)
            sub = M[lo:lo + d, lo:lo + d]
            rows, cols = np.nonzero(np.triu(sub))
            for i, j in zip(rows, cols):
                if size < 0 and i != j:
                    continue
                out.append(f"{matno} {blk + 1} {i + 1} {j + 1} {_fmt(sub[i, j] + 0.0)}")
    return "\n".join(out) + "\n"


def read_sdpa(path):
    with open(path, "rb") as fh:
        prob = parse_sdpa(fh.read())
    prob.meta["source"] = str(path)
    return prob


def write_sdpa(prob, path, comment=None):
    with open(path, "w") as fh:
        fh.write(emit_sdpa(prob, comment))
