"""Iterative block factor-width-two approximations of semidefinite programs."""

from .cone import BlockCertificate, Membership, assemble, membership_dual, membership_fw
from .errors import (
    BlockFWError,
    DimensionMismatch,
    FirstIterationInfeasible,
    InvalidPartition,
    NotFactorizable,
    NumericalTrouble,
    ParseError,
    SolverFailure,
    TooLarge,
    UnsupportedFeature,
)
from .ipm import IpmSettings, solve_sdp
from .iterative import IterationTrace, RunConfig, check_strict_hypotheses, run_inner, run_outer
from .linalg import CholFactor, chol_psd, min_eig
from .model import SdpProblem, Status, parse_sdpa, emit_sdpa, read_sdpa, write_sdpa
from .partition import Partition, make_uniform, parse_partition, trivial

__version__ = "0.1.0"
