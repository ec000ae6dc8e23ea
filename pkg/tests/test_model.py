import os

import numpy as np
import pytest

from blockfw.errors import DimensionMismatch, ParseError, UnsupportedFeature
from blockfw.ipm import solve_sdp
from blockfw.model import SdpProblem, emit_sdpa, parse_sdpa, read_sdpa, residuals, write_sdpa

from conftest import FIXTURES, load_manifest

MINIMAL = "1\n1\n2\n1.0\n0 1 1 1 1.0\n1 1 1 1 1.0\n"


def test_minimal_file():
    prob = parse_sdpa(MINIMAL)
    E11 = np.diag([1.0, 0.0])
    assert (prob.n, prob.m) == (2, 1)
    # SDPA maximizes <F0, Y>; the internal minimize form stores C = -F0
    assert np.array_equal(prob.C, -E11)
    assert prob.meta["objective_flipped"]
    assert np.array_equal(prob.A[0], E11)
    assert np.array_equal(prob.b, [1.0])


def test_separators_and_comments():
    text = '" a comment\n* another\n1 = mDIM\n1\n{2}\n(1.0)\n0,1,1,2,0.5\n1 1 1 1 1\n'
    prob = parse_sdpa(text)
    assert prob.C[0, 1] == prob.C[1, 0] == -0.5


def test_diagonal_block():
    text = "1\n2\n2 -3\n2\n0 2 1 1 1\n0 2 3 3 -4\n1 1 1 2 1\n1 2 2 2 7\n"
    prob = parse_sdpa(text)
    assert prob.n == 5
    expected_C = -np.diag([0, 0, 1, 0, -4.0])
    assert np.array_equal(prob.C, expected_C)
    A = np.zeros((5, 5))
    A[0, 1] = A[1, 0] = 1.0
    A[3, 3] = 7.0
    assert np.array_equal(prob.A[0], A)
    assert prob.meta["sdpa_blocks"] == [2, -3]


def test_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    A = rng.standard_normal((3, 4, 4))
    prob = SdpProblem(rng.standard_normal((4, 4)), A, rng.standard_normal(3))
    again = parse_sdpa(emit_sdpa(prob, comment="round trip"))
    assert again.same_data(prob)
    path = os.path.join(tmp_path, "p.dat-s")
    write_sdpa(again, path)
    assert read_sdpa(path).same_data(prob)
    # emission is a fixed point after one round
    assert emit_sdpa(again) == emit_sdpa(parse_sdpa(emit_sdpa(again)))


def test_multiblock_roundtrip():
    text = "1\n2\n2 -2\n1\n0 1 1 2 3\n0 2 2 2 1\n1 1 1 1 1\n1 2 1 1 1\n"
    prob = parse_sdpa(text)
    again = parse_sdpa(emit_sdpa(prob))
    assert again.same_data(prob)
    assert again.meta["sdpa_blocks"] == [2, -2]


@pytest.mark.parametrize(
    "text, line",
    [
        ("1\n1\n2\n1.0\n0 1 1 1\n", 5),
        ("1\n1\n2\n1.0\n0 1 3 1 1.0\n", 5),
        ("1\n1\n2\n1.0\n2 1 1 1 1.0\n", 5),
        ("1\n1\n-2\n1.0\n0 1 1 2 1.0\n", 5),
        ("1\n1\n2\nabc\n", 4),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as err:
        parse_sdpa(text)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_truncated_header():
    with pytest.raises(ParseError):
        parse_sdpa("2\n")


def test_complex_values_rejected():
    with pytest.raises(UnsupportedFeature):
        parse_sdpa("1\n1\n2\n1.0\n0 1 1 1 1+2i\n")


def test_corpus_parses(manifest):
    for entry in manifest["instances"]:
        prob = read_sdpa(os.path.join(FIXTURES, entry["file"]))
        assert prob.m == entry["m"] and prob.n == entry["n"]


def test_sign_convention_against_max_form():
    """The internal minimum equals minus the SDPA maximum.

    max <F0, Y> s.t. Y_11 = 1, Y_22 = 1 with F0 = [[0, 1], [1, 0]] is 2
    (Y = all ones), found by hand.
    """
    text = "2\n1\n2\n1 1\n0 1 1 2 1\n1 1 1 1 1\n2 1 2 2 1\n"
    prob = parse_sdpa(text)
    rep = solve_sdp(prob)
    assert rep.primal_value == pytest.approx(-2.0, abs=1e-7)


def test_residuals():
    prob = SdpProblem(np.eye(3), np.eye(3)[None], [1.0])
    assert np.allclose(residuals(prob, np.eye(3) / 3), [0.0])
    assert np.allclose(residuals(prob, np.zeros((3, 3))), -prob.b)
    with pytest.raises(DimensionMismatch):
        residuals(prob, np.eye(2))


def test_problem_validation(caplog):
    with pytest.raises(DimensionMismatch):
        SdpProblem(np.eye(2), np.zeros((1, 3, 3)), [1.0])
    with pytest.raises(DimensionMismatch):
        SdpProblem(np.eye(2), np.zeros((1, 2, 2)), [1.0, 2.0])
    SdpProblem(np.eye(2), np.stack([np.eye(2), np.eye(2)]), [1.0, 1.0])
    assert "linearly dependent" in caplog.text
    empty = SdpProblem(np.eye(2), [], [])
    assert empty.m == 0


def test_optimal_report_invariants():
    manifest = load_manifest()
    for entry in manifest["instances"][:6]:
        prob = read_sdpa(os.path.join(FIXTURES, entry["file"]))
        rep = solve_sdp(prob)
        assert abs(rep.primal_value - rep.dual_value) <= 1e-8 * (1 + abs(rep.primal_value)) * 10
        assert np.linalg.eigvalsh(rep.X).min() >= -1e-8
        assert np.linalg.eigvalsh(rep.Z).min() >= -1e-8
        assert np.abs(residuals(prob, rep.X)).max() <= 1e-7 * (1 + np.abs(prob.b).max())
