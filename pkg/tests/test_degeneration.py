import copy
import dataclasses
import json
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from limitcoh.complexes import homology, homology_dims
from limitcoh.degeneration import (
    builtin_example, builtin_raw, cell_euler_characteristic, chi_compare, clemens_schmid,
    limit_cohomology, self_duality, special_fiber_complexes, steenbrink, validate_fiber,
    weight_basis_form,
)
from limitcoh.errors import (
    CompositionMismatch, FrobeniusMismatch, ImpureStratum, MissingDegree, ParseError, SignViolation,
    UnknownExample, ValidationError,
)
from limitcoh.exact import Field, weil_split

import oracles

FIX = Path(__file__).parent / "fixtures"
BUILTINS = ["tate-2gon", "tate-ngon(3)", "tate-ngon(4)", "tate-ngon(5)", "good-elliptic",
            "two-component-surface"]


def load(name):
    return json.loads((FIX / name).read_text())


def profile(H):
    return {n: weil_split(m.Phi).dims() for n, m in H.items()}


# -- validation ---------------------------------------------------------------------

def test_builtin_shapes():
    X = builtin_example("tate-2gon")
    assert len(X.strata) == 3 and X.d == 1
    E = builtin_example("good-elliptic")
    assert list(E.strata) == [(0,)]
    assert sorted(E.strata[(0,)]) == [0, 1, 2]
    assert E.strata[(0,)][1] == Field(3).matrix([[0, 3], [1, 0]])
    assert builtin_example("tate-ngon(4)").conjectural
    assert not X.conjectural
    with pytest.raises(UnknownExample):
        builtin_example("tate-1gon")
    with pytest.raises(UnknownExample):
        builtin_example("k3")


def test_name_aliases():
    for alias in ("tate-ngon(3)", "tate-ngon3", "tate-3gon", "TATE-NGON(3)"):
        assert builtin_raw(alias) == builtin_raw("tate-ngon(3)")


def test_single_component_accepted():
    raw = {"prime": 5, "relative_dimension": 1, "components": ["P"],
           "strata": [{"J": ["P"], "cohomology": {"0": [{"weight": 0, "dim": 1}],
                                                 "2": [{"weight": 2, "dim": 1}]}}]}
    X = validate_fiber(raw)
    assert X.p == 5 and X.depth == 1


def test_impure_stratum():
    raw = builtin_raw("tate-2gon")
    raw["strata"][0]["cohomology"]["0"][0]["weight"] = 1
    with pytest.raises(ImpureStratum, match="D0"):
        validate_fiber(raw)
    raw = builtin_raw("good-elliptic")
    raw["strata"][0]["cohomology"]["1"][0]["phi"] = [[1, 0], [0, 3]]
    with pytest.raises(ImpureStratum):
        validate_fiber(raw)


def test_missing_degree():
    raw = builtin_raw("tate-2gon")
    del raw["strata"][0]["cohomology"]["2"]
    with pytest.raises(MissingDegree):
        validate_fiber(raw)
    raw = builtin_raw("tate-2gon")
    raw["restrictions"].pop()
    with pytest.raises(MissingDegree, match="degree 0"):
        validate_fiber(raw)
    raw = builtin_raw("tate-2gon")
    raw["strata"][2]["cohomology"]["2"] = [{"weight": 2, "dim": 1}]  # points have no H^2
    with pytest.raises(MissingDegree):
        validate_fiber(raw)


def test_frobenius_mismatch():
    # det Phi = -p, so no alternating pairing can satisfy Phi^T G Phi = p G
    raw = builtin_raw("good-elliptic")
    raw["pairings"] = [{"J": ["E"], "degree": 1, "matrix": [[0, 1], [-1, 0]]}]
    with pytest.raises(FrobeniusMismatch):
        validate_fiber(raw)


def test_composition_mismatch():
    raw = load("broken_triangle.json")
    raw["restrictions"][-1]["matrix"] = [[2]]
    with pytest.raises(CompositionMismatch):
        validate_fiber(raw)


def test_degenerate_pairing():
    raw = builtin_raw("two-component-surface")
    raw["pairings"][0]["matrix"] = [[1, 1], [1, 1]]
    with pytest.raises(ValidationError, match="degenerate"):
        validate_fiber(raw)


def test_parse_errors_name_the_field():
    raw = builtin_raw("tate-2gon")
    raw["restrictions"][0]["matrix"] = [[1]]
    with pytest.raises(ParseError, match=r"restrictions\[0\]"):
        validate_fiber(raw)
    raw = builtin_raw("tate-2gon")
    raw["prime"] = 6
    with pytest.raises(ParseError):
        validate_fiber(raw)


def test_sign_violation_on_broken_triple_point():
    # three planes meeting in lines: 1 + 1 + 1 != 0 breaks the triple-point
    # relation, so no sign choice makes the Steenbrink differential square to 0
    X = validate_fiber(load("broken_triangle.json"), "broken")
    with pytest.raises(SignViolation):
        steenbrink(X)


# -- special fiber -----------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_cycle_of_lines_special_fiber(n):
    X = builtin_example(f"tate-ngon({n})")
    Sup, C = special_fiber_complexes(X)
    assert homology_dims(C) == oracles.cycle_of_lines_special_fiber(n)
    # Poincare duality with twist d + 1 = 2: Sup^m = H_(4-m)(X_k)(-2)
    hom = {4 - k: v for k, v in oracles.cycle_of_lines_special_fiber(n).items()}
    assert homology_dims(Sup) == hom


def test_tate_special_fiber_weights():
    Sup, C = special_fiber_complexes(builtin_example("tate-2gon"))
    assert profile(homology(C)) == {0: {0: 1}, 1: {0: 1}, 2: {2: 2}}


def test_good_reduction_special_fiber():
    X = builtin_example("good-elliptic")
    _, C = special_fiber_complexes(X)
    H = homology(C)
    assert {n: m.Phi for n, m in H.items()} == {a: M for a, M in X.strata[(0,)].items()}


# -- Steenbrink ------------------------------------------------------------------------

def test_steenbrink_good_reduction():
    S = steenbrink(builtin_example("good-elliptic"))
    assert set(S.double.cells) == {(0, 0), (0, 1), (0, 2)}
    assert all(N.is_zero() for N in S.total.nu.values())


@pytest.mark.parametrize("name", BUILTINS)
def test_steenbrink_nu(name):
    X = builtin_example(name)
    S = steenbrink(X)
    T = S.total
    for n in T.degrees:
        N = T.term(n).N
        assert (N @ N @ N).is_zero()
        assert T.diff(n) @ N == T.term(n + 1).N @ T.diff(n)
    assert T.euler_characteristic() == cell_euler_characteristic(X)


def test_steenbrink_2gon_dims():
    S = steenbrink(builtin_example("tate-2gon"))
    assert [S.total.dim(n) for n in (0, 1, 2)] == [2, 4, 2]
    assert all((N @ N).is_zero() for N in S.total.nu.values())


# -- limit cohomology ---------------------------------------------------------------------

def test_tate_limit():
    L = limit_cohomology(builtin_example("tate-2gon"))
    assert L.dims() == oracles.TATE_LIMIT_DIMS
    assert {n: P.weights for n, P in L.pieces.items()} == oracles.TATE_LIMIT_WEIGHTS
    ws, Phi, N = weight_basis_form(L[1].module)
    F = Field(3)
    assert ws == [0, 2]
    assert Phi == F.diag([1, 3])
    assert N == F.matrix([[0, 1], [0, 0]])
    assert [n for n, P in L.pieces.items() if P.n_rank] == [1]


def test_good_reduction_limit():
    X = builtin_example("good-elliptic")
    L = limit_cohomology(X)
    assert {n: P.module.Phi for n, P in L.pieces.items()} == X.strata[(0,)]
    assert all(P.module.N.is_zero() for P in L.pieces.values())


def test_surface_limit():
    L = limit_cohomology(builtin_example("two-component-surface"))
    assert L.dims() == {0: 1, 2: 1, 4: 1}
    assert L.euler_characteristic() == 3
    assert all(P.n_rank == 0 for P in L.pieces.values())


def test_triple_point_surface():
    X = validate_fiber(load("triple_point_surface.json"), "triple")
    assert X.conjectural and X.depth == 3
    L = limit_cohomology(X)
    # components 4 + 4 + 5, three double lines, one triple point:
    # chi = 13 - 2*6 + 3*1 = 4 = 1 + 2 + 1
    assert L.dims() == {0: 1, 2: 2, 4: 1}
    assert L.ss.degenerates_at_e2
    # the dual complex is a triangle (contractible), so there is no monodromy
    assert all(P.n_rank == 0 for P in L.pieces.values())
    assert chi_compare(X).passed and clemens_schmid(X).passed and self_duality(X)[0]


def test_rescale_keeps_invariants():
    X = builtin_example("tate-2gon")
    a, b = limit_cohomology(X), limit_cohomology(X, rescale=2)
    assert a.dims() == b.dims()
    assert [P.n_rank for P in a.pieces.values()] == [P.n_rank for P in b.pieces.values()]
    assert weight_basis_form(a[1].module)[2] == weight_basis_form(b[1].module)[2]
    with pytest.raises(ValueError):
        steenbrink(X, rescale=0)


@settings(max_examples=8, deadline=None)
@given(st.integers(2, 7), st.sampled_from([2, 3, 5, 7]))
def test_ngon_invariance_any_prime(n, p):
    L = limit_cohomology(builtin_example(f"tate-ngon({n})", p))
    assert L.dims() == oracles.TATE_LIMIT_DIMS
    assert {k: P.weights for k, P in L.pieces.items()} == oracles.TATE_LIMIT_WEIGHTS
    assert [P.n_rank for P in L.pieces.values()] == [0, 1, 0]


# -- chi, Clemens-Schmid, duality --------------------------------------------------------

def test_chi_tate():
    r = chi_compare(builtin_example("tate-2gon"))
    assert r.passed
    assert {n: m.dim for n, m in r.via_monodromy.items()} == oracles.TATE_CHI_DIMS


def test_chi_good_reduction_is_cone_of_zero():
    X = builtin_example("good-elliptic")
    r = chi_compare(X)
    H = {a: M.nrows for a, M in X.strata[(0,)].items()}
    want = {n: H.get(n, 0) + H.get(n - 1, 0) for n in range(0, 4)}
    assert {n: m.dim for n, m in r.via_monodromy.items()} == want


def test_cs_tate():
    r = clemens_schmid(builtin_example("tate-2gon"))
    assert r.composites_zero and r.exact and r.wm_pass
    assert not r.duality_isomorphisms()


def test_cs_good_reduction():
    r = clemens_schmid(builtin_example("good-elliptic"))
    assert r.passed and r.duality_isomorphisms()


def test_cs_sign_choice():
    for sign in (1, -1):
        assert clemens_schmid(builtin_example("two-component-surface"), sign=sign).passed


@pytest.mark.parametrize("name", BUILTINS)
def test_self_duality(name):
    ok, a, b = self_duality(builtin_example(name))
    assert ok and a == b


def test_validate_does_not_mutate_input():
    raw = builtin_raw("two-component-surface")
    before = copy.deepcopy(raw)
    validate_fiber(raw)
    assert raw == before


def test_fiber_is_frozen():
    X = builtin_example("tate-2gon")
    with pytest.raises(dataclasses.FrozenInstanceError):
        X.d = 2
