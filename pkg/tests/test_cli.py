import io
import json
import re
from pathlib import Path

import pytest

from limitcoh.cli import run
from limitcoh.errors import NotInvertible, ParseError
from limitcoh.io import parse_input, read_json
from limitcoh.phimod import PhiNModule
from limitcoh.degeneration import SemistableFiber

FIX = Path(__file__).parent / "fixtures"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(autouse=True)
def _no_env_prime(monkeypatch):
    monkeypatch.delenv("LIMITCOH_PRIME", raising=False)


def rows(text):
    return [l.split("\t") for l in text.splitlines() if l and not l.startswith("#")]


# -- parse_input ---------------------------------------------------------------------

def test_parse_fiber_and_module():
    X, raw = parse_input(FIX / "tate_2gon.json")
    assert isinstance(X, SemistableFiber) and len(X.strata) == 3
    D, _ = parse_input(FIX / "kummer.json")
    assert isinstance(D, PhiNModule) and D.dim == 2


def test_prime_override():
    X, _ = parse_input(FIX / "tate_2gon.json", prime=7)
    assert X.p == 7
    D, _ = parse_input(FIX / "unitmod.json", prime=5)
    assert D.p == 5


def test_singular_phi():
    with pytest.raises(NotInvertible):
        parse_input(FIX / "singular_phi.json")


def test_truncated_file_byte_offset():
    size = (FIX / "truncated.json").stat().st_size
    with pytest.raises(ParseError) as info:
        read_json(FIX / "truncated.json")
    assert info.value.location.endswith(f"@byte {size}")


def test_byte_offset_counts_utf8(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{"name": "é", "dim": }', encoding="utf-8")
    with pytest.raises(ParseError) as info:
        read_json(f)
    # "é" is two bytes, so the offending '}' sits at byte 22, character 21
    assert info.value.location.endswith("@byte 22")


def test_floats_refused():
    with pytest.raises(ParseError, match="phi"):
        parse_input(FIX / "float_entry.json")


def test_exact_rational_strings(tmp_path):
    f = tmp_path / "m.json"
    f.write_text(json.dumps({"prime": 3, "dim": 1, "phi": [["1/3"]]}))
    D, _ = parse_input(f)
    assert D.Phi[0, 0] * 3 == 1


# -- verbs ----------------------------------------------------------------------------

def test_limit_tate_table():
    code, out, _ = call("limit", "--example", "tate-2gon", "--tsv")
    assert code == 0
    table = rows(out)
    assert table[0] == ["degree", "dim", "weights", "n_rank"]
    assert table[2] == ["1", "2", "0,2", "1"]


def test_limit_text_reports_weight_basis():
    code, out, _ = call("limit", "--example", "tate-2gon")
    assert code == 0
    assert "Phi = [[1,0],[0,3]], N/scalar = [[0,1],[0,0]]" in out
    assert "# engine limitcoh" in out and "# input-sha256" in out


def test_output_is_deterministic():
    a = call("cs", "--example", "tate-ngon(3)")
    b = call("cs", "--example", "tate-ngon(3)")
    assert a == b and a[0] == 0


def test_file_and_example_agree():
    _, a, _ = call("limit", FIX / "tate_2gon.json", "--tsv")
    _, b, _ = call("limit", "--example", "tate-2gon", "--tsv")
    assert rows(a) == rows(b)


def test_ext_weight_orthogonality():
    code, out, _ = call("ext", FIX / "unitmod.json", FIX / "tatetwist.json", "--tsv")
    assert code == 0
    assert rows(out)[1][:3] == ["phi", "0", "0"]


def test_ext_needs_modules():
    code, _, err = call("ext", FIX / "tate_2gon.json", FIX / "unitmod.json")
    assert code == 2 and "module" in err


def test_wm_on_module():
    code, out, _ = call("wm", FIX / "kummer.json", "--center", "1")
    assert code == 0
    code, out, _ = call("wm", FIX / "supersingular.json", "--center", "0")
    assert code == 1  # weight 1 is not symmetric about 0


def test_chi_and_selftests():
    assert call("chi", "--example", "two-component-surface")[0] == 0
    code, out, _ = call("selftest", "koszul", "--nmax", "4")
    assert code == 0 and "fail" not in out
    assert call("selftest", "examples")[0] == 0


def test_example_dump_roundtrip(tmp_path):
    code, out, _ = call("example", "two-component-surface")
    assert code == 0
    f = tmp_path / "s.json"
    f.write_text(out)
    assert call("limit", f)[0] == 0


def test_env_prime(monkeypatch):
    monkeypatch.setenv("LIMITCOH_PRIME", "5")
    _, out, _ = call("limit", "--example", "tate-2gon")
    assert "p = 5" in out
    # the module file names p = 3 itself; the environment only fills gaps
    f = FIX / "kummer.json"
    assert call("wm", f, "--center", "1")[0] == 0


@pytest.mark.parametrize("argv", [
    ("frobnicate",),
    ("limit", "--bogus"),
    ("limit", "--example", "tate-2gon", "--prime", "4"),
    ("limit", "--example", "nope"),
    ("limit", FIX / "truncated.json"),
    ("limit", FIX / "missing.json"),
    ("ext", FIX / "singular_phi.json", FIX / "unitmod.json"),
    ("limit", "--example", "tate-2gon", "--rescale", "0"),
    ("selftest", "koszul", "--nmax", "0"),
])
def test_input_errors_exit_2(argv):
    code, out, err = call(*argv)
    assert code == 2
    assert out == ""


def test_verdict_failure_exits_1():
    code, _, err = call("limit", FIX / "broken_triangle.json")
    assert code == 1 and "verdict failure" in err


def test_parse_error_names_location():
    code, _, err = call("limit", FIX / "truncated.json")
    assert re.search(r"truncated\.json@byte \d+", err)


def test_version():
    code, out, _ = call("--version")
    assert code == 0
