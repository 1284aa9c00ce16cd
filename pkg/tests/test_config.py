import pytest
from hypothesis import given, settings, strategies as st

from nehari_critical.config import ParseError, ValidationError, build_spec, parse_config

MINIMAL = """
[domain]
radius = 1
[grid]
n = 1024
[system]
lambdas = [-7]
beta = [[1]]
groups = [0, 1]
"""


class TestParse:
    def test_minimal(self):
        cfg = parse_config(MINIMAL)
        assert cfg.radius == 1.0 and cfg.n == 1024 and cfg.lambdas == (-7.0,)
        assert cfg.provenance["system.beta"] == "config"
        assert cfg.provenance["solver.tol"] == "default"
        assert build_spec(cfg).d == 1

    def test_comments_and_order(self):
        text = "# header\n[system]\ngroups = [0, 1]  \nbeta = [[1]]\nlambdas = [-7]\n\n[grid]\nn = 64\n"
        assert parse_config(text).n == 64

    def test_non_symmetric_beta(self):
        text = MINIMAL.replace("lambdas = [-7]", "lambdas = [-7, -7]").replace(
            "beta = [[1]]", "beta = [[1, 2], [0, 1]]").replace("groups = [0, 1]", "groups = [0, 2]")
        with pytest.raises(ValidationError) as info:
            parse_config(text)
        assert info.value.field == "beta"

    def test_lambda_below_first_eigenvalue(self):
        with pytest.raises(ValidationError) as info:
            parse_config(MINIMAL.replace("[-7]", "[-20]"))
        assert info.value.field == "lambdas"
        assert "lambda" in str(info.value)

    def test_unknown_key(self):
        with pytest.raises(ParseError) as info:
            parse_config(MINIMAL + "[solver]\nrestart = 3\n")
        assert info.value.line == 11

    def test_unknown_section(self):
        with pytest.raises(ParseError) as info:
            parse_config("[domian]\nradius = 1\n")
        assert info.value.line == 1

    def test_bad_json(self):
        with pytest.raises(ParseError) as info:
            parse_config(MINIMAL.replace("n = 1024", "n = ten"))
        assert info.value.line == 5

    def test_duplicate_key(self):
        with pytest.raises(ParseError):
            parse_config(MINIMAL + "[grid]\nn = 2\n")

    def test_key_outside_section(self):
        with pytest.raises(ParseError):
            parse_config("n = 3\n" + MINIMAL)

    def test_missing_required(self):
        with pytest.raises(ValidationError) as info:
            parse_config("[system]\nlambdas = [-7]\nbeta = [[1]]\n")
        assert info.value.field == "groups"

    @pytest.mark.parametrize("line, field", [
        ("[solver]\nrestarts = 0", "restarts"),
        ("[solver]\ntol = -1", "tol"),
        ("[solver]\ngamma = [3]", "gamma"),
        ("[sweep]\neps = [2.0]", "eps"),
        ("[grid]\ngraded = \"yes\"", "graded"),
    ])
    def test_field_validation(self, line, field):
        text = MINIMAL.replace("[grid]\nn = 1024", "") + line + "\n"
        with pytest.raises(ValidationError) as info:
            parse_config(text)
        assert info.value.field == field

    def test_groups_validated(self):
        with pytest.raises(ValidationError) as info:
            parse_config(MINIMAL.replace("groups = [0, 1]", "groups = [0, 2]"))
        assert info.value.field == "groups"

    def test_graded_flag(self):
        cfg = parse_config(MINIMAL.replace("n = 1024", "n = 256\ngraded = true"))
        assert cfg.graded > 0


class TestRoundTrip:
    def test_text_round_trip(self):
        cfg = parse_config(MINIMAL)
        assert parse_config(cfg.to_text()) == cfg

    @settings(max_examples=25, deadline=None)
    @given(
        st.integers(16, 2048),
        st.floats(0.5, 4.0),
        st.floats(-0.9, -0.05),
        st.integers(0, 10**6),
        st.one_of(st.none(), st.lists(st.floats(1e-4, 0.5), min_size=1, max_size=4)),
    )
    def test_random_configs(self, n, radius, frac, seed, eps):
        lam = frac * 14.68 / radius**2
        text = (f"[domain]\nradius = {radius!r}\n[grid]\nn = {n}\n[system]\nlambdas = [{lam!r}]\n"
                f"beta = [[1.5]]\ngroups = [0, 1]\n[solver]\nseed = {seed}\n")
        if eps is not None:
            text += "[sweep]\neps = [" + ", ".join(repr(e) for e in eps) + "]\n"
        cfg = parse_config(text, validate=False)
        again = parse_config(cfg.to_text(), validate=False)
        assert again == cfg
        assert again.to_text() == cfg.to_text()
