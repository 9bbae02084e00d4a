"""Command-line tests for tense_logic.cli."""

import json
from pathlib import Path
from unittest.mock import patch

import pytest

from tense_logic.cli import (
    EXIT_FAILED,
    EXIT_INCONCLUSIVE,
    EXIT_INPUT,
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_RANGE,
    main,
    parse_grid,
)
from tense_logic.errors import InputError
from tense_logic.model import generate_commuting_model, load_model_file, rabi_model, save_model
from tense_logic.verify import THEOREM_CHECKS

pytestmark = pytest.mark.integration

RANGE_PROP = "F[1.5707963267948966](B) | (F[0.7853981633974483](A) & F[1.5707963267948966](A))"


@pytest.fixture
def rabi_path(models_dir):
    return str(models_dir / "rabi.model")


class TestParseGrid:
    """Test start:stop:step grids."""

    def test_inclusive_stop(self):
        """Test the stop value is included when it lies on the grid."""
        assert len(parse_grid("0.1:3.1:0.5")) == 7
        assert parse_grid("1:2:0.5") == [1.0, 1.5, 2.0]

    @pytest.mark.parametrize("grid", ["0:1:0.1", "1:2", "a:b:c", "1:2:0", "2:1:0.1"])
    def test_invalid(self, grid):
        """Test malformed or non-positive grids."""
        with pytest.raises(InputError):
            parse_grid(grid)


class TestEval:
    """Test the eval command."""

    def test_rabi_third_period(self, rabi_path, capsys):
        """Test text output for tau(F_{pi/3}(A)) = 1/4."""
        assert main(["eval", "--model", rabi_path, "--prop", "F[1.0471975512](A)"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "tau: 0.250000" in out
        assert "histories (1):" in out

    def test_structured_output(self, rabi_path, capsys):
        """Test structured output is JSON with diagnostics."""
        assert main(["eval", "--model", rabi_path, "--prop", "~F[1](A)", "--output", "structured"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["tau"] == pytest.approx(0.7080734182735712, abs=1e-12)
        assert data["ch_residual"] == 0.0
        assert data["n_histories"] == 1
        assert data["initial_state"] == "product"
        assert not any(isinstance(value, (dict, list)) for value in data.values())

    def test_superposed_initial_state_flagged(self, models_dir, capsys):
        """Test a model with an explicit initial_state is flagged in every output."""
        path = str(models_dir / "commuting_d8.model")
        assert main(["eval", "--model", path, "--prop", "F[1](A)"]) == EXIT_OK
        assert "initial_state: superposed" in capsys.readouterr().out
        assert main(["eval", "--model", path, "--prop", "F[1](A)", "--output", "structured"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["initial_state"] == "superposed"
        assert main(["eval", "--model", path, "--prop", "F[1](A)", "--output", "csv"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].endswith(",initial_state")
        assert lines[1].endswith(",superposed")

    def test_product_state_not_flagged(self, rabi_path, capsys):
        """Test the product-state Rabi model prints no initial_state line."""
        assert main(["eval", "--model", rabi_path, "--prop", "F[1](A)"]) == EXIT_OK
        assert "initial_state" not in capsys.readouterr().out

    def test_ch_fast_mode(self, rabi_path, capsys):
        """Test --mode ch-fast selects the fast history formula."""
        prop = "F[0.7853981633974483](A) & F[1.5707963267948966](A)"
        assert main(["eval", "--model", rabi_path, "--prop", prop, "--mode", "ch-fast"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "mode: ch_fast" in out
        assert "tau: 0.000000" in out

    def test_range_violation(self, rabi_path, capsys):
        """Test a non-CH disjunction above 1 exits with the range code."""
        assert main(["eval", "--model", rabi_path, "--prop", RANGE_PROP]) == EXIT_RANGE
        assert "outside [0, 1]" in capsys.readouterr().err

    @pytest.mark.parametrize("prop", ["F[0](A)", "F[1](Z)", "F[1](A) &"])
    def test_invalid_proposition(self, rabi_path, prop, capsys):
        """Test syntax errors and unknown events exit with the input code."""
        assert main(["eval", "--model", rabi_path, "--prop", prop]) == EXIT_INPUT
        assert capsys.readouterr().err.startswith("error:")

    def test_missing_model_file(self, capsys):
        """Test a missing model file is an input error."""
        assert main(["eval", "--model", "/nonexistent/rabi.model", "--prop", "F[1](A)"]) == EXIT_INPUT
        assert "Model file not found" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "hamiltonian,invariant",
        [
            ([[[0, 0], [1, 0]], [[1, 0]]], "hamiltonian dimension"),
            ([[[0, 0], [1, 0]], [[1, 0], [float("inf"), 0]]], "finite entries"),
        ],
    )
    def test_invalid_model_file(self, rabi_path, tmp_path, hamiltonian, invariant, capsys):
        """Test ragged or non-finite hamiltonians exit with the input code."""
        data = json.loads(Path(rabi_path).read_text(encoding="utf-8"))
        data["hamiltonian"] = hamiltonian
        path = tmp_path / "bad.model"
        path.write_text(json.dumps(data), encoding="utf-8")
        assert main(["eval", "--model", str(path), "--prop", "F[1](A)"]) == EXIT_INPUT
        assert invariant in capsys.readouterr().err

    def test_missing_prop(self, rabi_path, capsys):
        """Test required flags are enforced."""
        assert main(["eval", "--model", rabi_path]) == EXIT_INPUT
        assert "--prop" in capsys.readouterr().err

    def test_bad_choice(self, rabi_path):
        """Test argparse rejections map to the input code."""
        assert main(["eval", "--model", rabi_path, "--prop", "F[1](A)", "--mode", "fast"]) == EXIT_INPUT

    def test_strict_rejects_cross_tense(self, rabi_path):
        """Test strict mode refuses connectives across tenses."""
        assert main(["eval", "--model", rabi_path, "--prop", "N(A) & F[1](B)", "--strict"]) == EXIT_INPUT

    def test_metalanguage(self, rabi_path, capsys):
        """Test --metalanguage reads cross-tense connectives bivalently."""
        argv = ["eval", "--model", rabi_path, "--prop", "N(A) & F[1.5707963267948966](B)", "--strict", "--metalanguage"]
        assert main(argv) == EXIT_OK
        assert "metalanguage: true" in capsys.readouterr().out

    def test_metalanguage_requires_strict(self, rabi_path):
        """Test --metalanguage alone is refused."""
        assert main(["eval", "--model", rabi_path, "--prop", "N(A)", "--metalanguage"]) == EXIT_INPUT


class TestSweep:
    """Test the sweep command."""

    def test_csv_rows(self, rabi_path, capsys):
        """Test the CSV has a header and one row per grid point."""
        argv = ["sweep", "--model", rabi_path, "--template", "F[t](A)", "--grid", "0.1:3.1:0.5"]
        assert main(argv) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "t,tau,imag_residual,ch_residual"
        assert len(lines) == 8
        assert lines[1].startswith("0.1,")

    def test_byte_stable(self, rabi_path, capsys):
        """Test repeated sweeps print identical bytes, threaded or not."""
        argv = ["sweep", "--model", rabi_path, "--template", "F[0.3](A) & F[t](B)", "--grid", "0.5:2.5:0.25"]
        main(argv)
        first = capsys.readouterr().out
        main(argv + ["--workers", "3"])
        assert capsys.readouterr().out == first

    def test_structured_flat(self, rabi_path, capsys):
        """Test structured sweeps number each point's fields from 0."""
        argv = ["sweep", "--model", rabi_path, "--template", "F[t](A)", "--grid", "0.5:1.5:0.5",
                "--output", "structured"]
        assert main(argv) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["n_points"] == 3
        assert data["initial_state"] == "product"
        assert [data[f"t_{i}"] for i in range(3)] == [0.5, 1.0, 1.5]
        assert data["tau_1"] == pytest.approx(0.2919265817264289, abs=1e-12)
        assert "t_3" not in data
        assert not any(isinstance(value, (dict, list)) for value in data.values())

    def test_invalid_grid(self, rabi_path):
        """Test grids starting at 0 are refused."""
        argv = ["sweep", "--model", rabi_path, "--template", "F[t](A)", "--grid", "0:1:0.1"]
        assert main(argv) == EXIT_INPUT


class TestCheckCh:
    """Test the check-ch command."""

    def test_rabi_two_step(self, rabi_path, capsys):
        """Test the Rabi residual at (pi/4, pi/2)."""
        prop = "F[0.7853981633974483](A) & F[1.5707963267948966](A)"
        assert main(["check-ch", "--model", rabi_path, "--prop", prop]) == EXIT_OK
        out = capsys.readouterr().out
        assert "ch_residual: 2.500e-01" in out
        assert "certified: false" in out
        assert "pairs_checked: 2" in out

    def test_structured(self, models_dir, capsys):
        """Test structured output on an exact-CH model."""
        path = str(models_dir / "commuting_d8.model")
        argv = ["check-ch", "--model", path, "--prop", "F[0.5](A) & F[1](B) | F[2](C)", "--output", "structured"]
        assert main(argv) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["certified"] is True
        assert data["n_histories"] == 3
        assert data["initial_state"] == "superposed"

    def test_structured_worst_pair(self, rabi_path, capsys):
        """Test the worst pair is written as a single string."""
        prop = "F[0.7853981633974483](A) & F[1.5707963267948966](A)"
        assert main(["check-ch", "--model", rabi_path, "--prop", prop, "--output", "structured"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["worst_pair"] in ("00/10", "01/11")
        assert data["certified"] is False
        assert not any(isinstance(value, (dict, list)) for value in data.values())


class TestVerify:
    """Test verify exit codes."""

    def test_passed(self, capsys):
        """Test a passing suite exits 0."""
        assert main(["verify", "--family", "commuting", "--cases", "30", "--seed", "7"]) == EXIT_OK
        assert capsys.readouterr().out.splitlines()[-1] == "overall: passed"

    def test_inconclusive(self):
        """Test uncertified CH rows exit 4."""
        assert main(["verify", "--family", "dephasing", "--cases", "10", "--seed", "0"]) == EXIT_INCONCLUSIVE

    def test_failed(self):
        """Test unfiltered CH rows on a dephasing model exit 5."""
        argv = ["verify", "--family", "dephasing", "--cases", "10", "--seed", "0", "--no-ch-filter"]
        assert main(argv) == EXIT_FAILED

    def test_structured(self, capsys):
        """Test structured verify output is one flat object keyed by theorem."""
        argv = ["verify", "--family", "rabi", "--cases", "20", "--seed", "1", "--output", "structured"]
        assert main(argv) == EXIT_INCONCLUSIVE
        data = json.loads(capsys.readouterr().out)
        assert data["status"] == "inconclusive"
        assert (data["family"], data["cases"], data["seed"]) == ("rabi", 20, 1)
        for theorem_id in THEOREM_CHECKS:
            assert f"{theorem_id}_status" in data
            assert f"{theorem_id}_max_violation" in data
        assert not any(isinstance(value, (dict, list)) for value in data.values())

    def test_zero_cases(self):
        """Test --cases 0 is an input error."""
        assert main(["verify", "--family", "commuting", "--cases", "0"]) == EXIT_INPUT

    def test_internal_error(self, capsys):
        """Test unexpected exceptions exit 1."""
        with patch("tense_logic.cli.run_suite", side_effect=RuntimeError("boom")):
            assert main(["verify", "--family", "commuting", "--cases", "1"]) == EXIT_INTERNAL
        assert "internal error: boom" in capsys.readouterr().err


class TestGenModel:
    """Test the gen-model command."""

    def test_write_commuting(self, tmp_path):
        """Test the written file reloads to the generated model."""
        out = tmp_path / "c.model"
        assert main(["gen-model", "--family", "commuting", "--dim", "5", "--seed", "3", "--out", str(out)]) == EXIT_OK
        assert load_model_file(out).equals(generate_commuting_model(5, 3, seed=3))

    def test_rabi_to_stdout(self, capsys):
        """Test the Rabi model is printed when no --out is given."""
        assert main(["gen-model", "--family", "rabi"]) == EXIT_OK
        assert capsys.readouterr().out == save_model(rabi_model())

    def test_dephasing_couplings(self, tmp_path):
        """Test couplings set the environment size."""
        out = tmp_path / "d.model"
        argv = ["gen-model", "--family", "dephasing", "--couplings", "0.1,0.2", "--out", str(out)]
        assert main(argv) == EXIT_OK
        assert load_model_file(out).dim_e == 4

    def test_malformed_couplings(self):
        """Test non-numeric couplings are an input error."""
        assert main(["gen-model", "--family", "dephasing", "--couplings", "0.1,x"]) == EXIT_INPUT
