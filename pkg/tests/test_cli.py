import json
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

from kdtli import __version__
from kdtli.cli import EXIT_FIT, EXIT_FORMAT, EXIT_OK, EXIT_USAGE, main


def _bundled(name: str) -> str:
    return str(resources.files("kdtli").joinpath(f"data/{name}"))


def _read_rows(path: Path):
    """Data rows of an output CSV: skip comments and the header line."""
    rows = []
    header = None
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            continue
        if header is None:
            header = line
            continue
        rows.append([float(part) for part in line.split(",")])
    return header, rows


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


class TestBasics:
    def test_version_flag(self, capsys):
        assert main(["--version"]) == EXIT_OK
        assert f"kdtli {__version__}" in capsys.readouterr().out

    def test_no_command_is_usage_error(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_constants_listing(self, capsys):
        assert main(["constants"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "planck_h" in out
        assert "hbar" in out
        assert "codata" in out


class TestSimulate:
    def test_visibility_power_curve(self, workdir, capsys):
        assert main(["simulate", "visibility_power"]) == EXIT_OK
        path = workdir / "simulate_visibility_power.csv"
        assert path.exists()
        header, rows = _read_rows(path)
        assert header == "power_W,vis_quantum,vis_classical"
        assert len(rows) == 41
        powers = [r[0] for r in rows]
        quantum = [r[1] for r in rows]
        assert powers[0] == 0.0 and quantum[0] == 0.0
        assert powers[-1] == 10.0
        # rising flank at low power, a maximum strictly inside the grid
        assert quantum[1] > quantum[0]
        peak = int(np.argmax(quantum))
        assert 0 < peak < len(quantum) - 1
        assert all(0.0 <= v <= 1.0 for v in quantum)

    def test_output_is_deterministic(self, workdir):
        main(["simulate", "visibility_power", "--out", "a.csv"])
        main(["simulate", "visibility_power", "--out", "b.csv"])
        a = (workdir / "a.csv").read_text()
        b = (workdir / "b.csv").read_text()
        # identical except for the echoed run.out override
        keep = lambda text: [l for l in text.splitlines() if "run.out" not in l]
        assert keep(a) == keep(b)

    def test_deflection_voltage_curve(self, workdir):
        assert main(["simulate", "deflection_voltage"]) == EXIT_OK
        header, rows = _read_rows(workdir / "simulate_deflection_voltage.csv")
        assert header == "voltage_V,shift_nm,visibility"
        shifts = [r[1] for r in rows]
        assert shifts[0] == 0.0
        assert all(b > a for a, b in zip(shifts, shifts[1:]))   # strictly growing

    def test_position_scan_seeding(self, workdir):
        main(["simulate", "position_scan", "--seed", "5", "--out", "s5.csv"])
        main(["simulate", "position_scan", "--seed", "5", "--out", "s5b.csv"])
        main(["simulate", "position_scan", "--seed", "6", "--out", "s6.csv"])
        _, rows5 = _read_rows(workdir / "s5.csv")
        _, rows5b = _read_rows(workdir / "s5b.csv")
        _, rows6 = _read_rows(workdir / "s6.csv")
        assert rows5 == rows5b
        assert rows5 != rows6
        counts = [r[1] for r in rows5]
        assert all(c >= 0 and c == int(c) for c in counts)

    def test_nodes_override_changes_result_and_echo(self, workdir):
        main(["simulate", "visibility_power", "--out", "coarse.csv", "--nodes", "8"])
        main(["simulate", "visibility_power", "--out", "fine.csv"])
        text = (workdir / "coarse.csv").read_text()
        assert "# cfg: quadrature.n_nodes = 8" in text
        _, coarse = _read_rows(workdir / "coarse.csv")
        _, fine = _read_rows(workdir / "fine.csv")
        assert any(abs(a[1] - b[1]) > 1e-12 for a, b in zip(coarse[1:], fine[1:]))

    def test_config_file_drives_simulation(self, workdir):
        (workdir / "run.cfg").write_text(
            "simulate.n_grid = 5\nsimulate.power_max_W = 2.0\n"
        )
        assert main(["simulate", "visibility_power", "--config", "run.cfg"]) == EXIT_OK
        _, rows = _read_rows(workdir / "simulate_visibility_power.csv")
        assert len(rows) == 5
        assert rows[-1][0] == 2.0


class TestEchoReplay:
    def test_replay_reproduces_file_byte_for_byte(self, tmp_path, monkeypatch):
        first = tmp_path / "first"
        second = tmp_path / "second"
        first.mkdir()
        second.mkdir()
        monkeypatch.chdir(first)
        assert main(["simulate", "visibility_power"]) == EXIT_OK
        original = (first / "simulate_visibility_power.csv").read_bytes()
        monkeypatch.chdir(second)
        assert main([
            "simulate", "visibility_power",
            "--config", str(first / "simulate_visibility_power.csv"),
        ]) == EXIT_OK
        replayed = (second / "simulate_visibility_power.csv").read_bytes()
        assert replayed == original

    def test_explicit_keys_stay_explicit_through_replay(self, workdir):
        (workdir / "run.cfg").write_text("laser.power_W = 3.25\n")
        main(["simulate", "visibility_power", "--config", "run.cfg", "--out", "x.csv"])
        text = (workdir / "x.csv").read_text()
        assert "# cfg: laser.power_W = 3.25" in text
        assert "# cfg[assumed]: laser.wavelength_m" in text


class TestFit:
    def _make_scan(self, workdir, seed="9"):
        main(["simulate", "position_scan", "--seed", seed, "--out", "scan.csv"])
        return "scan.csv"

    def test_sinusoid_round_trip(self, workdir, capsys):
        scan = self._make_scan(workdir)
        assert main(["fit", "sinusoid", scan]) == EXIT_OK
        out = capsys.readouterr().out
        assert "delta_x3 =" in out
        assert "V =" in out
        payload = self._json_payload(workdir / "fit_sinusoid.json")
        assert set(payload["parameters"]) == {"O", "A", "delta_x3", "V"}
        assert payload["tool_version"] == __version__

    @staticmethod
    def _json_payload(path: Path) -> dict:
        lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
        return json.loads("\n".join(lines))

    def test_susceptibility_on_bundled_series(self, workdir, capsys):
        code = main(["fit", "susceptibility", _bundled("deflection_demo.csv")])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "chi =" in out and "(stat)" in out and "(syst)" in out
        payload = self._json_payload(workdir / "fit_susceptibility.json")
        chi = payload["parameters"]["chi"]
        assert chi["value"] == pytest.approx(95.46, abs=0.05)
        assert chi["stat_err"] == pytest.approx(3.14, abs=0.05)
        assert chi["unit"] == "A^3"
        assert set(chi["syst_err"]) == {
            "calibration", "field_homogeneity", "beam_v_mean", "beam_v_fwhm"
        }

    def test_optical_polarizability_fit(self, workdir, capsys):
        # synthesize a clean power scan through the public model and fit it back
        from conftest import make_interferometer
        from kdtli import BeamSpec, averaged_first_harmonic, velocity_quadrature
        from kdtli.config import RunConfig

        quad = velocity_quadrature(BeamSpec(146.0, 31.0), 64)
        molecule = RunConfig().molecule()
        lines = ["power_W,visibility,err"]
        for p in np.linspace(0.5, 9.5, 10):
            v = abs(
                averaged_first_harmonic(make_interferometer(power_W=float(p)), molecule, quad)
            )
            lines.append(f"{float(p)!r},{v!r},0.002")
        (workdir / "powerscan.csv").write_text("\n".join(lines) + "\n")
        assert main(["fit", "optical_polarizability", "powerscan.csv"]) == EXIT_OK
        payload = self._json_payload(workdir / "fit_optical_polarizability.json")
        assert payload["parameters"]["alpha_opt"]["value"] == pytest.approx(61.0, rel=1e-6)
        assert payload["parameters"]["alpha_opt"]["syst_err"]["laser_power"] == (
            pytest.approx(0.10101 * 61.0, rel=1e-3)
        )

    def test_kind_mismatch_is_format_error(self, workdir):
        scan = self._make_scan(workdir)
        assert main(["fit", "susceptibility", scan]) == EXIT_FORMAT

    def test_too_few_points_is_fit_error(self, workdir):
        (workdir / "short.csv").write_text(
            "power_W,visibility,err\n1.0,0.2,0.01\n2.0,0.3,0.01\n3.0,0.25,0.01\n"
        )
        assert main(["fit", "optical_polarizability", "short.csv"]) == EXIT_FIT

    def test_malformed_rows_are_format_errors(self, workdir):
        (workdir / "bad.csv").write_text("x3_nm,counts\n0,10\n30,oops\n")
        assert main(["fit", "sinusoid", "bad.csv"]) == EXIT_FORMAT

    def test_missing_input_is_usage_error(self, workdir):
        assert main(["fit", "sinusoid", "no_such_file.csv"]) == EXIT_USAGE


class TestStats:
    def test_bundled_snapshot_summary(self, workdir, capsys):
        code = main(["stats", _bundled("conformer_snapshots_synthetic.csv")])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "chi = alpha_stat + alpha_dip = 68.2 + 24.6 = 92.8 A^3" in out
        payload = json.loads(
            "\n".join(
                l for l in (workdir / "stats_summary.json").read_text().splitlines()
                if not l.startswith("#")
            )
        )
        assert payload["chi_A3"] == pytest.approx(92.8, abs=1e-9)
        assert payload["n"] == 20

    def test_wrong_header_is_format_error(self, workdir):
        (workdir / "bad.csv").write_text("t,a,d\n1,2,3\n")
        assert main(["stats", "bad.csv"]) == EXIT_FORMAT


class TestConfigErrors:
    def test_unknown_key_is_usage_error(self, workdir):
        (workdir / "bad.cfg").write_text("laser.cheese = 4\n")
        assert main(["simulate", "visibility_power", "--config", "bad.cfg"]) == EXIT_USAGE

    def test_missing_config_is_usage_error(self, workdir):
        assert main(["simulate", "visibility_power", "--config", "gone.cfg"]) == EXIT_USAGE

    def test_invalid_node_count_is_usage_error(self, workdir):
        assert main(["simulate", "visibility_power", "--nodes", "2"]) == EXIT_USAGE
