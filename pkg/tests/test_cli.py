import json

import numpy as np
import pytest
from click.testing import CliRunner

from hardycert.blockdiag import BlockModel
from hardycert.cli import main
from hardycert.hardy import Behavior, HardyPoint, hardy_behavior


@pytest.fixture
def runner():
    return CliRunner()


def write_behavior(path, point):
    hardy_behavior(point)  # fail fast on bad points
    path.write_text(hardy_behavior(point).to_json() + "\n")
    return str(path)


class TestGenBehavior:
    def test_writes_json(self, runner, tmp_path):
        out = tmp_path / "b.json"
        res = runner.invoke(main, ["gen-behavior", "--r", "0.5", "--s", "0.5",
                                   "--out", str(out)])
        assert res.exit_code == 0
        b = Behavior.from_json(out.read_text())
        assert b == hardy_behavior(HardyPoint(0.5, 0.5))
        assert "p_Hardy" in res.output

    def test_reports_success_probability(self, runner, tmp_path):
        out = tmp_path / "b.json"
        res = runner.invoke(main, ["gen-behavior", "--r", "0.5", "--s", "0.5",
                                   "--out", str(out)])
        # [DERIVED] closed-form success probability at (1/2, 1/2)
        assert "0.08333333333" in res.output

    def test_out_of_range_exits_2(self, runner):
        res = runner.invoke(main, ["gen-behavior", "--r", "1.5", "--s", "0.5"])
        assert res.exit_code == 2
        assert "r out of range" in res.output

    def test_zero_is_rejected(self, runner):
        res = runner.invoke(main, ["gen-behavior", "--r", "0.5", "--s", "0"])
        assert res.exit_code == 2
        assert "s out of range" in res.output

    def test_csv_roundtrip_is_bit_exact(self, runner, tmp_path):
        out = tmp_path / "b.csv"
        res = runner.invoke(main, ["gen-behavior", "--r", "0.3", "--s", "0.7",
                                   "--out", str(out)])
        assert res.exit_code == 0
        row = out.read_text().strip().splitlines()[-1]
        b = Behavior.from_csv_row(row)
        assert np.array_equal(b.probs, hardy_behavior(HardyPoint(0.3, 0.7)).probs)


class TestSimulate:
    def test_matches_gen_behavior(self, runner, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        r1 = runner.invoke(main, ["gen-behavior", "--r", "0.4", "--s", "0.6",
                                  "--out", str(a)])
        r2 = runner.invoke(main, ["simulate", "--r", "0.4", "--s", "0.6",
                                  "--phi", "1.1", "--xi", "2.2", "--out", str(b)])
        assert r1.exit_code == 0 and r2.exit_code == 0
        ba = Behavior.from_json(a.read_text())
        bb = Behavior.from_json(b.read_text())
        assert ba.max_deviation(bb) <= 1e-12


class TestCertify:
    def test_certified_exit_0(self, runner, tmp_path):
        infile = write_behavior(tmp_path / "b.json", HardyPoint(0.5, 0.5))
        res = runner.invoke(main, ["certify", "--in", infile])
        assert res.exit_code == 0
        data = json.loads(res.output)
        assert data["verdict"] == "certified"

    def test_uniform_exit_1(self, runner, tmp_path):
        infile = tmp_path / "u.json"
        infile.write_text(Behavior(np.full(16, 0.25)).to_json() + "\n")
        res = runner.invoke(main, ["certify", "--in", str(infile)])
        assert res.exit_code == 1

    def test_mixture_exit_1(self, runner, tmp_path):
        model = BlockModel.diagonal(
            [HardyPoint(0.3, 0.4), HardyPoint(0.6, 0.7)], [0.5, 0.5])
        from hardycert.blockdiag import mixture_behavior
        infile = tmp_path / "m.json"
        infile.write_text(mixture_behavior(model).to_json() + "\n")
        res = runner.invoke(main, ["certify", "--in", str(infile)])
        assert res.exit_code == 1

    def test_boundary_exit_3(self, runner, tmp_path):
        infile = write_behavior(tmp_path / "b.json", HardyPoint(1e-5, 0.5))
        res = runner.invoke(main, ["certify", "--in", infile])
        assert res.exit_code == 3

    def test_missing_file_exit_2(self, runner, tmp_path):
        res = runner.invoke(main, ["certify", "--in", str(tmp_path / "nope.json")])
        assert res.exit_code == 2

    def test_malformed_file_exit_2(self, runner, tmp_path):
        infile = tmp_path / "junk.json"
        infile.write_text("{not json")
        res = runner.invoke(main, ["certify", "--in", str(infile)])
        assert res.exit_code != 0
        assert "malformed" in res.output.lower() or res.exit_code == 2

    def test_certificate_written(self, runner, tmp_path):
        infile = write_behavior(tmp_path / "b.json", HardyPoint(0.5, 0.5))
        out = tmp_path / "cert.json"
        res = runner.invoke(main, ["certify", "--in", infile, "--out", str(out)])
        assert res.exit_code == 0
        data = json.loads(out.read_text())
        assert data["schema"] == "hardycert.certificate/1"


class TestChsh:
    def test_hardy_point_nonlocal(self, runner, tmp_path):
        infile = write_behavior(tmp_path / "b.json", HardyPoint(0.5, 0.5))
        res = runner.invoke(main, ["chsh", "--in", infile])
        assert res.exit_code == 0
        assert "nonlocal" in res.output

    def test_uniform_local(self, runner, tmp_path):
        infile = tmp_path / "u.json"
        infile.write_text(Behavior(np.full(16, 0.25)).to_json() + "\n")
        res = runner.invoke(main, ["chsh", "--in", str(infile)])
        assert res.exit_code == 1
        assert "local" in res.output


class TestCoverRegionsSweep:
    def test_cover_writes_facets(self, runner, tmp_path):
        out = tmp_path / "cov"
        res = runner.invoke(main, ["cover", "--grid", "41", "--out", str(out),
                                   "--no-plot"])
        assert res.exit_code == 0
        data = json.loads((out / "cover_star.json").read_text())
        assert len(data["planes"]) > 0

    def test_cover_plot(self, runner, tmp_path):
        out = tmp_path / "cov"
        res = runner.invoke(main, ["cover", "--grid", "21", "--out", str(out)])
        assert res.exit_code == 0
        assert (out / "cover_star.png").stat().st_size > 0

    def test_regions_outputs(self, runner, tmp_path):
        out = tmp_path / "reg"
        res = runner.invoke(main, ["regions", "--grid", "41", "--out", str(out)])
        assert res.exit_code == 0
        for name in ("equality", "concavity", "certified"):
            assert (out / f"{name}_star.csv").exists()
            assert (out / f"{name}_star.json").exists()
        assert (out / "regions_star.png").stat().st_size > 0
        assert "certified:" in res.output

    def test_regions_nu(self, runner, tmp_path):
        out = tmp_path / "reg"
        res = runner.invoke(main, ["regions", "--no-star", "--nu", "0.25",
                                   "--grid", "31", "--out", str(out), "--no-plot"])
        assert res.exit_code == 0
        assert (out / "certified_nu=0.25.csv").exists()

    def test_sweep_outputs(self, runner, tmp_path):
        out = tmp_path / "sweep"
        res = runner.invoke(main, ["sweep", "--N", "3", "--grid", "21",
                                   "--out", str(out)])
        assert res.exit_code == 0
        assert (out / "union.csv").exists()
        assert (out / "region_nu_1_of_3.csv").exists()
        assert (out / "region_nu_2_of_3.csv").exists()
        assert (out / "union.png").stat().st_size > 0
        summary = (out / "summary.txt").read_text()
        assert "N=3" in summary and "coverage=" in summary
        assert summary.strip() in res.output


class TestBlocksExtract:
    def test_blocks_common_point(self, runner, tmp_path):
        model = BlockModel.uniform(HardyPoint(0.5, 0.5), nA=2, nB=2)
        infile = tmp_path / "model.json"
        infile.write_text(model.to_json() + "\n")
        out = tmp_path / "mix.json"
        res = runner.invoke(main, ["blocks", "--in", str(infile),
                                   "--out", str(out)])
        assert res.exit_code == 0
        assert "hardy_form pass" in res.output
        b = Behavior.from_json(out.read_text())
        assert b.max_deviation(hardy_behavior(HardyPoint(0.5, 0.5))) <= 1e-12

    def test_blocks_mixture_fails_form(self, runner, tmp_path):
        model = BlockModel.diagonal(
            [HardyPoint(0.3, 0.4), HardyPoint(0.6, 0.7)], [0.5, 0.5])
        infile = tmp_path / "model.json"
        infile.write_text(model.to_json() + "\n")
        res = runner.invoke(main, ["blocks", "--in", str(infile)])
        assert res.exit_code == 1
        assert "hardy_form fail" in res.output
        assert "barycenter (r,s) = (0.45, 0.55)" in res.output

    def test_extract_common_point(self, runner, tmp_path):
        model = BlockModel.uniform(HardyPoint(0.4, 0.7), nA=2, nB=2)
        infile = tmp_path / "model.json"
        infile.write_text(model.to_json() + "\n")
        out = tmp_path / "ext.json"
        res = runner.invoke(main, ["extract", "--in", str(infile),
                                   "--out", str(out)])
        assert res.exit_code == 0
        data = json.loads(out.read_text())
        assert data["fidelity"] == pytest.approx(1.0, abs=1e-12)
        assert abs(sum(data["junk_diagonal"]) - 1.0) <= 1e-10

    def test_extract_distinct_points_exit_1(self, runner, tmp_path):
        model = BlockModel.diagonal(
            [HardyPoint(0.3, 0.4), HardyPoint(0.6, 0.7)], [0.5, 0.5])
        infile = tmp_path / "model.json"
        infile.write_text(model.to_json() + "\n")
        res = runner.invoke(main, ["extract", "--in", str(infile)])
        assert res.exit_code == 1

    def test_malformed_model_exit_2(self, runner, tmp_path):
        infile = tmp_path / "model.json"
        infile.write_text('{"blocks": [{"i": 0}]}')
        res = runner.invoke(main, ["blocks", "--in", str(infile)])
        assert res.exit_code != 0
