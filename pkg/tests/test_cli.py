import json

import pytest

from apf import generate_maze, load_instance, save_instance
from apf.cli import main

from helpers import BENT_CORRIDOR, corridor_instance, disconnected_instance


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestGen:
    def test_deterministic_directories(self, tmp_path, capsys):
        for name in ("a", "b"):
            assert run_cli(
                "gen", "--count", 3, "--height", 10, "--width", 10,
                "--density", 0.2, "--seed", 5, "--out-dir", tmp_path / name,
            ) == 0
        capsys.readouterr()
        files_a = sorted((tmp_path / "a").iterdir())
        files_b = sorted((tmp_path / "b").iterdir())
        assert [f.name for f in files_a] == [f.name for f in files_b]
        for fa, fb in zip(files_a, files_b):
            assert fa.read_bytes() == fb.read_bytes()

    def test_manifest_lists_instances(self, tmp_path, capsys):
        run_cli("gen", "--count", 2, "--height", 8, "--width", 8,
                "--density", 0.1, "--seed", 1, "--out-dir", tmp_path)
        capsys.readouterr()
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["instances"] == ["inst_0000.json", "inst_0001.json"]
        for name in manifest["instances"]:
            inst = load_instance(tmp_path / name)
            assert inst.reference is not None

    def test_retry_exhaustion_is_data_error(self, tmp_path, capsys):
        code = run_cli("gen", "--count", 1, "--height", 32, "--width", 32,
                       "--density", 0.95, "--seed", 0, "--out-dir", tmp_path)
        assert code == 2
        assert "retries" in capsys.readouterr().err


class TestSolve:
    def test_corridor_render_golden(self, tmp_path, capsys):
        inst = corridor_instance(BENT_CORRIDOR)
        save_instance(inst, tmp_path / "corr.json")
        code = run_cli("solve", tmp_path / "corr.json", "--method", "astar",
                       "--render", "--render-out", tmp_path / "corr.ppm")
        assert code == 0
        out = capsys.readouterr().out
        golden = (
            "######\n"
            "#S**##\n"
            "####*#\n"
            "####*#\n"
            "####*#\n"
            "####T#\n"
            "######\n"
        )
        assert golden in out
        assert "path length: 7 nodes" in out
        assert (tmp_path / "corr.ppm").read_bytes().startswith(b"P6\n")

    def test_preset_params_echo(self, tmp_path, capsys):
        inst = generate_maze(10, 10, 0.2, seed=3)
        save_instance(inst, tmp_path / "m.json")
        code = run_cli("solve", tmp_path / "m.json", "--method", "daa:preset=mpd/daa-mix")
        assert code == 0
        assert "params: (0.334, 0.660, 0.753)" in capsys.readouterr().out

    def test_unreachable_exit_code(self, tmp_path, capsys):
        inst = disconnected_instance(seed=1)
        save_instance(inst, tmp_path / "disc.json")
        code = run_cli("solve", tmp_path / "disc.json", "--method", "astar")
        assert code == 2
        assert "unreachable" in capsys.readouterr().err

    def test_json_output(self, tmp_path, capsys):
        inst = corridor_instance(BENT_CORRIDOR)
        save_instance(inst, tmp_path / "corr.json")
        code = run_cli("solve", tmp_path / "corr.json", "--method", "dijkstra", "--json")
        assert code == 0
        out = capsys.readouterr().out
        payload = json.loads([ln for ln in out.splitlines() if ln.startswith("{")][0])
        assert payload["terminated_by"] == "target_reached"
        assert payload["path"][0] == [1, 1]

    def test_unknown_method_is_data_error(self, tmp_path, capsys):
        inst = corridor_instance(BENT_CORRIDOR)
        save_instance(inst, tmp_path / "corr.json")
        assert run_cli("solve", tmp_path / "corr.json", "--method", "zoom") == 2


@pytest.fixture()
def small_dataset(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("ds")
    for i in range(3):
        inst = generate_maze(10, 10, 0.2, seed=200 + i)
        save_instance(inst, out_dir / f"inst_{i:04d}.json")
    (out_dir / "manifest.json").write_text(json.dumps(
        {"instances": [f"inst_{i:04d}.json" for i in range(3)]}
    ))
    return out_dir


class TestBench:
    def test_byte_identical_reruns(self, small_dataset, tmp_path, capsys):
        for name in ("r1.csv", "r2.csv"):
            code = run_cli(
                "bench", "--dataset", small_dataset,
                "--method", "astar", "--method", "dijkstra",
                "--method", "daa:alpha=0.5,lambda=0.5,kappa=1",
                "--output", tmp_path / name, "--no-figures",
            )
            assert code == 0
        capsys.readouterr()
        a = (tmp_path / "r1.csv").read_bytes()
        b = (tmp_path / "r2.csv").read_bytes()
        # The config echo embeds the output path; the data sections must match.
        strip = lambda raw: b"\n".join(
            ln for ln in raw.splitlines() if not ln.startswith(b"# config")
        )
        assert strip(a) == strip(b)
        code = run_cli(
            "bench", "--dataset", small_dataset,
            "--method", "astar", "--method", "dijkstra",
            "--method", "daa:alpha=0.5,lambda=0.5,kappa=1",
            "--output", tmp_path / "r1.csv", "--no-figures",
        )
        assert code == 0
        capsys.readouterr()
        assert (tmp_path / "r1.csv").read_bytes() == a

    def test_csv_golden_columns(self, small_dataset, tmp_path, capsys):
        run_cli("bench", "--dataset", small_dataset, "--method", "astar",
                "--output", tmp_path / "rep.csv", "--no-figures")
        capsys.readouterr()
        lines = (tmp_path / "rep.csv").read_text().splitlines()
        assert lines[0] == "# apf bench report"
        assert lines[2] == "# asim_methods: astar"
        assert lines[4] == (
            "method,instance_id,spr,psim,asim,cd,cd_normalized,hist,ep,path_loss"
        )
        data = [ln for ln in lines[5:] if ln]
        assert len(data) == 4  # 3 instances + aggregate
        assert data[-1].startswith("astar,aggregate,")

    def test_astar_alone_has_zero_ep(self, small_dataset, tmp_path, capsys):
        run_cli("bench", "--dataset", small_dataset, "--method", "astar",
                "--output", tmp_path / "rep.csv", "--no-figures")
        capsys.readouterr()
        lines = (tmp_path / "rep.csv").read_text().splitlines()[5:]
        for ln in lines:
            ep_col = ln.split(",")[8]
            assert float(ep_col) == 0.0

    def test_astar_spr_is_one_against_dijkstra_references(self, small_dataset, tmp_path, capsys):
        run_cli("bench", "--dataset", small_dataset, "--method", "astar",
                "--format", "json", "--output", tmp_path / "rep.json", "--no-figures")
        capsys.readouterr()
        payload = json.loads((tmp_path / "rep.json").read_text())
        report = payload["reports"][0]
        assert report["aggregate"]["spr"] == 1.0
        assert payload["asim_methods"] == ["astar"]
        assert "astar" in payload["timings_seconds"]

    def test_summary_figure_written(self, small_dataset, tmp_path, capsys):
        run_cli("bench", "--dataset", small_dataset, "--method", "astar",
                "--method", "dijkstra", "--output", tmp_path / "rep.csv",
                "--render-paths", "1")
        capsys.readouterr()
        assert (tmp_path / "rep_summary.png").exists()
        assert (tmp_path / "rep_paths_inst_0000.png").exists()

    def test_config_file_with_flag_override(self, small_dataset, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "dataset": str(small_dataset),
            "methods": ["astar"],
            "format": "csv",
            "output": str(tmp_path / "from_cfg.csv"),
        }))
        code = run_cli("bench", "--config", cfg, "--output", tmp_path / "override.csv",
                       "--no-figures")
        assert code == 0
        capsys.readouterr()
        assert (tmp_path / "override.csv").exists()
        assert not (tmp_path / "from_cfg.csv").exists()

    def test_missing_method_is_data_error(self, small_dataset, tmp_path, capsys):
        assert run_cli("bench", "--dataset", small_dataset,
                       "--output", tmp_path / "x.csv") == 2


class TestFitCommand:
    def test_corridor_train_loss_zero(self, tmp_path, capsys):
        ds = tmp_path / "corr"
        ds.mkdir()
        save_instance(corridor_instance(BENT_CORRIDOR), ds / "inst_0000.json")
        code = run_cli("fit", "--train", ds, "--grid-step", 0.5,
                       "--refine-iters", 0, "--output", tmp_path / "fit.json",
                       "--curve-csv", tmp_path / "curve.csv")
        assert code == 0
        out = capsys.readouterr().out
        assert "train loss: 0.000000" in out
        payload = json.loads((tmp_path / "fit.json").read_text())
        assert payload["train_loss"] == 0.0
        assert payload["evaluations"] == 28
        assert (tmp_path / "curve.csv").read_text().startswith("evaluation,alpha")

    def test_missing_reference_reported(self, tmp_path, capsys):
        ds = tmp_path / "noref"
        ds.mkdir()
        inst = generate_maze(8, 8, 0.1, seed=1)
        from dataclasses import replace
        save_instance(replace(inst, reference=None), ds / "inst_0000.json")
        code = run_cli("fit", "--train", ds, "--output", tmp_path / "fit.json")
        assert code == 2
        assert "reference" in capsys.readouterr().err


class TestConvert:
    def test_map_json_roundtrip(self, tmp_path, capsys):
        inst = generate_maze(10, 10, 0.2, seed=17)
        save_instance(inst, tmp_path / "orig.json")
        code = run_cli("convert", tmp_path / "orig.map", tmp_path / "conv.json",
                       "--source", *inst.source, "--target", *inst.target,
                       "--with-reference")
        assert code == 0
        code = run_cli("convert", tmp_path / "conv.json", tmp_path / "back.map")
        assert code == 0
        capsys.readouterr()
        assert (tmp_path / "back.map").read_bytes() == (tmp_path / "orig.map").read_bytes()
        conv = load_instance(tmp_path / "conv.json")
        assert conv.reference is not None

    def test_map_to_json_requires_endpoints(self, tmp_path, capsys):
        inst = generate_maze(10, 10, 0.2, seed=18)
        save_instance(inst, tmp_path / "m.json")
        assert run_cli("convert", tmp_path / "m.map", tmp_path / "out.json") == 2


class TestExitCodes:
    def test_usage_error_is_one(self, capsys):
        assert run_cli("definitely-not-a-command") == 1

    def test_missing_file_is_two(self, capsys):
        assert run_cli("solve", "no-such-file.json") == 2

    def test_help_is_zero(self, capsys):
        assert run_cli("--help") == 0
