import filecmp
import json

import jsonschema
import pytest

from cyclone_eye.cli import (
    CONFIG_ENV,
    EXIT_ABSENT,
    EXIT_CALIBRATION,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    main,
    output_schema,
)
from cyclone_eye.storm import WORKED_EXAMPLE_CRISP, load_config
from cyclone_eye.track import load_fixture


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, shape, *argv):
    code, out, err = run(capsys, *argv, "--json")
    doc = json.loads(out)
    jsonschema.validate(doc, output_schema(shape))
    return code, doc


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("bundle")
    assert main(["synth", "--seed", "3", "--out", str(out), "--frames", "3"]) == 0
    return out


@pytest.fixture(autouse=True)
def no_env_config(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)


class TestFisEval:
    def test_worked_example(self, capsys):
        code, doc = run_json(capsys, "fis-eval", "fis-eval", "--inputs", "D=75,W=120,PD=37.5,EP=923")
        assert code == EXIT_OK and doc["present"] is True
        assert abs(doc["crisp"] - WORKED_EXAMPLE_CRISP) <= 0.05
        assert [r["rule"] for r in doc["rules"]] == list(range(1, 17))

    def test_rule_one_saturation(self, capsys):
        code, doc = run_json(capsys, "fis-eval", "fis-eval", "--inputs", "D=1,W=20,PD=1,EP=900")
        assert code == EXIT_OK and doc["present"] is False

    def test_text_trace_has_all_rules(self, capsys):
        code, out, _ = run(capsys, "fis-eval", "--inputs", "D=75,W=120,PD=37.5,EP=923")
        assert out.startswith("crisp: 0.70") and "present: true" in out
        assert len([ln for ln in out.splitlines() if ln.strip()[:2].strip().isdigit()]) == 16

    @pytest.mark.parametrize("text", ["D=abc,W=1,PD=1,EP=950", "D=1,W=1,PD=1", "X=1,D=1,W=1,PD=1,EP=950"])
    def test_malformed_inputs(self, capsys, text):
        assert run(capsys, "fis-eval", "--inputs", text)[0] == EXIT_USAGE

    def test_missing_flag(self, capsys):
        assert run(capsys, "fis-eval")[0] == EXIT_USAGE

    def test_custom_fis_file(self, capsys, tmp_path):
        (tmp_path / "f.json").write_text(json.dumps(load_config("default")))
        code, _ = run_json(capsys, "fis-eval", "fis-eval", "--inputs", "D=75,W=120,PD=37.5,EP=923",
                           "--fis", str(tmp_path / "f.json"))
        assert code == EXIT_OK

    def test_missing_fis_file(self, capsys, tmp_path):
        code = run(capsys, "fis-eval", "--inputs", "D=75,W=120,PD=37.5,EP=923", "--fis", str(tmp_path / "no.json"))[0]
        assert code == EXIT_IO


class TestDetect:
    def args(self, bundle, k=0):
        man = json.loads((bundle / "manifest.json").read_text())
        prior = man[0]["prior_center"]
        return ["detect", "--image", str(bundle / f"frame_{k:03d}.png"), "--fields", str(bundle / f"fields_{k:03d}.json"),
                "--prior-center", f"{prior['lat']},{prior['lon']}"]

    def test_locates_truth(self, capsys, bundle):
        truth = json.loads((bundle / "truth.json").read_text())[0]["eye"]
        code, doc = run_json(capsys, "detect", *self.args(bundle))
        assert code == EXIT_OK and doc["present"]
        assert abs(doc["eye"]["lat"] - truth["lat"]) <= 0.02
        assert abs(doc["eye"]["lon"] - truth["lon"]) <= 0.02

    def test_absent_fields(self, capsys, bundle, tmp_path):
        fields = json.loads((bundle / "fields_000.json").read_text())
        for f in fields:
            f["D"] = 5
        (tmp_path / "dry.json").write_text(json.dumps(fields))
        argv = self.args(bundle)
        argv[argv.index("--fields") + 1] = str(tmp_path / "dry.json")
        code, out, _ = run(capsys, *argv)
        assert code == EXIT_ABSENT and out.strip() == "absent"
        code, doc = run_json(capsys, "detect", *argv)
        assert code == EXIT_ABSENT and doc["eye"] is None

    def test_missing_prior_center(self, capsys, bundle):
        argv = self.args(bundle)[:-2]
        assert run(capsys, *argv)[0] == EXIT_USAGE

    def test_bad_prior_center(self, capsys, bundle):
        argv = self.args(bundle)
        argv[-1] = "north"
        assert run(capsys, *argv)[0] == EXIT_USAGE

    def test_unreadable_image(self, capsys, bundle, tmp_path):
        (tmp_path / "x.png").write_text("not an image")
        argv = self.args(bundle)
        argv[argv.index("--image") + 1] = str(tmp_path / "x.png")
        assert run(capsys, *argv)[0] == EXIT_IO

    def test_missing_fields(self, capsys, bundle, tmp_path):
        argv = self.args(bundle)
        argv[argv.index("--fields") + 1] = str(tmp_path / "none.json")
        assert run(capsys, *argv)[0] == EXIT_IO

    def test_debug_images(self, capsys, bundle, tmp_path):
        code = run(capsys, *self.args(bundle), "--debug-dir", str(tmp_path / "dbg"))[0]
        assert code == EXIT_OK
        assert sorted(p.name for p in (tmp_path / "dbg").iterdir()) == ["binary.png", "denoised.png"]

    def test_debug_flag_needs_directory(self, capsys, bundle, tmp_path):
        (tmp_path / "cfg.json").write_text('{"debug_images": true}')
        assert run(capsys, *self.args(bundle), "--config", str(tmp_path / "cfg.json"))[0] == EXIT_USAGE

    def test_inputs_not_mutated(self, capsys, bundle):
        before = {p.name: p.read_bytes() for p in bundle.iterdir()}
        run(capsys, *self.args(bundle))
        assert {p.name: p.read_bytes() for p in bundle.iterdir()} == before


class TestTrack:
    def test_three_frames(self, capsys, bundle, tmp_path):
        csv_out, geo_out = tmp_path / "t.csv", tmp_path / "t.geojson"
        code, doc = run_json(capsys, "track", "track", str(bundle / "manifest.json"),
                             "--out-csv", str(csv_out), "--out-geojson", str(geo_out))
        assert code == EXIT_OK
        truth = json.loads((bundle / "truth.json").read_text())
        geo = json.loads(geo_out.read_text())
        points = [f for f in geo["features"] if f["geometry"]["type"] == "Point"]
        assert len(points) == 3
        for f, t in zip(points, truth):
            lon, lat = f["geometry"]["coordinates"]
            assert abs(lat - t["eye"]["lat"]) <= 0.02 and abs(lon - t["eye"]["lon"]) <= 0.02
        assert len(doc["links"]) == 2
        assert len(csv_out.read_text().splitlines()) == 4

    def test_prior_center_chain(self, capsys, bundle):
        _, doc = run_json(capsys, "track", "track", str(bundle / "manifest.json"))
        pts = doc["points"]
        for prev, cur in zip(pts, pts[1:]):
            assert cur["prior_center"] == {"lat": prev["lat"], "lon": prev["lon"]}

    def test_manifest_without_seed(self, capsys, bundle, tmp_path):
        man = json.loads((bundle / "manifest.json").read_text())
        for e in man:
            e.pop("prior_center", None)
            e["image"] = str(bundle / e["image"])
            e["fields"] = str(bundle / e["fields"])
        (tmp_path / "m.json").write_text(json.dumps(man))
        assert run(capsys, "track", str(tmp_path / "m.json"))[0] == EXIT_USAGE
        truth = json.loads((bundle / "truth.json").read_text())[0]["grid_center"]
        code = run(capsys, "track", str(tmp_path / "m.json"), "--prior-center", f"{truth['lat']},{truth['lon']}")[0]
        assert code == EXIT_OK

    def test_missing_manifest(self, capsys, tmp_path):
        assert run(capsys, "track", str(tmp_path / "none.json"))[0] == EXIT_IO


class TestCompare:
    def test_fixture_table(self, capsys, tmp_path):
        code, out, _ = run(capsys, "compare", "--fixture", "tauktae", "--out", str(tmp_path / "t.csv"))
        assert code == EXIT_OK
        lines = out.splitlines()
        assert len(lines) == 19
        printed = load_fixture("tauktae").rows
        for line, row in zip(lines[1:], printed):
            vals = [float(v) for v in line.split(",")[6:]]
            assert vals == pytest.approx([row[c] for c in ("a_lat", "a_lon", "b_lat", "b_lon")], abs=0.02)
        assert (tmp_path / "t.csv").read_text() == out

    def test_fixture_json(self, capsys):
        code, doc = run_json(capsys, "compare-fixture", "compare", "--fixture", "yaas")
        assert code == EXIT_OK and len(doc["rows"]) == 12

    def test_track_files(self, capsys, tmp_path):
        (tmp_path / "r.csv").write_text("timestamp,lat,lon,source\n03,11.6,72.6,IMD\n09,12.0,72.5,IMD\n")
        (tmp_path / "c.csv").write_text("timestamp,lat,lon,source\n03,12.16,72.48,METHOD\n09,12.0,72.5,METHOD\n")
        code, doc = run_json(capsys, "compare-tracks", "compare", "--reference", str(tmp_path / "r.csv"),
                             "--candidate", str(tmp_path / "c.csv"))
        assert code == EXIT_OK
        assert doc["rows"][0]["lat_err_pct"] == pytest.approx(4.8276, abs=1e-4)

    def test_misaligned_tracks(self, capsys, tmp_path):
        (tmp_path / "r.csv").write_text("timestamp,lat,lon,source\n03,11.6,72.6,IMD\n")
        (tmp_path / "c.csv").write_text("timestamp,lat,lon,source\n09,12.16,72.48,METHOD\n")
        code, _, err = run(capsys, "compare", "--reference", str(tmp_path / "r.csv"), "--candidate", str(tmp_path / "c.csv"))
        assert code == EXIT_IO and "unmatched" in err

    def test_needs_inputs(self, capsys):
        assert run(capsys, "compare")[0] == EXIT_USAGE

    def test_unknown_fixture(self, capsys):
        assert run(capsys, "compare", "--fixture", "amphan")[0] == EXIT_USAGE


class TestSynth:
    def test_byte_identical(self, capsys, tmp_path):
        for name in ("a", "b"):
            assert run(capsys, "synth", "--seed", "9", "--frames", "2", "--out", str(tmp_path / name))[0] == EXIT_OK
        cmp = filecmp.dircmp(tmp_path / "a", tmp_path / "b")
        assert cmp.left_only == [] and cmp.right_only == [] and cmp.diff_files == []
        for f in cmp.common_files:
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_json(self, capsys, tmp_path):
        code, doc = run_json(capsys, "synth", "synth", "--seed", "1", "--out", str(tmp_path / "s"))
        assert code == EXIT_OK and doc["frames"] == 1

    def test_bad_frames(self, capsys, tmp_path):
        assert run(capsys, "synth", "--frames", "0", "--out", str(tmp_path))[0] == EXIT_USAGE


class TestCalibrate:
    def test_default(self, capsys, tmp_path):
        code, doc = run_json(capsys, "calibrate", "calibrate", "--out", str(tmp_path / "c.json"))
        assert code == EXIT_OK and doc["converged"] and doc["residual"] <= 0.05
        assert json.loads((tmp_path / "c.json").read_text())["name"] == load_config("default")["name"]

    def test_failure_exit_code(self, capsys, tmp_path):
        code, doc = run_json(capsys, "calibrate", "calibrate", "--out", str(tmp_path / "c.json"), "--max-sweeps", "0")
        assert code == EXIT_CALIBRATION and not doc["converged"]

    def test_bad_start_file(self, capsys, tmp_path):
        (tmp_path / "bad.json").write_text("{")
        assert run(capsys, "calibrate", "--fis", str(tmp_path / "bad.json"), "--out", str(tmp_path / "o.json"))[0] == EXIT_IO


class TestRunConfig:
    def test_env_default(self, capsys, tmp_path, monkeypatch):
        (tmp_path / "cfg.json").write_text('{"presence_threshold": 0.71}')
        monkeypatch.setenv(CONFIG_ENV, str(tmp_path / "cfg.json"))
        _, doc = run_json(capsys, "fis-eval", "fis-eval", "--inputs", "D=75,W=120,PD=37.5,EP=923")
        assert doc["present"] is False  # 0.7026 < 0.71

    def test_flag_overrides_env(self, capsys, tmp_path, monkeypatch):
        (tmp_path / "env.json").write_text('{"presence_threshold": 0.71}')
        (tmp_path / "flag.json").write_text('{"presence_threshold": 0.5}')
        monkeypatch.setenv(CONFIG_ENV, str(tmp_path / "env.json"))
        _, doc = run_json(capsys, "fis-eval", "fis-eval", "--inputs", "D=75,W=120,PD=37.5,EP=923",
                          "--config", str(tmp_path / "flag.json"))
        assert doc["present"] is True

    def test_unknown_key(self, capsys, tmp_path):
        (tmp_path / "cfg.json").write_text('{"threshold": 3}')
        code, _, err = run(capsys, "fis-eval", "--inputs", "D=1,W=20,PD=1,EP=900", "--config", str(tmp_path / "cfg.json"))
        assert code == EXIT_USAGE and "threshold" in err

    @pytest.mark.parametrize("doc", ['{"se_radius": 0}', '{"threshold_method": "fixed"}',
                                     '{"presence_threshold": 2}', '[1]', '{'])
    def test_invalid_values(self, capsys, tmp_path, doc):
        (tmp_path / "cfg.json").write_text(doc)
        code = run(capsys, "fis-eval", "--inputs", "D=1,W=20,PD=1,EP=900", "--config", str(tmp_path / "cfg.json"))[0]
        assert code == EXIT_USAGE

    def test_fixed_threshold_pipeline(self, capsys, bundle, tmp_path):
        (tmp_path / "cfg.json").write_text('{"threshold_method": "fixed", "threshold_value": 150, "se_radius": 2}')
        man = json.loads((bundle / "manifest.json").read_text())
        p = man[0]["prior_center"]
        code = run(capsys, "detect", "--image", str(bundle / "frame_000.png"), "--fields", str(bundle / "fields_000.json"),
                   "--prior-center", f"{p['lat']},{p['lon']}", "--config", str(tmp_path / "cfg.json"))[0]
        assert code == EXIT_OK


def test_no_command(capsys):
    assert run(capsys)[0] == EXIT_USAGE


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "cyclone_eye", "fis-eval", "--inputs", "D=1,W=20,PD=1,EP=900"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "present: false" in r.stdout
