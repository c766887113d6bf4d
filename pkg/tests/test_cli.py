import json
import subprocess
import sys

import numpy as np
import pytest

from audioscope import audio_io, cli

from synth import TWO_TONE_CLASSES, tone, write_tone_dataset


def run_cli(*argv):
    """In-process invocation capturing the exit code."""
    try:
        return cli.main(list(argv))
    except SystemExit as exc:  # argparse usage errors
        return exc.code


def run_cli_subprocess(*argv):
    return subprocess.run([sys.executable, "-m", "audioscope.cli", *argv],
                          capture_output=True, text=True)


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """One small real training run shared by the CLI tests."""
    base = tmp_path_factory.mktemp("cli")
    data = write_tone_dataset(base / "data", TWO_TONE_CLASSES,
                              clips_per_class=12)
    ckpt = base / "model.ckpt"
    code = run_cli("train", "--data", str(data), "--out", str(ckpt),
                   "--epochs", "1", "--batch", "8", "--seed", "3")
    assert code == 0
    return {"data": data, "ckpt": ckpt, "base": base}


class TestTrain:
    def test_writes_checkpoint_and_report(self, trained):
        assert trained["ckpt"].exists()
        report = json.loads(
            (trained["base"] / "model.ckpt.report.json").read_text())
        assert report["epochs"] == [1]
        assert len(report["val_accuracy"]) == 1
        assert report["skipped_files"] == []

    def test_missing_data_flag_is_usage_error(self):
        result = run_cli_subprocess("train", "--out", "/tmp/x.ckpt")
        assert result.returncode == 2
        assert "usage" in result.stderr.lower()

    def test_epochs_zero_is_usage_error(self, trained):
        code = run_cli("train", "--data", str(trained["data"]),
                       "--out", "/tmp/x.ckpt", "--epochs", "0")
        assert code == 2

    def test_nonexistent_dataset_is_runtime_error(self, tmp_path):
        code = run_cli("train", "--data", str(tmp_path / "nope"),
                       "--out", str(tmp_path / "x.ckpt"))
        assert code == 1

    def test_same_seed_byte_identical_checkpoints(self, trained, tmp_path):
        out_a = tmp_path / "a.ckpt"
        out_b = tmp_path / "b.ckpt"
        for out in (out_a, out_b):
            code = run_cli("train", "--data", str(trained["data"]),
                           "--out", str(out), "--epochs", "1",
                           "--batch", "8", "--seed", "3")
            assert code == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        assert out_a.read_bytes() == trained["ckpt"].read_bytes()


class TestEval:
    def test_prints_accuracy_and_confusion(self, trained, capsys):
        code = run_cli("eval", "--data", str(trained["data"]),
                       "--checkpoint", str(trained["ckpt"]))
        assert code == 0
        body = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert 0.0 <= body["accuracy"] <= 1.0
        confusion = np.array(body["confusion"])
        assert confusion.shape == (10, 10)
        assert confusion.sum() == body["examples"]

    def test_missing_checkpoint(self, trained):
        code = run_cli("eval", "--data", str(trained["data"]),
                       "--checkpoint", "/nonexistent/m.ckpt")
        assert code == 1


class TestInspect:
    def test_exports_all_artifacts(self, trained, tmp_path, capsys):
        wav = tmp_path / "in.wav"
        wav.write_bytes(audio_io.write_wav(tone(440)))
        out = tmp_path / "inspect"
        code = run_cli("inspect", "--checkpoint", str(trained["ckpt"]),
                       "--wav", str(wav), "--out", str(out))
        assert code == 0
        pngs = sorted(out.rglob("*.png"))
        wavs = sorted(out.rglob("*.wav"))
        assert len(pngs) == 64  # 16 + 16 + 32
        assert len(wavs) == 64
        assert len(list((out / "layer2").glob("*.png"))) == 32
        prediction = json.loads((out / "prediction.json").read_text())
        assert sum(prediction["probs"]) == pytest.approx(1.0, abs=1e-4)
        csvs = list(out.glob("*.csv"))
        assert len(csvs) == 5  # three conv + two dense layers
        out_json = json.loads(capsys.readouterr().out.strip())
        assert out_json["label"] == prediction["label"]

    def test_rerun_is_byte_identical(self, trained, tmp_path):
        wav = tmp_path / "in.wav"
        wav.write_bytes(audio_io.write_wav(tone(660)))
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert run_cli("inspect", "--checkpoint", str(trained["ckpt"]),
                           "--wav", str(wav), "--out", str(out)) == 0
        for file_a in sorted(out_a.rglob("*")):
            if file_a.is_file():
                file_b = out_b / file_a.relative_to(out_a)
                assert file_a.read_bytes() == file_b.read_bytes()


class TestEdit:
    def test_repeat_doubles(self, tmp_path, capsys):
        src = tmp_path / "in.wav"
        src.write_bytes(audio_io.write_wav(tone(440)))
        dst = tmp_path / "out.wav"
        ops = json.dumps([{"kind": "repeat", "params": {"count": 2}}])
        code = run_cli("edit", "--wav", str(src), "--ops", ops,
                       "--out", str(dst))
        assert code == 0
        assert len(audio_io.load_wav(dst.read_bytes())) == 32000
        body = json.loads(capsys.readouterr().out.strip())
        assert body["duration_ms"] == pytest.approx(2000.0, abs=0.1)

    def test_empty_ops_content_equal(self, tmp_path):
        src = tmp_path / "in.wav"
        src.write_bytes(audio_io.write_wav(tone(440)))
        dst = tmp_path / "out.wav"
        assert run_cli("edit", "--wav", str(src), "--ops", "[]",
                       "--out", str(dst)) == 0
        a = audio_io.load_wav(src.read_bytes()).samples
        b = audio_io.load_wav(dst.read_bytes()).samples
        assert np.max(np.abs(a - b)) <= 2 / 32768

    def test_invalid_ops_json_is_usage_error(self, tmp_path):
        src = tmp_path / "in.wav"
        src.write_bytes(audio_io.write_wav(tone(440)))
        code = run_cli("edit", "--wav", str(src), "--ops", "{bad",
                       "--out", str(tmp_path / "o.wav"))
        assert code == 2

    def test_runtime_edit_failure(self, tmp_path):
        src = tmp_path / "in.wav"
        src.write_bytes(audio_io.write_wav(tone(440)))
        ops = json.dumps([{"kind": "slice",
                           "params": {"start_ms": 900, "end_ms": 100}}])
        code = run_cli("edit", "--wav", str(src), "--ops", ops,
                       "--out", str(tmp_path / "o.wav"))
        assert code == 1


class TestServe:
    def test_bad_port_is_usage_error(self):
        result = run_cli_subprocess("serve", "--port", "notaport")
        assert result.returncode == 2
        result = run_cli_subprocess("serve", "--port", "99999")
        assert result.returncode == 2

    def test_missing_checkpoint_file(self):
        code = run_cli("serve", "--checkpoint", "/nonexistent/m.ckpt",
                       "--port", "0")
        assert code == 1

    def test_healthy_start_answers_summary(self, trained):
        import threading
        import requests
        from audioscope.nn import load_checkpoint_file
        from audioscope.server import create_server
        server = create_server(load_checkpoint_file(trained["ckpt"]), port=0)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            port = server.server_address[1]
            r = requests.get(f"http://127.0.0.1:{port}/api/model/summary",
                             timeout=30)
            assert r.status_code == 200
        finally:
            server.shutdown()
            server.server_close()
