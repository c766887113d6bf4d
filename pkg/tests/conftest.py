import threading

import pytest

from audioscope import audio_io
from audioscope.nn import build_model, save_checkpoint_file
from audioscope.server import create_server

from synth import TWO_TONE_CLASSES, tone, write_tone_dataset


@pytest.fixture(scope="session")
def toy_dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("tones2")
    return write_tone_dataset(root, TWO_TONE_CLASSES, clips_per_class=50)


@pytest.fixture(scope="session")
def tiny_dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("tones_tiny")
    return write_tone_dataset(root, TWO_TONE_CLASSES, clips_per_class=12)


@pytest.fixture(scope="session")
def fresh_model():
    return build_model(seed=0)


@pytest.fixture(scope="session")
def fresh_checkpoint(fresh_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt") / "fresh.ckpt"
    save_checkpoint_file(fresh_model, path)
    return path


@pytest.fixture(scope="session")
def sample_wav_bytes():
    return audio_io.write_wav(tone(440.0))


def start_server(model, static_dir=None):
    server = create_server(model, port=0, static_dir=static_dir)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    port = server.server_address[1]
    return server, f"http://127.0.0.1:{port}"


@pytest.fixture(scope="session")
def live_server(fresh_model):
    server, url = start_server(fresh_model)
    yield url
    server.shutdown()
    server.server_close()


@pytest.fixture(scope="session")
def zero_weight_model():
    model = build_model(seed=0)
    for p in model.parameters():
        p[...] = 0.0
    return model
