import json
import subprocess
import sys

import numpy as np
import pytest

from compdeg.attrs import decode_attrs
from compdeg.cli import main
from compdeg.degrade import quantize_8bit
from compdeg.imgio import load_image, save_image
from compdeg.networks import estimation_arch, init_network, restoration_arch, save_weights
from compdeg.synthdata import write_dataset

from conftest import random_image


@pytest.fixture
def input_png(tmp_path, rng):
    img = random_image(rng, 24, 24)
    path = tmp_path / "in.png"
    save_image(img, path)
    return path


def make_weights_file(path, arch_fn, seed=0, zero=False):
    w = init_network(arch_fn(), seed=seed)
    if zero:
        for layer in w.layers:
            layer.weights = np.zeros_like(layer.weights)
            layer.bias = np.zeros_like(layer.bias)
    w.metadata = {"name": "estimator" if arch_fn is estimation_arch else "restorer"}
    save_weights(w, path)
    return path


@pytest.fixture
def est_weights(tmp_path):
    return make_weights_file(tmp_path / "est.cdnw", estimation_arch)


@pytest.fixture
def zero_est_weights(tmp_path):
    return make_weights_file(tmp_path / "est0.cdnw", estimation_arch, zero=True)


@pytest.fixture
def zero_res_weights(tmp_path):
    return make_weights_file(tmp_path / "res0.cdnw", restoration_arch, zero=True)


class TestDegradeCommand:
    def test_identity_flags_give_8bit_roundtrip(self, tmp_path, input_png, capsys):
        out = tmp_path / "out.png"
        code = main([
            "degrade", str(input_png), str(out),
            "--sigma", "0", "--lambda", "0", "--no-jpeg",
        ])
        assert code == 0
        original = load_image(input_png)
        assert np.array_equal(load_image(out), quantize_8bit(original))
        payload = json.loads(capsys.readouterr().out)
        assert payload["attributes"] == {"blur": 0.0, "noise": 0.0, "jpeg": 0.0}

    def test_same_seed_byte_identical(self, tmp_path, input_png):
        outs = []
        for name in ("a.png", "b.png"):
            out = tmp_path / name
            assert main([
                "degrade", str(input_png), str(out),
                "--sigma", "1.5", "--lambda", "25", "--quality", "50", "--seed", "7",
            ]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_sigma_out_of_range_exits_4(self, tmp_path, input_png, capsys):
        code = main(["degrade", str(input_png), str(tmp_path / "x.png"), "--sigma", "9"])
        assert code == 4
        assert "sigma" in capsys.readouterr().err

    def test_missing_input_exits_3(self, tmp_path):
        code = main(["degrade", str(tmp_path / "none.png"), str(tmp_path / "x.png")])
        assert code == 3

    def test_unknown_flag_exits_2(self, input_png, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["degrade", str(input_png), str(tmp_path / "x.png"), "--bogus"])
        assert exc.value.code == 2

    def test_quality_and_no_jpeg_conflict(self, input_png, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main([
                "degrade", str(input_png), str(tmp_path / "x.png"),
                "--quality", "50", "--no-jpeg",
            ])
        assert exc.value.code == 2


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli_data")
    write_dataset(d, count=4, h=32, w=32, seed=5)
    return d


class TestTrainCommand:
    def test_zero_epochs(self, tmp_path, data_dir, capsys):
        out = tmp_path / "w.cdnw"
        code = main([
            "train", "--kind", "estimator", "--data", str(data_dir), "--out", str(out),
            "--epochs", "0", "--patch", "16", "--batch", "4", "--patches-per-epoch", "8",
        ])
        assert code == 0
        assert out.exists()
        history = out.with_suffix(".cdnw.history.csv").read_text()
        assert history.strip() == "epoch,train_loss,val_loss,seconds"

    def test_defaults_echoed(self, tmp_path, data_dir, capsys):
        out = tmp_path / "w.cdnw"
        main([
            "train", "--kind", "estimator", "--data", str(data_dir), "--out", str(out),
            "--epochs", "0",
        ])
        echo = capsys.readouterr().out
        assert '"patch_size": 60' in echo
        assert '"batch_size": 128' in echo
        assert '"epochs": 80' not in echo  # epochs overridden to 0 in this run
        config = json.loads(out.with_suffix(".cdnw.config.json").read_text())
        assert config["patch_size"] == 60 and config["batch_size"] == 128

    def test_default_epoch_count_is_80(self):
        from compdeg.cli import build_parser

        args = build_parser().parse_args([
            "train", "--kind", "estimator", "--data", "d", "--out", "o",
        ])
        assert args.epochs == 80 and args.batch == 128 and args.patch == 60

    def test_same_seed_same_weights_file(self, tmp_path, data_dir):
        digests = []
        for name in ("w1.cdnw", "w2.cdnw"):
            out = tmp_path / name
            assert main([
                "train", "--kind", "estimator", "--data", str(data_dir), "--out", str(out),
                "--epochs", "1", "--patch", "16", "--batch", "4",
                "--patches-per-epoch", "8", "--seed", "3",
            ]) == 0
            digests.append(out.read_bytes())
        assert digests[0] == digests[1]


class TestEstimateCommand:
    def test_zero_weights_black_map(self, tmp_path, input_png, zero_est_weights, capsys):
        out_map = tmp_path / "map.png"
        code = main([
            "estimate", str(input_png), "--weights", str(zero_est_weights),
            "--out-map", str(out_map),
        ])
        assert code == 0
        m = load_image(out_map)
        assert not m.any()
        means = json.loads(capsys.readouterr().out)["channel_means"]
        assert means == {"blur": 0.0, "noise": 0.0, "jpeg": 0.0}

    def test_map_dimensions_match_input(self, tmp_path, input_png, est_weights):
        out_map = tmp_path / "map.png"
        main(["estimate", str(input_png), "--weights", str(est_weights), "--out-map", str(out_map)])
        assert load_image(out_map).shape == load_image(input_png).shape

    def test_json_decodes_through_decode_attrs(self, tmp_path, input_png, est_weights):
        out_map = tmp_path / "map.png"
        out_json = tmp_path / "means.json"
        main([
            "estimate", str(input_png), "--weights", str(est_weights),
            "--out-map", str(out_map), "--out-json", str(out_json),
        ])
        means = json.loads(out_json.read_text())["channel_means"]
        spec = decode_attrs(means["blur"], means["noise"], means["jpeg"])
        assert 0.0 <= spec.sigma <= 3.5

    def test_wrong_architecture_exits_4(self, tmp_path, input_png, zero_res_weights):
        code = main([
            "estimate", str(input_png), "--weights", str(zero_res_weights),
            "--out-map", str(tmp_path / "m.png"),
        ])
        assert code == 4


class TestRestoreCommand:
    def test_zero_map_zero_restorer_identity(self, tmp_path, input_png, zero_res_weights):
        zero_map = tmp_path / "zmap.png"
        save_image(np.zeros((3, 24, 24), np.float32), zero_map)
        out = tmp_path / "restored.png"
        code = main([
            "restore", str(input_png), "--res-weights", str(zero_res_weights),
            "--map", str(zero_map), "--out", str(out),
        ])
        assert code == 0
        assert np.array_equal(load_image(out), load_image(input_png))

    def test_blind_equals_estimate_restore_pipe(self, tmp_path, input_png, est_weights, zero_res_weights):
        # build a non-trivial restorer so the comparison is meaningful
        res = tmp_path / "res.cdnw"
        make_weights_file(res, restoration_arch, seed=11)

        blind_out = tmp_path / "blind.png"
        assert main([
            "restore", str(input_png), "--res-weights", str(res),
            "--est-weights", str(est_weights), "--out", str(blind_out),
        ]) == 0

        map_png = tmp_path / "est_map.png"
        assert main([
            "estimate", str(input_png), "--weights", str(est_weights),
            "--out-map", str(map_png),
        ]) == 0
        piped_out = tmp_path / "piped.png"
        assert main([
            "restore", str(input_png), "--res-weights", str(res),
            "--map", str(map_png), "--out", str(piped_out),
        ]) == 0
        assert blind_out.read_bytes() == piped_out.read_bytes()

    def test_multiple_sources_usage_error(self, tmp_path, input_png, est_weights, zero_res_weights):
        code = main([
            "restore", str(input_png), "--res-weights", str(zero_res_weights),
            "--est-weights", str(est_weights), "--sigma", "1.0",
            "--out", str(tmp_path / "x.png"),
        ])
        assert code == 2

    def test_no_source_usage_error(self, tmp_path, input_png, zero_res_weights):
        code = main([
            "restore", str(input_png), "--res-weights", str(zero_res_weights),
            "--out", str(tmp_path / "x.png"),
        ])
        assert code == 2

    def test_explicit_flags_and_reference_psnr(self, tmp_path, input_png, zero_res_weights, capsys):
        out = tmp_path / "restored.png"
        code = main([
            "restore", str(input_png), "--res-weights", str(zero_res_weights),
            "--sigma", "1.0", "--lambda", "20", "--quality", "50",
            "--out", str(out), "--reference", str(input_png),
        ])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["psnr"] > 40  # zero restorer: output is the input image

    def test_input_files_not_mutated(self, tmp_path, input_png, zero_res_weights):
        before = input_png.read_bytes()
        main([
            "restore", str(input_png), "--res-weights", str(zero_res_weights),
            "--sigma", "1.0", "--out", str(tmp_path / "x.png"),
        ])
        assert input_png.read_bytes() == before


class TestEntryPoint:
    def test_module_invocation(self, tmp_path, rng):
        img = random_image(rng, 8, 8)
        src = tmp_path / "in.png"
        save_image(img, src)
        out = tmp_path / "out.png"
        proc = subprocess.run(
            [sys.executable, "-m", "compdeg", "degrade", str(src), str(out), "--no-jpeg"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert out.exists()
        json.loads(proc.stdout)
