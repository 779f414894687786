import json
import math
import re

import pytest

import dimasr


def test_va_round_trip():
    assert dimasr.parse_va("7.00#6.50") == (7.0, 6.5)
    assert dimasr.format_va(7.0, 6.5) == "7.00#6.50"
    with pytest.raises(dimasr.DimasrError, match="7;6"):
        dimasr.parse_va("7;6")


def test_rmse_and_bound():
    assert dimasr.rmse_va([(6, 5)], [(5, 6)]) == math.sqrt(2)
    assert dimasr.rmse_va([(6, 5), (5, 7)], [(5, 5), (5, 5)]) == math.sqrt(2.5)
    assert dimasr.bound(0.0) == 5.0
    assert 1.0 < dimasr.bound(-50.0) < dimasr.bound(50.0) < 9.0
    with pytest.raises(dimasr.DimasrError):
        dimasr.rmse_va([], [])


def test_official_pairs():
    pairs = dimasr.official_pairs()
    assert len(pairs) == 10
    assert pairs[0] == "eng-res"


def _pipeline(tmp_path, pairs, grid=None):
    dimasr.write_synthetic_dataset(tmp_path / "raw", pairs, records=30, seed=7)
    report = dimasr.preprocess(tmp_path / "raw", tmp_path / "data")
    ckpts = dimasr.train(tmp_path / "data", tmp_path / "ckpt", config=grid, threads=2)
    dimasr.predict(tmp_path / "ckpt", tmp_path / "data", tmp_path / "preds")
    out = dimasr.ensemble(tmp_path / "preds", tmp_path / "data", tmp_path / "ens")
    return report, ckpts, out


def test_full_pipeline(tmp_path):
    pairs = ["eng-res", "zho-lap"]
    report, ckpts, out = _pipeline(tmp_path, pairs)
    assert set(report["files"]) == {f"{p}_{s}" for p in pairs for s in ("train", "dev", "test")}
    assert sorted(p.name for p in ckpts if p.suffix == ".ckpt") == [f"M{k}.ckpt" for k in range(1, 8)]

    ev = dimasr.evaluate(tmp_path / "preds" / "M1", tmp_path / "data")
    assert set(ev["pairs"]) == set(pairs)
    assert ev["average"] == pytest.approx(sum(v["rmse_va"] for v in ev["pairs"].values()) / 2)

    sel = out["selection"]
    assert out["test_report"] is not None
    for p in pairs:
        assert len(sel["pairs"][p]["members"]) >= 2
    line = (tmp_path / "ens" / "submission" / "pred_eng-res.jsonl").read_text().splitlines()[0]
    assert re.fullmatch(r"[0-9]+\.[0-9]{2}#[0-9]+\.[0-9]{2}", json.loads(line)["VA"])


def test_python_backend_plugs_in(tmp_path):
    calls = []

    def backend(batch, hidden):
        calls.append(len(batch))
        return [[(len(a) + i * len(t)) % 7 / 7.0 - 0.5 for i in range(hidden)] for a, t in batch]

    dimasr.register_pretrained_backend("py-stub", backend)
    try:
        grid = tmp_path / "grid.json"
        grid.write_text(json.dumps({"encoder": {"backend": "pretrained", "pretrained_name": "py-stub",
                                                "hidden_size": 12, "trainable_layer": False}}))
        _, ckpts, out = _pipeline(tmp_path, ["eng-res"], grid)
        assert sorted(p.name for p in ckpts if p.suffix == ".ckpt") == [f"M{k}.ckpt" for k in range(1, 8)]
        assert calls
        assert (tmp_path / "ens" / "submission" / "pred_eng-res.jsonl").exists()
    finally:
        dimasr.unregister_pretrained_backend("py-stub")
    assert not dimasr.has_pretrained_backend("py-stub")


def test_backend_errors_surface(tmp_path):
    dimasr.register_pretrained_backend("short", lambda batch, hidden: [[0.0] for _ in batch])
    try:
        grid = tmp_path / "grid.json"
        grid.write_text(json.dumps({"encoder": {"backend": "pretrained", "pretrained_name": "short",
                                                "hidden_size": 12}}))
        with pytest.raises(dimasr.DimasrError):
            _pipeline(tmp_path, ["eng-res"], grid)
    finally:
        dimasr.unregister_pretrained_backend("short")
