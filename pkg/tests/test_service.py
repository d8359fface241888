"""Service ops, the FastAPI wrapper, and the CLI front end."""

import json
import os
import socket
import threading
import time

import pytest
from fastapi.testclient import TestClient

from autoprune.cli import main
from autoprune.harness import dp_oracle, make_evaluator, parse_config
from autoprune.service import create_app, ops

QUICK_CONFIG = """\
evaluator = proxy
network = proxy5
proxy_seed = 11
constraint = flops_budget
alpha = 0.5
episodes = 20
warmup_episodes = 5
hidden_sizes = 16,16
batch_size = 16
seed = 3
"""

PRETRAIN_CONFIG = "pretrain_epochs = 1\ndataset_seed = 7\npretrain_seed = 1\n"


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


# ---------------------------------------------------------------------------
# ops


def test_flops_op_layers_and_total():
    d = ops.flops_op("vgg19")
    assert d["total"] == 19632062464
    assert d["layers"][0]["t"] == 1
    assert sum(l["flops"] for l in d["layers"]) == d["total"]


def test_search_op_quick(tmp_path):
    out = str(tmp_path / "run")
    d = ops.search_op(QUICK_CONFIG, out_dir=out)
    assert d["completed"] and d["episodes_run"] == 20
    assert d["best"]["flops_fraction"] <= 0.5 * (1 + 1e-9)
    assert len(d["protocol"]) == 12
    assert os.path.exists(os.path.join(out, "episodes.log"))


def test_baseline_op_all_policies():
    d = ops.baseline_op(QUICK_CONFIG, "all")
    assert [p["name"] for p in d["plans"]] == [
        "uniform", "shallow_aggressive", "deep_aggressive"]
    d1 = ops.baseline_op(QUICK_CONFIG, "uniform")
    assert d1["plans"] == d["plans"][:1]


def test_random_op_writes_trace(tmp_path):
    out = str(tmp_path / "rand")
    d = ops.random_op(QUICK_CONFIG, out_dir=out)
    assert d["episodes"] == 20
    lines = open(os.path.join(out, "random.csv")).read().splitlines()
    assert lines[0] == "episode,reward,error,flops_fraction,best_reward"
    assert len(lines) == 21
    assert d["best"]["reward"] == max(
        float(row.split(",")[1]) for row in lines[1:])


def test_oracle_op_matches_dp():
    d = ops.oracle_op(QUICK_CONFIG)
    ev = make_evaluator(parse_config(QUICK_CONFIG))
    want = dp_oracle(ev.model, 0.5)
    assert tuple(d["ratios"]) == want.ratios
    assert d["error"] == want.error


def test_oracle_op_needs_proxy():
    with pytest.raises(Exception):
        ops.oracle_op("evaluator = tinycnn\nconstraint = flops_budget\nalpha = 0.5\n")


def test_pretrain_op_short_run(tmp_path):
    stem = str(tmp_path / "ck" / "net")
    d = ops.pretrain_op(PRETRAIN_CONFIG, out_stem=stem)
    assert 0.0 <= d["accuracy"] <= 1.0
    assert d["epochs"] == 1
    assert os.path.exists(stem + ".manifest")


def test_report_op_round_trip(tmp_path):
    out = str(tmp_path / "run")
    ops.search_op(QUICK_CONFIG, out_dir=out)
    text = ops.report_op(out)["text"]
    assert "policy comparison" in text


# ---------------------------------------------------------------------------
# http wrapper


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_http_flops_and_validation(client):
    r = client.post("/flops", json={"network": "plain34"})
    assert r.status_code == 200
    assert r.json()["total"] == 3644493824
    r = client.post("/flops", json={"network": "nosuch"})
    assert r.status_code == 400
    assert "nosuch" in r.json()["detail"]


def test_http_bad_config_is_400(client):
    r = client.post("/search", json={"config": "bogus_key = 1"})
    assert r.status_code == 400
    assert "bogus_key" in r.json()["detail"]


def test_http_search_report_round_trip(client, tmp_path):
    out = str(tmp_path / "run")
    r = client.post("/search", json={"config": QUICK_CONFIG, "out_dir": out})
    assert r.status_code == 200
    body = r.json()
    assert body["completed"]
    r2 = client.post("/report", json={"run_dir": out})
    assert r2.status_code == 200
    assert "learned," in r2.json()["text"]


def test_http_baseline_and_oracle(client):
    r = client.post("/baseline", json={"config": QUICK_CONFIG})
    assert r.status_code == 200
    assert len(r.json()["plans"]) == 3
    r = client.post("/oracle", json={"config": QUICK_CONFIG})
    assert r.status_code == 200
    assert r.json()["flops_fraction"] <= 0.5 * (1 + 1e-9)


# ---------------------------------------------------------------------------
# cli


def test_cli_flops(capsys):
    assert main(["flops", "vgg19"]) == 0
    out = capsys.readouterr().out
    assert out.strip().splitlines()[-1] == "total 19632062464"


def test_cli_flops_missing_network(capsys):
    assert main(["flops", "nosuch"]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_search_then_report(tmp_path, capsys):
    cfg = tmp_path / "quick.cfg"
    cfg.write_text(QUICK_CONFIG)
    out = str(tmp_path / "run")
    assert main(["search", str(cfg), "--out", out]) == 0
    stdout = capsys.readouterr().out
    assert "best episode=" in stdout
    assert main(["report", out]) == 0
    assert "policy comparison" in capsys.readouterr().out


def test_cli_search_byte_identical_logs(tmp_path, capsys):
    cfg = tmp_path / "quick.cfg"
    cfg.write_text(QUICK_CONFIG)
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["search", str(cfg), "--out", a]) == 0
    assert main(["search", str(cfg), "--out", b]) == 0
    capsys.readouterr()
    assert (open(os.path.join(a, "episodes.log"), "rb").read()
            == open(os.path.join(b, "episodes.log"), "rb").read())


def test_cli_baseline_oracle_random(tmp_path, capsys):
    cfg = tmp_path / "quick.cfg"
    cfg.write_text(QUICK_CONFIG)
    assert main(["baseline", str(cfg), "--policy", "uniform"]) == 0
    assert "uniform," in capsys.readouterr().out
    assert main(["oracle", str(cfg)]) == 0
    assert "oracle," in capsys.readouterr().out
    assert main(["random", str(cfg)]) == 0
    assert "random," in capsys.readouterr().out


def test_cli_report_empty_dir(tmp_path, capsys):
    assert main(["report", str(tmp_path)]) == 1
    assert "not a finished run" in capsys.readouterr().err


def test_cli_bundled_config_resolves(capsys):
    assert main(["oracle", "proxy5"]) == 0
    assert "oracle," in capsys.readouterr().out


# ---------------------------------------------------------------------------
# cli against a live server


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="module")
def server_url():
    import uvicorn

    port = _free_port()
    config = uvicorn.Config(create_app(), host="127.0.0.1", port=port,
                            log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_cli_thin_client_matches_local(server_url, tmp_path, capsys):
    assert main(["--server", server_url, "flops", "vgg19"]) == 0
    remote = capsys.readouterr().out
    assert main(["flops", "vgg19"]) == 0
    assert remote == capsys.readouterr().out

    cfg = tmp_path / "quick.cfg"
    cfg.write_text(QUICK_CONFIG)
    out = str(tmp_path / "run")
    assert main(["--server", server_url, "search", str(cfg), "--out", out]) == 0
    capsys.readouterr()
    assert os.path.exists(os.path.join(out, "episodes.log"))
    assert main(["--server", server_url, "report", out]) == 0
    assert "policy comparison" in capsys.readouterr().out


def test_cli_thin_client_error_path(server_url, capsys):
    assert main(["--server", server_url, "flops", "nosuch"]) == 1
    err = capsys.readouterr().err
    assert "400" in err and "nosuch" in err
