"""Command line front end; runs in process by default, or against a service.

Config files are read locally; with --server their text is posted to a
running service and the responses are rendered exactly as the in-process
path would print them.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import AutopruneError
from .service import ops


def _render_plan_row(p: dict) -> str:
    ratios = " ".join(f"{a:.4f}" for a in p["ratios"])
    return (f"{p['name']},{p['error']:.6f},{p['flops_fraction']:.6f},"
            f"{p['reward']:.6f},{ratios}")


PLAN_HEADER = "policy,error,flops_fraction,reward,ratios"


def _cmd_flops(args, call):
    d = call("/flops", network=args.network)
    lines = [f"t={l['t']} {l['kind']} n={l['n']} c={l['c']} flops={l['flops']}"
             for l in d["layers"]]
    lines.append(f"total {d['total']}")
    return "\n".join(lines)


def _cmd_search(args, call):
    config = _read(args.config)
    d = call("/search", config=config, out_dir=args.out, stop_after=args.stop_after)
    lines = [f"protocol {d['protocol']}",
             f"episodes {d['episodes_run']} completed {int(d['completed'])}"]
    if d["best"] is None:
        lines.append("best none")
    else:
        b = d["best"]
        lines.append(f"best episode={b['episode']} error={b['error']:.6f} "
                     f"flops_fraction={b['flops_fraction']:.6f} reward={b['reward']:.6f}")
        lines.append("ratios " + " ".join(f"{a:.4f}" for a in b["ratios"]))
    if d.get("finetuned_error") is not None:
        lines.append(f"finetuned_error {d['finetuned_error']:.6f}")
    if d.get("out_dir"):
        lines.append(f"out_dir {d['out_dir']}")
    return "\n".join(lines)


def _cmd_baseline(args, call):
    d = call("/baseline", config=_read(args.config), policy=args.policy)
    return "\n".join([f"protocol {d['protocol']}", PLAN_HEADER]
                     + [_render_plan_row(p) for p in d["plans"]])


def _cmd_random(args, call):
    d = call("/random", config=_read(args.config), out_dir=args.out)
    lines = [f"protocol {d['protocol']}", f"episodes {d['episodes']}",
             PLAN_HEADER, _render_plan_row(d["best"])]
    if d.get("out_dir"):
        lines.append(f"out_dir {d['out_dir']}")
    return "\n".join(lines)


def _cmd_oracle(args, call):
    d = call("/oracle", config=_read(args.config))
    row = {"name": "oracle", "ratios": d["ratios"], "error": d["error"],
           "flops_fraction": d["flops_fraction"], "reward": d["reward"]}
    return "\n".join([f"protocol {d['protocol']}", PLAN_HEADER,
                      _render_plan_row(row)])


def _cmd_pretrain(args, call):
    config = _read(args.config) if args.config else ""
    d = call("/pretrain", config=config, out_stem=args.out)
    lines = [f"epochs {d['epochs']}", f"accuracy {d['accuracy']:.4f}"]
    if d.get("out_stem"):
        lines.append(f"saved {d['out_stem']}")
    return "\n".join(lines)


def _cmd_report(args, call):
    return call("/report", run_dir=args.run_dir)["text"].rstrip("\n")


def _cmd_serve(args, call):
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return ""


_LOCAL = {
    "/flops": lambda **kw: ops.flops_op(kw["network"]),
    "/search": lambda **kw: ops.search_op(kw["config"], kw["out_dir"], kw["stop_after"]),
    "/baseline": lambda **kw: ops.baseline_op(kw["config"], kw["policy"]),
    "/random": lambda **kw: ops.random_op(kw["config"], kw["out_dir"]),
    "/oracle": lambda **kw: ops.oracle_op(kw["config"]),
    "/pretrain": lambda **kw: ops.pretrain_op(kw["config"], kw["out_stem"]),
    "/report": lambda **kw: ops.report_op(kw["run_dir"]),
}


def _read(path: str) -> str:
    from .harness import resolve_config_path

    with open(resolve_config_path(path), "r", encoding="utf-8") as fh:
        return fh.read()


def _make_caller(server: str | None):
    if server is None:
        return lambda endpoint, **kw: _LOCAL[endpoint](**kw)

    def call(endpoint, **kw):
        import httpx

        resp = httpx.post(server.rstrip("/") + endpoint, json=kw, timeout=None)
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise AutopruneError(f"service returned {resp.status_code}: {detail}")
        return resp.json()

    return call


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autoprune",
        description="Layer-walk channel pruning under a FLOPs budget")
    parser.add_argument("--server", metavar="URL",
                        help="send commands to a running service instead of "
                             "executing in process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flops", help="count multiply-accumulates of a network")
    p.add_argument("network", help="bundled name (vgg19, plain34, proxy5, "
                                   "tinycnn) or a .net file path")
    p.set_defaults(fn=_cmd_flops)

    p = sub.add_parser("search", help="run the configured layer-walk search")
    p.add_argument("config", help="key = value config file")
    p.add_argument("--out", help="run directory (overrides out_dir in the config)")
    p.add_argument("--stop-after", type=int, metavar="N",
                   help="stop after N more episodes (resume later from the "
                        "checkpoint)")
    p.set_defaults(fn=_cmd_search)

    p = sub.add_parser("baseline", help="handcrafted plans at the config's budget")
    p.add_argument("config")
    p.add_argument("--policy", default="all",
                   choices=["uniform", "shallow_aggressive", "deep_aggressive", "all"])
    p.set_defaults(fn=_cmd_baseline)

    p = sub.add_parser("random", help="random ratio search under the config's "
                                      "constraint")
    p.add_argument("config")
    p.add_argument("--out", help="directory for the trace CSV")
    p.set_defaults(fn=_cmd_random)

    p = sub.add_parser("oracle", help="exact grid optimum for a proxy config")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_oracle)

    p = sub.add_parser("pretrain", help="pretrain the tiny CNN and report "
                                        "validation accuracy")
    p.add_argument("--config", help="config file (defaults apply without one)")
    p.add_argument("--out", metavar="STEM", help="checkpoint stem to save to")
    p.set_defaults(fn=_cmd_pretrain)

    p = sub.add_parser("report", help="compare a finished run against baselines")
    p.add_argument("run_dir")
    p.set_defaults(fn=_cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    call = _make_caller(args.server)
    try:
        out = args.fn(args, call)
        if out:
            print(out)
        sys.stdout.flush()
    except BrokenPipeError:
        # reader (e.g. head) closed the pipe; suppress the shutdown flush too
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except (AutopruneError, FileNotFoundError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
