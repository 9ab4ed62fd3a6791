"""Command-line client for the pipeline service.

Every data command builds a request model and sends it through the HTTP
service layer: against a remote server when --server (or OPKERNEL_SERVER) is
given, otherwise against an in-process instance of the app, so no running
server is required and all outputs land on the local filesystem. Each run
writes its resolved request as run_config.json beside its outputs; `--config
run_config.json` replays a run bit for bit.

Exit codes: 0 success, 1 input error, 2 numeric/budget error. Errors are
printed to stderr as single lines prefixed `error:`.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path

import httpx
from pydantic import ValidationError

from .errors import ComputeError, InputError
from .service.schemas import (
    AttributeKernelModel,
    EvalRequest,
    GenRequest,
    GramRequest,
    KernelConfigModel,
    MineRequest,
    PlantSpecModel,
    RobustRequest,
)

DEFAULT_PLANT_A = "0,1,2,3:0.8"
DEFAULT_PLANT_B = "4,5,6,7:0.8"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _env_workers() -> int:
    raw = os.environ.get("OPKERNEL_WORKERS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"OPKERNEL_WORKERS must be an integer, got {raw!r}") from None
    if value < 1:
        raise InputError(f"OPKERNEL_WORKERS must be >= 1, got {value}")
    return value


def _parse_plant(text: str) -> PlantSpecModel:
    body, _, strength = text.partition(":")
    try:
        nodes = [int(x) for x in body.split(",") if x.strip() != ""]
        value = float(strength) if strength else 0.8
    except ValueError:
        raise InputError(f"plant must look like '0,1,2,3:0.8', got {text!r}") from None
    if not nodes:
        raise InputError(f"plant must name at least one node, got {text!r}")
    return PlantSpecModel(nodes=nodes, strength=value)


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise InputError(f"{what} must be a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise InputError(f"{what} must not be empty")
    return values


def _kernel_config(args) -> KernelConfigModel:
    return KernelConfigModel(
        lam=getattr(args, "lam", 1.0),
        match_mode=args.mode,
        node_kernel=AttributeKernelModel(kind=args.node_kernel, gamma=args.rbf_gamma),
        edge_kernel=AttributeKernelModel(kind=args.edge_kernel, gamma=args.rbf_gamma),
        normalize=args.normalize,
    )


def _add_kernel_flags(sub, with_lam: bool = True):
    if with_lam:
        sub.add_argument("--lam", type=float, default=1.0, help="uniform sub-structure weight")
    sub.add_argument(
        "--mode", choices=("positional", "structural"), default="positional", help="match mode"
    )
    sub.add_argument(
        "--node-kernel",
        choices=("constant_one", "linear", "rbf", "delta"),
        default="constant_one",
    )
    sub.add_argument(
        "--edge-kernel",
        choices=("constant_one", "linear", "rbf", "delta"),
        default="constant_one",
    )
    sub.add_argument("--rbf-gamma", type=float, default=1.0)
    sub.add_argument("--normalize", action="store_true", help="unit-diagonal cosine normalization")


def _add_grid_flags(sub):
    sub.add_argument("--lambda-grid", default="0.01,0.1,1,10,100")
    sub.add_argument("--c-grid", default="0.001,0.01,0.1,1,10,100,1000")
    sub.add_argument(
        "--paper-literal-tuning",
        action="store_true",
        help="select hyperparameters on the outer folds instead of nested selection",
    )


def _add_common(sub):
    sub.add_argument("--server", default=os.environ.get("OPKERNEL_SERVER"), help="remote service URL")
    sub.add_argument("--config", default=None, help="replay a run from its run_config.json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opkernel", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="generate a synthetic two-class dataset")
    gen.add_argument("--out", required=False, help="output directory")
    gen.add_argument("--classes", type=int, default=40, help="graphs per class")
    gen.add_argument("--nodes", type=int, default=20)
    gen.add_argument("--timepoints", type=int, default=100)
    gen.add_argument("--seed", type=int, default=7)
    gen.add_argument("--plant-a", default=DEFAULT_PLANT_A, help="class +1 plant, 'n0,n1,...:strength'")
    gen.add_argument("--plant-b", default=DEFAULT_PLANT_B, help="class -1 plant")
    _add_common(gen)

    gram = commands.add_parser("gram", help="compute and export a Gram matrix")
    gram.add_argument("--manifest", required=False)
    gram.add_argument("--out", required=False)
    _add_kernel_flags(gram)
    gram.add_argument("--exact", action="store_true", help="enumeration-based exact kernel")
    gram.add_argument("--depth-cap", type=int, default=8)
    gram.add_argument("--budget", type=int, default=10**6)
    gram.add_argument("--workers", type=int, default=None)
    _add_common(gram)

    ev = commands.add_parser("eval", help="leave-one-out classification")
    ev.add_argument("--manifest", required=False)
    ev.add_argument("--out", required=False)
    _add_kernel_flags(ev, with_lam=False)
    _add_grid_flags(ev)
    ev.add_argument("--workers", type=int, default=None)
    _add_common(ev)

    rb = commands.add_parser("robust", help="missing-data robustness table")
    rb.add_argument("--manifest", required=False)
    rb.add_argument("--out", required=False)
    _add_kernel_flags(rb, with_lam=False)
    _add_grid_flags(rb)
    rb.add_argument("--rates", default="0.25", help="comma-separated missing rates")
    rb.add_argument("--seeds", type=int, default=3, help="perturbation seeds per rate")
    rb.add_argument("--seed", type=int, default=0, help="base perturbation seed")
    rb.add_argument("--workers", type=int, default=None)
    _add_common(rb)

    mine = commands.add_parser("mine", help="discriminative pattern prefixes")
    mine.add_argument("--manifest", required=False)
    mine.add_argument("--out", required=False)
    mine.add_argument("--start-node", type=int, default=0)
    mine.add_argument("--top-k", type=int, default=6)
    _add_common(mine)

    serve = commands.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    return parser


def _require(args, names: list[str]) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise InputError(f"missing required flags: {', '.join('--' + n for n in missing)}")


def _workers(args) -> int:
    return args.workers if args.workers is not None else _env_workers()


def _build_request(args):
    model_by_command = {
        "gen": GenRequest,
        "gram": GramRequest,
        "eval": EvalRequest,
        "robust": RobustRequest,
        "mine": MineRequest,
    }
    model = model_by_command[args.command]
    if args.config is not None:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise InputError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.config}: invalid JSON ({exc})") from None
        if doc.get("command") != args.command:
            raise InputError(
                f"config is for command {doc.get('command')!r}, not {args.command!r}"
            )
        return model.model_validate(doc)

    if args.command == "gen":
        _require(args, ["out"])
        return GenRequest(
            out_dir=args.out,
            n_per_class=args.classes,
            n_nodes=args.nodes,
            n_timepoints=args.timepoints,
            seed=args.seed,
            plant_a=_parse_plant(args.plant_a),
            plant_b=_parse_plant(args.plant_b),
        )
    if args.command == "gram":
        _require(args, ["manifest", "out"])
        return GramRequest(
            manifest=args.manifest,
            out_dir=args.out,
            config=_kernel_config(args),
            exact=args.exact,
            depth_cap=args.depth_cap,
            budget=args.budget,
            workers=_workers(args),
        )
    if args.command == "eval":
        _require(args, ["manifest", "out"])
        return EvalRequest(
            manifest=args.manifest,
            out_dir=args.out,
            config=_kernel_config(args),
            lambda_grid=_parse_floats(args.lambda_grid, "--lambda-grid"),
            c_grid=_parse_floats(args.c_grid, "--c-grid"),
            nested=not args.paper_literal_tuning,
            workers=_workers(args),
        )
    if args.command == "robust":
        _require(args, ["manifest", "out"])
        return RobustRequest(
            manifest=args.manifest,
            out_dir=args.out,
            config=_kernel_config(args),
            lambda_grid=_parse_floats(args.lambda_grid, "--lambda-grid"),
            c_grid=_parse_floats(args.c_grid, "--c-grid"),
            nested=not args.paper_literal_tuning,
            rates=_parse_floats(args.rates, "--rates"),
            n_seeds=args.seeds,
            seed=args.seed,
            workers=_workers(args),
        )
    _require(args, ["manifest", "out"])
    return MineRequest(
        manifest=args.manifest,
        out_dir=args.out,
        start_node=args.start_node,
        top_k=args.top_k,
    )


def _dispatch(route: str, request_model, server: str | None) -> dict:
    payload = request_model.model_dump(mode="json")

    async def go():
        if server:
            client = httpx.AsyncClient(base_url=server.rstrip("/"), timeout=None)
        else:
            from .service.app import create_app

            transport = httpx.ASGITransport(app=create_app())
            client = httpx.AsyncClient(
                transport=transport, base_url="http://opkernel.local", timeout=None
            )
        async with client:
            resp = await client.post(route, json=payload)
        return resp.status_code, resp.json()

    try:
        status, body = asyncio.run(go())
    except httpx.HTTPError as exc:
        raise ComputeError(f"service request failed: {exc}") from None
    if status == 200:
        return body
    detail = body.get("detail") if isinstance(body, dict) else None
    if isinstance(detail, dict) and "message" in detail:
        kind, message = detail.get("kind", "numeric"), detail["message"]
    else:
        kind, message = "numeric", f"service returned status {status}: {body}"
    if kind == "input":
        raise InputError(message)
    raise ComputeError(message)


def _cmd_gen(args) -> int:
    body = _dispatch("/gen", _build_request(args), args.server)
    print(f"wrote {body['n_graphs']} graphs")
    print(f"manifest: {body['manifest']}")
    print(f"run_config: {body['run_config']}")
    return 0


def _cmd_gram(args) -> int:
    body = _dispatch("/gram", _build_request(args), args.server)
    psd = "true" if body["psd"] else "false"
    print(f"min_eig={body['min_eig']:.17g} max_eig={body['max_eig']:.17g} psd={psd}")
    print(f"gram: {body['gram_path']}")
    print(f"libsvm: {body['libsvm_path']}")
    print(f"samples: {body['sidecar_path']}")
    print(f"run_config: {body['run_config']}")
    return 0


def _cmd_eval(args) -> int:
    body = _dispatch("/eval", _build_request(args), args.server)
    print(
        f"accuracy={body['accuracy']:.6g} best_lambda={body['best_lambda']:g} "
        f"best_c={body['best_c']:g} folds={body['n_folds']}"
    )
    print(f"report: {body['report_path']}")
    print(f"run_config: {body['run_config']}")
    return 0


def _cmd_robust(args) -> int:
    body = _dispatch("/robust", _build_request(args), args.server)
    for row in body["rows"]:
        seed = "-" if row["seed"] is None else row["seed"]
        print(
            f"{row['run']:<9} rate={row['rate']:<5g} seed={seed:<6} "
            f"accuracy={row['accuracy']:.6g}"
        )
    print(f"table: {body['csv_path']}")
    print(f"run_config: {body['run_config']}")
    return 0


def _cmd_mine(args) -> int:
    body = _dispatch("/mine", _build_request(args), args.server)
    for rank, pattern in enumerate(body["top"], start=1):
        chain = " > ".join(pattern["labels"])
        print(f"{rank}. {chain}  score={pattern['score']:.4f}")
    print(f"report: {body['json_path']}")
    print(f"profiles: {body['profiles_path']}")
    print(f"run_config: {body['run_config']}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("opkernel.service.app:app", host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "gen": _cmd_gen,
            "gram": _cmd_gram,
            "eval": _cmd_eval,
            "robust": _cmd_robust,
            "mine": _cmd_mine,
            "serve": _cmd_serve,
        }[args.command]
        return handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(x) for x in first.get("loc", ()))
        print(f"error: invalid {loc}: {first.get('msg')}", file=sys.stderr)
        return 1
    except ComputeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
