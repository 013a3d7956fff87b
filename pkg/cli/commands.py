"""Command line front end.

Every subcommand reads a polygon as JSON (``{"vertices": [[x, y], ...]}``)
from a file or from stdin when the path is ``-``, prints JSON (or CSV for
traces) on stdout with floats at 17 significant digits, and reports failures
as a single JSON line on stderr with the exit code of the error class.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import ValidationError

from agents.optimizer_agent import TRACE_COLUMNS, EnergyOptimizer, OptimizerOptions
from agents.symmetrization_agent import (SymmetrizationAgent, quadrilateral_recursion,
                                         triangle_recursion)
from config.settings import Settings, get_settings
from models.energy import EnergyEvaluator
from models.kernel import Kernel
from models.polygon import Polygon
from models.potential import PotentialEvaluator
from models.schemas import (FlowSpecPayload, PolygonPayload, QuadratureSpec, RegularizedRieszPayload,
                            RieszPayload)
from models.stationarity import StationarityAnalyzer
from models.variation import DEFAULT_FD_STEP, VariationAnalyzer
from storage.result_store import ResultStore
from storage.trace_writer import write_csv
from utils.errors import InvalidArgumentError, PolyRieszError, UsageError
from utils.formatting import dumps
from utils.parallel import ChunkedExecutor

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _point(text: str) -> List[float]:
    try:
        x, y = (float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got '{text}'")
    return [x, y]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--kernel", choices=["riesz", "regularized_riesz"], default="riesz")
    common.add_argument("--alpha", type=float, default=1.0, help="Riesz exponent in (0, 2)")
    common.add_argument("--delta", type=float, help="shift of the regularized kernel")
    common.add_argument("--quad-tol", type=float, help="relative quadrature tolerance")
    common.add_argument("--out", choices=["json", "csv"], default="json")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("--archive", action="store_true", help="store the result in the archive")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = _Parser(prog="polyriesz", description="Nonlocal interaction energies of polygons")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("energy", parents=[common], help="E(P) with error bound")
    p.add_argument("polygon", help="polygon JSON file, '-' for stdin")

    p = sub.add_parser("potential", parents=[common], help="v_P at points")
    p.add_argument("polygon")
    p.add_argument("--at", type=_point, action="append", required=True, metavar="X,Y")

    p = sub.add_parser("stationarity", parents=[common], help="stationarity residuals and verdict")
    p.add_argument("polygon")
    p.add_argument("--constraint", choices=["area", "perimeter"], default="area")
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("variation", parents=[common], help="analytic against finite-difference first variation")
    p.add_argument("polygon")
    p.add_argument("--flow", required=True, help="flow JSON, inline or a file path")
    p.add_argument("--fd-step", type=float, default=DEFAULT_FD_STEP)

    p = sub.add_parser("symmetrize", parents=[common], help="Steiner symmetrization chain")
    p.add_argument("polygon")
    p.add_argument("--steps", type=int, default=10)

    p = sub.add_parser("polya-szego", parents=[common], help="scalar symmetrization recursions")
    p.add_argument("--shape", choices=["triangle", "quad"], required=True)
    p.add_argument("--a0", type=float, required=True)
    p.add_argument("--steps", type=int, default=100)

    p = sub.add_parser("optimize", parents=[common], help="area-constrained energy maximization")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--area", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--init", help="initial polygon JSON file instead of a random one")
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--trace", help="also write the iteration trace CSV to this path")

    p = sub.add_parser("serve", parents=[common], help="run the HTTP API")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    return parser


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InvalidArgumentError(f"Cannot read '{path}': {e.strerror}", path=path)


def load_polygon(path: str) -> Polygon:
    data = json.loads(_read_text(path))
    if isinstance(data, list):
        data = {"vertices": data}
    return PolygonPayload(**data).build()


def build_kernel(args: argparse.Namespace) -> Kernel:
    if args.kernel == "regularized_riesz":
        if args.delta is None:
            raise InvalidArgumentError("--kernel regularized_riesz needs --delta")
        return RegularizedRieszPayload(alpha=args.alpha, delta=args.delta).build()
    return RieszPayload(alpha=args.alpha).build()


class CommandContext:
    """Settings, kernel, quadrature and executor shared by one invocation."""

    def __init__(self, args: argparse.Namespace, settings: Settings):
        self.args = args
        self.settings = settings
        self.spec = QuadratureSpec.from_defaults(settings.quadrature, tolerance=args.quad_tol)
        threads = args.threads if args.threads is not None else settings.execution.threads
        self.executor = ChunkedExecutor(threads, settings.execution.chunk_size)
        self._kernel: Optional[Kernel] = None

    @property
    def kernel(self) -> Kernel:
        if self._kernel is None:
            self._kernel = build_kernel(self.args)
        return self._kernel

    def request(self, **extra: Any) -> Dict[str, Any]:
        args = self.args
        payload = {"kernel": args.kernel, "alpha": args.alpha, "delta": args.delta,
                   "quad_tol": self.spec.tolerance}
        payload.update(extra)
        return payload

    def archive(self, kind: str, request: Dict[str, Any], result: Dict[str, Any]) -> Dict[str, Any]:
        if self.args.archive or self.settings.storage.archive:
            store = ResultStore(self.settings.storage.results_path)
            result = dict(result, result_hash=store.store(kind, request, result))
        return result


def _emit(args: argparse.Namespace, result: Any, rows: Optional[List[Dict[str, Any]]] = None,
          columns: Optional[Sequence[str]] = None) -> None:
    if args.out == "csv" and rows is not None:
        sys.stdout.write(write_csv(rows, columns))
    else:
        sys.stdout.write(dumps(result) + "\n")


def cmd_energy(ctx: CommandContext) -> None:
    polygon = load_polygon(ctx.args.polygon)
    result = EnergyEvaluator(polygon, ctx.kernel, ctx.spec, ctx.executor).compute().model_dump()
    request = ctx.request(vertices=polygon.vertices.tolist())
    _emit(ctx.args, ctx.archive("energy", request, result))


def cmd_potential(ctx: CommandContext) -> None:
    polygon = load_polygon(ctx.args.polygon)
    evaluator = PotentialEvaluator(polygon, ctx.kernel, ctx.spec, ctx.executor)
    rows = []
    for point in ctx.args.at:
        value, error = evaluator.estimate(point)
        rows.append({"x": point[0], "y": point[1], "value": value, "error": error})
    request = ctx.request(vertices=polygon.vertices.tolist(), points=ctx.args.at)
    _emit(ctx.args, ctx.archive("potential", request, {"values": rows}), rows)


def cmd_stationarity(ctx: CommandContext) -> None:
    args = ctx.args
    polygon = load_polygon(args.polygon)
    report = StationarityAnalyzer(polygon, ctx.kernel, ctx.spec, ctx.executor).report(args.constraint, args.tol)
    result = report.model_dump()
    rows = [{key: value for key, value in side.items() if key != "errors"} for side in result["sides"]]
    request = ctx.request(vertices=polygon.vertices.tolist(), constraint=args.constraint, tolerance=args.tol)
    _emit(args, ctx.archive("stationarity", request, result), rows)


def cmd_variation(ctx: CommandContext) -> None:
    args = ctx.args
    polygon = load_polygon(args.polygon)
    text = args.flow if args.flow.lstrip().startswith("{") else _read_text(args.flow)
    flow = FlowSpecPayload(**json.loads(text)).build(polygon)
    comparison = VariationAnalyzer(polygon, ctx.kernel, ctx.spec, ctx.executor).compare(flow, args.fd_step)
    row = {
        **{f"flow_{key}": value for key, value in comparison["flow"].items()},
        "fd_step": args.fd_step,
        "analytic": comparison["analytic"]["value"],
        "analytic_err": comparison["analytic"]["error"],
        "fd": comparison["finite_difference"]["value"],
        "fd_err": comparison["finite_difference"]["error"],
        "abs_difference": comparison["abs_difference"],
    }
    request = ctx.request(vertices=polygon.vertices.tolist(), flow=flow.describe(), fd_step=args.fd_step)
    _emit(args, ctx.archive("variation", request, comparison), [row])


def cmd_symmetrize(ctx: CommandContext) -> None:
    args = ctx.args
    polygon = load_polygon(args.polygon)
    run = SymmetrizationAgent(ctx.kernel, ctx.spec, ctx.executor).run(polygon, args.steps)
    rows = [step.row() for step in run.steps]
    result = dict(run.summary(), trace=rows)
    request = ctx.request(vertices=polygon.vertices.tolist(), steps=args.steps)
    _emit(args, ctx.archive("symmetrize", request, result), rows)


def cmd_polya_szego(ctx: CommandContext) -> None:
    args = ctx.args
    if args.shape == "triangle":
        values = triangle_recursion(args.a0, args.steps)
    else:
        values = quadrilateral_recursion(args.a0, args.steps)
    rows = [{"step": k, "a": value} for k, value in enumerate(values, start=1)]
    _emit(args, {"shape": args.shape, "a0": args.a0, "values": values}, rows)


def cmd_optimize(ctx: CommandContext) -> None:
    args = ctx.args
    options = OptimizerOptions(max_iters=args.max_iters, seed=args.seed)
    init = load_polygon(args.init) if args.init else "random"
    result = EnergyOptimizer(ctx.kernel, ctx.spec, ctx.executor, options).maximize_energy(args.n, args.area, init)
    if args.trace:
        Path(args.trace).write_text(write_csv(result.trace, TRACE_COLUMNS))
    request = ctx.request(n=args.n, area=args.area, seed=args.seed, max_iters=args.max_iters)
    _emit(args, ctx.archive("optimize", request, result.to_dict()), result.trace, TRACE_COLUMNS)


def cmd_serve(ctx: CommandContext) -> None:
    import uvicorn

    server = ctx.settings.server
    uvicorn.run(
        "api.routes:app",
        host=ctx.args.host or server.host,
        port=ctx.args.port or server.port,
        reload=server.reload,
        log_level=(ctx.args.log_level or ctx.settings.log_level).lower(),
    )


COMMANDS: Dict[str, Callable[[CommandContext], None]] = {
    "energy": cmd_energy,
    "potential": cmd_potential,
    "stationarity": cmd_stationarity,
    "variation": cmd_variation,
    "symmetrize": cmd_symmetrize,
    "polya-szego": cmd_polya_szego,
    "optimize": cmd_optimize,
    "serve": cmd_serve,
}


def _fail(error: PolyRieszError) -> int:
    payload = {key: value for key, value in error.to_dict().items() if key != "trace"}
    sys.stderr.write(dumps(payload, indent=None) + "\n")
    return error.exit_code


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run the subcommand and return the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        if args.log_level:
            logging.getLogger().setLevel(args.log_level)
        COMMANDS[args.command](CommandContext(args, get_settings()))
        return 0
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except PolyRieszError as e:
        logger.debug(f"Command failed: {e.message}")
        return _fail(e)
    except ValidationError as e:
        messages = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        return _fail(InvalidArgumentError(messages or str(e)))
    except json.JSONDecodeError as e:
        return _fail(InvalidArgumentError(f"Malformed JSON: {e.msg} at line {e.lineno}"))
