from pocketflow import Node, Flow, BatchNode
import logging
from typing import Any, Callable, Dict, List, Optional, Tuple

import yaml

from utils.artifacts import render_csv, render_json, write_artifact
from utils.bell import BellArgs, partial_bell
from utils.config import CliConfig, Defaults
from utils.core_params import StParams, deform, make_params, named_params
from utils.errors import DomainError, StCalcError, UsageError
from utils.exponentials import ExpKind, exp_convergence, exp_inequality_report, exp_product, exp_series_report
from utils.expr_parser import evaluate, parse_expr, variables
from utils.integration import st_integral
from utils.numeric import Number, parse_number
from utils.operators import st_derivative
from utils.sequences import fibonomial, fibotorial, limit_class, st_sequence
from utils.solvers import (EquationSpec, SolveReport, ambartsumian, bell_autonomous_solve, classify_E,
                           solve_linear_pantograph, successive_approximation, two_term_pantograph)
from utils.ward_series import classify_series

logger = logging.getLogger('stcalc')

# (JSON payload fields, CSV rows)
Result = Tuple[Dict[str, Any], List[Dict[str, Any]]]

# Subcommands that work without an (s,t) pair
PARAMETER_FREE = {"bell", "sweep"}

EXP_KINDS = {"deformed": "Deformed", "Exp": "Exp", "ExpPrime": "ExpPrime"}


def error_payload(error: StCalcError) -> Dict[str, Any]:
    return {"schema": Defaults.SCHEMA, "error": error.to_dict()}


def _require(config: CliConfig, name: str) -> Any:
    value = config.u if name == "u" else config.options.get(name)
    if value is None:
        raise UsageError(f"{config.command} needs --{name.replace('_', '-')}")
    return value


def _function_of_x(text: str) -> Callable[[float], float]:
    ast = parse_expr(text)
    extra = variables(ast) - {"x"}
    if extra:
        raise UsageError(f"--f is a function of x only, got {sorted(extra)}")
    return lambda x: float(evaluate(ast, {"x": x}))


def _report_result(report: SolveReport, **fields) -> Result:
    rows = [{"x": x, "value": value} for x, value in zip(report.lattice, report.lattice_values)]
    return {**fields, **report.to_dict()}, rows


#############################################
# Validate Config Node
#############################################
class ValidateConfigNode(Node):
    def prep(self, shared: Dict[str, Any]) -> CliConfig:
        return shared["config"]

    def exec(self, config: CliConfig) -> Tuple[str, Optional[StParams]]:
        if config.N < 0:
            raise UsageError(f"--N must be nonnegative, got {config.N}")
        if not config.tol > 0:
            raise UsageError(f"--tol must be positive, got {config.tol}")
        if config.output not in ("json", "csv"):
            raise UsageError(f"--format must be json or csv, got {config.output!r}")
        if config.u is not None and not config.u > 0:
            raise DomainError(f"u must be positive, got {config.u}")

        params = None
        family = config.options.get("family")
        if family:
            params = named_params(family, *(config.options.get("family_args") or []))
        elif config.s is not None and config.t is not None:
            params = make_params(config.s, config.t)
        elif config.command not in PARAMETER_FREE:
            raise UsageError(f"{config.command} needs --s and --t (or --family)")
        return config.command, params

    def exec_fallback(self, prep_res: CliConfig, exc: Exception):
        if isinstance(exc, StCalcError):
            return exc
        raise exc

    def post(self, shared: Dict[str, Any], prep_res: CliConfig, exec_res) -> str:
        if isinstance(exec_res, StCalcError):
            shared["error"] = exec_res
            return "error"
        command, params = exec_res
        shared["params"] = params
        logger.info(f"ValidateConfigNode: dispatching {command}")
        return command


#############################################
# Command Nodes
#############################################
class CommandNode(Node):
    """One subcommand: compute() returns (payload fields, rows); library errors route to "error"."""

    def prep(self, shared: Dict[str, Any]) -> Tuple[CliConfig, Optional[StParams]]:
        return shared["config"], shared.get("params")

    def exec(self, inputs: Tuple[CliConfig, Optional[StParams]]) -> Result:
        config, params = inputs
        return self.compute(config, params)

    def compute(self, config: CliConfig, params: Optional[StParams]) -> Result:
        raise NotImplementedError

    def exec_fallback(self, prep_res, exc: Exception):
        if isinstance(exc, StCalcError):
            logger.info(f"{type(self).__name__}: {exc.name}: {exc}")
            return exc
        raise exc

    def post(self, shared: Dict[str, Any], prep_res, exec_res) -> str:
        if isinstance(exec_res, StCalcError):
            shared["error"] = exec_res
            return "error"
        shared["result"], shared["rows"] = exec_res
        return "default"


class SeqNode(CommandNode):
    def compute(self, config: CliConfig, params: StParams) -> Result:
        n = config.options["n"]
        if config.u is not None:
            params = deform(params, config.u)
        values = st_sequence(params, n)
        rows = [{"n": v.n, "value": v.value} for v in values]
        return {"params": params.to_dict(), "values": [v.value for v in values]}, rows


class FibNode(CommandNode):
    def compute(self, config: CliConfig, params: StParams) -> Result:
        n, k = config.options["n"], config.options.get("k")
        u = config.u if config.u is not None else 1
        if k is None:
            fields = {"n": n, "u": u, "fibotorial": fibotorial(params, u, n)}
        else:
            fields = {"n": n, "k": k, "u": u, "fibonomial": fibonomial(params, u, n, k)}
        return fields, [fields]


class DiffNode(CommandNode):
    def compute(self, config: CliConfig, params: StParams) -> Result:
        text, x = _require(config, "f"), _require(config, "x")
        u = config.u if config.u is not None else 1
        fields = {"f": text, "x": x, "u": u, "derivative": st_derivative(_function_of_x(text), params, u, x)}
        return fields, [fields]


class IntegrateNode(CommandNode):
    def compute(self, config: CliConfig, params: StParams) -> Result:
        text, a, b = _require(config, "f"), config.options["a"], _require(config, "b")
        value = st_integral(_function_of_x(text), a, b, params, config.tol)
        fields = {"f": text, "a": a, "b": b, "integral": value}
        return fields, [fields]


class ExpNode(CommandNode):
    def compute(self, config: CliConfig, params: StParams) -> Result:
        options = config.options
        kind = ExpKind(EXP_KINDS[options["kind"]], config.u)
        u = kind.resolve(params)
        mode = options["mode"]
        fields = {"kind": kind.kind, "u": u, "mode": mode, "convergence": exp_convergence(params, u).to_dict()}

        if mode == "inequalities":
            grid = options.get("x_grid") or [0.25, 0.5, 0.75]
            report = exp_inequality_report(params, u, grid, v=options.get("v"))
            fields["inequalities"] = report.to_dict()
            return fields, report.rows

        z = _require(config, "z")
        fields["z"] = z
        if mode in ("series", "compare"):
            series = exp_series_report(params, u, z, config.tol)
            fields.update(series=series.value, tail_bound=series.tail_bound, terms=series.terms)
        if mode in ("product", "compare"):
            fields["product"] = exp_product(params, kind, z, options.get("K"))
        if mode == "compare":
            fields["difference"] = abs(fields["series"] - fields["product"])
        row = {key: value for key, value in fields.items() if key != "convergence"}
        return fields, [row]


class ClassifyNode(CommandNode):
    def compute(self, config: CliConfig, params: StParams) -> Result:
        u = _require(config, "u")
        a, b = config.options.get("a"), config.options.get("b")
        if a is not None or b is not None:
            fields = classify_E(params, u, a or 0, b or 0).to_dict()
        else:
            alpha = config.options.get("alpha")
            fields = classify_series(params, u, 1 if alpha is None else alpha).to_dict()
        return fields, [fields]


class SolveNode(CommandNode):
    def compute(self, config: CliConfig, params: StParams) -> Result:
        options = config.options
        method, u = options["method"], _require(config, "u")
        a, b, y0 = options.get("a"), options.get("b"), options["y0"]
        if method == "linear":
            report = solve_linear_pantograph(params, 1 if a is None else a, u, y0, config.N)
        elif method == "two-term":
            report = two_term_pantograph(params, _require(config, "a"), _require(config, "b"), u, config.N)
        elif method == "bell":
            report = bell_autonomous_solve(params, parse_expr(_require(config, "rhs")), u, y0, config.N)
        else:
            spec = EquationSpec(
                params=params,
                u=u,
                rhs=parse_expr(_require(config, "rhs")),
                init=(options["eta"], y0),
                a_dom=options["a_dom"],
                b_box=options["b_box"],
                L1=options.get("L1"),
                L2=options.get("L2"),
                M=options.get("M"),
                regime=options.get("regime"),
            )
            iterations = options.get("iterations") or max(config.N, 1)
            report = successive_approximation(spec, iterations, config.N, config.tol)
        return _report_result(report, method=method)


class AmbartsumianNode(CommandNode):
    def compute(self, config: CliConfig, params: StParams) -> Result:
        report = ambartsumian(params, _require(config, "v"), config.options["y0"], config.N)
        return _report_result(report)


class BellNode(CommandNode):
    def compute(self, config: CliConfig, params: Optional[StParams]) -> Result:
        n, k, x = config.options["n"], _require(config, "k"), _require(config, "x")
        fields = {"n": n, "k": k, "x": list(x), "value": partial_bell(BellArgs(n, k, tuple(x)))}
        return fields, [fields]


#############################################
# Sweep Batch Node
#############################################
def _number(value: Any) -> Optional[Number]:
    if value is None:
        return None
    return parse_number(value if isinstance(value, (int, float)) else str(value))


def load_points(path: str) -> List[Dict[str, Any]]:
    """A YAML list of mappings with keys among s, t, u, a, b, z."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise UsageError(f"cannot read sweep points from {path}: {e}")
    if not isinstance(document, list) or not all(isinstance(point, dict) for point in document):
        raise UsageError(f"{path} must hold a list of mappings")
    try:
        return [{key: _number(value) for key, value in point.items()} for point in document]
    except ValueError as e:
        raise UsageError(f"non-numeric value in {path}: {e}")


class SweepNode(BatchNode):
    def prep(self, shared: Dict[str, Any]) -> List[Dict[str, Any]]:
        config = shared["config"]
        points = load_points(_require(config, "points"))
        task = config.options["task"]
        logger.info(f"SweepNode: {len(points)} points, task {task}")
        return [{"index": i, "task": task, "tol": config.tol, **point} for i, point in enumerate(points)]

    def exec(self, point: Dict[str, Any]) -> Dict[str, Any]:
        params = make_params(point["s"], point["t"])
        u = point.get("u", 1)
        row = {"index": point["index"], "s": point["s"], "t": point["t"], "u": u}
        if point["task"] == "limit":
            row.update(limit_class(params, u).to_dict())
        elif point["task"] == "exp":
            row["exp"] = exp_series_report(params, u, point.get("z", 1), point["tol"]).value
        elif point.get("a") is not None or point.get("b") is not None:
            row.update(classify_E(params, u, point.get("a") or 0, point.get("b") or 0).to_dict())
        else:
            row.update(exp_convergence(params, u).to_dict())
        return row

    def exec_fallback(self, point: Dict[str, Any], exc: Exception) -> Dict[str, Any]:
        if isinstance(exc, StCalcError) or isinstance(exc, KeyError):
            name = exc.name if isinstance(exc, StCalcError) else "MissingKey"
            logger.warning(f"SweepNode: point {point['index']} failed with {name}")
            return {"index": point["index"], "error": name, "message": str(exc)}
        raise exc

    def post(self, shared: Dict[str, Any], prep_res: List[Dict[str, Any]], exec_res_list: List[Dict[str, Any]]) -> str:
        task = shared["config"].options["task"]
        shared["result"] = {"task": task, "points": exec_res_list}
        shared["rows"] = exec_res_list
        return "default"


#############################################
# Emit Node
#############################################
class EmitNode(Node):
    def prep(self, shared: Dict[str, Any]) -> Tuple[CliConfig, Dict[str, Any], List[Dict[str, Any]]]:
        config = shared["config"]
        payload = {"schema": Defaults.SCHEMA, "command": config.command, **shared["result"]}
        return config, payload, shared.get("rows") or []

    def exec(self, inputs) -> Tuple[str, Optional[str], bool]:
        config, payload, rows = inputs
        text = render_csv(rows) if config.output == "csv" else render_json(payload)
        if config.out_path:
            message, success = write_artifact(config.out_path, text)
            return text, message, success
        return text, None, True

    def post(self, shared: Dict[str, Any], prep_res, exec_res: Tuple[str, Optional[str], bool]) -> None:
        text, message, success = exec_res
        if not success:
            error = UsageError(message)
            logger.warning(f"EmitNode: {error.name}: {error}")
            shared["output"], shared["exit_code"] = render_json(error_payload(error)), error.exit_code
            return None
        if message:
            logger.info(f"EmitNode: {message}")
        shared["output"] = None if message else text
        shared["exit_code"] = 0
        return None


#############################################
# Error Node
#############################################
class ErrorNode(Node):
    def prep(self, shared: Dict[str, Any]) -> StCalcError:
        return shared["error"]

    def exec(self, error: StCalcError) -> Tuple[str, int]:
        return render_json(error_payload(error)), error.exit_code

    def post(self, shared: Dict[str, Any], prep_res: StCalcError, exec_res: Tuple[str, int]) -> str:
        logger.warning(f"ErrorNode: {prep_res.name}: {prep_res}")
        shared["output"], shared["exit_code"] = exec_res
        return "done"


#############################################
# Main Flow
#############################################
def create_stcalc_flow() -> Flow:
    # Create nodes
    validate = ValidateConfigNode()
    seq = SeqNode()
    fib = FibNode()
    diff = DiffNode()
    integrate = IntegrateNode()
    exp = ExpNode()
    classify = ClassifyNode()
    solve = SolveNode()
    ambartsumian_node = AmbartsumianNode()
    bell = BellNode()
    sweep = SweepNode()
    emit = EmitNode()
    error = ErrorNode()

    # Dispatch on the subcommand name
    validate - "seq" >> seq
    validate - "fib" >> fib
    validate - "diff" >> diff
    validate - "integrate" >> integrate
    validate - "exp" >> exp
    validate - "classify" >> classify
    validate - "solve" >> solve
    validate - "ambartsumian" >> ambartsumian_node
    validate - "bell" >> bell
    validate - "sweep" >> sweep
    validate - "error" >> error

    # Every command emits its artifact or reports an error; emit ends the flow
    for node in (seq, fib, diff, integrate, exp, classify, solve, ambartsumian_node, bell, sweep):
        node >> emit
        node - "error" >> error

    return Flow(start=validate)


# Create the stcalc flow
stcalc_flow = create_stcalc_flow()
