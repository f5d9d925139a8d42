"""Command line client for the cross-over toolkit.

Every command builds a request, sends it to the HTTP app (in process by
default, or to a running server via ``--server``), and renders the
response as plain key=value lines, JSON, or CSV.

Exit codes: 0 on success, 1 for usage problems (bad flags, malformed
data, domain errors), 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import io
import json
import sys

import httpx

from .dataio import read_values
from .errors import DataFormatError, DomainError, EcfError, NumericalError

USAGE_EXIT = 1
NUMERICAL_EXIT = 2


class CliError(Exception):
    """A failure with a message and a process exit code."""

    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage problems; this CLI reserves 2
    # for numerical failures, so route usage errors through CliError.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message, USAGE_EXIT)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def _kv_lines(pairs) -> str:
    return "".join(f"{key}={_fmt(value)}\n" for key, value in pairs)


def _csv_rows(*rows) -> str:
    # Model specs contain commas ("normal:0,1"); a real CSV writer quotes them.
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def _post(server: str | None, path: str, payload: dict) -> tuple[int, object]:
    try:
        if server:
            with httpx.Client(base_url=server, timeout=None) as client:
                resp = client.post(path, json=payload)
                return resp.status_code, resp.json()

        from .service.app import app

        async def _go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://ecf.internal", timeout=None
            ) as client:
                resp = await client.post(path, json=payload)
                return resp.status_code, resp.json()

        return asyncio.run(_go())
    except httpx.HTTPError as exc:
        raise CliError(f"request to {path} failed: {exc}", USAGE_EXIT) from None


def _request(args, path: str, payload: dict) -> dict:
    status, body = _post(args.server, path, payload)
    if status == 200:
        return body
    detail = body.get("detail") if isinstance(body, dict) else None
    if isinstance(detail, dict):
        kind = detail.get("kind", "usage")
        message = detail.get("message", json.dumps(detail))
    else:
        kind = "usage"
        message = str(detail) if detail is not None else json.dumps(body)
    raise CliError(message, NUMERICAL_EXIT if kind == "numerical" else USAGE_EXIT)


def _emit(text: str, output: str | None) -> None:
    if output:
        try:
            with open(output, "w", encoding="utf-8") as handle:
                handle.write(text)
        except OSError as exc:
            raise CliError(f"cannot write {output!r}: {exc.strerror or exc}", USAGE_EXIT)
    else:
        sys.stdout.write(text)


def _json_text(body) -> str:
    return json.dumps(body, indent=2) + "\n"


def _load_values(path: str) -> list[float]:
    return [float(v) for v in read_values(path)]


# ---------------------------------------------------------------- theory


def cmd_theory(args) -> str:
    payload = {"model": args.model, "p": args.p, "include_split_point": args.split_point}
    if args.bracket is not None:
        payload["bracket"] = list(args.bracket)
    body = _request(args, "/theory", payload)
    if args.format == "json":
        return _json_text(body)
    base_keys = ("model", "p", "quantile", "mu_lower", "mu_upper", "G", "B", "g_prime", "sigma")
    if args.format == "csv":
        return _csv_rows(base_keys, [_fmt(body[key]) for key in base_keys])
    text = _kv_lines((key, body[key]) for key in base_keys)
    split_info = body.get("split_point")
    if split_info:
        text += _kv_lines(
            (key, split_info[key])
            for key in ("p0", "split_value", "b_at_p0", "derivative_residual")
        )
        text += "roots=" + ",".join(_fmt(r) for r in split_info["roots"]) + "\n"
    return text


# ----------------------------------------------------------------- curve


def cmd_curve(args) -> str:
    body = _request(args, "/curve", {"values": _load_values(args.file)})
    if args.format == "json":
        return _json_text(body)
    if args.format == "csv":
        lines = ["k,p,g"]
        for k, p, g in zip(body["k"], body["p"], body["g"]):
            lines.append(f"{k},{_fmt(p)},{_fmt(g)}")
        return "\n".join(lines) + "\n"
    keys = ("n", "crossing_k", "p_hat", "split_value", "left_size", "right_size")
    return _kv_lines((key, body[key]) for key in keys)


# ----------------------------------------------------------------- split

_SPLIT_KEYS = ("n", "k_star", "p_n", "split_value", "left_size", "right_size")


def _split_text(body: dict, fmt: str) -> str:
    if fmt == "json":
        return _json_text({key: body[key] for key in _SPLIT_KEYS})
    if fmt == "csv":
        header = ",".join(_SPLIT_KEYS)
        row = ",".join(_fmt(body[key]) for key in _SPLIT_KEYS)
        return f"{header}\n{row}\n"
    return _kv_lines((key, body[key]) for key in _SPLIT_KEYS)


def cmd_split(args) -> str:
    if (args.file is None) == (args.from_curve is None):
        raise CliError("split needs a data file or --from-curve, not both", USAGE_EXIT)
    if args.from_curve:
        try:
            with open(args.from_curve, "r", encoding="utf-8") as handle:
                saved = json.load(handle)
        except OSError as exc:
            raise CliError(
                f"cannot read {args.from_curve!r}: {exc.strerror or exc}", USAGE_EXIT
            )
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.from_curve!r} is not curve JSON: {exc}", USAGE_EXIT)
        mapping = {"k_star": "crossing_k", "p_n": "p_hat"}
        try:
            body = {key: saved[mapping.get(key, key)] for key in _SPLIT_KEYS}
        except (KeyError, TypeError):
            raise CliError(
                f"{args.from_curve!r} lacks curve fields; expected output of "
                "'curve --format json'",
                USAGE_EXIT,
            ) from None
        return _split_text(body, args.format)
    body = _request(args, "/split", {"values": _load_values(args.file)})
    return _split_text(body, args.format)


# ----------------------------------------- simulate / kstest / covgrid


def _merged_config(args, extra_keys=("p",)) -> dict:
    data = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except OSError as exc:
            raise CliError(f"cannot read {args.config!r}: {exc.strerror or exc}", USAGE_EXIT)
        except json.JSONDecodeError as exc:
            raise CliError(f"config is not valid JSON: {exc}", USAGE_EXIT)
        if not isinstance(data, dict):
            raise CliError("config file must hold a JSON object", USAGE_EXIT)
        data.pop("experiment", None)
    for key in ("model", "n", "replicates", "seed", *extra_keys):
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            data[key] = value
    data.setdefault("seed", 0)
    missing = [key for key in ("model", "n", "replicates", *extra_keys) if key not in data]
    if missing:
        raise CliError(f"missing required settings: {', '.join(missing)}", USAGE_EXIT)
    return data


def _report_csv(body: dict) -> str:
    header = (
        "model,experiment,p,n,replicates,seed,"
        "mean,variance,theoretical_sigma,ks_statistic,ks_pvalue"
    )
    fields = [
        body["model"],
        body["experiment"],
        _fmt(body["p"]),
        str(body["n"]),
        str(body["replicates"]),
        str(body["seed"]),
        _fmt(body["mean"]),
        _fmt(body["variance"]),
        _fmt(body["theoretical_sigma"]),
        "" if body.get("ks_statistic") is None else _fmt(body["ks_statistic"]),
        "" if body.get("ks_pvalue") is None else _fmt(body["ks_pvalue"]),
    ]
    return _csv_rows(header.split(","), fields)


def _report_text(body: dict, fmt: str) -> str:
    if fmt == "json":
        return _json_text(body)
    if fmt == "csv":
        return _report_csv(body)
    keys = ["model", "experiment", "p", "n", "replicates", "seed", "mean", "variance",
            "theoretical_sigma"]
    if body.get("ks_statistic") is not None:
        keys += ["ks_statistic", "ks_pvalue"]
    keys.append("wall_time")
    return _kv_lines((key, body[key]) for key in keys)


def cmd_simulate(args) -> str:
    data = _merged_config(args)
    body = _request(args, "/simulate", data)
    return _report_text(body, args.format)


def cmd_kstest(args) -> str:
    data = _merged_config(args)
    body = _request(args, "/kstest", data)
    return _report_text(body, args.format)


def cmd_covgrid(args) -> str:
    data = _merged_config(args, extra_keys=("grid",))
    body = _request(args, "/covgrid", data)
    if args.format == "json":
        return _json_text(body)
    if args.format == "csv":
        lines = [",".join(_fmt(p) for p in body["grid"])]
        for row in body["empirical"]:
            lines.append(",".join(_fmt(v) for v in row))
        for row in body["theoretical"]:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"
    text = _kv_lines(
        (key, body[key]) for key in ("model", "n", "replicates", "seed")
    )
    text += "grid=" + ",".join(_fmt(p) for p in body["grid"]) + "\n"
    text += _kv_lines(
        (key, body[key]) for key in ("max_abs_error", "min_eigenvalue", "wall_time")
    )
    return text


# ------------------------------------------------------------- plumbing


def _grid_arg(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(piece) for piece in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected e.g. 0.3,0.5,0.7")
    if not values:
        raise argparse.ArgumentTypeError("grid must not be empty")
    return values


def _bracket_arg(text: str) -> tuple[float, float]:
    pieces = text.split(",")
    if len(pieces) != 2:
        raise argparse.ArgumentTypeError(f"bad bracket {text!r}; expected LO,HI")
    try:
        return float(pieces[0]), float(pieces[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad bracket {text!r}; expected LO,HI")


def _add_common(sub, formats=("plain", "json", "csv")):
    sub.add_argument("--format", choices=formats, default="plain", help="output format")
    sub.add_argument("--output", metavar="FILE", help="write the result to FILE instead of stdout")
    sub.add_argument("--server", metavar="URL", help="send requests to a running server")


def _add_sim_common(sub):
    sub.add_argument("--model", help="model spec, e.g. normal:0,1 or exp:1 or uniform:0,1")
    sub.add_argument("--n", type=int, help="sample size per replicate")
    sub.add_argument("--replicates", type=int, help="number of Monte Carlo replicates")
    sub.add_argument("--seed", type=int, help="stream seed (default 0)")
    sub.add_argument("--config", metavar="FILE", help="JSON config; explicit flags override it")
    _add_common(sub)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ecf", description="Empirical cross-over function toolkit.")
    parser.set_defaults(func=None)
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")

    theory = commands.add_parser(
        "theory", help="population quantities of a model at a level"
    )
    theory.add_argument("--model", required=True, help="model spec, e.g. normal:0,1")
    theory.add_argument("--p", type=float, required=True, help="level in (0, 1)")
    theory.add_argument(
        "--split-point", action="store_true", help="include the split-point search"
    )
    theory.add_argument(
        "--bracket", type=_bracket_arg, metavar="LO,HI",
        help="search bracket for --split-point (default 0.01,0.99)",
    )
    _add_common(theory)
    theory.set_defaults(func=cmd_theory)

    curve = commands.add_parser("curve", help="empirical cross-over curve of a data file")
    curve.add_argument("file", help="data file with one value per line, or - for stdin")
    _add_common(curve)
    curve.set_defaults(func=cmd_curve)

    split = commands.add_parser("split", help="two-cluster split of a data file")
    split.add_argument("file", nargs="?", help="data file, or - for stdin")
    split.add_argument(
        "--from-curve", metavar="FILE", help="reuse a saved 'curve --format json' result"
    )
    _add_common(split)
    split.set_defaults(func=cmd_split)

    simulate = commands.add_parser("simulate", help="Monte Carlo summary of the scaled error")
    simulate.add_argument("--p", type=float, help="level in (0, 1)")
    _add_sim_common(simulate)
    simulate.set_defaults(func=cmd_simulate)

    kstest = commands.add_parser(
        "kstest", help="simulate and test the scaled errors for normality"
    )
    kstest.add_argument("--p", type=float, help="level in (0, 1)")
    _add_sim_common(kstest)
    kstest.set_defaults(func=cmd_kstest)

    covgrid = commands.add_parser(
        "covgrid", help="empirical vs limit covariance on a grid of levels"
    )
    covgrid.add_argument("--grid", type=_grid_arg, help="comma-separated levels, e.g. 0.3,0.5,0.7")
    _add_sim_common(covgrid)
    covgrid.set_defaults(func=cmd_covgrid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.func is None:
            parser.print_usage(sys.stderr)
            print("error: a command is required", file=sys.stderr)
            return USAGE_EXIT
        text = args.func(args)
        _emit(text, args.output)
        return 0
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT
    except EcfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
