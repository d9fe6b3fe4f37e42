"""Command-line front end: config handling, orchestration, report emission.

A run is described by a flat key = value config, either in a file loaded
with ``--config`` or assembled from command-line flags; flags override
file entries. The seed is always explicit, never auto-generated, so a
config determines its output bytes exactly. Reports embed the resolved
config (minus the output path, which would break byte-level comparison
of reruns) as provenance.

Exit codes: 0 success, 1 a verification suite reported violations,
2 malformed config or infeasible parameters.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import MISSING, dataclass, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from permprod.oracle import (
    ExactDistribution,
    exact_joint_cycle_prob,
    exact_moment,
)
from permprod.samplers import RngStream, SamplerSpec, product_rows
from permprod.stats import (
    Functional,
    _chunk_size,
    convergence_scan,
    moment_estimates,
    parse_functional,
)
from permprod.sweeps import run_all

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "sampler_from_text",
    "sampler_to_text",
    "parse_config",
    "serialize_config",
    "config_from_mapping",
    "emit_report",
    "run",
    "main",
]

_COMMANDS = ("sample", "moments", "convergence", "exact", "verify-lemmas", "counterexample")

# Full enumeration in the exact back end caps at 8!.
_EXACT_MAX_N = 8

# Stream block for the factor diagnostics of the counterexample command,
# disjoint from the product-sampling streams at base 0.
_DIAG_STREAM_BASE = 2**31


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field."""


def sampler_to_text(spec: SamplerSpec) -> str:
    if spec.kind == "uniform":
        return "uniform"
    if spec.kind == "ewens":
        return f"ewens:{spec.theta}"
    if spec.kind == "sqrt_fixed":
        return f"sqrt_fixed:{spec.fixed_count}"
    return f"matching_heavy:{spec.two_cycle_fraction}"


def sampler_from_text(text: str) -> SamplerSpec:
    """Parse one sampler descriptor: kind, optionally ':parameter'.

    Accepted forms: ``uniform``, ``ewens:<theta>``, ``sqrt_fixed:<count
    or sqrt>``, ``matching_heavy:<fraction>``; rationals may be written
    as ``1/2``.
    """
    t = text.strip()
    kind, sep, arg = t.partition(":")
    try:
        if kind == "uniform":
            if sep:
                raise ValueError("takes no parameter")
            return SamplerSpec(kind="uniform")
        if kind == "ewens":
            return SamplerSpec(kind="ewens", theta=Fraction(arg))
        if kind == "sqrt_fixed":
            count = "sqrt" if arg.strip() == "sqrt" else int(arg)
            return SamplerSpec(kind="sqrt_fixed", fixed_count=count)
        if kind == "matching_heavy":
            return SamplerSpec(kind="matching_heavy", two_cycle_fraction=Fraction(arg))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"samplers: bad descriptor {text!r}: {exc}") from None
    raise ConfigError(f"samplers: unknown sampler kind {kind!r} in {text!r}")


# Fields meaningful for each command, beyond the universal command, seed,
# output and format. A field outside its command's set must keep its
# default value or the config is rejected.
_APPLICABLE = {
    "sample": {"samplers", "n", "samples"},
    "moments": {"samplers", "n", "samples", "functionals"},
    "convergence": {"samplers", "n_grid", "samples", "functionals", "tv_orders", "truncation"},
    "exact": {"samplers", "n", "v_vec"},
    "verify-lemmas": {"pair_n", "single_n"},
    "counterexample": {"samplers", "n", "samples"},
}

_REQUIRED = {
    "sample": ("samplers", "n", "samples"),
    "moments": ("samplers", "n", "samples", "functionals"),
    "convergence": ("samplers", "n_grid", "samples"),
    "exact": ("samplers", "n", "v_vec"),
    "verify-lemmas": (),
    "counterexample": ("samplers", "n", "samples"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One fully resolved run; construction validates everything."""

    command: str
    seed: int
    samplers: tuple[SamplerSpec, ...] = ()
    n: int | None = None
    n_grid: tuple[int, ...] | None = None
    v_vec: tuple[int, ...] | None = None
    functionals: tuple[Functional, ...] = ()
    tv_orders: tuple[int, ...] = ()
    samples: int | None = None
    truncation: int = 8
    pair_n: int = 5
    single_n: int = 7
    output: str | None = None
    format: str = "csv"

    def __post_init__(self) -> None:
        for name in ("samplers", "functionals", "tv_orders"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        for name in ("n_grid", "v_vec"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(value))
        if self.command not in _COMMANDS:
            raise ConfigError(
                f"command: {self.command!r} is not one of {', '.join(_COMMANDS)}"
            )
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed: must be a non-negative integer")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: {self.format!r} is not csv or json")
        allowed = _APPLICABLE[self.command]
        for name, default in _FIELD_DEFAULTS.items():
            if name not in allowed and getattr(self, name) != default:
                raise ConfigError(f"{name}: does not apply to command {self.command}")
        for name in _REQUIRED[self.command]:
            value = getattr(self, name)
            if value is None or value == ():
                raise ConfigError(f"{name}: required for command {self.command}")
        if self.n is not None and self.n < 1:
            raise ConfigError("n: must be >= 1")
        if self.samples is not None and self.samples < 1:
            raise ConfigError("samples: must be >= 1")
        if self.n_grid is not None and (
            not self.n_grid
            or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:]))
            or self.n_grid[0] < 1
        ):
            raise ConfigError("n_grid: must be a strictly increasing list of sizes")
        if self.v_vec is not None and (not self.v_vec or any(v < 1 for v in self.v_vec)):
            raise ConfigError("v_vec: cycle lengths must be >= 1")
        if any(k < 1 for k in self.tv_orders):
            raise ConfigError("tv_orders: joint orders must be >= 1")
        if self.truncation < 0:
            raise ConfigError("truncation: must be >= 0")
        if self.pair_n < 1 or self.single_n < 1:
            raise ConfigError("pair_n/single_n: must be >= 1")
        if self.command in ("exact", "counterexample") and len(self.samplers) != 2:
            raise ConfigError(
                f"samplers: command {self.command} needs exactly 2 samplers, "
                f"got {len(self.samplers)}"
            )
        if self.command == "exact":
            if self.n > _EXACT_MAX_N:
                raise ConfigError(f"n: exact enumeration caps at {_EXACT_MAX_N}")
            if len(self.v_vec) > self.n:
                raise ConfigError("v_vec: more start indices than ground-set elements")
        if self.command == "convergence" and not self.functionals and not self.tv_orders:
            raise ConfigError("functionals: convergence needs functionals or tv_orders")


_FIELD_DEFAULTS = {
    f.name: f.default
    for f in fields(ExperimentConfig)
    if f.default is not MISSING and f.name not in ("command", "seed", "output", "format")
}


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _split_list(raw: str) -> list[str]:
    return [part for part in (p.strip() for p in raw.split(",")) if part]


def _parse_int_list(key: str, raw: str) -> tuple[int, ...]:
    parts = _split_list(raw)
    if not parts:
        raise ConfigError(f"{key}: expected a comma-separated integer list, got {raw!r}")
    return tuple(_parse_int(key, p) for p in parts)


def config_from_mapping(mapping: Mapping[str, str]) -> ExperimentConfig:
    """Validate a string-to-string mapping into a config.

    The single choke point for file plus flag merging: every entry is a
    string and every failure names its field.
    """
    known = {f.name for f in fields(ExperimentConfig)}
    for key in mapping:
        if key not in known:
            raise ConfigError(f"{key}: unknown config key")
    for key in ("command", "seed"):
        if key not in mapping:
            raise ConfigError(f"{key}: missing")
    kwargs: dict = {
        "command": mapping["command"].strip(),
        "seed": _parse_int("seed", mapping["seed"]),
    }
    if "samplers" in mapping:
        parts = _split_list(mapping["samplers"])
        if not parts:
            raise ConfigError("samplers: empty sampler list")
        kwargs["samplers"] = tuple(sampler_from_text(p) for p in parts)
    for key in ("n", "samples", "truncation", "pair_n", "single_n"):
        if key in mapping:
            kwargs[key] = _parse_int(key, mapping[key])
    for key in ("n_grid", "v_vec", "tv_orders"):
        if key in mapping:
            kwargs[key] = _parse_int_list(key, mapping[key])
    if "functionals" in mapping:
        parts = _split_list(mapping["functionals"])
        if not parts:
            raise ConfigError("functionals: empty functional list")
        try:
            kwargs["functionals"] = tuple(parse_functional(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"functionals: {exc}") from None
    if "output" in mapping:
        if not mapping["output"].strip():
            raise ConfigError("output: empty path")
        kwargs["output"] = mapping["output"].strip()
    if "format" in mapping:
        kwargs["format"] = mapping["format"].strip()
    return ExperimentConfig(**kwargs)


def _mapping_from_text(text: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key in mapping:
            raise ConfigError(f"{key}: duplicate key on line {lineno}")
        mapping[key] = value.strip()
    return mapping


def parse_config(text: str) -> ExperimentConfig:
    """Parse a key = value config file body; # starts a comment line."""
    return config_from_mapping(_mapping_from_text(text))


def serialize_config(config: ExperimentConfig) -> str:
    """Inverse of parse_config; omits fields that hold their defaults."""
    lines = [f"command = {config.command}", f"seed = {config.seed}"]
    if config.samplers:
        lines.append("samplers = " + ", ".join(sampler_to_text(s) for s in config.samplers))
    if config.n is not None:
        lines.append(f"n = {config.n}")
    if config.n_grid is not None:
        lines.append("n_grid = " + ", ".join(str(x) for x in config.n_grid))
    if config.v_vec is not None:
        lines.append("v_vec = " + ", ".join(str(x) for x in config.v_vec))
    if config.functionals:
        lines.append("functionals = " + ", ".join(f.label() for f in config.functionals))
    if config.tv_orders:
        lines.append("tv_orders = " + ", ".join(str(x) for x in config.tv_orders))
    if config.samples is not None:
        lines.append(f"samples = {config.samples}")
    if config.truncation != 8:
        lines.append(f"truncation = {config.truncation}")
    if config.pair_n != 5:
        lines.append(f"pair_n = {config.pair_n}")
    if config.single_n != 7:
        lines.append(f"single_n = {config.single_n}")
    if config.output is not None:
        lines.append(f"output = {config.output}")
    if config.format != "csv":
        lines.append(f"format = {config.format}")
    return "\n".join(lines) + "\n"


def _provenance_config(config: ExperimentConfig) -> ExperimentConfig:
    # The output path varies between reruns and environments; everything
    # else is part of the experiment's identity.
    return replace(config, output=None)


def _config_dict(config: ExperimentConfig) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in serialize_config(_provenance_config(config)).splitlines():
        key, _, value = line.partition(" = ")
        out[key] = value
    return out


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _json_value(value):
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return float(f"{value:.12g}")
    return value


def emit_report(
    results: Sequence[Mapping],
    format: str,
    path: str | None = None,
    config: ExperimentConfig | None = None,
    trends: Mapping[str, str] | None = None,
) -> str:
    """Render result rows to CSV or JSON text; write to ``path`` when given.

    All rows must share one key order. Rationals render as "num/den",
    floats with 12 significant digits, missing values as empty cells
    (CSV) or null (JSON). CSV carries the provenance config and any
    trend verdicts as leading # comment lines; JSON nests them.
    """
    rows = [dict(r) for r in results]
    if not rows:
        raise ValueError("refusing to emit an empty report")
    if format not in ("csv", "json"):
        raise ValueError(f"unknown report format {format!r}")
    columns = list(rows[0].keys())
    for row in rows:
        if list(row.keys()) != columns:
            raise ValueError("result rows must share one schema")
    if format == "csv":
        buf = io.StringIO()
        if config is not None:
            one_line = "; ".join(
                serialize_config(_provenance_config(config)).strip().splitlines()
            )
            buf.write(f"# config: {one_line}\n")
        for label, verdict in (trends or {}).items():
            buf.write(f"# trend {label} = {verdict}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row.values()])
        text = buf.getvalue()
    else:
        doc: dict = {}
        if config is not None:
            doc["config"] = _config_dict(config)
        if trends:
            doc["trends"] = dict(trends)
        doc["rows"] = [{k: _json_value(v) for k, v in row.items()} for row in rows]
        text = json.dumps(doc, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _exact_law(spec: SamplerSpec) -> ExactDistribution:
    """The distribution a bound sampler spec draws from, as an exact law."""
    n = spec.n
    if spec.kind == "uniform":
        return ExactDistribution.uniform(n)
    if spec.kind == "ewens":
        return ExactDistribution.ewens(n, spec.theta)
    if spec.kind == "sqrt_fixed":
        f = spec.resolved_fixed_count()
        if not 0 <= f <= n or n - f == 1:
            raise ConfigError(
                f"samplers: {spec.label()} infeasible at n={n}: the non-fixed "
                "block must be empty or a cycle of length >= 2"
            )
        ptype = (1,) * n if f == n else (n - f,) + (1,) * f
        return ExactDistribution.explicit(n, {ptype: 1}, kind=spec.label())
    frac = spec.two_cycle_fraction
    m = (frac.numerator * n) // frac.denominator if frac else 0
    rest = n - 2 * m
    if rest in (1, 2):
        raise ConfigError(
            f"samplers: {spec.label()} infeasible at n={n}: {rest} spare points"
        )
    ptype = (2,) * m + ((rest,) if rest else ())
    return ExactDistribution.explicit(n, {ptype: 1}, kind=spec.label())


def _run_sample(config: ExperimentConfig):
    specs = [s.bind(n=config.n) for s in config.samplers]
    num = len(specs)
    chunk = _chunk_size(config.n)
    rows = []
    pos = 0
    chunk_index = 0
    while pos < config.samples:
        size = min(chunk, config.samples - pos)
        factors = [
            spec.draw_batch(RngStream(config.seed, chunk_index * num + f), size)
            for f, spec in enumerate(specs)
        ]
        prod = product_rows(factors) if num > 1 else None
        for i in range(size):
            row: dict = {"index": pos + i}
            for f in range(num):
                row[f"factor{f + 1}"] = " ".join(str(int(x) + 1) for x in factors[f][i])
            if prod is not None:
                row["product"] = " ".join(str(int(x) + 1) for x in prod[i])
            rows.append(row)
        pos += size
        chunk_index += 1
    return rows, None, 0


def _run_moments(config: ExperimentConfig):
    ests = moment_estimates(
        list(config.samplers),
        list(config.functionals),
        config.samples,
        config.seed,
        n=config.n,
    )
    rows = [
        {
            "n": config.n,
            "functional": f.label(),
            "value": est.value,
            "stderr": est.stderr,
            "samples": config.samples,
            "seed": config.seed,
        }
        for f, est in zip(config.functionals, ests)
    ]
    return rows, None, 0


def _run_convergence(config: ExperimentConfig):
    scan = convergence_scan(
        list(config.samplers),
        list(config.functionals),
        list(config.n_grid),
        config.samples,
        config.seed,
        truncation=config.truncation,
        tv_orders=list(config.tv_orders),
    )
    rows = [
        {
            "n": r.n,
            "functional": r.functional,
            "value": r.value,
            "stderr": r.stderr,
            "samples": r.samples,
            "seed": r.seed,
        }
        for r in scan.rows
    ]
    return rows, dict(scan.trend), 0


def _run_exact(config: ExperimentConfig):
    law1, law2 = (_exact_law(s.bind(n=config.n)) for s in config.samplers)
    v = tuple(config.v_vec)
    label = "*".join(str(x) for x in v)
    moment = exact_moment(law1, law2, v)
    joint = exact_joint_cycle_prob(law1, law2, v)
    scaled = Fraction(config.n) ** len(v) * joint
    rows = []
    for quantity, value in (
        ("moment", moment),
        ("joint-prob", joint),
        ("scaled-joint-prob", scaled),
    ):
        rows.append(
            {
                "n": config.n,
                "quantity": quantity,
                "v": label,
                "rational": value,
                "value": float(value),
            }
        )
    return rows, None, 0


def _run_verify_lemmas(config: ExperimentConfig):
    summaries = run_all(
        pair_n=config.pair_n, single_n=config.single_n, bounds_n=config.pair_n
    )
    rows = [
        {
            "suite": s.suite,
            "n": s.n,
            "cases": s.cases,
            "violations": s.violations,
            "ok": s.ok,
            "detail": s.detail,
            "examples": "; ".join(s.examples),
        }
        for s in summaries
    ]
    code = 0 if all(s.ok for s in summaries) else 1
    return rows, None, code


def _run_counterexample(config: ExperimentConfig):
    specs = list(config.samplers)
    pair_funcs = [
        Functional.product_cycle_counts((1,)),
        Functional.product_cycle_counts((1, 1)),
    ]
    solo_funcs = [
        Functional.scaled_fixed_point_moment(1),
        Functional.scaled_fixed_point_moment(2),
        Functional.scaled_two_cycle_rate(),
    ]
    pair_ests = moment_estimates(
        specs, pair_funcs, config.samples, config.seed, n=config.n
    )
    solo_ests = moment_estimates(
        [specs[0]],
        solo_funcs,
        config.samples,
        config.seed,
        n=config.n,
        stream_base=_DIAG_STREAM_BASE,
    )
    rows = []
    for f, est in zip(pair_funcs, pair_ests):
        rows.append(
            {
                "n": config.n,
                "functional": f.label(),
                "value": est.value,
                "stderr": est.stderr,
                "samples": config.samples,
                "seed": config.seed,
            }
        )
    for f, est in zip(solo_funcs, solo_ests):
        rows.append(
            {
                "n": config.n,
                "functional": f"factor1:{f.label()}",
                "value": est.value,
                "stderr": est.stderr,
                "samples": config.samples,
                "seed": config.seed,
            }
        )
    return rows, None, 0


_RUNNERS = {
    "sample": _run_sample,
    "moments": _run_moments,
    "convergence": _run_convergence,
    "exact": _run_exact,
    "verify-lemmas": _run_verify_lemmas,
    "counterexample": _run_counterexample,
}


def run(config: ExperimentConfig) -> int:
    """Execute one config; returns the process exit code."""
    rows, trends, code = _RUNNERS[config.command](config)
    text = emit_report(
        rows, config.format, path=config.output, config=config, trends=trends
    )
    if config.output is not None:
        print(f"wrote {len(rows)} rows to {config.output}")
    else:
        sys.stdout.write(text)
    return code


_FLAG_KEYS = (
    "seed",
    "samplers",
    "n",
    "n_grid",
    "v_vec",
    "functionals",
    "tv_orders",
    "samples",
    "truncation",
    "pair_n",
    "single_n",
    "output",
    "format",
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permprod",
        description="Cycle statistics of products of invariant random permutations.",
    )
    sub = parser.add_subparsers(dest="command")
    for command in _COMMANDS:
        p = sub.add_parser(command)
        p.add_argument("--config", help="key = value config file; flags override")
        p.add_argument("--seed", type=int)
        p.add_argument("--samplers", help="comma-separated sampler descriptors")
        p.add_argument("--n", type=int)
        p.add_argument("--n-grid", dest="n_grid", help="comma-separated sizes")
        p.add_argument("--v-vec", dest="v_vec", help="comma-separated cycle lengths")
        p.add_argument("--functionals", help="comma-separated functional descriptors")
        p.add_argument("--tv-orders", dest="tv_orders", help="comma-separated joint orders")
        p.add_argument("--samples", type=int)
        p.add_argument("--truncation", type=int)
        p.add_argument("--pair-n", dest="pair_n", type=int)
        p.add_argument("--single-n", dest="single_n", type=int)
        p.add_argument("--output")
        p.add_argument("--format", choices=("csv", "json"))
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    mapping: dict[str, str] = {}
    if args.config:
        mapping.update(_mapping_from_text(Path(args.config).read_text()))
    for key in _FLAG_KEYS:
        value = getattr(args, key)
        if value is not None:
            mapping[key] = str(value)
    if "command" in mapping and mapping["command"] != args.command:
        raise ConfigError(
            f"command: config file says {mapping['command']!r} but the "
            f"subcommand is {args.command!r}"
        )
    mapping["command"] = args.command
    return config_from_mapping(mapping)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        config = _config_from_args(args)
        return run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
