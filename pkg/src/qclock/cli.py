"""Command-line experiment runner.

Subcommands: qfi, protocol, wstate, montecarlo, sweep, compare-average,
oracle-check.  Every run prints a one-line summary to stdout and writes the
requested report (CSV by default, JSON with --format json) to --output, or
prints it below the summary when no output path is given.  Fixed seeds make
every report byte-identical across runs.

Exit codes: 0 success, 2 configuration/usage error, 3 internal invariant
violation (an oracle cross-check failed).
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, OracleMismatchError, QClockError
from .estimation import identifiability_window, monte_carlo_deviation
from .fock import (
    PhysicalParams,
    fidelity_global_phase,
    prepare_average_state,
    prepare_noon,
    prepare_w,
)
from .metrology import (
    average_qfi,
    crb,
    mt_average_bound,
    noon_qfi,
    ren2012_reference,
)
from .oracle import (
    oracle_fidelity_with_fock,
    oracle_operation_protocol,
    oracle_w_conditional,
)
from .protocols import (
    ClockTopology,
    closed_form_final,
    run_operation_triggered,
    run_w_protocol_sampled,
    w_conditional_probability,
)
from .report import rows_to_csv, to_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3

EXPERIMENTS = (
    "qfi",
    "protocol",
    "wstate",
    "montecarlo",
    "sweep",
    "compare-average",
    "oracle-check",
)

# spacing between per-point seed blocks in sweeps; each Monte-Carlo trial t
# uses stream seed_base + t, so blocks never overlap for trials below this
SWEEP_SEED_STRIDE = 1_000_000


@dataclass
class ExperimentConfig:
    """Merged run configuration (defaults < config file < command line)."""

    experiment: str
    probe: str = "noon"
    d: tuple[int, ...] = (1,)
    n: tuple[int, ...] = (1,)
    omega: float = 1.0
    thetas: tuple[float, ...] | None = None
    shots: int = 1000
    trials: int = 200
    seed: int = 1
    output: str | None = None
    format: str = "csv"
    plot: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.probe not in ("noon", "average", "w"):
            raise ConfigError(f"unknown probe {self.probe!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        for name in ("d", "n"):
            values = getattr(self, name)
            if not values or any(v < 1 for v in values):
                raise ConfigError(f"{name} entries must be integers >= 1: {values}")
        for name in ("shots", "trials"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if not self.omega > 0:
            raise ConfigError(f"omega must be positive, got {self.omega}")

    @property
    def params(self) -> PhysicalParams:
        return PhysicalParams(self.omega)

    def scalar(self, name: str) -> int:
        values = getattr(self, name)
        if len(values) != 1:
            raise ConfigError(f"{name} must be a single value here, got {values}")
        return values[0]


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated reals, got {text!r}") from exc


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


_FIELD_PARSERS = {
    "experiment": str,
    "probe": str,
    "d": _parse_int_list,
    "n": _parse_int_list,
    "omega": float,
    "thetas": _parse_float_list,
    "shots": int,
    "trials": int,
    "seed": int,
    "output": str,
    "format": str,
    "plot": _parse_bool,
}


def _read_config_file(path: str) -> dict:
    """Flat key = value file with ExperimentConfig field names as keys."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    raw = dict(parser["config"])
    known = {f.name for f in dataclass_fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {sorted(unknown)}")
    return raw


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qclock",
        description="Clock-synchronization protocol simulations and precision reports.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--probe", choices=("noon", "average", "w"))
    common.add_argument("--d", help="node count(s) d, comma separated")
    common.add_argument("--n", help="qubits per node n, comma separated")
    common.add_argument("--omega", type=float, help="transition frequency")
    common.add_argument("--theta", dest="thetas",
                        help="true clock offset(s), comma separated")
    common.add_argument("--shots", type=int, help="measurement shots per trial")
    common.add_argument("--trials", type=int, help="Monte-Carlo trials")
    common.add_argument("--seed", type=int, help="base RNG seed")
    common.add_argument("--output", help="report file path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="report format")
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--plot", action="store_true", default=None,
                        help="also render a PNG figure next to the report")

    sub = parser.add_subparsers(dest="experiment", required=True)
    descriptions = {
        "qfi": "quantum Fisher information and Cramer-Rao bound for a probe",
        "protocol": "run the operation-triggered protocol, emit the event transcript",
        "wstate": "measurement-triggered W protocol: analytic vs sampled conditionals",
        "montecarlo": "end-to-end estimation trials for one configuration",
        "sweep": "Monte-Carlo deviation across probe sizes with a log-log slope fit",
        "compare-average": "average-offset precision bounds for both protocol variants",
        "oracle-check": "cross-validate Fock results against the dense qubit oracle",
    }
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common], help=descriptions[name])
    return parser


def merge_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        for key, raw in _read_config_file(args.config).items():
            values[key] = _FIELD_PARSERS[key](raw)
    for field in _FIELD_PARSERS:
        cli_value = getattr(args, field, None)
        if cli_value is not None:
            parse = _FIELD_PARSERS[field]
            values[field] = parse(cli_value)
    values["experiment"] = args.experiment  # the subcommand always wins
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _emit(cfg: ExperimentConfig, text: str, summary: str, figure=None) -> None:
    """Print the summary, write or print the report, optionally render a figure."""
    print(summary)
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    if cfg.plot:
        if figure is None:
            print("plot: no figure defined for this experiment", file=sys.stderr)
            return
        base = Path(cfg.output) if cfg.output else Path("qclock_report")
        path = str(base.with_suffix(".png"))
        figure(path)
        print(f"figure written to {path}")


def _json_config(cfg: ExperimentConfig) -> dict:
    return {
        "experiment": cfg.experiment,
        "probe": cfg.probe,
        "d": list(cfg.d),
        "n": list(cfg.n),
        "omega": cfg.omega,
        "thetas": list(cfg.thetas) if cfg.thetas is not None else None,
        "shots": cfg.shots,
        "trials": cfg.trials,
        "seed": cfg.seed,
    }


def _report_text(cfg: ExperimentConfig, rows: list[dict], result: dict) -> str:
    if cfg.format == "json":
        return to_json({"experiment": cfg.experiment,
                        "config": _json_config(cfg),
                        "result": result})
    return rows_to_csv(rows)


def _probe_tuple(cfg: ExperimentConfig):
    """(probe descriptor, d, n, N) for the two estimation probes."""
    if cfg.probe == "noon":
        n = cfg.scalar("n")
        return ("noon", n), 1, n, 2 * n
    if cfg.probe == "average":
        d = cfg.scalar("d")
        n = cfg.scalar("n")
        return ("average", d, n), d, n, 2 * d * n
    raise ConfigError("this experiment needs --probe noon or --probe average")


def _default_theta(probe, params: PhysicalParams) -> float:
    # quarter of the identifiability half-window: s*theta = pi/4, far from
    # both the wrap-around and the deterministic readout points
    return identifiability_window(probe, params) / 4.0


def _montecarlo_point(cfg: ExperimentConfig, probe, theta: float, seed: int):
    result = monte_carlo_deviation(
        probe, cfg.params, theta, cfg.shots, cfg.trials, seed
    )
    _, d, n, total = _probe_tuple(cfg)
    qfi = noon_qfi(n, cfg.params) if probe[0] == "noon" else average_qfi(d, n, cfg.params)
    row = {
        "experiment": cfg.experiment,
        "probe": cfg.probe,
        "d": d,
        "n": n,
        "N": total,
        "omega": cfg.omega,
        "theta_true": theta,
        "shots": cfg.shots,
        "trials": cfg.trials,
        "qfi": qfi,
        "crb": result.crb,
        "empirical_dev": result.empirical_dev,
        "ratio": result.empirical_dev / result.crb,
    }
    return result, row


def cmd_qfi(cfg: ExperimentConfig) -> int:
    if cfg.probe == "w":
        raise ConfigError(
            "the W probe has no single-offset QFI family; see wstate/compare-average"
        )
    probe, d, n, total = _probe_tuple(cfg)
    qfi = noon_qfi(n, cfg.params) if probe[0] == "noon" else average_qfi(d, n, cfg.params)
    bound = crb(qfi, 1)
    row = {
        "experiment": "qfi",
        "probe": cfg.probe,
        "d": d,
        "n": n,
        "N": total,
        "omega": cfg.omega,
        "qfi": qfi,
        "crb": bound,
    }
    summary = (
        f"qfi: probe={cfg.probe} d={d} n={n} omega={cfg.omega:.12g} "
        f"F_Q={qfi:.12g} crb={bound:.12g}"
    )
    result = {"qfi": qfi, "crb": bound, "N": total}
    _emit(cfg, _report_text(cfg, [row], result), summary)
    return EXIT_OK


def _protocol_probe(cfg: ExperimentConfig):
    if cfg.probe == "noon":
        return prepare_noon(cfg.scalar("n")), 1
    if cfg.probe == "average":
        d = cfg.scalar("d")
        return prepare_average_state(d, cfg.scalar("n")), d
    d = cfg.scalar("d")
    return prepare_w(d), d


def cmd_protocol(cfg: ExperimentConfig) -> int:
    initial, d = _protocol_probe(cfg)
    thetas = cfg.thetas
    if thetas is None:
        thetas = tuple(0.1 * k for k in range(1, d + 1))  # demo offsets
    if len(thetas) == 1 and d > 1:
        thetas = thetas * d
    if len(thetas) != d:
        raise ConfigError(f"need {d} offsets for d={d}, got {len(thetas)}")
    top = ClockTopology(initial.caps, cfg.params, thetas)
    transcript = run_operation_triggered(top, initial)
    fidelity = fidelity_global_phase(
        transcript.final_state, closed_form_final(top, initial)
    )
    if fidelity < 1.0 - 1e-10:
        raise OracleMismatchError(
            f"event engine disagrees with the closed form: fidelity {fidelity!r}"
        )
    summary = (
        f"protocol: probe={cfg.probe} d={d} events={len(transcript.events)} "
        f"fidelity_vs_closed_form={fidelity:.12g}"
    )
    if cfg.format == "json":
        result = {
            "events": [
                {"time": t, "event": kind, "node": node, "detail": detail}
                for t, kind, node, detail in transcript.events
            ],
            "fidelity_vs_closed_form": fidelity,
        }
        text = _report_text(cfg, [], result)
    else:
        # the transcript's natural delimited form is the tab-separated log
        text = transcript.to_log()
    _emit(cfg, text, summary)
    return EXIT_OK


def cmd_wstate(cfg: ExperimentConfig) -> int:
    if cfg.probe not in ("w",):
        cfg.probe = "w"  # wstate is always the W probe
    d = cfg.scalar("d")
    thetas = cfg.thetas
    if thetas is None:
        thetas = (0.0,) * d
    if len(thetas) == 1 and d > 1:
        thetas = thetas * d
    if len(thetas) != d:
        raise ConfigError(f"need {d} offsets for d={d}, got {len(thetas)}")
    counts = run_w_protocol_sampled(d, cfg.params, thetas, cfg.shots, cfg.seed)
    rows = []
    nodes = []
    worst = 0.0
    for i, theta in enumerate(thetas, start=1):
        p_plus, _ = w_conditional_probability(d, cfg.params, theta)
        freq = (
            counts.plus_given_plus[i - 1] / counts.node0_plus
            if counts.node0_plus
            else None
        )
        dev = abs(freq - p_plus) if freq is not None else None
        if dev is not None:
            worst = max(worst, dev)
        rows.append(
            {
                "experiment": "wstate",
                "probe": "w",
                "d": d,
                "n": 1,
                "N": d + 1,
                "omega": cfg.omega,
                "theta_true": theta,
                "shots": cfg.shots,
                "empirical_dev": dev,
                "ratio": freq,
            }
        )
        nodes.append(
            {"node": i, "theta": theta, "p_plus": p_plus, "freq_plus": freq, "dev": dev}
        )
    summary = (
        f"wstate: d={d} shots={cfg.shots} node0_plus={counts.node0_plus} "
        f"max|freq-analytic|={worst:.6g}"
    )
    result = {
        "node0_plus": counts.node0_plus,
        "node0_minus": counts.node0_minus,
        "nodes": nodes,
    }

    def figure(path):
        from .figures import plot_wstate

        plot_wstate(rows, cfg.omega, path)

    _emit(cfg, _report_text(cfg, rows, result), summary, figure)
    return EXIT_OK


def cmd_montecarlo(cfg: ExperimentConfig) -> int:
    probe, _, _, _ = _probe_tuple(cfg)
    if cfg.thetas is not None and len(cfg.thetas) != 1:
        raise ConfigError("montecarlo takes a single --theta")
    theta = cfg.thetas[0] if cfg.thetas else _default_theta(probe, cfg.params)
    result, row = _montecarlo_point(cfg, probe, theta, cfg.seed)
    summary = (
        f"montecarlo: probe={cfg.probe} theta={theta:.12g} shots={cfg.shots} "
        f"trials={cfg.trials} dev={result.empirical_dev:.12g} crb={result.crb:.12g} "
        f"ratio={result.empirical_dev / result.crb:.6g}"
    )

    def figure(path):
        from .figures import plot_montecarlo

        plot_montecarlo(result, path)

    _emit(cfg, _report_text(cfg, [row], result.to_json_dict()), summary, figure)
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig) -> int:
    if cfg.probe == "w":
        raise ConfigError("sweep needs --probe noon or --probe average")
    if cfg.thetas is not None and len(cfg.thetas) != 1:
        raise ConfigError("sweep takes at most a single --theta, applied to all points")
    rows = []
    points = []
    for index, n in enumerate(cfg.n):
        point_cfg = ExperimentConfig(
            experiment="sweep",
            probe=cfg.probe,
            d=cfg.d,
            n=(n,),
            omega=cfg.omega,
            thetas=cfg.thetas,
            shots=cfg.shots,
            trials=cfg.trials,
            seed=cfg.seed,
            format=cfg.format,
        )
        probe, _, _, _ = _probe_tuple(point_cfg)
        theta = cfg.thetas[0] if cfg.thetas else _default_theta(probe, cfg.params)
        seed = cfg.seed + (index + 1) * SWEEP_SEED_STRIDE
        result, row = _montecarlo_point(point_cfg, probe, theta, seed)
        rows.append(row)
        points.append(row)
    if len(points) >= 2:
        slope = float(
            np.polyfit(
                np.log([p["N"] for p in points]),
                np.log([p["empirical_dev"] for p in points]),
                1,
            )[0]
        )
    else:
        slope = None
    # trailing fit row: empty size columns, fitted log-log slope in `ratio`
    rows.append(
        {
            "experiment": "sweep",
            "probe": cfg.probe,
            "omega": cfg.omega,
            "shots": cfg.shots,
            "trials": cfg.trials,
            "ratio": slope,
        }
    )
    slope_text = "n/a" if slope is None else f"{slope:.6g}"
    summary = (
        f"sweep: probe={cfg.probe} points={len(points)} shots={cfg.shots} "
        f"trials={cfg.trials} slope={slope_text}"
    )
    result = {
        "points": [
            {
                "n": p["n"],
                "N": p["N"],
                "theta_true": p["theta_true"],
                "empirical_dev": p["empirical_dev"],
                "crb": p["crb"],
            }
            for p in points
        ],
        "slope": slope,
    }

    def figure(path):
        from .figures import plot_sweep

        plot_sweep(points, slope if slope is not None else float("nan"), path)

    _emit(cfg, _report_text(cfg, rows, result), summary, figure)
    return EXIT_OK


def cmd_compare_average(cfg: ExperimentConfig) -> int:
    if cfg.probe not in ("average",):
        cfg.probe = "average"  # this comparison is about the average-offset probe
    n = cfg.scalar("n")
    rows = []
    for d in cfg.d:
        total = 2 * d * n
        qfi = average_qfi(d, n, cfg.params)
        bound = crb(qfi, 1)
        mt = mt_average_bound(d, total, cfg.params)
        rows.append(
            {
                "experiment": "compare-average",
                "probe": "average",
                "d": d,
                "n": n,
                "N": total,
                "omega": cfg.omega,
                "qfi": qfi,
                "crb": bound,
                "mt_bound": mt,
                "ren2012": ren2012_reference(d, total, cfg.params),
                "ratio": mt / bound,
            }
        )
    summary = (
        f"compare-average: n={n} d={','.join(str(d) for d in cfg.d)} "
        f"ratio=sqrt(d) advantage for the operation-triggered bound"
    )
    result = {"rows": rows}

    def figure(path):
        from .figures import plot_compare_average

        plot_compare_average(rows, path)

    _emit(cfg, _report_text(cfg, rows, result), summary, figure)
    return EXIT_OK


# deterministic offsets used for the protocol cross-checks: theta_k = 0.3 + 0.2(k-1)
def _check_offsets(d: int) -> tuple[float, ...]:
    return tuple(0.3 + 0.2 * (k - 1) for k in range(1, d + 1))


def cmd_oracle_check(cfg: ExperimentConfig) -> int:
    rows = []
    failures = []

    # Fock-level analytic conditionals vs the dense pipeline
    deltas = [round(0.1 * j, 10) for j in range(32)]  # 0.0, 0.1, ..., 3.1
    for d in range(1, 13):
        worst = 0.0
        for delta in deltas:
            analytic, _ = w_conditional_probability(d, cfg.params, delta)
            dense = oracle_w_conditional(d, cfg.params, delta)
            worst = max(worst, abs(dense - analytic))
        if worst > 1e-12:
            failures.append(f"w-conditional d={d}: |dense-analytic|={worst:.3g}")
        rows.append(
            {
                "experiment": "oracle-check",
                "probe": "w",
                "d": d,
                "n": 1,
                "N": d + 1,
                "omega": cfg.omega,
                "empirical_dev": worst,
            }
        )

    # full protocol runs, sparse Fock engine vs dense qubit oracle
    protocol_cases = [
        ("noon", prepare_noon(1), 1, 1),
        ("noon", prepare_noon(2), 1, 2),
        ("average", prepare_average_state(2, 1), 2, 1),
        ("average", prepare_average_state(3, 1), 3, 1),
    ]
    for probe_name, initial, d, n in protocol_cases:
        top = ClockTopology(initial.caps, cfg.params, _check_offsets(d))
        fock_final = run_operation_triggered(top, initial).final_state
        dense_final = oracle_operation_protocol(top, initial)
        fidelity = oracle_fidelity_with_fock(dense_final, fock_final)
        if fidelity < 1.0 - 1e-10:
            failures.append(f"protocol {probe_name} d={d} n={n}: fidelity={fidelity!r}")
        rows.append(
            {
                "experiment": "oracle-check",
                "probe": probe_name,
                "d": d,
                "n": n,
                "N": sum(initial.caps),
                "omega": cfg.omega,
                "empirical_dev": 1.0 - fidelity,
            }
        )

    status = "ok" if not failures else "MISMATCH"
    summary = f"oracle-check: {len(rows)} checks, status={status}"
    result = {"checks": len(rows), "status": status, "failures": failures}
    _emit(cfg, _report_text(cfg, rows, result), summary)
    if failures:
        for line in failures:
            print(f"oracle-check failure: {line}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


_HANDLERS = {
    "qfi": cmd_qfi,
    "protocol": cmd_protocol,
    "wstate": cmd_wstate,
    "montecarlo": cmd_montecarlo,
    "sweep": cmd_sweep,
    "compare-average": cmd_compare_average,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors, 0 for --help
        return int(exc.code or 0)
    try:
        cfg = merge_config(args)
        return _HANDLERS[cfg.experiment](cfg)
    except OracleMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (QClockError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
