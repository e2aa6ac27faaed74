"""Batch front end: design, analyze, ambiguity, compare, and oracle jobs.

Every command reads flags (optionally backed by a JSON config file whose
keys mirror the flag names; explicit flags win), runs deterministically from
the supplied seeds, and writes its artifacts (sequence files, JSON reports,
CSV traces/grids) into the output directory. Exit status is 0 only when all
requested artifacts were written.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .metrics import (
    Aggregation,
    ambiguity,
    cost_function,
    cross_correlate,
    full_delay_grid,
    report_to_dict,
    total_ambiguity,
    write_ambiguity_csv,
    write_correlation_csv,
    write_report,
)
from .optimizer import (
    SwarmConfig,
    exhaustive_search,
    run_acc_pso,
    run_baseline_ga,
    run_baseline_pso,
    write_trace_csv,
)
from .waveform import (
    WaveformKind,
    derive_params,
    read_sequence_file,
    synthesize,
    write_sequence_file,
)

AGGREGATIONS = {"paper-min": Aggregation.MIN, "worst-case": Aggregation.MAX}
ALGORITHMS = {
    "acc_pso": run_acc_pso,
    "pso": run_baseline_pso,
    "ga": run_baseline_ga,
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON file mirroring the flags")
    parser.add_argument("--waveform", choices=["fh", "lfm", "mlfm"])
    parser.add_argument("--lambda", dest="lam", type=float)
    parser.add_argument("--aggregation", choices=sorted(AGGREGATIONS))
    parser.add_argument("--oversample", type=float)
    parser.add_argument("--out", type=Path)


def _add_swarm(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seeds", help="comma-separated integer seeds")
    parser.add_argument("--iterations", type=int)
    parser.add_argument("--swarm-size", dest="swarm_size", type=int)
    parser.add_argument(
        "--stagnation-window", dest="stagnation_window", type=int
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfcw",
        description="Design and analyze orthogonal frequency-coded waveform sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="search for a low-sidelobe waveform set")
    _add_common(p)
    _add_swarm(p)
    p.add_argument("--n", type=int)
    p.add_argument("--antennas", type=int)
    p.add_argument("--warm-start", dest="warm_start", type=Path)

    p = sub.add_parser("analyze", help="score an existing sequence file")
    p.add_argument("sequence_file", type=Path)
    _add_common(p)

    p = sub.add_parser("ambiguity", help="delay/Doppler maps for a sequence file")
    p.add_argument("sequence_file", type=Path)
    _add_common(p)
    p.add_argument("--delay-count", dest="delay_count", type=int)
    p.add_argument("--doppler-count", dest="doppler_count", type=int)
    p.add_argument(
        "--doppler-span",
        dest="doppler_span",
        type=float,
        help="max |f_d| in normalized units (cycles per reference duration)",
    )
    p.add_argument("--doppler-norm", dest="doppler_norm", type=float)
    p.add_argument(
        "--doppler-ref", dest="doppler_ref", choices=["total", "subpulse"]
    )

    p = sub.add_parser("compare", help="budget-matched algorithm comparison sweep")
    _add_common(p)
    _add_swarm(p)
    p.add_argument("--n", help="comma-separated sequence lengths")
    p.add_argument("--antennas", help="comma-separated set sizes")
    p.add_argument("--budget", type=int, help="cost evaluations per run")

    p = sub.add_parser("oracle", help="exhaustive optimum for a tiny instance")
    _add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--antennas", type=int)

    return parser


class Settings:
    """Flag values merged over the JSON config file, flags winning."""

    def __init__(self, args: argparse.Namespace):
        self._args = vars(args)
        self._file = {}
        config = self._args.get("config")
        if config is not None:
            raw = json.loads(Path(config).read_text())
            if not isinstance(raw, dict):
                raise ValueError(f"{config}: config must be a JSON object")
            self._file = {k.replace("-", "_"): v for k, v in raw.items()}

    def get(self, key, default=None):
        value = self._args.get(key)
        if value is None:
            value = self._file.get(key, default)
        return value

    def require(self, key):
        value = self.get(key)
        if value is None:
            raise ValueError(f"missing required setting --{key.replace('_', '-')}")
        return value


def _int_list(value) -> list[int]:
    if isinstance(value, int):
        return [value]
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(tok) for tok in str(value).replace(",", " ").split()]


def _out_dir(settings: Settings) -> Path:
    out = Path(settings.require("out"))
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write_probe"
    try:
        probe.write_text("")
    finally:
        probe.unlink(missing_ok=True)
    return out


def _kind(settings: Settings) -> WaveformKind:
    return WaveformKind(settings.require("waveform"))


def _aggregation(settings: Settings) -> Aggregation:
    return AGGREGATIONS[settings.get("aggregation", "paper-min")]


def _swarm_config(settings: Settings, seed: int, iterations=None) -> SwarmConfig:
    defaults = SwarmConfig()
    return SwarmConfig(
        swarm_size=int(settings.get("swarm_size", defaults.swarm_size)),
        max_iterations=int(
            iterations
            if iterations is not None
            else settings.get("iterations", defaults.max_iterations)
        ),
        lam=float(settings.get("lam", defaults.lam)),
        aggregation=_aggregation(settings),
        rng_seed=seed,
        stagnation_window=int(
            settings.get("stagnation_window", defaults.stagnation_window)
        ),
    )


def _db_str(value: float) -> str:
    return f"{value:.2f}" if math.isfinite(value) else str(value)


def _print_matrix(matrix: np.ndarray) -> None:
    n = matrix.shape[0]
    header = "".join(f"{f'Code{q + 1}':>12}" for q in range(n))
    print(" " * 8 + header)
    for p in range(n):
        row = "".join(f"{matrix[p, q]:>12.4g}" for q in range(n))
        print(f"{f'Code{p + 1}':<8}" + row)


def _print_report(report) -> None:
    print("ASP (diagonal) / CP (off-diagonal), linear:")
    _print_matrix(report.matrix)
    asp = float(report.pslr_db.min())
    print("per-code ASP dB:", ", ".join(_db_str(v) for v in report.pslr_db))
    if report.matrix.shape[0] > 1:
        off = report.cp_db[~np.eye(report.matrix.shape[0], dtype=bool)]
        print(f"best ASP {_db_str(asp)} dB, best CP {_db_str(off.min())} dB")
    else:
        print(f"best ASP {_db_str(asp)} dB")


def _best_db(report) -> tuple[float, float]:
    """Best (most negative) diagonal and off-diagonal entries in dB."""
    asp = float(report.pslr_db.min())
    n = report.matrix.shape[0]
    if n > 1:
        cp = float(report.cp_db[~np.eye(n, dtype=bool)].min())
    else:
        cp = float("-inf")
    return asp, cp


def cmd_design(settings: Settings) -> int:
    kind = _kind(settings)
    n = int(settings.require("n"))
    antennas = int(settings.require("antennas"))
    seeds = _int_list(settings.require("seeds"))
    if not seeds:
        raise ValueError("need at least one seed")
    out = _out_dir(settings)
    oversample = float(settings.get("oversample", 2.0))
    params = derive_params(n, antennas, kind, oversample)
    warm = settings.get("warm_start")
    warm_start = read_sequence_file(warm) if warm else None

    runs = []
    for seed in seeds:
        config = _swarm_config(settings, seed)
        result = run_acc_pso(params, config, warm_start=warm_start)
        base = f"{kind.value}_n{n}_l{antennas}_seed{seed}"
        seq_path = out / f"design_{base}.seq"
        write_sequence_file(
            seq_path,
            result.best_sequences,
            header=f"designed set kind={kind.value} n={n} l={antennas} seed={seed}",
        )
        report_path = out / f"report_{base}.json"
        write_report(report_path, result.best_report)
        trace_path = out / f"trace_{base}.csv"
        write_trace_csv(trace_path, result, config.swarm_size)
        runs.append(
            {
                "seed": seed,
                "cost": result.best_cost,
                "iterations": int(result.cost_trace.size),
                "evaluations": result.evaluations,
                "sequences": str(seq_path.name),
                "report": str(report_path.name),
                "trace": str(trace_path.name),
            }
        )
        print(f"seed {seed}: cost {result.best_cost:.4f} "
              f"({result.cost_trace.size} iterations)")
        _print_report(result.best_report)

    best = min(runs, key=lambda r: (r["cost"], r["seed"]))
    summary = {
        "command": "design",
        "params": params.to_dict(),
        "lambda": float(settings.get("lam", SwarmConfig().lam)),
        "aggregation": settings.get("aggregation", "paper-min"),
        "best_seed": best["seed"],
        "best_cost": best["cost"],
        "runs": runs,
    }
    (out / f"summary_{kind.value}_n{n}_l{antennas}.json").write_text(
        json.dumps(summary, indent=2) + "\n"
    )
    print(f"best seed {best['seed']} (cost {best['cost']:.4f}); artifacts in {out}")
    return 0


def _load_set(settings: Settings):
    path = Path(settings.require("sequence_file"))
    seqs = read_sequence_file(path)
    kind = _kind(settings)
    oversample = float(settings.get("oversample", 2.0))
    params = derive_params(len(seqs[0]), len(seqs), kind, oversample)
    waves = [synthesize(s, params) for s in seqs]
    return seqs, params, waves


def cmd_analyze(settings: Settings) -> int:
    _, params, waves = _load_set(settings)
    out = _out_dir(settings)
    lam = float(settings.get("lam", SwarmConfig().lam))
    _, report = cost_function(waves, lam, _aggregation(settings))
    stem = Path(settings.require("sequence_file")).stem
    write_report(out / f"report_{stem}.json", report)
    for p in range(len(waves)):
        for q in range(p, len(waves)):
            corr = cross_correlate(waves[p], waves[q])
            write_correlation_csv(out / f"corr_{stem}_{p + 1}_{q + 1}.csv", corr)
    _print_report(report)
    print(f"artifacts in {out}")
    return 0


def cmd_ambiguity(settings: Settings) -> int:
    _, params, waves = _load_set(settings)
    out = _out_dir(settings)
    stem = Path(settings.require("sequence_file")).stem

    ref_duration = (
        params.subpulse_duration
        if settings.get("doppler_ref", "total") == "subpulse"
        else params.total_duration
    )
    delay_count = int(settings.get("delay_count", 201))
    doppler_count = int(settings.get("doppler_count", 61))
    doppler_span = float(settings.get("doppler_span", 0.5))
    norm = float(settings.get("doppler_norm", 0.031))

    full = full_delay_grid(waves[0])
    if delay_count >= full.size:
        delays = full
    else:
        idx = np.unique(np.rint(np.linspace(0, full.size - 1, delay_count)).astype(int))
        delays = full[idx]
    if doppler_count == 1:
        dopplers = np.array([0.0])
    else:
        dopplers = np.linspace(-doppler_span, doppler_span, doppler_count) / ref_duration

    for p, w in enumerate(waves):
        surface = ambiguity(w, delays, dopplers)
        write_ambiguity_csv(out / f"ambiguity_{stem}_partial_{p + 1}.csv", surface)
    surface = total_ambiguity(waves, delays, dopplers)
    write_ambiguity_csv(out / f"ambiguity_{stem}_total.csv", surface)

    probe = ambiguity(waves[0], full, [norm / ref_duration])
    peak = float(probe.magnitude.max())
    print(
        f"matched-filter peak at normalized Doppler {norm} "
        f"({settings.get('doppler_ref', 'total')} duration reference): "
        f"{peak:.6f} ({_db_str(20 * math.log10(peak))} dB)"
    )
    print(f"artifacts in {out}")
    return 0


def cmd_compare(settings: Settings) -> int:
    kind = _kind(settings)
    lengths = _int_list(settings.require("n"))
    antenna_counts = _int_list(settings.require("antennas"))
    seeds = _int_list(settings.require("seeds"))
    budget = int(settings.get("budget", 20000))
    out = _out_dir(settings)
    oversample = float(settings.get("oversample", 2.0))
    swarm_size = int(settings.get("swarm_size", SwarmConfig().swarm_size))
    iterations = max(1, budget // swarm_size)

    rows = ["algorithm,n,l,seed,final_asp_db,final_cp_db,evaluations"]
    for n in lengths:
        for antennas in antenna_counts:
            params = derive_params(n, antennas, kind, oversample)
            for seed in seeds:
                for name, runner in ALGORITHMS.items():
                    config = _swarm_config(settings, seed, iterations=iterations)
                    result = runner(params, config)
                    asp, cp = _best_db(result.best_report)
                    rows.append(
                        f"{name},{n},{antennas},{seed},"
                        f"{asp!r},{cp!r},{result.evaluations}"
                    )
                    trace_path = (
                        out
                        / f"compare_{name}_{kind.value}_n{n}_l{antennas}_seed{seed}.csv"
                    )
                    write_trace_csv(trace_path, result, config.swarm_size)
                    print(
                        f"{name:>8} n={n} l={antennas} seed={seed}: "
                        f"cost {result.best_cost:.4f}, ASP {_db_str(asp)} dB, "
                        f"CP {_db_str(cp)} dB, {result.evaluations} evaluations"
                    )
    summary = out / f"compare_summary_{kind.value}.csv"
    summary.write_text("\n".join(rows) + "\n")
    print(f"summary written to {summary}")
    return 0


def cmd_oracle(settings: Settings) -> int:
    kind = _kind(settings)
    n = int(settings.require("n"))
    antennas = int(settings.require("antennas"))
    out = _out_dir(settings)
    oversample = float(settings.get("oversample", 2.0))
    lam = float(settings.get("lam", SwarmConfig().lam))
    params = derive_params(n, antennas, kind, oversample)
    result = exhaustive_search(params, lam, _aggregation(settings))

    base = f"oracle_{kind.value}_n{n}_l{antennas}"
    write_sequence_file(
        out / f"{base}.seq",
        result.best_sequences,
        header=f"exhaustive optimum kind={kind.value} n={n} l={antennas}",
    )
    summary = {
        "command": "oracle",
        "params": params.to_dict(),
        "lambda": lam,
        "aggregation": settings.get("aggregation", "paper-min"),
        "best_cost": result.best_cost,
        "evaluations": result.evaluations,
        "sequences": [s.codes.tolist() for s in result.best_sequences],
        "report": report_to_dict(result.best_report),
    }
    (out / f"{base}.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(
        f"optimum cost {result.best_cost:.4f} after {result.evaluations} evaluations"
    )
    _print_report(result.best_report)
    return 0


COMMANDS = {
    "design": cmd_design,
    "analyze": cmd_analyze,
    "ambiguity": cmd_ambiguity,
    "compare": cmd_compare,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = Settings(args)
        return COMMANDS[args.command](settings)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
