"""``scramble-verify`` command line runner.

Each command writes a per-run CSV to ``--out`` and, for sweeps, a per-cell
summary CSV next to it (``<out stem>.agg.csv``). ``otoc-check`` writes a JSON
report. Floats are written with 12 significant digits; an undefined fidelity
is written as ``nan`` with ``F_defined = 0``.

Exit codes: 0 success, 1 invariant or oracle failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .circuits import ScramblerSpec, build_classical_scrambler, build_grover_scrambler
from .circuits import build_identity_control, build_scrambler, random_clifford
from .errors import ConfigError, DomainError, ScrambleVerifyError
from .metrics import BOUND_CAVEAT, aggregate, noise_factor, otoc_bound
from .noisemodel import NoiseConfig, preset
from .otoc import D_A, average_otoc
from .protocol import INPUT_LABELS, ProtocolConfig, SweepRow, ideal_table, state_grid, sweep

log = logging.getLogger("scramble_verify")

COMMANDS = ("mismatch-sweep", "alpha-sweep", "pairs", "classical", "grover", "otoc-check")
EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2

DEFAULT_THETA_GRID = (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2)
DEFAULT_ALPHA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_GROVER_STATES = ("0z", "0x", "0y")
OTOC_TOL = 1e-9

# shared per-run columns appended when shot emulation is on
SHOT_COLUMNS = ["shots", "successes", "P_hat", "P_ci95"]


@dataclass
class ExperimentConfig:
    """Flat settings document; every key can be overridden by a CLI flag."""

    experiment: str = "pairs"
    theta_grid: list = field(default_factory=lambda: list(DEFAULT_THETA_GRID))
    alpha_grid: list = field(default_factory=lambda: list(DEFAULT_ALPHA_GRID))
    pair: int = 1
    noise_preset: str = "ideal"
    depol_1q: float | None = None
    depol_2q: float | None = None
    readout_flip: float | None = None
    mismatch_axis: str = "x"
    states: list = field(default_factory=lambda: list(DEFAULT_GROVER_STATES))
    n_random: int = 20
    out: str | None = None
    seed: int | None = None
    shots: int | None = None
    workers: int = 1
    corrupt_weighting: bool = False

    def __post_init__(self):
        if self.experiment not in COMMANDS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {COMMANDS}")
        for name in ("theta_grid", "alpha_grid", "states"):
            if not list(getattr(self, name)):
                raise ConfigError(f"{name} must be nonempty")
        self.theta_grid = [float(t) for t in self.theta_grid]
        self.alpha_grid = [float(a) for a in self.alpha_grid]
        if not all(0 <= t < 2 * math.pi for t in self.theta_grid):
            raise ConfigError("theta grid values must lie in [0, 2pi)")
        if not all(0 <= a <= 1 for a in self.alpha_grid):
            raise ConfigError("alpha grid values must lie in [0, 1]")
        if self.pair not in (0, 1, 2):
            raise ConfigError(f"pair must be 0, 1 or 2, got {self.pair}")
        bad = set(self.states) - set(INPUT_LABELS)
        if bad:
            raise ConfigError(f"unknown input states {sorted(bad)}")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots must be a positive integer")
        if self.n_random < 20:
            raise ConfigError("otoc-check needs at least 20 random Clifford scramblers")
        stochastic = self.shots is not None or self.experiment == "otoc-check"
        if stochastic and self.seed is None:
            raise ConfigError(f"a seed is required for {self.experiment} with these options")
        try:
            self.noise()
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def noise(self) -> NoiseConfig:
        base = preset(self.noise_preset)
        overrides = {
            k: getattr(self, k) for k in ("depol_1q", "depol_2q", "readout_flip") if getattr(self, k) is not None
        }
        return base.replace(mismatch_axis=self.mismatch_axis, **overrides)

    def output_path(self) -> Path:
        if self.out:
            return Path(self.out)
        suffix = ".json" if self.experiment == "otoc-check" else ".csv"
        return Path(self.experiment + suffix)


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else f"{float(value):.12g}"
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    try:
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def agg_path(path: Path) -> Path:
    return path.with_name(path.stem + ".agg.csv")


def _run_rows(cfg: ExperimentConfig, configs: list[ProtocolConfig]) -> list[SweepRow]:
    rows = sweep(configs, workers=cfg.workers)
    for row in rows:
        if not row.ok:
            log.error("run failed for %s: %s", row.config, row.error)
    return rows


def _shots(cfg: ExperimentConfig, rows: list[SweepRow]) -> list[list]:
    """Binomial success counts drawn in row order from one seeded generator."""
    if cfg.shots is None:
        return [[] for _ in rows]
    rng = np.random.default_rng(cfg.seed)
    out = []
    for row in rows:
        p = min(max(row.result.p_success, 0.0), 1.0) if row.ok else 0.0
        k = int(rng.binomial(cfg.shots, p))
        p_hat = k / cfg.shots
        half = 1.96 * math.sqrt(p_hat * (1 - p_hat) / cfg.shots)
        out.append([cfg.shots, k, p_hat, half])
    return out


def _pf(row: SweepRow) -> list:
    if not row.ok:
        return [float("nan"), float("nan"), False]
    r = row.result
    return [r.p_success, r.fidelity, r.fidelity_defined]


def _cell_stats(rows: list[SweepRow]):
    avgs = aggregate(rows)
    n = noise_factor(avgs)
    return avgs, n


def _bound_or_nan(mean_p: float, n: float) -> float:
    return otoc_bound(mean_p, n) if n > 0 else float("nan")


# ---------------------------------------------------------------- commands


def cmd_mismatch_sweep(cfg: ExperimentConfig) -> dict:
    noise = cfg.noise()
    base = ProtocolConfig(scrambler=ScramblerSpec("identity_control"), pair=cfg.pair, seed=cfg.seed or 0)
    configs, cells = [], []
    for theta in cfg.theta_grid:
        cell_noise = noise.replace(mismatch_theta=theta, layers=noise.layers | {"mismatch"})
        cell = state_grid(base.replace(noise=cell_noise))
        cells.append((theta, len(configs), len(cell)))
        configs += cell
    rows = _run_rows(cfg, configs)
    shots = _shots(cfg, rows)
    table = [
        [c.noise.mismatch_theta, c.input.label, c.pair, *_pf(r), *s]
        for c, r, s in zip(configs, rows, shots)
    ]
    agg = []
    for theta, start, count in cells:
        avgs, n = _cell_stats(rows[start : start + count])
        agg.append([theta, avgs.mean_P, avgs.mean_FP, n])
    return {
        "header": ["theta", "psi", "pair", "P", "F", "F_defined"] + (SHOT_COLUMNS if cfg.shots else []),
        "rows": table,
        "agg_header": ["theta", "mean_P", "mean_FP", "N"],
        "agg": agg,
        "sweep_rows": rows,
        "channels": noise.has_channels,
    }


def cmd_alpha_sweep(cfg: ExperimentConfig) -> dict:
    noise = cfg.noise()
    configs, cells = [], []
    for alpha in cfg.alpha_grid:
        base = ProtocolConfig(
            scrambler=ScramblerSpec("interpolating", alpha), pair=cfg.pair, noise=noise, seed=cfg.seed or 0
        )
        cell = state_grid(base)
        cells.append((alpha, len(configs), len(cell)))
        configs += cell
    rows = _run_rows(cfg, configs)
    shots = _shots(cfg, rows)
    table = [[c.scrambler.alpha, c.input.label, *_pf(r), *s] for c, r, s in zip(configs, rows, shots)]
    agg = []
    for alpha, start, count in cells:
        avgs, n = _cell_stats(rows[start : start + count])
        agg.append([alpha, avgs.mean_P, n, _bound_or_nan(avgs.mean_P, n)])
    return {
        "header": ["alpha", "psi", "P", "F", "F_defined"] + (SHOT_COLUMNS if cfg.shots else []),
        "rows": table,
        "agg_header": ["alpha", "mean_P", "N", "otoc_bound"],
        "agg": agg,
        "sweep_rows": rows,
        "channels": noise.has_channels,
    }


def _pair_table(cfg: ExperimentConfig, scramblers: dict) -> dict:
    noise = cfg.noise()
    configs, cells = [], []
    for name, spec in scramblers.items():
        for pair in range(3):
            base = ProtocolConfig(scrambler=spec, pair=pair, noise=noise, seed=cfg.seed or 0)
            cell = state_grid(base)
            cells.append((name, pair, len(configs), len(cell)))
            configs += cell
    rows = _run_rows(cfg, configs)
    shots = _shots(cfg, rows)
    names = [name for name, _, start, count in cells for _ in range(count)]
    table = [[nm, c.pair, c.input.label, *_pf(r), *s] for nm, c, r, s in zip(names, configs, rows, shots)]
    agg = []
    for name, pair, start, count in cells:
        avgs, n = _cell_stats(rows[start : start + count])
        agg.append([name, pair, avgs.mean_P, avgs.mean_FP, n])
    return {
        "header": ["scrambler", "pair", "psi", "P", "F", "F_defined"] + (SHOT_COLUMNS if cfg.shots else []),
        "rows": table,
        "agg_header": ["scrambler", "pair", "mean_P", "mean_FP", "N"],
        "agg": agg,
        "sweep_rows": rows,
        "channels": noise.has_channels,
    }


def cmd_pairs(cfg: ExperimentConfig) -> dict:
    return _pair_table(
        cfg,
        {
            "maximal": ScramblerSpec("interpolating", 1.0),
            "identity": ScramblerSpec("identity_control"),
            "classical": ScramblerSpec("classical"),
        },
    )


def cmd_classical(cfg: ExperimentConfig) -> dict:
    return _pair_table(cfg, {"classical": ScramblerSpec("classical")})


def cmd_grover(cfg: ExperimentConfig) -> dict:
    noise = cfg.noise()
    configs = [
        ProtocolConfig(
            scrambler=ScramblerSpec("grover_family"),
            input=lbl,
            pair=cfg.pair,
            decoder=variant,
            noise=noise,
            seed=cfg.seed or 0,
        )
        for variant in ("grover", "grover_purified")
        for lbl in cfg.states
    ]
    rows = _run_rows(cfg, configs)
    shots = _shots(cfg, rows)
    table = [[c.decoder, c.input.label, *_pf(r), *s] for c, r, s in zip(configs, rows, shots)]
    agg = []
    for variant in ("grover", "grover_purified"):
        sel = [r for c, r in zip(configs, rows) if c.decoder == variant and r.ok]
        if not sel:
            agg.append([variant, float("nan"), float("nan")])
            continue
        agg.append(
            [variant, np.mean([r.result.fidelity for r in sel]), np.mean([r.result.p_success for r in sel])]
        )
    return {
        "header": ["variant", "psi", "P", "F", "F_defined"] + (SHOT_COLUMNS if cfg.shots else []),
        "rows": table,
        "agg_header": ["variant", "mean_F", "mean_P"],
        "agg": agg,
        "sweep_rows": rows,
        "channels": noise.has_channels,
    }


def cmd_otoc_check(cfg: ExperimentConfig) -> dict:
    """Compare averaged OTOCs with noiseless EPR success probabilities."""
    rng = np.random.default_rng(cfg.seed)
    scramblers = {
        "maximal": build_scrambler(1.0),
        "identity": build_identity_control(),
        "classical": build_classical_scrambler(),
        "grover_family": build_grover_scrambler(),
    }
    for i in range(cfg.n_random):
        scramblers[f"random_clifford_{i}"] = random_clifford(rng)
    d_a = 1.0 if cfg.corrupt_weighting else D_A
    checks, failures, worst = 0, [], 0.0
    for name, circuit in scramblers.items():
        table = ideal_table(circuit)
        for (pair, label), result in table.items():
            value = average_otoc(circuit, pair, label, d_a=d_a)
            diff = abs(value - result.p_success)
            worst = max(worst, diff)
            checks += 1
            if not diff < OTOC_TOL:
                failures.append(
                    {"scrambler": name, "pair": pair, "psi": label, "otoc": value, "p_success": result.p_success}
                )
    return {
        "report": {
            "seed": cfg.seed,
            "n_scramblers": len(scramblers),
            "checks": checks,
            "tolerance": OTOC_TOL,
            "max_abs_diff": worst,
            "failures": failures,
            "passed": not failures,
        }
    }


HANDLERS = {
    "mismatch-sweep": cmd_mismatch_sweep,
    "alpha-sweep": cmd_alpha_sweep,
    "pairs": cmd_pairs,
    "classical": cmd_classical,
    "grover": cmd_grover,
    "otoc-check": cmd_otoc_check,
}


# ---------------------------------------------------------------- entry point


def _float_list(text: str) -> list[float]:
    try:
        return [float(eval_angle(t)) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def eval_angle(token: str) -> float:
    """Parse a float, allowing ``pi`` multiples such as ``pi/8`` or ``3*pi/8``."""
    token = token.strip().lower().replace(" ", "")
    if "pi" not in token:
        return float(token)
    num, _, den = token.partition("/")
    coeff = num.replace("*pi", "").replace("pi", "") or "1"
    value = float(coeff) * math.pi
    return value / float(den) if den else value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="scramble-verify", description="Run scrambling-verification experiments and write CSV/JSON results."
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat JSON settings file")
    p.add_argument("--seed", type=int, help="required for otoc-check and --shots")
    p.add_argument("--out", help="output file (default: <command>.csv or .json)")
    p.add_argument("--theta-grid", type=_float_list, help="comma separated, e.g. 0,pi/8,pi/4")
    p.add_argument("--alpha-grid", type=_float_list, help="comma separated values in [0, 1]")
    p.add_argument("--pair", type=int, choices=(0, 1, 2), help="projection pair for sweeps and grover")
    p.add_argument("--noise-preset", choices=("ideal", "calibrated"))
    p.add_argument("--shots", type=int, help="emulate binomial shot noise on P")
    p.add_argument(
        "--states", type=lambda s: [t.strip() for t in s.split(",") if t.strip()], help="grover inputs, e.g. 0z,0x,0y"
    )
    p.add_argument("--n-random", type=int, help="random Clifford scramblers for otoc-check (>= 20)")
    p.add_argument("--workers", type=int, help="worker processes for sweeps")
    p.add_argument("--corrupt-weighting", action="store_true", default=None, help=argparse.SUPPRESS)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    settings: dict = {}
    if args.config:
        try:
            settings = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(settings, dict):
            raise ConfigError("config document must be a flat JSON object")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(settings) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in known:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    settings["experiment"] = args.command
    try:
        return ExperimentConfig(**settings)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def execute(cfg: ExperimentConfig) -> int:
    out = cfg.output_path()
    result = HANDLERS[cfg.experiment](cfg)
    if "report" in result:
        report = result["report"]
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
        try:
            out.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc.strerror or exc}") from exc
        status = "passed" if report["passed"] else f"FAILED ({len(report['failures'])} mismatches)"
        print(f"otoc-check {status}: {report['checks']} checks, max |diff| = {report['max_abs_diff']:.3e}")
        print(f"wrote {out}")
        return EXIT_OK if report["passed"] else EXIT_FAILURE

    write_csv(out, result["header"], result["rows"])
    write_csv(agg_path(out), result["agg_header"], result["agg"])
    print(",".join(result["agg_header"]))
    for row in result["agg"]:
        print(",".join(fmt(v) for v in row))
    if result["channels"]:
        print(f"note: {BOUND_CAVEAT}")
    print(f"wrote {out} and {agg_path(out)}")
    return EXIT_OK if all(r.ok for r in result["sweep_rows"]) else EXIT_FAILURE


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
    except ScrambleVerifyError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return execute(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScrambleVerifyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
