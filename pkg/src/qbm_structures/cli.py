"""Configuration-driven command line entry point.

Reads a sectioned key = value scenario file (grammar documented in the
README), runs the requested experiment, writes one CSV per run with a
versioned header comment, and prints a short human summary to stdout.

Exit codes: 0 success, 1 configuration/domain error, 2 numerical
conditioning error.  Identical config and seed produce byte-identical CSV.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import experiments as ex
from .errors import ConditioningError, DomainError
from .model import BathSpec, ModelParams, discretize_bath

CSV_VERSION_HEADER = "# qbm-structures v1"

SCENARIOS = ("pod", "er", "exclusivity", "marginal", "oracle-compare")

_SCHEMA: dict[str, dict[str, str]] = {
    "scenario": {"kind": "str", "output": "str", "seed": "int"},
    "model": {
        "m1": "float",
        "potential": "str",
        "omega": "float",
        "coupling_sign": "str",
        "bath_mass": "float",
        "n_bath": "int",
        "gamma": "float",
        "cutoff_freq": "float",
        "grid": "str",
        "bath_omegas": "floats",
        "bath_kappas": "floats",
        "bath_masses": "floats",
        "perturb": "float",
    },
    "initial": {"kind": "str", "x": "float", "p": "float", "temperature": "float", "purified": "bool"},
    "times": {"t_max": "float", "n_points": "int"},
    "oracle": {"cutoff": "int", "certify": "bool", "bump": "int"},
}


@dataclass(frozen=True)
class RunConfig:
    """Validated scenario file contents, before the seeded genericity jitter."""

    kind: str
    output: str | None = None
    seed: int = 0
    m1: float = 1.0
    potential: str = "free"
    omega: float | None = None
    coupling_sign: str = "plus"
    bath_mass: float = 1.0
    n_bath: int = 8
    gamma: float = 0.2
    cutoff_freq: float = 5.0
    grid: str = "linear"
    bath_omegas: tuple[float, ...] | None = None
    bath_kappas: tuple[float, ...] | None = None
    bath_masses: tuple[float, ...] | None = None
    perturb: float = 0.0
    initial_kind: str = "coherent"
    x: float = 0.0
    p: float = 0.0
    temperature: float = 0.0
    purified: bool = False
    t_max: float = 10.0
    n_points: int = 50
    oracle_cutoff: int = 16
    oracle_certify: bool = False
    oracle_bump: int = 10

    def __post_init__(self) -> None:
        if self.kind not in SCENARIOS:
            raise DomainError(f"unknown scenario kind {self.kind!r}; expected one of {SCENARIOS}")
        if self.seed < 0:
            raise DomainError("seed must be a non-negative integer")
        if self.coupling_sign not in ("plus", "minus"):
            raise DomainError(f"coupling_sign must be 'plus' or 'minus', got {self.coupling_sign!r}")
        if self.t_max <= 0:
            raise DomainError("t_max must be positive")
        if self.n_points < 2:
            raise DomainError("n_points must be at least 2")
        if self.perturb < 0:
            raise DomainError("perturb must be >= 0")
        if (self.bath_omegas is None) != (self.bath_kappas is None):
            raise DomainError("bath_omegas and bath_kappas must be given together")


_FIELD_MAP = {
    ("scenario", "kind"): "kind",
    ("scenario", "output"): "output",
    ("scenario", "seed"): "seed",
    ("initial", "kind"): "initial_kind",
    ("oracle", "cutoff"): "oracle_cutoff",
    ("oracle", "certify"): "oracle_certify",
    ("oracle", "bump"): "oracle_bump",
}


def _coerce(kind: str, raw: str, where: str):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "false"):
                return raw.lower() == "true"
            raise ValueError("expected true or false")
        if kind == "floats":
            return tuple(float(v) for v in raw.replace(",", " ").split())
        return raw
    except ValueError as exc:
        raise DomainError(f"bad value for {where}: {raw!r} ({exc})") from exc


def parse_config(text: str) -> RunConfig:
    """Parse and validate the sectioned key = value scenario format.

    Unknown sections or keys are rejected by name; type errors name the key;
    malformed lines surface the parser's line number.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str  # keep key case
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise DomainError(f"config parse error: {exc}") from exc

    values: dict[str, object] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise DomainError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise DomainError(f"unknown key {key!r} in section [{section}]")
            name = _FIELD_MAP.get((section, key), key)
            values[name] = _coerce(_SCHEMA[section][key], raw, f"[{section}] {key}")
    if "kind" not in values:
        raise DomainError("missing required key 'kind' in section [scenario]")
    return RunConfig(**values)  # type: ignore[arg-type]


def apply_overrides(cfg: RunConfig, pairs: list[str]) -> RunConfig:
    """Apply --set section.key=value flags on top of the file values."""
    for pair in pairs:
        if "=" not in pair or "." not in pair.split("=", 1)[0]:
            raise DomainError(f"--set expects section.key=value, got {pair!r}")
        target, raw = pair.split("=", 1)
        section, key = target.split(".", 1)
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise DomainError(f"unknown key {key!r} in section [{section}]")
        name = _FIELD_MAP.get((section, key), key)
        cfg = replace(cfg, **{name: _coerce(_SCHEMA[section][key], raw, target)})
    return cfg


def build_scenario(cfg: RunConfig) -> ex.ScenarioConfig:
    """Resolve the bath, apply the seeded genericity jitter, assemble the scenario."""
    rng = np.random.default_rng(cfg.seed)
    if cfg.bath_omegas is not None:
        omegas = cfg.bath_omegas
        kappas = cfg.bath_kappas
        masses = cfg.bath_masses or (cfg.bath_mass,) * len(omegas)
        if len(kappas) != len(omegas) or len(masses) != len(omegas):
            raise DomainError("bath_omegas, bath_kappas and bath_masses must have equal lengths")
        bath = tuple(zip(masses, omegas, kappas))
    else:
        bath = discretize_bath(BathSpec(cfg.n_bath, cfg.gamma, cfg.cutoff_freq, cfg.grid), cfg.bath_mass)
    m1 = cfg.m1
    if cfg.perturb > 0:
        jitter = lambda: 1.0 + cfg.perturb * rng.uniform(-1.0, 1.0)  # noqa: E731
        bath = tuple((m * jitter(), w * jitter(), k) for m, w, k in bath)
        m1 = m1 * jitter()
    params = ModelParams(
        m1=m1,
        bath=bath,
        potential=cfg.potential,
        omega=cfg.omega,
        coupling_sign=+1 if cfg.coupling_sign == "plus" else -1,
    )
    times = np.linspace(0.0, cfg.t_max, cfg.n_points)
    return ex.ScenarioConfig(
        model=params,
        times=times,
        x0=cfg.x,
        p0=cfg.p,
        particle_state=cfg.initial_kind,
        bath_temperature=cfg.temperature,
        purified=cfg.purified,
    )


# ---------------------------------------------------------------------------
# output


def _write_csv(path: str, columns: list[str], rows: np.ndarray) -> None:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if not np.all(np.isfinite(rows)):
        raise ConditioningError("refusing to write non-finite values to CSV")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_VERSION_HEADER + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _fmt_time(value: float) -> str:
    return f"{value:.6g}" if np.isfinite(value) else "n/a"


def run(cfg: RunConfig) -> int:
    """Execute the configured scenario; returns the process exit status."""
    try:
        if cfg.output is None:
            raise DomainError("no output path configured (set [scenario] output or --output)")
        scenario = build_scenario(cfg)
        if cfg.kind == "pod":
            rep = ex.run_pod(scenario)
            _write_csv(
                cfg.output,
                ["t", "purity_1", "purity_Sp", "neg_12", "neg_SpEp"],
                np.column_stack([rep.times, rep.purity_1, rep.purity_sp, rep.neg_12, rep.neg_spep]),
            )
            print(
                "pod: min purity_1 = {:.6g}, min purity_Sp = {:.6g}, "
                "half-times t1 = {}, tSp = {}{}".format(
                    rep.purity_1.min(),
                    rep.purity_sp.min(),
                    _fmt_time(rep.half_time_1),
                    _fmt_time(rep.half_time_sp),
                    " (recurrences flagged)" if rep.recurrence_1 or rep.recurrence_sp else "",
                )
            )
        elif cfg.kind == "er":
            rep = ex.run_er_check(scenario)
            _write_csv(
                cfg.output,
                ["t", "neg_12", "neg_SpEp", "witnessed"],
                np.column_stack([rep.times, rep.neg_12, rep.neg_spep, rep.witnessed.astype(float)]),
            )
            print(
                f"er: witnessed at {int(rep.witnessed.sum())} of {rep.times.size} instants "
                f"(product tol {rep.product_tol:g}, witness threshold {rep.witness_threshold:g})"
            )
        elif cfg.kind == "exclusivity":
            rep = ex.run_exclusivity(scenario)
            _write_csv(
                cfg.output,
                ["t", "neg_SpEp_branch", "excluding"],
                np.column_stack([rep.times, rep.neg_spep, rep.excluding.astype(float)]),
            )
            print(
                f"exclusivity: flagged fraction {rep.flagged_fraction:.4f} "
                f"over {rep.times.size} instants (threshold {rep.threshold:g})"
            )
        elif cfg.kind == "marginal":
            reports = [ex.marginal_incompatibility(scenario, t) for t in scenario.times]
            _write_csv(
                cfg.output,
                ["t", "l1_distance", "mean_1", "var_1", "mean_Sp", "var_Sp"],
                np.array(
                    [
                        [r.time, r.l1_distance, r.mean_1, r.var_1, r.mean_sp, r.var_sp]
                        for r in reports
                    ]
                ),
            )
            dists = [r.l1_distance for r in reports]
            print(f"marginal: L1 distance min {min(dists):.6g}, max {max(dists):.6g}")
        else:
            rep = ex.run_oracle_compare(
                scenario, cfg.oracle_cutoff, certify=cfg.oracle_certify, bump=cfg.oracle_bump
            )
            max_col = np.max(
                np.column_stack([rep.delta_purity, rep.delta_mean, rep.delta_cov, rep.delta_decoherence]),
                axis=1,
            )
            _write_csv(
                cfg.output,
                ["t", "delta_purity", "delta_mean", "delta_cov", "delta_decoherence", "max_abs_delta"],
                np.column_stack(
                    [rep.times, rep.delta_purity, rep.delta_mean, rep.delta_cov, rep.delta_decoherence, max_col]
                ),
            )
            cert = (
                f", certification drift {rep.certification_delta:.3e}"
                if rep.certification_delta is not None
                else ""
            )
            print(f"oracle-compare: max |delta| = {rep.max_abs_delta:.3e}{cert}")
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConditioningError as exc:
        print(f"conditioning error: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qbm-structures",
        description="Run particle + harmonic-bath decomposition experiments from a config file.",
    )
    parser.add_argument("config", help="path to a scenario config file")
    parser.add_argument("--output", help="override the CSV output path")
    parser.add_argument("--seed", type=int, help="override the random seed")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override any config value (repeatable)",
    )
    args = parser.parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        cfg = apply_overrides(cfg, args.overrides)
        if args.output is not None:
            cfg = replace(cfg, output=args.output)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
