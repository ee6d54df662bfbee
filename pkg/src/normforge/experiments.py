"""Config parsing, single-point runs, sweeps and figure datasets.

Every run produces a :class:`Table`: a fixed column list, rows of plain
values and an ordered provenance mapping. Tables serialize to CSV (``#``
comment lines carry the provenance) or JSON. Nothing time- or host-dependent
goes into the output, so reruns are byte-identical.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import partial
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .errors import ConfigError, MissingWhitewashCost, OutOfRange, UnknownFigure, UnsupportedScheme
from .incentives import cooperation_constraints
from .model import (
    DEFAULT_PARAMS,
    CommunityParams,
    ReputationScheme,
    SocialNorm,
    SocialStrategy,
    stationary,
)
from .optimizer import solve_dp_fixed_L, solve_dp_variable_M, solve_dp_whitewash
from .payoff import long_term_values, social_welfare
from .simulation import RNG_ALGORITHM, SimulationConfig, simulate_population
from .strategies import L1_CANDIDATES, catalog_name, parse_strategy, serve_equal_or_better

SIG_DIGITS = 12
SWEEP_VARS = ("c", "beta", "alpha", "eps", "c_w")
VARIANTS = ("fixed-L", "variable-M", "whitewash")
DEFAULT_GRID_POINTS = 100

# canonical dotted key -> type converter
_KEYS = {
    "params.b": float,
    "params.c": float,
    "params.beta": float,
    "params.alpha": float,
    "params.eps": float,
    "params.c_w": float,
    "scheme.L": int,
    "scheme.M": int,
    "scheme.K": int,
    "norm.strategy": str,
    "optimize.variant": str,
    "optimize.prune": "bool",
    "sweep.var": str,
    "sweep.values": "floats",
    "sweep.start": float,
    "sweep.stop": float,
    "sweep.num": int,
    "sweep.mode": str,
    "simulation.N": int,
    "simulation.T": int,
    "simulation.burn_in": int,
    "simulation.seed": int,
    "simulation.rollouts": int,
    "simulation.horizon": int,
    "simulation.initial": str,
    "output.format": str,
    "output.path": str,
    "run.jobs": int,
}

_ALIASES = {
    "L": "scheme.L",
    "M": "scheme.M",
    "K": "scheme.K",
    "strategy": "norm.strategy",
    "variant": "optimize.variant",
    "prune": "optimize.prune",
    "var": "sweep.var",
    "values": "sweep.values",
    "start": "sweep.start",
    "stop": "sweep.stop",
    "num": "sweep.num",
    "mode": "sweep.mode",
    "N": "simulation.N",
    "T": "simulation.T",
    "burn_in": "simulation.burn_in",
    "seed": "simulation.seed",
    "rollouts": "simulation.rollouts",
    "horizon": "simulation.horizon",
    "initial": "simulation.initial",
    "format": "output.format",
    "out": "output.path",
    "jobs": "run.jobs",
}
_ALIASES.update({name: f"params.{name}" for name in ("b", "c", "beta", "alpha", "eps", "c_w")})


def canonical_key(key: str) -> str:
    key = key.strip()
    if key in _KEYS:
        return key
    if key in _ALIASES:
        return _ALIASES[key]
    # section names are case-insensitive, option names are not
    section, _, name = key.partition(".")
    candidate = f"{section.lower()}.{name}"
    if candidate in _KEYS:
        return candidate
    raise ConfigError(f"unknown config key {key!r}")


def _convert(key: str, raw: str):
    kind = _KEYS[key]
    text = raw.strip()
    try:
        if kind == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind == "floats":
            return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())
        return kind(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config_text(text: str) -> dict:
    """Read ``key = value`` lines. Keys may be dotted (``params.c``) or sit
    under an ini-style ``[section]`` header; both forms flatten to the same
    dotted key."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[__top__]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from exc
    flat = {}
    for section in parser.sections():
        for name, value in parser.items(section):
            key = name if section == "__top__" else f"{section}.{name}"
            flat[canonical_key(key)] = value
    return flat


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def parse_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        out[canonical_key(key)] = value
    return out


@dataclass(frozen=True)
class SweepSpec:
    var: str
    values: tuple
    mode: str = "optimize"


@dataclass(frozen=True)
class ExperimentConfig:
    params: CommunityParams = DEFAULT_PARAMS
    L: int = 1
    M: Optional[int] = None
    K: Optional[int] = None
    strategy: Optional[str] = None
    variant: str = "fixed-L"
    prune: bool = False
    sweep: Optional[SweepSpec] = None
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    format: str = "csv"
    out: Optional[str] = None
    jobs: int = 1
    grid_points: int = DEFAULT_GRID_POINTS

    @property
    def scheme(self) -> ReputationScheme:
        return ReputationScheme(self.L, self.M, self.K)

    def norm(self) -> SocialNorm:
        if self.strategy is None:
            raise ConfigError("this command needs norm.strategy")
        return SocialNorm(self.scheme, parse_strategy(self.strategy, self.L))


def default_grid(var: str, params: CommunityParams, num: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Evenly spaced default sweep grid for ``var``. The eps grid is
    logarithmic so that the small-error limit is sampled."""
    if var == "c":
        return np.linspace(0.01 * params.b, 0.99 * params.b, num)
    if var == "beta":
        return np.linspace(0.0, 0.99, num)
    if var == "alpha":
        return np.linspace(0.0, 1.0, num)
    if var == "eps":
        return np.geomspace(1e-6, 0.5, num)
    if var == "c_w":
        return np.linspace(0.0, 26.0, num)
    raise ConfigError(f"cannot sweep {var!r}; choose one of {', '.join(SWEEP_VARS)}")


def validate_grid(var: str, values, params: CommunityParams) -> tuple:
    grid = np.asarray(values, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ConfigError("sweep grid must be a non-empty list of numbers")
    if not np.all(np.isfinite(grid)):
        raise OutOfRange(var, "finite grid values", values)
    if np.any(np.diff(grid) <= 0):
        raise OutOfRange(var, "strictly increasing grid", values)
    for x in grid:
        params.replace(**{var: float(x)})  # raises on any invalid point
    return tuple(float(x) for x in grid)


def build_config(flat: dict) -> ExperimentConfig:
    """Turn a flat ``{dotted key: raw string}`` mapping into a validated
    config. Later layers should already have been merged in."""
    vals = {k: _convert(k, v) if isinstance(v, str) else v for k, v in ((canonical_key(k), v) for k, v in flat.items())}
    p = DEFAULT_PARAMS.as_dict()
    for name in ("b", "c", "beta", "alpha", "eps", "c_w"):
        if f"params.{name}" in vals:
            p[name] = vals[f"params.{name}"]
    params = CommunityParams(**p)

    L = vals.get("scheme.L", 1)
    ReputationScheme(L, vals.get("scheme.M"), vals.get("scheme.K"))

    variant = vals.get("optimize.variant", "fixed-L")
    if variant not in VARIANTS:
        raise ConfigError(f"optimize.variant must be one of {', '.join(VARIANTS)}")

    num = vals.get("sweep.num", DEFAULT_GRID_POINTS)
    if num < 1:
        raise OutOfRange("sweep.num", "num >= 1", num)
    sweep = None
    if "sweep.var" in vals:
        var = vals["sweep.var"]
        if var not in SWEEP_VARS:
            raise ConfigError(f"cannot sweep {var!r}; choose one of {', '.join(SWEEP_VARS)}")
        if "sweep.values" in vals:
            grid = vals["sweep.values"]
        elif "sweep.start" in vals or "sweep.stop" in vals:
            if not ("sweep.start" in vals and "sweep.stop" in vals):
                raise ConfigError("sweep.start and sweep.stop go together")
            grid = np.linspace(vals["sweep.start"], vals["sweep.stop"], num)
        else:
            grid = default_grid(var, params, num)
        mode = vals.get("sweep.mode", "optimize")
        if mode not in ("optimize", "evaluate"):
            raise ConfigError("sweep.mode must be optimize or evaluate")
        sweep = SweepSpec(var, validate_grid(var, grid, params), mode)

    sim_kw = {k.split(".", 1)[1]: v for k, v in vals.items() if k.startswith("simulation.")}
    fmt = vals.get("output.format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format must be csv or json")
    jobs = vals.get("run.jobs", 1)
    if jobs < 1:
        raise OutOfRange("jobs", "jobs >= 1", jobs)
    cfg = ExperimentConfig(
        params=params,
        L=L,
        M=vals.get("scheme.M"),
        K=vals.get("scheme.K"),
        strategy=vals.get("norm.strategy"),
        variant=variant,
        prune=vals.get("optimize.prune", False),
        sweep=sweep,
        simulation=SimulationConfig(**sim_kw),
        format=fmt,
        out=vals.get("output.path"),
        jobs=jobs,
        grid_points=num,
    )
    if cfg.strategy is not None:
        cfg.norm()  # fail early on a bad strategy spec
    return cfg


# --------------------------------------------------------------------- output


def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0:
            return "0"  # no "-0"
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(format_value(x))
    return x


@dataclass
class Table:
    columns: tuple
    rows: list
    provenance: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.provenance.items():
            buf.write(f"# {key}: {value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(row.get(col)) for col in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "provenance": self.provenance,
            "columns": list(self.columns),
            "rows": [{col: _json_value(row.get(col)) for col in self.columns} for row in self.rows],
        }
        return json.dumps(doc, indent=2) + "\n"

    def render(self, fmt: str = "csv") -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def read_csv_table(text: str) -> Table:
    """Inverse of :meth:`Table.to_csv`; values stay as strings."""
    prov, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            prov[key] = value
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = tuple(next(reader))
    rows = [dict(zip(columns, r)) for r in reader]
    return Table(columns, rows, prov)


def _params_text(params: CommunityParams) -> str:
    return " ".join(f"{k}={format_value(v)}" for k, v in params.as_dict().items() if v is not None)


def _provenance(command: str, params: CommunityParams, **extra) -> dict:
    prov = {"tool": f"normforge {__version__}", "command": command, "params": _params_text(params)}
    prov.update({k: v for k, v in extra.items() if v is not None})
    return prov


# ------------------------------------------------------------------ result rows


@dataclass
class ResultRow:
    b: float
    c: float
    beta: float
    alpha: float
    eps: float
    c_w: Optional[float]
    L: int
    M: int
    K: int
    strategy_index: int
    strategy: str
    strategy_name: str
    welfare: float
    cooperation_incentive: float
    whitewash_incentive: float
    sustainable: bool
    whitewash_proof: Optional[bool] = None
    optimal_M: Optional[int] = None
    optimal_K: Optional[int] = None


RESULT_COLUMNS = tuple(f.name for f in fields(ResultRow))


def evaluate_norm_row(params: CommunityParams, norm: SocialNorm, **extra) -> ResultRow:
    report = cooperation_constraints(norm, params)
    s = norm.scheme
    return ResultRow(
        **params.as_dict(),
        L=s.L,
        M=s.M,
        K=s.K,
        strategy_index=norm.strategy.index,
        strategy=norm.strategy.to_string(),
        strategy_name=catalog_name(norm.strategy),
        welfare=social_welfare(norm, params),
        cooperation_incentive=report.cooperation_incentive,
        whitewash_incentive=report.whitewash_incentive,
        sustainable=report.sustainable,
        whitewash_proof=report.whitewash_proof,
        **extra,
    )


def _rows_table(command: str, cfg: ExperimentConfig, rows, **extra) -> Table:
    return Table(RESULT_COLUMNS, [asdict(r) for r in rows], _provenance(command, cfg.params, **extra))


def run_evaluate(cfg: ExperimentConfig) -> Table:
    return _rows_table("evaluate", cfg, [evaluate_norm_row(cfg.params, cfg.norm())])


def optimize_rows(params: CommunityParams, L: int, variant: str, prune: bool = False) -> list:
    """Rows for an optimizer run; the global optimum is listed first, then
    the per-scheme optima for variable-M and whitewash runs."""
    if variant == "fixed-L":
        sol = solve_dp_fixed_L(params, L, prune=prune)
        return [evaluate_norm_row(params, sol.norm)]
    if variant == "variable-M":
        search = solve_dp_variable_M(params, L, prune=prune)
    elif variant == "whitewash":
        if params.c_w is None:
            raise MissingWhitewashCost("the whitewash optimizer needs params.c_w")
        search = solve_dp_whitewash(params, L, prune=prune)
    else:
        raise UnsupportedScheme(f"unknown optimizer variant {variant!r}")
    opt = {"optimal_M": search.optimal_M, "optimal_K": search.optimal_K}
    rows = [evaluate_norm_row(params, search.best.norm, **opt)]
    rows += [evaluate_norm_row(params, sol.norm, **opt) for _, sol in sorted(search.table.items())]
    return rows


def run_optimize(cfg: ExperimentConfig, variant: Optional[str] = None) -> Table:
    variant = variant or cfg.variant
    if variant in ("fixed-L", "variable-M") and cfg.K not in (None, cfg.L):
        raise UnsupportedScheme(f"{variant} keeps the entry reputation at K = L")
    if variant in ("fixed-L", "whitewash") and cfg.M not in (None, cfg.L):
        raise UnsupportedScheme(f"{variant} keeps the punishment length at M = L")
    rows = optimize_rows(cfg.params, cfg.L, variant, cfg.prune)
    return _rows_table("optimize", cfg, rows, variant=variant, L=cfg.L)


def _sweep_point(cfg: ExperimentConfig, value: float) -> ResultRow:
    params = cfg.params.replace(**{cfg.sweep.var: value})
    if cfg.sweep.mode == "evaluate":
        return evaluate_norm_row(params, cfg.norm())
    return optimize_rows(params, cfg.L, cfg.variant, cfg.prune)[0]


def parallel_map(func, items, jobs: int = 1) -> list:
    """Ordered map, fanned out over processes when ``jobs > 1``."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * jobs))))


def run_sweep(cfg: ExperimentConfig) -> Table:
    if cfg.sweep is None:
        raise ConfigError("sweep needs sweep.var")
    if cfg.sweep.mode == "evaluate":
        cfg.norm()
    rows = parallel_map(partial(_sweep_point, cfg), cfg.sweep.values, cfg.jobs)
    extra = {"sweep": f"{cfg.sweep.var} over {len(cfg.sweep.values)} points", "mode": cfg.sweep.mode}
    if cfg.sweep.mode == "optimize":
        extra.update(variant=cfg.variant, L=cfg.L)
    return _rows_table("sweep", cfg, rows, **extra)


STATIONARY_COLUMNS = ("L", "M", "K", "theta", "mass", "cumulative")


def run_stationary(cfg: ExperimentConfig) -> Table:
    s = cfg.scheme
    dist = stationary(cfg.params, s)
    cum = dist.cumulative()
    rows = [
        {"L": s.L, "M": s.M, "K": s.K, "theta": t, "mass": dist.mass[t], "cumulative": cum[t]}
        for t in range(s.size)
    ]
    return Table(STATIONARY_COLUMNS, rows, _provenance("stationary", cfg.params))


SIMULATE_COLUMNS = (
    "theta",
    "empirical_mass",
    "stationary_mass",
    "value_estimate",
    "value_se",
    "value_exact",
    "empirical_welfare",
    "welfare_se",
    "welfare_exact",
)


def run_simulate(cfg: ExperimentConfig) -> Table:
    norm = cfg.norm()
    sim = cfg.simulation
    report = simulate_population(norm, cfg.params, sim)
    eta = stationary(cfg.params, norm.scheme).mass
    exact = long_term_values(norm, cfg.params).longterm
    welfare = social_welfare(norm, cfg.params)
    rows = []
    for t in range(norm.scheme.size):
        rows.append(
            {
                "theta": t,
                "empirical_mass": report.empirical_distribution.mass[t],
                "stationary_mass": eta[t],
                "value_estimate": report.value_estimates[t],
                "value_se": report.value_se[t],
                "value_exact": exact[t],
                "empirical_welfare": report.empirical_welfare,
                "welfare_se": report.welfare_se,
                "welfare_exact": welfare,
            }
        )
    prov = _provenance(
        "simulate",
        cfg.params,
        norm=f"L={norm.scheme.L} M={norm.scheme.M} K={norm.scheme.K} strategy={norm.strategy.to_string()}",
        simulation=f"N={sim.N} T={sim.T} burn_in={sim.burn_in} rollouts={sim.rollouts} initial={sim.initial}",
        seed=sim.seed,
        rng=RNG_ALGORITHM,
    )
    return Table(SIMULATE_COLUMNS, rows, prov)


# --------------------------------------------------------------------- figures


def _strategy_cols(strategy: SocialStrategy) -> dict:
    return {
        "strategy_index": strategy.index,
        "strategy": strategy.to_string(),
        "strategy_name": catalog_name(strategy),
    }


def _c_grid(params, num):
    return default_grid("c", params, num)


def _fig2(params, num, jobs):
    inc_rows, opt_rows = [], []
    for c in _c_grid(params, num):
        p = params.replace(c=c)
        for k, strat in L1_CANDIDATES.items():
            rep = cooperation_constraints(SocialNorm.of(strat), p)
            inc_rows.append({"c": c, **_strategy_cols(strat), "cooperation_incentive": rep.cooperation_incentive, "sustainable": rep.sustainable})
        sol = solve_dp_fixed_L(p, 1)
        opt_rows.append({"c": c, **_strategy_cols(sol.strategy), "welfare": sol.welfare})
    sc = ("strategy_index", "strategy", "strategy_name")
    return {
        "fig2a": (("c",) + sc + ("cooperation_incentive", "sustainable"), inc_rows),
        "fig2b": (("c",) + sc + ("welfare",), opt_rows),
    }


def _optimum_point(L: int, params: CommunityParams) -> dict:
    sol = solve_dp_fixed_L(params, L)
    return {"c": params.c, **_strategy_cols(sol.strategy), "welfare": sol.welfare}


def _fig3(params, num, jobs):
    pts = [params.replace(c=c) for c in _c_grid(params, num)]
    rows = parallel_map(partial(_optimum_point, 2), pts, jobs)
    return {"fig3": (("c", "strategy_index", "strategy", "strategy_name", "welfare"), rows)}


def _fig4(params, num, jobs):
    L = 5
    mass_rows, cum_rows = [], []
    for M in range(1, L + 1):
        dist = stationary(params, ReputationScheme(L, M, L))
        cum = dist.cumulative()
        for t in range(L + 1):
            mass_rows.append({"M": M, "theta": t, "mass": dist.mass[t]})
            cum_rows.append({"M": M, "theta": t, "cumulative": cum[t]})
    return {"fig4a": (("M", "theta", "mass"), mass_rows), "fig4b": (("M", "theta", "cumulative"), cum_rows)}


def _fig5(params, num, jobs):
    L = 3
    strat = serve_equal_or_better(L)
    rows = []
    for c in _c_grid(params, num):
        p = params.replace(c=c)
        for M in range(1, L + 1):
            norm = SocialNorm.of(strat, M=M)
            rep = cooperation_constraints(norm, p)
            rows.append({"c": c, "M": M, "welfare": social_welfare(norm, p), "cooperation_incentive": rep.cooperation_incentive, "sustainable": rep.sustainable})
    return {"fig5": (("c", "M", "welfare", "cooperation_incentive", "sustainable"), rows)}


def _variable_m_point(L: int, params: CommunityParams) -> list:
    search = solve_dp_variable_M(params, L)
    rows = []
    for M, sol in sorted(search.table.items()):
        rows.append({"c": params.c, "M": M, **_strategy_cols(sol.strategy), "welfare": sol.welfare, "cooperation_incentive": sol.report.cooperation_incentive, "optimal_M": search.optimal_M})
    return rows


_FIG6_COLS = ("c", "M", "strategy_index", "strategy", "strategy_name", "welfare", "cooperation_incentive")


def _fig6(params, num, jobs):
    pts = [params.replace(c=c) for c in _c_grid(params, num)]
    per_point = parallel_map(partial(_variable_m_point, 3), pts, jobs)
    return {"fig6": (_FIG6_COLS, [r for rows in per_point for r in rows])}


def _fig7(params, num, jobs):
    pts = [params.replace(c=c) for c in _c_grid(params, num)]
    per_point = parallel_map(partial(_variable_m_point, 3), pts, jobs)
    rows = []
    for block in per_point:
        best = next(r for r in block if r["M"] == block[0]["optimal_M"])
        rows.append({k: best[k] for k in ("c", "optimal_M", "strategy_index", "strategy", "strategy_name", "welfare")})
    return {"fig7": (("c", "optimal_M", "strategy_index", "strategy", "strategy_name", "welfare"), rows)}


def _fig8(params, num, jobs):
    L = 3
    p0 = params.replace(c_w=1.0) if params.c_w is None else params
    strat = serve_equal_or_better(L)
    rows = []
    for c in _c_grid(p0, num):
        p = p0.replace(c=c)
        for K in range(L + 1):
            norm = SocialNorm.of(strat, K=K)
            rep = cooperation_constraints(norm, p)
            rows.append({"c": c, "K": K, "welfare": social_welfare(norm, p), "whitewash_incentive": rep.whitewash_incentive, "sustainable": rep.sustainable, "whitewash_proof": rep.whitewash_proof})
    return {"fig8": (("c", "K", "welfare", "whitewash_incentive", "sustainable", "whitewash_proof"), rows)}


def _whitewash_point(L: int, params: CommunityParams) -> list:
    search = solve_dp_whitewash(params, L)
    return [
        {"c": params.c, "c_w": params.c_w, "K": K, **_strategy_cols(sol.strategy), "welfare": sol.welfare, "whitewash_incentive": sol.report.whitewash_incentive, "optimal_K": search.optimal_K}
        for K, sol in sorted(search.table.items())
    ]


def _fig9(params, num, jobs):
    p0 = params.replace(c_w=1.0) if params.c_w is None else params
    pts = [p0.replace(c=c) for c in _c_grid(p0, num)]
    per_point = parallel_map(partial(_whitewash_point, 3), pts, jobs)
    cols = ("c", "K", "strategy_index", "strategy", "strategy_name", "welfare", "whitewash_incentive")
    return {"fig9": (cols, [r for rows in per_point for r in rows])}


FIG10_COSTS = (1.0, 2.0, 3.0)


def _fig10(params, num, jobs):
    pts = [params.replace(c=c, c_w=cw) for c in FIG10_COSTS for cw in default_grid("c_w", params, num)]
    per_point = parallel_map(partial(_whitewash_point, 3), pts, jobs)
    rows = []
    for block in per_point:
        best = next(r for r in block if r["K"] == block[0]["optimal_K"])
        rows.append({k: best[k] for k in ("c", "c_w", "optimal_K", "strategy_index", "strategy", "welfare")})
    return {"fig10": (("c", "c_w", "optimal_K", "strategy_index", "strategy", "welfare"), rows)}


def _fixed_vs_optimal(L: int, params: CommunityParams) -> dict:
    sol = solve_dp_fixed_L(params, L)
    norm = SocialNorm.of(serve_equal_or_better(L))
    rep = cooperation_constraints(norm, params)
    w = social_welfare(norm, params)
    return {
        "c": params.c,
        "optimal_welfare": sol.welfare,
        "optimal_strategy": sol.strategy.to_string(),
        "fixed_welfare": w,
        "fixed_sustainable": rep.sustainable,
        "fixed_welfare_if_sustained": w if rep.sustainable else 0.0,
        "upper_bound": params.b - params.c,
    }


def _fig11(params, num, jobs):
    cols = ("c", "optimal_welfare", "optimal_strategy", "fixed_welfare", "fixed_sustainable", "fixed_welfare_if_sustained", "upper_bound")
    pts = [params.replace(c=c) for c in _c_grid(params, num)]
    out = {}
    for L, panel in zip((1, 2, 3), ("fig11a", "fig11b", "fig11c")):
        out[panel] = (cols, parallel_map(partial(_fixed_vs_optimal, L), pts, jobs))
    return out


def _welfare_by_L(var: str, params: CommunityParams) -> list:
    rows = []
    for L in (1, 2, 3):
        sol = solve_dp_fixed_L(params, L)
        rows.append({var: getattr(params, var), "L": L, **_strategy_cols(sol.strategy), "welfare": sol.welfare})
    return rows


def _fig12(var):
    def build(params, num, jobs):
        pts = [params.replace(**{var: x}) for x in default_grid(var, params, num)]
        per_point = parallel_map(partial(_welfare_by_L, var), pts, jobs)
        cols = (var, "L", "strategy_index", "strategy", "strategy_name", "welfare")
        return {f"fig12{'abc'[('beta', 'alpha', 'eps').index(var)]}": (cols, [r for rows in per_point for r in rows])}

    return build


FIGURES = {
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8": _fig8,
    "fig9": _fig9,
    "fig10": _fig10,
    "fig11": _fig11,
    "fig12a": _fig12("beta"),
    "fig12b": _fig12("alpha"),
    "fig12c": _fig12("eps"),
}


def figure_tables(figure_id: str, params: CommunityParams = DEFAULT_PARAMS, num: int = DEFAULT_GRID_POINTS, jobs: int = 1) -> dict:
    """``{panel name: Table}`` for one figure, computed in memory."""
    if figure_id not in FIGURES:
        raise UnknownFigure(f"unknown figure {figure_id!r}; choose from {', '.join(FIGURES)}")
    panels = FIGURES[figure_id](params, num, jobs)
    return {
        name: Table(cols, rows, _provenance("figures", params, figure=figure_id, panel=name, grid_points=num))
        for name, (cols, rows) in panels.items()
    }


def run_figures(figure_id: str, overrides: Optional[dict] = None, out_dir=".", fmt: str = "csv", jobs: int = 1) -> list:
    """Write one dataset file per panel of ``figure_id`` (or every figure for
    ``"all"``) and return the paths. ``overrides`` takes the same keys as
    ``--set``; parameter keys and ``sweep.num`` are honoured."""
    cfg = build_config(overrides or {})
    ids = list(FIGURES) if figure_id == "all" else [figure_id]
    for fid in ids:
        if fid not in FIGURES:
            raise UnknownFigure(f"unknown figure {fid!r}; choose from {', '.join(FIGURES)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for fid in ids:
        for name, table in figure_tables(fid, cfg.params, cfg.grid_points, jobs).items():
            path = out / f"{name}.{fmt}"
            path.write_text(table.render(fmt))
            paths.append(path)
    return paths

