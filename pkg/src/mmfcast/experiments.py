"""Parameter sweeps, scheme recommendation and result files.

A sweep varies one parameter over a grid; at every grid value the same
``n_drops`` user drops (drop ``d`` uses seed ``(seed, d)``) are evaluated
for each scheme at its optimal pilot length.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .channels import drop_users
from .config import ALL_SCHEMES, Scheme, SystemConfig, normalize_power, scheme_feasible
from .mmf import optimize_pilot_length
from .montecarlo import compare_bound
from .omnicast import omnicast_se

SWEEP_VARIABLES = ("n_antennas", "dl_power", "ul_cap", "n_groups")
BASE_COLUMNS = ("grid_variable", "grid_value", "scheme", "mean_min_se", "std_min_se",
                "mean_tau_star", "feasible_fraction")
INFEASIBLE = "infeasible"
DEFAULT_DROPS = 100


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    grid: tuple
    schemes: tuple[Scheme, ...] = ALL_SCHEMES
    n_drops: int = DEFAULT_DROPS
    seed: int = 0
    mc_validate: bool = False
    omnicast: bool = False
    mc_samples: int = 10_000
    omnicast_samples: int = 1000
    powers_in_watts: bool = True

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        grid = tuple(float(v) for v in np.atleast_1d(self.grid))
        if not grid:
            raise ValueError("sweep grid is empty")
        if list(grid) != sorted(grid):
            raise ValueError("sweep grid must be sorted")
        if self.variable in ("n_antennas", "n_groups"):
            grid = tuple(int(v) for v in grid)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "schemes", tuple(Scheme.parse(s) for s in self.schemes))
        if self.n_drops < 1:
            raise ValueError("n_drops must be >= 1")

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "SweepSpec":
        doc = dict(doc)
        schemes = doc.pop("schemes", "all")
        if schemes == "all" or schemes == ["all"]:
            schemes = ALL_SCHEMES
        return cls(schemes=tuple(schemes), **doc)


def config_at(config: SystemConfig, variable: str, value, powers_in_watts: bool = True
              ) -> SystemConfig:
    """``config`` with the swept parameter set to ``value``."""
    to_norm = ((lambda p: normalize_power(p, config.noise_psd_dbm_per_hz, config.carrier_bw_hz))
               if powers_in_watts else float)
    if variable == "n_antennas":
        return config.replace(n_antennas=int(value))
    if variable == "dl_power":
        return config.replace(dl_power_budget=to_norm(value))
    if variable == "ul_cap":
        return config.replace(ul_power_caps=to_norm(value))
    if variable == "n_groups":
        if len(set(config.group_sizes)) != 1 or len(set(config.ul_power_caps)) != 1:
            raise ValueError("sweeping n_groups needs equal group sizes and pilot caps")
        return config.replace(group_sizes=(config.group_sizes[0],) * int(value),
                              ul_power_caps=config.ul_power_caps[0])
    raise ValueError(f"unknown sweep variable {variable!r}")


@dataclass
class SweepRow:
    grid_variable: str
    grid_value: float
    scheme: Scheme
    mean_min_se: float | None
    std_min_se: float | None
    mean_tau_star: float | None
    feasible_fraction: float
    mc_rel_dev: float | None = None
    omnicast_se: float | None = None

    def record(self, columns: Sequence[str]) -> dict:
        out = asdict(self)
        out["scheme"] = self.scheme.name
        return {c: out[c] for c in columns}


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    mc_validate: bool = False
    omnicast: bool = False

    @property
    def columns(self) -> tuple[str, ...]:
        cols = BASE_COLUMNS
        if self.mc_validate:
            cols += ("mc_rel_dev",)
        if self.omnicast:
            cols += ("omnicast_se",)
        return cols

    def records(self) -> list[dict]:
        order = {s: i for i, s in enumerate(Scheme)}
        rows = sorted(self.rows, key=lambda r: (r.grid_value, order[r.scheme]))
        return [r.record(self.columns) for r in rows]

    def lookup(self, grid_value, scheme) -> SweepRow:
        scheme = Scheme.parse(scheme)
        for r in self.rows:
            if r.grid_value == grid_value and r.scheme is scheme:
                return r
        raise KeyError((grid_value, scheme))


def _evaluate_drop(config: SystemConfig, schemes: Sequence[Scheme], seed: int, drop: int):
    """(min_se, tau*) per scheme for one drop; None where infeasible."""
    profile = drop_users(config, (seed, drop))
    out = {}
    for s in schemes:
        if not scheme_feasible(s, config):
            out[s] = None
            continue
        sol = optimize_pilot_length(s, config, profile.betas)
        out[s] = (sol.min_se, sol.tau_p)
    return out


def _drop_results(config, schemes, seed, n_drops, workers):
    args = ([config] * n_drops, [schemes] * n_drops, [seed] * n_drops, range(n_drops))
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate_drop, *args))
    return list(map(_evaluate_drop, *args))


def _summary(values: list) -> tuple:
    ok = [v for v in values if v is not None]
    frac = len(ok) / len(values)
    if not ok:
        return None, None, None, frac
    se = np.array([v[0] for v in ok])
    tau = np.array([v[1] for v in ok], dtype=float)
    std = float(se.std(ddof=1)) if se.size > 1 else 0.0
    return float(se.mean()), std, float(tau.mean()), frac


def run_sweep(spec: SweepSpec, config: SystemConfig, workers: int = 1) -> SweepResult:
    """Evaluate every (grid value, scheme) pair over ``spec.n_drops`` drops.

    Infeasible cells keep ``None`` statistics and a zero feasible fraction.
    With ``mc_validate`` the first drop of each cell is also checked by Monte
    Carlo and the largest per-user relative deviation is reported.
    """
    result = SweepResult(mc_validate=spec.mc_validate, omnicast=spec.omnicast)
    for value in spec.grid:
        cfg = config_at(config, spec.variable, value, spec.powers_in_watts)
        per_drop = _drop_results(cfg, spec.schemes, spec.seed, spec.n_drops, workers)
        omni = (omnicast_se(cfg, spec.n_drops, spec.omnicast_samples, spec.seed).se
                if spec.omnicast else None)
        for s in spec.schemes:
            mean, std, tau, frac = _summary([d[s] for d in per_drop])
            row = SweepRow(spec.variable, value, s, mean, std, tau, frac, omnicast_se=omni)
            if spec.mc_validate and mean is not None:
                profile = drop_users(cfg, (spec.seed, 0))
                sol = optimize_pilot_length(s, cfg, profile.betas)
                row.mc_rel_dev = compare_bound(s, cfg, profile, sol, spec.mc_samples,
                                               seed=(spec.seed, 0)).max_rel_dev
            result.rows.append(row)
    return result


@dataclass(frozen=True)
class Recommendation:
    best_scheme: Scheme
    per_scheme_se: dict   # Scheme -> float, or None if infeasible
    margin: float


def _recommend(per_scheme: dict) -> Recommendation:
    ranked = [(se, s) for s, se in per_scheme.items() if se is not None]
    if not ranked:
        raise ValueError("no scheme is feasible for this configuration")
    best_se, best = ranked[0]
    for se, s in ranked[1:]:
        if se > best_se:
            best_se, best = se, s
    rest = [se for se, s in ranked if s is not best]
    margin = best_se - max(rest) if rest else math.inf
    return Recommendation(best, per_scheme, float(margin))


def recommend_scheme(config: SystemConfig, betas) -> Recommendation:
    """Scheme with the highest optimized min-SE for one fading profile.

    Ties go to the earlier scheme in enum order.
    """
    per = {}
    for s in Scheme:
        per[s] = (optimize_pilot_length(s, config, betas).min_se
                  if scheme_feasible(s, config) else None)
    return _recommend(per)


def recommend_ensemble(config: SystemConfig, n_drops: int = DEFAULT_DROPS, seed: int = 0,
                       workers: int = 1) -> Recommendation:
    """Like :func:`recommend_scheme` but ranking mean min-SE over random drops."""
    per_drop = _drop_results(config, tuple(Scheme), seed, n_drops, workers)
    per = {s: _summary([d[s] for d in per_drop])[0] for s in Scheme}
    return _recommend(per)


def _fmt(value) -> str:
    if value is None:
        return INFEASIBLE
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(column: str, text: str):
    if column in ("grid_variable", "scheme"):
        return text
    if text == INFEASIBLE:
        return None
    if column == "grid_value":
        num = float(text)
        return int(num) if text.lstrip("-").isdigit() else num
    return float(text)


def emit_results(table: SweepResult, path: "str | Path | None", fmt: str = "csv") -> str:
    """Write ``table`` as CSV or JSON; returns the text.  ``path=None`` skips writing."""
    records = table.records()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for rec in records:
            writer.writerow([_fmt(rec[c]) for c in table.columns])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps({"columns": list(table.columns), "rows": records}, indent=2) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r} (csv or json)")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write results to {path}: {exc}") from exc
    return text


def read_results(path: "str | Path") -> list[dict]:
    """Load a file written by :func:`emit_results` back into records."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        return json.loads(text)["rows"]
    reader = csv.DictReader(io.StringIO(text))
    return [{k: _parse(k, v) for k, v in row.items()} for row in reader]


def load_json(path: "str | Path") -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from exc


def iter_schemes(names: "str | Iterable[str]") -> tuple[Scheme, ...]:
    if isinstance(names, str):
        if names.lower() == "all":
            return ALL_SCHEMES
        names = names.split(",")
    return tuple(Scheme.parse(n) for n in names)
