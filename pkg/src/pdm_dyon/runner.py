"""Scenario runs: solve both branches, write CSV data plus gnuplot scripts.

Every run function takes a :class:`ScenarioConfig` and an output directory
and returns a JSON-serializable summary (also written as ``*.json``).
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .ode_solver import BranchResult, solve_branch
from .pdm_core import SpinBranch, effective_potential
from .specfun import HalfInt
from .target_system import radial_residual
from .verification import (
    angular_operator_check,
    angular_remainder,
    azimuthal_check,
    branch_agreement,
    crossing_radius,
    harmonic_norm,
    k2_identity_check,
    kummer_ode_residual,
    ode_pointwise_residual,
)

log = logging.getLogger(__name__)

CSV_COLUMNS = ("r", "M_up", "dM_up", "M_down", "dM_down", "U_eff_up", "U_eff_down",
               "residual_up", "residual_down")


def fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class SolveOutcome:
    config: ScenarioConfig
    up: BranchResult
    down: BranchResult
    summary: dict


def solve_pair(config: ScenarioConfig) -> SolveOutcome:
    """Solve both spin branches for one scenario; no files written."""
    params = config.mapping_params()
    ok, margin = params.condition
    if not ok:
        log.warning("|mu + m| = %s lies outside [10, 20]; the branches are not expected to agree",
                    abs(float(config.mu + config.m)))
    up = solve_branch(params, SpinBranch.UP, config, config.residual_samples)
    down = solve_branch(params, SpinBranch.DOWN, config, config.residual_samples)

    lo, hi = config.agreement_lo, config.r_max
    agreement, agreement_span = None, None
    try:
        agreement = branch_agreement(up.profile, down.profile, lo, hi)
        agreement_span = [lo, hi]
    except ValueError:
        top = min(up.profile.span[1], down.profile.span[1])
        if top > lo:
            agreement = branch_agreement(up.profile, down.profile, lo, top)
            agreement_span = [lo, top]

    def branch_summary(res: BranchResult) -> dict:
        return {
            "termination": str(res.termination),
            "backward_termination": str(res.backward_termination),
            "span": list(res.profile.span),
            "covers_r_i_to_r_max": res.profile.covers(config.r_i, config.r_max),
            "max_ode_residual": res.residual.max_rel_residual,
            "crossing_radius": crossing_radius(res.profile, config.crossing_threshold),
        }

    covered = up.profile.covers(lo, hi) and down.profile.covers(lo, hi)
    summary = {
        "config": config.to_dict(),
        "condition": {"satisfied": ok, "abs_mu_plus_m": abs(float(config.mu + config.m)),
                      "margin": margin},
        "up": branch_summary(up),
        "down": branch_summary(down),
        "agreement": agreement,
        "agreement_span": agreement_span,
        "agreement_pass": bool(covered and agreement is not None
                               and agreement <= config.agreement_tol),
    }
    return SolveOutcome(config, up, down, summary)


def _branch_row(res: BranchResult, params, r: float):
    prof = res.profile
    lo, hi = prof.span
    if not lo <= r <= hi:
        return [None] * 4
    M, dM, d2M = (float(v) for v in prof.evaluate(r))
    u = effective_potential(M, dM, d2M, r, params.ordering) if M > 0 else None
    return [M, dM, u, ode_pointwise_residual(prof, params, res.branch, r)]


def profile_rows(outcome: SolveOutcome, grid: np.ndarray):
    params = outcome.config.mapping_params()
    rows = []
    for r in grid:
        r = float(r)
        uM, udM, uU, uR = _branch_row(outcome.up, params, r)
        dM_, ddM, dU, dR = _branch_row(outcome.down, params, r)
        rows.append([r, uM, udM, dM_, ddM, uU, dU, uR, dR])
    return rows


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if not isinstance(v, (str, bool)) else v for v in row])


def write_gnuplot(path: Path, csv_name: str, ylabel: str, series: list[tuple[int, str]],
                  title: str) -> None:
    plots = ", \\\n     ".join(
        f"'{csv_name}' using 1:{col} with lines title '{label}'" for col, label in series
    )
    path.write_text(
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        f"set title '{title}'\n"
        "set xlabel 'r'\n"
        f"set ylabel '{ylabel}'\n"
        f"set terminal pngcairo size 800,600\nset output '{path.stem}.png'\n"
        f"plot {plots}\n"
    )


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_summary(path: Path, summary: dict) -> None:
    path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=_json_default) + "\n")


def _grid(config: ScenarioConfig) -> np.ndarray:
    return np.linspace(config.r_min, config.r_max, config.grid_points)


def _prepare(out: Path) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_solve(config: ScenarioConfig, out: Path, name: str = "solve") -> dict:
    out = _prepare(out)
    outcome = solve_pair(config)
    write_csv(out / f"{name}.csv", CSV_COLUMNS, profile_rows(outcome, _grid(config)))
    write_gnuplot(out / f"{name}_mass.gp", f"{name}.csv", "M(r)",
                  [(2, "spin up"), (4, "spin down")], "mass distribution")
    write_summary(out / f"{name}.json", outcome.summary)
    return outcome.summary


def run_potential(config: ScenarioConfig, out: Path) -> dict:
    out = _prepare(out)
    outcome = solve_pair(config)
    grid = np.linspace(config.r_min, config.r_max, 500)
    rows = [[r[0], r[5], r[6]] for r in profile_rows(outcome, grid)]
    write_csv(out / "potential.csv", ("r", "U_eff_up", "U_eff_down"), rows)
    write_gnuplot(out / "potential.gp", "potential.csv", "U_eff(r)",
                  [(2, "spin up"), (3, "spin down")], f"effective potential ({config.ordering})")
    summary = dict(outcome.summary)
    finite = [r for r in rows if r[1] is not None]
    summary["potential_samples"] = len(finite)
    write_summary(out / "potential.json", summary)
    return summary


def _overlay(outcomes: list[tuple[str, SolveOutcome]], grid: np.ndarray):
    header = ["r"]
    for tag, _ in outcomes:
        header += [f"M_up_{tag}", f"M_down_{tag}"]
    rows = []
    for r in grid:
        row = [float(r)]
        for _, oc in outcomes:
            for res in (oc.up, oc.down):
                lo, hi = res.profile.span
                row.append(float(res.profile.mass(r)) if lo <= r <= hi else None)
        rows.append(row)
    return header, rows


def run_spectrum_sweep(config: ScenarioConfig, out: Path, N_list=(0, 1, 2, 3)) -> dict:
    out = _prepare(out)
    done = []
    per_n = {}
    for N in N_list:
        try:
            cfg = config.replace(N=int(N))
            oc = solve_pair(cfg)
        except Exception as exc:  # keep sweeping, record the failure
            per_n[str(N)] = {"error": f"{type(exc).__name__}: {exc}"}
            continue
        write_csv(out / f"sweep_N{N}.csv", CSV_COLUMNS, profile_rows(oc, _grid(cfg)))
        done.append((f"N{N}", oc))
        per_n[str(N)] = {
            "crossing_radius": oc.summary["up"]["crossing_radius"],
            "crossing_radius_down": oc.summary["down"]["crossing_radius"],
            "termination": oc.summary["up"]["termination"],
            "span": oc.summary["up"]["span"],
        }
    header, rows = _overlay(done, _grid(config))
    write_csv(out / "sweep_combined.csv", header, rows)
    write_gnuplot(out / "sweep_combined.gp", "sweep_combined.csv", "M(r)",
                  [(2 + 2 * i, f"N = {tag[1:]}") for i, (tag, _) in enumerate(done)],
                  f"mass distribution, n = {config.n}")
    summary = {"config": config.to_dict(), "N_list": [int(N) for N in N_list], "per_N": per_n}
    write_summary(out / "sweep.json", summary)
    return summary


def run_compare_n(config: ScenarioConfig, out: Path, n_list=(0, -1800)) -> dict:
    out = _prepare(out)
    done = []
    per_n = {}
    for n in n_list:
        try:
            oc = solve_pair(config.replace(n=int(n)))
        except Exception as exc:
            per_n[str(n)] = {"error": f"{type(exc).__name__}: {exc}"}
            continue
        done.append((f"n{n}", oc))
        per_n[str(n)] = {
            "crossing_radius": oc.summary["up"]["crossing_radius"],
            "termination": oc.summary["up"]["termination"],
            "covers_r_i_to_r_max": oc.summary["up"]["covers_r_i_to_r_max"]
            and oc.summary["down"]["covers_r_i_to_r_max"],
            "span": oc.summary["up"]["span"],
        }
    header, rows = _overlay(done, _grid(config))
    write_csv(out / "compare_n.csv", header, rows)
    write_gnuplot(out / "compare_n.gp", "compare_n.csv", "M(r)",
                  [(2 + 2 * i, f"n = {tag[1:]}") for i, (tag, _) in enumerate(done)],
                  "mass distribution for several dyon charges")
    radii = [(int(k), v.get("crossing_radius")) for k, v in per_n.items()]
    summary = {"config": config.to_dict(), "n_list": [int(n) for n in n_list], "per_n": per_n,
               "crossing_order": [n for n, r in sorted((x for x in radii if x[1] is not None),
                                                       key=lambda x: x[1])]}
    write_summary(out / "compare_n.json", summary)
    return summary


def run_feasibility(config: ScenarioConfig, out: Path, n_from: int, n_to: int,
                    n_step: int) -> dict:
    out = _prepare(out)
    if n_step >= 0:
        raise ValueError("n_step must be negative (scan downward)")
    rows = []
    for n in range(n_from, n_to - 1, n_step):
        try:
            oc = solve_pair(config.replace(n=n))
        except Exception as exc:
            log.warning("n = %d failed: %s", n, exc)
            rows.append([n, False, None])
            continue
        completed = all(res.profile.covers(config.r_i, config.r_max) for res in (oc.up, oc.down))
        events = [res.termination.r_event for res in (oc.up, oc.down)
                  if res.termination.r_event is not None]
        rows.append([n, completed, min(events) if events and not completed else None])
    with open(out / "feasibility.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "completed", "r_event"])
        for n, completed, r_ev in rows:
            writer.writerow([n, "true" if completed else "false", fmt(r_ev)])
    summary = {"config": config.to_dict(), "n_from": n_from, "n_to": n_to, "n_step": n_step,
               "results": [{"n": n, "completed": c, "r_event": r} for n, c, r in rows]}
    write_summary(out / "feasibility.json", summary)
    return summary


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: str
    passed: bool

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name:<44} {self.value:<12.4e} {self.limit}"


def verify_checks(config: ScenarioConfig) -> list[Check]:
    q = config.quantum_numbers()
    rng = np.random.default_rng(config.seed)
    h = config.fd_step
    checks: list[Check] = []

    rs = np.linspace(0.05, 2.0, 200)
    ok_res = float(np.max(radial_residual(rs, q, 1)))
    checks.append(Check("radial equation, |eQ| convention", ok_res, "< 1e-8", ok_res < 1e-8))
    if q.n != 0:
        bad = float(np.max(radial_residual(rs, q, -1)))
        checks.append(Check("radial equation, literal eQ (must fail)", bad, "> 1e-2", bad > 1e-2))

    kum = max(float(np.max(kummer_ode_residual(N, 2.0, np.linspace(0.1, 10.0, 50))))
              for N in range(7))
    checks.append(Check("Kummer equation, N <= 6", kum, "< 1e-6", kum < 1e-6))

    mu = q.mu
    components = [(mu, mu, q.m - HalfInt(1)), (mu, mu, q.m + HalfInt(1))] if mu.twice_value else [
        (HalfInt(0), HalfInt(0), HalfInt(0))]
    norm = max(abs(harmonic_norm(*c) - 1.0) for c in components)
    checks.append(Check("harmonic normalization", norm, "< 1e-6", norm < 1e-6))

    thetas = rng.uniform(0.2, math.pi - 0.2, 20)
    phis = rng.uniform(0.0, 2 * math.pi, 20)
    az = max(azimuthal_check(q, t, p, 5e-4) for t, p in zip(thetas, phis))
    checks.append(Check("azimuthal eigenvalue", az, "< 1e-8", az < 1e-8))

    if mu.twice_value:
        s_vals = [s for t, p in zip(thetas, phis) for s in angular_operator_check(q, t, p, h).measured_s]
        spread = max(s_vals) - min(s_vals)
        s_mean = float(np.mean(s_vals))
        checks.append(Check(f"sigma.r coefficient (measured {round(s_mean):+d})", spread,
                            "spread < 1e-4", spread < 1e-4 and abs(abs(s_mean) - 1) < 1e-4))
        reports = [k2_identity_check(q, t, p, h) for t, p in zip(thetas, phis)]
        signs = {r.sign for r in reports}
        worst = max(r.max_rel_residual for r in reports)
        checks.append(Check(f"K^2 identity (closes with {signs})", worst, "<= 1e-4",
                            len(signs) == 1 and None not in signs and worst <= 1e-4))
    else:
        rem = max(abs(angular_remainder(0, 0, 0, t, p, h)) for t, p in zip(thetas, phis))
        checks.append(Check("angular remainder at mu = 0", rem, "< 1e-6", rem < 1e-6))
        rep = max(k2_identity_check(q, t, p, h).max_rel_residual for t, p in zip(thetas, phis))
        checks.append(Check("K^2 identity at mu = 0", rep, "<= 1e-4", rep <= 1e-4))

    oc = solve_pair(config)
    for res in (oc.up, oc.down):
        v = res.residual.max_rel_residual
        checks.append(Check(f"mapping ODE residual, {res.branch.label}", v, "< 1e-6", v < 1e-6))
    return checks


def run_verify(config: ScenarioConfig, out: Path | None = None) -> tuple[bool, list[Check]]:
    checks = verify_checks(config)
    if out is not None:
        out = _prepare(out)
        write_summary(out / "verify.json", {
            "config": config.to_dict(),
            "checks": [{"name": c.name, "value": c.value, "limit": c.limit, "passed": bool(c.passed)}
                       for c in checks],
        })
    return all(c.passed for c in checks), checks
