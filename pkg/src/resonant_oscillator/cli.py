"""Experiment harness: configuration, orchestration, and bit-exact exports.

Experiments
-----------
tables      closed-form inner products against the quadrature oracle; chi table
trajectory  backward shoots over the M schedule, Cauchy gaps, diagnostics
evolve      backward remainder runs, decay envelope, mass conservation
growth      physical reconstruction: H^1 growth identity and potential decay
cr-demo     CR mode solution, scaling-solution residual, CR potential decay

Every run writes ``manifest.json`` (config echo, payload content hash,
wall clock) next to its CSV/JSON payloads.  Payloads are deterministic:
reruns with the same configuration produce byte-identical files.  Numbers
are printed with shortest round-trip decimals.  The process exits nonzero
iff one of the experiment's acceptance checks fails.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import basis, bubble, cr, evolution

_EXPERIMENTS = ("tables", "trajectory", "evolve", "growth", "cr-demo")


@dataclass
class RunConfig:
    """Description of one experiment run; field names match the CLI flags."""

    experiment: str
    s0: float = bubble.DEFAULT_S0
    M_schedule: tuple[float, ...] = (1e3, 1e4, 1e5)
    K: int = 128
    cr_modes: int = 64
    tol: float = 1e-10
    atol: float = 1e-13
    r_exponent: float = 2.0
    t_samples: tuple[float, ...] | None = None
    out_dir: str = "runs"

    def validate(self) -> None:
        if self.experiment not in _EXPERIMENTS:
            raise ValueError(
                f"field 'experiment': {self.experiment!r} not one of {_EXPERIMENTS}"
            )
        for name in ("tol", "atol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"field '{name}': tolerances must be positive")
        if self.s0 <= math.e:
            raise ValueError(f"field 's0': must exceed e = {math.e:.6f}")
        ms = tuple(self.M_schedule)
        if len(ms) == 0 or any(b <= a for a, b in zip(ms, ms[1:])):
            raise ValueError("field 'M_schedule': must be nonempty, strictly increasing")
        if ms[0] <= self.s0:
            raise ValueError("field 'M_schedule': every horizon must exceed s0")
        if self.K < 8 or self.cr_modes < 2:
            raise ValueError("field 'K'/'cr_modes': truncations too small")

    def to_json(self) -> str:
        data = dataclasses.asdict(self)
        data["M_schedule"] = list(self.M_schedule)
        data["t_samples"] = None if self.t_samples is None else list(self.t_samples)
        return json.dumps(data, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        if "M_schedule" in data and data["M_schedule"] is not None:
            data = {**data, "M_schedule": tuple(float(m) for m in data["M_schedule"])}
        if data.get("t_samples") is not None:
            data = {**data, "t_samples": tuple(float(t) for t in data["t_samples"])}
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


@dataclass
class RunOutput:
    """Manifest plus named payload byte strings, as written to disk."""

    manifest: dict
    payloads: dict[str, bytes]
    passed: bool
    out_dir: Path


def _fmt(x) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _csv(header: list[str], rows) -> bytes:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    return ("\n".join(lines) + "\n").encode()


def _json_payload(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode()


# ----------------------------------------------------------------------
# experiment bodies: each returns (payloads, checks)
# ----------------------------------------------------------------------


def _run_tables(cfg: RunConfig):
    rule = basis.RadialQuadrature.for_max_index(30)
    rows = []
    max_delta = 0.0
    for kind, closed in (("h0", basis.inner_h_h0_h), ("h0_sq", basis.inner_h_h0sq_h)):
        table = basis.hermite_radial_table(30, rule.nodes)
        for n in range(31):
            for k in range(31):
                prod = table[n] * table[0] * table[k]
                if kind == "h0_sq":
                    prod = prod * table[0]
                oracle = float(rule.integrate(prod))
                val = closed(n, k)
                delta = abs(val - oracle)
                max_delta = max(max_delta, delta)
                rows.append((kind, n, k, val, oracle, delta))
    inner_csv = _csv(["kind", "n", "k", "closed_form", "quadrature", "delta"], rows)

    tensor = cr.ChiTensor.build(min(cfg.cr_modes, 24))
    chi_rows = []
    for m in range(tensor.max_index):
        for n in range(tensor.max_index):
            for p in range(tensor.max_index):
                q = m - n + p
                if 0 <= q < tensor.max_index:
                    chi_rows.append((m, n, p, q, float(tensor.table[m, n, p])))
    chi_csv = _csv(["n1", "n2", "n3", "n4", "value"], chi_rows)

    chi_1100_err = abs(tensor.value(1, 1, 0, 0) - math.pi / 4.0)
    checks = {
        "closed_form_vs_oracle_max_delta": max_delta,
        "closed_form_vs_oracle_ok": bool(max_delta <= 1e-10),
        "chi_1100_error": chi_1100_err,
        "chi_1100_ok": bool(chi_1100_err <= 1e-9),
    }
    return {"inner_products.csv": inner_csv, "chi.csv": chi_csv}, checks


def _shared_grids(cfg: RunConfig) -> dict[float, np.ndarray]:
    """Sample grids whose common section is shared exactly across horizons."""
    ms = cfg.M_schedule
    base = np.geomspace(cfg.s0, ms[0], max(1024, int(600 * math.log10(ms[0] / cfg.s0))))
    grids = {ms[0]: base}
    for m_prev, m in zip(ms, ms[1:]):
        extra = np.geomspace(m_prev, m, max(512, int(600 * math.log10(m / m_prev))))
        grids[m] = np.concatenate([grids[m_prev], extra[1:]])
    return grids


def _run_trajectory(cfg: RunConfig):
    grids = _shared_grids(cfg)
    with concurrent.futures.ThreadPoolExecutor(max_workers=len(grids)) as pool:
        futures = {
            m: pool.submit(
                bubble.backward_shoot, m, cfg.s0, cfg.tol, atol=cfg.atol, s_grid=g
            )
            for m, g in grids.items()
        }
        trajs = {m: f.result() for m, f in futures.items()}

    ms = cfg.M_schedule
    cauchy = []
    for m1, m2 in zip(ms, ms[1:]):
        n1 = grids[m1].size
        d = np.abs(trajs[m1].rho - trajs[m2].rho[:n1]) + np.abs(
            trajs[m1].psi - trajs[m2].psi[:n1]
        )
        cauchy.append(float(d.max()))

    finest = bubble.time_map(trajs[ms[-1]])
    fit_hi = min(1e6, ms[-1])
    diag = bubble.trajectory_diagnostics(finest, fit_window=(min(1e3, ms[-1] / 10), fit_hi))

    envelopes = {}
    for m in ms:
        traj = trajs[m]
        half = traj.s <= m / 2.0
        envelopes[f"M={m:g}"] = {
            "s_rho": float(np.max(np.abs(traj.s[half] * traj.rho[half]))),
            "s_psi": float(np.max(np.abs(traj.s[half] * traj.psi[half]))),
        }

    rows = zip(
        finest.s, finest.a, finest.theta, finest.rho, finest.psi, finest.L, finest.b, finest.t
    )
    traj_csv = _csv(["s", "a", "theta", "rho", "psi", "L", "b", "t"], rows)

    cauchy_shrinking = all(b <= a for a, b in zip(cauchy, cauchy[1:])) if len(cauchy) > 1 else True
    checks = {
        "cauchy_sup_gaps": cauchy,
        "cauchy_ok": bool(all(c <= 1e-2 for c in cauchy) and cauchy_shrinking),
        "envelopes": envelopes,
        "diagnostics": diag.as_dict(),
        "slope_ok": bool(abs(diag.slope - 0.25) <= 0.0125),
        "energy_identity_ok": bool(diag.energy_identity_max <= 1e-9),
    }
    payloads = {
        "trajectory.csv": traj_csv,
        "diagnostics.json": _json_payload(checks),
    }
    return payloads, checks


def _run_evolve(cfg: RunConfig):
    m_pde = cfg.M_schedule[0]
    # the doubled-M grid extends the base grid, so comparisons need no interpolation
    base_grid = np.geomspace(cfg.s0, m_pde, max(768, int(500 * math.log10(m_pde / cfg.s0))))
    ext_grid = np.concatenate([base_grid, np.geomspace(m_pde, 2 * m_pde, 256)[1:]])
    pde_atol = min(cfg.atol * 10, 1e-12)
    jobs = {
        "base": (m_pde, cfg.K, base_grid),
        "doubled_m": (2 * m_pde, cfg.K, ext_grid),
        "doubled_k": (m_pde, 2 * cfg.K, base_grid),
    }
    with concurrent.futures.ThreadPoolExecutor(max_workers=len(jobs)) as pool:
        futures = {
            name: pool.submit(
                evolution.construct_remainder,
                m,
                cfg.s0,
                n_modes=k,
                tol=cfg.tol,
                atol=pde_atol,
                s_grid=grid,
            )
            for name, (m, k, grid) in jobs.items()
        }
        runs = {name: f.result() for name, f in futures.items()}
    base, doubled_m, doubled_k = runs["base"], runs["doubled_m"], runs["doubled_k"]

    r = cfg.r_exponent
    half = base.s <= m_pde / 2.0
    envelope = np.sqrt(base.s) * base.w_sobolev(r)
    env_const = float(envelope[half].max())
    half_m = doubled_m.s <= m_pde
    env_const_m = float((np.sqrt(doubled_m.s) * doubled_m.w_sobolev(r))[half_m].max())
    env_const_k = float((np.sqrt(doubled_k.s) * doubled_k.w_sobolev(r))[half].max())

    lam = (4.0 * np.arange(base.n_modes) + 2.0) ** r
    diff = base.g[half] - doubled_m.g[: base.g.shape[0]][half]
    cauchy_gap = float(np.sqrt((np.abs(diff) ** 2 * lam).sum(axis=1)).max())

    mass = base.v_mass()
    mass_drift = float(np.abs(mass - mass[0]).max())

    rows = zip(base.s, base.w_sobolev(1.0), base.w_sobolev(r), envelope)
    env_csv = _csv(["s", "w_h1", f"w_h{r:g}", f"sqrt_s_w_h{r:g}"], rows)

    checks = {
        "envelope_const": env_const,
        "envelope_const_doubled_M": env_const_m,
        "envelope_const_doubled_K": env_const_k,
        "envelope_stable_ok": bool(
            abs(env_const_m - env_const) <= 0.5 * env_const
            and abs(env_const_k - env_const) <= 1e-6 * max(env_const, 1.0)
        ),
        "cauchy_gap_h2": cauchy_gap,
        "cauchy_ok": bool(cauchy_gap <= 1e-3),
        "mass_drift": mass_drift,
        "mass_ok": bool(mass_drift <= 1e-8),
    }
    return {"envelope.csv": env_csv, "remainder.json": _json_payload(checks)}, checks


def _run_growth(cfg: RunConfig):
    m_pde = 4.0 * cfg.M_schedule[0]
    if cfg.M_schedule[-1] < 2.0 * m_pde:
        raise ValueError(
            "field 'M_schedule': the growth experiment needs the last horizon to be "
            "at least 8x the first (the remainder run reaches 4x the first horizon)"
        )
    traj = bubble.time_map(
        bubble.backward_shoot(cfg.M_schedule[-1], cfg.s0, cfg.tol, atol=cfg.atol)
    )
    run = evolution.construct_remainder(
        m_pde, cfg.s0, n_modes=cfg.K, tol=cfg.tol, atol=min(cfg.atol * 10, 1e-12)
    )

    gate = min(1e3, m_pde / 4.0)
    if cfg.t_samples is not None:
        t_samples = np.asarray(cfg.t_samples, dtype=float)
    else:
        lo = max(gate, 4.0 * cfg.s0)
        anchors = run.s[(run.s >= lo) & (run.s <= m_pde / 2.0)]
        anchors = anchors[:: max(1, anchors.size // 40)]
        t_samples = np.asarray(traj.t_of_s(anchors), dtype=float)
    series = evolution.measure_growth(traj, run, t_samples)

    identity_gap = np.abs(series.h1_norm_sq - series.four_a)
    s_vals = np.array([float(traj.s_of_t(t)) for t in series.t])
    gated = s_vals >= gate
    identity_max = float(identity_gap[gated].max()) if gated.any() else float("nan")
    ratio = series.h1_norm_sq / np.log(series.t)

    rows = zip(series.t, s_vals, series.h1_norm_sq, series.four_a, series.remainder_h1, ratio)
    growth_csv = _csv(
        ["t", "s", "h1_norm_sq", "four_a", "remainder_h1", "h1_over_log_t"], rows
    )

    # potential decay along the trajectory, up to the top of the shoot range
    s_pot = np.geomspace(cfg.s0 * 1.05, traj.s[-1] * 0.98, 400)
    t_pot = np.asarray(traj.t_of_s(s_pot), dtype=float)
    radii = np.linspace(0.0, 12.0, 241)
    norms = np.array([evolution.potential_field(traj, t, radii).l2_norm for t in t_pot])
    early_max = float(norms[t_pot <= 10.0 * cfg.s0].max())
    tail = float(norms[-1])
    decay_ratio = tail / early_max
    pot_rows = zip(t_pot, s_pot, norms)
    pot_csv = _csv(["t", "s", "V_l2_norm"], pot_rows)

    checks = {
        "growth_identity_max": identity_max,
        "growth_identity_ok": bool(identity_max <= 0.05),
        "h1_over_log_t_last": float(ratio[-1]),
        "potential_decay_ratio": decay_ratio,
        "potential_decay_ok": bool(decay_ratio <= 1e-3),
    }
    payloads = {
        "growth.csv": growth_csv,
        "potential_norms.csv": pot_csv,
        "growth.json": _json_payload(checks),
    }
    for t in (t_pot[0], t_pot[t_pot.size // 2], t_pot[-1]):
        sample = evolution.potential_field(traj, float(t), radii)
        payloads[f"potential_t{sample.t:.6g}.csv"] = _csv(
            ["radius", "value"], zip(sample.radii, sample.values)
        )
    return payloads, checks


def _run_cr_demo(cfg: RunConfig):
    tensor = cr.ChiTensor.build(cfg.cr_modes)
    report = cr.cr_residual(0.1, np.linspace(0.0, 5.0, 11), cfg.cr_modes, tensor)

    f_family = lambda s: cr.scaling_solution(0.1, s, cfg.cr_modes, tensor)[1]  # noqa: E731
    radii = np.linspace(0.0, 10.0, 201)
    t_grid = np.geomspace(4.0, 1e4, 60)
    sups = np.array([cr.cr_potential(f_family, float(t), radii).sup_value for t in t_grid])

    chi_rows = []
    for m in range(min(tensor.max_index, 16)):
        for n in range(min(tensor.max_index, 16)):
            for p in range(min(tensor.max_index, 16)):
                q = m - n + p
                if 0 <= q < tensor.max_index:
                    chi_rows.append((m, n, p, q, float(tensor.table[m, n, p])))

    checks = {
        "max_residual": report.max_residual,
        "residual_ok": bool(report.max_residual <= 1e-8),
        "beta": [report.beta.real, report.beta.imag],
        "lambda": report.lam,
        "h1_growth_rate": report.h1_growth_rate,
        "potential_sup_decay_ratio": float(sups[-1] / sups[0]),
    }
    payloads = {
        "residuals.json": _json_payload(checks),
        "chi.csv": _csv(["n1", "n2", "n3", "n4", "value"], chi_rows),
        "cr_potential.csv": _csv(["t", "V_sup"], zip(t_grid, sups)),
    }
    return payloads, checks


_BODIES = {
    "tables": _run_tables,
    "trajectory": _run_trajectory,
    "evolve": _run_evolve,
    "growth": _run_growth,
    "cr-demo": _run_cr_demo,
}


def run(cfg: RunConfig) -> RunOutput:
    """Dispatch an experiment, write manifest and payloads, return them."""
    cfg.validate()
    start = time.monotonic()
    payloads, checks = _BODIES[cfg.experiment](cfg)
    elapsed = time.monotonic() - start

    digest = hashlib.sha256()
    for name in sorted(payloads):
        digest.update(name.encode())
        digest.update(payloads[name])
    passed = all(v for k, v in checks.items() if k.endswith("_ok"))
    manifest = {
        "experiment": cfg.experiment,
        "config": json.loads(cfg.to_json()),
        "content_hash": digest.hexdigest(),
        "wall_clock_s": elapsed,
        "checks": checks,
        "passed": passed,
    }

    out_dir = Path(cfg.out_dir) / cfg.experiment
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, blob in payloads.items():
        (out_dir / name).write_bytes(blob)
    (out_dir / "manifest.json").write_bytes(_json_payload(manifest))
    return RunOutput(manifest=manifest, payloads=payloads, passed=passed, out_dir=out_dir)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resonant-oscillator",
        description="Resonant-bubble experiments for the 2D quantum harmonic oscillator",
    )
    parser.add_argument("experiment", choices=_EXPERIMENTS)
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--s0", type=float)
    parser.add_argument("--M", type=str, help="comma-separated shooting horizons")
    parser.add_argument("--K", type=int)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--out", type=str, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except json.JSONDecodeError as exc:
            print(f"config {args.config}: line {exc.lineno}, col {exc.colno}: {exc.msg}",
                  file=sys.stderr)
            return 2
    data["experiment"] = args.experiment
    # flags win over the config file
    if args.s0 is not None:
        data["s0"] = args.s0
    if args.M is not None:
        data["M_schedule"] = [float(x) for x in args.M.split(",")]
    if args.K is not None:
        data["K"] = args.K
    if args.tol is not None:
        data["tol"] = args.tol
    if args.out is not None:
        data["out_dir"] = args.out
    try:
        cfg = RunConfig.from_dict(data)
    except (ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    output = run(cfg)
    for name, value in output.manifest["checks"].items():
        if name.endswith("_ok"):
            print(f"{name.removesuffix('_ok')}: {'pass' if value else 'FAIL'}")
    print(f"outputs in {output.out_dir} (hash {output.manifest['content_hash'][:12]})")
    return 0 if output.passed else 1


if __name__ == "__main__":
    sys.exit(main())
