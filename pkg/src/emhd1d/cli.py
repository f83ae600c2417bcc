"""Command-line front end.

    emhd1d <run|blowup|symmetry|lp|selftest> --config PATH [--sweep PATH]
           [--out DIR] [--seed U64]

Config files are flat ``section.key = value`` text (blank lines and ``#``
comments ignored).  Exit codes: 0 pass, 1 tolerance failure, 2 config error,
3 numerical abort (CFL collapse outside a blowup run).  ``--sweep`` takes a
file listing one config path per line and fans the runs out across worker
threads, capped by the EMHD1D_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .blowup import (
    FitWindowError,
    advect_trajectory,
    make_reference_datum,
    measure_blowup_time,
    predict_blowup_time,
    pv_blowup_coefficient,
    riccati_invariant_report,
    run_blowup,
)
from .diagnostics import norm_series, rough_datum
from .lp import bernstein_check, commutator_check, norm_equivalence_ratio
from .solver import CFLCollapse, ModelParams, StepperConfig, evolve
from .spectral import (
    GridSpec,
    SpectralField,
    derivative,
    frac_laplacian,
    hilbert,
    product,
    riesz_potential,
)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``dotted.key = value`` lines into a string dict."""
    out: dict[str, str] = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {raw!r}")
        key, val = (p.strip() for p in line.split("=", 1))
        if not key or not val:
            raise ConfigError(f"line {ln}: empty key or value")
        out[key] = val
    return out


@dataclass
class RunConfig:
    """Typed view of a config file with defaults for every key."""

    grid_L: float = 6.0
    grid_N: int = 256
    grid_dealias: float = 2.0 / 3.0
    model_kind: str = "full"
    model_mu: float = 1.0
    model_alpha: float = 2.0
    stepper_scheme: str = "ifrk4"
    stepper_dt_init: float = 1e-3
    stepper_cfl_safety: float = 0.5
    stepper_t_end: float = 1.0
    stepper_blowup_threshold: float = math.inf
    stepper_adaptive: bool = True
    datum_kind: str = "gaussian_packet"
    datum_s_base: float = 0.5
    datum_norm: float = 0.05
    datum_seed: int = 0
    datum_path: str = ""
    outputs_snapshot_cadence: int = 10
    outputs_directory: str = "out"
    diagnostics_s_list: tuple[float, ...] = (1.0,)
    symmetry_lam: float = 2.0
    raw: dict = field(default_factory=dict)

    KEYMAP = {
        "grid.L": ("grid_L", float),
        "grid.N": ("grid_N", int),
        "grid.dealias": ("grid_dealias", float),
        "model.kind": ("model_kind", str),
        "model.mu": ("model_mu", float),
        "model.alpha": ("model_alpha", float),
        "stepper.scheme": ("stepper_scheme", str),
        "stepper.dt_init": ("stepper_dt_init", float),
        "stepper.cfl_safety": ("stepper_cfl_safety", float),
        "stepper.t_end": ("stepper_t_end", float),
        "stepper.blowup_threshold": ("stepper_blowup_threshold", float),
        "stepper.adaptive": ("stepper_adaptive", None),
        "datum.kind": ("datum_kind", str),
        "datum.s_base": ("datum_s_base", float),
        "datum.norm": ("datum_norm", float),
        "datum.seed": ("datum_seed", int),
        "datum.path": ("datum_path", str),
        "outputs.snapshot_cadence": ("outputs_snapshot_cadence", int),
        "outputs.directory": ("outputs_directory", str),
        "diagnostics.s_list": ("diagnostics_s_list", None),
        "symmetry.lam": ("symmetry_lam", float),
    }

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        kv = parse_config_text(p.read_text())
        cfg = cls(raw=dict(kv))
        for key, val in kv.items():
            if key not in cls.KEYMAP:
                raise ConfigError(f"unknown config key: {key}")
            attr, typ = cls.KEYMAP[key]
            try:
                if key == "diagnostics.s_list":
                    setattr(cfg, attr, tuple(float(v) for v in val.split(",")))
                elif key == "stepper.adaptive":
                    setattr(cfg, attr, val.lower() in ("1", "true", "yes", "on"))
                else:
                    setattr(cfg, attr, typ(val))
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {val!r}") from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.datum_kind not in ("paper_blowup", "gaussian_packet", "random_rough", "from_file"):
            raise ConfigError(f"unknown datum.kind: {self.datum_kind}")
        if self.datum_kind == "from_file" and not Path(self.datum_path).is_file():
            raise ConfigError(f"datum.path not found: {self.datum_path}")
        try:
            GridSpec(self.grid_L, self.grid_N, self.grid_dealias)
            ModelParams(kind=self.model_kind, mu=self.model_mu, alpha=self.model_alpha)
            self.stepper()
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self) -> GridSpec:
        return GridSpec(self.grid_L, self.grid_N, self.grid_dealias)

    def model(self) -> ModelParams:
        return ModelParams(kind=self.model_kind, mu=self.model_mu, alpha=self.model_alpha)

    def stepper(self) -> StepperConfig:
        return StepperConfig(
            scheme=self.stepper_scheme,
            dt_init=self.stepper_dt_init,
            cfl_safety=self.stepper_cfl_safety,
            t_end=self.stepper_t_end,
            blowup_threshold=self.stepper_blowup_threshold,
            adaptive=self.stepper_adaptive,
            snapshot_cadence=self.outputs_snapshot_cadence,
        )

    def datum(self, grid: GridSpec, seed: int | None = None) -> SpectralField:
        sd = self.datum_seed if seed is None else seed
        if self.datum_kind == "paper_blowup":
            return make_reference_datum(grid).B0
        if self.datum_kind == "gaussian_packet":
            return SpectralField.from_function(grid, lambda x: np.exp(-(x**2)) * np.sin(3.0 * x))
        if self.datum_kind == "random_rough":
            return rough_datum(grid, self.datum_s_base, norm=self.datum_norm, seed=sd)
        arr = np.fromfile(self.datum_path, dtype="<f8")
        if arr.shape != (grid.n_modes,):
            raise ConfigError(
                f"datum file holds {arr.size} float64 values, grid needs {grid.n_modes}"
            )
        return SpectralField.from_phys(grid, arr)


def _write_manifest(out: Path, cfg: RunConfig, extra: dict) -> None:
    manifest = {
        "version": __version__,
        "numpy": np.__version__,
        "config": cfg.raw,
        **extra,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_snapshots(out: Path, run) -> None:
    """Raw little-endian float64 frames plus a JSON sidecar with the index."""
    fields = run.snapshot_fields()
    data = np.stack([f.phys for f in fields]).astype("<f8")
    data.tofile(out / "snapshots.bin")
    sidecar = {
        "dtype": "<f8",
        "shape": [len(fields), run.grid.n_modes],
        "grid": {"L": run.grid.half_length, "N": run.grid.n_modes},
        "times": [float(t) for t in run.times],
    }
    (out / "snapshots.json").write_text(json.dumps(sidecar, indent=2) + "\n")


def cmd_run(cfg: RunConfig, out: Path, seed: int | None) -> int:
    grid = cfg.grid()
    B0 = cfg.datum(grid, seed)
    try:
        run = evolve(B0, cfg.model(), cfg.stepper())
    except CFLCollapse:
        return EXIT_NUMERICAL
    if run.termination == "cfl_collapse" and not math.isfinite(cfg.stepper_blowup_threshold):
        _write_manifest(out, cfg, {"termination": run.termination})
        return EXIT_NUMERICAL
    ns = norm_series(run, list(cfg.diagnostics_s_list))
    with (out / "series.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        header = ["t"]
        for s in ns.s_list:
            header += [f"hs_{s:g}", f"hdiss_{s:g}", f"budget_{s:g}"]
        w.writerow(header)
        for j, t in enumerate(ns.times):
            row = [f"{t:.17g}"]
            for i in range(len(ns.s_list)):
                row += [f"{ns.hs[i, j]:.17g}", f"{ns.hs_diss[i, j]:.17g}", f"{ns.budget[i, j]:.17g}"]
            w.writerow(row)
    _write_snapshots(out, run)
    _write_manifest(out, cfg, {"termination": run.termination, "steps": len(run.step_times) - 1})
    return EXIT_OK


def cmd_blowup(cfg: RunConfig, out: Path) -> int:
    """Riccati blowup harness with the reference configuration forced."""
    grid = GridSpec(cfg.grid_L, cfg.grid_N, cfg.grid_dealias)
    run, datum = run_blowup(grid, scheme=cfg.stepper_scheme)
    states = advect_trajectory(run, datum.x0)
    w0 = datum.w0
    try:
        t_est, slope, resid = measure_blowup_time(states, w0)
    except FitWindowError:
        return EXIT_NUMERICAL
    rep = riccati_invariant_report(run, states, t_max=0.8 / w0)
    t_pred = predict_blowup_time(datum)
    w0_pv = pv_blowup_coefficient()
    report = {
        "w0": w0,
        "w0_pv_oracle": w0_pv,
        "w0_rel_diff": abs(w0 - w0_pv) / abs(w0_pv),
        "T_predicted": t_pred,
        "T_fitted": t_est,
        "T_rel_err": abs(t_est - t_pred) / t_pred,
        "slope": slope,
        "fit_residual": resid,
        "max_bx_defect": rep.max_bx_defect,
        "max_bxx_rel": rep.max_bxx_rel,
        "termination": run.termination,
    }
    (out / "blowup_report.json").write_text(json.dumps(report, indent=2) + "\n")
    with (out / "trajectory.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "X", "bx", "bxx", "w", "inv_w"])
        for st in states:
            w.writerow(
                [f"{v:.17g}" for v in (st.t, st.X, st.bx, st.bxx, st.w, 1.0 / st.w)]
            )
    _write_manifest(out, cfg, {"report": report})
    ok = (
        abs(slope + 1.0) <= 0.01
        and resid <= 1e-3
        and report["T_rel_err"] <= 0.02
        and report["w0_rel_diff"] <= 1e-4
    )
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_symmetry(cfg: RunConfig, out: Path) -> int:
    """Discrete check of the rescaling invariance B -> lam^(a-2) B(lam x, lam^a t).

    Run A uses the configured grid and a fixed dt; run B uses the rescaled
    datum on the contracted grid with dt scaled by lam^alpha.  The schemes
    commute with the rescaling exactly, so the matched-time relative L2
    mismatch is roundoff-level for any smooth pre-blowup run.
    """
    lam = cfg.symmetry_lam
    alpha = cfg.model_alpha
    grid_a = cfg.grid()
    grid_b = GridSpec(cfg.grid_L / lam, cfg.grid_N, cfg.grid_dealias)
    B_a = cfg.datum(grid_a)
    B_b = SpectralField.from_phys(grid_b, lam ** (alpha - 2.0) * B_a.phys)
    n_steps = max(1, int(round(cfg.stepper_t_end / cfg.stepper_dt_init)))
    dt_b = cfg.stepper_t_end / n_steps
    cfg_b = StepperConfig(
        scheme=cfg.stepper_scheme, dt_init=dt_b, t_end=cfg.stepper_t_end,
        adaptive=False, snapshot_cadence=10**9,
    )
    cfg_a = StepperConfig(
        scheme=cfg.stepper_scheme, dt_init=dt_b * lam**alpha,
        t_end=cfg.stepper_t_end * lam**alpha, adaptive=False, snapshot_cadence=10**9,
    )
    params = cfg.model()
    run_a = evolve(B_a, params, cfg_a)
    run_b = evolve(B_b, params, cfg_b)
    ref = SpectralField.from_phys(grid_b, lam ** (alpha - 2.0) * run_a.final.phys)
    diff = np.linalg.norm(run_b.final.phys - ref.phys)
    rel = float(diff / max(np.linalg.norm(ref.phys), 1e-300))
    (out / "symmetry.json").write_text(
        json.dumps({"lambda": lam, "alpha": alpha, "rel_l2_mismatch": rel}, indent=2) + "\n"
    )
    _write_manifest(out, cfg, {"rel_l2_mismatch": rel})
    return EXIT_OK if rel <= 1e-6 else EXIT_TOLERANCE


def cmd_lp(cfg: RunConfig, out: Path, seed: int | None) -> int:
    grid = cfg.grid()
    sd = cfg.datum_seed if seed is None else seed
    b1, b2 = bernstein_check(grid, seed=sd)
    c1, c2 = commutator_check(grid, seed=sd)
    lo, hi = norm_equivalence_ratio(grid, s=1.0, seed=sd)
    report = {
        "bernstein": [b1.as_dict(), b2.as_dict()],
        "commutator": [c1.as_dict(), c2.as_dict()],
        "norm_equivalence": {"s": 1.0, "min_ratio": lo, "max_ratio": hi},
    }
    (out / "lp_report.json").write_text(json.dumps(report, indent=2) + "\n")
    _write_manifest(out, cfg, {"lp": report})
    ok = b1.max_ratio <= 4.0 and b2.max_ratio <= 4.0 and 0.5 <= lo and hi <= 2.0
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_selftest(out: Path | None = None) -> int:
    """Operator-identity suite on 100 random band-limited fields at N = 256."""
    from .lp import random_band_limited

    grid = GridSpec(np.pi, 256)
    rng = np.random.default_rng(12345)
    worst: dict[str, float] = {}

    def track(name: str, val: float) -> None:
        worst[name] = max(worst.get(name, 0.0), val)

    for _ in range(100):
        f = random_band_limited(grid, rng, decay=float(rng.uniform(0.05, 0.3)))
        scale = max(f.l2_norm(), 1e-300)
        # H(H f) = -(f - mean f)
        hh = hilbert(hilbert(f))
        track("HH", float(np.linalg.norm(hh.coef + f.coef - np.where(
            grid.mode_index == 0, f.coef, 0.0))) / scale)
        # Lambda = H d/dx
        track("lambda", float(np.linalg.norm(
            frac_laplacian(f, 1.0).coef - hilbert(derivative(f)).coef)) / scale)
        # Lambda^r I_r = id - mean
        r = 0.5
        track("riesz", float(np.linalg.norm(
            frac_laplacian(riesz_potential(f, r), r).coef
            - np.where(grid.mode_index == 0, 0.0, f.coef))) / scale)
        # H(f H f) = ((H f)^2 - f^2) / 2 on mean-free fields
        hf = hilbert(f)
        lhs = hilbert(product(f, hf, dealiased=False))
        rhs_f = 0.5 * (grid.to_coef(hf.phys**2) - grid.to_coef(f.phys**2))
        rhs_f[0] = 0.0  # both sides mean-free by the Hilbert transform
        track("fhf", float(np.linalg.norm(lhs.coef - rhs_f)) / scale)

    ok = all(v <= 1e-10 for v in worst.values())
    lines = [f"{k}: max relative defect {v:.3e}" for k, v in sorted(worst.items())]
    print("\n".join(lines))
    print("selftest:", "PASS" if ok else "FAIL")
    if out is not None:
        (out / "selftest.json").write_text(json.dumps(worst, indent=2) + "\n")
    return EXIT_OK if ok else EXIT_TOLERANCE


def _run_one(command: str, config_path: str, out_dir: Path, seed: int | None) -> int:
    try:
        cfg = RunConfig.from_file(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if command == "run":
            return cmd_run(cfg, out_dir, seed)
        if command == "blowup":
            return cmd_blowup(cfg, out_dir)
        if command == "symmetry":
            return cmd_symmetry(cfg, out_dir)
        if command == "lp":
            return cmd_lp(cfg, out_dir, seed)
        raise AssertionError(command)
    except CFLCollapse:
        return EXIT_NUMERICAL
    except (FloatingPointError, np.linalg.LinAlgError):
        return EXIT_NUMERICAL


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="emhd1d", description=__doc__)
    ap.add_argument("command", choices=["run", "blowup", "symmetry", "lp", "selftest"])
    ap.add_argument("--config", help="path to a key = value config file")
    ap.add_argument("--sweep", help="file listing one config path per line")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seed", type=int, default=None, help="override datum seed")
    args = ap.parse_args(argv)

    out = Path(args.out)
    if args.command == "selftest":
        out.mkdir(parents=True, exist_ok=True)
        return cmd_selftest(out)
    if args.sweep:
        sweep_file = Path(args.sweep)
        if not sweep_file.is_file():
            print(f"sweep file not found: {sweep_file}", file=sys.stderr)
            return EXIT_CONFIG
        paths = [ln.strip() for ln in sweep_file.read_text().splitlines() if ln.strip()]
        n_threads = int(os.environ.get("EMHD1D_THREADS", "4"))
        with ThreadPoolExecutor(max_workers=max(1, n_threads)) as pool:
            codes = list(
                pool.map(
                    lambda item: _run_one(args.command, item[1], out / f"sweep_{item[0]:03d}", args.seed),
                    enumerate(paths),
                )
            )
        return max(codes) if codes else EXIT_CONFIG
    if not args.config:
        print("--config is required (or --sweep)", file=sys.stderr)
        return EXIT_CONFIG
    return _run_one(args.command, args.config, out, args.seed)


if __name__ == "__main__":
    sys.exit(main())
