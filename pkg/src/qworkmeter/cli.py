"""Command-line front end: JSON config in, CSV distributions and JSON reports out.

Subcommands:

* run     -- execute one experiment config, writing dist.csv / chi.csv / report.json
* verify  -- fluctuation-theorem checks on a forward/backward pair of run outputs
* sample  -- shot-level Monte Carlo version of run
* sweep   -- repeat run over a lambda or sigma grid

Exit codes: 0 success, 2 config/validation failure, 3 numerical-check failure.
All floats are serialized with 17 significant digits; file writes are atomic.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import detector, models, sampling, workstats
from .core import (
    NumericalCheckError,
    check_density,
    check_hermitian,
    check_unitary,
    evolve,
    ground_state,
    thermal_state,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

TOLERANCE_PROFILES = {
    "default": {"normalization": 1e-6, "inversion_residual": 1e-6, "hermiticity": 1e-10},
    "strict": {"normalization": 1e-9, "inversion_residual": 1e-8, "hermiticity": 1e-10},
}


# ---------------------------------------------------------------------------
# Serialization helpers


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".qwm-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: str, rows):
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: str, payload: dict):
    atomic_write(path, json.dumps(_jsonable(payload), indent=2) + "\n")


def read_csv(path: str):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = [[float(v) for v in line.strip().split(",")] for line in fh if line.strip()]
    return header, np.array(data)


# ---------------------------------------------------------------------------
# Config parsing


class ConfigError(ValueError):
    pass


def _parse_matrix(entries, name: str) -> np.ndarray:
    def num(v):
        if isinstance(v, (int, float)):
            return complex(v)
        if isinstance(v, (list, tuple)) and len(v) == 2:
            return complex(v[0], v[1])
        raise ConfigError(f"{name}: entries must be numbers or [re, im] pairs")

    try:
        mat = np.array([[num(v) for v in row] for row in entries], dtype=complex)
    except (TypeError, ConfigError) as exc:
        raise ConfigError(f"{name}: not a matrix ({exc})")
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ConfigError(f"{name}: must be square, got shape {mat.shape}")
    return mat


def build_model(spec: dict, steps: int):
    """Return (H0, HT, U, extra) from a model config block."""
    kind = spec.get("type")
    if kind == "nmr":
        m = models.NmrModel(
            nu1=spec.get("nu1", 1.0), nu2=spec.get("nu2", 1.8),
            tau=spec.get("tau", 1.0), direction=spec.get("direction", "forward"))
        sch = models.nmr_schedule(m)
        U = evolve(sch, steps)
        return sch.initial_hamiltonian, sch.final_hamiltonian, U, {"nmr": m}
    if kind == "collective-spin":
        m = models.CollectiveSpinModel(
            gammaB=spec.get("gammaB", 1.0), alpha0=spec.get("alpha0", 0.0),
            alphaT=spec.get("alphaT", np.pi / 2), j=spec.get("j", 0.5),
            duration=spec.get("duration", 1.0))
        sch = models.collective_spin_schedule(m)
        U = evolve(sch, steps)
        return sch.initial_hamiltonian, sch.final_hamiltonian, U, {}
    if kind == "sudden-quench":
        H0 = _parse_matrix(spec["H0"], "model.H0")
        HT = _parse_matrix(spec["HT"], "model.HT")
        return *models.sudden_quench(H0, HT), {}
    if kind == "custom":
        H0 = check_hermitian(_parse_matrix(spec["H0"], "model.H0"), name="model.H0")
        HT = check_hermitian(_parse_matrix(spec["HT"], "model.HT"), name="model.HT")
        U = check_unitary(_parse_matrix(spec["U"], "model.U"), name="model.U")
        return H0, HT, U, {}
    raise ConfigError(f"unknown model type {kind!r}")


def build_initial_state(spec: dict, H0: np.ndarray) -> tuple[np.ndarray, float | None]:
    kind = spec.get("type")
    if kind == "thermal":
        beta = float(spec["beta"])
        return thermal_state(H0, beta), beta
    if kind == "ground":
        return ground_state(H0), None
    if kind == "pure":
        v = np.array([complex(x) if isinstance(x, (int, float)) else complex(x[0], x[1])
                      for x in spec["vector"]])
        n = np.linalg.norm(v)
        if n < 1e-12:
            raise ConfigError("initial_state.vector is null")
        v = v / n
        return np.outer(v, v.conj()), None
    if kind == "density":
        rho = _parse_matrix(spec["matrix"], "initial_state.matrix")
        return check_density(rho, name="initial_state.matrix"), None
    raise ConfigError(f"unknown initial_state type {kind!r}")


def _lambda_grid(spec) -> np.ndarray:
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    if isinstance(spec, dict):
        return np.linspace(spec.get("start", 0.0), spec["stop"], spec.get("num", 31))
    raise ConfigError("lambdas must be a list or {start, stop, num}")


def _detector_config(spec: dict) -> detector.DetectorConfig:
    try:
        return detector.DetectorConfig(
            lam=float(spec.get("lambda", 1.0)), p0=float(spec.get("p0", 1.0)),
            sigma=float(spec.get("sigma", 0.1)), x0=float(spec.get("x0", 0.0)),
            mass=spec.get("mass"), T=spec.get("T"),
            include_kinetic_phase=bool(spec.get("include_kinetic_phase", False)))
    except ValueError as exc:
        raise ConfigError(f"detector: {exc}")


# ---------------------------------------------------------------------------
# run


def _candidate_support(H0, HT, quasi: bool) -> np.ndarray:
    e0 = np.linalg.eigvalsh(H0)
    eT = np.linalg.eigvalsh(HT)
    if quasi:
        half = (e0[:, None] + e0[None, :]) / 2
        vals = (eT[:, None, None] - half[None, :, :]).ravel()
    else:
        vals = (eT[:, None] - e0[None, :]).ravel()
    return np.unique(np.round(vals, 12))


def run_experiment(config: dict, out_dir: str, steps: int, profile: str, seed=None) -> dict:
    tols = TOLERANCE_PROFILES[profile]
    protocol = config.get("protocol", "tmp")
    if protocol not in ("tmp", "ramsey", "povm-protocol1", "povm-protocol2", "quasi"):
        raise ConfigError(f"unknown protocol {protocol!r}")

    H0, HT, U, extra = build_model(config.get("model", {}), steps)
    rho0, beta = build_initial_state(config.get("initial_state", {"type": "thermal", "beta": 1.0}), H0)
    lambdas = _lambda_grid(config.get("lambdas", {"start": 0.0, "stop": 3.0, "num": 31}))
    cfg = _detector_config(config.get("detector", {}))

    report = {
        "protocol": protocol,
        "config": config,
        "resolved": {
            "steps_per_segment": steps,
            "tolerance_profile": profile,
            "tolerances": tols,
            "threads": os.environ.get("QWORKMETER_THREADS", "1"),
        },
        "files": {},
    }

    dist = None
    chi = None
    if protocol in ("tmp", "quasi"):
        if protocol == "tmp":
            if beta is not None:
                # log-space thermal populations keep exponentially small
                # weights at full relative precision
                dist = workstats.tmp_distribution_thermal(H0, HT, U, beta)
            else:
                dist = workstats.tmp_distribution(rho0, H0, HT, U)
            chi = workstats.characteristic_function_tmp(rho0, H0, HT, U, lambdas)
        else:
            dist = workstats.quasi_distribution(rho0, H0, HT, U)
            chi = workstats.g_lambda(rho0, H0, HT, U, lambdas)
    elif protocol == "ramsey":
        from .ramsey import run_ramsey
        ram = run_ramsey(rho0, H0, HT, U, lambdas)
        chi = workstats.CharacteristicFunctionSamples(
            lambdas, np.array([o.chi for o in ram]))
        support = _candidate_support(H0, HT, quasi=False)
        inv = workstats.invert_characteristic(chi, support)
        dist = inv.distribution
        report["inversion"] = {"residual": inv.residual, "condition": inv.condition}
    elif protocol == "povm-protocol1":
        chi = detector.protocol1_g(rho0, H0, HT, U, lambdas, p0=cfg.p0,
                                   include_kinetic_phase=cfg.include_kinetic_phase,
                                   mass=cfg.mass or 1.0, T=cfg.T or 0.0)
        support = _candidate_support(H0, HT, quasi=True)
        inv = workstats.invert_characteristic(chi, support)
        dist = inv.distribution
        report["inversion"] = {"residual": inv.residual, "condition": inv.condition}
    elif protocol == "povm-protocol2":
        atoms = detector.protocol2_position_atoms(rho0, H0, HT, U, cfg)
        span = max(np.max(np.abs(atoms.atoms_dx)), cfg.sigma)
        grid = np.linspace(-span - 8 * cfg.sigma, span + 8 * cfg.sigma, 4001)
        pdf = detector.protocol2_position_pdf(rho0, H0, HT, U, cfg, grid)
        write_csv(os.path.join(out_dir, "dist.csv"), "dx,density",
                  zip(pdf.grid, pdf.density))
        report["files"]["dist"] = "dist.csv"
        report["position"] = {"total": pdf.total(), "mean": pdf.mean(),
                              "kinetic_phase_bound": cfg.kinetic_phase_bound}

    if dist is not None:
        write_csv(os.path.join(out_dir, "dist.csv"), "w,weight",
                  zip(dist.w, dist.weights))
        report["files"]["dist"] = "dist.csv"
        total = float(np.sum(dist.weights))
        if abs(total - 1) > tols["normalization"]:
            raise NumericalCheckError(f"distribution normalization breach: {total!r}")
        report["distribution"] = {
            "kind": dist.kind,
            "mean": dist.mean,
            "second_moment": dist.moment(2),
            "min_weight": dist.min_weight,
            "total_weight": total,
        }
        if beta is not None and dist.kind == "probability":
            dF = workstats.delta_F(H0, HT, beta)
            report["jarzynski"] = workstats.jarzynski_check(dist, beta, dF)

    if chi is not None:
        write_csv(os.path.join(out_dir, "chi.csv"), "lambda,re,im",
                  zip(chi.lambdas, chi.values.real, chi.values.imag))
        report["files"]["chi"] = "chi.csv"

    write_json(os.path.join(out_dir, "report.json"), report)
    return report


# ---------------------------------------------------------------------------
# verify


def verify_outputs(forward_dir: str, backward_dir: str, beta: float) -> dict:
    """Recompute Crooks / Jarzynski checks from run outputs alone."""
    fwd_report = json.load(open(os.path.join(forward_dir, "report.json")))
    bwd_report = json.load(open(os.path.join(backward_dir, "report.json")))
    for rep, which in ((fwd_report, "forward"), (bwd_report, "backward")):
        st = rep.get("config", {}).get("initial_state", {})
        if st.get("type") == "thermal" and abs(float(st.get("beta", beta)) - beta) > 1e-12:
            raise ConfigError(
                f"{which} run used beta = {st['beta']}, verify called with beta = {beta}")

    _, fdata = read_csv(os.path.join(forward_dir, "dist.csv"))
    _, bdata = read_csv(os.path.join(backward_dir, "dist.csv"))
    forward = workstats.make_distribution(fdata[:, 0], fdata[:, 1], kind="probability")
    backward = workstats.make_distribution(bdata[:, 0], bdata[:, 1], kind="probability")

    crooks = workstats.crooks_check(forward, backward, beta)
    deltaF_fit = crooks["deltaF_fit"]
    out = {
        "beta": beta,
        "crooks": crooks,
        "jarzynski": workstats.jarzynski_check(forward, beta, deltaF_fit),
    }

    nmr = fwd_report.get("config", {}).get("model", {})
    if nmr.get("type") == "nmr":
        # closed-form qubit deltaF from the endpoint spectra +-2 pi nu
        nu1, nu2 = nmr.get("nu1", 1.0), nmr.get("nu2", 1.8)
        e1, e2 = 2 * np.pi * nu1, 2 * np.pi * nu2
        closed = float(np.log(np.cosh(beta * e1) / np.cosh(beta * e2)) / beta)
        out["deltaF_closed_form"] = closed
        out["deltaF_fit_deviation"] = deltaF_fit - closed
    return out


# ---------------------------------------------------------------------------
# sample


def run_sample(config: dict, out_dir: str, steps: int, profile: str, seed: int) -> dict:
    protocol = config.get("protocol", "tmp")
    H0, HT, U, _ = build_model(config.get("model", {}), steps)
    rho0, beta = build_initial_state(config.get("initial_state", {"type": "thermal", "beta": 1.0}), H0)
    shots_cfg = config.get("shots", {})
    plan = sampling.ShotPlan(int(shots_cfg.get("shots", 100000)),
                             int(shots_cfg.get("seed", seed)), protocol)
    report = {"protocol": protocol, "config": config,
              "resolved": {"steps_per_segment": steps, "seed": plan.seed,
                           "shots": plan.shots, "tolerance_profile": profile},
              "files": {}}

    if protocol == "tmp":
        dist, est = sampling.sample_tmp(rho0, H0, HT, U, plan)
        write_csv(os.path.join(out_dir, "dist.csv"), "w,weight", zip(dist.w, dist.weights))
        report["files"]["dist"] = "dist.csv"
        report["estimates"] = {"values": est.estimates, "standard_errors": est.standard_errors}
        if beta is not None:
            dF = workstats.delta_F(H0, HT, beta)
            report["jarzynski"] = workstats.jarzynski_check(dist, beta, dF)
    elif protocol == "ramsey":
        lambdas = _lambda_grid(config.get("lambdas", {"start": 0.0, "stop": 3.0, "num": 31}))
        rows = []
        for n, lam in enumerate(lambdas):
            est = sampling.sample_ramsey(rho0, H0, HT, U, lam,
                                         sampling.ShotPlan(plan.shots, plan.seed + n))
            rows.append((lam, est.estimates["chi_re"], est.estimates["chi_im"]))
        write_csv(os.path.join(out_dir, "chi.csv"), "lambda,re,im", rows)
        report["files"]["chi"] = "chi.csv"
    elif protocol == "povm-protocol2":
        cfg = _detector_config(config.get("detector", {}))
        samples, est = sampling.sample_position(rho0, H0, HT, U, cfg, plan)
        write_csv(os.path.join(out_dir, "clicks.csv"), "dx", ((v,) for v in samples.values))
        report["files"]["clicks"] = "clicks.csv"
        report["estimates"] = {"values": est.estimates, "standard_errors": est.standard_errors}
    else:
        raise ConfigError(f"protocol {protocol!r} has no sampling mode")

    write_json(os.path.join(out_dir, "report.json"), report)
    return report


# ---------------------------------------------------------------------------
# sweep


def run_sweep(config: dict, out_dir: str, steps: int, profile: str) -> dict:
    sweep = config.get("sweep", {})
    param = sweep.get("parameter", "lambda")
    values = np.asarray(sweep.get("values", []), dtype=float)
    if len(values) == 0:
        raise ConfigError("sweep.values must be a nonempty list")
    index = []
    for n, v in enumerate(values):
        sub = json.loads(json.dumps(config))
        sub.pop("sweep", None)
        if param == "lambda":
            sub["lambdas"] = [float(v)]
        elif param == "sigma":
            sub.setdefault("detector", {})["sigma"] = float(v)
        else:
            raise ConfigError(f"sweep parameter must be lambda or sigma, got {param!r}")
        sub_dir = os.path.join(out_dir, f"{param}_{n:03d}")
        run_experiment(sub, sub_dir, steps, profile)
        index.append({"value": float(v), "dir": os.path.basename(sub_dir)})
    payload = {"parameter": param, "points": index}
    write_json(os.path.join(out_dir, "sweep.json"), payload)
    return payload


# ---------------------------------------------------------------------------
# entry point


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qworkmeter",
        description="Quantum work statistics: exact distributions, ancilla readout "
                    "schemes and fluctuation-theorem verification.")
    parser.add_argument("--seed", type=int, default=12345)
    parser.add_argument("--steps", type=int, default=1024,
                        help="integrator sub-steps per schedule segment")
    parser.add_argument("--out-dir", default=".")
    parser.add_argument("--tolerance-profile", choices=sorted(TOLERANCE_PROFILES),
                        default="default")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one experiment config")
    p_run.add_argument("config")
    p_sample = sub.add_parser("sample", help="shot-level Monte Carlo run")
    p_sample.add_argument("config")
    p_sweep = sub.add_parser("sweep", help="run over a lambda or sigma grid")
    p_sweep.add_argument("config")
    p_verify = sub.add_parser("verify", help="fluctuation-theorem checks on run outputs")
    p_verify.add_argument("forward")
    p_verify.add_argument("backward")
    p_verify.add_argument("--beta", type=float, required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            run_experiment(_load_config(args.config), args.out_dir, args.steps,
                           args.tolerance_profile)
        elif args.command == "sample":
            run_sample(_load_config(args.config), args.out_dir, args.steps,
                       args.tolerance_profile, args.seed)
        elif args.command == "sweep":
            run_sweep(_load_config(args.config), args.out_dir, args.steps,
                      args.tolerance_profile)
        elif args.command == "verify":
            report = verify_outputs(args.forward, args.backward, args.beta)
            write_json(os.path.join(args.out_dir, "verify.json"), report)
            print(json.dumps(_jsonable(report), indent=2))
    except (ConfigError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalCheckError as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
