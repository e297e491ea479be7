"""Command-line surface: sweeps, thermal calculators, identification.

Every run resolves one config dictionary (defaults < file < --set <
flags), writes its artifacts into the output directory, and echoes the
fully resolved config into run_manifest.json so any result can be traced
back to the exact parameter set that produced it.

Exit codes: 0 success, 2 config error, 3 numerical divergence,
4 thermal runaway / headroom / early thermal termination, 5 ill-posed
fit. A sweep that halts at T_MAX still writes its artifacts.
"""

import argparse
import datetime
import json
import math
import os
import sys

import numpy as np

from . import config as cfgmod
from . import sysid
from .errors import (ConfigError, DivergenceError, IllPosedFitError,
                     SamplingAdequacyError, ThermalRunawayError)
from .lti import RationalTF
from .sim import (run_closed_loop_sweep, run_open_loop_sweep, sweep_summary,
                  write_sweep_csv, write_sweep_summary_json)
from .thermo import (estimate_from_telemetry, nominal_current,
                     overload_budget, read_telemetry_csv,
                     steady_state_winding_temp, write_estimate_csv)

OUTDIR_ENV = "SEABAND_OUTDIR"


def _outdir(args):
    path = args.outdir or os.environ.get(OUTDIR_ENV) or "."
    os.makedirs(path, exist_ok=True)
    return path


def _manifest(args, outdir, command, cfg, outputs):
    doc = {"command": command, "config": cfg, "outputs": sorted(outputs),
           "seed": args.seed}
    if not args.no_timestamp:
        doc["timestamp"] = datetime.datetime.now(
            datetime.timezone.utc).isoformat()
    path = os.path.join(outdir, "run_manifest.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_cfg(args):
    return cfgmod.load_config(args.config, args.set or ())


def _parse_load_flag(cfg, text):
    if text == "locked":
        cfgmod.set_value(cfg, "load.type", "locked")
        return
    if text.startswith("jl="):
        cfgmod.set_value(cfg, "load.type", "inertia")
        cfgmod.set_value(cfg, "load.J_l", float(text[3:]))
        return
    raise ConfigError("--load must be 'locked' or 'jl=<inertia>'")


def cmd_sweep(args):
    cfg = _load_cfg(args)
    if args.f_start is not None:
        cfgmod.set_value(cfg, "sweep.f_start", args.f_start)
    if args.f_end is not None:
        cfgmod.set_value(cfg, "sweep.f_end", args.f_end)
    if args.rate is not None:
        cfgmod.set_value(cfg, "sweep.sweep_rate", args.rate)
    if args.load is not None:
        _parse_load_flag(cfg, args.load)
    if args.thermal_regulator is not None:
        cfgmod.set_value(cfg, "control.regulator.enabled",
                         args.thermal_regulator == "on")

    sea = cfgmod.build_sea(cfg)
    thermal = cfgmod.build_thermal(cfg)
    sim_cfg = cfgmod.build_sim(cfg)

    if args.mode == "open":
        if args.amplitude is not None:
            cfgmod.set_value(cfg, "sweep.amplitude", args.amplitude)
        chirp = cfgmod.build_chirp(cfg)
        load = cfgmod.build_load(cfg)
        result = run_open_loop_sweep(chirp.amplitude, chirp, load, sea,
                                     thermal, sim_cfg)
    else:
        if args.amplitude_nm is not None:
            cfgmod.set_value(cfg, "sweep.amplitude", args.amplitude_nm)
        chirp = cfgmod.build_chirp(cfg)
        stack = cfgmod.build_stack(cfg, sea, thermal)
        # echo the gains actually used (auto-tuned ones included) so the
        # manifest pins down the run
        for key, val in (("kp", stack.pid.kp), ("ki", stack.pid.ki),
                         ("kd", stack.pid.kd),
                         ("derivative_filter_tau",
                          stack.pid.derivative_filter_tau)):
            cfgmod.set_value(cfg, "control.pid." + key, val)
        result = run_closed_loop_sweep(chirp.amplitude, chirp, stack, sea,
                                       thermal, sim_cfg)

    outdir = _outdir(args)
    csv_path = os.path.join(outdir, f"sweep_{args.mode}.csv")
    json_path = os.path.join(outdir, f"sweep_{args.mode}_summary.json")
    write_sweep_csv(csv_path, result)
    write_sweep_summary_json(json_path, result)
    _manifest(args, outdir, f"sweep {args.mode}", cfg, [csv_path, json_path])

    s = sweep_summary(result)
    print(json.dumps(s, indent=2, sort_keys=True))
    return 4 if result.terminated_early else 0


def cmd_thermal(args):
    cfg = _load_cfg(args)
    thermal = cfgmod.build_thermal(cfg)
    outdir = _outdir(args)

    if args.subcommand == "steady":
        t_w = steady_state_winding_temp(args.current, thermal)
        print(f"steady winding temperature at {args.current:g} A: {t_w:.3f} C")
        print(f"continuous rating: {nominal_current(thermal):.4f} A")
        _manifest(args, outdir, "thermal steady", cfg, [])
        return 0

    if args.subcommand == "overload":
        t_h = args.housing_temp if args.housing_temp is not None else thermal.T_A
        budget = overload_budget(args.current, t_h, thermal)
        print(f"overload ratio K_o: {budget.K_o:.4f}")
        if math.isinf(budget.t_on):
            print("permissible on-time: UNBOUNDED (K_o <= 1)")
        else:
            capped = " (capped at 5*tau1)" if budget.capped else ""
            print(f"permissible on-time: {budget.t_on:.4f} s{capped}")
            print(f"winding asymptote T_beta: {budget.t_beta:.2f} C")
        _manifest(args, outdir, "thermal overload", cfg, [])
        return 0

    # estimate
    t, i_m, t_h = read_telemetry_csv(args.telemetry)
    est = estimate_from_telemetry(t, i_m, thermal, t_h)
    out_path = os.path.join(outdir, "winding_estimate.csv")
    write_estimate_csv(out_path, t, est)
    _manifest(args, outdir, "thermal estimate", cfg, [out_path])
    mode = "measured housing" if t_h is not None else "modeled housing"
    print(f"estimated {len(t)} samples ({mode}); "
          f"final winding estimate {est[-1]:.2f} C")
    return 0


def _read_model_json(path):
    with open(path) as fh:
        doc = json.load(fh)
    frag = doc.get("plant_fit", doc)
    try:
        gain = float(frag["gain"])
        a = [float(frag[k]) for k in ("A3", "A2", "A1", "A0")]
    except (KeyError, TypeError, ValueError):
        raise IllPosedFitError(f"{path} is not a fitted-model JSON")
    return RationalTF([gain], a)


def cmd_sysid(args):
    cfg = _load_cfg(args)
    outdir = _outdir(args)

    if args.subcommand == "fit-tf":
        sea = cfgmod.build_sea(cfg)
        with open(args.data) as fh:
            header = fh.readline()
        if "freq_hz" in header:
            data = sysid.dataset_from_sweep_csv(args.data)
            # sweep gain is spring torque per PWM unit
            numerator = sea.K_s * sea.V_nominal * sea.motor.K_tau / sea.N
        else:
            data = sysid.read_freq_csv(args.data)
            numerator = sea.motor.K_tau / sea.N
        if args.numerator is not None:
            numerator = args.numerator
        fit = sysid.fit_third_order(data, numerator=numerator)
        frag = {"plant_fit": {
            "gain": fit.gain,
            "A0": fit.coeffs[0], "A1": fit.coeffs[1],
            "A2": fit.coeffs[2], "A3": fit.coeffs[3],
            "residual_rms": fit.residual_rms, "nrmse": fit.nrmse,
        }}
        out_path = os.path.join(outdir, "fit_tf.json")
        with open(out_path, "w") as fh:
            json.dump(frag, fh, indent=2, sort_keys=True)
            fh.write("\n")
        _manifest(args, outdir, "sysid fit-tf", cfg, [out_path])
        print(f"fit residual rms {fit.residual_rms:.3e} "
              f"(normalized {fit.nrmse:.3e})")
        return 0

    if args.subcommand == "fit-thermal":
        priors = cfgmod.build_thermal(cfg)
        data = sysid.read_thermal_step_csv(args.data, args.current)
        fit = sysid.fit_thermal_step(data, priors)
        p = fit.params
        frag = {"thermal": {"R1": p.R1, "R2": p.R2, "R3": p.R3,
                            "tau1": p.tau1, "tau2": p.tau2, "tau3": p.tau3}}
        out_path = os.path.join(outdir, "fit_thermal.json")
        with open(out_path, "w") as fh:
            json.dump(frag, fh, indent=2, sort_keys=True)
            fh.write("\n")
        _manifest(args, outdir, "sysid fit-thermal", cfg, [out_path])
        for node, rms in sorted(fit.residuals.items()):
            print(f"{node} residual rms {rms:.4f} K")
        if fit.tau3_is_lower_bound:
            print(f"tau3 {p.tau3:.1f} s is a lower bound "
                  "(record shorter than 3*tau3)")
        return 0

    # select-nominal
    models = [_read_model_json(p) for p in args.models]
    f_grid = np.logspace(math.log10(0.1), math.log10(100.0), 61)
    omegas = 2.0 * math.pi * f_grid
    idx, profile = sysid.select_nominal(models, omegas)
    sel_path = os.path.join(outdir, "nominal_selection.json")
    env_path = os.path.join(outdir, "nominal_envelope.csv")
    with open(sel_path, "w") as fh:
        json.dump({"selected_index": idx,
                   "selected_file": args.models[idx],
                   "worst_mismatch": float(np.max(profile)),
                   "candidates": list(args.models)},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(env_path, "w") as fh:
        fh.write("omega_rad_s,mismatch\n")
        for w, d in zip(omegas, profile):
            fh.write("%.6g,%.6g\n" % (w, d))
    _manifest(args, outdir, "sysid select-nominal", cfg, [sel_path, env_path])
    print(f"nominal model: index {idx} ({args.models[idx]}), "
          f"worst mismatch {np.max(profile):.4f}")
    return 0


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (dotted path)")
    common.add_argument("--outdir", help=f"output directory "
                        f"(or ${OUTDIR_ENV}; default .)")
    common.add_argument("--seed", type=int, default=None,
                        help="seed recorded in the manifest and used by "
                        "noise-bearing commands")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit the manifest timestamp for "
                        "byte-identical reruns")

    parser = argparse.ArgumentParser(
        prog="seaband",
        description="Series elastic actuator bandwidth and thermal toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="run a chirp sweep experiment")
    p_sweep.add_argument("mode", choices=["open", "closed"])
    p_sweep.add_argument("--amplitude", type=float,
                         help="open-loop PWM amplitude in (0, 1]")
    p_sweep.add_argument("--amplitude-nm", type=float,
                         help="closed-loop torque reference amplitude, N.m")
    p_sweep.add_argument("--load", help="'locked' or 'jl=<kg m^2>'")
    p_sweep.add_argument("--thermal-regulator", choices=["on", "off"])
    p_sweep.add_argument("--f-start", type=float)
    p_sweep.add_argument("--f-end", type=float)
    p_sweep.add_argument("--rate", type=float, help="sweep rate, Hz/s")
    p_sweep.set_defaults(func=cmd_sweep)

    p_th = sub.add_parser("thermal", parents=[common],
                          help="thermal calculators and the estimator")
    th_sub = p_th.add_subparsers(dest="subcommand", required=True)
    t_steady = th_sub.add_parser("steady", parents=[common])
    t_steady.add_argument("--current", type=float, required=True,
                          help="constant winding current, A")
    t_over = th_sub.add_parser("overload", parents=[common])
    t_over.add_argument("--current", type=float, required=True,
                        help="overload current, A")
    t_over.add_argument("--housing-temp", type=float,
                        help="housing temperature at overload onset, C")
    t_est = th_sub.add_parser("estimate", parents=[common])
    t_est.add_argument("--telemetry", required=True,
                       help="CSV with time_s,current_A[,housing_temp_c]")
    for t in (t_steady, t_over, t_est):
        t.set_defaults(func=cmd_thermal)

    p_id = sub.add_parser("sysid", parents=[common],
                          help="fit models from experiment records")
    id_sub = p_id.add_subparsers(dest="subcommand", required=True)
    i_tf = id_sub.add_parser("fit-tf", parents=[common])
    i_tf.add_argument("data", help="sweep CSV or frequency-response CSV")
    i_tf.add_argument("--numerator", type=float,
                      help="known numerator scale anchoring the fit")
    i_th = id_sub.add_parser("fit-thermal", parents=[common])
    i_th.add_argument("data", help="CSV with time_s,winding_temp_c,"
                      "housing_temp_c,mount_temp_c")
    i_th.add_argument("--current", type=float, required=True,
                      help="step current of the record, A")
    i_sel = id_sub.add_parser("select-nominal", parents=[common])
    i_sel.add_argument("models", nargs="+",
                       help="two or more fitted-model JSON files")
    for t in (i_tf, i_th, i_sel):
        t.set_defaults(func=cmd_sysid)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SamplingAdequacyError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except DivergenceError as e:
        print(f"numerical divergence: {e}", file=sys.stderr)
        return 3
    except ThermalRunawayError as e:
        print(f"thermal infeasibility: {e}", file=sys.stderr)
        return 4
    except IllPosedFitError as e:
        print(f"ill-posed fit: {e}", file=sys.stderr)
        return 5
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
