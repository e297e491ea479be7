"""JSON configuration: schema, defaults, merging, and object builders.

One nested dictionary drives every command. The shipped defaults are the
reference actuator profile; a config file overlays them, --set overrides
overlay the file, and dedicated CLI flags overlay everything. Unknown
keys anywhere are rejected so typos cannot silently revert a value to
its default.
"""

import copy
import json

from .control import (ControlStack, DobConfig, PidConfig,
                      ThermalRegulatorConfig, default_pid_config)
from .electromech import (LoadParams, MotorParams, SeaParams,
                          locked_torque_plant, output_locked_tf)
from .errors import ConfigError
from .sim import ChirpSpec, SimConfig
from .thermo import ThermalParams

DEFAULT_CONFIG = {
    "sea": {
        "R": 6.840, "L": 0.794e-3, "K_e": 2.8e-3, "K_tau": 5.484e-3,
        "J_m": 5.615e-8, "B_m": 8.726e-7,
        "K_s": 130.0, "N": 1742.222, "V_nominal": 24.0,
    },
    "load": {"type": "locked", "J_l": 0.05, "B_l": 0.0},
    "thermal": {
        "R1": 5.368, "R2": 1.253, "R3": 0.357,
        "tau1": 1.49, "tau2": 13.66, "tau3": 60.0,
        "alpha_cu": 3.93e-3, "R_A": 6.840, "T_A": 25.0,
        "i_source": 0.0, "T_MAX": 130.0,
    },
    "control": {
        "pid": {"auto": True, "kp": 0.0, "ki": 0.0, "kd": 0.0,
                "derivative_filter_tau": 0.0},
        "dob": {"enabled": True, "q_order": 3, "q_cutoff": 80.0},
        "regulator": {"enabled": False, "trigger_fraction": 0.95,
                      "min_gain": 0.0, "filter_cutoff_max": 20.0,
                      "filter_cutoff_min": 2.0},
    },
    "sim": {"dt": 1e-4, "control_dt": 1e-3, "duration": None},
    "sweep": {"amplitude": 0.2, "f_start": 0.5, "f_end": 20.0,
              "sweep_rate": 0.05},
}


def _merge(base, overlay, path=""):
    for key, val in overlay.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key '{where}'")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key '{where}' must be a section")
            _merge(base[key], val, where)
        else:
            base[key] = val


def load_config(path=None, overrides=()):
    """Defaults, overlaid by an optional JSON file, overlaid by
    KEY=VALUE strings with dotted key paths."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        _merge(cfg, data)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not KEY=VALUE")
        key, _, raw = item.partition("=")
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        tree = val
        for part in reversed(key.split(".")):
            tree = {part: tree}
        _merge(cfg, tree)
    return cfg


def set_value(cfg, dotted, value):
    tree = value
    for part in reversed(dotted.split(".")):
        tree = {part: tree}
    _merge(cfg, tree)


def _wrap(section, fn):
    try:
        return fn()
    except (ConfigError, TypeError, ValueError) as e:
        raise ConfigError(f"bad '{section}' config: {e}")


def build_sea(cfg):
    s = cfg["sea"]
    return _wrap("sea", lambda: SeaParams(
        motor=MotorParams(R=s["R"], L=s["L"], K_e=s["K_e"], K_tau=s["K_tau"],
                          J_m=s["J_m"], B_m=s["B_m"]),
        K_s=s["K_s"], N=s["N"], V_nominal=s["V_nominal"]))


def build_load(cfg):
    l = cfg["load"]
    if l["type"] == "locked":
        return LoadParams.locked_output()
    if l["type"] == "inertia":
        return _wrap("load", lambda: LoadParams(J_l=l["J_l"], B_l=l["B_l"]))
    raise ConfigError("load.type must be 'locked' or 'inertia'")


def build_thermal(cfg):
    t = cfg["thermal"]
    return _wrap("thermal", lambda: ThermalParams(**t))


def build_sim(cfg):
    s = cfg["sim"]
    return _wrap("sim", lambda: SimConfig(dt=s["dt"], control_dt=s["control_dt"],
                                          duration=s["duration"]))


def build_chirp(cfg, amplitude=None):
    s = cfg["sweep"]
    amp = amplitude if amplitude is not None else s["amplitude"]
    return _wrap("sweep", lambda: ChirpSpec(
        amplitude=amp, f_start=s["f_start"], f_end=s["f_end"],
        sweep_rate=s["sweep_rate"]))


def build_stack(cfg, sea=None, thermal=None):
    """Assemble the controller from the control section. PID gains come
    from the loop-shaping tuner when pid.auto is set; the observer's
    nominal model is the locked-output deflection plant."""
    sea = sea if sea is not None else build_sea(cfg)
    thermal = thermal if thermal is not None else build_thermal(cfg)
    c = cfg["control"]
    period = cfg["sim"]["control_dt"]

    p = c["pid"]
    if p["auto"]:
        pid = default_pid_config(locked_torque_plant(sea),
                                 sample_period=period)
    else:
        pid = _wrap("control.pid", lambda: PidConfig(
            kp=p["kp"], ki=p["ki"], kd=p["kd"],
            derivative_filter_tau=p["derivative_filter_tau"]))

    d = c["dob"]
    dob = None
    if d["enabled"]:
        # observer input and output are PWM-domain, so the nominal model
        # carries the bus-voltage scale
        nominal = sea.V_nominal * output_locked_tf(sea)
        dob = _wrap("control.dob", lambda: DobConfig(
            nominal_plant=nominal, q_cutoff=d["q_cutoff"],
            q_order=d["q_order"], sample_period=period))

    r = c["regulator"]
    reg = None
    if r["enabled"]:
        reg = _wrap("control.regulator", lambda: ThermalRegulatorConfig(
            trigger_fraction=r["trigger_fraction"], min_gain=r["min_gain"],
            filter_cutoff_max=r["filter_cutoff_max"],
            filter_cutoff_min=r["filter_cutoff_min"]))

    return ControlStack(pid=pid, dob=dob, regulator=reg, thermal=thermal,
                        sample_period=period)
