"""INI-style configuration files for the CLI.

Three sections, all optional, every key defaulted to the reference values:

    [vehicle]  m, J, lf, lr, cf, cr, v_kmh, mu
    [loop]     architecture, kp, kd, tau_d, wc_dob, wc_cdob, delay,
               comp_leak, plant (design | vehicle)
    [scenario] duration, step, curvature (ramp | none), curve_start,
               curve_ramp, curve_level, disturbance (none | step | sine),
               dist_size, dist_start, dist_omega, reference (step | none),
               ref_size, ref_start
"""

import configparser

from .controllers import ARCHITECTURES, LoopConfig, PDGains, QFilter
from .scenarios import Scenario, curvature_ramp, sine_signal, step_signal
from .vehicle import VehicleParams

__all__ = ["ConfigError", "load_scenario", "DEFAULT_CONFIG"]

DEFAULT_CONFIG = """\
[vehicle]
m = 2000.0
J = 3728.0
lf = 1.3008
lr = 1.5453
cf = 195000.0
cr = 50000.0
v_kmh = 5.0
mu = 1.0

[loop]
architecture = PD_DOB
kp = 1.0596
kd = 0.939
tau_d = 0.125
wc_dob = 5.0
wc_cdob = 200.0
delay = 0.08
comp_leak = 1.0
; plant: design (fixed design model + exact path kinematics) or vehicle
plant = design

[scenario]
duration = 60.0
step = 0.001
curvature = ramp
curve_start = 5.0
curve_ramp = 2.0
curve_level = 0.05
disturbance = none
dist_size = 0.1
dist_start = 20.0
dist_omega = 0.5
reference = step
ref_size = 0.1
ref_start = 30.0
"""


class ConfigError(ValueError):
    """Malformed configuration file."""


def _vehicle_from(section):
    return VehicleParams(
        m=section.getfloat("m", 2000.0),
        J=section.getfloat("J", 3728.0),
        lf=section.getfloat("lf", 1.3008),
        lr=section.getfloat("lr", 1.5453),
        cf=section.getfloat("cf", 195000.0),
        cr=section.getfloat("cr", 50000.0),
        v_kmh=section.getfloat("v_kmh", 5.0),
        mu=section.getfloat("mu", 1.0),
    )


def load_scenario(path=None):
    """Build a Scenario from an INI file; None loads pure defaults."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.read_string(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc

    veh = parser["vehicle"]
    loop_sec = parser["loop"]
    scen = parser["scenario"]

    try:
        params = _vehicle_from(veh)
        arch = loop_sec.get("architecture", "PD_DOB").strip()
        if arch not in ARCHITECTURES:
            raise ConfigError(
                f"unknown architecture {arch!r}; expected one of {ARCHITECTURES}"
            )
        plant_kind = loop_sec.get("plant", "design").strip().lower()
        if plant_kind == "design":
            plant = None
        elif plant_kind == "vehicle":
            plant = params
        else:
            raise ConfigError("plant must be 'design' or 'vehicle'")
        loop = LoopConfig(
            architecture=arch,
            gains=PDGains(
                kp=loop_sec.getfloat("kp", 1.0596),
                kd=loop_sec.getfloat("kd", 0.939),
                tau_d=loop_sec.getfloat("tau_d", 0.125),
            ),
            q_dob=QFilter(loop_sec.getfloat("wc_dob", 5.0)),
            q_cdob=QFilter(loop_sec.getfloat("wc_cdob", 200.0)),
            delay=loop_sec.getfloat("delay", 0.08),
            plant=plant,
            comp_leak=loop_sec.getfloat("comp_leak", 1.0),
        )

        curv_kind = scen.get("curvature", "ramp").strip().lower()
        if curv_kind == "ramp":
            curvature = curvature_ramp(
                start=scen.getfloat("curve_start", 5.0),
                ramp=scen.getfloat("curve_ramp", 2.0),
                level=scen.getfloat("curve_level", 0.05),
            )
        elif curv_kind == "none":
            curvature = None
        else:
            raise ConfigError("curvature must be 'ramp' or 'none'")

        dist_kind = scen.get("disturbance", "none").strip().lower()
        if dist_kind == "none":
            disturbance = None
        elif dist_kind == "step":
            disturbance = step_signal(
                scen.getfloat("dist_start", 20.0), scen.getfloat("dist_size", 0.1)
            )
        elif dist_kind == "sine":
            disturbance = sine_signal(
                scen.getfloat("dist_size", 0.05),
                scen.getfloat("dist_omega", 0.5),
                start=scen.getfloat("dist_start", 0.0),
            )
        else:
            raise ConfigError("disturbance must be 'none', 'step' or 'sine'")

        ref_kind = scen.get("reference", "step").strip().lower()
        if ref_kind == "none":
            reference = None
        elif ref_kind == "step":
            reference = step_signal(
                scen.getfloat("ref_start", 30.0), scen.getfloat("ref_size", 0.1)
            )
        else:
            raise ConfigError("reference must be 'step' or 'none'")

        return Scenario(
            loop=loop,
            duration=scen.getfloat("duration", 60.0),
            step=scen.getfloat("step", 1e-3),
            curvature=curvature,
            disturbance=disturbance,
            reference=reference,
        )
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"invalid configuration value: {exc}") from exc
