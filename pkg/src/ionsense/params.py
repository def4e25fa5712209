"""Physical parameters, unit conventions, and config parsing.

All unit decisions live here.  The math core works in an internal unit
system with hbar = 1, time in milliseconds and angular frequencies in
rad/ms, which keeps Hamiltonian entries O(1) for the relevant parameter
regime.  SI quantities (masses in kg, forces in N, trap frequencies in
rad/s) appear only in this module and are converted once, in
:func:`derive_internal`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from scipy.constants import hbar as HBAR_SI
from scipy.constants import physical_constants

ATOMIC_MASS_SI = physical_constants["atomic mass constant"][0]  # kg

TWO_PI = 2.0 * math.pi
#: rad/s -> rad/ms
PER_MS = 1e-3

LAMBDA = "lambda"
FOURPOD = "fourpod"


class ConfigError(ValueError):
    """Raised for malformed or out-of-range configuration input."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"config key '{key}': {message}")


class InvalidParameterError(ValueError):
    """Raised when a derived quantity cannot be computed from the inputs."""


@dataclass(frozen=True)
class IonSpecies:
    """Ion species: mass in kg plus a human-readable label."""

    mass: float
    label: str = ""

    def __post_init__(self):
        if not self.mass > 0:
            raise InvalidParameterError(f"ion mass must be > 0, got {self.mass}")


def yb171() -> IonSpecies:
    """Default probe ion (mass 171 u)."""
    return IonSpecies(mass=171.0 * ATOMIC_MASS_SI, label="171Yb+")


@dataclass(frozen=True)
class TrapConfig:
    """Trap frequencies in rad/s (axial and transverse)."""

    axial_freq: float
    transverse_freq: float

    def __post_init__(self):
        if not (self.axial_freq > 0 and self.transverse_freq > 0):
            raise InvalidParameterError("trap frequencies must be > 0")


@dataclass(frozen=True)
class DriveParams:
    """Laser drive and force parameters in SI angular units.

    ``delta=None`` means "auto": resolve to the detuning that cancels the
    second-order level shifts (see :func:`auto_detuning`).  For the
    three-state protocol ``force`` is ``(F,)``; for the five-state
    protocol it is ``(Fx, Fy)``, all in newtons.
    """

    g: float
    omega: float
    xi: float
    force: tuple
    delta: float | None = None

    def __post_init__(self):
        if not self.omega > 0:
            raise InvalidParameterError(f"omega must be > 0, got {self.omega}")
        if not abs(self.g / self.omega) < 1.0:
            raise InvalidParameterError(
                f"|g/omega| must be < 1 for the weak-coupling regime, got "
                f"{abs(self.g / self.omega):.3g}"
            )
        object.__setattr__(self, "xi", self.xi % TWO_PI)


@dataclass(frozen=True)
class RunConfig:
    """Numerical knobs: truncation, time grid, RNG, shot counts."""

    n_max: int = 15
    times: tuple | None = None  # ms, or None for the default grid
    seed: int = 12345
    shots: int = 10_000
    replications: int = 200


@dataclass(frozen=True)
class ProtocolParams:
    """Fully validated parameter set for one protocol run."""

    kind: str
    ion: IonSpecies
    trap: TrapConfig
    drive: DriveParams
    run: RunConfig = field(default_factory=RunConfig)
    frequency_convention: str = "cyclic"

    def __post_init__(self):
        if self.kind not in (LAMBDA, FOURPOD):
            raise InvalidParameterError(f"unknown protocol kind {self.kind!r}")
        n = len(self.drive.force)
        if self.kind == LAMBDA and n != 1:
            raise InvalidParameterError("lambda protocol needs a single force F")
        if self.kind == FOURPOD and n != 2:
            raise InvalidParameterError("fourpod protocol needs (Fx, Fy)")

    def internal(self) -> "InternalParams":
        return derive_internal(self)


@dataclass(frozen=True)
class InternalParams:
    """Protocol parameters in internal units (hbar = 1, rad/ms, ms).

    ``force_coef`` quantities are F * spread / (2 hbar) in rad/ms: the
    force term in the interaction Hamiltonian is
    force_coef * (a^dag e^{i xi} + a e^{-i xi}), well defined even at
    zero mode detuning.  ``beta`` quantities are the dimensionless ratios
    force_coef / omega.  ``rabi`` is the effective Rabi frequency:
    beta * g (signed) for the three-state model, |beta_perp| * g for the
    five-state model.  ``domega_dF`` converts between the internal Rabi
    chart and SI force (rad/ms per newton) for Cramer-Rao bounds in lab
    units.
    """

    kind: str
    g: float
    omega: float
    delta: float
    xi: float
    force_coef: float = 0.0
    force_coef_x: float = 0.0
    force_coef_y: float = 0.0
    phi: float = 0.0
    rabi: float = 0.0
    spread: float = 0.0
    domega_dF: float = 0.0

    @property
    def beta(self) -> float:
        return self.force_coef / self.omega

    @property
    def beta_x(self) -> float:
        return self.force_coef_x / self.omega

    @property
    def beta_y(self) -> float:
        return self.force_coef_y / self.omega


def ground_state_spread(species: IonSpecies, freq: float) -> float:
    """Ground-state wave-packet spread sqrt(hbar / (2 M freq)) in meters."""
    if not freq > 0:
        raise InvalidParameterError(f"frequency must be > 0, got {freq}")
    if not species.mass > 0:
        raise InvalidParameterError(f"mass must be > 0, got {species.mass}")
    return math.sqrt(HBAR_SI / (2.0 * species.mass * freq))


def auto_detuning(kind: str, g: float, omega: float) -> float:
    """Detuning that cancels the second-order level shifts on the vacuum.

    -g^2/omega for the three-state model and -2g^2/omega for the
    five-state model (two modes, two couplings per level).  Verified
    numerically by the full-model agreement tests.
    """
    if kind == LAMBDA:
        return -(g**2) / omega
    return -2.0 * g**2 / omega


def derive_internal(p: ProtocolParams) -> InternalParams:
    """Convert a validated ProtocolParams to internal rad/ms quantities."""
    g_si = p.drive.g
    om_si = p.drive.omega
    if om_si == 0:
        raise InvalidParameterError("omega must be nonzero to derive Rabi scales")

    g = g_si * PER_MS
    omega = om_si * PER_MS
    delta = p.drive.delta * PER_MS if p.drive.delta is not None else auto_detuning(
        p.kind, g, omega
    )

    if p.kind == LAMBDA:
        (f_si,) = p.drive.force
        z0 = ground_state_spread(p.ion, p.trap.axial_freq)
        fc = f_si * z0 / (2.0 * HBAR_SI) * PER_MS
        return InternalParams(
            kind=LAMBDA,
            g=g,
            omega=omega,
            delta=delta,
            xi=p.drive.xi,
            force_coef=fc,
            rabi=(fc / omega) * g,
            spread=z0,
            domega_dF=z0 * g / (2.0 * HBAR_SI * om_si),
        )

    fx_si, fy_si = p.drive.force
    r0 = ground_state_spread(p.ion, p.trap.transverse_freq)
    scale = r0 / (2.0 * HBAR_SI) * PER_MS
    fcx = fx_si * scale
    fcy = fy_si * scale
    return InternalParams(
        kind=FOURPOD,
        g=g,
        omega=omega,
        delta=delta,
        xi=p.drive.xi,
        force_coef_x=fcx,
        force_coef_y=fcy,
        phi=math.atan2(fy_si, fx_si),
        rabi=math.hypot(fcx, fcy) / omega * g,
        spread=r0,
        domega_dF=r0 * g / (2.0 * HBAR_SI * om_si),
    )


# --------------------------------------------------------------------------
# config files
# --------------------------------------------------------------------------

_SECTIONS = ("ion", "trap", "drive", "protocol", "run")

_DEFAULTS = {
    "ion": {"mass_u": 171.0, "label": "171Yb+"},
    "trap": {"axial_freq": 1e6, "transverse_freq": 1e6},
    "drive": {"delta": "auto"},
    "protocol": {"frequency_convention": "cyclic"},
    "run": {
        "n_max": 15,
        "times": None,
        "seed": 12345,
        "shots": 10_000,
        "replications": 200,
    },
}

_KNOWN_KEYS = {
    "ion": {"mass_u", "label"},
    "trap": {"axial_freq", "transverse_freq"},
    "drive": {"g", "omega", "delta", "xi", "F", "Fx", "Fy"},
    "protocol": {"kind", "frequency_convention"},
    "run": {"n_max", "times", "seed", "shots", "replications"},
}


def _require_number(section, key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key}", f"expected a number, got {value!r}")
    return float(value)


def parse_config(document) -> ProtocolParams:
    """Parse a config document (JSON text, path contents, or dict).

    Frequencies (``g``, ``omega``, ``delta``, trap frequencies) are in Hz
    when ``protocol.frequency_convention`` is "cyclic" (the default; they
    get multiplied by 2*pi) and in rad/s when it is "angular".  Forces
    are in newtons, phases in radians, times in ms.  Unknown keys are
    rejected.
    """
    if isinstance(document, str):
        try:
            raw = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError("<document>", f"invalid JSON: {exc}") from exc
    elif isinstance(document, dict):
        raw = document
    else:
        raise ConfigError("<document>", f"unsupported config type {type(document)}")

    for section in raw:
        if section not in _SECTIONS:
            raise ConfigError(section, "unknown section")
        if not isinstance(raw[section], dict):
            raise ConfigError(section, "section must be a mapping")
        for key in raw[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"{section}.{key}", "unknown key")

    cfg = {s: dict(_DEFAULTS.get(s, {})) for s in _SECTIONS}
    for section, entries in raw.items():
        cfg[section].update(entries)

    conv = cfg["protocol"].get("frequency_convention")
    if conv not in ("cyclic", "angular"):
        raise ConfigError("protocol.frequency_convention",
                          f"must be 'cyclic' or 'angular', got {conv!r}")
    freq_scale = TWO_PI if conv == "cyclic" else 1.0

    kind = cfg["protocol"].get("kind")
    if kind not in (LAMBDA, FOURPOD):
        raise ConfigError("protocol.kind", f"must be 'lambda' or 'fourpod', got {kind!r}")

    mass_u = _require_number("ion", "mass_u", cfg["ion"]["mass_u"])
    if mass_u <= 0:
        raise ConfigError("ion.mass_u", "must be > 0")
    ion = IonSpecies(mass=mass_u * ATOMIC_MASS_SI, label=str(cfg["ion"]["label"]))

    trap_vals = {}
    for key in ("axial_freq", "transverse_freq"):
        v = _require_number("trap", key, cfg["trap"][key])
        if v <= 0:
            raise ConfigError(f"trap.{key}", "must be > 0")
        trap_vals[key] = v * freq_scale
    trap = TrapConfig(**trap_vals)

    drive_cfg = cfg["drive"]
    for key in ("g", "omega", "xi"):
        if key not in drive_cfg:
            raise ConfigError(f"drive.{key}", "missing required key")
    g = _require_number("drive", "g", drive_cfg["g"]) * freq_scale
    omega = _require_number("drive", "omega", drive_cfg["omega"]) * freq_scale
    if omega <= 0:
        raise ConfigError("drive.omega", "must be > 0")
    if abs(g / omega) >= 1.0:
        raise ConfigError("drive.g", "requires |g/omega| < 1")
    xi = _require_number("drive", "xi", drive_cfg["xi"])

    delta_raw = drive_cfg.get("delta", "auto")
    if delta_raw == "auto" or delta_raw is None:
        delta = None
    else:
        delta = _require_number("drive", "delta", delta_raw) * freq_scale

    if kind == LAMBDA:
        if "F" not in drive_cfg:
            raise ConfigError("drive.F", "missing required key for the lambda protocol")
        if "Fx" in drive_cfg or "Fy" in drive_cfg:
            raise ConfigError("drive.Fx", "Fx/Fy are fourpod-only keys")
        force = (_require_number("drive", "F", drive_cfg["F"]),)
    else:
        for key in ("Fx", "Fy"):
            if key not in drive_cfg:
                raise ConfigError(f"drive.{key}", "missing required key for the fourpod protocol")
        if "F" in drive_cfg:
            raise ConfigError("drive.F", "F is a lambda-only key")
        force = (_require_number("drive", "Fx", drive_cfg["Fx"]),
                 _require_number("drive", "Fy", drive_cfg["Fy"]))

    drive = DriveParams(g=g, omega=omega, xi=xi, force=force, delta=delta)

    run_cfg = cfg["run"]
    n_max = run_cfg["n_max"]
    if not isinstance(n_max, int) or n_max < 1:
        raise ConfigError("run.n_max", f"must be an integer >= 1, got {n_max!r}")
    times = run_cfg["times"]
    if times is not None:
        if not isinstance(times, (list, tuple)) or not times:
            raise ConfigError("run.times", "must be a non-empty list of times in ms")
        times = tuple(_require_number("run", "times", t) for t in times)
    seed = run_cfg["seed"]
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("run.seed", f"must be a non-negative integer, got {seed!r}")
    shots = run_cfg["shots"]
    if not isinstance(shots, int) or shots < 1:
        raise ConfigError("run.shots", f"must be an integer >= 1, got {shots!r}")
    reps = run_cfg["replications"]
    if not isinstance(reps, int) or reps < 1:
        raise ConfigError("run.replications", f"must be an integer >= 1, got {reps!r}")
    run = RunConfig(n_max=n_max, times=times, seed=seed, shots=shots, replications=reps)

    try:
        return ProtocolParams(
            kind=kind, ion=ion, trap=trap, drive=drive, run=run,
            frequency_convention=conv,
        )
    except InvalidParameterError as exc:
        raise ConfigError("<document>", str(exc)) from exc


def serialize_config(p: ProtocolParams) -> dict:
    """Inverse of :func:`parse_config`: emit a config dict that round-trips."""
    freq_scale = TWO_PI if p.frequency_convention == "cyclic" else 1.0
    drive = {
        "g": p.drive.g / freq_scale,
        "omega": p.drive.omega / freq_scale,
        "delta": "auto" if p.drive.delta is None else p.drive.delta / freq_scale,
        "xi": p.drive.xi,
    }
    if p.kind == LAMBDA:
        drive["F"] = p.drive.force[0]
    else:
        drive["Fx"], drive["Fy"] = p.drive.force
    return {
        "ion": {"mass_u": p.ion.mass / ATOMIC_MASS_SI, "label": p.ion.label},
        "trap": {
            "axial_freq": p.trap.axial_freq / freq_scale,
            "transverse_freq": p.trap.transverse_freq / freq_scale,
        },
        "drive": drive,
        "protocol": {"kind": p.kind, "frequency_convention": p.frequency_convention},
        "run": {
            "n_max": p.run.n_max,
            "times": None if p.run.times is None else list(p.run.times),
            "seed": p.run.seed,
            "shots": p.run.shots,
            "replications": p.run.replications,
        },
    }


def fig2_defaults(**overrides) -> ProtocolParams:
    """Reference three-state parameter set (g=4 kHz, omega=150 kHz, F=-35 yN, xi=1.7 pi)."""
    cfg = {
        "protocol": {"kind": LAMBDA},
        "drive": {"g": 4e3, "omega": 150e3, "xi": 1.7 * math.pi, "F": -35e-24},
    }
    _deep_update(cfg, overrides)
    return parse_config(cfg)


def fig4_defaults(**overrides) -> ProtocolParams:
    """Reference five-state parameter set (Fx=-35 yN, Fy=-30 yN, xi=0.51 pi)."""
    cfg = {
        "protocol": {"kind": FOURPOD},
        "drive": {"g": 4e3, "omega": 150e3, "xi": 0.51 * math.pi,
                  "Fx": -35e-24, "Fy": -30e-24},
        "run": {"n_max": 10},
    }
    _deep_update(cfg, overrides)
    return parse_config(cfg)


def _deep_update(base: dict, extra: dict):
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
