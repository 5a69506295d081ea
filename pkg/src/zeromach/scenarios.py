"""Scenario configuration: validation, JSON round trip and built-in cases."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .eos import GammaGas, InadmissiblePressure, TaitLiquid
from .field import PiecewiseConstantField
from .metrics import eps_rule_from_name, liquid_mean_velocity
from .wft import FrontField, gas_regions, gas_tv, init_fronts, two_fluid_regions

REQUIRED = ("name", "gas", "m", "background")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class Scenario:
    """One experiment. Pressures and velocities are ``(p, v)`` plateaus.

    ``plateaus`` lists ``[z, p, v]``: the state ``(p, v)`` holds from ``z``
    up to the next plateau; left of the first one the ``minus`` background
    holds. The last plateau must equal the ``plus`` background. ``m == 0``
    with ``liquid = None`` is a pure gas problem.
    """

    name: str
    gas: dict
    m: float
    background: dict
    liquid: dict | None = None
    kappa: float = 0.1
    eps: float | None = None
    eps_rule: str = "kappa_sq"
    plateaus: list = field(default_factory=list)
    support_radius: float = 0.0
    t_end: float = 1.0
    snapshots: list = field(default_factory=list)
    delta: float = 0.4
    front_cap: int = 1_000_000
    h: float = 1e-3
    dz: float = 1.0 / 400.0
    v_liquid: float | None = None
    seed: int | None = None

    # --- derived objects ------------------------------------------------

    def gas_law(self) -> GammaGas:
        return GammaGas(float(self.gas.get("k", 1.0)), float(self.gas.get("gamma", 1.4)))

    def liquid_law(self, kappa: float | None = None) -> TaitLiquid | None:
        if self.liquid is None:
            return None
        kappa = self.kappa if kappa is None else kappa
        n = float(self.liquid.get("n", 7.0))
        if "tau_bar" in self.liquid:
            p_bar = float(self.liquid["tau_bar"]) ** (-n)
        else:
            p_bar = float(self.liquid.get("p_bar", 1.0))
        return TaitLiquid(n, p_bar, kappa)

    def epsilon(self, kappa: float | None = None) -> float:
        if self.eps is not None:
            return float(self.eps)
        return eps_rule_from_name(self.eps_rule)(self.kappa if kappa is None else kappa)

    def datum(self) -> PiecewiseConstantField:
        """``(p, v)`` initial datum as a step function."""
        bg = self.background
        states = [(bg["p_minus"], bg["v_minus"])] + [(p, v) for _, p, v in self.plateaus]
        return PiecewiseConstantField.from_steps([z for z, _, _ in self.plateaus], states)

    def regions(self, kappa: float | None = None):
        if self.liquid is None:
            return gas_regions(self.gas_law())
        return two_fluid_regions(self.gas_law(), self.liquid_law(kappa), self.m)

    def front_field(self, kappa: float | None = None, eps: float | None = None, **kwargs):
        eps = self.epsilon(kappa) if eps is None else eps
        kwargs.setdefault("front_cap", self.front_cap)
        return init_fronts(self.datum(), eps, self.regions(kappa), delta=self.delta, **kwargs)

    def initial_liquid_velocity(self) -> float:
        if self.v_liquid is not None:
            return float(self.v_liquid)
        return liquid_mean_velocity(self.datum(), self.m)

    # --- serialisation --------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "expected a JSON object")
        for key in REQUIRED:
            if key not in data:
                raise ConfigError(key, "required field is missing")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        sc = cls(**data)
        sc.validate()
        return sc

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
        return cls.from_dict(data)

    def validate(self) -> None:
        """Check admissibility, LC structure and the TV envelope."""
        for key in ("p_minus", "v_minus", "p_plus", "v_plus"):
            if key not in self.background:
                raise ConfigError(f"background.{key}", "required field is missing")
        if self.liquid is None:
            if self.m != 0:
                raise ConfigError("m", "must be 0 when no liquid is configured")
        elif not self.m > 0:
            raise ConfigError("m", f"liquid mass must be positive, got {self.m}")
        zs = [pl[0] for pl in self.plateaus]
        if any(len(pl) != 3 for pl in self.plateaus):
            raise ConfigError("plateaus", "each plateau is [z, p, v]")
        if any(b <= a for a, b in zip(zs[:-1], zs[1:])):
            raise ConfigError("plateaus", "positions must be strictly increasing")
        bg = self.background
        last = (self.plateaus[-1][1], self.plateaus[-1][2]) if self.plateaus else (bg["p_minus"], bg["v_minus"])
        if last != (bg["p_plus"], bg["v_plus"]):
            raise ConfigError("plateaus", "last plateau must equal the plus background")
        if zs and max(abs(min(zs)), abs(max(zs) - self.m)) > self.support_radius + self.m + 1e-12:
            raise ConfigError("support_radius", "plateaus extend beyond the support radius")
        if not (self.kappa > 0):
            raise ConfigError("kappa", "must be positive")
        if self.eps is not None and not self.eps > 0:
            raise ConfigError("eps", "must be positive")
        if self.t_end < 0:
            raise ConfigError("t_end", "must be non-negative")
        try:
            gas = self.gas_law()
            liquid = self.liquid_law()
        except (TypeError, ValueError) as exc:
            raise ConfigError("gas" if self.liquid is None else "liquid", str(exc)) from None
        datum = self.datum()
        for i, (p, _) in enumerate(datum.values):
            try:
                gas.check(p)
                if liquid is not None:
                    liquid.check(p)
            except InadmissiblePressure as exc:
                raise ConfigError("plateaus" if i else "background", str(exc)) from None
        size = self.tv_envelope()
        if size >= self.delta:
            raise ConfigError("delta", f"datum size {size:.4g} is not below the envelope {self.delta}")

    def tv_envelope(self) -> float:
        """Gas TV of ``(tau, v)`` plus the interface mismatch of the datum."""
        ff = FrontField(regions=self.regions(), base_state=tuple(self.datum().values[0]), eps=1.0)
        size = gas_tv(ff, self.datum())
        if self.liquid is not None:
            pv = self.datum()
            v_bar = self.initial_liquid_velocity()
            size += math.hypot(pv.left_limit(0.0)[1] - v_bar, pv.right_limit(self.m)[1] - v_bar)
        return size


def _base(name: str, **kw) -> Scenario:
    defaults = dict(
        name=name,
        gas={"k": 1.0, "gamma": 2.0},
        liquid={"n": 7.0, "p_bar": 1.0},
        m=2.0,
        background={"p_minus": 1.0, "v_minus": 0.0, "p_plus": 1.0, "v_plus": 0.0},
        plateaus=[[-5.0, 1.2, 0.0], [0.0, 1.0, 0.0]],
        support_radius=5.0,
        kappa=0.1,
        eps=0.01,
        t_end=1.0,
        snapshots=[0.5, 1.0],
    )
    defaults.update(kw)
    return Scenario(**defaults)


def r1_scenario(seed: int = 0, n_jumps: int = 3) -> Scenario:
    """Randomised small-TV two-fluid datum; bit-stable for a given seed."""
    rng = np.random.default_rng(seed)
    m = 2.0
    left = np.sort(rng.uniform(-4.0, -0.5, size=n_jumps))
    right = np.sort(rng.uniform(m + 0.5, m + 4.0, size=n_jumps))
    positions = [*left, 0.0, *right]
    p = 1.0 + rng.uniform(-0.05, 0.05, size=len(positions))
    v = rng.uniform(-0.02, 0.02, size=len(positions))
    plateaus = [[float(z), float(pi), float(vi)] for z, pi, vi in zip(positions, p, v)]
    plateaus.append([m + 4.5, 1.0, 0.0])
    return _base(
        "R1",
        m=m,
        plateaus=plateaus,
        support_radius=4.5,
        seed=seed,
        snapshots=[0.5],
        t_end=0.5,
    )


def builtin_scenarios() -> dict[str, Scenario]:
    return {
        "G1": Scenario(
            name="G1",
            gas={"k": 1.0, "gamma": 1.4},
            liquid=None,
            m=0.0,
            background={"p_minus": 1.3, "v_minus": 0.0, "p_plus": 1.0, "v_plus": 0.0},
            plateaus=[[0.0, 1.0, 0.0]],
            support_radius=0.0,
            eps=0.01,
            t_end=0.5,
            snapshots=[0.5],
            dz=1.0 / 400.0,
        ),
        "C1": _base("C1"),
        "L1": _base("L1", v_liquid=0.0, h=1e-2),
        "R1": r1_scenario(0),
    }


def load_scenario(spec: str) -> Scenario:
    """A built-in name (``G1``, ``C1``, ...) or a path to a JSON file."""
    builtins = builtin_scenarios()
    if spec in builtins:
        return builtins[spec]
    try:
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {spec}: {exc.strerror}") from None
    return Scenario.from_json(text)
