"""Experiment configuration: bracketed sections with key = value pairs.

Numbers are accepted in decimal or 2^k notation (e.g. ``2^-5``).  The
[system] block describes the shift model; ``alphabet_size = per-scale``
makes the alphabet track ceil(1/eps) per scale, which is how the grid
baseline approximates the unit-interval alphabet.  Potentials live in
[potential.NAME] blocks and are referenced by name from the command
options.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import re
from dataclasses import dataclass
from typing import Callable

from .errors import ConfigurationError
from .systems import Potential, ShiftSystem

_POW_RE = re.compile(r"^([+-]?\d+(?:\.\d+)?)\^([+-]?\d+)$")


def parse_number(text: str) -> float:
    text = text.strip()
    m = _POW_RE.match(text)
    if m:
        return float(m.group(1)) ** int(m.group(2))
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse number {text!r}") from exc


def parse_number_list(text: str) -> tuple[float, ...]:
    parts = [p for chunk in text.split(",") for p in chunk.split()]
    return tuple(parse_number(p) for p in parts)


@dataclass(frozen=True)
class ExperimentConfig:
    system_kind: str
    alphabet_size: int | str
    sidedness: str
    window: int
    symbol_metric: str
    weight_base: float
    potentials: dict
    eps_schedule: tuple[float, ...]
    n_schedule: tuple[int, ...]
    T_schedule: tuple[float, ...]
    delta: float
    eta_schedule: tuple[float, ...]
    enumeration_cap: int
    exact_cap: int
    seed: int
    measure_kind: str
    measure_p: tuple[float, ...]
    options: dict
    raw_text: str

    def config_hash(self) -> str:
        return hashlib.sha256(
            (self.raw_text + f"|seed={self.seed}").encode()
        ).hexdigest()[:16]

    # -- model builders ---------------------------------------------------

    def alphabet_for(self, eps: float) -> int:
        if self.alphabet_size == "per-scale":
            return math.ceil(1.0 / eps)
        return int(self.alphabet_size)

    def build_system(self, eps: float | None = None) -> ShiftSystem:
        eps_min = min(self.eps_schedule) if eps is None else eps
        k = self.alphabet_for(eps_min)
        window = self.window
        return ShiftSystem(
            kind=self.system_kind, alphabet_size=k, sidedness=self.sidedness,
            window=window, symbol_metric=self.symbol_metric,
            weight_base=self.weight_base, eps_min=min(self.eps_schedule),
            enumeration_cap=self.enumeration_cap,
        )

    def system_factory(self) -> Callable[[float], ShiftSystem]:
        return lambda eps: self.build_system(eps)

    def potential(self, name: str) -> Potential:
        if name not in self.potentials:
            raise ConfigurationError(
                f"potential {name!r} not defined in the config"
            )
        return self.potentials[name]

    def build_measure(self, system: ShiftSystem):
        from .measures import MeasureModel
        if self.measure_kind == "product-uniform":
            return MeasureModel.product_uniform(system, seed=self.seed)
        if self.measure_kind == "bernoulli":
            p = self.measure_p
            if len(p) != system.alphabet_size:
                raise ConfigurationError(
                    "measure p length does not match alphabet_size"
                )
            return MeasureModel.bernoulli(system, p, seed=self.seed)
        if self.measure_kind == "point-mass":
            return MeasureModel.point_mass(
                system, system.point([0] * system.word_length),
                seed=self.seed)
        raise ConfigurationError(f"unknown measure kind {self.measure_kind!r}")


def _parse_potential(section: configparser.SectionProxy) -> Potential:
    kind = section.get("kind", "constant").strip()
    if kind == "constant":
        return Potential.constant(parse_number(section.get("value", "0")))
    if kind == "coordinate-table":
        values = parse_number_list(section.get("values", ""))
        if not values:
            raise ConfigurationError("coordinate-table potential needs values")
        return Potential.from_table(values)
    if kind == "finite-range":
        values = parse_number_list(section.get("values", ""))
        r = int(section.get("range", "2"))
        return Potential.from_range_table(values, r)
    raise ConfigurationError(f"unknown potential kind {kind!r}")


def load_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc

    if "system" not in parser:
        raise ConfigurationError("missing [system] section")
    sysblk = parser["system"]
    alphabet = sysblk.get("alphabet_size", "2").strip()
    alphabet_size = alphabet if alphabet == "per-scale" else int(alphabet)

    if "run" not in parser or "seed" not in parser["run"]:
        raise ConfigurationError("missing required key 'seed' in [run]")
    seed = int(parser["run"]["seed"])

    sched = parser["schedules"] if "schedules" in parser else {}
    eps_schedule = parse_number_list(
        sched.get("eps", "2^-3 2^-4 2^-5 2^-6 2^-7 2^-8"))
    n_schedule = tuple(int(v) for v in
                       parse_number_list(sched.get("n", "2 3 4 5 6 7 8")))
    T_schedule = parse_number_list(sched.get("T", ""))
    if not eps_schedule:
        raise ConfigurationError("schedule 'eps' must be nonempty")
    if sorted(eps_schedule, reverse=True) != list(eps_schedule):
        raise ConfigurationError("schedule 'eps' must be decreasing")
    if sorted(n_schedule) != list(n_schedule) or not n_schedule:
        raise ConfigurationError("schedule 'n' must be increasing")
    delta = parse_number(sched.get("delta", "0.5"))
    eta_schedule = parse_number_list(sched.get("eta", "0.5 0.25"))

    caps = parser["caps"] if "caps" in parser else {}
    enumeration_cap = int(caps.get("enumeration", "2000000"))
    exact_cap = int(caps.get("exact_search", "24"))

    potentials = {}
    for name in parser.sections():
        if name.startswith("potential."):
            potentials[name.split(".", 1)[1]] = _parse_potential(parser[name])

    measure_kind = "product-uniform"
    measure_p: tuple[float, ...] = ()
    if "measure" in parser:
        measure_kind = parser["measure"].get("kind", "product-uniform").strip()
        measure_p = parse_number_list(parser["measure"].get("p", ""))

    options = {}
    for name in parser.sections():
        if name in ("system", "schedules", "caps", "run", "measure"):
            continue
        if name.startswith("potential."):
            continue
        options[name] = dict(parser[name])

    return ExperimentConfig(
        system_kind=sysblk.get("kind", "full-shift").strip(),
        alphabet_size=alphabet_size,
        sidedness=sysblk.get("sidedness", "one-sided").strip(),
        window=int(sysblk.get("window", "16")),
        symbol_metric=sysblk.get("symbol_metric", "").strip(),
        weight_base=parse_number(sysblk.get("weight_base", "0.5")),
        potentials=potentials,
        eps_schedule=eps_schedule,
        n_schedule=n_schedule,
        T_schedule=T_schedule,
        delta=delta,
        eta_schedule=eta_schedule,
        enumeration_cap=enumeration_cap,
        exact_cap=exact_cap,
        seed=seed,
        measure_kind=measure_kind,
        measure_p=measure_p,
        options=options,
        raw_text=text,
    )


def load_config(path: str, seed_override: int | None = None,
                ) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    cfg = load_config_text(text)
    if seed_override is not None:
        cfg = ExperimentConfig(**{**cfg.__dict__, "seed": seed_override})
    return cfg
