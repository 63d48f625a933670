"""Experiment configuration: a dataclass that round-trips losslessly through
an INI-style text form (key/value entries grouped in tables)."""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields
from fractions import Fraction

from .grid import DomainError

__all__ = ["ExperimentConfig", "config_to_text", "config_from_text"]


@dataclass
class ExperimentConfig:
    """Knobs for the randomized boundedness-ratio and moment experiments."""

    # grid
    dim: int = 1
    n: int = 256
    length: float = 32.0
    # exponents (exact rationals as strings)
    p1: str = "1"
    p2: str = "4"
    p3: str = "4"
    s: str = "2"
    # symbol
    symbol: str = "one"  # one | mihlin | random_band | gauss | separable_gauss
    symbol_seed: int = 0
    symbol_tau: float = 2.0
    symbol_width: float = 1.0
    # vanishing-moment modification
    vanishing: bool = True
    delta: float = 0.0  # 0 means 4/L
    cutoff_profile: str = "flat"
    cutoff_flatness: int = 2
    cutoff_top: float = 0.0  # 0 means 2*delta (bump profile only)
    # inputs
    input_count: int = 16
    input_seed: int = 0
    shell_lo: int = 99  # 99 means auto
    shell_hi: int = 99
    window_flat: float = 0.4
    window_zero: float = 0.6
    dilations: tuple = (0,)
    packet_inputs: bool = True  # analytic packets (exact dilation) vs banded
    # execution
    threads: int = 1
    margin_tol: float = 1e-3
    alias_tol: float = 1e-6
    timestamp: bool = True
    output: str = ""

    def exponents(self) -> tuple:
        return (Fraction(self.p1), Fraction(self.p2), Fraction(self.p3))

    def s_value(self) -> Fraction:
        return Fraction(self.s)

    def delta_value(self) -> float:
        return self.delta if self.delta > 0 else 4.0 / self.length


_SECTIONS = {
    "grid": ("dim", "n", "length"),
    "exponents": ("p1", "p2", "p3", "s"),
    "symbol": ("symbol", "symbol_seed", "symbol_tau", "symbol_width"),
    "vanishing": ("vanishing", "delta", "cutoff_profile", "cutoff_flatness", "cutoff_top"),
    "inputs": (
        "input_count",
        "input_seed",
        "shell_lo",
        "shell_hi",
        "window_flat",
        "window_zero",
        "dilations",
        "packet_inputs",
    ),
    "run": ("threads", "margin_tol", "alias_tol", "timestamp", "output"),
}


def _render(value) -> str:
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def _parse(name: str, text: str, kind):
    if kind is bool:
        return text.strip().lower() in ("1", "true", "yes", "on")
    if kind is tuple:
        return tuple(int(tok) for tok in text.split(",") if tok.strip() != "")
    try:
        return kind(text)
    except ValueError as exc:
        raise DomainError(f"bad value for {name}: {text!r}") from exc


def config_to_text(cfg: ExperimentConfig) -> str:
    parser = configparser.ConfigParser()
    for section, keys in _SECTIONS.items():
        parser[section] = {k: _render(getattr(cfg, k)) for k in keys}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def config_from_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    parser.read_string(text)
    kinds = {f.name: (tuple if f.name == "dilations" else type(f.default)) for f in fields(ExperimentConfig)}
    kwargs = {}
    for section, keys in _SECTIONS.items():
        if section not in parser:
            continue
        for k in keys:
            if k in parser[section]:
                kwargs[k] = _parse(k, parser[section][k], kinds[k])
    return ExperimentConfig(**kwargs)
