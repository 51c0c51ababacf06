"""Run configuration: a small sectioned ``key = value`` format.

Example::

    [run]
    method = all            # ed | ite | qite | varqite | all

    [model]
    n = 8
    j = 1.0
    g = 1.0

    [qite]
    dtau = 0.25
    steps = 40
    domain_size = 2, 4, 6

Unknown sections or keys, duplicate keys and invalid values are rejected
with the offending line number.  ``#`` and ``;`` start comments.
"""
from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

from .model import TfimParams
from .qite import QiteConfig
from .varqite import VarQiteConfig

METHODS = ("ed", "ite", "qite", "varqite", "all")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class IteConfig:
    dtau: float = 0.25
    steps: int = 40


@dataclass
class RunConfig:
    method: str = "all"
    tfim: TfimParams | None = None
    hamiltonian_path: Path | None = None
    initial_state: str | None = None
    ite: IteConfig = field(default_factory=IteConfig)
    qite: QiteConfig = field(default_factory=QiteConfig)
    domain_sizes: tuple[int, ...] = (2,)
    varqite: VarQiteConfig = field(default_factory=VarQiteConfig)
    reps: int = 2
    out_dir: Path | None = None
    emit_fidelity: bool = True
    degenerate: bool = False
    degeneracy_tol: float = 1e-8

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "model": (
                {"hamiltonian": str(self.hamiltonian_path)}
                if self.hamiltonian_path
                else asdict(self.tfim)
            ),
            "initial_state": self.initial_state,
            "ite": asdict(self.ite),
            "qite": {**asdict(self.qite), "domain_size": list(self.domain_sizes)},
            "varqite": {**asdict(self.varqite), "reps": self.reps},
            "fidelity": self.emit_fidelity,
            "degenerate": self.degenerate,
            "degeneracy_tol": self.degeneracy_tol,
        }


_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")
_PI_EXPR = re.compile(r"^(?:([-+]?\d*\.?\d+)\s*\*\s*)?(-?)pi(?:\s*/\s*(\d*\.?\d+))?$")


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_angle(text: str) -> float:
    """A float, or a multiple of pi such as ``pi/3`` or ``2*pi/3``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_EXPR.match(text.replace(" ", "").lower())
    if not m:
        raise ValueError(f"expected a number or a multiple of pi, got {text!r}")
    factor = float(m.group(1)) if m.group(1) else 1.0
    sign = -1.0 if m.group(2) else 1.0
    denom = float(m.group(3)) if m.group(3) else 1.0
    return sign * factor * math.pi / denom


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(",", " ").split())


def _positive(v):
    if not v > 0:
        raise ValueError("must be positive")
    return v


def _non_negative(v):
    if v < 0:
        raise ValueError("must be non-negative")
    return v


def _open_unit(v):
    if not 0 < v < 1:
        raise ValueError("must lie in (0, 1)")
    return v


def _finite(v):
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _method(v):
    if v not in METHODS:
        raise ValueError(f"unknown method {v!r}; choose one of {', '.join(METHODS)}")
    return v


def _domain_sizes(v):
    if not v:
        raise ValueError("need at least one domain size")
    if any(d < 2 for d in v):
        raise ValueError("domain_size >= 2 (the pieces act on 2 qubits)")
    return v


def _bits(v):
    if not v or set(v) - {"0", "1"}:
        raise ValueError(f"expected a bitstring, got {v!r}")
    return v


def _v_method(v):
    if v not in ("analytic", "parameter-shift"):
        raise ValueError("v_method is 'analytic' or 'parameter-shift'")
    return v


def _chain(parse: Callable, *checks: Callable) -> Callable:
    def run(text):
        v = parse(text)
        for c in checks:
            v = c(v)
        return v
    return run


_SCHEMA: dict[str, dict[str, Callable]] = {
    "run": {
        "method": _chain(str.lower, _method),
        "out": str,
        "fidelity": _parse_bool,
        "degenerate": _parse_bool,
        "degeneracy_tol": _chain(float, _positive),
    },
    "model": {
        "n": _chain(int, _positive),
        "j": _chain(float, _finite),
        "g": _chain(float, _finite),
        "hamiltonian": str,
        "initial_state": _chain(str.strip, _bits),
    },
    "ite": {
        "dtau": _chain(float, _positive),
        "steps": _chain(int, _non_negative),
    },
    "qite": {
        "dtau": _chain(float, _positive),
        "steps": _chain(int, _non_negative),
        "domain_size": _chain(_parse_int_list, _domain_sizes),
        "rcond": _chain(float, _open_unit),
        "include_identity": _parse_bool,
        "trotterize": _parse_bool,
    },
    "varqite": {
        "eta": _chain(float, _positive),
        "steps": _chain(int, _non_negative),
        "reps": _chain(int, _positive),
        "theta0": _parse_angle,
        "m_second_term": _parse_bool,
        "regularization": _chain(float, _non_negative),
        "v_method": _chain(str.lower, _v_method),
        "rcond": _chain(float, _open_unit),
        "v_tol": _chain(float, _non_negative),
    },
}


def _read_sections(text: str) -> dict[str, dict[str, tuple[object, int]]]:
    sections: dict[str, dict[str, tuple[object, int]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = re.split(r"[#;]", raw, maxsplit=1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            current = m.group(1).lower()
            if current not in _SCHEMA:
                raise ConfigError(f"unknown section [{current}]", lineno)
            if current in sections:
                raise ConfigError(f"duplicate section [{current}]", lineno)
            sections[current] = {}
            continue
        if current is None:
            raise ConfigError("key outside of any [section]", lineno)
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in _SCHEMA[current]:
            raise ConfigError(f"unknown key {key!r} in [{current}]", lineno)
        if key in sections[current]:
            prev = sections[current][key][1]
            raise ConfigError(f"duplicate key {key!r} (first set on line {prev})", lineno)
        try:
            parsed = _SCHEMA[current][key](value)
        except ValueError as exc:
            raise ConfigError(f"[{current}] {key}: {exc}", lineno) from None
        sections[current][key] = (parsed, lineno)
    return sections


def parse_config(text: str, base_dir: Path | str | None = None) -> RunConfig:
    """Parse and validate a run configuration, filling defaults."""
    s = _read_sections(text)

    def get(section, key, default=None):
        return s.get(section, {}).get(key, (default, None))[0]

    def line_of(section, key):
        return s.get(section, {}).get(key, (None, None))[1]

    model = s.get("model", {})
    if "hamiltonian" in model:
        clash = [k for k in ("n", "j", "g") if k in model]
        if clash:
            raise ConfigError(
                "give either 'hamiltonian' or TFIM parameters, not both",
                line_of("model", clash[0]),
            )
        path = Path(get("model", "hamiltonian"))
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        tfim = None
    else:
        if "n" not in model:
            raise ConfigError("[model] needs 'n' (or a 'hamiltonian' file)")
        path = None
        try:
            tfim = TfimParams(get("model", "n"), get("model", "j", 1.0), get("model", "g", 1.0))
        except ValueError as exc:
            raise ConfigError(str(exc), line_of("model", "n")) from None

    init = get("model", "initial_state")
    if init is not None and tfim is not None and len(init) != tfim.n:
        raise ConfigError(
            f"initial_state has {len(init)} bits for {tfim.n} qubits",
            line_of("model", "initial_state"),
        )

    domains = get("qite", "domain_size", (2,))
    qite = QiteConfig(
        dtau=get("qite", "dtau", 0.25),
        steps=get("qite", "steps", 40),
        domain_size=domains[0],
        rcond=get("qite", "rcond", 1e-8),
        include_identity=get("qite", "include_identity", False),
        trotterize=get("qite", "trotterize", True),
    )
    varqite = VarQiteConfig(
        eta=get("varqite", "eta", 0.05),
        steps=get("varqite", "steps", 200),
        m_second_term=get("varqite", "m_second_term", True),
        m_regularization=get("varqite", "regularization", 1e-6),
        v_method=get("varqite", "v_method", "analytic"),
        theta0=get("varqite", "theta0", math.pi / 3),
        rcond=get("varqite", "rcond", 1e-8),
        v_tol=get("varqite", "v_tol", 1e-8),
    )
    out = get("run", "out")
    return RunConfig(
        method=get("run", "method", "all"),
        tfim=tfim,
        hamiltonian_path=path,
        initial_state=init,
        ite=IteConfig(get("ite", "dtau", 0.25), get("ite", "steps", 40)),
        qite=qite,
        domain_sizes=domains,
        varqite=varqite,
        reps=get("varqite", "reps", 2),
        out_dir=Path(out) if out else None,
        emit_fidelity=get("run", "fidelity", True),
        degenerate=get("run", "degenerate", False),
        degeneracy_tol=get("run", "degeneracy_tol", 1e-8),
    )
