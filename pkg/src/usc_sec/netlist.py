"""Circuit description files and their mapping onto model parameters.

File format (UTF-8, line oriented)::

    # comment (also allowed after a value)
    [resonator]
    type = lc             # lc | fabry_perot | tlr  (inferred when omitted)
    C_R = 1e-12           # farad
    L_R = 2.5e-9          # henry
    [qubit]               # optional, lc resonators only
    C_J = 4e-15           # farad
    E_J = 1.2e-22         # joule
    position = inductive  # inductive (circuit A) | capacitive (circuit B)
    [coupling]
    C_C = 1e-15           # farad
    [line]
    Z_T = 50              # ohm

Fabry-Perot resonators take ``eta`` (m), ``length`` (m) and optional ``m``;
transmission-line resonators take ``C_T`` (F/m), ``length`` (m), optional
``m`` and ``boundary`` (``open`` | ``short``). Keys are case sensitive,
values are plain decimal/scientific floats in SI units.

:func:`parse_netlist` never stops at the first problem: it returns every
diagnostic, each anchored to a source line.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field

import scipy.constants as const

from .errors import DomainError, GoodCavityWarning, USCError
from .models import GOOD_CAVITY_FACTOR, CpbParams, ModelParams, Variant, cpb_params
from .sec_rates import CouplingKind, Quadrature, SecFlavor, make_flavor

SECTIONS = ("resonator", "qubit", "coupling", "line")
RESONATOR_KEYS = {
    "lc": ("C_R", "L_R"),
    "fabry_perot": ("eta", "length", "m"),
    "tlr": ("C_T", "length", "m", "boundary"),
}
REQUIRED = {
    "lc": ("C_R", "L_R"),
    "fabry_perot": ("eta", "length"),
    "tlr": ("C_T", "length"),
}
QUBIT_KEYS = ("C_J", "E_J", "position")
POSITIONS = {"inductive": Variant.CIRCUIT_A, "capacitive": Variant.CIRCUIT_B}
BOUNDARIES = ("open", "short")
_SKIP = object()


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    severity: str
    message: str

    def __str__(self):
        return f"line {self.line}: {self.severity}: {self.message}"


class NetlistError(USCError, ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class LCResonator:
    c_r: float
    l_r: float
    kind = "lc"


@dataclass(frozen=True)
class FabryPerotResonator:
    eta: float
    length: float
    m: int = 1
    kind = "fabry_perot"


@dataclass(frozen=True)
class TLResonator:
    c_t: float
    length: float
    m: int = 1
    boundary: str = "open"
    kind = "tlr"


@dataclass(frozen=True)
class Qubit:
    c_j: float
    e_j: float
    position: str = "inductive"

    @property
    def variant(self) -> Variant:
        return POSITIONS[self.position]


@dataclass(frozen=True)
class CircuitSpec:
    resonator: object
    qubit: Qubit | None = None
    c_c: float | None = None
    z_t: float | None = None


@dataclass(frozen=True)
class ParseResult:
    spec: CircuitSpec | None
    diagnostics: tuple = ()

    @property
    def ok(self) -> bool:
        return self.spec is not None and not any(d.severity == "error" for d in self.diagnostics)


def _number(text: str):
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def parse_netlist(text: str) -> ParseResult:
    """Parse netlist text into a :class:`CircuitSpec` plus diagnostics."""
    diags: list[ParseDiagnostic] = []

    def err(line, msg):
        diags.append(ParseDiagnostic(line, "error", msg))

    sections: dict[str, dict] = {}
    header_line: dict[str, int] = {}
    current = None
    lines = text.splitlines()
    for no, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("["):
            if not body.endswith("]"):
                err(no, f"malformed section header {body!r}")
                current = _SKIP
                continue
            name = body[1:-1].strip()
            # keys under a rejected header are skipped, not reported again
            if name not in SECTIONS:
                err(no, f"unknown section [{name}]")
                current = _SKIP
                continue
            if name in sections:
                err(no, f"duplicate section [{name}] (first at line {header_line[name]})")
                current = _SKIP
                continue
            sections[name] = {}
            header_line[name] = no
            current = name
            continue
        if "=" not in body:
            err(no, f"expected 'key = value', got {body!r}")
            continue
        key, value = (s.strip() for s in body.split("=", 1))
        if current is _SKIP:
            continue
        if current is None:
            err(no, f"key {key!r} outside a known section")
            continue
        if key in sections[current]:
            err(no, f"duplicate key {key!r} in [{current}]")
            continue
        sections[current][key] = (value, no)

    end = max(len(lines), 1)
    res = _resonator(sections.get("resonator"), header_line.get("resonator"), end, err)
    qubit = _qubit(sections.get("qubit"), header_line.get("qubit"), err)
    c_c = _single(sections, header_line, "coupling", "C_C", err)
    z_t = _single(sections, header_line, "line", "Z_T", err)

    kind = getattr(res, "kind", None)
    if qubit is not None and kind not in (None, "lc"):
        err(header_line["qubit"], f"[qubit] is only supported with an lc resonator, not {kind}")
    if kind in ("lc", "tlr"):
        for name, val in (("coupling", c_c), ("line", z_t)):
            if name not in sections:
                err(end, f"missing section [{name}] required by a {kind} resonator")
    diags.sort(key=lambda d: d.line)
    if any(d.severity == "error" for d in diags) or res is None:
        return ParseResult(None, tuple(diags))
    return ParseResult(CircuitSpec(res, qubit, c_c, z_t), tuple(diags))


def _positive(entry, key, err):
    value, no = entry
    x = _number(value)
    if x is None:
        err(no, f"{key}: cannot read {value!r} as a number")
        return None
    if x <= 0:
        err(no, f"{key}: non-positive value {value}")
        return None
    return x


def _mode_index(entry, err):
    value, no = entry
    try:
        m = int(value)
    except ValueError:
        err(no, f"m: expected an integer, got {value!r}")
        return None
    if m < 1:
        err(no, f"m: mode index must be >= 1, got {m}")
        return None
    return m


def _resonator(sec, head, end, err):
    if sec is None:
        err(end, "missing section [resonator]")
        return None
    if "type" in sec:
        kind, no = sec["type"]
        if kind not in RESONATOR_KEYS:
            err(no, f"unknown resonator type {kind!r}")
            return None
    else:
        hits = [k for k in ("lc", "fabry_perot", "tlr") if REQUIRED[k][0] in sec]
        if len(hits) != 1:
            err(head, "cannot infer resonator type; give exactly one geometry or set 'type'")
            return None
        kind = hits[0]
    allowed = set(RESONATOR_KEYS[kind]) | {"type"}
    ok = True
    for key, (_, no) in sec.items():
        if key not in allowed:
            err(no, f"unknown key {key!r} for a {kind} resonator")
            ok = False
    for key in REQUIRED[kind]:
        if key not in sec:
            err(head, f"missing required key {key!r} in [resonator]")
            ok = False
    vals = {key: _positive(sec[key], key, err) for key in REQUIRED[kind] if key in sec}
    m = _mode_index(sec["m"], err) if "m" in sec else 1
    if not ok or any(v is None for v in vals.values()) or m is None:
        return None
    if kind == "lc":
        return LCResonator(vals["C_R"], vals["L_R"])
    if kind == "fabry_perot":
        return FabryPerotResonator(vals["eta"], vals["length"], m)
    boundary = "open"
    if "boundary" in sec:
        boundary, no = sec["boundary"]
        if boundary not in BOUNDARIES:
            err(no, f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
            return None
    return TLResonator(vals["C_T"], vals["length"], m, boundary)


def _qubit(sec, head, err):
    if sec is None:
        return None
    ok = True
    for key, (_, no) in sec.items():
        if key not in QUBIT_KEYS:
            err(no, f"unknown key {key!r} in [qubit]")
            ok = False
    for key in ("C_J", "E_J"):
        if key not in sec:
            err(head, f"missing required key {key!r} in [qubit]")
            ok = False
    if not ok:
        return None
    c_j = _positive(sec["C_J"], "C_J", err)
    e_j = _positive(sec["E_J"], "E_J", err)
    position = "inductive"
    if "position" in sec:
        position, no = sec["position"]
        if position not in POSITIONS:
            err(no, f"position must be 'inductive' or 'capacitive', got {position!r}")
            return None
    if c_j is None or e_j is None:
        return None
    return Qubit(c_j, e_j, position)


def _single(sections, header_line, name, key, err):
    sec = sections.get(name)
    if sec is None:
        return None
    ok = True
    for k, (_, no) in sec.items():
        if k != key:
            err(no, f"unknown key {k!r} in [{name}]")
            ok = False
    if key not in sec:
        err(header_line[name], f"missing required key {key!r} in [{name}]")
        return None
    value = _positive(sec[key], key, err)
    return value if ok else None


def load_netlist(path) -> CircuitSpec:
    """Read and parse a file; raise :class:`NetlistError` on any diagnostic error."""
    with open(path, encoding="utf-8") as fh:
        result = parse_netlist(fh.read())
    if not result.ok:
        raise NetlistError(result.diagnostics)
    return result.spec


def serialize(spec: CircuitSpec) -> str:
    """Canonical text form; ``parse_netlist(serialize(s)).spec == s``."""
    r = spec.resonator
    out = ["[resonator]", f"type = {r.kind}"]
    if isinstance(r, LCResonator):
        out += [f"C_R = {r.c_r!r}", f"L_R = {r.l_r!r}"]
    elif isinstance(r, FabryPerotResonator):
        out += [f"eta = {r.eta!r}", f"length = {r.length!r}", f"m = {r.m}"]
    else:
        out += [f"C_T = {r.c_t!r}", f"length = {r.length!r}", f"m = {r.m}",
                f"boundary = {r.boundary}"]
    if spec.qubit is not None:
        q = spec.qubit
        out += ["", "[qubit]", f"C_J = {q.c_j!r}", f"E_J = {q.e_j!r}", f"position = {q.position}"]
    if spec.c_c is not None:
        out += ["", "[coupling]", f"C_C = {spec.c_c!r}"]
    if spec.z_t is not None:
        out += ["", "[line]", f"Z_T = {spec.z_t!r}"]
    return "\n".join(out) + "\n"


# --- physical parameters ----------------------------------------------------


def fabry_perot_params(eta: float, length: float, m: int = 1):
    """Mode frequency ``m pi c / L`` (rad/s) and the bare-rate profile.

    The profile is ``kappa_FP0(w) = 2 c / (Lambda(w)² L)`` with
    ``Lambda(w) = w eta / c``.
    """
    if int(m) != m or m < 1:
        raise DomainError(f"mode index must be a positive integer, got {m}")
    if not (eta > 0 and length > 0):
        raise DomainError("eta and length must be positive")
    c = const.c
    omega_m = m * math.pi * c / length

    def kappa_fp0(omega):
        lam = omega * eta / c
        return 2 * c / (lam ** 2 * length)

    return omega_m, kappa_fp0


def tlr_mode_frequency(z_t: float, c_t: float, length: float, m: int = 1,
                       boundary: str = "open") -> float:
    """``m pi v / L`` (open far end) or ``(m - 1/2) pi v / L`` (shorted), ``v = 1/(Z_T C_T)``."""
    if int(m) != m or m < 1:
        raise DomainError(f"mode index must be a positive integer, got {m}")
    v = 1.0 / (z_t * c_t)
    if boundary == "open":
        return m * math.pi * v / length
    if boundary == "short":
        return (m - 0.5) * math.pi * v / length
    raise DomainError(f"unknown boundary {boundary!r}")


def tlr_params(z_t: float, c_c: float, c_t: float, length: float, m: int = 1,
               boundary: str = "open") -> float:
    """Loss rate ``2 w_m² Z_T C_C² / (C_T L)`` of the m-th resonator mode (1/s)."""
    for name, v in (("z_t", z_t), ("c_c", c_c), ("c_t", c_t), ("length", length)):
        if not v > 0:
            raise DomainError(f"{name} must be positive")
    w = tlr_mode_frequency(z_t, c_t, length, m, boundary)
    return 2 * w ** 2 * z_t * c_c ** 2 / (c_t * length)


@dataclass(frozen=True)
class LCDerived:
    """SI quantities of an LC resonator coupled to the line."""

    omega_z: float
    z_r: float
    c_c_prime: float
    c_c_dprime: float | None
    kappa_lc0_prime: float
    kappa_lc0: float
    zeta_scale: float
    omega_x: float | None = None
    g: float = 0.0


@dataclass(frozen=True)
class CircuitModel:
    """Dimensionless model built from a circuit file.

    Frequencies and rates are in units of ``omega_unit`` (rad/s): the qubit
    frequency when a qubit is present, otherwise the resonator mode.
    """

    params: ModelParams
    flavor: SecFlavor
    general_flavor: SecFlavor
    omega_unit: float
    derived: object = None
    good_cavity_violation: bool = False
    notes: tuple = field(default=())


def lc_derived(c_r, l_r, c_c, z_t, qubit: Qubit | None = None) -> LCDerived:
    omega_z = 1.0 / math.sqrt(l_r * c_r)
    z_r = math.sqrt(l_r / c_r)
    c_p = 1.0 / (1.0 / c_c + 1.0 / c_r)
    c_pp = None
    omega_x = None
    g = 0.0
    if qubit is not None:
        c_pp = 1.0 / (1.0 / c_c + 1.0 / c_r + 1.0 / qubit.c_j)
        omega_x, g = cpb_params(CpbParams(qubit.c_j, qubit.e_j), z_r)
    kp = omega_z * z_t * c_p ** 2 / (z_r * c_r ** 2)
    k0 = omega_z * z_t * c_c ** 2 / (z_r * c_r ** 2)
    if qubit is not None and qubit.variant is Variant.CIRCUIT_B:
        zeta = z_t * c_pp
    else:
        zeta = z_t * c_p
    return LCDerived(omega_z, z_r, c_p, c_pp, kp, k0, zeta, omega_x, g)


def _gate(kappa, *freqs):
    return kappa >= GOOD_CAVITY_FACTOR * min(freqs)


def to_model(spec: CircuitSpec) -> CircuitModel:
    """Map a parsed circuit onto ``ModelParams`` and its coupling flavors.

    ``flavor`` is the form read off the circuit (frequency-dependent bare
    rate, circuit-specific operator); ``general_flavor`` is the good-cavity
    ``(w/wz)³ |<X+>|²`` form. A good-cavity violation is flagged on both
    flavors and reported with :class:`GoodCavityWarning`.
    """
    r = spec.resonator
    if isinstance(r, LCResonator):
        return _lc_model(spec)
    if isinstance(r, FabryPerotResonator):
        omega_m, prof = fabry_perot_params(r.eta, r.length, r.m)
        k = prof(omega_m) / omega_m
        bad = _gate(k, 1.0)
        p = ModelParams(1.0, 0.0, Variant.CIRCUIT_A, 1.0, k, allow_bad_cavity=bad)
        plus = dataclasses.replace(make_flavor(CouplingKind.FABRY_PEROT, p),
                                   good_cavity_violation=bad)
        minus = SecFlavor(CouplingKind.FABRY_PEROT, k, 1.0, -5, Quadrature.MINUS,
                          good_cavity_violation=bad)
        return _finish(CircuitModel(p, plus, minus, omega_m, None, bad))
    w = tlr_mode_frequency(spec.z_t, r.c_t, r.length, r.m, r.boundary)
    k = tlr_params(spec.z_t, spec.c_c, r.c_t, r.length, r.m, r.boundary) / w
    bad = _gate(k, 1.0)
    p = ModelParams(1.0, 0.0, Variant.CIRCUIT_A, 1.0, k, allow_bad_cavity=bad)
    f = dataclasses.replace(make_flavor(CouplingKind.TLR, p), good_cavity_violation=bad)
    return _finish(CircuitModel(p, f, f, w, None, bad))


def _lc_model(spec: CircuitSpec) -> CircuitModel:
    r = spec.resonator
    d = lc_derived(r.c_r, r.l_r, spec.c_c, spec.z_t, spec.qubit)
    if spec.qubit is None:
        unit = d.omega_z
        wz, variant = 1.0, Variant.CIRCUIT_A
    else:
        unit = d.omega_x
        wz, variant = d.omega_z / d.omega_x, spec.qubit.variant
    k0 = d.kappa_lc0 / unit
    bad = _gate(k0, wz, 1.0)
    p = ModelParams(wz, d.g, variant, 1.0, k0 / wz ** 3, z_r=d.z_r, allow_bad_cavity=bad)
    zeta = unit * d.zeta_scale
    if variant is Variant.CIRCUIT_A:
        f = make_flavor(CouplingKind.CIRCUIT_A, p, zeta_scale=zeta)
        kref = d.kappa_lc0_prime / unit
    else:
        f = make_flavor(CouplingKind.CIRCUIT_B, p, zeta_scale=zeta)
        kref = d.omega_z * spec.z_t * d.c_c_dprime ** 2 / (d.z_r * r.c_r ** 2) / unit
    f = dataclasses.replace(f, kappa_ref=kref, good_cavity_violation=bad)
    gen = dataclasses.replace(make_flavor(CouplingKind.GENERAL_FLUX, p), good_cavity_violation=bad)
    return _finish(CircuitModel(p, f, gen, unit, d, bad))


def _finish(model: CircuitModel) -> CircuitModel:
    if model.good_cavity_violation:
        warnings.warn("bare loss rate is not small compared with the system frequencies; "
                      "rates from the secular master equation are unreliable",
                      GoodCavityWarning, stacklevel=3)
    return model
