"""Closed-loop state-space models for P, DAPI and F-DPD consensus control.

Assembles the full block-matrix dynamics driven by per-node white noise, the
per-mode 2x2 / 3x3 subsystems obtained by diagonalizing the Laplacian, and
stability checks for each controller family.  Gains are uniform scalars:
relative couplings are ``gain * laplacian`` and absolute feedback terms are
scalar multiples of the identity.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass

import numpy as np

from .errors import IdealPdRedirectError, InvalidParameterError
from .graphs import WeightedGraph, laplacian, require_connected

__all__ = [
    "KIND_P",
    "KIND_DAPI",
    "KIND_FDPD",
    "PGains",
    "DapiGains",
    "FdpdGains",
    "ClosedLoopSystem",
    "ModalSubsystem",
    "assemble",
    "assemble_p",
    "assemble_dapi",
    "assemble_fdpd",
    "modal_subsystem",
    "is_stable_mode",
    "power_preset",
    "droop_preset",
    "ideal_pd_equivalent",
    "zero_averaging_equivalent",
    "parse_gains_config",
]

KIND_P = "p"
KIND_DAPI = "dapi"
KIND_FDPD = "fdpd"


def _nonneg(name: str, value: float) -> None:
    if not math.isfinite(value) or value < 0.0:
        raise InvalidParameterError(f"{name} must be finite and >= 0, got {value}")


def _positive(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise InvalidParameterError(f"{name} must be finite and > 0, got {value}")


@dataclass(frozen=True)
class PGains:
    """Static consensus feedback: relative gains f, g; absolute gains f0, g0."""

    f: float
    g: float
    f0: float = 0.0
    g0: float = 0.0

    def __post_init__(self):
        for name in ("f", "g", "f0", "g0"):
            _nonneg(name, getattr(self, name))


@dataclass(frozen=True)
class DapiGains:
    """Distributed-averaging PI gains.

    ``k_i`` is the integral gain, ``c`` the averaging-filter gain applied to
    the integral states.  A finite variance requires f > 0 and g0 > 0.
    """

    f: float
    g: float
    g0: float
    k_i: float
    c: float

    def __post_init__(self):
        _positive("f", self.f)
        _nonneg("g", self.g)
        _positive("g0", self.g0)
        _positive("k_i", self.k_i)
        _nonneg("c", self.c)


@dataclass(frozen=True)
class FdpdGains:
    """Filtered distributed PD gains.

    ``k_d`` is the derivative gain, ``tau`` the first-order filter time
    constant; tau = 0 denotes the ideal-PD special case.
    """

    f: float
    g: float
    f0: float
    k_d: float
    tau: float

    def __post_init__(self):
        _nonneg("f", self.f)
        _nonneg("g", self.g)
        _positive("f0", self.f0)
        _positive("k_d", self.k_d)
        _nonneg("tau", self.tau)


@dataclass(frozen=True)
class ClosedLoopSystem:
    """State-space triple (A, B, C) with the centering output projector.

    States are stacked as x-block, v-block and (for dapi/fdpd) the auxiliary
    block; B injects unit-intensity noise into the v-block and C maps x to
    its deviation from the network average.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    kind: str
    n: int

    @property
    def state_dim(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class ModalSubsystem:
    """Per-mode subsystem (A_n, B_n, C_n) for Laplacian eigenvalue lam."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    lam: float
    index: int
    kind: str


def _centering_output(n: int, state_dim: int) -> np.ndarray:
    c = np.zeros((n, state_dim))
    c[:, :n] = np.eye(n) - np.ones((n, n)) / n
    return c


def assemble_p(graph: WeightedGraph, gains: PGains) -> ClosedLoopSystem:
    """2N-state P-controlled loop: [[0, I], [-f L - f0 I, -g L - g0 I]]."""
    require_connected(graph)
    n = graph.node_count
    lap = laplacian(graph)
    eye = np.eye(n)
    a = np.block(
        [
            [np.zeros((n, n)), eye],
            [-gains.f * lap - gains.f0 * eye, -gains.g * lap - gains.g0 * eye],
        ]
    )
    b = np.vstack([np.zeros((n, n)), eye])
    return ClosedLoopSystem(a, b, _centering_output(n, 2 * n), KIND_P, n)


def assemble_dapi(graph: WeightedGraph, gains: DapiGains) -> ClosedLoopSystem:
    """3N-state DAPI loop with integral states averaged through c * L."""
    require_connected(graph)
    n = graph.node_count
    lap = laplacian(graph)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    a = np.block(
        [
            [zero, eye, zero],
            [-gains.f * lap, -gains.g * lap - gains.g0 * eye, gains.k_i * eye],
            [zero, -eye, -gains.c * lap],
        ]
    )
    b = np.vstack([zero, eye, zero])
    return ClosedLoopSystem(a, b, _centering_output(n, 3 * n), KIND_DAPI, n)


def assemble_fdpd(graph: WeightedGraph, gains: FdpdGains) -> ClosedLoopSystem:
    """3N-state F-DPD loop with low-pass filtered derivative action."""
    if gains.tau == 0.0:
        raise IdealPdRedirectError(
            "tau = 0 is ideal PD: assemble with assemble_p and gains ideal_pd_equivalent(...)"
        )
    require_connected(graph)
    n = graph.node_count
    lap = laplacian(graph)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    a = np.block(
        [
            [zero, eye, zero],
            [-gains.f * lap - gains.f0 * eye, -gains.g * lap, eye],
            [zero, -(gains.k_d / gains.tau) * eye, -(1.0 / gains.tau) * eye],
        ]
    )
    b = np.vstack([zero, eye, zero])
    return ClosedLoopSystem(a, b, _centering_output(n, 3 * n), KIND_FDPD, n)


def assemble(graph: WeightedGraph, kind: str, gains) -> ClosedLoopSystem:
    """Dispatch on controller kind ('p', 'dapi', 'fdpd')."""
    if kind == KIND_P:
        return assemble_p(graph, gains)
    if kind == KIND_DAPI:
        return assemble_dapi(graph, gains)
    if kind == KIND_FDPD:
        return assemble_fdpd(graph, gains)
    raise InvalidParameterError(f"unknown controller kind {kind!r}")


def modal_subsystem(kind: str, gains, lam: float, index: int) -> ModalSubsystem:
    """Decoupled subsystem for one Laplacian eigenvalue.

    P gives a 2x2 block, DAPI and F-DPD 3x3 blocks; the input column is the
    v-component and the output row reads the x-component.
    """
    if lam < 0.0:
        raise InvalidParameterError(f"laplacian eigenvalue must be >= 0, got {lam}")
    if kind == KIND_P:
        a = np.array(
            [
                [0.0, 1.0],
                [-gains.f * lam - gains.f0, -gains.g * lam - gains.g0],
            ]
        )
        b = np.array([[0.0], [1.0]])
        c = np.array([[1.0, 0.0]])
    elif kind == KIND_DAPI:
        a = np.array(
            [
                [0.0, 1.0, 0.0],
                [-gains.f * lam, -gains.g * lam - gains.g0, gains.k_i],
                [0.0, -1.0, -gains.c * lam],
            ]
        )
        b = np.array([[0.0], [1.0], [0.0]])
        c = np.array([[1.0, 0.0, 0.0]])
    elif kind == KIND_FDPD:
        if gains.tau == 0.0:
            raise IdealPdRedirectError(
                "tau = 0 is ideal PD: use kind 'p' with gains ideal_pd_equivalent(...)"
            )
        a = np.array(
            [
                [0.0, 1.0, 0.0],
                [-gains.f * lam - gains.f0, -gains.g * lam, 1.0],
                [0.0, -gains.k_d / gains.tau, -1.0 / gains.tau],
            ]
        )
        b = np.array([[0.0], [1.0], [0.0]])
        c = np.array([[1.0, 0.0, 0.0]])
    else:
        raise InvalidParameterError(f"unknown controller kind {kind!r}")
    return ModalSubsystem(a, b, c, float(lam), index, kind)


def _char_coeffs(a: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients, highest power first."""
    if a.shape == (2, 2):
        return np.array([1.0, -np.trace(a), np.linalg.det(a)])
    if a.shape == (3, 3):
        tr = np.trace(a)
        minors = (
            a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
            + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
            + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
        )
        return np.array([1.0, -tr, minors, -np.linalg.det(a)])
    raise InvalidParameterError(f"unsupported modal matrix shape {a.shape}")


def is_stable_mode(sub: ModalSubsystem) -> bool:
    """Hurwitz verdict for one modal subsystem.

    P uses coefficient positivity of the quadratic, F-DPD the Routh-Hurwitz
    conditions of the cubic; DAPI falls back to numerical eigenvalues with
    threshold 1e-10 times the spectral radius.
    """
    if sub.kind == KIND_P:
        _, a1, a0 = _char_coeffs(sub.a)
        return a1 > 0.0 and a0 > 0.0
    if sub.kind == KIND_FDPD:
        _, a2, a1, a0 = _char_coeffs(sub.a)
        return a2 > 0.0 and a1 > 0.0 and a0 > 0.0 and a2 * a1 > a0
    eigs = np.linalg.eigvals(sub.a)
    radius = float(np.abs(eigs).max())
    return bool(np.all(eigs.real < -1e-10 * max(radius, 1.0)))


def power_preset(
    m: float, d: float, b: float, l: float, k_i: float, c: float
) -> DapiGains:
    """DAPI gains from swing-equation constants.

    Inertia m and damping d give g0 = d/m; line susceptance b over edge
    weight l gives the relative position gain f = b/(l*m); there is no
    relative velocity coupling.
    """
    for name, value in (("m", m), ("d", d), ("b", b), ("l", l)):
        _positive(name, value)
    return DapiGains(f=b / (l * m), g=0.0, g0=d / m, k_i=k_i, c=c)


def droop_preset(m: float, d: float, b: float, l: float) -> PGains:
    """Droop-only P gains from the same swing-equation constants."""
    for name, value in (("m", m), ("d", d), ("b", b), ("l", l)):
        _positive(name, value)
    return PGains(f=b / (l * m), g=0.0, f0=0.0, g0=d / m)


def ideal_pd_equivalent(gains: FdpdGains) -> PGains:
    """P gains reproducing F-DPD at tau = 0: derivative gain becomes g0."""
    return PGains(f=gains.f, g=gains.g, f0=gains.f0, g0=gains.k_d)


def zero_averaging_equivalent(gains: DapiGains) -> PGains:
    """P gains reproducing DAPI as c -> 0: integral gain becomes f0."""
    return PGains(f=gains.f, g=gains.g, f0=gains.k_i, g0=gains.g0)


# ---------------------------------------------------------------------------
# Gains config files: "key = value" lines, optional [power] preset block.
# ---------------------------------------------------------------------------

_P_KEYS = {"f", "g", "f0", "g0"}
_DAPI_KEYS = {"f", "g", "g0", "ki", "c"}
_FDPD_KEYS = {"f", "g", "f0", "kd", "tau"}


def parse_gains_config(text: str):
    """Parse a gains config into ``(kind, gains)``.

    Plain form::

        controller = fdpd
        f = 1.0
        g = 1.0
        f0 = 1.0
        kd = 1.0
        tau = 0.1

    Power-preset form (controller p or dapi)::

        controller = dapi
        ki = 1.0
        c = 0.1

        [power]
        m = 0.05305
        d = 0.02653
        b = 0.3
        l = 1.0
    """
    stripped = text.lstrip()
    if not stripped.startswith("["):
        text = "[gains]\n" + text
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise InvalidParameterError(f"bad gains config: {exc}") from exc
    if "gains" not in parser:
        raise InvalidParameterError("gains config must start with key = value lines")
    main = parser["gains"]
    kind = main.get("controller", "").strip().lower()
    if kind not in (KIND_P, KIND_DAPI, KIND_FDPD):
        raise InvalidParameterError(
            f"controller must be one of p, dapi, fdpd; got {kind!r}"
        )

    def value(section, key, default=None):
        if key not in section:
            if default is None:
                raise InvalidParameterError(f"missing key {key!r} in gains config")
            return default
        try:
            return float(section[key])
        except ValueError:
            raise InvalidParameterError(
                f"key {key!r} is not a number: {section[key]!r}"
            ) from None

    if "power" in parser:
        power = parser["power"]
        m = value(power, "m")
        d = value(power, "d")
        b = value(power, "b")
        l = value(power, "l")
        if kind == KIND_DAPI:
            return kind, power_preset(m, d, b, l, value(main, "ki"), value(main, "c", 0.0))
        if kind == KIND_P:
            return kind, droop_preset(m, d, b, l)
        raise InvalidParameterError("power preset applies to controller p or dapi only")

    if kind == KIND_P:
        _reject_unknown(main, _P_KEYS)
        return kind, PGains(
            f=value(main, "f", 0.0),
            g=value(main, "g", 0.0),
            f0=value(main, "f0", 0.0),
            g0=value(main, "g0", 0.0),
        )
    if kind == KIND_DAPI:
        _reject_unknown(main, _DAPI_KEYS)
        return kind, DapiGains(
            f=value(main, "f"),
            g=value(main, "g", 0.0),
            g0=value(main, "g0"),
            k_i=value(main, "ki"),
            c=value(main, "c", 0.0),
        )
    _reject_unknown(main, _FDPD_KEYS)
    return kind, FdpdGains(
        f=value(main, "f", 0.0),
        g=value(main, "g", 0.0),
        f0=value(main, "f0"),
        k_d=value(main, "kd"),
        tau=value(main, "tau"),
    )


def _reject_unknown(section, allowed: set[str]) -> None:
    unknown = {k for k in section if k != "controller"} - allowed
    if unknown:
        raise InvalidParameterError(
            f"unknown gains keys for this controller: {sorted(unknown)}"
        )
