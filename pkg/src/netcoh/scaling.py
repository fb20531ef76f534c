"""Variance sweeps across network sizes with log-log exponent fits.

Sweeps use the closed-form spectra of the regular families (circulant for
ring and torus, sine basis for the path, N*l for the complete graph) so sizes
in the thousands stay cheap; configurations whose variance diverges are kept
as unbounded markers rather than numbers.  The exponent is the least-squares
slope of log V_N against log N inside a fit window, by default the upper half
of the swept sizes widened until it holds at least four finite points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitError, InvalidParameterError, UnboundedVarianceError
from .graphs import (
    LaplacianSpectrum,
    complete_spectrum,
    path_spectrum,
    ring_spectrum,
    torus_spectrum,
)
from .variance import variance_by_kind

__all__ = [
    "FAMILIES",
    "ScalingResult",
    "family_spectrum",
    "run_scaling",
    "fit_exponent",
    "write_scaling_csv",
]

FAMILIES = ("path", "ring", "complete", "torus1", "torus2", "torus3")

_MIN_FIT_POINTS = 4


@dataclass(frozen=True)
class ScalingResult:
    """Sweep outcome: (N, V_N-or-None) points plus an optional exponent fit."""

    family: str
    kind: str
    points: tuple[tuple[int, float | None], ...]
    fitted_exponent: float | None
    fit_window: tuple[int, int] | None


def family_spectrum(family: str, size: int, weight: float) -> LaplacianSpectrum:
    """Closed-form spectrum of one family member; ``size`` is the torus side."""
    if family == "path":
        return path_spectrum(size, weight)
    if family == "ring":
        return ring_spectrum(size, weight)
    if family == "complete":
        return complete_spectrum(size, weight)
    if family in ("torus1", "torus2", "torus3"):
        return torus_spectrum(size, int(family[-1]), weight)
    raise InvalidParameterError(f"unknown family {family!r}; choose from {FAMILIES}")


def run_scaling(
    family: str,
    kind: str,
    gains,
    sizes,
    weight: float = 1.0,
    window: tuple[int, int] | None = None,
) -> ScalingResult:
    """Evaluate V_N over ascending sizes and fit the asymptotic exponent.

    For torus families ``sizes`` are lattice sides and N is reported as
    side**d.  Divergent configurations appear as ``None`` values.
    """
    sizes = [int(s) for s in sizes]
    if sizes != sorted(sizes) or len(set(sizes)) != len(sizes):
        raise InvalidParameterError("sizes must be strictly ascending")
    points = []
    for size in sizes:
        spec = family_spectrum(family, size, weight)
        try:
            value = variance_by_kind(spec, kind, gains).v_n
        except UnboundedVarianceError:
            value = None
        points.append((spec.node_count, value))
    points = tuple(points)

    if window is not None:
        exponent = fit_exponent(points, window)
        return ScalingResult(family, kind, points, exponent, window)

    exponent, used = _fit_default_window(points)
    return ScalingResult(family, kind, points, exponent, used)


def _fit_default_window(points):
    ns = [n for n, _ in points]
    # upper half first, widened downward until the fit has enough points
    for start in range(len(ns) // 2, -1, -1):
        window = (ns[start], ns[-1])
        try:
            return fit_exponent(points, window), window
        except FitError:
            continue
    return None, None


def fit_exponent(points, window: tuple[int, int]) -> float:
    """Least-squares slope of log V_N vs log N for finite points in window."""
    lo, hi = window
    xs, ys = [], []
    for n, value in points:
        if value is None or not lo <= n <= hi:
            continue
        if value <= 0.0:
            continue
        xs.append(np.log(float(n)))
        ys.append(np.log(value))
    if len(xs) < _MIN_FIT_POINTS:
        raise FitError(
            f"need at least {_MIN_FIT_POINTS} finite points in window {window}, "
            f"got {len(xs)}"
        )
    slope, _ = np.polyfit(np.array(xs), np.array(ys), 1)
    return float(slope)


def write_scaling_csv(result: ScalingResult, stream) -> None:
    """Columns ``N,V_N,bounded,exponent_window_flag``; unbounded rows blank."""
    stream.write("N,V_N,bounded,exponent_window_flag\n")
    window = result.fit_window
    for n, value in result.points:
        in_window = window is not None and window[0] <= n <= window[1]
        if value is None:
            stream.write(f"{n},,false,{str(in_window).lower()}\n")
        else:
            stream.write(f"{n},{value!r},true,{str(in_window).lower()}\n")
    if result.fitted_exponent is not None:
        stream.write(f"exponent,{result.fitted_exponent!r},,\n")
