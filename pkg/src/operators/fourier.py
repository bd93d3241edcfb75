"""
Fourier definition (F): pointwise radial inversion of -|xi|^alpha F f, and the
FFT multiplier on a periodic box.

The FFT computes L applied to the periodic extension of f. The contribution
of the image copies is removed by convolving f with the image kernel

    Phi(y) = c_{d,alpha} sum_{m != 0} |y + 2 L m|^{-d-alpha}

which is exact off the support of f and accurate once f is negligible on the
box boundary.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import interpolate, signal, special

from ..kernels.params import Params
from ..kernels.radial import radial_fourier_inverse, sphere_rule
from ..testbank.functions import TestFunction
from ..utils.errors import AdmissibilityError, AliasingError, DomainError
from ..utils.logger import get_logger
from .common import point, require_admissible, resolve_settings
from .settings import EvalSettings
from .types import EvalReport

logger = get_logger(__name__)

NYQUIST_BAND = 0.9
ALIASING_LIMIT = 1e-8
BOUNDARY_LIMIT = 1e-10
# lattice half-width of the explicit image sum
IMAGE_SHELLS = {2: 16, 3: 3}


def op_fourier(params: Params, f: TestFunction, x, settings: Optional[EvalSettings] = None) -> EvalReport:
    """
    -(2 pi)^{-d} int |xi|^alpha F f(xi) e^{i xi.(x - c)} d xi by radial inversion.

    Args:
        params: Problem parameters
        f: Radial test function with a Fourier profile
        x: Evaluation point

    Returns:
        EvalReport tagged 'F'

    Raises:
        AdmissibilityError: If f has no radial Fourier profile
    """
    require_admissible(params, f, "F")
    if f.fourier_profile is None or not f.radial:
        logger.warning(f"F refuses {f.name}: no radial Fourier profile")
        raise AdmissibilityError(f"F refuses {f.name}: no radial Fourier profile", method="F", function=f.name)
    settings = resolve_settings(settings)
    x = point(params, x)
    alpha = params.alpha
    profile = f.fourier_profile
    R = float(np.linalg.norm(x - f.center))

    value, error = radial_fourier_inverse(lambda s: s ** alpha * profile(s), R, params.d)
    value = -value
    # |L f(x)| <= (2 pi)^{-d} int |xi|^alpha |F f(xi)| d xi at every x
    bound, bound_error = radial_fourier_inverse(lambda s: s ** alpha * abs(profile(s)), 0.0, params.d)
    diagnostics = {"radius": R, "absolute_bound": bound}

    if not (math.isfinite(value) and math.isfinite(error)):
        logger.warning(f"F: non-finite inversion at |x-c|={R:.4g}")
        return EvalReport(value, math.inf, "F", converged=False, diagnostics=diagnostics)
    if abs(value) > bound + bound_error + max(settings.abs_tol, settings.rel_tol * bound):
        logger.warning(f"F: |value| {abs(value):.4g} exceeds the absolute bound {bound:.4g} at |x-c|={R:.4g}")
        diagnostics["out_of_range"] = True
        return EvalReport(value, max(error, abs(value) - bound), "F", converged=False, diagnostics=diagnostics)

    converged = error <= max(settings.abs_tol, settings.rel_tol * abs(value))
    if not converged:
        logger.warning(f"F: inversion error {error:.2e} at |x-c|={R:.4g}")
    return EvalReport(value, error, "F", converged=converged, diagnostics=diagnostics)


@dataclass
class FourierGridResult:
    """L f on the tensor grid x_j = -L + 2 L j / n of the box [-L, L)^d."""

    axes: Tuple[np.ndarray, ...]
    values: np.ndarray
    box: float
    n: int
    aliasing_ratio: float
    aliased: bool
    boundary_mass: float
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def value_at(self, x) -> float:
        """Value at a grid node, or cubic interpolation between nodes."""
        x = np.asarray(x, dtype=float).reshape(len(self.axes))
        if np.any(np.abs(x) > self.box):
            raise DomainError(f"Point {x.tolist()} lies outside the box of half-width {self.box:g}")
        h = 2.0 * self.box / self.n
        index = (x + self.box) / h
        nearest = np.rint(index)
        if np.all(np.abs(index - nearest) < 1e-9) and np.all(nearest < self.n):
            return float(self.values[tuple(nearest.astype(int))])
        interpolator = interpolate.RegularGridInterpolator(self.axes, self.values, method="cubic",
                                                           bounds_error=False, fill_value=None)
        return float(interpolator(x[None, :])[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "box": self.box,
            "n": self.n,
            "aliasing_ratio": self.aliasing_ratio,
            "aliased": self.aliased,
            "boundary_mass": self.boundary_mass,
            "diagnostics": dict(self.diagnostics),
        }


def _image_kernel_1d(params: Params, offsets: np.ndarray, L: float) -> np.ndarray:
    s = 1.0 + params.alpha
    q = offsets / (2.0 * L)
    return params.c_dalpha * (2.0 * L) ** (-s) * (special.zeta(s, 1.0 + q) + special.zeta(s, 1.0 - q))


def _image_kernel_nd(params: Params, offsets: np.ndarray, L: float) -> np.ndarray:
    """Explicit sum over 0 < |m|_inf <= M plus the far lattice as an integral."""
    d, alpha = params.d, params.alpha
    shells = IMAGE_SHELLS[d]
    mesh = np.meshgrid(*([offsets] * d), indexing="ij")
    total = np.zeros(mesh[0].shape)
    for m in np.ndindex(*([2 * shells + 1] * d)):
        shift = np.array(m) - shells
        if not shift.any():
            continue
        r2 = sum((mesh[i] + 2.0 * L * shift[i]) ** 2 for i in range(d))
        total += r2 ** (-(d + alpha) / 2.0)
    rule = sphere_rule(d)
    cube_moment = float(np.max(np.abs(rule.directions), axis=1) ** alpha @ rule.weights)
    a = shells + 0.5
    tail = (2.0 * L) ** (-d - alpha) * a ** (-alpha) / alpha * cube_moment
    return params.c_dalpha * (total + tail)


def image_kernel(params: Params, offsets: np.ndarray, L: float) -> np.ndarray:
    """Phi on the tensor grid of offsets (|offset| < 2L per axis)."""
    if params.d == 1:
        return _image_kernel_1d(params, offsets, L)
    return _image_kernel_nd(params, offsets, L)


def _aliasing_ratio(symbol: np.ndarray, spectrum: np.ndarray, k_axes, k_nyquist: float) -> float:
    grids = np.meshgrid(*k_axes, indexing="ij")
    k_inf = np.max(np.abs(np.stack(grids)), axis=0)
    weighted = symbol * np.abs(spectrum)
    total = float(np.sum(weighted))
    if total == 0.0:
        return 0.0
    return float(np.sum(weighted[k_inf >= NYQUIST_BAND * k_nyquist])) / total


def _boundary_mass(values: np.ndarray) -> float:
    peak = float(np.max(np.abs(values)))
    if peak == 0.0:
        return 0.0
    edge = 0.0
    for axis in range(values.ndim):
        edge = max(edge, float(np.max(np.abs(np.take(values, 0, axis=axis)))))
        edge = max(edge, float(np.max(np.abs(np.take(values, -1, axis=axis)))))
    return edge / peak


def op_fourier_grid(params: Params, f: TestFunction, box: float = 10.0, n: int = 256,
                    strict: bool = False) -> FourierGridResult:
    """
    L f on the periodic box [-box, box)^d by the FFT multiplier -|k|^alpha.

    Args:
        params: Problem parameters
        f: Test function with negligible mass outside the box
        box: Half-width L of the box
        n: Nodes per axis
        strict: Raise instead of flagging when the Nyquist check fails

    Returns:
        FourierGridResult with aliasing and boundary diagnostics

    Raises:
        AdmissibilityError: If f is not Schwartz or compactly supported
        AliasingError: In strict mode, when the multiplier mass near Nyquist exceeds 1e-8
    """
    require_admissible(params, f, "F-grid")
    if box <= 0 or n < 8:
        raise DomainError(f"Grid needs box > 0 and n >= 8, got box={box}, n={n}")
    d, alpha = params.d, params.alpha
    L = float(box)
    h = 2.0 * L / n
    axis = -L + h * np.arange(n)
    axes = tuple([axis] * d)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    samples = np.asarray(f(mesh), dtype=float)

    k = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    k_axes = [k] * d
    k2 = sum(g ** 2 for g in np.meshgrid(*k_axes, indexing="ij"))
    symbol = k2 ** (alpha / 2.0)
    spectrum = np.fft.fftn(samples)
    periodic = np.real(np.fft.ifftn(-symbol * spectrum))

    offsets = h * np.arange(-(n - 1), n)
    phi = image_kernel(params, offsets, L)
    images = h ** d * signal.fftconvolve(samples, phi, mode="full")
    images = images[tuple([slice(n - 1, 2 * n - 1)] * d)]
    values = periodic - images

    ratio = _aliasing_ratio(symbol, spectrum, k_axes, np.pi / h)
    aliased = ratio > ALIASING_LIMIT
    boundary = _boundary_mass(samples)
    if aliased:
        message = f"F-grid: multiplier mass near Nyquist is {ratio:.2e} of total for {f.name} (n={n})"
        if strict:
            raise AliasingError(message)
        logger.warning(message)
    if boundary > BOUNDARY_LIMIT:
        logger.warning(f"F-grid: {f.name} is {boundary:.2e} of its peak on the box boundary (box={L:g})")

    return FourierGridResult(
        axes=axes, values=values, box=L, n=n, aliasing_ratio=ratio, aliased=aliased,
        boundary_mass=boundary,
        diagnostics={"image_correction_max": float(np.max(np.abs(images))), "spacing": h},
    )
