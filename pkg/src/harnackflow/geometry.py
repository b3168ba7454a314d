"""Discretized surface metrics and their differential operators.

A geometry is a fixed background grid plus a conformal exponent ``phi``;
the live metric is ``g = e^(2*phi) * g_background``.  Two backgrounds are
supported:

* ``TorusGeometry`` -- flat square torus of side ``length`` on an NxN
  periodic grid with spacing ``h = length / n``.  Fields are (n, n) arrays
  indexed ``[i, j]`` with ``x = i*h`` (axis 0) and ``y = j*h`` (axis 1).
* ``SphereGeometry`` -- unit round sphere, rotationally symmetric fields
  of the colatitude only.  Nodes are staggered, ``theta_j = (j + 1/2)*pi/n``,
  so no node sits on a pole; smooth axisymmetric fields are even across
  both poles, which fixes the ghost values used by first derivatives.
  Fields are (n,) arrays.

Scalar fields are plain ``numpy`` arrays whose shape ties them to the
geometry; every operator validates the shape and raises
:class:`~harnackflow.errors.GridMismatchError` on mismatch.

Numerical choices, in one place:

* second-order centered differences throughout (no spectral machinery);
* the sphere Laplacian is in flux form with the pole fluxes exactly zero,
  so its integral against the area weights telescopes to zero exactly;
* quadrature weights are exact cell areas of the background scaled by
  ``e^(2*phi)``: ``h^2`` on the torus and ``4*pi*sin(theta_j)*sin(dtheta/2)``
  on the sphere (the band area written so it is exactly proportional to
  ``sin(theta_j)``, which makes discrete mass conservation exact).

All operations are pure functions of immutable inputs; geometries hold a
read-only copy of ``phi`` and never mutate it.
"""

from __future__ import annotations

import numpy as np

from .errors import GridMismatchError

# Scalar curvature of the unit round sphere.
SPHERE_BACKGROUND_CURVATURE = 2.0

# Safety factor of the explicit-step CFL rule dt <= CFL_FACTOR * h^2 * min(e^(2 phi)).
CFL_FACTOR = 0.2


def _as_field(values, shape, name="field"):
    w = np.asarray(values, dtype=float)
    if w.shape != shape:
        raise GridMismatchError(f"{name} has shape {w.shape}, expected {shape}")
    if not np.all(np.isfinite(w)):
        raise GridMismatchError(f"{name} contains non-finite entries")
    return w


class SurfaceGeometry:
    """Shared conformal-metric machinery; subclasses supply background ops."""

    kind = "abstract"

    def __init__(self, n, phi=None):
        self.n = int(n)
        if self.n < 4:
            raise GridMismatchError(f"resolution n = {n} is too coarse (need n >= 4)")
        if phi is None:
            phi = np.zeros(self.field_shape)
        phi = _as_field(phi, self.field_shape, "phi").copy()
        phi.setflags(write=False)
        self.phi = phi

    # -- background hooks -------------------------------------------------

    @property
    def field_shape(self):
        raise NotImplementedError

    @property
    def background_spacing(self):
        """Grid spacing h of the background (torus: L/n, sphere: pi/n)."""
        raise NotImplementedError

    @property
    def background_curvature(self):
        raise NotImplementedError

    def _bg_lap_raw(self, w):
        """Background Laplacian without shape validation (hot paths)."""
        raise NotImplementedError

    def background_laplacian(self, w):
        return self._bg_lap_raw(self.check_field(w))

    def background_area_weights(self):
        """Exact cell areas of the background metric."""
        raise NotImplementedError

    def _metric_diag(self):
        """Diagonal components (g_11, g_22) of the live metric per node."""
        raise NotImplementedError

    def with_phi(self, phi):
        raise NotImplementedError

    # -- conformal-metric operators ---------------------------------------

    def check_field(self, w, name="field"):
        return _as_field(w, self.field_shape, name)

    @property
    def node_count(self):
        return int(np.prod(self.field_shape))

    def conformal_factor(self):
        """e^(2*phi), the pointwise ratio of live to background metric."""
        return np.exp(2.0 * self.phi)

    def scalar_curvature(self):
        """Scalar curvature of the live metric, R = e^(-2 phi) (R_bg - 2 lap_bg phi)."""
        return np.exp(-2.0 * self.phi) * (
            self.background_curvature - 2.0 * self._bg_lap_raw(self.phi)
        )

    def laplace_beltrami(self, w):
        """Laplace-Beltrami of the live metric: e^(-2 phi) * background Laplacian."""
        w = self.check_field(w)
        return np.exp(-2.0 * self.phi) * self._bg_lap_raw(w)

    def grad_inner(self, w1, w2):
        """Pointwise inner product of gradients in the live metric."""
        raise NotImplementedError

    def grad_norm_sq(self, w):
        """|grad w|^2 in the live metric; exactly grad_inner(w, w)."""
        return self.grad_inner(w, w)

    def covariant_hessian(self, w):
        """Covariant Hessian of the live metric, shape field_shape + (2, 2).

        Components are in background coordinates (torus: x, y; sphere:
        theta, azimuth).  The g-trace of the result agrees with
        :meth:`laplace_beltrami` to second order.
        """
        raise NotImplementedError

    def hessian_trace(self, w):
        """g^{ij} (hessian w)_{ij}; second-order consistent with laplace_beltrami."""
        t = self.covariant_hessian(w)
        g1, g2 = self._metric_diag()
        return t[..., 0, 0] / g1 + t[..., 1, 1] / g2

    def hessian_deviation_sq(self, w, sigma):
        """|hessian(w) - sigma * g|^2 contracted with the live metric.

        ``sigma`` may be a scalar or a field; the pure-trace subtraction is
        what every identity's Hessian-square term reduces to on surfaces,
        where the Ricci tensor is (R/2) g.
        """
        t = self.covariant_hessian(w)
        g1, g2 = self._metric_diag()
        d11 = t[..., 0, 0] - sigma * g1
        d22 = t[..., 1, 1] - sigma * g2
        d12 = t[..., 0, 1]
        return (d11 / g1) ** 2 + 2.0 * d12**2 / (g1 * g2) + (d22 / g2) ** 2

    def area_weights(self):
        """Quadrature weights of the live area measure, dmu = e^(2 phi) dmu_bg."""
        return self.conformal_factor() * self.background_area_weights()

    def integrate(self, w):
        """Integral of a scalar field against the live area measure."""
        w = self.check_field(w)
        return float(np.sum(w * self.area_weights()))

    def total_area(self):
        return float(np.sum(self.area_weights()))

    def cfl_bound(self):
        """Largest explicit step the scheme accepts: 0.2 * h^2 * min(e^(2 phi))."""
        h = self.background_spacing
        return CFL_FACTOR * h * h * float(np.exp(2.0 * np.min(self.phi)))


class TorusGeometry(SurfaceGeometry):
    """Flat square torus background, fully periodic NxN grid."""

    kind = "torus"

    def __init__(self, n, length, phi=None):
        self.length = float(length)
        if not self.length > 0:
            raise GridMismatchError("torus side length must be positive")
        super().__init__(n, phi)
        self.h = self.length / self.n

    @property
    def field_shape(self):
        return (self.n, self.n)

    @property
    def background_spacing(self):
        return self.length / self.n

    @property
    def background_curvature(self):
        return 0.0

    def with_phi(self, phi):
        return TorusGeometry(self.n, self.length, phi)

    def coords(self):
        """Node coordinate arrays (x, y), broadcastable to the field shape."""
        ax = np.arange(self.n) * self.h
        return ax[:, None], ax[None, :]

    def _dx(self, w):
        return (np.roll(w, -1, axis=0) - np.roll(w, 1, axis=0)) / (2.0 * self.h)

    def _dy(self, w):
        return (np.roll(w, -1, axis=1) - np.roll(w, 1, axis=1)) / (2.0 * self.h)

    def _bg_lap_raw(self, w):
        return (
            np.roll(w, -1, axis=0)
            + np.roll(w, 1, axis=0)
            + np.roll(w, -1, axis=1)
            + np.roll(w, 1, axis=1)
            - 4.0 * w
        ) / (self.h * self.h)

    def background_area_weights(self):
        return np.full(self.field_shape, self.h * self.h)

    def _metric_diag(self):
        e2p = self.conformal_factor()
        return e2p, e2p

    def grad_inner(self, w1, w2):
        w1 = self.check_field(w1, "w1")
        w2 = self.check_field(w2, "w2")
        inner = self._dx(w1) * self._dx(w2) + self._dy(w1) * self._dy(w2)
        return np.exp(-2.0 * self.phi) * inner

    def covariant_hessian(self, w):
        w = self.check_field(w)
        h2 = self.h * self.h
        wxx = (np.roll(w, -1, axis=0) - 2.0 * w + np.roll(w, 1, axis=0)) / h2
        wyy = (np.roll(w, -1, axis=1) - 2.0 * w + np.roll(w, 1, axis=1)) / h2
        wxy = (
            np.roll(w, (-1, -1), axis=(0, 1))
            - np.roll(w, (-1, 1), axis=(0, 1))
            - np.roll(w, (1, -1), axis=(0, 1))
            + np.roll(w, (1, 1), axis=(0, 1))
        ) / (4.0 * h2)
        px, py = self._dx(self.phi), self._dy(self.phi)
        wx, wy = self._dx(w), self._dy(w)
        t = np.empty(self.field_shape + (2, 2))
        t[..., 0, 0] = wxx - px * wx + py * wy
        t[..., 1, 1] = wyy - py * wy + px * wx
        t[..., 0, 1] = wxy - py * wx - px * wy
        t[..., 1, 0] = t[..., 0, 1]
        return t


def _sphere_background(n):
    """Cached staggered-grid background arrays for the unit sphere."""
    bg = _SPHERE_BG_CACHE.get(n)
    if bg is None:
        dtheta = np.pi / n
        theta = (np.arange(n) + 0.5) * dtheta
        # Half-node sines for the flux form; forced to exactly zero at the
        # poles so the polar fluxes vanish identically.
        sin_half = np.sin(np.arange(n + 1) * dtheta)
        sin_half[0] = 0.0
        sin_half[n] = 0.0
        sin_theta = np.sin(theta)
        bg = {
            "dtheta": dtheta,
            "theta": theta,
            "sin_theta": sin_theta,
            "cos_theta": np.cos(theta),
            "sin_plus": sin_half[1:],
            "inv_sin_dt2": 1.0 / (sin_theta * dtheta * dtheta),
            "weights": (4.0 * np.pi * np.sin(0.5 * dtheta)) * sin_theta,
        }
        for arr in bg.values():
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)
        _SPHERE_BG_CACHE[n] = bg
    return bg


_SPHERE_BG_CACHE = {}


class SphereGeometry(SurfaceGeometry):
    """Unit round sphere background, rotationally symmetric fields of theta."""

    kind = "rot_sphere"

    def __init__(self, n, phi=None):
        super().__init__(n, phi)
        bg = _sphere_background(self.n)
        self.dtheta = bg["dtheta"]
        self.theta = bg["theta"]
        self.sin_theta = bg["sin_theta"]
        self.cos_theta = bg["cos_theta"]
        self._sin_plus = bg["sin_plus"]
        self._inv_sin_dt2 = bg["inv_sin_dt2"]
        self._weights = bg["weights"]

    @property
    def field_shape(self):
        return (self.n,)

    @property
    def background_spacing(self):
        return np.pi / self.n

    @property
    def background_curvature(self):
        return SPHERE_BACKGROUND_CURVATURE

    def with_phi(self, phi):
        return SphereGeometry(self.n, phi)

    @staticmethod
    def round_phi(radius):
        """Conformal exponent of the round sphere of the given radius."""
        return float(np.log(radius))

    def _ghost(self, w):
        """Even reflection across both poles (smooth axisymmetric fields)."""
        out = np.empty(self.n + 2)
        out[1:-1] = w
        out[0] = w[0]
        out[-1] = w[-1]
        return out

    def _dtheta_centered(self, w):
        g = self._ghost(w)
        return (g[2:] - g[:-2]) / (2.0 * self.dtheta)

    def _d2theta(self, w):
        g = self._ghost(w)
        return (g[2:] - 2.0 * g[1:-1] + g[:-2]) / (self.dtheta * self.dtheta)

    def _bg_lap_raw(self, w):
        dw = np.diff(w)  # w_{j+1} - w_j, length n-1
        flux = np.empty(self.n + 1)
        flux[1:-1] = self._sin_plus[:-1] * dw
        flux[0] = 0.0  # exact polar fluxes
        flux[-1] = 0.0
        return (flux[1:] - flux[:-1]) * self._inv_sin_dt2

    def background_area_weights(self):
        # Band area 2*pi*(cos(theta-) - cos(theta+)) written as an exact
        # multiple of sin(theta_j); summing sin over staggered nodes gives
        # total area 4*pi to round-off.
        return self._weights

    def _metric_diag(self):
        e2p = self.conformal_factor()
        return e2p, e2p * self.sin_theta**2

    def grad_inner(self, w1, w2):
        w1 = self.check_field(w1, "w1")
        w2 = self.check_field(w2, "w2")
        # product of derivatives first: keeps the operation exactly symmetric
        return (self._dtheta_centered(w1) * self._dtheta_centered(w2)) * np.exp(-2.0 * self.phi)

    def covariant_hessian(self, w):
        w = self.check_field(w)
        dphi = self._dtheta_centered(self.phi)
        dw = self._dtheta_centered(w)
        t = np.zeros(self.field_shape + (2, 2))
        t[:, 0, 0] = self._d2theta(w) - dphi * dw
        t[:, 1, 1] = (self.sin_theta * self.cos_theta + self.sin_theta**2 * dphi) * dw
        return t
