"""Radial weights omega = exp(-2*phi) and their derived geometry.

The exponential family phi(r) = (b/2) * (1 - r^2)^(-alpha) is the prototype of
a weight decreasing faster than any standard-weight power of (1 - r).  All
downstream geometry is driven by the radial Laplacian

    laplacian_phi(r) = phi''(r) + phi'(r) / r

and the induced radius function tau(r) = laplacian_phi(r)^(-1/2), which sets
the scale of the distinguished disks D_delta(a) of radius delta * tau(a).

Everything that can underflow in linear arithmetic (omega itself, its
integrals) is handled in the log domain; ``r_max_guard`` marks the radius
where 2*phi reaches 600, beyond which linear-domain evaluation of omega is
refused.

Units: all radii are Euclidean in the unit disk, area measure is normalized
so the full disk has measure 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import AccuracyError, ArgumentError, DomainError, RangeError

__all__ = [
    "WeightValues",
    "WeightSpec",
    "WeightReport",
    "BandReport",
    "weight_eval",
    "distortion",
    "jcn_check",
]

# 2*phi(r) = LOG_GUARD defines r_max_guard; exp(-600) is still representable
# but leaves headroom for kernel magnitudes exp(+2*phi) in doubles.
LOG_GUARD = 600.0

# Tail fraction below which the truncated distortion integral of a custom
# table is accepted without warning.
_DISTORTION_TAIL_TOL = 1e-12


@dataclass(frozen=True)
class WeightValues:
    """Pointwise weight data at a single radius."""

    phi: float
    phi_prime: float
    laplacian_phi: float
    tau: float
    log_omega: float


@dataclass(frozen=True)
class BandReport:
    """Min/max summary of a positive quantity sampled along radii."""

    radii: np.ndarray
    values: np.ndarray
    low: float
    high: float

    @property
    def ratio(self) -> float:
        if self.low <= 0.0:
            return math.inf
        return self.high / self.low


@dataclass(frozen=True)
class WeightReport:
    """Outcome of the structural checks on a weight."""

    family: str
    c1: float
    c2: float
    m_tau: float
    r_max_guard: float
    tau_decreasing_tail: bool
    laplacian_positive: bool
    class_w_tail_confirmed: bool
    warnings: tuple[str, ...]


class WeightSpec:
    """A radial weight, either the exponential prototype or a tabulated phi.

    Instances are cheap value objects; derived constants (class constants
    c1, c2, the lattice scale m_tau) are computed once and cached.
    """

    def __init__(self, family: str, b: float | None = None,
                 alpha: float | None = None,
                 table: tuple[np.ndarray, np.ndarray] | None = None):
        if family == "exponential":
            if b is None or alpha is None or b <= 0 or alpha <= 0:
                raise ArgumentError("exponential family needs b > 0, alpha > 0")
            self.b = float(b)
            self.alpha = float(alpha)
            self._spline = None
            self._table_max = 1.0
        elif family == "custom":
            if table is None:
                raise ArgumentError("custom family needs a (r, phi) table")
            r, phi = (np.asarray(a, dtype=float) for a in table)
            if r.ndim != 1 or r.shape != phi.shape or r.size < 4:
                raise ArgumentError("weight table needs >= 4 aligned rows")
            if r[0] != 0.0 or np.any(np.diff(r) <= 0):
                raise ArgumentError("table radii must start at 0 and increase")
            self._spline = CubicSpline(r, phi)
            self._dspline = self._spline.derivative()
            self._d2spline = self._spline.derivative(2)
            self._table_max = float(r[-1])
            self.b = None
            self.alpha = None
        else:
            raise ArgumentError(f"unknown weight family {family!r}")
        self.family = family
        self._cache: dict[str, object] = {}

    # -- construction helpers ------------------------------------------------

    @classmethod
    def exponential(cls, b: float, alpha: float) -> "WeightSpec":
        return cls("exponential", b=b, alpha=alpha)

    @classmethod
    def from_table(cls, r: Iterable[float], phi: Iterable[float]) -> "WeightSpec":
        return cls("custom", table=(np.asarray(r, float), np.asarray(phi, float)))

    @classmethod
    def parse(cls, text: str) -> "WeightSpec":
        """Parse ``exp:b=<float>,alpha=<float>`` or ``table:<path>``."""
        if text.startswith("exp:"):
            params: dict[str, float] = {}
            for item in text[4:].split(","):
                key, _, val = item.partition("=")
                try:
                    params[key.strip()] = float(val)
                except ValueError as exc:
                    raise ArgumentError(f"bad weight parameter {item!r}") from exc
            if set(params) != {"b", "alpha"}:
                raise ArgumentError(f"weight grammar needs b and alpha, got {text!r}")
            return cls.exponential(params["b"], params["alpha"])
        if text.startswith("table:"):
            path = text[6:]
            data = np.loadtxt(path, comments="#")
            if data.ndim != 2 or data.shape[1] != 2:
                raise ArgumentError(f"weight table {path!r} must have two columns")
            return cls.from_table(data[:, 0], data[:, 1])
        raise ArgumentError(f"unrecognized weight spec {text!r}")

    def spec_string(self) -> str:
        if self.family == "exponential":
            return f"exp:b={self.b!r},alpha={self.alpha!r}"
        return f"custom:max_r={self._table_max!r},knots={len(self._spline.x)}"

    def __repr__(self) -> str:  # pragma: no cover
        return f"WeightSpec({self.spec_string()})"

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightSpec) and self.spec_string() == other.spec_string()

    def __hash__(self) -> int:
        return hash(self.spec_string())

    # -- pointwise quantities (vectorized, no domain checks) -----------------

    def _check_range(self, r: np.ndarray) -> None:
        if self.family == "custom" and np.any(r > self._table_max):
            raise RangeError(
                f"radius beyond tabulated range [0, {self._table_max}]")

    def phi(self, r):
        r = np.asarray(r, dtype=float)
        if self.family == "exponential":
            return 0.5 * self.b * (1.0 - r * r) ** (-self.alpha)
        self._check_range(r)
        return self._spline(r)

    def phi_prime(self, r):
        r = np.asarray(r, dtype=float)
        if self.family == "exponential":
            return self.b * self.alpha * r * (1.0 - r * r) ** (-self.alpha - 1.0)
        self._check_range(r)
        return self._dspline(r)

    def phi_second(self, r):
        r = np.asarray(r, dtype=float)
        if self.family == "exponential":
            b, a = self.b, self.alpha
            u = 1.0 - r * r
            return b * a * u ** (-a - 1.0) + 2.0 * b * a * (a + 1.0) * r * r * u ** (-a - 2.0)
        self._check_range(r)
        return self._d2spline(r)

    def laplacian(self, r):
        """phi'' + phi'/r, continuous through r = 0 (limit 2*phi''(0))."""
        r = np.asarray(r, dtype=float)
        if self.family == "exponential":
            b, a = self.b, self.alpha
            u = 1.0 - r * r
            return 2.0 * b * a * u ** (-a - 2.0) * (1.0 + a * r * r)
        self._check_range(r)
        out = np.empty_like(r, dtype=float)
        small = r < 1e-7
        out[~small] = self._d2spline(r[~small]) + self._dspline(r[~small]) / r[~small]
        out[small] = 2.0 * self._d2spline(r[small])
        return out if out.ndim else float(out)

    def laplacian_prime(self, r):
        r = np.asarray(r, dtype=float)
        if self.family == "exponential":
            b, a = self.b, self.alpha
            u = 1.0 - r * r
            return 4.0 * b * a * r * u ** (-a - 3.0) * ((a + 2.0) * (1.0 + a * r * r) + a * u)
        # central difference; adequate for the Lipschitz constant scan
        h = 1e-6
        lo = np.maximum(r - h, 0.0)
        hi = np.minimum(r + h, self._table_max)
        return (self.laplacian(hi) - self.laplacian(lo)) / (hi - lo)

    def tau(self, r):
        lap = np.asarray(self.laplacian(r), dtype=float)
        with np.errstate(divide="ignore"):
            return lap ** (-0.5)

    def tau_prime(self, r):
        lap = np.asarray(self.laplacian(r), dtype=float)
        with np.errstate(divide="ignore"):
            return -0.5 * lap ** (-1.5) * np.asarray(self.laplacian_prime(r), float)

    def log_omega(self, r):
        return -2.0 * self.phi(r)

    def log1p_phi_prime(self, r):
        return np.log1p(self.phi_prime(r))

    # -- scalar entry point with domain checks -------------------------------

    def eval(self, r: float) -> WeightValues:
        r = float(r)
        if not 0.0 <= r < 1.0:
            raise DomainError(f"radius {r} outside [0, 1)")
        if self.family == "custom" and r > self._table_max:
            raise RangeError(f"radius {r} beyond tabulated range")
        phi = float(self.phi(r))
        if 2.0 * phi > LOG_GUARD + 1e-9:
            raise DomainError(
                f"radius {r} beyond r_max_guard {self.r_max_guard:.6f} "
                "(2*phi > 600); use log-domain routines")
        return WeightValues(
            phi=phi,
            phi_prime=float(self.phi_prime(r)),
            laplacian_phi=float(self.laplacian(r)),
            tau=float(self.tau(r)),
            log_omega=-2.0 * phi,
        )

    # -- derived constants ---------------------------------------------------

    @property
    def r_table_max(self) -> float:
        """Largest radius where phi is defined (1 for the exponential family)."""
        return self._table_max

    def phi_level_radius(self, level: float) -> float:
        """Largest radius with phi <= level, clipped to the tabulated range."""
        r_hi = self._table_max if self.family == "custom" else 1.0 - 1e-12
        if float(self.phi(r_hi)) <= level:
            return r_hi
        lo, hi = 0.0, r_hi
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if float(self.phi(mid)) > level:
                hi = mid
            else:
                lo = mid
        return lo

    @property
    def r_max_guard(self) -> float:
        """Radius where 2*phi = 600; linear-domain omega stops there."""
        cached = self._cache.get("r_max_guard")
        if cached is None:
            if self.family == "exponential":
                u = (self.b / LOG_GUARD) ** (1.0 / self.alpha)
                cached = math.sqrt(max(1.0 - u, 0.0))
            else:
                r_hi = self._table_max
                if 2.0 * float(self.phi(r_hi)) <= LOG_GUARD:
                    cached = r_hi
                else:
                    lo, hi = 0.0, r_hi
                    for _ in range(80):
                        mid = 0.5 * (lo + hi)
                        if 2.0 * float(self.phi(mid)) > LOG_GUARD:
                            hi = mid
                        else:
                            lo = mid
                    cached = lo
            self._cache["r_max_guard"] = cached
        return cached

    def _scan_grid(self) -> np.ndarray:
        r_hi = min(self.r_max_guard, 0.9995, self._table_max)
        return np.linspace(0.0, r_hi, 4001)

    def class_constants(self) -> tuple[float, float]:
        """(c1, c2): tau <= c1 (1 - r) and Lipschitz bound |tau'| <= c2."""
        cached = self._cache.get("class_constants")
        if cached is None:
            r = self._scan_grid()
            tau = self.tau(r)
            c1 = float(np.max(tau / (1.0 - r)))
            c2 = float(np.max(np.abs(self.tau_prime(r))))
            cached = (c1, c2)
            self._cache["class_constants"] = cached
        return cached

    def m_tau(self) -> float:
        """min(1, 1/c1, 1/c2)/4, the admissible-radius bound for D_delta."""
        c1, c2 = self.class_constants()
        return min(1.0, 1.0 / c1, 1.0 / c2) / 4.0

    def validate(self) -> WeightReport:
        """Structural checks; returns a report and never raises.

        The covering/estimation machinery needs tau Lipschitz and
        tau(r) <= c1 (1 - r); those constants are always reported.  The
        faster-than-standard decay condition is checked through the surrogate
        tau'(r) * log(1/tau(r)) -> 0 along the tail and is warn-only: a
        failing check flags the weight but does not reject it.
        """
        warnings: list[str] = []
        r = self._scan_grid()
        lap = np.asarray(self.laplacian(r), float)
        lap_ok = bool(np.all(lap > 0.0))
        if not lap_ok:
            warnings.append("laplacian of phi is not positive everywhere; "
                            "tau is undefined there")
        tau = self.tau(r)
        tail = r > 0.5 * r[-1]
        tau_decreasing = bool(np.all(np.diff(tau[tail]) <= 1e-12))
        if not tau_decreasing:
            warnings.append("tau is not decreasing on the outer half scan")
        c1, c2 = self.class_constants()
        # Tail condition, first form: tau(r) (1-r)^(-C) increasing near 1 for
        # some finite C, equivalently q(r) = -(1-r) tau'(r)/tau(r) bounded.
        with np.errstate(invalid="ignore", divide="ignore"):
            q = -(1.0 - r[tail]) * self.tau_prime(r[tail]) / tau[tail]
        q = q[np.isfinite(q)]
        confirmed = bool(q.size and np.max(q) < 50.0
                         and q[-1] <= 2.0 * np.median(q) + 1.0)
        if not confirmed:
            # second form: tau'(r) log(1/tau(r)) -> 0, judged by trend
            tail_vals = np.abs(self.tau_prime(r[tail])
                               * np.log(1.0 / np.maximum(tau[tail], 1e-300)))
            n4 = tail_vals.size // 4
            confirmed = bool(n4 > 2 and tail_vals[-1] < 0.8 * np.max(tail_vals[:n4])
                             and tail_vals[-1] < 0.5)
        if not confirmed:
            warnings.append("tail condition tau' log(1/tau) -> 0 not confirmed "
                            "on the scan grid")
        return WeightReport(
            family=self.family,
            c1=c1,
            c2=c2,
            m_tau=self.m_tau(),
            r_max_guard=self.r_max_guard,
            tau_decreasing_tail=tau_decreasing,
            laplacian_positive=lap_ok,
            class_w_tail_confirmed=confirmed,
            warnings=tuple(warnings),
        )

    # -- distortion ----------------------------------------------------------

    def distortion(self, r: float, rel_tol: float = 1e-10) -> float:
        """psi_omega(r) = (1/omega(r)) * integral_r^1 omega(u) du.

        Computed as integral of exp(2 phi(r) - 2 phi(u)), so the shifted
        integrand is <= 1 and the result never underflows for r < 1.  The
        variable is rescaled by the local decay rate 2 phi'(r) + 1 so the
        adaptive rule sees an O(1)-width profile even when the true decay
        scale is tiny.
        """
        r = float(r)
        if not 0.0 <= r < 1.0:
            raise DomainError(f"radius {r} outside [0, 1)")
        upper = min(1.0, self._table_max)
        if r >= upper:
            raise RangeError(f"radius {r} at or beyond integrable range")
        phi_r = float(self.phi(r))
        rate = 2.0 * float(self.phi_prime(r)) + 1.0
        span = rate * (upper - r)
        s_max = min(span, 80.0)

        def shifted(s: float) -> float:
            u = r + s / rate
            return math.exp(min(2.0 * phi_r - 2.0 * float(self.phi(u)), 0.0))

        val, err = integrate.quad(shifted, 0.0, s_max, epsabs=1e-14,
                                  epsrel=rel_tol, limit=400)
        if val > 0.0 and err / val > 10.0 * rel_tol:
            raise AccuracyError("distortion quadrature did not converge",
                                achieved=err / val, target=rel_tol)
        if s_max < span:
            # exponential-decay tail beyond the truncation point
            tail = shifted(s_max)  # <= e^-80 when phi is increasing
            if val > 0.0 and tail / val > _DISTORTION_TAIL_TOL:
                raise AccuracyError(
                    "distortion tail beyond table range is not negligible",
                    achieved=tail / val, target=_DISTORTION_TAIL_TOL)
        return val / rate

    def distortion_product(self, r: float) -> float:
        """psi_omega(r) * (1 + phi'(r)); flat in r for admissible weights."""
        return self.distortion(r) * (1.0 + float(self.phi_prime(r)))

    def distortion_band(self, radii: Iterable[float]) -> BandReport:
        radii = np.asarray(list(radii), dtype=float)
        vals = np.array([self.distortion_product(r) for r in radii])
        return BandReport(radii=radii, values=vals,
                          low=float(vals.min()), high=float(vals.max()))

    def jcn_check(self, t: float, radii: Iterable[float]) -> BandReport:
        """Band of laplacian_phi(r) * (1-r)^t * psi_omega(r).

        A flat band means the Laplacian is comparable to
        ((1-r)^t psi_omega)^(-1); a band whose ratio grows without bound as
        the grid approaches the boundary flags the weight as non-conforming
        for that exponent t.
        """
        radii = np.asarray(list(radii), dtype=float)
        vals = np.array([
            float(self.laplacian(r)) * (1.0 - r) ** t * self.distortion(r)
            for r in radii
        ])
        return BandReport(radii=radii, values=vals,
                          low=float(vals.min()), high=float(vals.max()))


# -- module-level operation aliases -----------------------------------------

def weight_eval(w: WeightSpec, r: float) -> WeightValues:
    return w.eval(r)


def distortion(w: WeightSpec, r: float, rel_tol: float = 1e-10) -> float:
    return w.distortion(r, rel_tol=rel_tol)


def jcn_check(w: WeightSpec, t: float, radii: Iterable[float]) -> BandReport:
    return w.jcn_check(t, radii)
