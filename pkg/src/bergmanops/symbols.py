"""Analytic symbols on the unit disk: polynomials, disk automorphisms,
their scalings and compositions.

A :class:`Symbol` plays two roles downstream: as the inner map psi of a
composition-type operator (where it must be a self-map of the disk) and as
the multiplier g (where it may be any analytic function).  Evaluation and
differentiation are exact per kind; Taylor truncation returns coefficients
together with a tail bound so callers can certify polynomial surrogates at a
given radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ArgumentError, ResourceError, TruncationError

__all__ = ["Symbol", "TaylorResult", "SelfMapReport", "parse_symbol"]

DEGREE_CAP = 4096

# self-map certification grid
_SELF_MAP_RADIUS = 0.999
_SELF_MAP_ANGLES = 4096
_SELF_MAP_TOL = 1e-12


@dataclass(frozen=True)
class TaylorResult:
    """Truncated Taylor coefficients plus a tail bound.

    ``tail_bound(r)`` bounds sum_{k > degree} |c_k| r^k.  It is exact for
    polynomial and Moebius kinds and a geometric-extrapolation estimate for
    compositions.
    """

    coeffs: np.ndarray
    tail_bound: Callable[[float], float]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class SelfMapReport:
    ok: bool
    sup_modulus: float
    method: str  # "exact" or "grid"


class Symbol:
    """An analytic function on the disk, closed under composition."""

    def __init__(self, kind: str, *, coeffs=None, a=None, c=None,
                 outer=None, inner=None):
        self.kind = kind
        if kind == "polynomial":
            arr = np.atleast_1d(np.asarray(coeffs, dtype=complex))
            if arr.ndim != 1 or arr.size == 0:
                raise ArgumentError("polynomial needs a flat coefficient list")
            if arr.size - 1 > DEGREE_CAP:
                raise ResourceError(f"polynomial degree beyond cap {DEGREE_CAP}")
            self.coeffs = arr
        elif kind in ("moebius", "scaled_moebius"):
            a = complex(a)
            if abs(a) >= 1.0:
                raise ArgumentError(f"moebius parameter must satisfy |a| < 1, got {a}")
            self.a = a
            self.c = complex(c) if kind == "scaled_moebius" else 1.0 + 0.0j
        elif kind == "composition":
            if not isinstance(outer, Symbol) or not isinstance(inner, Symbol):
                raise ArgumentError("composition needs two Symbol operands")
            self.outer = outer
            self.inner = inner
        else:
            raise ArgumentError(f"unknown symbol kind {kind!r}")
        self._taylor_cache: dict[int, TaylorResult] = {}

    # -- constructors --------------------------------------------------------

    @classmethod
    def polynomial(cls, coeffs) -> "Symbol":
        return cls("polynomial", coeffs=coeffs)

    @classmethod
    def identity(cls) -> "Symbol":
        return cls.polynomial([0.0, 1.0])

    @classmethod
    def constant(cls, value) -> "Symbol":
        return cls.polynomial([value])

    @classmethod
    def moebius(cls, a) -> "Symbol":
        """z -> (z - a) / (1 - conj(a) z)."""
        return cls("moebius", a=a)

    @classmethod
    def scaled_moebius(cls, c, a) -> "Symbol":
        """z -> c * (z - a) / (1 - conj(a) z); a = 0 gives the dilation c*z."""
        return cls("scaled_moebius", a=a, c=c)

    @classmethod
    def compose(cls, outer: "Symbol", inner: "Symbol") -> "Symbol":
        return cls("composition", outer=outer, inner=inner)

    # -- evaluation ----------------------------------------------------------

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "polynomial":
            out = npoly.polyval(z, self.coeffs)
        elif self.kind in ("moebius", "scaled_moebius"):
            out = self.c * (z - self.a) / (1.0 - np.conj(self.a) * z)
        else:
            out = self.outer(self.inner(z))
        out = np.asarray(out)
        return out if out.ndim else complex(out)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "polynomial":
            out = npoly.polyval(z, npoly.polyder(self.coeffs))
        elif self.kind in ("moebius", "scaled_moebius"):
            out = self.c * (1.0 - abs(self.a) ** 2) / (1.0 - np.conj(self.a) * z) ** 2
        else:
            out = self.outer.derivative(self.inner(z)) * self.inner.derivative(z)
        out = np.asarray(out)
        return out if out.ndim else complex(out)

    # -- Taylor truncation ---------------------------------------------------

    def taylor(self, degree: int) -> TaylorResult:
        if degree < 0:
            raise ArgumentError("degree must be nonnegative")
        if degree > DEGREE_CAP:
            raise ResourceError(f"requested degree {degree} beyond cap {DEGREE_CAP}")
        cached = self._taylor_cache.get(degree)
        if cached is None:
            cached = self._taylor(degree)
            self._taylor_cache[degree] = cached
        return cached

    def _taylor(self, degree: int) -> TaylorResult:
        if self.kind == "polynomial":
            full = self.coeffs
            coeffs = np.zeros(degree + 1, dtype=complex)
            keep = min(degree + 1, full.size)
            coeffs[:keep] = full[:keep]
            dropped = np.abs(full[degree + 1:])

            def tail(r: float, dropped=dropped, degree=degree) -> float:
                if dropped.size == 0:
                    return 0.0
                powers = r ** np.arange(degree + 1, degree + 1 + dropped.size)
                return float(np.sum(dropped * powers))

            return TaylorResult(coeffs, tail)

        if self.kind in ("moebius", "scaled_moebius"):
            # (z - a) sum_k (conj(a) z)^k  => c_0 = -a, c_k = conj(a)^(k-1)(1-|a|^2)
            a, c = self.a, self.c
            coeffs = np.zeros(degree + 1, dtype=complex)
            coeffs[0] = -a
            if degree >= 1:
                k = np.arange(1, degree + 1)
                coeffs[k] = np.conj(a) ** (k - 1) * (1.0 - abs(a) ** 2)
            coeffs *= c

            def tail(r: float, a=abs(a), c=abs(c), degree=degree) -> float:
                if a == 0.0 or r == 0.0:
                    return 0.0
                if a * r >= 1.0:
                    return float("inf")
                return c * (1.0 - a ** 2) * a ** degree * r ** (degree + 1) / (1.0 - a * r)

            return TaylorResult(coeffs, tail)

        # composition: compose truncations with extra headroom, estimate the
        # tail from the trailing block plus geometric extrapolation
        pad = 16
        work = min(degree + pad, DEGREE_CAP + pad)
        inner_t = self.inner.taylor(min(work, DEGREE_CAP))
        outer_t = self.outer.taylor(min(work, DEGREE_CAP))
        comp = _poly_compose(outer_t.coeffs, inner_t.coeffs, work)
        coeffs = comp[:degree + 1].copy()
        if coeffs.size < degree + 1:
            coeffs = np.pad(coeffs, (0, degree + 1 - coeffs.size))
        extra = np.abs(comp[degree + 1:])

        def tail(r: float, extra=extra, degree=degree) -> float:
            if extra.size == 0:
                return 0.0
            powers = r ** np.arange(degree + 1, degree + 1 + extra.size)
            block = float(np.sum(extra * powers))
            # extrapolate beyond the padded block from its trailing ratio
            last = extra[-1] * powers[-1]
            prev = extra[-2] * powers[-2] if extra.size > 1 else 0.0
            if last > 0.0 and prev > 0.0:
                rho = min(last / prev, 0.999)
                block += last * rho / (1.0 - rho)
            return block

        return TaylorResult(coeffs, tail)

    def truncate_to(self, r: float, tol: float = 1e-14,
                    max_degree: int = DEGREE_CAP) -> np.ndarray:
        """Smallest truncation whose tail bound at radius r is below tol."""
        degree = 8
        while True:
            t = self.taylor(min(degree, max_degree))
            if t.tail_bound(r) <= tol:
                k = t.degree
                coeffs = t.coeffs
                while k > 0 and coeffs[k] == 0.0:
                    k -= 1
                return coeffs[:k + 1]
            if degree >= max_degree:
                raise TruncationError(
                    f"tail bound not met at radius {r} within degree {max_degree}",
                    tail_bound=t.tail_bound(r))
            degree *= 2

    def derivative_symbol(self, r: float = 0.999,
                          tol: float = 1e-13) -> "Symbol":
        """The derivative as a Symbol.

        Exact coefficient shift for polynomials; the other kinds truncate
        at radius r with tail tolerance tol first, then differentiate the
        truncation exactly.
        """
        if self.kind == "polynomial":
            if self.coeffs.size == 1:
                return Symbol.polynomial([0.0])
            n = np.arange(1, self.coeffs.size)
            return Symbol.polynomial(self.coeffs[1:] * n)
        coeffs = self.truncate_to(r, tol=tol)
        return Symbol.polynomial(coeffs).derivative_symbol()

    # -- structural queries --------------------------------------------------

    def self_map_check(self) -> SelfMapReport:
        """Certify sup |s| <= 1 on the disk.

        Moebius maps and dilations with |c| <= 1 are self-maps by
        construction; compositions of certified self-maps inherit the
        property.  Everything else is checked on a boundary-adjacent circle
        (max modulus principle makes that the worst case up to the 0.999
        radius margin).
        """
        if self.kind == "moebius":
            return SelfMapReport(True, 1.0, "exact")
        if self.kind == "scaled_moebius" and abs(self.c) <= 1.0:
            return SelfMapReport(True, abs(self.c), "exact")
        if self.kind == "composition":
            inner_r = self.inner.self_map_check()
            outer_r = self.outer.self_map_check()
            if inner_r.ok and outer_r.ok and inner_r.method == outer_r.method == "exact":
                return SelfMapReport(True, min(outer_r.sup_modulus, 1.0), "exact")
        theta = np.linspace(0.0, 2.0 * np.pi, _SELF_MAP_ANGLES, endpoint=False)
        z = _SELF_MAP_RADIUS * np.exp(1j * theta)
        sup = float(np.max(np.abs(self(z))))
        return SelfMapReport(sup <= 1.0 + _SELF_MAP_TOL, sup, "grid")

    def is_constant(self, tol: float = 1e-15) -> bool:
        t = self.taylor(8)
        return bool(np.all(np.abs(t.coeffs[1:]) <= tol) and t.tail_bound(1.0 - 1e-9) <= tol)

    def sup_on_radius(self, r: float, angles: int = 1024) -> float:
        theta = np.linspace(0.0, 2.0 * np.pi, angles, endpoint=False)
        return float(np.max(np.abs(self(r * np.exp(1j * theta)))))

    # -- serialization -------------------------------------------------------

    def to_spec(self) -> str:
        if self.kind == "polynomial":
            return "poly:" + ",".join(_format_complex(c) for c in self.coeffs)
        if self.kind == "moebius":
            return "moebius:" + _format_complex(self.a)
        if self.kind == "scaled_moebius":
            if self.a == 0:
                return "scale:" + _format_complex(self.c)
            return f"smoebius:{_format_complex(self.c)};{_format_complex(self.a)}"
        # operands are parenthesized so poly coefficient commas stay nested
        return f"compose(({self.outer.to_spec()}),({self.inner.to_spec()}))"

    def __repr__(self) -> str:  # pragma: no cover
        return f"Symbol({self.to_spec()})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Symbol) and self.to_spec() == other.to_spec()

    def __hash__(self) -> int:
        return hash(self.to_spec())


def _poly_compose(outer: np.ndarray, inner: np.ndarray, degree: int) -> np.ndarray:
    """Coefficients of outer(inner(z)) truncated to the given degree."""
    result = np.zeros(1, dtype=complex)
    for c in outer[::-1]:
        result = npoly.polymul(result, inner)[:degree + 1]
        if result.size == 0:
            result = np.zeros(1, dtype=complex)
        result[0] += c
    return result


def _format_complex(value) -> str:
    value = complex(value)
    if value.imag == 0.0:
        return repr(value.real)
    if value.real == 0.0:
        return f"{value.imag!r}i"
    sign = "+" if value.imag >= 0 else "-"
    return f"{value.real!r}{sign}{abs(value.imag)!r}i"


def _parse_complex(text: str) -> complex:
    text = text.strip().replace(" ", "")
    if not text:
        raise ArgumentError("empty complex literal")
    try:
        return complex(text.replace("i", "j"))
    except ValueError as exc:
        raise ArgumentError(f"bad complex literal {text!r}") from exc


def _split_top_level(text: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return parts


def _strip_group(text: str) -> str:
    """Remove one layer of parentheses if it encloses the whole operand."""
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        depth = 0
        for i, ch in enumerate(text):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    return text[1:-1] if i == len(text) - 1 else text
    return text


def parse_symbol(text: str) -> Symbol:
    """Parse the symbol grammar used on the command line.

    ``poly:c0,c1,...`` with complex literals ``a+bi``, ``moebius:a``,
    ``scale:c``, ``smoebius:c;a`` and ``compose(outer,inner)`` with arbitrary
    nesting.  Compose operands may be parenthesized; they must be whenever the
    operand itself contains a top level comma, as a ``poly`` with several
    coefficients does.
    """
    text = text.strip()
    if text.startswith("poly:"):
        return Symbol.polynomial([_parse_complex(p) for p in text[5:].split(",")])
    if text.startswith("moebius:"):
        return Symbol.moebius(_parse_complex(text[8:]))
    if text.startswith("scale:"):
        return Symbol.scaled_moebius(_parse_complex(text[6:]), 0.0)
    if text.startswith("smoebius:"):
        c_text, _, a_text = text[9:].partition(";")
        if not a_text:
            raise ArgumentError("smoebius needs c;a")
        return Symbol.scaled_moebius(_parse_complex(c_text), _parse_complex(a_text))
    if text.startswith("compose(") and text.endswith(")"):
        parts = _split_top_level(text[8:-1])
        if len(parts) != 2:
            raise ArgumentError(f"compose needs exactly two operands: {text!r}")
        return Symbol.compose(parse_symbol(_strip_group(parts[0])),
                              parse_symbol(_strip_group(parts[1])))
    raise ArgumentError(f"unrecognized symbol spec {text!r}")
