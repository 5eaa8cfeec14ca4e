"""Elliptic building blocks on a torus with modulus in the upper half plane.

The core object is an odd entire function given by a rapidly convergent
series over half-integer frequencies; it vanishes exactly on the period
lattice.  From it we build a two-variable kernel, doubly quasi-periodic
with a simple pole of residue one along each variable's lattice, together
with tables of mixed derivatives in both variables and an independent
route to the modular-parameter derivative.  Hyperbolic and rational
degenerations of the kernel are provided in closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

__all__ = [
    "EllipticContext",
    "PoleProximityError",
    "SeriesTruncationError",
    "theta",
    "theta_stack",
    "lattice_coords",
    "lattice_reduce",
    "lattice_distance",
    "phi",
    "phi_derivs",
    "phi_tau_derivs",
    "phi_dtau",
    "phi_trig",
    "phi_rat",
]

_TWO_PI_I = 2j * math.pi


class PoleProximityError(ValueError):
    """Requested evaluation point is too close to a pole or zero divisor."""


class SeriesTruncationError(RuntimeError):
    """Series failed to reach the requested tolerance within the term budget."""


@dataclass(frozen=True)
class EllipticContext:
    """Modulus plus numerical policy shared by every evaluation.

    tol is the relative series tolerance (relative to the largest term
    encountered, which is also the honest floating-point noise floor),
    pole_radius the minimal allowed lattice distance for kernel arguments,
    k_max the hard cap on frequency pairs summed.
    """

    tau: complex
    tol: float = 1e-14
    pole_radius: float = 1e-3
    k_max: int = 200

    def __post_init__(self) -> None:
        tau = complex(self.tau)
        object.__setattr__(self, "tau", tau)
        if not tau.imag > 0:
            raise ValueError("modulus must lie in the upper half plane")
        if not 0 < self.tol < 1e-2:
            raise ValueError("tol must be a small positive number")
        if not self.pole_radius > 0:
            raise ValueError("pole_radius must be positive")
        if self.k_max < 8:
            raise ValueError("k_max too small for any meaningful sum")


def theta_stack(
    z: complex,
    ctx: EllipticContext,
    max_dz: int = 0,
    dtau: int = 0,
) -> np.ndarray:
    """Argument-derivative stack [f, f', ..., f^(max_dz)] at z.

    With dtau > 0 every entry additionally carries that many derivatives in
    the modulus.  All orders share one exponential per frequency.  Terms are
    summed in symmetric pairs of increasing frequency; the sum stops after
    the pair magnitudes stay below tol relative to the running peak (which
    never drops below one) for two consecutive pairs, and only once the
    frequency has passed the turnaround |Im z| / Im tau where terms start
    to decay.
    """
    if max_dz < 0 or dtau < 0:
        raise ValueError("derivative orders must be non-negative")
    z = complex(z)
    tau = ctx.tau
    totals = np.zeros(max_dz + 1, dtype=np.complex128)
    peaks = np.ones(max_dz + 1)
    turn = abs(z.imag) / tau.imag
    quiet = 0
    p = 0
    while True:
        n = p + 0.5
        pair_rel = 0.0
        for sgn in (1.0, -1.0):
            f = sgn * n
            base = cmath.exp(1j * math.pi * (tau * f * f + 2.0 * (z + 0.5) * f))
            if dtau:
                base *= (1j * math.pi * f * f) ** dtau
            fac = 1.0 + 0j
            for d in range(max_dz + 1):
                term = base * fac
                totals[d] += term
                mag = abs(term)
                if mag > peaks[d]:
                    peaks[d] = mag
                rel = mag / peaks[d]
                if rel > pair_rel:
                    pair_rel = rel
                fac *= _TWO_PI_I * f
        if p >= turn and pair_rel <= ctx.tol:
            quiet += 1
            if quiet >= 2:
                return totals
        else:
            quiet = 0
        p += 1
        if p >= ctx.k_max:
            raise SeriesTruncationError(
                f"series not converged after {ctx.k_max} frequency pairs "
                f"(z={z}, tau={tau}); raise k_max or move the point"
            )


def theta(z: complex, ctx: EllipticContext, dz: int = 0, dtau: int = 0) -> complex:
    """Odd lattice function (or a z/modulus derivative of it) at z."""
    if not 0 <= dz <= 5:
        raise ValueError("argument-derivative order limited to 5")
    if dtau not in (0, 1):
        raise ValueError("modulus-derivative order limited to 1")
    return complex(theta_stack(z, ctx, dz, dtau)[dz])


@lru_cache(maxsize=64)
def _origin_data(ctx: EllipticContext) -> tuple[complex, complex]:
    """(first z-derivative at 0, its modulus derivative), cached per context."""
    return theta(0.0, ctx, dz=1), theta(0.0, ctx, dz=1, dtau=1)


# -- lattice geometry -------------------------------------------------------


def lattice_coords(w: complex, tau: complex) -> tuple[float, float]:
    """Real coordinates (x, y) with w = x + y*tau."""
    w = complex(w)
    y = w.imag / tau.imag
    x = w.real - y * tau.real
    return x, y


def lattice_reduce(w: complex, tau: complex) -> tuple[complex, int, int]:
    """Translate w into the centered fundamental cell.

    Returns (w_reduced, m, n) with w = w_reduced + m + n*tau and the
    reduced coordinates in [-1/2, 1/2] up to rounding ties.
    """
    x, y = lattice_coords(w, tau)
    m = round(x)
    n = round(y)
    return complex(w) - m - n * tau, m, n


def lattice_distance(w: complex, tau: complex) -> float:
    """Euclidean distance from w to the nearest point of Z + Z*tau."""
    w_red, _, _ = lattice_reduce(w, tau)
    best = abs(w_red)
    for corner in (1.0, tau, 1.0 + tau, 1.0 - tau):
        d = abs(w_red - corner)
        if d < best:
            best = d
        d = abs(w_red + corner)
        if d < best:
            best = d
    return best


def _require_regular(w: complex, ctx: EllipticContext, label: str) -> None:
    d = lattice_distance(w, ctx.tau)
    if d < ctx.pole_radius:
        raise PoleProximityError(
            f"{label}={complex(w)} is {d:.3e} away from the lattice "
            f"(minimum allowed {ctx.pole_radius:.3e})"
        )


# -- kernel and derivative tables -------------------------------------------


def _reciprocal_derivs(f: np.ndarray) -> np.ndarray:
    """Derivatives of 1/f from derivatives of f (Leibniz recursion)."""
    n = len(f)
    r = np.zeros(n, dtype=np.complex128)
    r[0] = 1.0 / f[0]
    for m in range(1, n):
        acc = 0j
        for k in range(1, m + 1):
            acc += comb(m, k) * f[k] * r[m - k]
        r[m] = -r[0] * acc
    return r


def _inner_table(hbar: complex, z: complex, ctx: EllipticContext, max_j: int, max_k: int) -> np.ndarray:
    """Mixed derivative table of the kernel with no lattice reduction."""
    top = max_j + max_k
    a = theta_stack(hbar + z, ctx, top)
    u = _reciprocal_derivs(theta_stack(hbar, ctx, max_j))
    v = _reciprocal_derivs(theta_stack(z, ctx, max_k))
    prime0, _ = _origin_data(ctx)
    out = np.zeros((max_j + 1, max_k + 1), dtype=np.complex128)
    for j in range(max_j + 1):
        for k in range(max_k + 1):
            acc = 0j
            for p in range(j + 1):
                cjp = comb(j, p)
                for q in range(k + 1):
                    acc += cjp * comb(k, q) * a[p + q] * u[j - p] * v[k - q]
            out[j, k] = prime0 * acc
    return out


def phi_derivs(
    hbar: complex,
    z: complex,
    ctx: EllipticContext,
    max_j: int = 0,
    max_k: int = 0,
    reduce: bool = True,
) -> np.ndarray:
    """Table [j, k] of j-th parameter and k-th argument derivatives.

    With reduce=True both arguments are translated into the fundamental
    cell first and the exact quasi-periodicity multipliers (including the
    cross terms they generate under differentiation) are restored, so the
    table is valid for arbitrary arguments.  reduce=False sums the series
    at the given points directly, which is what independence checks of the
    quasi-periodicity itself must use.
    """
    hbar = complex(hbar)
    z = complex(z)
    _require_regular(hbar, ctx, "hbar")
    _require_regular(z, ctx, "z")
    _require_regular(hbar + z, ctx, "hbar+z")
    if not reduce:
        return _inner_table(hbar, z, ctx, max_j, max_k)

    z_red, _, n_z = lattice_reduce(z, ctx.tau)
    h_red, _, n_h = lattice_reduce(hbar, ctx.tau)
    inner = _inner_table(h_red, z_red, ctx, max_j, max_k)
    if n_z == 0 and n_h == 0:
        return inner
    # shift in z contributes a multiplier exponential in the parameter and
    # vice versa; differentiation therefore mixes orders downward
    envelope = cmath.exp(-_TWO_PI_I * (n_z * hbar + n_h * z_red))
    c_z = -_TWO_PI_I * n_z
    c_h = -_TWO_PI_I * n_h
    out = np.zeros((max_j + 1, max_k + 1), dtype=np.complex128)
    for j in range(max_j + 1):
        for k in range(max_k + 1):
            acc = 0j
            for i in range(j + 1):
                w_ji = comb(j, i) * c_z ** (j - i)
                for l in range(k + 1):
                    acc += w_ji * comb(k, l) * c_h ** (k - l) * inner[i, l]
            out[j, k] = envelope * acc
    return out


def phi(
    hbar: complex,
    z: complex,
    ctx: EllipticContext,
    j: int = 0,
    k: int = 0,
    reduce: bool = True,
) -> complex:
    """j-th parameter and k-th argument derivative of the kernel.

    The kernel itself (j = k = 0) has simple poles on both argument
    lattices with residue one in z, is symmetric in (hbar, z) and odd
    under joint sign flip.
    """
    if j < 0 or k < 0 or j + k > 4:
        raise ValueError("derivative orders must satisfy j + k <= 4")
    return complex(phi_derivs(hbar, z, ctx, j, k, reduce=reduce)[j, k])


def _derivs_of_square(f: np.ndarray) -> np.ndarray:
    """Derivatives of f^2 from derivatives of f."""
    n = len(f)
    out = np.zeros(n, dtype=np.complex128)
    for s in range(n):
        out[s] = sum(comb(s, i) * f[i] * f[s - i] for i in range(s + 1))
    return out


def _reciprocal_dot(f_dot: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Modulus-derivative stack of 1/f from those of f and of 1/f itself."""
    n = len(r)
    r2 = _derivs_of_square(r)
    out = np.zeros(n, dtype=np.complex128)
    for p in range(n):
        out[p] = -sum(comb(p, s) * f_dot[s] * r2[p - s] for s in range(p + 1))
    return out


def phi_tau_derivs(
    hbar: complex,
    z: complex,
    ctx: EllipticContext,
    max_j: int = 1,
    max_k: int = 0,
) -> np.ndarray:
    """Modulus derivative of the kernel's mixed-derivative table, directly.

    Entry [j, k] is the modulus derivative of the (j, k) mixed derivative,
    obtained by differentiating the defining ratio of lattice functions
    term by term in the modulus.  No lattice reduction and no use of the
    flow identity, so comparisons against tables produced by phi_derivs
    are genuine two-route checks.
    """
    hbar = complex(hbar)
    z = complex(z)
    _require_regular(hbar, ctx, "hbar")
    _require_regular(z, ctx, "z")
    _require_regular(hbar + z, ctx, "hbar+z")
    top = max_j + max_k
    a = theta_stack(hbar + z, ctx, top)
    a_dot = theta_stack(hbar + z, ctx, top, dtau=1)
    u = _reciprocal_derivs(theta_stack(hbar, ctx, max_j))
    u_dot = _reciprocal_dot(theta_stack(hbar, ctx, max_j, dtau=1), u)
    v = _reciprocal_derivs(theta_stack(z, ctx, max_k))
    v_dot = _reciprocal_dot(theta_stack(z, ctx, max_k, dtau=1), v)
    prime0, prime0_dot = _origin_data(ctx)
    out = np.zeros((max_j + 1, max_k + 1), dtype=np.complex128)
    for j in range(max_j + 1):
        for k in range(max_k + 1):
            inner = 0j
            dot = 0j
            for p in range(j + 1):
                cjp = comb(j, p)
                for q in range(k + 1):
                    c = cjp * comb(k, q)
                    inner += c * a[p + q] * u[j - p] * v[k - q]
                    dot += c * (
                        a_dot[p + q] * u[j - p] * v[k - q]
                        + a[p + q] * u_dot[j - p] * v[k - q]
                        + a[p + q] * u[j - p] * v_dot[k - q]
                    )
            out[j, k] = prime0_dot * inner + prime0 * dot
    return out


def phi_dtau(hbar: complex, z: complex, ctx: EllipticContext, j: int = 0) -> complex:
    """Modulus derivative of the j-th parameter derivative via the mixed route.

    Uses the flow identity that trades one modulus derivative for one
    parameter and one argument derivative over two pi i.  The direct route
    (phi_tau_derivs) exists precisely so this identity stays testable.
    """
    if j not in (0, 1):
        raise ValueError("parameter-derivative order limited to 1 here")
    table = phi_derivs(hbar, z, ctx, j + 1, 1)
    return complex(table[j + 1, 1] / _TWO_PI_I)


# -- degenerations ----------------------------------------------------------


def _coth_derivs(x: complex, n_max: int, pole_radius: float) -> np.ndarray:
    """[d^n/dx^n coth(x)] for n = 0..n_max via the square polynomial chain."""
    x = complex(x)
    nearest = round(x.imag / math.pi)
    if abs(x - 1j * math.pi * nearest) < pole_radius:
        raise PoleProximityError(f"argument {x} too close to a hyperbolic pole")
    c = 1.0 / cmath.tanh(x)
    # p_0 = c, p_{n+1} = p_n' * (1 - c^2); store polynomial coefficients in c
    coeffs = [0.0, 1.0]
    out = np.zeros(n_max + 1, dtype=np.complex128)
    out[0] = c
    for n in range(1, n_max + 1):
        deriv = [coeffs[i] * i for i in range(1, len(coeffs))]
        nxt = list(deriv) + [0.0, 0.0]
        for i, d in enumerate(deriv):
            nxt[i + 2] -= d
        coeffs = nxt
        out[n] = sum(coeffs[i] * c**i for i in range(len(coeffs)))
    return out


def phi_trig(
    hbar: complex,
    z: complex,
    j: int = 0,
    k: int = 0,
    pole_radius: float = 1e-3,
) -> complex:
    """Hyperbolic degeneration of the kernel and its derivatives.

    The degenerate kernel is coth(hbar) + coth(z), so any genuinely mixed
    derivative vanishes identically; so does the modulus derivative, which
    equals a mixed derivative by the flow identity.
    """
    if j < 0 or k < 0 or j + k > 4:
        raise ValueError("derivative orders must satisfy j + k <= 4")
    if j and k:
        return 0j
    if k:
        return complex(_coth_derivs(z, k, pole_radius)[k])
    if j:
        return complex(_coth_derivs(hbar, j, pole_radius)[j])
    return complex(
        _coth_derivs(hbar, 0, pole_radius)[0] + _coth_derivs(z, 0, pole_radius)[0]
    )


def phi_rat(
    hbar: complex,
    z: complex,
    j: int = 0,
    k: int = 0,
    pole_radius: float = 1e-3,
) -> complex:
    """Rational degeneration: one simple pole in each variable, nothing else."""
    if j < 0 or k < 0 or j + k > 4:
        raise ValueError("derivative orders must satisfy j + k <= 4")
    if j and k:
        return 0j

    def pole(x: complex, n: int) -> complex:
        x = complex(x)
        if abs(x) < pole_radius:
            raise PoleProximityError(f"argument {x} too close to the pole at zero")
        return (-1.0) ** n * math.factorial(n) / x ** (n + 1)

    if k:
        return pole(z, k)
    if j:
        return pole(hbar, j)
    return pole(hbar, 0) + pole(z, 0)
