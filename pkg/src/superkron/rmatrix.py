"""Finite Heisenberg matrix basis, lattice operators, and Yang-Baxter residuals.

The clock/shift pair generates a projective basis of N x N matrices whose
multiplication cocycle balances three-term products.  Pairing basis matrices
with exponentially dressed kernel channels gives the quantum operator family
and its classical limit; the odd extension replaces each channel coefficient
by a Grassmann-valued function.  This module builds those operators as
matrices with Grassmann entries and exposes residual checkers for the two
quadratic (associative) and two classical bracket identities.

Index pairs use raw integer arithmetic.  The basis matrices are not periodic
under index shifts by N (they pick up a sign), and the cocycle balance holds
as written only for unreduced sums and differences; reduction is applied
explicitly when enumerating channels.
"""

from __future__ import annotations

import cmath
import math
from itertools import product
from math import comb
from typing import NamedTuple, Sequence

import numpy as np

from .elliptic import EllipticContext, phi_derivs, phi_tau_derivs
from .grassmann import GeneratorSet, GrassmannElement, default_generators
from .superfunc import SuperFunction, SuperPoint, _odd_element, super_phi

__all__ = [
    "MultiIndex",
    "kappa",
    "HeisenbergBasis",
    "t_matrix",
    "channel_shift",
    "basis_phi",
    "super_basis_phi",
    "SuperMatrix",
    "build_R",
    "build_r_classical",
    "embed",
    "commutator",
    "anticommutator",
    "aybe_residual",
    "cybe_residual",
    "BASIS_FORMS",
]

_TWO_PI_I = 2j * math.pi

BASIS_FORMS = ("shift", "mu-shift", "basis", "heat")


class MultiIndex(NamedTuple):
    """Integer index pair with raw (unreduced) arithmetic."""

    a1: int
    a2: int

    def __add__(self, other):
        return MultiIndex(self.a1 + other[0], self.a2 + other[1])

    def __sub__(self, other):
        return MultiIndex(self.a1 - other[0], self.a2 - other[1])

    def __neg__(self):
        return MultiIndex(-self.a1, -self.a2)

    def reduced(self, N: int) -> "MultiIndex":
        return MultiIndex(self.a1 % N, self.a2 % N)

    def is_zero(self) -> bool:
        return self.a1 == 0 and self.a2 == 0


def kappa(alpha, beta, N: int) -> complex:
    """Cocycle of the projective basis product."""
    return cmath.exp(1j * math.pi * (beta[0] * alpha[1] - beta[1] * alpha[0]) / N)


class HeisenbergBasis:
    """Clock and shift matrices of size N with the derived projective basis.

    Clock phases are 1-based: entry (k, k) carries exp(2 pi i (k+1)/N), so
    for N = 2 the clock is diag(-1, 1).  The shift matrix has ones where the
    column index is the row index plus one, cyclically.
    """

    def __init__(self, N: int) -> None:
        if not isinstance(N, int) or N < 1:
            raise ValueError("N must be a positive integer")
        self.N = N
        self.Q = self.q_power(1)
        self.Lam = self.lam_power(1)
        self._t_cache: dict[tuple[int, int], np.ndarray] = {}

    def q_power(self, a1: int) -> np.ndarray:
        N = self.N
        phases = np.exp(2j * np.pi * a1 * (np.arange(N) + 1) / N)
        return np.diag(phases)

    def lam_power(self, a2: int) -> np.ndarray:
        N = self.N
        out = np.zeros((N, N), dtype=complex)
        for k in range(N):
            out[k, (k + a2) % N] = 1.0
        return out

    def t(self, alpha) -> np.ndarray:
        a1, a2 = int(alpha[0]), int(alpha[1])
        key = (a1, a2)
        cached = self._t_cache.get(key)
        if cached is None:
            phase = cmath.exp(1j * math.pi * a1 * a2 / self.N)
            cached = phase * (self.q_power(a1) @ self.lam_power(a2))
            self._t_cache[key] = cached
        return cached

    def canonical_indices(self) -> list[MultiIndex]:
        return [MultiIndex(a1, a2) for a1, a2 in product(range(self.N), repeat=2)]

    def nonzero_indices(self) -> list[MultiIndex]:
        return [a for a in self.canonical_indices() if not a.is_zero()]


def t_matrix(alpha, basis: HeisenbergBasis) -> np.ndarray:
    return basis.t(alpha)


def channel_shift(alpha, N: int, tau: complex) -> complex:
    """Lattice offset attached to one index channel: (a1 + a2 tau)/N."""
    return (alpha[0] + alpha[1] * tau) / N


def basis_phi(
    alpha,
    hbar: complex,
    z: complex,
    ctx: EllipticContext,
    N: int,
    j: int = 0,
    k: int = 0,
    dtau: bool = False,
) -> complex:
    """Derivatives of the dressed channel function exp(c z) kernel(h + shift, z).

    c = 2 pi i a2 / N.  Argument derivatives go through the dressing by the
    binomial chain rule.  With dtau the result is the full modulus
    derivative: the partial one plus (a2/N) times the next parameter
    derivative, because the channel shift moves with the modulus.
    """
    if j < 0 or k < 0:
        raise ValueError("derivative orders must be nonnegative")
    c = _TWO_PI_I * alpha[1] / N
    shift = channel_shift(alpha, N, ctx.tau)
    h_tot = complex(hbar) + shift
    env = cmath.exp(c * z)
    if not dtau:
        tab = phi_derivs(h_tot, z, ctx, j, k)
        val = sum(comb(k, i) * c ** (k - i) * tab[j, i] for i in range(k + 1))
        return env * val
    rate = alpha[1] / N
    tab = phi_derivs(h_tot, z, ctx, j + 1, k)
    ttab = phi_tau_derivs(h_tot, z, ctx, j, k)
    val = sum(
        comb(k, i) * c ** (k - i) * (ttab[j, i] + rate * tab[j + 1, i])
        for i in range(k + 1)
    )
    return env * val


def super_basis_phi(
    alpha,
    hbar: complex,
    mu,
    p1: SuperPoint,
    p2: SuperPoint,
    omega,
    ctx: EllipticContext,
    N: int,
    gens: GeneratorSet | None = None,
    form: str = "shift",
) -> SuperFunction:
    """Odd extension of one channel function, in any of four equal shapes.

    "shift": dressed plain function times (1 + c zeta1 zeta2), the nilpotent
    expansion of shifting the even argument by zeta1 zeta2.  "mu-shift":
    dressed function with the odd parameter displaced by c omega.  "basis":
    the five-term template on the dressed channel function with the full
    modulus derivative in the third term.  "heat": same with the third term
    rewritten through the flow identity, the shape that survives
    degeneration.  c = 2 pi i a2 / N throughout.
    """
    if gens is None:
        gens = default_generators()
    c = _TWO_PI_I * alpha[1] / N
    rate = alpha[1] / N
    shift = channel_shift(alpha, N, ctx.tau)
    h_tot = complex(hbar) + shift
    if form == "shift":
        f = super_phi(
            h_tot, mu, p1, p2, omega, ctx, gens=gens,
            exp_coeff=c, hbar_tau_rate=rate, tau_term="dtau",
        )
        if c == 0:
            return f
        dress = gens.one() + (f.slots["zeta1"] * f.slots["zeta2"]) * c
        return f.lmul(dress)
    if form == "mu-shift":
        omega_e = _odd_element(gens, omega, "omega")
        mu_eff = omega_e * c
        if mu is not None:
            mu_eff = _odd_element(gens, mu, "mu") + mu_eff
        return super_phi(
            h_tot, mu_eff, p1, p2, omega, ctx, gens=gens,
            exp_coeff=c, hbar_tau_rate=rate, tau_term="dtau",
            check_slots=False,
        )
    if form == "basis":
        return super_phi(
            h_tot, mu, p1, p2, omega, ctx, gens=gens,
            exp_coeff=c, hbar_tau_rate=rate, tau_term="full",
        )
    if form == "heat":
        return super_phi(
            h_tot, mu, p1, p2, omega, ctx, gens=gens,
            exp_coeff=c, hbar_tau_rate=rate, tau_term="heat",
        )
    raise ValueError(f"form must be one of {BASIS_FORMS}")


class SuperMatrix:
    """Square matrix over the Grassmann algebra, stored per basis monomial.

    blocks maps a monomial bitmask to a dense complex matrix.  The product
    multiplies coefficient blocks as matrices and basis monomials in the
    algebra, keeping the left factor's monomial on the left; matrices have
    complex entries, so no extra grading sign arises.
    """

    __slots__ = ("gens", "n_sites", "site_dim", "dim", "blocks")

    def __init__(self, gens: GeneratorSet, n_sites: int, site_dim: int, blocks=None) -> None:
        if n_sites < 1 or n_sites > 3:
            raise ValueError("n_sites must be 1, 2 or 3")
        self.gens = gens
        self.n_sites = n_sites
        self.site_dim = site_dim
        self.dim = site_dim**n_sites
        self.blocks: dict[int, np.ndarray] = {}
        if blocks:
            for mask, arr in blocks.items():
                self.add_block(mask, arr)

    def add_block(self, mask: int, arr: np.ndarray) -> None:
        arr = np.asarray(arr, dtype=complex)
        if arr.shape != (self.dim, self.dim):
            raise ValueError(f"block shape {arr.shape} does not match dim {self.dim}")
        if mask in self.blocks:
            self.blocks[mask] = self.blocks[mask] + arr
        else:
            self.blocks[mask] = arr.copy()

    def compact(self, tol: float = 0.0) -> "SuperMatrix":
        """Drop blocks whose largest entry is at or below tol."""
        out = SuperMatrix(self.gens, self.n_sites, self.site_dim)
        for mask, arr in self.blocks.items():
            if np.abs(arr).max() > tol:
                out.blocks[mask] = arr.copy()
        return out

    def entry(self, i: int, j: int) -> GrassmannElement:
        return GrassmannElement(
            self.gens, {mask: arr[i, j] for mask, arr in self.blocks.items()}
        )

    def max_abs(self) -> float:
        if not self.blocks:
            return 0.0
        return max(float(np.abs(arr).max()) for arr in self.blocks.values())

    def coefficient_matrix(self, spec) -> np.ndarray:
        """Dense coefficient block of one monomial (labels, string, or mask)."""
        mask = spec if isinstance(spec, int) else self.gens.mask_of(spec)
        arr = self.blocks.get(mask)
        if arr is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return arr.copy()

    def parity(self) -> str:
        live = [m for m, a in self.blocks.items() if np.abs(a).max() > 0]
        if not live:
            return "even"
        parities = {m.bit_count() & 1 for m in live}
        if parities == {0}:
            return "even"
        if parities == {1}:
            return "odd"
        return "mixed"

    def _like(self) -> "SuperMatrix":
        return SuperMatrix(self.gens, self.n_sites, self.site_dim)

    def _check_shape(self, other: "SuperMatrix") -> None:
        if self.gens != other.gens:
            raise ValueError("matrices use different generator sets")
        if self.n_sites != other.n_sites or self.site_dim != other.site_dim:
            raise ValueError("matrix site structures differ")

    def __add__(self, other: "SuperMatrix") -> "SuperMatrix":
        self._check_shape(other)
        out = self._like()
        for mask, arr in self.blocks.items():
            out.add_block(mask, arr)
        for mask, arr in other.blocks.items():
            out.add_block(mask, arr)
        return out

    def __sub__(self, other: "SuperMatrix") -> "SuperMatrix":
        return self + other.scale(-1.0)

    def __neg__(self) -> "SuperMatrix":
        return self.scale(-1.0)

    def scale(self, c: complex) -> "SuperMatrix":
        out = self._like()
        for mask, arr in self.blocks.items():
            out.blocks[mask] = arr * c
        return out

    def lmul_element(self, elem: GrassmannElement) -> "SuperMatrix":
        """Multiply every entry by a Grassmann element from the left."""
        out = self._like()
        for emask, ecoeff in elem.items():
            for mask, arr in self.blocks.items():
                if emask & mask:
                    continue
                out.add_block(emask | mask, self.gens.sign(emask, mask) * ecoeff * arr)
        return out

    def __matmul__(self, other: "SuperMatrix") -> "SuperMatrix":
        self._check_shape(other)
        out = self._like()
        for s, a in self.blocks.items():
            for t, b in other.blocks.items():
                if s & t:
                    continue
                out.add_block(s | t, self.gens.sign(s, t) * (a @ b))
        return out

    def embed(self, sites: Sequence[int], n_total: int) -> "SuperMatrix":
        return embed(self, sites, n_total)


def embed(m: SuperMatrix, sites: Sequence[int], n_total: int = 3) -> SuperMatrix:
    """Place a multi-site matrix at the named sites of a larger site chain.

    sites lists, in the matrix's own factor order, which chain positions
    (1-based) its tensor factors occupy; omitted positions get identities.
    Reversed pairs like (3, 1) are index permutations, so one code path
    realizes every subscript placement.
    """
    sites = tuple(int(s) for s in sites)
    if len(sites) != m.n_sites:
        raise ValueError("sites must name one position per matrix factor")
    if len(set(sites)) != len(sites):
        raise ValueError("sites must be distinct")
    if any(s < 1 or s > n_total for s in sites):
        raise ValueError(f"sites must lie in 1..{n_total}")
    d = m.site_dim
    out_letters = "abc"[:n_total]
    in_letters = "def"[:n_total]
    t_sub = (
        "".join(out_letters[s - 1] for s in sites)
        + "".join(in_letters[s - 1] for s in sites)
    )
    operands_sub = [t_sub]
    rest = [s for s in range(1, n_total + 1) if s not in sites]
    for s in rest:
        operands_sub.append(out_letters[s - 1] + in_letters[s - 1])
    script = ",".join(operands_sub) + "->" + out_letters + in_letters
    eye = np.eye(d, dtype=complex)
    out = SuperMatrix(m.gens, n_total, d)
    big = d**n_total
    for mask, arr in m.blocks.items():
        tensor = arr.reshape((d,) * (2 * m.n_sites))
        ops = [tensor] + [eye] * len(rest)
        out.blocks[mask] = np.einsum(script, *ops).reshape(big, big)
    return out


def commutator(a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    return a @ b - b @ a


def anticommutator(a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    return a @ b + b @ a


def build_R(
    hbar: complex,
    mu,
    p1: SuperPoint,
    p2: SuperPoint,
    omega,
    basis: HeisenbergBasis,
    ctx: EllipticContext,
    super: bool = False,
    form: str = "shift",
    gens: GeneratorSet | None = None,
) -> SuperMatrix:
    """Quantum operator: channel sum over all N^2 index pairs.

    Each channel contributes the matrix-basis tensor square times the
    dressed channel coefficient; the odd version evaluates the channel's
    Grassmann extension in the chosen form, the ordinary one the scalar
    channel function.  mu = None with super gives the truncated odd family.
    """
    if gens is None:
        gens = default_generators()
    N = basis.N
    z12 = complex(p1.z) - complex(p2.z)
    out = SuperMatrix(gens, 2, N)
    for alpha in basis.canonical_indices():
        block = np.kron(basis.t(alpha), basis.t(-alpha))
        if super:
            fn = super_basis_phi(alpha, hbar, mu, p1, p2, omega, ctx, N, gens=gens, form=form)
            value = fn.evaluate(p1.z, p2.z)
            for mask, coeff in value.items():
                out.add_block(mask, coeff * block)
        else:
            out.add_block(0, basis_phi(alpha, hbar, z12, ctx, N) * block)
    return out


def build_r_classical(
    p1: SuperPoint,
    p2: SuperPoint,
    omega,
    basis: HeisenbergBasis,
    ctx: EllipticContext,
    super: bool = False,
    form: str = "shift",
    gens: GeneratorSet | None = None,
) -> SuperMatrix:
    """Classical operator: zero-parameter channel sum without the unit channel.

    The odd version uses the truncated channel extensions (odd parameter
    absent), matching the classical bracket identity it satisfies.
    """
    if gens is None:
        gens = default_generators()
    N = basis.N
    z12 = complex(p1.z) - complex(p2.z)
    out = SuperMatrix(gens, 2, N)
    for alpha in basis.nonzero_indices():
        block = np.kron(basis.t(alpha), basis.t(-alpha))
        if super:
            fn = super_basis_phi(alpha, 0.0, None, p1, p2, omega, ctx, N, gens=gens, form=form)
            value = fn.evaluate(p1.z, p2.z)
            for mask, coeff in value.items():
                out.add_block(mask, coeff * block)
        else:
            out.add_block(0, basis_phi(alpha, 0.0, z12, ctx, N) * block)
    return out


def aybe_residual(
    hbars: Sequence[complex],
    mus,
    points: Sequence[SuperPoint],
    omega,
    basis: HeisenbergBasis,
    ctx: EllipticContext,
    super: bool = False,
    form: str = "shift",
    gens: GeneratorSet | None = None,
    return_scale: bool = False,
):
    """Three-term quadratic residual of the associative identity on 3 sites.

    Terms: (1,2)x(2,3) at (h1, h2), (3,1)x(1,2) at (-h2, h1-h2), and
    (2,3)x(3,1) at (h2-h1, -h1), with matching odd-parameter differences in
    the odd case.  An exact solution makes the block sum vanish.
    """
    if gens is None:
        gens = default_generators()
    p1, p2, p3 = points
    h1, h2 = (complex(h) for h in hbars)
    if super:
        mu1 = _odd_element(gens, mus[0], "mu1")
        mu2 = _odd_element(gens, mus[1], "mu2")
        params = [
            (h1, mu1), (h2, mu2), (-h2, -mu2),
            (h1 - h2, mu1 - mu2), (h2 - h1, mu2 - mu1), (-h1, -mu1),
        ]
    else:
        params = [(h1, None), (h2, None), (-h2, None),
                  (h1 - h2, None), (h2 - h1, None), (-h1, None)]
    placements = [
        ((1, 2), p1, p2), ((2, 3), p2, p3), ((3, 1), p3, p1),
        ((1, 2), p1, p2), ((2, 3), p2, p3), ((3, 1), p3, p1),
    ]
    factors = []
    for (h, m), (sites, pa, pb) in zip(params, placements):
        r = build_R(h, m, pa, pb, omega, basis, ctx, super=super, form=form, gens=gens)
        factors.append(embed(r, sites, 3))
    prod1 = factors[0] @ factors[1]
    prod2 = factors[2] @ factors[3]
    prod3 = factors[4] @ factors[5]
    residual = prod1 + prod2 + prod3
    if return_scale:
        scale = max(prod1.max_abs(), prod2.max_abs(), prod3.max_abs())
        return residual, scale
    return residual


def cybe_residual(
    points: Sequence[SuperPoint],
    omega,
    basis: HeisenbergBasis,
    ctx: EllipticContext,
    super: bool = False,
    form: str = "shift",
    gens: GeneratorSet | None = None,
    return_scale: bool = False,
):
    """Classical bracket residual on 3 sites.

    Ordinary: commutators of the scalar-channel classical operators over the
    pairs (12,13), (12,23), (13,23).  Odd: the same sum with anticommutators,
    since the odd classical operators have parity-odd entries.
    """
    if gens is None:
        gens = default_generators()
    p1, p2, p3 = points
    r12 = embed(build_r_classical(p1, p2, omega, basis, ctx, super=super, form=form, gens=gens), (1, 2), 3)
    r13 = embed(build_r_classical(p1, p3, omega, basis, ctx, super=super, form=form, gens=gens), (1, 3), 3)
    r23 = embed(build_r_classical(p2, p3, omega, basis, ctx, super=super, form=form, gens=gens), (2, 3), 3)
    bracket = anticommutator if super else commutator
    b1 = bracket(r12, r13)
    b2 = bracket(r12, r23)
    b3 = bracket(r13, r23)
    residual = b1 + b2 + b3
    if return_scale:
        scale = max(b1.max_abs(), b2.max_abs(), b3.max_abs())
        return residual, scale
    return residual
