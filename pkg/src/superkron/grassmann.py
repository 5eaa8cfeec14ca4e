"""Finite Grassmann (exterior) algebra with complex coefficients.

The algebra is generated by a fixed, ordered set of anticommuting symbols.
A basis monomial is a subset of generators encoded as a bitmask over that
order; an element is a sparse map from bitmask to coefficient.  Signs come
from counting transpositions needed to bring concatenated monomials into
canonical order, so products, left derivatives and nilpotent Taylor shifts
are exact up to floating-point rounding of the coefficients.
"""

from __future__ import annotations

import cmath
import math
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "GeneratorSet",
    "GrassmannElement",
    "GeneratorMismatchError",
    "taylor_shift",
    "grassmann_exp",
    "DEFAULT_GENERATOR_NAMES",
    "default_generators",
]

# Canonical generator order used throughout the verification suites: three
# odd point coordinates, two odd deformation parameters, one global odd unit.
DEFAULT_GENERATOR_NAMES = ("ζ1", "ζ2", "ζ3", "μ1", "μ2", "ω")

_ScalarTypes = (int, float, complex)


class GeneratorMismatchError(ValueError):
    """Raised when combining elements over different generator sets."""


def _merge_sign(s: int, t: int) -> int:
    """Sign of e_S * e_T for disjoint masks: (-1)**#{(i,j): i in S, j in T, i > j}."""
    sign = 1
    while t:
        low = t & -t
        j = low.bit_length() - 1
        if ((s >> (j + 1)).bit_count()) & 1:
            sign = -sign
        t ^= low
    return sign


class GeneratorSet:
    """Fixed, ordered collection of anticommuting generator labels.

    The order is significant: it defines the canonical form of every
    monomial and therefore every sign in the algebra.  Instances cache
    sign and product tables, so sharing one instance across a computation
    is preferred.
    """

    def __init__(self, names: Iterable[str]) -> None:
        names = tuple(names)
        if not names:
            raise ValueError("at least one generator is required")
        if len(set(names)) != len(names):
            raise ValueError("generator labels must be unique")
        self.names = names
        self.index = {name: i for i, name in enumerate(names)}
        self.dim = 1 << len(names)
        self._sign_table: np.ndarray | None = None
        self._mul_tables: dict = {}

    # -- basics ---------------------------------------------------------

    @property
    def n_generators(self) -> int:
        return len(self.names)

    def __repr__(self) -> str:
        return f"GeneratorSet({', '.join(self.names)})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GeneratorSet) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def index_of(self, g: int | str) -> int:
        if isinstance(g, str):
            try:
                return self.index[g]
            except KeyError:
                raise KeyError(f"unknown generator {g!r}") from None
        if not 0 <= g < self.n_generators:
            raise IndexError(f"generator index {g} out of range")
        return g

    def sign(self, s: int, t: int) -> int:
        """Reordering sign for e_S * e_T (masks assumed disjoint)."""
        if self.n_generators <= 8:
            if self._sign_table is None:
                d = self.dim
                table = np.ones((d, d), dtype=np.int8)
                for a in range(d):
                    for b in range(d):
                        table[a, b] = _merge_sign(a, b)
                self._sign_table = table
            return int(self._sign_table[s, t])
        return _merge_sign(s, t)

    # -- element constructors --------------------------------------------

    def zero(self) -> "GrassmannElement":
        return GrassmannElement(self, {})

    def one(self) -> "GrassmannElement":
        return GrassmannElement(self, {0: 1.0 + 0j})

    def scalar(self, c: complex) -> "GrassmannElement":
        return GrassmannElement(self, {0: complex(c)})

    def generator(self, g: int | str) -> "GrassmannElement":
        return GrassmannElement(self, {1 << self.index_of(g): 1.0 + 0j})

    def basis_element(self, mask: int, coeff: complex = 1.0) -> "GrassmannElement":
        if not 0 <= mask < self.dim:
            raise ValueError(f"mask {mask} out of range")
        return GrassmannElement(self, {mask: complex(coeff)})

    def element(self, terms: Mapping[int, complex]) -> "GrassmannElement":
        return GrassmannElement(self, {m: complex(c) for m, c in terms.items()})

    def mask_of(self, labels: Iterable[str] | str) -> int:
        """Bitmask of a monomial given as labels or as a concatenated string."""
        if isinstance(labels, str):
            labels = self._split_monomial(labels)
        mask = 0
        for lab in labels:
            bit = 1 << self.index_of(lab)
            if mask & bit:
                raise ValueError(f"repeated generator {lab!r} in monomial")
            mask |= bit
        return mask

    def monomial_label(self, mask: int) -> str:
        return "".join(self.names[i] for i in range(self.n_generators) if mask >> i & 1)

    def _split_monomial(self, text: str) -> list[str]:
        # greedy longest-match so multi-character labels survive concatenation
        by_len = sorted(self.names, key=len, reverse=True)
        out: list[str] = []
        pos = 0
        while pos < len(text):
            for name in by_len:
                if text.startswith(name, pos):
                    out.append(name)
                    pos += len(name)
                    break
            else:
                raise ValueError(f"cannot read generator at {text[pos:]!r}")
        return out

    def parse(self, text: str) -> "GrassmannElement":
        """Inverse of str(element); accepts the exact rendering format."""
        terms: dict[int, complex] = {}
        for chunk in text.strip().split(" + "):
            chunk = chunk.strip()
            if not chunk:
                continue
            if ")·" in chunk:
                coeff_part, mono = chunk.split(")·", 1)
                coeff = complex(coeff_part.lstrip("("))
                mask = self.mask_of(mono)
            else:
                coeff = complex(chunk)
                mask = 0
            terms[mask] = terms.get(mask, 0j) + coeff
        return GrassmannElement(self, terms)

    # -- product table for coefficient-vector backends ---------------------

    def mul_table(self, sup_a: tuple[int, ...], sup_b: tuple[int, ...]):
        """Structure table of the product restricted to two mask supports.

        Returns (out_support, table) with table of shape
        (len(sup_a) * len(sup_b), len(out_support)) such that coefficient
        vectors multiply as vec_c = (vec_a outer vec_b).ravel() @ table.
        """
        key = (sup_a, sup_b)
        hit = self._mul_tables.get(key)
        if hit is not None:
            return hit
        out_masks = sorted({s | t for s in sup_a for t in sup_b if not s & t})
        if not out_masks:
            out_masks = [0]
        pos = {m: i for i, m in enumerate(out_masks)}
        table = np.zeros((len(sup_a) * len(sup_b), len(out_masks)), dtype=np.complex128)
        nb = len(sup_b)
        for p, s in enumerate(sup_a):
            for q, t in enumerate(sup_b):
                if s & t:
                    continue
                table[p * nb + q, pos[s | t]] = self.sign(s, t)
        result = (tuple(out_masks), table)
        self._mul_tables[key] = result
        return result


def default_generators() -> GeneratorSet:
    return GeneratorSet(DEFAULT_GENERATOR_NAMES)


class GrassmannElement:
    """Sparse element of a finite Grassmann algebra.

    Instances behave as immutable values: every operation returns a new
    element, zero coefficients are pruned on construction.
    """

    __slots__ = ("gens", "_terms")

    def __init__(self, gens: GeneratorSet, terms: Mapping[int, complex]) -> None:
        self.gens = gens
        self._terms = {m: complex(c) for m, c in terms.items() if c != 0}

    # -- inspection -------------------------------------------------------

    def items(self) -> Iterator[tuple[int, complex]]:
        return iter(self._terms.items())

    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self._terms))

    def coefficient(self, mono: int | str | Iterable[str]) -> complex:
        mask = mono if isinstance(mono, int) else self.gens.mask_of(mono)
        return self._terms.get(mask, 0j)

    @property
    def body(self) -> complex:
        return self._terms.get(0, 0j)

    def soul(self) -> "GrassmannElement":
        return GrassmannElement(self.gens, {m: c for m, c in self._terms.items() if m})

    def is_zero(self) -> bool:
        return not self._terms

    def parity(self) -> str:
        """'even', 'odd' or 'mixed'; the zero element counts as even."""
        if not self._terms:
            return "even"
        parities = {m.bit_count() & 1 for m in self._terms}
        if parities == {0}:
            return "even"
        if parities == {1}:
            return "odd"
        return "mixed"

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "GrassmannElement") -> None:
        if self.gens != other.gens:
            raise GeneratorMismatchError("elements use different generator sets")

    def __add__(self, other):
        if isinstance(other, _ScalarTypes):
            other = self.gens.scalar(other)
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        self._check(other)
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0j) + c
        return GrassmannElement(self.gens, terms)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, _ScalarTypes):
            other = self.gens.scalar(other)
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return GrassmannElement(self.gens, {m: -c for m, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, _ScalarTypes):
            c = complex(other)
            return GrassmannElement(self.gens, {m: a * c for m, a in self._terms.items()})
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        self._check(other)
        gens = self.gens
        terms: dict[int, complex] = {}
        for s, a in self._terms.items():
            for t, b in other._terms.items():
                if s & t:
                    continue
                u = s | t
                terms[u] = terms.get(u, 0j) + gens.sign(s, t) * a * b
        return GrassmannElement(gens, terms)

    def __rmul__(self, other):
        if isinstance(other, _ScalarTypes):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, _ScalarTypes):
            return self * (1.0 / complex(other))
        return NotImplemented

    def left_derivative(self, g: int | str) -> "GrassmannElement":
        """Left derivative with respect to one generator.

        On a monomial containing g the generator is moved to the front,
        picking up one sign per generator standing before it, and removed.
        Monomials without g are annihilated.
        """
        bit = 1 << self.gens.index_of(g)
        below = bit - 1
        terms: dict[int, complex] = {}
        for m, c in self._terms.items():
            if not m & bit:
                continue
            sign = -1 if (m & below).bit_count() & 1 else 1
            nm = m ^ bit
            terms[nm] = terms.get(nm, 0j) + sign * c
        return GrassmannElement(self.gens, terms)

    # -- comparison and rendering -----------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, _ScalarTypes):
            other = self.gens.scalar(other)
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        return self.gens == other.gens and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.gens, tuple(sorted(self._terms.items(), key=lambda kv: kv[0]))))

    def isclose(self, other: "GrassmannElement", tol: float = 1e-12) -> bool:
        self._check(other)
        diff = self - other
        scale = max(self.max_abs(), other.max_abs(), 1.0)
        return diff.max_abs() <= tol * scale

    def __str__(self) -> str:
        if not self._terms:
            return "(0+0j)"
        parts = []
        for m in sorted(self._terms, key=lambda m: (m.bit_count(), m)):
            c = self._terms[m]
            coeff = f"({c.real:.17g}{c.imag:+.17g}j)"
            parts.append(coeff if m == 0 else f"{coeff}·{self.gens.monomial_label(m)}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"<GrassmannElement {self}>"


def taylor_shift(
    f: Callable[[complex, int], complex],
    z0: complex,
    soul: GrassmannElement,
) -> GrassmannElement:
    """Evaluate an analytic function at z0 + soul for a nilpotent even shift.

    f(z, k) must return the k-th derivative at z.  The result is the finite
    Taylor sum over powers of the soul; the expansion terminates because the
    shift is nilpotent.
    """
    if soul.parity() != "even":
        raise ValueError("shift must be an even element")
    if soul.body != 0:
        raise ValueError("shift must have no scalar part")
    gens = soul.gens
    out = gens.scalar(f(z0, 0))
    power = gens.one()
    factorial = 1.0
    k = 0
    while True:
        k += 1
        power = power * soul
        if power.is_zero() or k > gens.n_generators:
            break
        factorial *= k
        out = out + power * (f(z0, k) / factorial)
    return out


def grassmann_exp(x: GrassmannElement) -> GrassmannElement:
    """Exponential of an even element: exp(body) times the finite soul series."""
    if x.parity() != "even":
        raise ValueError("exponent must be an even element")
    gens = x.gens
    s = x.soul()
    out = gens.one()
    power = gens.one()
    factorial = 1.0
    k = 0
    while True:
        k += 1
        power = power * s
        if power.is_zero() or k > gens.n_generators:
            break
        factorial *= k
        out = out + power * (1.0 / factorial)
    return out * cmath.exp(x.body)
