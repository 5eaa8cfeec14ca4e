"""Grassmann-valued extension of the elliptic kernel and its identity checkers.

A SuperFunction is a finite sum of (Grassmann monomial) x (derivative
descriptor) pairs.  A descriptor names one entry of a closed catalog of
analytic coefficient functions: mixed parameter/argument derivatives of the
two-variable kernel up to total order four, plus its modulus derivative with
at most one extra parameter derivative.  Super-differential operators act
symbolically on this representation; numbers appear only at evaluation time,
which turns the whole object into a GrassmannElement.

Modulus descriptors are evaluated through the direct modulus-differentiated
series, never through the flow identity that the operators use for
rewriting, so heat-equation residuals compare two independent routes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from math import comb
from typing import NamedTuple, Sequence

from .elliptic import (
    EllipticContext,
    phi_derivs,
    phi_rat,
    phi_tau_derivs,
    phi_trig,
)
from .grassmann import (
    GeneratorMismatchError,
    GeneratorSet,
    GrassmannElement,
    default_generators,
    grassmann_exp,
)

__all__ = [
    "Descriptor",
    "CatalogOverflowError",
    "SuperPoint",
    "SuperFunction",
    "super_phi",
    "super_phi_truncated",
    "super_phi_degenerate",
    "apply_super_operator",
    "fay_residual",
    "heat_residual",
    "periodicity_residual",
    "transition_factor",
    "KINDS",
]

_TWO_PI_I = 2j * math.pi

KINDS = ("elliptic", "trig", "rational")


class CatalogOverflowError(ValueError):
    """An operator requested a coefficient derivative outside the catalog."""


class Descriptor(NamedTuple):
    """Catalog key: dtau modulus derivatives, j parameter, k argument ones.

    Stored descriptors are canonical: either dtau = 0 with j + k <= 4, or
    dtau = 1 with j <= 1, k = 0.  Everything else is rewritten on insertion
    by trading one modulus derivative for one parameter plus one argument
    derivative over two pi i.
    """

    dtau: int
    j: int
    k: int


def _canonical(dtau: int, j: int, k: int, coeff: complex) -> tuple[Descriptor, complex]:
    while dtau and (dtau > 1 or j > 1 or k > 0):
        dtau -= 1
        j += 1
        k += 1
        coeff = coeff / _TWO_PI_I
    if dtau == 0 and j + k > 4:
        raise CatalogOverflowError(
            f"coefficient derivative of order ({j},{k}) exceeds the catalog"
        )
    return Descriptor(dtau, j, k), coeff


def _as_element(gens: GeneratorSet, spec) -> GrassmannElement:
    if isinstance(spec, GrassmannElement):
        if spec.gens != gens:
            raise GeneratorMismatchError("element built over a different generator set")
        return spec
    return gens.generator(spec)


def _odd_element(gens: GeneratorSet, spec, label: str) -> GrassmannElement:
    elem = _as_element(gens, spec)
    if not elem.is_zero() and elem.parity() != "odd":
        raise ValueError(f"{label} must be parity-odd")
    return elem


def _support_mask(elem: GrassmannElement) -> int:
    mask = 0
    for m, _ in elem.items():
        mask |= m
    return mask


@dataclass(frozen=True)
class SuperPoint:
    """One point of the (1|1)-dimensional space: even coordinate plus odd partner.

    zeta may be a generator label/index or an odd GrassmannElement.
    """

    z: complex
    zeta: object

    def resolve(self, gens: GeneratorSet) -> GrassmannElement:
        return _odd_element(gens, self.zeta, "zeta")


class SuperFunction:
    """Symbolic Grassmann-coefficient combination of kernel derivatives.

    terms maps a basis-monomial bitmask to {Descriptor: complex}.  The
    analytic part of every stored pair is
    exp(exp_coeff * z12) * d^{j,k,dtau} kernel(hbar, z12), z12 = z1 - z2.
    hbar_tau_rate records d(hbar)/d(modulus) for parameter shifts that
    depend on the modulus; the modulus-derivative operator honours it.
    """

    __slots__ = ("gens", "ctx", "hbar", "kind", "exp_coeff", "hbar_tau_rate", "terms", "slots")

    def __init__(
        self,
        gens: GeneratorSet,
        ctx: EllipticContext,
        hbar: complex,
        kind: str = "elliptic",
        exp_coeff: complex = 0.0,
        hbar_tau_rate: complex = 0.0,
        terms: dict | None = None,
        slots: dict | None = None,
    ) -> None:
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        self.gens = gens
        self.ctx = ctx
        self.hbar = complex(hbar)
        self.kind = kind
        self.exp_coeff = complex(exp_coeff)
        self.hbar_tau_rate = complex(hbar_tau_rate)
        self.terms: dict[int, dict[Descriptor, complex]] = {}
        self.slots = dict(slots) if slots else {}
        if terms:
            for mask, descs in terms.items():
                for desc, coeff in descs.items():
                    self.add_term(mask, desc.dtau, desc.j, desc.k, coeff)

    # -- construction helpers ----------------------------------------------

    def add_term(self, mask: int, dtau: int, j: int, k: int, coeff: complex) -> None:
        desc, coeff = _canonical(dtau, j, k, complex(coeff))
        if coeff == 0:
            return
        row = self.terms.setdefault(mask, {})
        new = row.get(desc, 0j) + coeff
        if new == 0:
            row.pop(desc, None)
            if not row:
                self.terms.pop(mask, None)
        else:
            row[desc] = new

    def add_element_term(self, elem: GrassmannElement, dtau: int, j: int, k: int, coeff: complex = 1.0) -> None:
        """One catalog entry with a Grassmann-element prefactor."""
        for mask, c in elem.items():
            self.add_term(mask, dtau, j, k, c * coeff)

    def _blank(self) -> "SuperFunction":
        return SuperFunction(
            self.gens,
            self.ctx,
            self.hbar,
            self.kind,
            self.exp_coeff,
            self.hbar_tau_rate,
            slots=self.slots,
        )

    def copy(self) -> "SuperFunction":
        out = self._blank()
        out.terms = {m: dict(row) for m, row in self.terms.items()}
        return out

    def _check_compatible(self, other: "SuperFunction") -> None:
        if self.gens != other.gens:
            raise GeneratorMismatchError("functions use different generator sets")
        same = (
            self.ctx == other.ctx
            and self.hbar == other.hbar
            and self.kind == other.kind
            and self.exp_coeff == other.exp_coeff
            and self.hbar_tau_rate == other.hbar_tau_rate
        )
        if not same:
            raise ValueError("functions carry different analytic metadata")

    # -- linear structure ---------------------------------------------------

    def __add__(self, other: "SuperFunction") -> "SuperFunction":
        if not isinstance(other, SuperFunction):
            return NotImplemented
        self._check_compatible(other)
        out = self.copy()
        for mask, row in other.terms.items():
            for desc, coeff in row.items():
                out.add_term(mask, desc.dtau, desc.j, desc.k, coeff)
        return out

    def __sub__(self, other: "SuperFunction") -> "SuperFunction":
        if not isinstance(other, SuperFunction):
            return NotImplemented
        return self + other.scale(-1.0)

    def __neg__(self) -> "SuperFunction":
        return self.scale(-1.0)

    def scale(self, c: complex) -> "SuperFunction":
        out = self._blank()
        if c == 0:
            return out
        out.terms = {
            mask: {desc: coeff * c for desc, coeff in row.items()}
            for mask, row in self.terms.items()
        }
        return out

    def parity(self) -> str:
        if not self.terms:
            return "even"
        parities = {m.bit_count() & 1 for m in self.terms}
        if parities == {0}:
            return "even"
        if parities == {1}:
            return "odd"
        return "mixed"

    # -- super-differential operators ---------------------------------------

    def d_hbar(self) -> "SuperFunction":
        out = self._blank()
        for mask, row in self.terms.items():
            for desc, coeff in row.items():
                out.add_term(mask, desc.dtau, desc.j + 1, desc.k, coeff)
        return out

    def d_z1(self) -> "SuperFunction":
        # chain rule through the exponential dressing in z12
        out = self._blank()
        for mask, row in self.terms.items():
            for desc, coeff in row.items():
                out.add_term(mask, desc.dtau, desc.j, desc.k + 1, coeff)
                if self.exp_coeff != 0:
                    out.add_term(mask, desc.dtau, desc.j, desc.k, coeff * self.exp_coeff)
        return out

    def d_z2(self) -> "SuperFunction":
        return self.d_z1().scale(-1.0)

    def d_tau(self) -> "SuperFunction":
        """Total modulus derivative, honouring modulus-dependent hbar."""
        out = self._blank()
        rate = self.hbar_tau_rate
        for mask, row in self.terms.items():
            for desc, coeff in row.items():
                out.add_term(mask, desc.dtau + 1, desc.j, desc.k, coeff)
                if rate != 0:
                    out.add_term(mask, desc.dtau, desc.j + 1, desc.k, coeff * rate)
        return out

    def d_generator(self, g) -> "SuperFunction":
        """Left derivative with respect to one odd generator."""
        bit = 1 << self.gens.index_of(g)
        below = bit - 1
        out = self._blank()
        for mask, row in self.terms.items():
            if not mask & bit:
                continue
            sign = -1.0 if (mask & below).bit_count() & 1 else 1.0
            nm = mask ^ bit
            for desc, coeff in row.items():
                out.add_term(nm, desc.dtau, desc.j, desc.k, sign * coeff)
        return out

    def lmul(self, elem) -> "SuperFunction":
        """Left multiplication by a Grassmann element (or scalar)."""
        if isinstance(elem, (int, float, complex)):
            return self.scale(elem)
        elem = _as_element(self.gens, elem)
        out = self._blank()
        for emask, ecoeff in elem.items():
            for mask, row in self.terms.items():
                if emask & mask:
                    continue
                sign = self.gens.sign(emask, mask)
                nm = emask | mask
                for desc, coeff in row.items():
                    out.add_term(nm, desc.dtau, desc.j, desc.k, sign * ecoeff * coeff)
        return out

    # -- evaluation ----------------------------------------------------------

    def evaluate(
        self,
        z1: complex,
        z2: complex,
        soul: GrassmannElement | None = None,
        reduce: bool = True,
    ) -> GrassmannElement:
        """Numeric value at (z1, z2) as a GrassmannElement.

        soul, if given, is an even nilpotent element added to z12; the
        coefficient functions are extended to it by their finite Taylor
        expansion, with derivatives skipped whenever the accompanying
        Grassmann product already vanished.
        """
        gens = self.gens
        z12 = complex(z1) - complex(z2)

        powers: list[GrassmannElement] = [gens.one()]
        if soul is not None:
            if soul.gens != gens:
                raise GeneratorMismatchError("soul built over a different generator set")
            if soul.parity() != "even" or soul.body != 0:
                raise ValueError("soul must be even with no scalar part")
            p = soul
            while not p.is_zero():
                powers.append(p)
                p = p * soul

        # plan: (prefactor element, dtau, j, k, scalar coefficient)
        plan: list[tuple[GrassmannElement, int, int, int, complex]] = []
        for mask, row in self.terms.items():
            base = gens.basis_element(mask)
            factorial = 1.0
            for m, power in enumerate(powers):
                if m:
                    factorial *= m
                pre = base * power if m else base
                if pre.is_zero():
                    break
                for desc, coeff in row.items():
                    for i in range(m + 1):
                        weight = self.exp_coeff ** (m - i)
                        if weight == 0:
                            continue
                        plan.append(
                            (pre, desc.dtau, desc.j, desc.k + i, coeff * comb(m, i) * weight / factorial)
                        )
        if not plan:
            return gens.zero()

        tables = self._tables(z12, plan, reduce)
        acc: dict[int, complex] = {}
        for pre, dtau, j, k, scalar in plan:
            value = tables[dtau][j, k] if dtau else tables[0][j, k]
            if value == 0:
                continue
            for pmask, pcoeff in pre.items():
                acc[pmask] = acc.get(pmask, 0j) + pcoeff * scalar * value
        envelope = cmath.exp(self.exp_coeff * z12) if self.exp_coeff != 0 else 1.0
        return GrassmannElement(gens, {m: c * envelope for m, c in acc.items()})

    def _tables(self, z12: complex, plan, reduce: bool):
        if self.kind == "elliptic":
            need: dict[int, tuple[int, int]] = {}
            for _, dtau, j, k, _ in plan:
                pj, pk = need.get(dtau, (0, 0))
                need[dtau] = (max(pj, j), max(pk, k))
            tables = {}
            for dtau, (mj, mk) in need.items():
                if dtau == 0:
                    tables[0] = phi_derivs(self.hbar, z12, self.ctx, mj, mk, reduce=reduce)
                else:
                    tables[1] = phi_tau_derivs(self.hbar, z12, self.ctx, mj, mk)
            return tables
        # degenerate kinds: fill exactly the requested cells; any modulus
        # derivative vanishes because it equals a mixed derivative of a
        # separated function
        fn = phi_trig if self.kind == "trig" else phi_rat
        cells: dict[int, dict[tuple[int, int], complex]] = {}
        for _, dtau, j, k, _ in plan:
            tab = cells.setdefault(dtau, {})
            if (j, k) in tab:
                continue
            if dtau:
                tab[j, k] = 0j
            else:
                tab[j, k] = fn(self.hbar, z12, j, k, self.ctx.pole_radius)
        return cells

    def __repr__(self) -> str:
        n = sum(len(r) for r in self.terms.values())
        return f"<SuperFunction kind={self.kind} hbar={self.hbar} terms={n}>"


# -- constructors -------------------------------------------------------------


def super_phi(
    hbar: complex,
    mu,
    p1: SuperPoint,
    p2: SuperPoint,
    omega,
    ctx: EllipticContext,
    gens: GeneratorSet | None = None,
    kind: str = "elliptic",
    exp_coeff: complex = 0.0,
    hbar_tau_rate: complex = 0.0,
    tau_term: str = "dtau",
    check_slots: bool = True,
) -> SuperFunction:
    """Odd Grassmann-valued extension of the elliptic kernel.

    Five terms: (zeta1 - zeta2) times the kernel, omega times its parameter
    derivative, 2 pi i zeta1 zeta2 omega times its modulus derivative,
    zeta1 zeta2 mu times the parameter derivative, and half
    (zeta1 + zeta2) mu omega times the second parameter derivative.
    mu = None drops the two mu-terms (the truncated variant).

    tau_term selects the representation of the third term: "dtau" keeps the
    modulus descriptor, "full" adds hbar_tau_rate times a parameter
    derivative (total modulus derivative for modulus-dependent parameter
    shifts), "heat" replaces it by the mixed-derivative form of the flow
    identity, including the chain term through the exponential dressing.
    """
    if gens is None:
        gens = default_generators()
    zeta1 = p1.resolve(gens)
    zeta2 = p2.resolve(gens)
    omega_e = _odd_element(gens, omega, "omega")
    mu_e = None if mu is None else _odd_element(gens, mu, "mu")
    if check_slots:
        # catches accidental slot reuse; shifted-slot rebuilds disable it
        used = [("zeta1", zeta1), ("zeta2", zeta2), ("omega", omega_e)]
        if mu_e is not None:
            used.append(("mu", mu_e))
        combined = 0
        for label, elem in used:
            m = _support_mask(elem)
            if m & combined:
                raise ValueError(f"generator collision: {label} overlaps another slot")
            combined |= m

    f = SuperFunction(
        gens,
        ctx,
        hbar,
        kind=kind,
        exp_coeff=exp_coeff,
        hbar_tau_rate=hbar_tau_rate,
        slots={"zeta1": zeta1, "zeta2": zeta2, "mu": mu_e, "omega": omega_e},
    )
    zz = zeta1 * zeta2
    f.add_element_term(zeta1 - zeta2, 0, 0, 0)
    f.add_element_term(omega_e, 0, 1, 0)
    zzw = zz * omega_e
    if tau_term == "dtau":
        f.add_element_term(zzw, 1, 0, 0, _TWO_PI_I)
    elif tau_term == "full":
        f.add_element_term(zzw, 1, 0, 0, _TWO_PI_I)
        if hbar_tau_rate != 0:
            f.add_element_term(zzw, 0, 1, 0, _TWO_PI_I * hbar_tau_rate)
    elif tau_term == "heat":
        f.add_element_term(zzw, 0, 1, 1)
        if exp_coeff != 0:
            f.add_element_term(zzw, 0, 1, 0, exp_coeff)
    else:
        raise ValueError("tau_term must be 'dtau', 'full' or 'heat'")
    if mu_e is not None:
        f.add_element_term(zz * mu_e, 0, 1, 0)
        f.add_element_term((zeta1 + zeta2) * mu_e * omega_e, 0, 2, 0, 0.5)
    return f


def super_phi_truncated(
    hbar: complex,
    p1: SuperPoint,
    p2: SuperPoint,
    omega,
    ctx: EllipticContext,
    gens: GeneratorSet | None = None,
    kind: str = "elliptic",
    exp_coeff: complex = 0.0,
    hbar_tau_rate: complex = 0.0,
    tau_term: str = "dtau",
) -> SuperFunction:
    """The three-term variant: full function with the odd parameter dropped."""
    return super_phi(
        hbar,
        None,
        p1,
        p2,
        omega,
        ctx,
        gens=gens,
        kind=kind,
        exp_coeff=exp_coeff,
        hbar_tau_rate=hbar_tau_rate,
        tau_term=tau_term,
    )


def super_phi_degenerate(
    kind: str,
    hbar: complex,
    mu,
    p1: SuperPoint,
    p2: SuperPoint,
    omega,
    gens: GeneratorSet | None = None,
    pole_radius: float = 1e-3,
) -> GrassmannElement:
    """Closed-form value of the degenerate function, bypassing descriptors.

    Hyperbolic: (z1-z2 odd difference) (coth h + coth z12)
    - (omega + z1 z2 mu)/sinh^2 h + (z1+z2) mu omega cosh h / sinh^3 h,
    with the odd partners in place of the shorthand; rational replaces the
    three parameter profiles by 1/h, 1/h^2, 1/h^3.
    """
    if gens is None:
        gens = default_generators()
    if kind not in ("trig", "rational"):
        raise ValueError("degenerate kinds are 'trig' and 'rational'")
    zeta1 = p1.resolve(gens)
    zeta2 = p2.resolve(gens)
    omega_e = _odd_element(gens, omega, "omega")
    mu_e = None if mu is None else _odd_element(gens, mu, "mu")
    z12 = complex(p1.z) - complex(p2.z)
    h = complex(hbar)
    if kind == "trig":
        base = phi_trig(h, z12, 0, 0, pole_radius)
        d1 = phi_trig(h, z12, 1, 0, pole_radius)
        half_d2 = 0.5 * phi_trig(h, z12, 2, 0, pole_radius)
    else:
        base = phi_rat(h, z12, 0, 0, pole_radius)
        d1 = phi_rat(h, z12, 1, 0, pole_radius)
        half_d2 = 0.5 * phi_rat(h, z12, 2, 0, pole_radius)
    out = (zeta1 - zeta2) * base + omega_e * d1
    if mu_e is not None:
        out = out + zeta1 * zeta2 * mu_e * d1
        out = out + (zeta1 + zeta2) * mu_e * omega_e * half_d2
    return out


# -- operator dispatcher -------------------------------------------------------


def apply_super_operator(f: SuperFunction, op: str, arg=None) -> SuperFunction:
    """Apply one named super-differential operation.

    Supported: d_omega, d_zeta1, d_zeta2, d_zeta (explicit generator in
    arg), mul_zeta / mul_mu / mul (element or generator in arg; slot
    defaults for zeta1/mu), d_z1, d_z2, d_hbar, d_tau.
    """
    if op == "d_hbar":
        return f.d_hbar()
    if op == "d_z1":
        return f.d_z1()
    if op == "d_z2":
        return f.d_z2()
    if op == "d_tau":
        return f.d_tau()
    if op == "d_omega":
        return f.d_generator(_slot_generator(f, "omega"))
    if op == "d_zeta1":
        return f.d_generator(_slot_generator(f, "zeta1"))
    if op == "d_zeta2":
        return f.d_generator(_slot_generator(f, "zeta2"))
    if op == "d_zeta":
        if arg is None:
            raise ValueError("d_zeta needs a generator argument")
        return f.d_generator(arg)
    if op in ("mul_zeta", "mul_mu", "mul"):
        if arg is None:
            arg = f.slots.get("zeta1" if op == "mul_zeta" else "mu")
        if arg is None:
            raise ValueError(f"{op} needs an element argument")
        return f.lmul(arg)
    raise ValueError(f"unknown operator {op!r}")


def _slot_generator(f: SuperFunction, slot: str):
    elem = f.slots.get(slot)
    if elem is None:
        raise ValueError(f"function has no {slot} slot")
    support = list(elem.items())
    if len(support) != 1 or support[0][0].bit_count() != 1 or support[0][1] != 1:
        raise ValueError(f"{slot} slot is not a single generator")
    return support[0][0].bit_length() - 1


# -- residual checkers ---------------------------------------------------------


def _pair_args(hbars, mus, truncated: bool):
    h1, h2 = (complex(h) for h in hbars)
    if truncated:
        return h1, h2, None, None, None
    mu1, mu2 = mus
    return h1, h2, mu1, mu2, True


def fay_residual(
    hbars: Sequence[complex],
    mus,
    points: Sequence[SuperPoint],
    omega,
    ctx: EllipticContext,
    gens: GeneratorSet | None = None,
    kind: str = "elliptic",
    truncated: bool = False,
    return_scale: bool = False,
):
    """Three-term quadratic residual of the genus-one addition identity.

    Products are taken in the stated left-to-right order inside the
    Grassmann algebra; the exact identity makes the sum vanish.  With
    return_scale the largest product magnitude is reported for scaling.
    """
    if gens is None:
        gens = default_generators()
    p1, p2, p3 = points
    h1, h2 = (complex(h) for h in hbars)
    if truncated:
        mu1 = mu2 = None
    else:
        mu1 = _odd_element(gens, mus[0], "mu1")
        mu2 = _odd_element(gens, mus[1], "mu2")

    def make(h, mu, pa, pb):
        return super_phi(h, mu, pa, pb, omega, ctx, gens=gens, kind=kind)

    def diff(a, b):
        if a is None and b is None:
            return None
        if a is None:
            return -b
        if b is None:
            return a
        return a - b

    f1a = make(h1, mu1, p1, p2).evaluate(p1.z, p2.z)
    f1b = make(h2, mu2, p2, p3).evaluate(p2.z, p3.z)
    f2a = make(-h2, diff(None, mu2), p3, p1).evaluate(p3.z, p1.z)
    f2b = make(h1 - h2, diff(mu1, mu2), p1, p2).evaluate(p1.z, p2.z)
    f3a = make(h2 - h1, diff(mu2, mu1), p2, p3).evaluate(p2.z, p3.z)
    f3b = make(-h1, diff(None, mu1), p3, p1).evaluate(p3.z, p1.z)

    prod1 = f1a * f1b
    prod2 = f2a * f2b
    prod3 = f3a * f3b
    residual = prod1 + prod2 + prod3
    if return_scale:
        scale = max(prod1.max_abs(), prod2.max_abs(), prod3.max_abs())
        return residual, scale
    return residual


def heat_residual(
    hbar: complex,
    mu,
    p1: SuperPoint,
    p2: SuperPoint,
    omega,
    ctx: EllipticContext,
    gens: GeneratorSet | None = None,
    kind: str = "elliptic",
    truncated: bool = False,
    return_scale: bool = False,
):
    """Left-minus-right of the odd heat relation, evaluated at the points.

    Left: (d_omega + 2 pi i (zeta1 + zeta2) d_tau).  Right:
    (d_zeta1 + zeta1 d_z1 - mu d_hbar / 2) d_hbar, with the mu term absent
    for the truncated variant.  Modulus descriptors evaluate via the direct
    modulus series while the right side uses only parameter/argument
    derivatives, so the residual genuinely tests the relation.
    """
    if gens is None:
        gens = default_generators()
    if truncated:
        f = super_phi_truncated(hbar, p1, p2, omega, ctx, gens=gens, kind=kind)
    else:
        f = super_phi(hbar, mu, p1, p2, omega, ctx, gens=gens, kind=kind)
    zeta1 = f.slots["zeta1"]
    zeta2 = f.slots["zeta2"]
    lhs = apply_super_operator(f, "d_omega") + f.d_tau().lmul(zeta1 + zeta2).scale(_TWO_PI_I)
    dh = f.d_hbar()
    rhs = apply_super_operator(dh, "d_zeta1") + dh.d_z1().lmul(zeta1)
    if not truncated:
        rhs = rhs - dh.d_hbar().lmul(f.slots["mu"]).scale(0.5)
    lval = lhs.evaluate(p1.z, p2.z)
    rval = rhs.evaluate(p1.z, p2.z)
    residual = lval - rval
    if return_scale:
        return residual, max(lval.max_abs(), rval.max_abs(), 1e-300)
    return residual


def transition_factor(
    gens: GeneratorSet,
    hbar: complex,
    mu,
    zeta,
    omega,
    slot: int,
) -> GrassmannElement:
    """Multiplier acquired under the modulus-direction supertranslation.

    Slot 1 carries exp(-2 pi i (hbar - mu zeta1 - pi i mu omega)), slot 2
    the reciprocal sign pattern with zeta2.  mu = None gives the plain
    exp(-/+ 2 pi i hbar) of the truncated variant.
    """
    sign = -1.0 if slot == 1 else 1.0
    exponent = gens.scalar(sign * _TWO_PI_I * complex(hbar))
    if mu is not None:
        mu_e = _odd_element(gens, mu, "mu")
        zeta_e = _odd_element(gens, zeta, "zeta")
        omega_e = _odd_element(gens, omega, "omega")
        inner = mu_e * zeta_e + (mu_e * omega_e) * (1j * math.pi)
        exponent = exponent + inner * (-sign * _TWO_PI_I)
    return grassmann_exp(exponent)


def periodicity_residual(
    direction,
    slot: int,
    hbar: complex,
    mu,
    p1: SuperPoint,
    p2: SuperPoint,
    omega,
    ctx: EllipticContext,
    gens: GeneratorSet | None = None,
    truncated: bool = False,
    return_scale: bool = False,
):
    """Shifted value minus multiplier times value, per lattice direction.

    direction 1 shifts the chosen even coordinate by one (multiplier one);
    direction "tau" applies the full supertranslation: even coordinate
    gains the modulus plus 2 pi i zeta omega, the odd partner gains
    2 pi i omega, and the reference side is scaled by the transition
    factor.  Both sides evaluate without lattice reduction, otherwise the
    check would assume what it verifies.
    """
    if gens is None:
        gens = default_generators()
    if slot not in (1, 2):
        raise ValueError("slot must be 1 or 2")
    mu_for_build = None if truncated else mu

    def build(pa, pb, strict=True):
        return super_phi(hbar, mu_for_build, pa, pb, omega, ctx, gens=gens, check_slots=strict)

    base = build(p1, p2)
    base_val = base.evaluate(p1.z, p2.z, reduce=False)

    if direction in (1, "1"):
        if slot == 1:
            shifted = base.evaluate(p1.z + 1.0, p2.z, reduce=False)
        else:
            shifted = base.evaluate(p1.z, p2.z + 1.0, reduce=False)
        residual = shifted - base_val
        if return_scale:
            return residual, max(shifted.max_abs(), base_val.max_abs(), 1e-300)
        return residual

    if direction != "tau":
        raise ValueError("direction must be 1 or 'tau'")

    omega_e = _odd_element(gens, omega, "omega")
    tau = ctx.tau
    if slot == 1:
        zeta_old = base.slots["zeta1"]
        zeta_new = zeta_old + omega_e * _TWO_PI_I
        shifted_fn = build(SuperPoint(p1.z, zeta_new), p2, strict=False)
        soul = (zeta_old * omega_e) * _TWO_PI_I
        shifted = shifted_fn.evaluate(p1.z + tau, p2.z, soul=soul, reduce=False)
    else:
        zeta_old = base.slots["zeta2"]
        zeta_new = zeta_old + omega_e * _TWO_PI_I
        shifted_fn = build(p1, SuperPoint(p2.z, zeta_new), strict=False)
        # the soul enters z12 = z1 - z2 with a minus sign
        soul = (zeta_old * omega_e) * (-_TWO_PI_I)
        shifted = shifted_fn.evaluate(p1.z, p2.z + tau, soul=soul, reduce=False)

    factor = transition_factor(
        gens,
        hbar,
        None if truncated else mu,
        base.slots["zeta1" if slot == 1 else "zeta2"],
        omega_e,
        slot,
    )
    reference = factor * base_val
    residual = shifted - reference
    if return_scale:
        return residual, max(shifted.max_abs(), reference.max_abs(), 1e-300)
    return residual
