"""Polynomials over GF(2).

A polynomial is stored as a Python integer bit mask: bit ``i`` is the
coefficient of ``x**i``.  ``x^2 + x + 1`` is ``0b111`` and serializes as
``"0x7"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import InvalidArgumentError, InvalidModulusError

#: Degree reported for the zero polynomial.
ZERO_DEGREE = -1


@dataclass(frozen=True, order=True)
class Poly:
    """Immutable polynomial over GF(2)."""

    bits: int = 0

    def __post_init__(self):
        if not isinstance(self.bits, int) or isinstance(self.bits, bool):
            raise InvalidArgumentError(f"Poly bits must be an int, got {self.bits!r}")
        if self.bits < 0:
            raise InvalidArgumentError("Poly bits must be non-negative")

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[int]) -> "Poly":
        """Build from coefficients ``c_0, c_1, ...`` (constant term first)."""
        bits = 0
        for i, c in enumerate(coeffs):
            if c not in (0, 1):
                raise InvalidArgumentError(f"coefficient {c!r} is not a GF(2) element")
            bits |= c << i
        return cls(bits)

    @classmethod
    def from_hex(cls, text: str) -> "Poly":
        try:
            return cls(int(text.strip(), 16))
        except ValueError as exc:
            raise InvalidArgumentError(f"not a hexadecimal polynomial mask: {text!r}") from exc

    @classmethod
    def monomial(cls, k: int) -> "Poly":
        return cls(1 << k)

    @property
    def degree(self) -> int:
        return self.bits.bit_length() - 1 if self.bits else ZERO_DEGREE

    @property
    def coeffs(self) -> tuple[int, ...]:
        return tuple((self.bits >> i) & 1 for i in range(self.bits.bit_length()))

    def is_zero(self) -> bool:
        return self.bits == 0

    def hex(self) -> str:
        return hex(self.bits)

    def __add__(self, other: "Poly") -> "Poly":
        return poly_add(self, other)

    __sub__ = __add__

    def __mul__(self, other: "Poly") -> "Poly":
        return Poly(_clmul(self.bits, other.bits))

    def __mod__(self, other: "Poly") -> "Poly":
        if other.is_zero():
            raise ZeroDivisionError("polynomial modulo zero")
        return Poly(_mod(self.bits, other.bits))

    def __bool__(self) -> bool:
        return self.bits != 0

    def __str__(self) -> str:
        if not self.bits:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            if (self.bits >> i) & 1:
                terms.append("1" if i == 0 else "x" if i == 1 else f"x^{i}")
        return " + ".join(terms)


# ---- integer-mask primitives ------------------------------------------------


def _clmul(a: int, b: int) -> int:
    """Carry-less product of two masks."""
    if a.bit_length() > b.bit_length():
        a, b = b, a
    c = 0
    while a:
        if a & 1:
            c ^= b
        a >>= 1
        b <<= 1
    return c


def _mod(a: int, p: int) -> int:
    dp = p.bit_length()
    while a.bit_length() >= dp:
        a ^= p << (a.bit_length() - dp)
    return a


def _mulmod(a: int, b: int, p: int) -> int:
    dp = p.bit_length() - 1
    a = _mod(a, p)
    b = _mod(b, p)
    top = 1 << dp
    c = 0
    while b:
        if b & 1:
            c ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= p
    return c


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, _mod(a, b)
    return a


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _frobenius(k: int, p: int) -> int:
    """x^(2^k) mod p."""
    r = _mod(0b10, p)
    for _ in range(k):
        r = _mulmod(r, r, p)
    return r


def _is_irreducible_int(p: int) -> bool:
    # Rabin's test: x^(2^m) = x mod p and gcd(x^(2^(m/r)) - x, p) = 1 for primes r | m.
    m = p.bit_length() - 1
    if m == 1:
        return True
    if not p & 1:
        return False
    x = _mod(0b10, p)
    if _frobenius(m, p) != x:
        return False
    for r in _prime_factors(m):
        if _gcd(p, _frobenius(m // r, p) ^ x) != 1:
            return False
    return True


def _laurent_int(u: int, p: int, m: int) -> int:
    """First ``m`` Laurent digits of u/p packed with digit 1 as the most significant bit."""
    dp = p.bit_length() - 1
    top = 1 << dp
    out = 0
    r = u
    for _ in range(m):
        r <<= 1
        out <<= 1
        if r & top:
            out |= 1
            r ^= p
    return out


# ---- public operations ------------------------------------------------------


def poly_add(a: Poly, b: Poly) -> Poly:
    return Poly(a.bits ^ b.bits)


def _check_modulus(p: Poly) -> None:
    if p.degree < 1:
        raise InvalidModulusError(f"modulus must have degree >= 1, got {p}")


def poly_mulmod(a: Poly, b: Poly, p: Poly) -> Poly:
    """Return ``(a * b) mod p``."""
    _check_modulus(p)
    return Poly(_mulmod(a.bits, b.bits, p.bits))


def is_irreducible(p: Poly) -> bool:
    if p.degree < 1:
        raise InvalidArgumentError(f"irreducibility is undefined for {p}")
    return _is_irreducible_int(p.bits)


def find_irreducible(m: int) -> Poly:
    """Irreducible polynomial of degree ``m`` with the smallest integer encoding."""
    if not isinstance(m, int) or m < 1:
        raise InvalidArgumentError(f"degree must be a positive integer, got {m!r}")
    for bits in range(1 << m, 1 << (m + 1)):
        if _is_irreducible_int(bits):
            return Poly(bits)
    raise AssertionError("unreachable: irreducible polynomials exist in every degree")


def laurent_digits(u: Poly, p: Poly, m: int) -> tuple[int, ...]:
    """Coefficients of ``x^-1, ..., x^-m`` in the Laurent expansion of ``u / p``.

    Parameters
    ----------
    u : Poly
        Numerator, ``deg(u) < deg(p)``.
    p : Poly
        Denominator of degree at least 1.
    m : int
        Number of digits returned.

    Returns
    -------
    tuple of int
        ``(u_1, ..., u_m)`` with entries in {0, 1}.
    """
    _check_modulus(p)
    if u.degree >= p.degree:
        raise InvalidArgumentError(f"numerator degree {u.degree} must be below {p.degree}")
    if m < 0:
        raise InvalidArgumentError("digit count must be non-negative")
    packed = _laurent_int(u.bits, p.bits, m)
    return tuple((packed >> (m - 1 - k)) & 1 for k in range(m))
