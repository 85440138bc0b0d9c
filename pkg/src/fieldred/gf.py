"""Prime fields and explicit extensions F_{p^k}.

Elements are stored as integer codes: the coefficient list ``(c0, ..., c_{k-1})``
of the representative polynomial read as base-p digits, constant term least
significant.  Discrete-log tables are kept as a cache for multiplication; they
never leak into any canonical form.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd

import numpy as np

TABLE_LIMIT = 1024  # full add/mul tables are materialised up to this field size
MAX_FIELD_SIZE = 1 << 20


class FieldError(ValueError):
    """Bad field parameters or mixing elements of different fields."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def prime_power(q: int) -> tuple[int, int]:
    """Return ``(p, h)`` with ``q == p**h``; raise if q is not a prime power."""
    if q < 2:
        raise FieldError(f"{q} is not a prime power")
    for p in prime_factors(q):
        h, m = 0, q
        while m % p == 0:
            m //= p
            h += 1
        if m == 1:
            return p, h
    raise FieldError(f"{q} is not a prime power")


# -- polynomials over F_p as coefficient tuples, constant term first ---------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mod(a, m, p: int) -> list[int]:
    a = _trim([c % p for c in a])
    m = _trim([c % p for c in m])
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        coef = a[-1] * inv_lead % p
        shift = len(a) - len(m)
        for i, c in enumerate(m):
            a[shift + i] = (a[shift + i] - coef * c) % p
        _trim(a)
    return a


def poly_mul(a, b, p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _monic_polys(p: int, deg: int):
    for code in range(p**deg):
        coeffs = [(code // p**i) % p for i in range(deg)]
        yield coeffs + [1]


def is_irreducible(modulus, p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    m = _trim([c % p for c in modulus])
    deg = len(m) - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for f in _monic_polys(p, d):
            if not poly_mod(m, f, p):
                return False
    return True


def least_irreducible(p: int, k: int) -> tuple[int, ...]:
    for f in _monic_polys(p, k):
        if is_irreducible(f, p):
            return tuple(f)
    raise FieldError(f"no irreducible polynomial of degree {k} over F_{p}")  # pragma: no cover


# -- field context -----------------------------------------------------------

class ExtFieldCtx:
    """The field F_{p^k} = F_p[x]/(modulus) with element codes ``0 .. p^k - 1``."""

    def __init__(self, p: int, k: int, modulus: tuple[int, ...], generator: int | None = None):
        self.p = p
        self.k = k
        self.modulus = tuple(modulus)
        self.size = p**k
        self.order = self.size - 1
        self._powers = np.array([p**i for i in range(k)], dtype=np.int64)
        codes = np.arange(self.size, dtype=np.int64)
        self.digits = (codes[:, None] // self._powers[None, :]) % p
        self._build_tables(generator)

    # construction ------------------------------------------------------
    def _mulx_matrix(self) -> np.ndarray:
        p, k = self.p, self.k
        m = np.zeros((k, k), dtype=np.int64)
        for i in range(k - 1):
            m[i + 1, i] = 1
        for i in range(k):
            m[i, k - 1] = (-self.modulus[i]) % p
        return m

    def _mul_matrix(self, code: int) -> np.ndarray:
        p, k = self.p, self.k
        mx = self._mulx_matrix()
        acc = np.zeros((k, k), dtype=np.int64)
        power = np.eye(k, dtype=np.int64)
        for c in self.digits[code]:
            acc = (acc + c * power) % p
            power = (mx @ power) % p
        return acc

    def _poly_pow(self, code: int, e: int) -> int:
        p = self.p
        base = [int(c) for c in self.digits[code]]
        result = [1]
        while e:
            if e & 1:
                result = poly_mod(poly_mul(result, base, p), self.modulus, p)
            base = poly_mod(poly_mul(base, base, p), self.modulus, p)
            e >>= 1
        return sum(c * p**i for i, c in enumerate(result))

    def _is_primitive(self, code: int) -> bool:
        if code == 0:
            return False
        if self._poly_pow(code, self.order) != 1:
            return False
        return all(self._poly_pow(code, self.order // ell) != 1 for ell in prime_factors(self.order))

    def _build_tables(self, generator):
        p, n = self.p, self.order
        if generator is None:
            generator = next(c for c in range(1, self.size) if self._is_primitive(c))
        elif not self._is_primitive(generator):
            raise FieldError(f"element {generator} does not have order {n}")
        self.generator = int(generator)
        # powers of g, blockwise through the multiplication-by-g^B matrices
        block = max(1, int(np.ceil(np.sqrt(n))))
        mg = self._mul_matrix(self.generator)
        first = np.zeros((block, self.k), dtype=np.int64)
        v = np.zeros(self.k, dtype=np.int64)
        v[0] = 1
        for i in range(block):
            first[i] = v
            v = (mg @ v) % p
        mb = np.eye(self.k, dtype=np.int64)
        for _ in range(block):
            mb = (mg @ mb) % p
        chunks = []
        cur = np.eye(self.k, dtype=np.int64)
        for _ in range(0, n, block):
            chunks.append((first @ cur.T) % p)
            cur = (mb @ cur) % p
        exp_digits = np.concatenate(chunks)[:n]
        self.exp = exp_digits @ self._powers
        if len(np.unique(self.exp)) != n:
            raise FieldError("modulus is not irreducible")  # pragma: no cover
        self.log = np.zeros(self.size, dtype=np.int64)
        self.log[self.exp] = np.arange(n)
        codes = np.arange(self.size, dtype=np.int64)
        self.neg_t = self.from_digits((-self.digits) % p)
        self.inv_t = np.zeros(self.size, dtype=np.int64)
        self.inv_t[1:] = self.exp[(-self.log[1:]) % n]
        self.frob_t = self.frob_array(codes, 1)
        if self.size <= TABLE_LIMIT:
            self.add_t = self._add_digits(codes[:, None], codes[None, :])
            self.mul_t = self._mul_logs(codes[:, None], codes[None, :])
        else:
            self.add_t = None
            self.mul_t = None

    # identity / formatting ---------------------------------------------
    def _key(self):
        return (self.p, self.k, self.modulus)

    def __eq__(self, other):
        return isinstance(other, ExtFieldCtx) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"ExtFieldCtx({self.descriptor()})"

    def descriptor(self) -> str:
        return f"{self.p}^{self.k}:" + ",".join(str(c) for c in self.modulus)

    # element conversion --------------------------------------------------
    def from_digits(self, digits) -> np.ndarray:
        return np.asarray(digits, dtype=np.int64) @ self._powers

    def element(self, coeffs) -> int:
        coeffs = list(coeffs)
        if len(coeffs) > self.k or any(not 0 <= c < self.p for c in coeffs):
            raise FieldError(f"bad coefficient list {coeffs} for {self.descriptor()}")
        return int(sum(c * self.p**i for i, c in enumerate(coeffs)))

    def coeffs(self, code: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self.digits[code])

    def fe(self, code: int) -> "Fe":
        return Fe(self, int(code))

    def format(self, code: int) -> str:
        return ",".join(str(c) for c in self.coeffs(code))

    # vectorised arithmetic on code arrays --------------------------------
    def _add_digits(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return a ^ b
        return self.from_digits((self.digits[a] + self.digits[b]) % self.p)

    def _mul_logs(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[(self.log[a] + self.log[b]) % self.order]
        return np.where((a == 0) | (b == 0), 0, out)

    def add(self, a, b):
        if self.add_t is not None:
            return self.add_t[a, b]
        return self._add_digits(a, b)

    def neg(self, a):
        return self.neg_t[a]

    def sub(self, a, b):
        return self.add(a, self.neg_t[b])

    def mul(self, a, b):
        if self.mul_t is not None:
            return self.mul_t[a, b]
        return self._mul_logs(a, b)

    def inv(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        return self.inv_t[a]

    def pow(self, a, e: int):
        a = np.asarray(a, dtype=np.int64)
        if e == 0:
            return np.ones_like(a)
        out = self.exp[(self.log[a] * (e % self.order)) % self.order]
        if e < 0:
            out = np.where(a == 0, -1, out)
        return np.where(a == 0, 0, out)

    def frob_array(self, a, i: int):
        """x -> x^(p^i) elementwise; ``i`` is reduced mod k."""
        a = np.asarray(a, dtype=np.int64)
        e = pow(self.p, i % self.k, self.order) if self.order > 1 else 1
        out = self.exp[(self.log[a] * e) % self.order]
        return np.where(a == 0, 0, out)

    def sum(self, a, axis: int = -1):
        a = np.moveaxis(np.asarray(a, dtype=np.int64), axis, -1)
        acc = np.zeros(a.shape[:-1], dtype=np.int64)
        for j in range(a.shape[-1]):
            acc = self.add(acc, a[..., j])
        return acc

    def elem_order(self, a: int) -> int:
        if a == 0:
            raise FieldError("zero has no multiplicative order")
        return self.order // gcd(int(self.log[a]), self.order)

    def subfield_elements(self, d: int) -> np.ndarray:
        if d <= 0 or self.k % d:
            raise FieldError(f"{d} does not divide {self.k}")
        codes = np.arange(self.size)
        return codes[self.frob_array(codes, d) == codes]


@lru_cache(maxsize=None)
def build_ext_field(p: int, k: int, modulus: tuple[int, ...] | None = None) -> ExtFieldCtx:
    """Build F_{p^k}; default modulus is the lexicographically least monic irreducible."""
    if not is_prime(p):
        raise FieldError(f"{p} is not prime")
    if k < 1:
        raise FieldError("extension degree must be positive")
    if p**k > MAX_FIELD_SIZE:
        raise FieldError(f"field of size {p}^{k} exceeds supported range")
    if modulus is None:
        modulus = least_irreducible(p, k)
    else:
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise FieldError(f"modulus must be monic of degree {k}")
        if not is_irreducible(modulus, p):
            raise FieldError(f"modulus {modulus} is reducible over F_{p}")
    return ExtFieldCtx(p, k, modulus)


def field_of_order(q: int) -> ExtFieldCtx:
    p, h = prime_power(q)
    return build_ext_field(p, h)


def parse_ctx(text: str) -> ExtFieldCtx:
    """Inverse of :meth:`ExtFieldCtx.descriptor` (``"p^k:m0,m1,...,mk"``)."""
    try:
        head, mod = text.strip().split(":")
        p, k = (int(x) for x in head.split("^"))
        modulus = tuple(int(c) for c in mod.split(","))
    except ValueError as exc:
        raise FieldError(f"bad field descriptor {text!r}") from exc
    return build_ext_field(p, k, modulus)


# -- elements ----------------------------------------------------------------

@dataclass(frozen=True)
class Fe:
    ctx: ExtFieldCtx
    code: int

    def __post_init__(self):
        if not 0 <= self.code < self.ctx.size:
            raise FieldError(f"code {self.code} outside {self.ctx.descriptor()}")

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.ctx.coeffs(self.code)

    @property
    def ctx_id(self) -> str:
        return self.ctx.descriptor()

    def _other(self, other) -> int:
        if isinstance(other, Fe):
            if other.ctx != self.ctx:
                raise FieldError("elements belong to different fields")
            return other.code
        if isinstance(other, int):
            return int(other) % self.ctx.p  # prime-field constant
        return NotImplemented

    def __add__(self, other):
        b = self._other(other)
        return Fe(self.ctx, int(self.ctx.add(self.code, b)))

    __radd__ = __add__

    def __neg__(self):
        return Fe(self.ctx, int(self.ctx.neg_t[self.code]))

    def __sub__(self, other):
        b = self._other(other)
        return Fe(self.ctx, int(self.ctx.sub(self.code, b)))

    def __mul__(self, other):
        b = self._other(other)
        return Fe(self.ctx, int(self.ctx.mul(self.code, b)))

    __rmul__ = __mul__

    def inverse(self) -> "Fe":
        if self.code == 0:
            raise ZeroDivisionError("inverse of zero")
        return Fe(self.ctx, int(self.ctx.inv_t[self.code]))

    def __truediv__(self, other):
        b = self._other(other)
        return self * Fe(self.ctx, b).inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return Fe(self.ctx, int(self.ctx.pow(self.code, e)))

    def frobenius(self, i: int = 1) -> "Fe":
        return Fe(self.ctx, int(self.ctx.frob_array(self.code, i)))

    def is_zero(self) -> bool:
        return self.code == 0

    def __str__(self):
        return self.ctx.format(self.code)


def fe_mul(a: Fe, b: Fe) -> Fe:
    return a * b


def fe_inv(a: Fe) -> Fe:
    return a.inverse()


def frobenius(a: Fe, i: int) -> Fe:
    if i < 0:
        raise FieldError("Frobenius exponent must be non-negative")
    return a.frobenius(i)


def find_generator(ctx: ExtFieldCtx) -> Fe:
    """Least element (by code) of multiplicative order p^k - 1."""
    for code in range(1, ctx.size):
        if ctx.elem_order(code) == ctx.order:
            return Fe(ctx, code)
    raise FieldError("no generator")  # pragma: no cover


def in_subfield(a: Fe, d: int) -> bool:
    if d <= 0 or a.ctx.k % d:
        raise FieldError(f"{d} does not divide {a.ctx.k}")
    return a.frobenius(d).code == a.code


def parse_fe(ctx: ExtFieldCtx, text: str) -> Fe:
    coeffs = [int(c) for c in text.strip().split(",")]
    if len(coeffs) != ctx.k:
        raise FieldError(f"expected {ctx.k} coefficients, got {text!r}")
    return Fe(ctx, ctx.element(coeffs))


@lru_cache(maxsize=None)
def _embedding(small: ExtFieldCtx, big: ExtFieldCtx) -> np.ndarray:
    if small.p != big.p or big.k % small.k:
        raise FieldError(f"{small!r} is not a subfield of {big!r}")
    ys = np.arange(big.size, dtype=np.int64)
    acc = np.zeros(big.size, dtype=np.int64)
    for c in reversed(small.modulus):
        acc = big.add(big.mul(acc, ys), np.full(big.size, c, dtype=np.int64))
    root = int(np.flatnonzero(acc == 0)[0])
    table = np.zeros(small.size, dtype=np.int64)
    powers = [1]
    for _ in range(1, small.k):
        powers.append(int(big.mul(powers[-1], root)))
    for code in range(small.size):
        val = 0
        for c, pw in zip(small.coeffs(code), powers):
            val = int(big.add(val, big.mul(c, pw)))
        table[code] = val
    table.setflags(write=False)
    return table


def subfield_embedding(small: ExtFieldCtx, big: ExtFieldCtx) -> np.ndarray:
    """Code table of the field embedding small -> big sending x to the least root of small's modulus."""
    return _embedding(small, big)
