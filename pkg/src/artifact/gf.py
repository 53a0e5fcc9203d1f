"""Exact arithmetic in GF(p^k), p odd.

Elements are stored as integers ``0 <= a < q`` whose base-p digits are the
polynomial-basis coefficients, lowest degree first. So in GF(9) with modulus
x^2 + 1 the integer 5 = 2 + 1*3 stands for 2 + x.

Fields with q up to ``TABLE_LIMIT`` get full addition and multiplication
tables (plain lists for scalar work, numpy arrays for vectorised work). Larger
fields fall back to polynomial arithmetic on digit vectors, which is slow but
exact.

The field also remembers ``q0``: equal to q for the linear and symplectic
roles, and sqrt(q) when the field carries a unitary (hermitian) structure.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DivisionByZero, FieldMismatch, ParseError

TABLE_LIMIT = 1024


# ---------------------------------------------------------------------------
# polynomials over GF(p), coefficient lists low-to-high

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    a = _trim([x % p for x in a])
    m = _trim([x % p for x in m])
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        c = a[-1] * inv_lead % p
        shift = len(a) - len(m)
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        _trim(a)
    return a


def _pmul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _pgcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a = _trim([x % p for x in a])
    b = _trim([x % p for x in b])
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _xpow_mod(e: int, m: Sequence[int], p: int) -> list[int]:
    """x^e mod m."""
    result = [1]
    base = _pmod([0, 1], m, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), m, p)
        base = _pmod(_pmul(base, base, p), m, p)
        e >>= 1
    return result


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and _prime_factors(n) == [n]


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Rabin's test for a monic polynomial over GF(p)."""
    f = _trim([x % p for x in poly])
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    # x^(p^k) == x mod f
    if _xpow_mod(p ** k, f, p) != _pmod([0, 1], f, p):
        return False
    for r in _prime_factors(k):
        h = _xpow_mod(p ** (k // r), f, p)
        h = h + [0] * max(0, 2 - len(h))
        h[1] = (h[1] - 1) % p
        if len(_pgcd(f, _trim(h), p)) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def canonical_modulus(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically least monic irreducible of degree k (low-to-high order)."""
    if k == 1:
        return (0, 1)
    for head in itertools.product(range(p), repeat=k):
        cand = list(head) + [1]
        if head[0] != 0 and is_irreducible(cand, p):
            return tuple(cand)
    raise ValueError(f"no irreducible polynomial of degree {k} over GF({p})")


# ---------------------------------------------------------------------------

class Field:
    """GF(p^k) with explicit modulus and a distinguished q0."""

    def __init__(self, p: int, k: int = 1, modulus: Sequence[int] | None = None,
                 q0: int | None = None):
        if p % 2 == 0 or not is_prime(p):
            raise ValueError(f"p must be an odd prime, got {p}")
        if k < 1:
            raise ValueError("k must be positive")
        if modulus is None:
            modulus = canonical_modulus(p, k)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree k")
        if not is_irreducible(modulus, p):
            raise ValueError(f"modulus {list(modulus)} is reducible over GF({p})")
        self.p, self.k, self.modulus = p, k, modulus
        self.q = p ** k
        if q0 is None:
            q0 = self.q
        if q0 != self.q and (k % 2 or q0 * q0 != self.q):
            raise ValueError(f"q0={q0} is neither q nor sqrt(q) for q={self.q}")
        self.q0 = q0
        self._pw = [p ** i for i in range(k)]
        self._pw_np = np.array(self._pw, dtype=np.int64)
        # reduction tensor: x^(i+j) mod modulus
        red = np.zeros((2 * k - 1, k), dtype=np.int64)
        for e in range(2 * k - 1):
            red[e, :] = self._xpow_coeffs(e)
        self._red = red
        self.tabled = self.q <= TABLE_LIMIT
        if self.tabled:
            self._build_tables()
        self._frob = None
        self._sfrob = None
        self._gen = None

    # -- construction helpers ------------------------------------------------
    def _xpow_coeffs(self, e: int) -> list[int]:
        r = _xpow_mod(e, self.modulus, self.p)
        return r + [0] * (self.k - len(r))

    def _digits_np(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self._pw_np) % self.p

    def _from_digits_np(self, d: np.ndarray) -> np.ndarray:
        return (np.asarray(d, dtype=np.int64) % self.p) @ self._pw_np

    def _mul_digits(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        da, db = self._digits_np(a), self._digits_np(b)
        k = self.k
        conv = np.zeros(np.broadcast_shapes(da.shape[:-1], db.shape[:-1]) + (2 * k - 1,),
                        dtype=np.int64)
        for i in range(k):
            for j in range(k):
                conv[..., i + j] += da[..., i] * db[..., j]
        conv %= self.p
        return self._from_digits_np(conv @ self._red)

    def _build_tables(self):
        q = self.q
        idx = np.arange(q, dtype=np.int64)
        d = self._digits_np(idx)
        add = self._from_digits_np(d[:, None, :] + d[None, :, :])
        neg = self._from_digits_np(-d)
        if self.k == 1:
            mul = (idx[:, None] * idx[None, :]) % self.p
        else:
            mul = self._mul_digits(idx[:, None], idx[None, :])
        self.ADD = add.astype(np.int32)
        self.MUL = mul.astype(np.int32)
        self.NEG = neg.astype(np.int32)
        sub = add[:, neg]
        self.SUB = sub.astype(np.int32)
        inv = np.zeros(q, dtype=np.int32)
        rows, cols = np.nonzero(mul == 1)
        inv[rows] = cols
        self.INV = inv
        self._add = self.ADD.tolist()
        self._mul = self.MUL.tolist()
        self._sub = self.SUB.tolist()
        self._neg = self.NEG.tolist()
        self._inv = self.INV.tolist()

    # -- identity --------------------------------------------------------------
    def key(self):
        return (self.p, self.k, self.modulus, self.q0)

    def __eq__(self, other):
        return isinstance(other, Field) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        extra = "" if self.q0 == self.q else f", q0={self.q0}"
        return f"GF({self.p}^{self.k}{extra})" if self.k > 1 else f"GF({self.p}{extra})"

    def with_q0(self, q0: int) -> "Field":
        return get_field(self.p, self.k, self.modulus, q0)

    @property
    def unitary(self) -> bool:
        return self.q0 != self.q

    # -- element conversion ------------------------------------------------------
    zero = 0
    one = 1

    def elem(self, coeffs: Sequence[int] | int) -> int:
        """Integer code of the element with the given coefficients (or prime-field int)."""
        if isinstance(coeffs, (int, np.integer)):
            return int(coeffs) % self.p
        coeffs = list(coeffs)
        if len(coeffs) > self.k:
            raise FieldMismatch(f"{len(coeffs)} coefficients for a degree-{self.k} field")
        return sum((int(c) % self.p) * w for c, w in zip(coeffs, self._pw))

    def coeffs(self, a: int) -> list[int]:
        out = []
        for _ in range(self.k):
            a, r = divmod(a, self.p)
            out.append(r)
        return out

    def x(self) -> int:
        """The class of x (the adjoined root); equals 0 stand-in for prime fields."""
        return self.p if self.k > 1 else 0

    def elements(self) -> range:
        return range(self.q)

    def to_int(self, a: int) -> int:
        """Prime-field element as a signed integer in (-p/2, p/2]."""
        if a >= self.p:
            raise FieldMismatch("not a prime-field element")
        return a if a <= self.p // 2 else a - self.p

    # -- scalar arithmetic ---------------------------------------------------------
    def add(self, a: int, b: int) -> int:
        if self.tabled:
            return self._add[a][b]
        return int(self._from_digits_np(self._digits_np(a) + self._digits_np(b)))

    def sub(self, a: int, b: int) -> int:
        if self.tabled:
            return self._sub[a][b]
        return int(self._from_digits_np(self._digits_np(a) - self._digits_np(b)))

    def neg(self, a: int) -> int:
        if self.tabled:
            return self._neg[a]
        return int(self._from_digits_np(-self._digits_np(a)))

    def mul(self, a: int, b: int) -> int:
        if self.tabled:
            return self._mul[a][b]
        if self.k == 1:
            return a * b % self.p
        return int(self._mul_digits(np.int64(a), np.int64(b)))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        if self.tabled:
            return self._inv[a]
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def from_int(self, m: int) -> int:
        return m % self.p

    def frob(self, a: int) -> int:
        """a -> a^q0 (the form automorphism; identity when q0 = q)."""
        if self.q0 == self.q:
            return a
        if self._frob is None:
            if self.tabled:
                self._frob = [self.pow(b, self.q0) for b in range(self.q)]
            else:
                return self.pow(a, self.q0)
        return self._frob[a]

    def trace(self, a: int) -> int:
        """a + a^q0."""
        return self.add(a, self.frob(a))

    def sqrt_frob(self, a: int) -> int:
        """a -> a^sqrt(q), defined whenever q is a square (independently of q0)."""
        r = self.sqrt_q()
        if not self.tabled:
            return self.pow(a, r)
        if self._sfrob is None:
            self._sfrob = [self.pow(b, r) for b in range(self.q)]
        return self._sfrob[a]

    def vsqrt_frob(self, a):
        self.sqrt_frob(0)
        if not self.tabled:
            return np.vectorize(self.sqrt_frob, otypes=[np.int64])(a)
        return np.asarray(self._sfrob, dtype=np.int64)[a]

    def is_square_q(self) -> bool:
        return self.k % 2 == 0

    def sqrt_q(self) -> int:
        from .errors import QNotSquare
        if self.k % 2:
            raise QNotSquare(f"q={self.q} is not a square")
        return self.p ** (self.k // 2)

    # -- vectorised arithmetic on integer arrays -------------------------------------
    def vadd(self, a, b):
        if self.tabled:
            return self.ADD[a, b]
        return self._from_digits_np(self._digits_np(a) + self._digits_np(b))

    def vsub(self, a, b):
        if self.tabled:
            return self.SUB[a, b]
        return self._from_digits_np(self._digits_np(a) - self._digits_np(b))

    def vneg(self, a):
        if self.tabled:
            return self.NEG[a]
        return self._from_digits_np(-self._digits_np(a))

    def vmul(self, a, b):
        if self.tabled:
            return self.MUL[a, b]
        if self.k == 1:
            return (np.asarray(a, dtype=np.int64) * b) % self.p
        return self._mul_digits(a, b)

    def vinv(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise DivisionByZero("inverse of zero")
        if self.tabled:
            return self.INV[a]
        return np.vectorize(self.inv, otypes=[np.int64])(a)

    def vfrob(self, a):
        if self.q0 == self.q:
            return np.asarray(a)
        if self.tabled:
            self.frob(0)
            return np.asarray(self._frob, dtype=np.int32)[a]
        return np.vectorize(self.frob, otypes=[np.int64])(a)

    def vsum(self, a, axis=-1):
        """Field sum along an axis."""
        a = np.moveaxis(np.asarray(a), axis, -1)
        if a.shape[-1] == 0:
            return np.zeros(a.shape[:-1], dtype=np.int32)
        if not self.tabled or self.k == 1:
            d = self._digits_np(a).sum(axis=-2)
            return self._from_digits_np(d)
        acc = a[..., 0]
        for i in range(1, a.shape[-1]):
            acc = self.ADD[acc, a[..., i]]
        return acc

    def vdot(self, a, b):
        """Sum over the last axis of a*b (broadcasting)."""
        return self.vsum(self.vmul(a, b), axis=-1)

    def matmul(self, a, b):
        """Matrix product of integer-coded arrays: (..., m, n) @ (..., n, r)."""
        a = np.asarray(a)
        b = np.asarray(b)
        prod = self.vmul(a[..., :, :, None], b[..., None, :, :])
        return self.vsum(prod, axis=-2)

    # -- structure ---------------------------------------------------------------------
    def primitive_element(self) -> int:
        """Least (by integer code) generator of the multiplicative group."""
        if self._gen is None:
            fac = _prime_factors(self.q - 1)
            for g in range(1, self.q):
                if all(self.pow(g, (self.q - 1) // r) != 1 for r in fac):
                    self._gen = g
                    break
        return self._gen

    def order(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("zero has no multiplicative order")
        n = self.q - 1
        for r in _prime_factors(self.q - 1):
            while n % r == 0 and self.pow(a, n // r) == 1:
                n //= r
        return n

    def subfield(self, divisor: int) -> "Subfield":
        if self.k % divisor:
            raise ValueError(f"{divisor} does not divide {self.k}")
        return Subfield(self, divisor)

    def prime_subfield(self) -> "Subfield":
        return Subfield(self, 1)

    def full(self) -> "Subfield":
        return Subfield(self, self.k)

    def subfield_q0(self) -> "Subfield":
        kk = self.k if self.q0 == self.q else self.k // 2
        return Subfield(self, kk)

    def trace_zero_elements(self) -> list[int]:
        return [a for a in range(1, self.q) if self.trace(a) == 0]

    def lambda0(self) -> int:
        """Canonical trace-zero scalar: 1 when q0 = q, else least nonzero element of trace 0."""
        if self.q0 == self.q:
            return 1
        return min(self.trace_zero_elements(), key=lambda a: self.coeffs(a))

    # -- serialisation -------------------------------------------------------------------
    def to_json(self) -> dict:
        return {"p": self.p, "k": self.k, "modulus": list(self.modulus), "q0": self.q0}

    @staticmethod
    def from_json(obj) -> "Field":
        try:
            p = int(obj["p"])
            k = int(obj.get("k", 1))
            modulus = obj.get("modulus")
            q0 = obj.get("q0")
            return get_field(p, k, tuple(modulus) if modulus is not None else None,
                             None if q0 is None else int(q0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad field header: {exc}") from exc

    def elem_to_json(self, a: int) -> list[int]:
        return self.coeffs(a)

    def elem_from_json(self, c) -> int:
        if isinstance(c, int):
            c = [c]
        if not isinstance(c, list) or len(c) != self.k or any(
                not isinstance(x, int) or not 0 <= x < self.p for x in c):
            raise ParseError(f"bad element {c!r} for {self}")
        return self.elem(c)


@lru_cache(maxsize=64)
def _cached_field(p, k, modulus, q0):
    return Field(p, k, modulus, q0)


def get_field(p: int, k: int = 1, modulus: Sequence[int] | None = None,
              q0: int | None = None) -> Field:
    """Cached constructor; fields are immutable so sharing is safe."""
    if modulus is None:
        modulus = canonical_modulus(p, k)
    return _cached_field(p, k, tuple(int(c) for c in modulus), q0)


def GF(q: int, unitary: bool = False) -> Field:
    """Field of order q with canonical modulus; ``unitary`` sets q0 = sqrt(q)."""
    p = _prime_factors(q)
    if len(p) != 1:
        raise ValueError(f"{q} is not a prime power")
    p = p[0]
    k = round(np.log(q) / np.log(p))
    while p ** k < q:
        k += 1
    if p ** k != q:
        raise ValueError(f"{q} is not a prime power")
    q0 = None
    if unitary:
        if k % 2:
            raise ValueError(f"q={q} is not a square")
        q0 = p ** (k // 2)
    return get_field(p, k, None, q0)


@dataclass(frozen=True)
class Subfield:
    """GF(p^divisor) inside a field GF(p^k)."""
    field: Field
    divisor: int

    def __post_init__(self):
        if self.field.k % self.divisor:
            raise ValueError(f"{self.divisor} does not divide {self.field.k}")

    @property
    def size(self) -> int:
        return self.field.p ** self.divisor

    def contains(self, a: int) -> bool:
        return in_subfield_int(self.field, a, self.divisor)

    def elements(self) -> list[int]:
        return _subfield_elements(self.field, self.divisor)

    def nonzero(self) -> list[int]:
        return [a for a in self.elements() if a]

    def __le__(self, other: "Subfield") -> bool:
        return other.divisor % self.divisor == 0

    def __lt__(self, other: "Subfield") -> bool:
        return self <= other and self.divisor != other.divisor

    def join(self, other: "Subfield") -> "Subfield":
        from math import lcm
        return Subfield(self.field, lcm(self.divisor, other.divisor))

    def is_full(self) -> bool:
        return self.divisor == self.field.k

    def index_in_full(self) -> int:
        return self.field.k // self.divisor

    def to_json(self) -> dict:
        return {"p": self.field.p, "k": self.divisor, "size": self.size}

    def __repr__(self):
        return f"GF({self.size})"


@lru_cache(maxsize=256)
def _subfield_elements(field: Field, divisor: int) -> list[int]:
    return [a for a in range(field.q) if in_subfield_int(field, a, divisor)]


def in_subfield_int(field: Field, a: int, divisor: int) -> bool:
    if divisor == field.k or a < field.p:
        return True
    return field.pow(a, field.p ** divisor) == a


def subfield_generated_int(field: Field, elems: Iterable[int]) -> Subfield:
    """Smallest subfield containing all the given integer-coded elements."""
    divs = [d for d in range(1, field.k + 1) if field.k % d == 0]
    need = 1
    from math import lcm
    for a in set(int(e) for e in elems):
        if a < field.p:
            continue
        if in_subfield_int(field, a, need):
            continue
        for d in divs:
            if d % need == 0 and in_subfield_int(field, a, d):
                need = lcm(need, d)
                break
        if need == field.k:
            break
    return Subfield(field, need)


# ---------------------------------------------------------------------------
# object wrapper used at the public boundary

class FieldElement:
    """An element of a Field, with operator overloading."""
    __slots__ = ("field", "value")

    def __init__(self, field: Field, value: int | Sequence[int]):
        self.field = field
        self.value = value if isinstance(value, (int, np.integer)) and 0 <= value < field.q \
            else field.elem(value)
        self.value = int(self.value)

    @classmethod
    def from_coeffs(cls, field: Field, coeffs: Sequence[int]) -> "FieldElement":
        return cls(field, field.elem(coeffs))

    @property
    def coeffs(self) -> list[int]:
        return self.field.coeffs(self.value)

    def _other(self, b) -> int:
        if isinstance(b, FieldElement):
            if b.field != self.field:
                raise FieldMismatch(f"{self.field} vs {b.field}")
            return b.value
        if isinstance(b, (int, np.integer)):
            return self.field.from_int(int(b))
        return NotImplemented

    def _wrap(self, v: int) -> "FieldElement":
        return FieldElement(self.field, v)

    def __add__(self, b):
        return self._wrap(self.field.add(self.value, self._other(b)))

    __radd__ = __add__

    def __sub__(self, b):
        return self._wrap(self.field.sub(self.value, self._other(b)))

    def __rsub__(self, b):
        return self._wrap(self.field.sub(self._other(b), self.value))

    def __mul__(self, b):
        return self._wrap(self.field.mul(self.value, self._other(b)))

    __rmul__ = __mul__

    def __truediv__(self, b):
        return self._wrap(self.field.div(self.value, self._other(b)))

    def __rtruediv__(self, b):
        return self._wrap(self.field.div(self._other(b), self.value))

    def __neg__(self):
        return self._wrap(self.field.neg(self.value))

    def __pow__(self, e: int):
        return self._wrap(self.field.pow(self.value, e))

    def inv(self):
        return self._wrap(self.field.inv(self.value))

    def __eq__(self, b):
        if isinstance(b, FieldElement):
            return self.field == b.field and self.value == b.value
        if isinstance(b, (int, np.integer)):
            return self.value == self.field.from_int(int(b))
        return NotImplemented

    def __hash__(self):
        return hash((self.field.key(), self.value))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        if self.field.k == 1:
            return f"{self.value}"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if i == 0 else (f"{'' if c == 1 else c}x" + (f"^{i}" if i > 1 else "")))
        return " + ".join(terms) if terms else "0"


def ff_arithmetic(a: FieldElement, b: FieldElement | None, op: str) -> FieldElement:
    """Dispatch one of add, sub, mul, div, neg, inv, pow (b is the integer exponent for pow)."""
    if op in ("neg", "inv"):
        return -a if op == "neg" else a.inv()
    if op == "pow":
        return a ** int(b)
    if isinstance(b, FieldElement) and b.field != a.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def frobenius_q0(a: FieldElement) -> FieldElement:
    return FieldElement(a.field, a.field.frob(a.value))


def trace_q0(a: FieldElement) -> FieldElement:
    return FieldElement(a.field, a.field.trace(a.value))


def subfield_generated(elems: Iterable[FieldElement]) -> Subfield:
    elems = list(elems)
    if not elems:
        raise ValueError("empty set")
    f = elems[0].field
    for e in elems:
        if e.field != f:
            raise FieldMismatch("elements from different fields")
    return subfield_generated_int(f, (e.value for e in elems))


def in_subfield(a: FieldElement, s: Subfield) -> bool:
    if a.field != s.field:
        raise FieldMismatch("subfield of a different field")
    return s.contains(a.value)
