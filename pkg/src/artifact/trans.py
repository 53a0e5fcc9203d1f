"""Transvections 1 + u (x) phi, the classical groups they live in, and T_v subgroups."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import (ClosureLeavesGroup, DimensionMismatch, NonSingularVector, NotNilpotent,
                     ParseError, ZeroData)
from .geom import Covector, Form, Vector, VectorSpace, is_singular, phi_u
from .gf import Field, Subfield

FAMILIES = ("SL", "Sp", "SU")


@dataclass(frozen=True)
class Transvection:
    """1 + u (x) phi in canonical form (first nonzero coordinate of u equal to 1)."""
    space: VectorSpace
    u: Vector
    phi: Covector

    def key(self) -> tuple:
        return (self.u, self.phi)

    def __lt__(self, other: "Transvection") -> bool:
        return self.key() < other.key()

    def __repr__(self):
        return f"T(u={list(self.u)}, phi={list(self.phi)})"

    def to_json(self) -> dict:
        F = self.space.field
        return {"u": [F.coeffs(a) for a in self.u], "phi": [F.coeffs(a) for a in self.phi]}


def tv_make(space: VectorSpace, u: Sequence[int], phi: Sequence[int]) -> Transvection:
    u = space.check(u)
    phi = space.check(phi)
    if not any(u) or not any(phi):
        raise ZeroData("u and phi must be nonzero")
    if space.pair(phi, u) != 0:
        raise NotNilpotent("phi(u) must vanish")
    un, lead = space.normalize(u)
    return Transvection(space, un, space.scale(lead, phi))


def _raw(space: VectorSpace, u: Vector, phi: Covector) -> Transvection:
    """Canonicalize without re-checking phi(u) = 0."""
    un, lead = space.normalize(u)
    return Transvection(space, un, space.scale(lead, phi))


def random_transvection(space: VectorSpace, rng: np.random.Generator) -> Transvection:
    """Random element of SL(V) of transvection type (not uniform over the class)."""
    F = space.field
    u = space.random_vector(rng)
    i = next(j for j, a in enumerate(u) if a)
    while True:
        psi = space.random_vector(rng)
        c = F.div(space.pair(psi, u), u[i])
        phi = psi[:i] + (F.sub(psi[i], c),) + psi[i + 1:]
        if any(phi):
            return tv_make(space, u, phi)


def tv_apply(t: Transvection, x: Sequence[int]) -> Vector:
    S = t.space
    x = S.check(x)
    c = S.pair(t.phi, x)
    return S.axpy(c, t.u, x) if c else x


def tv_matrix(t: Transvection) -> np.ndarray:
    F, n = t.space.field, t.space.n
    outer = F.vmul(np.array(t.u)[:, None], np.array(t.phi)[None, :])
    return np.asarray(F.vadd(np.eye(n, dtype=np.int64), outer), dtype=np.int64)


def tv_power(t: Transvection, lam: int) -> Transvection:
    """t^lam = 1 + lam u (x) phi."""
    if lam == 0:
        raise ZeroData("t^0 is the identity, not a transvection")
    return Transvection(t.space, t.u, t.space.scale(lam, t.phi))


def tv_inverse(t: Transvection) -> Transvection:
    return tv_power(t, t.space.field.neg(1))


def tv_conjugate(t1: Transvection, t2: Transvection) -> Transvection:
    """t2 t1 t2^-1 = 1 + (u1 + phi2(u1) u2) (x) (phi1 - phi1(u2) phi2)."""
    S, F = t1.space, t1.space.field
    a = S.pair(t2.phi, t1.u)
    b = S.pair(t1.phi, t2.u)
    if a == 0 and b == 0:
        return t1
    u = S.axpy(a, t2.u, t1.u) if a else t1.u
    phi = S.axpy(F.neg(b), t2.phi, t1.phi) if b else t1.phi
    return _raw(S, u, phi)


def tv_conjugate_by_matrix(t: Transvection, g: np.ndarray, ginv: np.ndarray) -> Transvection:
    """g t g^-1 = 1 + g(u) (x) (phi o g^-1)."""
    F = t.space.field
    u = tuple(int(x) for x in linalg.matvec(F, g, t.u))
    phi = tuple(int(x) for x in F.vdot(np.asarray(ginv).T, np.array(t.phi)[None, :]))
    return _raw(t.space, u, phi)


def tv_from_json(space: VectorSpace, obj) -> Transvection:
    F = space.field
    try:
        u = [F.elem_from_json(c) for c in obj["u"]]
        phi = [F.elem_from_json(c) for c in obj["phi"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad transvection: {exc}") from exc
    if len(u) != space.n or len(phi) != space.n:
        raise ParseError("transvection has the wrong dimension")
    return tv_make(space, u, phi)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupSpec:
    """SL(V), Sp(V) or SU(V) with the ambient space and form."""
    family: str
    space: VectorSpace
    form: Form

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        n, F = self.space.n, self.space.field
        if self.family == "SL":
            if self.form.kind != "none":
                raise ValueError("SL carries no form")
            if F.q0 != F.q:
                raise ValueError("SL uses a field with q0 = q")
        elif self.family == "Sp":
            if self.form.kind != "symplectic" or n % 2:
                raise ValueError("Sp needs a symplectic form in even dimension")
            if F.q0 != F.q:
                raise ValueError("Sp uses a field with q0 = q")
        else:
            if self.form.kind != "hermitian":
                raise ValueError("SU needs a hermitian form")

    @staticmethod
    def make(family: str, n: int, field: Field, gram=None) -> "GroupSpec":
        family = {"sl": "SL", "sp": "Sp", "su": "SU"}.get(family.lower(), family)
        if family == "SU" and field.q0 == field.q:
            field = field.with_q0(field.sqrt_q())
        if family != "SU" and field.q0 != field.q:
            field = field.with_q0(field.q)
        S = VectorSpace(field, n)
        if family == "SL":
            form = Form.none(S)
        elif gram is None:
            form = Form.symplectic(S) if family == "Sp" else Form.hermitian(S)
        else:
            form = Form(S, "symplectic" if family == "Sp" else "hermitian",
                        np.asarray(gram, dtype=np.int64))
        return GroupSpec(family, S, form)

    @property
    def field(self) -> Field:
        return self.space.field

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def q0(self) -> int:
        return self.field.q0

    @property
    def excluded(self) -> bool:
        """The exceptional fields rejected by the synthesis pipeline."""
        q = self.q
        return ((self.family == "Sp" and q == 9) or (self.family == "SU" and q == 81)
                or (self.family == "SL" and q in (9, 81)))

    def name(self) -> str:
        return f"{self.family}({self.n},{self.q})"

    def to_json(self) -> dict:
        out = {"family": self.family.lower(), "n": self.n, "field": self.field.to_json()}
        if self.form.kind != "none":
            out["gram"] = self.form.to_json()["gram"]
        return out

    @staticmethod
    def from_json(obj) -> "GroupSpec":
        from .gf import Field as _F
        try:
            family = {"sl": "SL", "sp": "Sp", "su": "SU"}[str(obj["family"]).lower()]
            n = int(obj["n"])
            F = _F.from_json(obj["field"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad group header: {exc}") from exc
        if family == "SU" and F.q0 == F.q:
            F = F.with_q0(F.sqrt_q())
        gram = obj.get("gram")
        if gram is not None:
            gram = [[F.elem_from_json(c) for c in row] for row in gram]
        try:
            return GroupSpec.make(family, n, F, gram)
        except ValueError as exc:
            raise ParseError(str(exc)) from exc

    def contains_matrix(self, g: np.ndarray) -> bool:
        from .geom import preserves_form
        F = self.field
        if linalg.det(F, g) != 1:
            return False
        return preserves_form(self.form, g)

    def transvection(self, v: Vector, lam: int = 1) -> Transvection:
        """1 + lam v (x) phi_v (symplectic or unitary); lam defaults to lambda0 for SU."""
        if self.family == "SL":
            raise ValueError("SL transvections need explicit phi")
        if self.family == "SU" and lam == 1:
            lam = self.field.lambda0()
        phi = self.space.scale(lam, phi_u(self.form, v))
        return tv_make(self.space, v, phi)


def _proportional(S: VectorSpace, phi: Covector, psi: Covector) -> int | None:
    """lam with phi = lam*psi, or None."""
    F = S.field
    lam = None
    for a, b in zip(phi, psi):
        if b == 0:
            if a != 0:
                return None
            continue
        c = F.div(a, b)
        if lam is None:
            lam = c
        elif c != lam:
            return None
    return lam


def tv_scalar(t: Transvection, spec: GroupSpec) -> int | None:
    """The lam with phi = lam*phi_u, or None if no such lam exists."""
    if spec.family == "SL":
        return None
    return _proportional(t.space, t.phi, phi_u(spec.form, t.u))


def tv_in_group(t: Transvection, spec: GroupSpec) -> bool:
    if t.space != spec.space:
        return False
    if spec.family == "SL":
        return True
    if not is_singular(spec.form, t.u):
        return False
    lam = tv_scalar(t, spec)
    if lam is None or lam == 0:
        return False
    if spec.family == "SU":
        return spec.field.trace(lam) == 0
    return True


@dataclass(frozen=True)
class TransvectionSubgroup:
    """T_v, or t^K for a subfield K: base^lam for lam in scalars (plus the identity)."""
    base: Transvection
    scalars: tuple

    def elements(self) -> list[Transvection]:
        return [tv_power(self.base, lam) for lam in self.scalars if lam]

    def __len__(self):
        return len(self.scalars)


def tv_subgroup(v: Vector, spec: GroupSpec) -> TransvectionSubgroup:
    if spec.family == "SL":
        raise ValueError("T_v is defined for Sp and SU")
    S, F = spec.space, spec.field
    v = S.check(v)
    if not any(v):
        raise ZeroData("v must be nonzero")
    if spec.family == "SU" and not is_singular(spec.form, v):
        raise NonSingularVector("T_v needs a singular vector")
    if spec.family == "Sp":
        base = tv_make(S, v, phi_u(spec.form, v))
        scalars = tuple(range(F.q))
    else:
        lam0 = F.lambda0()
        base = tv_make(S, v, S.scale(lam0, phi_u(spec.form, v)))
        scalars = tuple(a for a in range(F.q) if a < F.p or F.pow(a, F.q0) == a)
    return TransvectionSubgroup(base, scalars)


def tv_K_closure(Y: Iterable[Transvection], K: Subfield,
                 spec: GroupSpec | None = None) -> list[Transvection]:
    """Y^K = {t^lam : t in Y, lam in K^x}, sorted and deduplicated."""
    out = set()
    lams = K.nonzero()
    for t in Y:
        for lam in lams:
            s = tv_power(t, lam)
            if spec is not None and not tv_in_group(s, spec):
                raise ClosureLeavesGroup(f"{s} is not in {spec.name()}")
            out.add(s)
    return sorted(out)


def all_transvections(spec: GroupSpec) -> list[Transvection]:
    """Every transvection of the group, sorted by canonical key."""
    S, F = spec.space, spec.field
    out = []
    if spec.family == "SL":
        for u in S.points():
            # hyperplanes through u: normalized covectors with phi(u) = 0
            for h in S.points():
                if S.pair(h, u) == 0:
                    for lam in range(1, F.q):
                        out.append(Transvection(S, u, S.scale(lam, h)))
    else:
        lams = range(1, F.q) if spec.family == "Sp" else F.trace_zero_elements()
        for u in S.points():
            if spec.family == "SU" and not is_singular(spec.form, u):
                continue
            pu = phi_u(spec.form, u)
            for lam in lams:
                out.append(Transvection(S, u, S.scale(lam, pu)))
    return sorted(out)


def count_transvections(spec: GroupSpec) -> int:
    """|T| without enumeration."""
    q, n, q0 = spec.q, spec.n, spec.q0
    npts = (q ** n - 1) // (q - 1)
    if spec.family == "SL":
        return npts * ((q ** (n - 1) - 1) // (q - 1)) * (q - 1)
    if spec.family == "Sp":
        return npts * (q - 1)
    # singular points of a nondegenerate hermitian form in dimension n over GF(q0^2)
    sing = (q0 ** n - (-1) ** n) * (q0 ** (n - 1) - (-1) ** (n - 1)) // (q - 1)
    return sing * (q0 - 1)


def check_same_space(ts: Iterable[Transvection], space: VectorSpace):
    for t in ts:
        if t.space != space:
            raise DimensionMismatch("transvections from different spaces")
