"""JSON instance files shared by every CLI subcommand."""
from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .errors import ArtifactError, ParseError
from .geom import VectorSpace
from .gf import Field
from .trans import GroupSpec, Transvection, tv_from_json, tv_matrix

FAMILIES = {"sl": "SL", "sp": "Sp", "su": "SU"}


@dataclass
class Instance:
    """Field header, optional group, generators and run options.

    Generators are transvections or raw matrices (numpy arrays); the CLI
    treats a list made only of transvections as the set Y of the theory.
    """
    field: Field
    n: int
    family: str | None = None
    gram: np.ndarray | None = None
    generators: list = dc_field(default_factory=list)
    options: dict = dc_field(default_factory=dict)

    @property
    def space(self) -> VectorSpace:
        return VectorSpace(self.field, self.n)

    def spec(self) -> GroupSpec | None:
        if self.family is None:
            return None
        return GroupSpec.make(self.family, self.n, self.field, self.gram)

    def transvections(self) -> list[Transvection]:
        if not all(isinstance(g, Transvection) for g in self.generators):
            raise ParseError("this command needs transvection generators")
        return list(self.generators)

    def matrices(self) -> list[np.ndarray]:
        return [tv_matrix(g) if isinstance(g, Transvection) else g for g in self.generators]

    def to_json(self) -> dict:
        F = self.field
        out = {"field": F.to_json(), "n": self.n,
               "generators": [_gen_to_json(F, g) for g in self.generators]}
        if self.family is not None:
            out["family"] = self.family.lower()
        if self.gram is not None:
            out["gram"] = [[F.elem_to_json(int(a)) for a in row] for row in self.gram]
        if self.options:
            out["options"] = dict(self.options)
        return out

    @staticmethod
    def from_json(obj) -> "Instance":
        if not isinstance(obj, dict):
            raise ParseError("an instance must be a JSON object")
        F = Field.from_json(obj.get("field"))
        try:
            n = int(obj["n"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad dimension: {exc}") from exc
        if n < 1:
            raise ParseError("n must be positive")
        family = obj.get("family")
        if family is not None:
            if str(family).lower() not in FAMILIES:
                raise ParseError(f"unknown family {family!r}")
            family = FAMILIES[str(family).lower()]
        gram = obj.get("gram")
        if gram is not None:
            gram = _matrix(F, n, gram)
        inst = Instance(F, n, family, gram, [], dict(obj.get("options") or {}))
        try:
            S = VectorSpace(inst.spec().field if family else F, n)
        except ValueError as exc:
            raise ParseError(f"bad group: {exc}") from exc
        inst.field = S.field
        gens = obj.get("generators")
        if not isinstance(gens, list):
            raise ParseError("generators must be a list")
        for g in gens:
            if not isinstance(g, dict):
                raise ParseError("each generator is an object")
            if "matrix" in g:
                inst.generators.append(_matrix(S.field, n, g["matrix"]))
            else:
                try:
                    inst.generators.append(tv_from_json(S, g))
                except ArtifactError as exc:
                    raise ParseError(f"bad transvection: {exc}") from exc
        return inst

    def dumps(self) -> str:
        return dumps(self.to_json())


def _gen_to_json(F: Field, g) -> dict:
    if isinstance(g, Transvection):
        return g.to_json()
    return {"matrix": [[F.elem_to_json(int(a)) for a in row] for row in np.asarray(g)]}


def _matrix(F: Field, n: int, rows) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != n or any(
            not isinstance(r, list) or len(r) != n for r in rows):
        raise ParseError(f"expected an {n} x {n} matrix")
    return np.array([[F.elem_from_json(c) for c in r] for r in rows], dtype=np.int64)


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def loads(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return Instance.from_json(obj)


def load(path) -> Instance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def from_spec(spec: GroupSpec, gens, options: dict | None = None) -> Instance:
    gram = None if spec.family == "SL" else np.asarray(spec.form.gram)
    return Instance(spec.field, spec.n, spec.family, gram, list(gens), dict(options or {}))
