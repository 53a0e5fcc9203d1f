"""The acceptance suite: eleven end-to-end checks with their time limits.

Each check returns a :class:`CriterionResult`; ``run_all`` runs them in order.
Instances are drawn from seeded generators so every run is reproducible.
"""
from __future__ import annotations

import contextlib
import copy
import io
import itertools
import time
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Callable

import numpy as np

from . import linalg
from .classify import (classify_from_cycles, cycle_witnesses, defining_field, dickson_delta,
                       irreducible)
from .errors import ArtifactError
from .geom import VectorSpace, form_eval
from .gf import GF, Field
from .graph import (P_u, af_coeffs, af_conjugate, build_graph, d_s, d_u, eval_quad,
                    simple_cycles, weight)
from .oracle import (cayley_diameter, closure_enumerate, dickson_generators,
                     group_order, invariant_subspace_search)
from .trans import (GroupSpec, Transvection, all_transvections, random_transvection,
                    tv_conjugate, tv_make, tv_matrix)
from . import pipeline as pl


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    limit: float
    detail: dict = dc_field(default_factory=dict)

    @property
    def in_time(self) -> bool:
        return self.seconds <= self.limit

    def line(self) -> str:
        status = "PASS" if self.passed and self.in_time else "FAIL"
        extra = "" if self.in_time else f" (over the {self.limit:.0f}s limit)"
        return f"[{status}] {self.number:2d}. {self.title}: {self.seconds:.1f}s{extra}"

    def to_json(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "seconds": round(self.seconds, 3), "limit": self.limit,
                "in_time": self.in_time, "detail": self.detail}


# ---------------------------------------------------------------------------
# instances

def sp43() -> GroupSpec:
    return GroupSpec.make("Sp", 4, GF(3))


def su33() -> GroupSpec:
    return GroupSpec.make("SU", 3, GF(9, unitary=True))


def sl(n: int, q: int) -> GroupSpec:
    return GroupSpec.make("SL", n, GF(q))


@lru_cache(maxsize=16)
def _all_tv(spec: GroupSpec) -> tuple:
    return tuple(all_transvections(spec))


def sample_transvection(spec: GroupSpec, rng: np.random.Generator) -> Transvection:
    if spec.family == "SL" and spec.q ** spec.n > 5000:
        return random_transvection(spec.space, rng)
    T = _all_tv(spec)
    return T[int(rng.integers(len(T)))]


def generates(spec: GroupSpec, X, closure_cap: int = 10 ** 6) -> bool:
    """X generates the group: by closure when it is small, else by the cycle classification."""
    order = group_order(spec)
    if order <= closure_cap:
        res = closure_enumerate(spec.field, X, closure_cap, allow_truncate=True)
        return not res.truncated and res.order == order
    if not irreducible(X) or not defining_field(X).is_full():
        return False
    return classify_from_cycles(X, random_count=2000).family == spec.family


def random_generating_set(spec: GroupSpec, rng: np.random.Generator,
                          size: int | None = None) -> list[Transvection]:
    """Seeded transvections that generate the whole group (grown until they do)."""
    X: list[Transvection] = []
    target = size or spec.n
    while True:
        while len(X) < target:
            t = sample_transvection(spec, rng)
            if t not in X:
                X.append(t)
        if generates(spec, X):
            return X
        target += 1
        if target > 4 * spec.n + 4:
            X, target = [], size or spec.n


# ---------------------------------------------------------------------------
# criteria

def c1_dickson() -> dict:
    rows = {}
    ok = True
    for r in (3, 5, 7, 9, 11, 13, 25, 27):
        F = GF(r)
        delta = dickson_delta(F)
        order = closure_enumerate(F, dickson_generators(F, delta)).order
        expect = 120 if r == 9 else r * (r * r - 1)
        rows[r] = {"delta": F.coeffs(delta), "order": order, "expected": expect}
        ok &= order == expect
    return {"passed": ok, "table": rows}


def c2_classification(seed: int = 2) -> dict:
    rng = np.random.default_rng(seed)
    rows = {}
    ok = True
    for spec, expect in ((sp43(), 51840), (su33(), 6048), (sl(3, 3), 5616)):
        X = random_generating_set(spec, rng)
        res = classify_from_cycles(X)
        order = closure_enumerate(spec.field, X).order
        good = (res.family == spec.family and order == group_order(spec) == expect)
        rows[spec.name()] = {"family": res.family, "closure": order,
                             "formula": group_order(spec), "size": len(X)}
        ok &= good
    return {"passed": ok, "rows": rows}


def c3_conjugation(pairs: int = 10 ** 4, seed: int = 3) -> dict:
    rng = np.random.default_rng(seed)
    bad = 0
    for q in (3, 5, 9, 25):
        F = GF(q)
        S = VectorSpace(F, 3)
        for _ in range(pairs):
            a, b = random_transvection(S, rng), random_transvection(S, rng)
            mb = tv_matrix(b)
            lhs = tv_matrix(tv_conjugate(a, b))
            rhs = linalg.matmul(F, linalg.matmul(F, mb, tv_matrix(a)), linalg.inverse(F, mb))
            bad += not np.array_equal(lhs, rhs)
    return {"passed": bad == 0, "mismatches": bad, "pairs_per_field": pairs}


def c4_irreducibility(count: int = 500, seed: int = 4) -> dict:
    rng = np.random.default_rng(seed)
    agree = tally = 0
    irr = 0
    for _ in range(count):
        n = int(rng.integers(2, 4))
        q = int(rng.choice([3, 5]))
        S = VectorSpace(GF(q), n)
        k = int(rng.integers(1, 5))
        Y = [random_transvection(S, rng) for _ in range(k)]
        a = irreducible(Y)
        b = invariant_subspace_search(S.field, n, [tv_matrix(t) for t in Y])
        agree += a == b
        irr += b
        tally += 1
    return {"passed": agree == tally, "agree": agree, "total": tally, "irreducible": irr}


def c5_cycle_laws(count: int = 200, seed: int = 5) -> dict:
    rng = np.random.default_rng(seed)
    out = {}
    ok = True
    for spec, disc in ((sp43(), d_s), (su33(), d_u)):
        cycles = bad = 0
        T = _all_tv(spec)
        for _ in range(count):
            k = int(rng.integers(3, 9))
            Y = [T[i] for i in rng.choice(len(T), k, replace=False)]
            g = build_graph(Y)
            for cyc in simple_cycles(g, 5):
                cycles += 1
                bad += disc(g, cyc) != 0
        out[spec.name()] = {"cycles": cycles, "nonzero": bad}
        ok &= bad == 0 and cycles > 0
    spec = sl(3, 3)
    found = 0
    sets = 50
    for _ in range(sets):
        X = random_generating_set(spec, rng)
        wit = cycle_witnesses(build_graph(X), 5, rng)
        found += wit["non_symplectic"] is not None
    out[spec.name()] = {"generating_sets": sets, "with_non_symplectic_cycle": found,
                        "non_unitary": "not applicable: q is not a square"}
    ok &= found == sets
    return {"passed": ok, "rows": out}


def c6_af_identities(count: int = 100, seed: int = 6) -> dict:
    rng = np.random.default_rng(seed)
    F = GF(25)
    S = VectorSpace(F, 3)
    M = F.subfield(1)
    bad = tuples = 0
    while tuples < count:
        ts = [random_transvection(S, rng) for _ in range(4)]
        if len(set(ts)) < 4:
            continue
        tuples += 1
        g = build_graph(ts)
        c = af_coeffs(g, 0, 1, 2, 3)
        for lam in M.elements():
            s3 = af_conjugate(ts[2], ts[3], lam)
            h = build_graph([ts[0], ts[1], s3])
            w = weight(h, (0, 1, 2))
            du = d_u(h, (0, 1, 2))
            bad += w != eval_quad(F, c.A, c.B, c.C, lam)
            bad += du != eval_quad(F, c.D, c.E, c.F, lam)
    return {"passed": bad == 0, "tuples": tuples, "mismatches": bad}


def glued_instance(F: Field, rng: np.random.Generator, n: int = 3):
    """Two two-way cycles sharing an oppositely directed path with unitary 2-cycles.

    Returns (transvections, big cycle, first cycle, second cycle) as index tuples.
    The labels along the joint path are rescaled so that each of its
    2-cycles has weight 1.
    """
    S = VectorSpace(F, n)
    while True:
        a = int(rng.integers(1, 3))      # vertices before r_i
        lq = int(rng.integers(0, 3))     # joint inner vertices q_1..q_l
        m = int(rng.integers(1, 3))      # vertices between r_i and r_j on the second cycle
        b = int(rng.integers(0, 2))      # vertices after r_j
        total = a + 1 + lq + 1 + b + m
        ts = [random_transvection(S, rng) for _ in range(total)]
        if len(set(ts)) < total:
            continue
        pre = list(range(a))
        ri = a
        qs = list(range(a + 1, a + 1 + lq))
        rj = a + 1 + lq
        post = list(range(rj + 1, rj + 1 + b))
        mid = list(range(rj + 1 + b, total))
        joint = [ri] + qs + [rj]
        # make the 2-cycles along the joint path unitary (weight 1)
        for x, y in zip(joint, joint[1:]):
            lxy = S.pair(ts[y].phi, ts[x].u)
            lyx = S.pair(ts[x].phi, ts[y].u)
            if lxy == 0 or lyx == 0:
                break
            c = F.inv(F.mul(lxy, lyx))
            ts[y] = Transvection(S, ts[y].u, S.scale(c, ts[y].phi))
        else:
            big = tuple(pre + [ri] + mid + [rj] + post)
            first = tuple(pre + joint + post)
            second = tuple([ri] + mid + [rj] + qs[::-1])
            g = build_graph(ts)
            cyc_ok = all(weight(g, c) and weight(g, c[::-1]) for c in (big, first, second))
            if cyc_ok:
                return ts, big, first, second


def c7_gluing(count: int = 100, seed: int = 7) -> dict:
    rng = np.random.default_rng(seed)
    bad = 0
    per = {}
    for q in (9, 25):
        F = GF(q)
        for _ in range(count):
            ts, big, first, second = glued_instance(F, rng)
            g = build_graph(ts)
            bad += P_u(g, big) != F.mul(P_u(g, first), P_u(g, second))
        per[q] = count
    return {"passed": bad == 0, "instances": per, "mismatches": bad}


def run_stages(spec: GroupSpec, X) -> dict:
    """Stages up to the M-closure, each followed by an audit from scratch."""
    gs = pl.GenSet.from_transvections(X, spec)
    out = {"size": len(X)}
    pl.extend_diameter2(gs)
    out["diameter2"] = pl.audit_diameter2(gs)
    pl.extend_twoway6(gs)
    gs.meta.pop("twoway_core", None)
    out["twoway6"] = pl.audit_twoway6(gs)
    pl.boost_L3(gs)
    g = build_graph(gs.elems)
    from .graph import L_k
    out["L3_full"] = L_k(g, 3).is_full()
    out["L2_index"] = L_k(g, 2).index_in_full()
    if spec.family in ("Sp", "SU"):
        pl.fix_L2_sympunit(gs)
    pl.close_over_M(gs)
    M = pl.base_field_M(gs)
    out["M"] = repr(M)
    out["M_closed"] = pl.audit_closed(gs, M)
    out["final_size"] = len(gs)
    out["ok"] = (out["diameter2"] and out["twoway6"] and out["L3_full"]
                 and out["L2_index"] <= 2 and out["M_closed"])
    return out


def c8_stage_audits(count: int = 50, seed: int = 8) -> dict:
    rows = {}
    ok = True
    for spec in (sp43(), su33(), sl(3, 5), sl(3, 25)):
        rng = np.random.default_rng([seed, spec.q, spec.n])
        good = 0
        failures = []
        t0 = time.perf_counter()
        for i in range(count):
            X = random_generating_set(spec, rng)
            try:
                r = run_stages(spec, X)
            except ArtifactError as exc:
                failures.append({"instance": i, "error": type(exc).__name__, "message": str(exc)})
                continue
            if r["ok"]:
                good += 1
            else:
                failures.append({"instance": i, "audit": r})
        rows[spec.name()] = {"passed": good, "total": count, "failures": failures[:5],
                             "seconds": round(time.perf_counter() - t0, 1)}
        ok &= good == count
    return {"passed": ok, "rows": rows}


def c9_symplectic_constants(seed: int = 9) -> dict:
    rows = {}
    ok = True
    for q in (3, 5):
        spec = GroupSpec.make("Sp", 4, GF(q))
        F, S, f = spec.field, spec.space, spec.form
        rng = np.random.default_rng([seed, q])
        X = random_generating_set(spec, rng)
        gs = pl.GenSet.from_transvections(X, spec)
        pl.extend_diameter2(gs)
        pl.extend_twoway6(gs)
        pl.boost_L3(gs)
        pl.fix_L2_sympunit(gs)
        pl.close_over_M(gs)
        dirs = pl._X_directions(gs, len(gs))
        worst_edge = worst = 0
        pairs = 0
        over = []
        for a, b in itertools.combinations(dirs, 2):
            for c in range(1, F.q):
                bc = S.scale(c, b)
                trial = copy.deepcopy(gs)
                pl.add_two(trial, a, bc)
                local = trial.meta["last_add"]["local_length"]
                idx = trial.meta["last_add"]["indices"]
                for i in idx:
                    m = trial.evaluate(trial.words[i])
                    if not np.array_equal(m, tv_matrix(trial.elems[i])):
                        over.append({"a": a, "b": bc, "reason": "word mismatch"})
                pairs += 1
                if form_eval(f, a, bc) != 0:
                    worst_edge = max(worst_edge, local)
                    if local > 3:
                        over.append({"a": a, "b": bc, "length": local})
                worst = max(worst, local)
                if local > 21:
                    over.append({"a": a, "b": bc, "length": local})
        rows[spec.name()] = {"pairs": pairs, "max_length_edge": worst_edge,
                             "max_length": worst, "violations": over[:5]}
        ok &= not over
    return {"passed": ok, "rows": rows}


def c10_end_to_end(samples: int = 100, seed: int = 10) -> dict:
    rows = {}
    ok = True
    for spec in (sp43(), su33()):
        rng = np.random.default_rng([seed, spec.q])
        X = random_generating_set(spec, rng)
        gs, rep = pl.synthesize(spec, X)
        T = _all_tv(spec)
        unverified = 0
        for t in T:
            i = gs.find(t)
            if i is None or not np.array_equal(gs.evaluate(gs.words[i]), tv_matrix(t)):
                unverified += 1
        res = closure_enumerate(spec.field, X)
        n = spec.n
        worst = 0
        bad = 0
        for k in rng.choice(res.order, samples, replace=False):
            g = res.matrix(int(k))
            word, factors = pl.decompose_element(gs, g, return_factors=True)
            worst = max(worst, len(factors))
            bad += not np.array_equal(gs.evaluate(word), g)
        bound = 4 * n * n
        diam = cayley_diameter(spec.field, X)
        rows[spec.name()] = {"transvections": len(T), "unverified": unverified,
                             "max_word_length": rep.max_length,
                             "cayley_diameter_of_X": diam, "generators": len(X),
                             "decompositions": samples, "bad_decompositions": bad,
                             "max_factors": worst, "factor_bound": bound}
        ok &= unverified == 0 and bad == 0 and worst <= bound
    return {"passed": ok, "rows": rows}


def c11_exclusions(seed: int = 11) -> dict:
    import tempfile
    from pathlib import Path
    from . import cli
    from .instance import from_spec
    rng = np.random.default_rng(seed)
    rows = {}
    ok = True
    cases = [GroupSpec.make("Sp", 4, GF(9)), GroupSpec.make("SU", 3, GF(81, unitary=True)),
             GroupSpec.make("SL", 3, GF(9)), GroupSpec.make("SL", 3, GF(81))]
    with tempfile.TemporaryDirectory() as tmp:
        for spec in cases:
            X = [sample_transvection(spec, rng) for _ in range(spec.n + 2)]
            path = Path(tmp) / f"{spec.family}{spec.n}_{spec.q}.json"
            path.write_text(from_spec(spec, X).dumps())
            codes = {}
            for cmd in (["synthesize"], ["classify"], ["graph"], ["oracle", "order"]):
                with contextlib.redirect_stderr(io.StringIO()):
                    codes[" ".join(cmd)] = cli.main(cmd + ["--input", str(path)], out=_Null())
            good = codes["synthesize"] == 5 and all(
                c == 0 for k, c in codes.items() if k != "synthesize")
            rows[spec.name()] = codes
            ok &= good
    return {"passed": ok, "exit_codes": rows}


class _Null:
    def write(self, s):
        return len(s)

    def flush(self):
        pass


CRITERIA: list[tuple[int, str, float, Callable[[], dict]]] = [
    (1, "Dickson table", 60, c1_dickson),
    (2, "Classification vs oracle", 300, c2_classification),
    (3, "Conjugation formula", 60, c3_conjugation),
    (4, "Irreducibility", 300, c4_irreducibility),
    (5, "Cycle laws", 600, c5_cycle_laws),
    (6, "af polynomial identities", 60, c6_af_identities),
    (7, "P_u gluing", 60, c7_gluing),
    (8, "Stage audits", 1800, c8_stage_audits),
    (9, "Symplectic addition constants", 300, c9_symplectic_constants),
    (10, "End-to-end synthesis", 3600, c10_end_to_end),
    (11, "Exclusion handling", 60, c11_exclusions),
]


def run_criterion(number: int) -> CriterionResult:
    num, title, limit, fn = CRITERIA[number - 1]
    t0 = time.perf_counter()
    detail = fn()
    secs = time.perf_counter() - t0
    return CriterionResult(num, title, bool(detail.pop("passed")), secs, limit, detail)


def run_all(numbers=None) -> list[CriterionResult]:
    return [run_criterion(k) for k in (numbers or range(1, len(CRITERIA) + 1))]
