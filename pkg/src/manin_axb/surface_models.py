"""Boundary-divisor data for the built-in compactifications of the ax+b group.

Each surface is described only through its boundary divisors D_j and four
integers per divisor:

    u      order of vanishing of a along D_j
    v      max over c of the order of b - c along D_j
    c_star the maximizing translate c (a single rational when v > 0,
           otherwise every rational attains the maximum)
    d      anticanonical multiplicity, minus the order of omega = db da / a

The classification sets used by the analytic modules (J1, J2, J3, the
special divisors, the bad primes) are derived from this table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import reduce
from typing import Iterable

import sympy


class _AllOfQ:
    """Sentinel for a divisor on which every translate b - c has the same order."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ALL_OF_Q"

    def __reduce__(self):
        return (_AllOfQ, ())


ALL_OF_Q = _AllOfQ()

MODEL_NAMES = ("ex1-split-quadric", "ex2-a3a1-quartic", "ex3-orbit-closure")
_ALIASES = {
    "ex1": "ex1-split-quadric",
    "ex1-split-quadric": "ex1-split-quadric",
    "ex2": "ex2-a3a1-quartic",
    "ex2-a3a1-quartic": "ex2-a3a1-quartic",
    "ex3": "ex3-orbit-closure",
    "ex3-orbit-closure": "ex3-orbit-closure",
}


class ModelError(ValueError):
    """Raised for unknown names, invalid parameters or models that fail validation."""


@dataclass(frozen=True)
class DivisorDatum:
    id: int
    label: str
    u: int
    v: int
    c_star: object  # Fraction or ALL_OF_Q
    d: int

    @property
    def special(self) -> bool:
        return self.v == self.u


@dataclass(frozen=True)
class SurfaceModel:
    name: str
    divisors: tuple[DivisorDatum, ...]
    rank_pic: int
    bad_primes: frozenset[int] = field(default_factory=frozenset)
    height_model: str | None = None

    @property
    def u(self) -> tuple[int, ...]:
        return tuple(D.u for D in self.divisors)

    @property
    def v(self) -> tuple[int, ...]:
        return tuple(D.v for D in self.divisors)

    @property
    def d(self) -> tuple[int, ...]:
        return tuple(D.d for D in self.divisors)

    @property
    def c_star(self) -> tuple[object, ...]:
        return tuple(D.c_star for D in self.divisors)

    def __len__(self) -> int:
        return len(self.divisors)


@dataclass(frozen=True)
class Classification:
    J1: tuple[int, ...]
    J2: tuple[int, ...]
    J3: tuple[int, ...]
    J1c: dict  # c -> tuple of indices with v = u and c_star = c
    Ic: dict  # c -> tuple of indices with v > 0 and c_star = c
    J2star: tuple[int, ...]

    @property
    def special(self) -> tuple[int, ...]:
        out = set(self.J2star)
        for js in self.J1c.values():
            out.update(js)
        return tuple(sorted(out))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


# -- built-in tables ---------------------------------------------------------


def _ex1() -> SurfaceModel:
    # P^1 x P^1 with a = x1/x0, c = b/a = t1/t0.
    divs = (
        DivisorDatum(0, "x1=0", 1, 1, Fraction(0), 0),
        DivisorDatum(1, "x0=0", -1, -1, ALL_OF_Q, 2),
        DivisorDatum(2, "t0=0", 0, -1, ALL_OF_Q, 2),
    )
    return SurfaceModel("ex1-split-quadric", divs, 2, frozenset(), "ex1")


def _ex2() -> SurfaceModel:
    # Minimal desingularization of the A3+A1 quartic del Pezzo surface:
    # four lines and three exceptional curves carrying the boundary.
    divs = (
        DivisorDatum(0, "l0'", -1, -1, ALL_OF_Q, 2),
        DivisorDatum(1, "l1''", 1, 1, Fraction(1), 0),
        DivisorDatum(2, "l2''", 1, 1, Fraction(2), 0),
        DivisorDatum(3, "l3''", -2, -3, ALL_OF_Q, 4),
        DivisorDatum(4, "l4'", 1, 0, ALL_OF_Q, 1),
        DivisorDatum(5, "l5'", -1, -2, ALL_OF_Q, 3),
        DivisorDatum(6, "l6", 0, -1, ALL_OF_Q, 2),
    )
    return SurfaceModel("ex2-a3a1-quartic", divs, 6, frozenset(), None)


def ex3_roots(n: int) -> tuple[int, ...]:
    """The orbit set R = {0, 1, ..., n-1} used for the ex3 family."""
    return tuple(range(n))


def _ex3(n: int) -> SurfaceModel:
    # Blowup of P^2 (coordinates [a : b : 1]) at the points [0 : rho : 1].
    divs = [
        DivisorDatum(0, "a=0", 1, 0, ALL_OF_Q, 1),
        DivisorDatum(1, "line-at-infinity", -1, -1, ALL_OF_Q, 2),
    ]
    for k, rho in enumerate(ex3_roots(n)):
        divs.append(DivisorDatum(2 + k, f"E{rho}", 1, 1, Fraction(rho), 0))
    bad = frozenset(int(p) for p in sympy.primerange(2, n))
    return SurfaceModel(f"ex3-orbit-closure({n})", tuple(divs), n + 1, bad, "ex3")


def load_model(name: str, n: int | None = None) -> SurfaceModel:
    """Return a built-in model by name; ex3 needs the orbit size n >= 3.

    The ex3 size may also be given inline, as in "ex3(4)".
    """
    key = name.strip()
    if key.endswith(")") and "(" in key:
        base, arg = key[:-1].split("(", 1)
        key = base
        try:
            n = int(arg)
        except ValueError:
            raise ModelError(f"malformed model parameter in {name!r}") from None
    if key not in _ALIASES:
        raise ModelError(f"unknown model {name!r}; expected one of ex1, ex2, ex3")
    canon = _ALIASES[key]
    if canon == "ex1-split-quadric":
        model = _ex1()
    elif canon == "ex2-a3a1-quartic":
        model = _ex2()
    else:
        if n is None:
            n = 3
        if n < 3:
            raise ModelError(f"ex3 requires n >= 3, got {n}")
        model = _ex3(n)
    failures = [c for c in verify_geometry(model) if not c.passed]
    if failures:
        raise ModelError("built-in model failed validation: " + ", ".join(f.name for f in failures))
    return model


# -- classification ----------------------------------------------------------


def classify(model: SurfaceModel) -> Classification:
    J1, J2, J3 = [], [], []
    J1c: dict = {}
    Ic: dict = {}
    J2star = []
    for D in model.divisors:
        if D.u > 0:
            J1.append(D.id)
            if D.v > 0 and D.c_star is not ALL_OF_Q:
                Ic.setdefault(D.c_star, []).append(D.id)
                if D.v == D.u:
                    J1c.setdefault(D.c_star, []).append(D.id)
        elif D.u < 0:
            J2.append(D.id)
            if D.v == D.u:
                J2star.append(D.id)
        else:
            J3.append(D.id)
    return Classification(
        tuple(J1),
        tuple(J2),
        tuple(J3),
        {c: tuple(v) for c, v in J1c.items()},
        {c: tuple(v) for c, v in Ic.items()},
        tuple(J2star),
    )


def _is_unit_outside(x: Fraction, primes: Iterable[int]) -> bool:
    if x == 0:
        return False
    allowed = set(primes)
    for part in (x.numerator, x.denominator):
        for p in sympy.factorint(abs(part)):
            if p not in allowed:
                return False
    return True


def verify_geometry(model: SurfaceModel) -> list[CheckResult]:
    """Evaluate every divisor and model invariant; failures are entries, not exceptions."""
    out = []

    def add(name, ok, detail=""):
        out.append(CheckResult(name, bool(ok), detail))

    for D in model.divisors:
        tag = f"{D.label}"
        add(f"d_plus_u_ge_1[{tag}]", D.d + D.u >= 1, f"d+u = {D.d + D.u}")
        add(f"d_le_1_minus_v[{tag}]", D.d <= 1 - D.v, f"d = {D.d}, 1-v = {1 - D.v}")
        add(f"v_le_u[{tag}]", D.v <= D.u, f"v = {D.v}, u = {D.u}")
        all_q = D.c_star is ALL_OF_Q
        ok = (all_q == (D.v <= 0)) and (all_q or isinstance(D.c_star, Fraction))
        add(f"c_star_consistency[{tag}]", ok, f"v = {D.v}, c_star = {D.c_star}")

    ids = [D.id for D in model.divisors]
    add("ids_are_index_set", ids == list(range(len(ids))), f"ids = {ids}")
    add("rank_equals_J_minus_1", model.rank_pic == len(model.divisors) - 1,
        f"rank = {model.rank_pic}, |J| = {len(model.divisors)}")
    g = reduce(math.gcd, (abs(x) for x in model.u), 0)
    add("gcd_u_is_1", g == 1, f"gcd = {g}")

    cl = classify(model)
    add("J2_nonempty", len(cl.J2) > 0, f"|J2| = {len(cl.J2)}")
    add("J1_nonempty", len(cl.J1) > 0, f"|J1| = {len(cl.J1)}")

    worst = len(cl.J2star)
    worst_c = None
    for c, js in cl.J1c.items():
        if len(js) + len(cl.J2star) > worst:
            worst = len(js) + len(cl.J2star)
            worst_c = c
    add("critical_index_bound", worst <= model.rank_pic,
        f"max_c |J1^c u J2*| = {worst} (c = {worst_c}), rank = {model.rank_pic}")

    containment = all(set(js) <= set(cl.Ic.get(c, ())) for c, js in cl.J1c.items())
    containment = containment and all(set(js) <= set(cl.J1) for js in cl.Ic.values())
    add("J1c_in_Ic_in_J1", containment, "")

    cs = sorted(cl.Ic)
    offending = []
    for i, c1 in enumerate(cs):
        if not _is_unit_outside(Fraction(c1.denominator), model.bad_primes):
            offending.append((c1,))
        for c2 in cs[i + 1:]:
            if not _is_unit_outside(c1 - c2, model.bad_primes):
                offending.append((c1, c2))
    add("c_star_differences_units", not offending,
        f"bad primes = {sorted(model.bad_primes)}, offending = {offending}")
    return out


def all_checks_pass(model: SurfaceModel) -> bool:
    return all(c.passed for c in verify_geometry(model))


def mutate(model: SurfaceModel, j: int, **changes) -> SurfaceModel:
    """Copy of the model with fields of divisor j replaced (no validation)."""
    divs = list(model.divisors)
    divs[j] = replace(divs[j], **changes)
    return replace(model, divisors=tuple(divs))


# -- plain-text table --------------------------------------------------------


def _fmt_c(c) -> str:
    return "ALL" if c is ALL_OF_Q else str(c)


def to_table(model: SurfaceModel) -> str:
    lines = [
        f"# model {model.name}",
        f"# rank_pic {model.rank_pic}",
        f"# bad_primes {','.join(str(p) for p in sorted(model.bad_primes)) or '-'}",
        f"# height_model {model.height_model or '-'}",
        "# id label u v c_star d",
    ]
    for D in model.divisors:
        lines.append(f"{D.id} {D.label} {D.u} {D.v} {_fmt_c(D.c_star)} {D.d}")
    return "\n".join(lines) + "\n"


def from_table(text: str) -> SurfaceModel:
    meta = {}
    divs = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split(None, 1)
            if len(parts) == 2 and parts[0] in ("model", "rank_pic", "bad_primes", "height_model"):
                meta[parts[0]] = parts[1].strip()
            continue
        fields = line.split()
        if len(fields) != 6:
            raise ModelError(f"malformed divisor line: {raw!r}")
        i, label, u, v, c, d = fields
        c_star = ALL_OF_Q if c == "ALL" else Fraction(c)
        divs.append(DivisorDatum(int(i), label, int(u), int(v), c_star, int(d)))
    bp = meta.get("bad_primes", "-")
    bad = frozenset() if bp == "-" else frozenset(int(p) for p in bp.split(","))
    hm = meta.get("height_model", "-")
    return SurfaceModel(
        meta.get("model", "custom"),
        tuple(divs),
        int(meta.get("rank_pic", len(divs) - 1)),
        bad,
        None if hm == "-" else hm,
    )
