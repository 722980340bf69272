"""Sparse exterior algebra on R^7 with an exact (Fraction) and a binary64 backend.

Basis covectors are e^1..e^7.  A Form stores its coefficients on strictly
increasing index tuples; the full antisymmetric tensor is recovered by the
sign of the sorting permutation.
"""
from __future__ import annotations

import json
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, Iterator, Mapping, Tuple, Union

DIM = 7
BACKENDS = ("exact", "f64")

Index = Tuple[int, ...]
Scalar = Union[Fraction, float]


class BackendError(TypeError):
    """Raised when exact and binary64 values meet in one operation."""


class GradeError(ValueError):
    """Raised for degree bookkeeping mistakes (overflow, wrong grade)."""


def scalar(value, backend: str = "exact") -> Scalar:
    """Coerce ``value`` into the scalar type of ``backend``.

    Exact scalars accept int, Fraction and "p/q" strings; floats are refused
    so that binary64 noise never leaks into exact computations.
    """
    if backend == "exact":
        if isinstance(value, float):
            raise BackendError("float value given to the exact backend")
        if isinstance(value, (int, Fraction, str)):
            return Fraction(value)
        raise TypeError(f"cannot convert {type(value).__name__} to an exact scalar")
    if backend == "f64":
        if isinstance(value, str):
            return float(Fraction(value))
        return float(value)
    raise ValueError(f"unknown backend {backend!r}")


def perm_sign(seq: Iterable[int]) -> int:
    """Sign of the permutation sorting ``seq``; 0 if an entry repeats."""
    s = list(seq)
    if len(set(s)) != len(s):
        return 0
    inv = 0
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                inv += 1
    return -1 if inv % 2 else 1


def basis_indices(grade: int) -> list[Index]:
    return list(combinations(range(1, DIM + 1), grade))


def _check_key(key: Index, grade: int) -> Index:
    key = tuple(int(i) for i in key)
    if len(key) != grade:
        raise GradeError(f"key {key} does not have length {grade}")
    if any(i < 1 or i > DIM for i in key):
        raise GradeError(f"key {key} has an index outside 1..{DIM}")
    if any(key[i] >= key[i + 1] for i in range(len(key) - 1)):
        raise GradeError(f"key {key} is not strictly increasing")
    return key


class Form:
    """An alternating k-form on R^7.

    Immutable after construction.  Zero coefficients are dropped, so two
    equal forms always compare equal on the exact backend.
    """

    __slots__ = ("grade", "backend", "_c")

    def __init__(self, grade: int, coeffs: Mapping[Index, object] | None = None,
                 backend: str = "exact"):
        if not 0 <= grade <= DIM:
            raise GradeError(f"grade {grade} outside 0..{DIM}")
        if backend not in BACKENDS:
            raise ValueError(f"unknown backend {backend!r}")
        c: Dict[Index, Scalar] = {}
        for k, v in (coeffs or {}).items():
            key = _check_key(k, grade)
            val = scalar(v, backend)
            if val != 0:
                c[key] = c.get(key, 0) + val
                if c[key] == 0:
                    del c[key]
        self.grade = grade
        self.backend = backend
        self._c = c

    # construction helpers
    @classmethod
    def _raw(cls, grade: int, coeffs: Dict[Index, Scalar], backend: str) -> "Form":
        f = object.__new__(cls)
        f.grade = grade
        f.backend = backend
        f._c = {k: v for k, v in coeffs.items() if v != 0}
        return f

    @classmethod
    def zero(cls, grade: int, backend: str = "exact") -> "Form":
        return cls(grade, {}, backend)

    @classmethod
    def basis(cls, *idx: int, backend: str = "exact") -> "Form":
        """The monomial e^{i1...ik}; unsorted indices pick up the sign."""
        s = perm_sign(idx)
        if s == 0:
            return cls.zero(len(idx), backend)
        return cls(len(idx), {tuple(sorted(idx)): s}, backend)

    @classmethod
    def from_terms(cls, terms: Mapping[str, object], backend: str = "exact") -> "Form":
        """Build from digit-string keys, e.g. ``{"127": 1, "146": -1}``."""
        if not terms:
            raise GradeError("from_terms needs at least one term to infer the grade")
        grades = {len(k) for k in terms}
        if len(grades) != 1:
            raise GradeError("mixed grades in from_terms")
        grade = grades.pop()
        out: Dict[Index, Scalar] = {}
        for k, v in terms.items():
            idx = tuple(int(ch) for ch in k)
            s = perm_sign(idx)
            if s == 0:
                continue
            key = tuple(sorted(idx))
            out[key] = out.get(key, 0) + s * scalar(v, backend)
        return cls(grade, out, backend)

    @classmethod
    def from_vector(cls, comps: Iterable[object], backend: str = "exact") -> "Form":
        comps = list(comps)
        if len(comps) != DIM:
            raise GradeError(f"a vector needs {DIM} components")
        return cls(1, {(i + 1,): v for i, v in enumerate(comps)}, backend)

    # access
    def items(self) -> Iterator[Tuple[Index, Scalar]]:
        return iter(sorted(self._c.items()))

    def coeffs(self) -> Dict[Index, Scalar]:
        return dict(self._c)

    def __getitem__(self, idx: Index) -> Scalar:
        """Component of the full antisymmetric tensor at ``idx``."""
        idx = tuple(idx)
        if len(idx) != self.grade:
            raise GradeError("index length does not match grade")
        s = perm_sign(idx)
        if s == 0:
            return self._zero()
        return s * self._c.get(tuple(sorted(idx)), self._zero())

    def _zero(self) -> Scalar:
        return Fraction(0) if self.backend == "exact" else 0.0

    def components(self) -> list[Scalar]:
        """The 7 components of a 1-form."""
        if self.grade != 1:
            raise GradeError("components() is only defined for 1-forms")
        return [self._c.get((i,), self._zero()) for i in range(1, DIM + 1)]

    def value(self) -> Scalar:
        """The number carried by a 0-form."""
        if self.grade != 0:
            raise GradeError("value() is only defined for 0-forms")
        return self._c.get((), self._zero())

    def is_zero(self, atol: float = 0.0) -> bool:
        return all(abs(v) <= atol for v in self._c.values())

    def max_abs(self) -> Scalar:
        return max((abs(v) for v in self._c.values()), default=self._zero())

    def __len__(self) -> int:
        return len(self._c)

    # arithmetic
    def _same(self, other: "Form") -> None:
        if not isinstance(other, Form):
            raise TypeError(f"expected a Form, got {type(other).__name__}")
        if other.backend != self.backend:
            raise BackendError(f"mixed backends {self.backend} and {other.backend}")

    def __add__(self, other: "Form") -> "Form":
        self._same(other)
        if other.grade != self.grade:
            raise GradeError(f"cannot add grades {self.grade} and {other.grade}")
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0) + v
        return Form._raw(self.grade, c, self.backend)

    def __neg__(self) -> "Form":
        return Form._raw(self.grade, {k: -v for k, v in self._c.items()}, self.backend)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, c) -> "Form":
        if self.backend == "exact":
            c = scalar(c, "exact")
        else:
            c = float(c)
        return Form._raw(self.grade, {k: c * v for k, v in self._c.items()}, self.backend)

    def __mul__(self, c) -> "Form":
        if isinstance(c, Form):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Form":
        return self.scale(1 / scalar(c, self.backend))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return (self.grade == other.grade and self.backend == other.backend
                and self._c == other._c)

    def __hash__(self) -> int:
        return hash((self.grade, self.backend, frozenset(self._c.items())))

    def to_backend(self, backend: str) -> "Form":
        if backend == self.backend:
            return self
        if backend == "f64":
            return Form._raw(self.grade, {k: float(v) for k, v in self._c.items()}, "f64")
        return Form(self.grade, {k: Fraction(v) for k, v in self._c.items()}, "exact")

    def __repr__(self) -> str:
        if not self._c:
            return f"Form(0, grade={self.grade})"
        parts = []
        for k, v in self.items():
            name = "e" + "".join(str(i) for i in k) if k else "1"
            parts.append(f"{v}*{name}")
        return " + ".join(parts)

    # serialization
    def to_dict(self) -> dict:
        coeffs = {}
        for k, v in self.items():
            key = "".join(str(i) for i in k)
            coeffs[key] = _scalar_to_json(v)
        return {"grade": self.grade, "dim": DIM, "backend": self.backend,
                "coeffs": dict(sorted(coeffs.items()))}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping) -> "Form":
        if d.get("dim", DIM) != DIM:
            raise GradeError(f"only dim {DIM} is supported")
        backend = d.get("backend", "exact")
        grade = int(d["grade"])
        coeffs = {}
        for key, v in d.get("coeffs", {}).items():
            idx = tuple(int(ch) for ch in key)
            coeffs[idx] = _scalar_from_json(v, backend)
        return cls(grade, coeffs, backend)

    @classmethod
    def from_json(cls, s: str) -> "Form":
        return cls.from_dict(json.loads(s))


def _scalar_to_json(v: Scalar):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    return v


def _scalar_from_json(v, backend: str) -> Scalar:
    if backend == "exact":
        if isinstance(v, float):
            raise BackendError("exact form carries a float coefficient")
        return Fraction(v)
    return float(v)


def e(*idx: int, backend: str = "exact") -> Form:
    """Shorthand for ``Form.basis``."""
    return Form.basis(*idx, backend=backend)


def volume(backend: str = "exact") -> Form:
    return Form.basis(*range(1, DIM + 1), backend=backend)


def _need_same(a: Form, b: Form) -> None:
    if a.backend != b.backend:
        raise BackendError(f"mixed backends {a.backend} and {b.backend}")


def wedge(a: Form, b: Form) -> Form:
    _need_same(a, b)
    g = a.grade + b.grade
    if g > DIM:
        raise GradeError(f"wedge of grades {a.grade} and {b.grade} exceeds {DIM}")
    out: Dict[Index, Scalar] = {}
    for ka, va in a._c.items():
        for kb, vb in b._c.items():
            s = perm_sign(ka + kb)
            if s:
                key = tuple(sorted(ka + kb))
                out[key] = out.get(key, 0) + s * va * vb
    return Form._raw(g, out, a.backend)


def wedge_all(*forms: Form) -> Form:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def interior(x: "Form | Iterable", a: Form) -> Form:
    """i_X a, with X given as a 1-form (metric dual) or as 7 components."""
    if a.grade < 1:
        raise GradeError("interior product of a 0-form")
    if not isinstance(x, Form):
        x = Form.from_vector(x, a.backend)
    _need_same(x, a)
    if x.grade != 1:
        raise GradeError("interior product needs a vector")
    out: Dict[Index, Scalar] = {}
    for (i,), xi in x._c.items():
        for k, v in a._c.items():
            if i in k:
                pos = k.index(i)
                key = k[:pos] + k[pos + 1:]
                sgn = -1 if pos % 2 else 1
                out[key] = out.get(key, 0) + sgn * xi * v
    return Form._raw(a.grade - 1, out, a.backend)


def contract(a: Form, b: Form) -> Form:
    """The p-fold contraction a⌟b with (a⌟b)_J = sum over sorted I of a_I b_{IJ}."""
    _need_same(a, b)
    if a.grade > b.grade:
        raise GradeError(f"cannot contract grade {a.grade} into grade {b.grade}")
    out: Dict[Index, Scalar] = {}
    for kb, vb in b._c.items():
        sb = set(kb)
        for ka, va in a._c.items():
            if set(ka) <= sb:
                rest = tuple(i for i in kb if i not in ka)
                s = perm_sign(ka + rest)
                out[rest] = out.get(rest, 0) + s * va * vb
    return Form._raw(b.grade - a.grade, out, a.backend)


def inner(a: Form, b: Form) -> Scalar:
    """Hodge inner product of two forms of equal grade."""
    _need_same(a, b)
    if a.grade != b.grade:
        raise GradeError("inner product of different grades")
    small, big = (a, b) if len(a._c) <= len(b._c) else (b, a)
    total = a._zero()
    for k, v in small._c.items():
        w = big._c.get(k)
        if w is not None:
            total += v * w
    return total


def norm2(a: Form) -> Scalar:
    return inner(a, a)


def hodge(a: Form, orientation: int = 1) -> Form:
    """Hodge star for the Euclidean metric and volume orientation*e^{1234567}."""
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    full = tuple(range(1, DIM + 1))
    out: Dict[Index, Scalar] = {}
    for k, v in a._c.items():
        comp = tuple(i for i in full if i not in k)
        out[comp] = orientation * perm_sign(k + comp) * v
    return Form._raw(DIM - a.grade, out, a.backend)


def allclose(a: Form, b: Form, rtol: float = 1e-12, atol: float = 1e-14) -> bool:
    """Coefficientwise comparison; exact forms compare exactly."""
    if a.grade != b.grade:
        return False
    if a.backend == "exact" and b.backend == "exact":
        return a == b
    keys = set(a._c) | set(b._c)
    for k in keys:
        x = float(a._c.get(k, 0))
        y = float(b._c.get(k, 0))
        if abs(x - y) > atol + rtol * max(abs(x), abs(y)):
            return False
    return True


def flat(x: Iterable, backend: str = "exact") -> Form:
    """Components of a vector to its metric-dual 1-form (the metric is δ)."""
    if isinstance(x, Form):
        return x
    return Form.from_vector(x, backend)


def sharp(a: Form) -> list[Scalar]:
    """1-form to vector components."""
    return a.components()
