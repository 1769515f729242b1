"""Polynomials over idempotent binary variables (x * x == x).

A polynomial is a map from monomials to real coefficients, where a
monomial is a sorted duplicate-free tuple of variable indices (the empty
tuple is the constant term).  Multiplication merges index sets, so the
idempotent reduction is inherent in the representation rather than a
rewrite pass.  Zero coefficients are never stored.
"""

from __future__ import annotations

import numpy as np

from .errors import MissingVariable, ParseError


class BinPoly:
    """Immutable-by-convention polynomial over binary variables."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        canon = {}
        if terms:
            for mono, coef in terms.items():
                key = tuple(sorted(set(mono)))
                coef = canon.get(key, 0.0) + float(coef)
                if coef != 0.0:
                    canon[key] = coef
                elif key in canon:
                    del canon[key]
        self.terms = canon

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls) -> "BinPoly":
        return cls()

    @classmethod
    def const(cls, c) -> "BinPoly":
        return cls({(): float(c)})

    @classmethod
    def var(cls, i: int) -> "BinPoly":
        if i < 0:
            raise ValueError("variable indices must be non-negative")
        return cls({(int(i),): 1.0})

    # -- ring operations ------------------------------------------------

    def __add__(self, other) -> "BinPoly":
        if not isinstance(other, BinPoly):
            other = BinPoly.const(other)
        out = dict(self.terms)
        for mono, coef in other.terms.items():
            s = out.get(mono, 0.0) + coef
            if s != 0.0:
                out[mono] = s
            elif mono in out:
                del out[mono]
        res = BinPoly.__new__(BinPoly)
        res.terms = out
        return res

    __radd__ = __add__

    def __neg__(self) -> "BinPoly":
        res = BinPoly.__new__(BinPoly)
        res.terms = {m: -c for m, c in self.terms.items()}
        return res

    def __sub__(self, other) -> "BinPoly":
        if not isinstance(other, BinPoly):
            other = BinPoly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "BinPoly":
        return BinPoly.const(other) + (-self)

    def __mul__(self, other) -> "BinPoly":
        if not isinstance(other, BinPoly):
            res = BinPoly.__new__(BinPoly)
            c = float(other)
            res.terms = {} if c == 0.0 else {m: c * v for m, v in self.terms.items()}
            return res
        out = {}
        for ma, ca in self.terms.items():
            sa = set(ma)
            for mb, cb in other.terms.items():
                key = tuple(sorted(sa.union(mb)))
                s = out.get(key, 0.0) + ca * cb
                if s != 0.0:
                    out[key] = s
                elif key in out:
                    del out[key]
        res = BinPoly.__new__(BinPoly)
        res.terms = out
        return res

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, float)):
            other = BinPoly.const(other)
        return isinstance(other, BinPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "BinPoly<0>"
        bits = []
        for mono, coef in sorted(self.terms.items()):
            name = "*".join(f"x{i}" for i in mono) if mono else "1"
            bits.append(f"{coef:+g}*{name}")
        return f"BinPoly<{' '.join(bits)}>"

    # -- queries ----------------------------------------------------------

    def variables(self) -> tuple[int, ...]:
        seen = set()
        for mono in self.terms:
            seen.update(mono)
        return tuple(sorted(seen))

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def constant(self) -> float:
        return self.terms.get((), 0.0)

    # -- evaluation and substitution ---------------------------------------

    def eval(self, assignment) -> float:
        """Evaluate over a {0,1} assignment.

        `assignment` is a sequence indexed by variable number (or a dict);
        every variable appearing in the polynomial must be covered.
        """
        total = 0.0
        get = assignment.get if isinstance(assignment, dict) else None
        for mono, coef in self.terms.items():
            val = coef
            for i in mono:
                try:
                    b = get(i) if get else assignment[i]
                except (IndexError, KeyError):
                    b = None
                if b is None:
                    raise MissingVariable(f"assignment does not cover x{i}")
                if not b:
                    val = 0.0
                    break
            total += val
        return total

    def substitute(self, var: int, value) -> "BinPoly":
        """Substitute a variable by 0, 1, or another polynomial."""
        if isinstance(value, BinPoly):
            out = BinPoly.zero()
            for mono, coef in self.terms.items():
                if var in mono:
                    rest = BinPoly({tuple(i for i in mono if i != var): coef})
                    out = out + rest * value
                else:
                    out = out + BinPoly({mono: coef})
            return out
        value = int(value)
        if value not in (0, 1):
            raise ValueError("substitution value must be 0, 1, or a BinPoly")
        out = {}
        for mono, coef in self.terms.items():
            if var in mono:
                if value == 0:
                    continue
                mono = tuple(i for i in mono if i != var)
            s = out.get(mono, 0.0) + coef
            if s != 0.0:
                out[mono] = s
            elif mono in out:
                del out[mono]
        res = BinPoly.__new__(BinPoly)
        res.terms = out
        return res

    # -- dense evaluation over all assignments ------------------------------

    def to_arrays(self):
        """(masks, coefficients) arrays; bit i of a mask = variable i."""
        masks = np.empty(len(self.terms), dtype=np.int64)
        coefs = np.empty(len(self.terms), dtype=np.float64)
        for k, (mono, coef) in enumerate(self.terms.items()):
            m = 0
            for i in mono:
                m |= 1 << i
            masks[k] = m
            coefs[k] = coef
        order = np.argsort(masks)
        return masks[order], coefs[order]

    @classmethod
    def from_arrays(cls, masks, coefs) -> "BinPoly":
        terms = {}
        for m, c in zip(masks, coefs):
            mono = tuple(i for i in range(int(m).bit_length()) if (int(m) >> i) & 1)
            terms[mono] = terms.get(mono, 0.0) + float(c)
        return cls(terms)


def dense_values(masks, coefs, num_vars: int) -> np.ndarray:
    """Evaluate a (masks, coefs) polynomial at every assignment.

    Entry k of the result is the value at the assignment whose variable i
    equals bit i of k.  Implemented as a subset-sum (zeta) transform,
    O(num_vars * 2**num_vars).
    """
    out = np.zeros(1 << num_vars, dtype=np.float64)
    np.add.at(out, np.asarray(masks, dtype=np.int64), np.asarray(coefs, dtype=np.float64))
    for b in range(num_vars):
        view = out.reshape(-1, 2, 1 << b)
        view[:, 1, :] += view[:, 0, :]
    return out


# -- line-delimited PUBO file format ---------------------------------------
#
# One term per line: `coefficient i1 i2 ... ik` (no indices = constant
# term).  Coefficients are printed with repr-faithful precision so the
# round trip is bit exact.


def dumps_pubo(p: BinPoly) -> str:
    lines = []
    for mono, coef in sorted(p.terms.items()):
        if mono:
            lines.append(f"{coef:.17g} " + " ".join(str(i) for i in mono))
        else:
            lines.append(f"{coef:.17g}")
    return "\n".join(lines) + ("\n" if lines else "")


def loads_pubo(text: str) -> BinPoly:
    terms = {}
    for lineno, ln in enumerate(text.splitlines(), start=1):
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        cells = ln.split()
        try:
            coef = float(cells[0])
            mono = tuple(int(c) for c in cells[1:])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if any(i < 0 for i in mono):
            raise ParseError(f"line {lineno}: negative variable index")
        terms[mono] = terms.get(mono, 0.0) + coef
    return BinPoly(terms)


def write_pubo(p: BinPoly, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps_pubo(p))


def read_pubo(path) -> BinPoly:
    with open(path, "r", encoding="ascii") as fh:
        return loads_pubo(fh.read())
