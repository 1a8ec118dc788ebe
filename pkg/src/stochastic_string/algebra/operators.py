"""Normal-ordered polynomials in bosonic ladder operators and zero modes.

Words are products of the generators
    ("c", n, i)  creation operator for mode n >= 1, direction i
    ("a", n, i)  annihilation operator
    ("x", i)     transverse zero-mode position
    ("p", i)     transverse zero-mode momentum
with the canonical commutators [a_{m,i}, c_{n,j}] = delta_mn delta_ij and
[x_i, p_j] = i delta_ij; everything else commutes. The canonical word
order is daggers, then positions, then momenta, then annihilators, each
block sorted by (mode, direction). Expressions store only canonical words,
so canonicalization is idempotent by construction.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import Coeff, ONE

Token = tuple
Word = tuple

_CLASS = {"c": 0, "x": 1, "p": 2, "a": 3}

# word -> {word: (re, im)} cache for the pure reordering kernel
_ORDER_CACHE: dict[Word, dict[Word, tuple[Fraction, Fraction]]] = {}


class ModeCutoffError(ValueError):
    """Operator touches a mode beyond the configured cutoff."""


def creation(n: int, i: int) -> "OperatorExpr":
    return OperatorExpr({(("c", n, i),): ONE})


def annihilation(n: int, i: int) -> "OperatorExpr":
    return OperatorExpr({(("a", n, i),): ONE})


def position(i: int) -> "OperatorExpr":
    return OperatorExpr({(("x", i),): ONE})


def momentum(i: int) -> "OperatorExpr":
    return OperatorExpr({(("p", i),): ONE})


def identity(coeff: Coeff | int | Fraction = 1) -> "OperatorExpr":
    c = coeff if isinstance(coeff, Coeff) else Coeff.rational(coeff)
    return OperatorExpr({(): c})


def _sort_key(token: Token):
    kind = token[0]
    if kind in ("c", "a"):
        return (_CLASS[kind], token[1], token[2])
    return (_CLASS[kind], token[1])


def _in_order(left: Token, right: Token) -> bool:
    return _sort_key(left) <= _sort_key(right)


def _swap_term(left: Token, right: Token) -> tuple[Fraction, Fraction] | None:
    """Scalar commutator produced when moving ``left`` past ``right``."""
    if left[0] == "a" and right[0] == "c":
        if left[1] == right[1] and left[2] == right[2]:
            return (Fraction(1), Fraction(0))
        return None
    if left[0] == "p" and right[0] == "x":
        if left[1] == right[1]:
            return (Fraction(0), Fraction(-1))
        return None
    return None


_ORDER_CACHE_LIMIT = 400_000


def normal_order_word(word: Word) -> dict[Word, tuple[Fraction, Fraction]]:
    """Rewrite a product of generators as canonical words with scalar weights."""
    cached = _ORDER_CACHE.get(word)
    if cached is not None:
        return cached
    out: dict[Word, tuple[Fraction, Fraction]] = {}
    stack: list[tuple[Word, tuple[Fraction, Fraction]]] = [(word, (Fraction(1), Fraction(0)))]
    while stack:
        w, (re, im) = stack.pop()
        for idx in range(len(w) - 1):
            left, right = w[idx], w[idx + 1]
            if _in_order(left, right):
                continue
            swapped = w[:idx] + (right, left) + w[idx + 2 :]
            extra = _swap_term(left, right)
            if extra is not None:
                contracted = w[:idx] + w[idx + 2 :]
                ere, eim = extra
                stack.append((contracted, (re * ere - im * eim, re * eim + im * ere)))
            stack.append((swapped, (re, im)))
            break
        else:
            cre, cim = out.get(w, (Fraction(0), Fraction(0)))
            out[w] = (cre + re, cim + im)
    out = {w: v for w, v in out.items() if v[0] or v[1]}
    if len(_ORDER_CACHE) < _ORDER_CACHE_LIMIT:
        _ORDER_CACHE[word] = out
    return out


def _word_profile(word: Word):
    """(annihilated keys, created keys, x dirs, p dirs) for commutation tests."""
    ann, cre, xs, ps = set(), set(), set(), set()
    for tok in word:
        kind = tok[0]
        if kind == "a":
            ann.add((tok[1], tok[2]))
        elif kind == "c":
            cre.add((tok[1], tok[2]))
        elif kind == "x":
            xs.add(tok[1])
        else:
            ps.add(tok[1])
    return ann, cre, xs, ps


def _interacting(p1, p2) -> bool:
    a1, c1, x1, pp1 = p1
    a2, c2, x2, pp2 = p2
    return bool((a1 & c2) or (c1 & a2) or (x1 & pp2) or (pp1 & x2))


class OperatorExpr:
    """Finite sum of canonical words with exact coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Word, Coeff] | None = None):
        self.terms = {w: c for w, c in (terms or {}).items() if not c.is_zero()}

    @staticmethod
    def from_raw_terms(raw: list[tuple[Coeff, Word]]) -> "OperatorExpr":
        """Build an expression from possibly non-canonical words."""
        out: dict[Word, Coeff] = {}
        for coeff, word in raw:
            if coeff.is_zero():
                continue
            for canon, (re, im) in normal_order_word(word).items():
                scalar = Coeff({(0, 1): (re, im)})
                _accumulate(out, canon, coeff * scalar)
        return OperatorExpr(out)

    # -- algebra -----------------------------------------------------------
    def __add__(self, other: "OperatorExpr") -> "OperatorExpr":
        out = dict(self.terms)
        for w, c in other.terms.items():
            _accumulate(out, w, c)
        return OperatorExpr(out)

    def __sub__(self, other: "OperatorExpr") -> "OperatorExpr":
        return self + other.scale(-1)

    def scale(self, value) -> "OperatorExpr":
        if isinstance(value, Coeff):
            return OperatorExpr({w: c * value for w, c in self.terms.items()})
        return OperatorExpr({w: c.scale(value) for w, c in self.terms.items()})

    def __mul__(self, other: "OperatorExpr") -> "OperatorExpr":
        out: dict[Word, Coeff] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                c12 = c1 * c2
                for canon, (re, im) in normal_order_word(w1 + w2).items():
                    _accumulate(out, canon, c12 * Coeff({(0, 1): (re, im)}))
        return OperatorExpr(out)

    def dagger(self) -> "OperatorExpr":
        raw = []
        for word, coeff in self.terms.items():
            flipped = tuple(
                ("a", t[1], t[2]) if t[0] == "c"
                else ("c", t[1], t[2]) if t[0] == "a"
                else t
                for t in reversed(word)
            )
            raw.append((coeff.conjugate(), flipped))
        return OperatorExpr.from_raw_terms(raw)

    # -- queries -----------------------------------------------------------
    def coefficient(self, word: Word) -> Coeff:
        return self.terms.get(tuple(word), Coeff.zero())

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, OperatorExpr) and self.terms == other.terms

    def max_mode(self) -> int:
        modes = [t[1] for w in self.terms for t in w if t[0] in ("c", "a")]
        return max(modes, default=0)

    def substitute_a(self, value) -> "OperatorExpr":
        return OperatorExpr({w: c.substitute_a(value) for w, c in self.terms.items()})

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for word, coeff in sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0])):
            name = "*".join(_token_name(t) for t in word) or "1"
            parts.append(f"({coeff!r})*{name}")
        return " + ".join(parts)


def _token_name(token: Token) -> str:
    kind = token[0]
    if kind == "c":
        return f"ad[{token[1]},{token[2]}]"
    if kind == "a":
        return f"a[{token[1]},{token[2]}]"
    return f"{kind}0[{token[1]}]"


def _accumulate(store: dict[Word, Coeff], word: Word, coeff: Coeff) -> None:
    existing = store.get(word)
    total = coeff if existing is None else existing + coeff
    if total.is_zero():
        store.pop(word, None)
    else:
        store[word] = total


def commutator(
    A: OperatorExpr,
    B: OperatorExpr,
    mode_cutoff: int | None = None,
    word_filter=None,
) -> OperatorExpr:
    """AB - BA, re-canonicalized with exact coefficients.

    Word pairs whose generators all commute are skipped outright; their
    two orderings produce identical canonical terms. ``word_filter``
    restricts which canonical result words are accumulated (the full
    Wick expansion still runs; only storage is filtered).
    """
    if mode_cutoff is not None:
        for expr in (A, B):
            if expr.max_mode() > mode_cutoff:
                raise ModeCutoffError(
                    f"operator uses mode {expr.max_mode()} beyond cutoff {mode_cutoff}"
                )
    out: dict[Word, Coeff] = {}
    b_items = [(w, c, _word_profile(w)) for w, c in B.terms.items()]
    for w1, c1 in A.terms.items():
        prof1 = _word_profile(w1)
        for w2, c2, prof2 in b_items:
            if not _interacting(prof1, prof2):
                continue
            c12 = c1 * c2
            forward = normal_order_word(w1 + w2)
            backward = normal_order_word(w2 + w1)
            for canon, (re, im) in forward.items():
                if word_filter is not None and not word_filter(canon):
                    continue
                bre, bim = backward.get(canon, (Fraction(0), Fraction(0)))
                dre, dim = re - bre, im - bim
                if dre or dim:
                    _accumulate(out, canon, c12 * Coeff({(0, 1): (dre, dim)}))
            for canon, (re, im) in backward.items():
                if canon not in forward:
                    if word_filter is not None and not word_filter(canon):
                        continue
                    _accumulate(out, canon, c12 * Coeff({(0, 1): (-re, -im)}))
    return OperatorExpr(out)
