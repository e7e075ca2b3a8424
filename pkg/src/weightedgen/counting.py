"""Exact weighted counting: totals, distribution moments, weight-class spectra.

The central object is the count table of the recursive method: for every
nonterminal A of a binary-form grammar and every length m, the total weight of
the words A derives at that length.  All arithmetic is exact rational by
default; a high-precision float backend (mpmath, configurable mantissa) exists
for long coefficient tails where exactness is pointless.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp

from .grammar import NormalizedGrammar
from .numerics import to_mpf


class EmptyLanguageError(ValueError):
    """The language has no word of the requested length."""


class ClassCapExceeded(RuntimeError):
    """The weight-class DP grew past its configured cap."""


class CountTable:
    """Per-(nonterminal, length) total weights for a normalized grammar.

    With `precision` unset the table holds exact Fractions; otherwise mpf
    values with the given binary precision.  Construction costs
    O(|rules| * horizon^2) arithmetic operations; completed tables are
    immutable and safe to share.
    """

    def __init__(self, grammar: NormalizedGrammar, weights, horizon: int,
                 precision: int | None = None):
        if horizon < 0:
            raise ValueError("horizon must be nonnegative")
        self.grammar = grammar
        self.horizon = horizon
        self.precision = precision
        self.weights = {t: Fraction(w) for t, w in weights.items()}
        for t in grammar.terminals:
            if t not in self.weights:
                raise ValueError(f"missing weight for terminal {t!r}")
        if precision is None:
            self._values = self._fill(self.weights, Fraction(0), Fraction(1))
        else:
            with mp.workprec(precision):
                wf = {t: to_mpf(w) for t, w in self.weights.items()}
                self._values = self._fill(wf, mp.mpf(0), mp.mpf(1))

    def _fill(self, w, zero, one):
        ng = self.grammar
        vals = {nt: [zero] * (self.horizon + 1) for nt in ng.nonterminals}
        for m in range(self.horizon + 1):
            for nt in ng.nonterminals:
                acc = zero
                for r in ng.alternatives(nt):
                    if r.kind == "term":
                        if m == 1:
                            acc += w[r.rhs[0]]
                    elif r.kind == "eps":
                        if m == 0:
                            acc += one
                    elif m >= 2:
                        b, c = r.rhs
                        vb, vc = vals[b], vals[c]
                        for j in range(1, m):
                            acc += vb[j] * vc[m - j]
                vals[nt][m] = acc
        return vals

    def value(self, nt: str, m: int):
        if not 0 <= m <= self.horizon:
            raise ValueError(f"length {m} outside horizon {self.horizon}")
        return self._values[nt][m]

    def total(self, m: int):
        """Total weight of length-m words of the language."""
        return self.value(self.grammar.axiom, m)

    def coefficients(self) -> list:
        return list(self._values[self.grammar.axiom])

    # -- sampler support ----------------------------------------------------

    def rule_contribution(self, rule, m: int):
        """Total weight this rule contributes at length m."""
        if rule.kind == "term":
            return self.weights[rule.rhs[0]] if m == 1 else 0
        if rule.kind == "eps":
            return 1 if m == 0 else 0
        if m < 2:
            return 0
        b, c = rule.rhs
        return sum(self.value(b, j) * self.value(c, m - j) for j in range(1, m))

    def split_products(self, rule, m: int) -> list:
        """Nonzero (split point, weight) pairs for a pair rule at length m."""
        if rule.kind != "pair":
            raise ValueError("split_products is only defined for pair rules")
        b, c = rule.rhs
        out = []
        for j in range(1, m):
            v = self.value(b, j) * self.value(c, m - j)
            if v:
                out.append((j, v))
        return out


def build_counts(grammar: NormalizedGrammar, weights=None, n: int = 0,
                 precision: int | None = None) -> CountTable:
    """Count table up to length n (weights default to the grammar's own)."""
    if weights is None:
        weights = grammar.weights
    return CountTable(grammar, weights, n, precision)


def moment(grammar: NormalizedGrammar, weights, k: int, n: int) -> Fraction:
    """k-th moment of the length-n weighted distribution.

    Equals the total weight under the pointwise k-th power of the weight
    vector, divided by the k-th power of the plain total.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if weights is None:
        weights = grammar.weights
    weights = {t: Fraction(w) for t, w in weights.items()}
    total = build_counts(grammar, weights, n).total(n)
    if total == 0:
        raise EmptyLanguageError(f"no words of length {n}")
    powered = {t: w ** k for t, w in weights.items()}
    total_k = build_counts(grammar, powered, n).total(n)
    return total_k / total ** k


# ---------------------------------------------------------------------------
# weight-class spectrum


@dataclass(frozen=True)
class WeightClass:
    weight: Fraction
    count: int
    compositions: tuple  # composition vectors over the weighted terminals


@dataclass(frozen=True)
class WeightSpectrum:
    """Distinct word weights within the length-n slice, with multiplicities.

    Classes are sorted by strictly increasing weight; the first/last entries
    are the minimal/maximal word weight.
    """

    n: int
    weighted_terminals: tuple
    classes: tuple

    def total_count(self) -> int:
        return sum(c.count for c in self.classes)

    def total_weight(self) -> Fraction:
        return sum((c.count * c.weight for c in self.classes), Fraction(0))

    def min_weight(self) -> Fraction:
        return self.classes[0].weight

    def max_weight(self) -> Fraction:
        return self.classes[-1].weight

    def to_csv(self) -> str:
        lines = ["weight_num,weight_den,multiplicity"]
        for c in self.classes:
            lines.append(f"{c.weight.numerator},{c.weight.denominator},{c.count}")
        return "\n".join(lines) + "\n"


def min_max_weight(spectrum: WeightSpectrum) -> tuple:
    return spectrum.min_weight(), spectrum.max_weight()


def _composition_profiles(grammar: NormalizedGrammar, weights, n, class_cap):
    """Per-length maps {composition vector: word count} for the axiom.

    Compositions only track terminals with non-unit weight, which keeps the
    class count at (n+1)^#weighted instead of (n+1)^|V|.
    """
    weighted = tuple(sorted(t for t in grammar.terminals if weights[t] != 1))
    index = {t: i for i, t in enumerate(weighted)}
    dim = len(weighted)
    zero_vec = (0,) * dim

    vals = {nt: [{} for _ in range(n + 1)] for nt in grammar.nonterminals}
    for m in range(n + 1):
        for nt in grammar.nonterminals:
            acc = {}
            for r in grammar.alternatives(nt):
                if r.kind == "term":
                    if m == 1:
                        t = r.rhs[0]
                        if t in index:
                            vec = tuple(1 if i == index[t] else 0 for i in range(dim))
                        else:
                            vec = zero_vec
                        acc[vec] = acc.get(vec, 0) + 1
                elif r.kind == "eps":
                    if m == 0:
                        acc[zero_vec] = acc.get(zero_vec, 0) + 1
                elif m >= 2:
                    b, c = r.rhs
                    vb, vc = vals[b], vals[c]
                    for j in range(1, m):
                        db, dc = vb[j], vc[m - j]
                        if not db or not dc:
                            continue
                        for cb, nb in db.items():
                            for cc, nc in dc.items():
                                key = tuple(x + y for x, y in zip(cb, cc)) if dim else zero_vec
                                acc[key] = acc.get(key, 0) + nb * nc
                if len(acc) > class_cap:
                    raise ClassCapExceeded(
                        f"more than {class_cap} weight classes at length {m}")
            vals[nt][m] = acc
    return weighted, vals[grammar.axiom]


def weight_spectra(grammar: NormalizedGrammar, weights=None, n: int = 0, *,
                   class_cap: int = 200_000) -> list:
    """WeightSpectrum for every length 0..n (None where the slice is empty)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if weights is None:
        weights = grammar.weights
    weights = {t: Fraction(w) for t, w in weights.items()}
    weighted, profiles = _composition_profiles(grammar, weights, n, class_cap)
    spectra = []
    for m, profile in enumerate(profiles):
        if not profile:
            spectra.append(None)
            continue
        groups = {}
        for comp, count in profile.items():
            chi = Fraction(1)
            for t, e in zip(weighted, comp):
                chi *= weights[t] ** e
            entry = groups.setdefault(chi, [0, []])
            entry[0] += count
            entry[1].append(comp)
        classes = tuple(
            WeightClass(chi, cnt, tuple(sorted(comps)))
            for chi, (cnt, comps) in sorted(groups.items()))
        spectra.append(WeightSpectrum(m, weighted, classes))
    return spectra


def weight_spectrum(grammar: NormalizedGrammar, weights=None, n: int = 0, *,
                    class_cap: int = 200_000) -> WeightSpectrum:
    """The weight-class spectrum of the length-n slice (exact)."""
    sp = weight_spectra(grammar, weights, n, class_cap=class_cap)[n]
    if sp is None:
        raise EmptyLanguageError(f"no words of length {n}")
    return sp


def extreme_weights(grammar: NormalizedGrammar, weights=None, n: int = 0) -> tuple:
    """(minimal, maximal) word weight at length n, by min/max-product DP.

    Cheaper than the full spectrum and immune to its class-count cap.
    """
    if weights is None:
        weights = grammar.weights
    weights = {t: Fraction(w) for t, w in weights.items()}
    results = []
    for best in (min, max):
        vals = {nt: [None] * (n + 1) for nt in grammar.nonterminals}
        for m in range(n + 1):
            for nt in grammar.nonterminals:
                cand = []
                for r in grammar.alternatives(nt):
                    if r.kind == "term":
                        if m == 1:
                            cand.append(weights[r.rhs[0]])
                    elif r.kind == "eps":
                        if m == 0:
                            cand.append(Fraction(1))
                    elif m >= 2:
                        b, c = r.rhs
                        for j in range(1, m):
                            vb = vals[b][j]
                            vc = vals[c][m - j]
                            if vb is not None and vc is not None:
                                cand.append(vb * vc)
                vals[nt][m] = best(cand) if cand else None
        top = vals[grammar.axiom][n]
        if top is None:
            raise EmptyLanguageError(f"no words of length {n}")
        results.append(top)
    return tuple(results)
