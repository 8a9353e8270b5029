"""Branch-ratio products near 1: exact lambda, the PP/PG node walk,
offset maxima, and the bound C on a cycle's least term.

For a two-slope family the ratio product after (k1, k2) branch uses is
lambda = (m_grow/d)^k1 * (m_div/d)^k2.  The node walk keeps the running
product just below 1 (PP) and just above 1 (PG) and repeatedly replaces
one side by PP*PG; the emitted pairs (k1, k2) are exactly the counts for
which the least-term bound C peaks.  Comparisons against 1 are decided
exactly with adaptive-precision logarithms, so the walk stays correct
even when k grows far beyond anything a hardware float could separate.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence

import mpmath as mp

from .mappings import BranchCounts, MappingDef

DEFAULT_PRECISION_BITS = 256
PRECISION_ENV_VAR = "GX1_PRECISION_BITS"

# Bound numerators established for the two canonical families; the
# tighter Collatz constant is only valid from least term 8 up.
COLLATZ_CONSTANT = Fraction(7, 24)
COLLATZ_CONSTANT_FROM_8 = Fraction(63, 248)
THREE_X1_CONSTANT = Fraction(5, 12)


def default_precision_bits() -> int:
    raw = os.environ.get(PRECISION_ENV_VAR)
    if raw:
        try:
            bits = int(raw)
        except ValueError:
            raise ValueError(f"{PRECISION_ENV_VAR} must be an integer, got {raw!r}")
        if bits < 64:
            raise ValueError(f"{PRECISION_ENV_VAR} must be >= 64, got {bits}")
        return bits
    return DEFAULT_PRECISION_BITS


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _is_exact_one(terms: Sequence[tuple[int, int]]) -> bool:
    """Whether prod base^coef == 1 exactly (all prime exponents cancel)."""
    exps: dict[int, int] = {}
    for coef, base in terms:
        if coef == 0 or base == 1:
            continue
        for p, e in _factor(base).items():
            exps[p] = exps.get(p, 0) + coef * e
    return all(e == 0 for e in exps.values())


class _LogEvaluator:
    """Sum of coef*ln(base) terms with a certified error bound.

    Working precision only grows; per-precision logarithms are cached so
    repeated evaluations (the node walk does thousands) stay cheap.
    """

    MAX_PREC = 1 << 24

    def __init__(self, prec_bits: int | None = None):
        self.prec = max(64, prec_bits or default_precision_bits())
        self._cache: dict[tuple[int, int], mp.mpf] = {}

    def _ln(self, base: int) -> mp.mpf:
        key = (self.prec, base)
        val = self._cache.get(key)
        if val is None:
            val = mp.ln(base)
            self._cache[key] = val
        return val

    def evaluate(self, terms: Sequence[tuple[int, int]]):
        """(value, error_bound) at the current working precision."""
        with mp.workprec(self.prec):
            total = mp.mpf(0)
            scale = mp.mpf(0)
            for coef, base in terms:
                if coef == 0 or base == 1:
                    continue
                t = coef * self._ln(base)
                total += t
                scale += abs(t)
            err = scale * mp.mpf(2) ** (5 - self.prec) * (len(terms) + 1)
            return total, err

    def sign(self, terms: Sequence[tuple[int, int]]) -> int:
        """Exact sign of sum coef*ln(base); raises precision as needed."""
        if _is_exact_one(terms):
            return 0
        while True:
            value, err = self.evaluate(terms)
            if abs(value) > err:
                return 1 if value > 0 else -1
            if self.prec >= self.MAX_PREC:
                raise ArithmeticError("sign of log-linear form did not resolve")
            self.prec *= 2

    def tight(self, terms: Sequence[tuple[int, int]]):
        """Value with error below 2^-96 absolute and 2^-64 relative."""
        while True:
            value, err = self.evaluate(terms)
            if err <= mp.mpf(2) ** -96 and (value == 0 or err <= abs(value) * mp.mpf(2) ** -64):
                return value
            if self.prec >= self.MAX_PREC:
                raise ArithmeticError("log-linear form did not converge")
            self.prec *= 2


class LnLambda(NamedTuple):
    value: mp.mpf
    error_bound: mp.mpf
    negative: bool   # true when the exact ratio product is negative


def lambda_exact(mapping, counts) -> Fraction:
    """Exact reduced branch-ratio product for the given usage counts."""
    if isinstance(mapping, NodeFamily):
        k1, k2 = _as_pair(counts)
        return (Fraction(mapping.m_grow, mapping.d) ** k1
                * Fraction(mapping.m_div, mapping.d) ** k2)
    vec = counts.counts if isinstance(counts, BranchCounts) else tuple(counts)
    if len(vec) != mapping.d:
        raise ValueError(f"need {mapping.d} counts, got {len(vec)}")
    lam = Fraction(1)
    for (m, _), c in zip(mapping.branches, vec):
        lam *= Fraction(m, mapping.d) ** c
    return lam


def _lambda_terms(mapping: MappingDef, vec: Sequence[int]) -> tuple[list, bool]:
    terms = []
    negative = False
    k = 0
    for (m, _), c in zip(mapping.branches, vec):
        if c:
            if m < 0 and c % 2 == 1:
                negative = not negative
            terms.append((c, abs(m)))
            k += c
    terms.append((-k, mapping.d))
    return terms, negative


def ln_lambda(mapping: MappingDef, counts, precision_bits: int | None = None) -> LnLambda:
    """High-precision ln of |lambda| with a certified error bound.

    The bound is kept below 2^-(precision_bits - 8).  Negative
    multipliers make lambda signed; the log applies to |lambda| and the
    flag is set (with a warning), since the bound theory assumes
    positive branch ratios.
    """
    bits = max(64, precision_bits or default_precision_bits())
    vec = counts.counts if isinstance(counts, BranchCounts) else tuple(counts)
    if len(vec) != mapping.d:
        raise ValueError(f"need {mapping.d} counts, got {len(vec)}")
    terms, negative = _lambda_terms(mapping, vec)
    if negative:
        warnings.warn("negative multiplier: ln applies to |lambda|", stacklevel=2)
    if _is_exact_one(terms):
        return LnLambda(mp.mpf(0), mp.mpf(0), negative)
    target = mp.mpf(2) ** (8 - bits)
    ev = _LogEvaluator(bits + 16)
    while True:
        value, err = ev.evaluate(terms)
        if err <= target:
            return LnLambda(value, err, negative)
        ev.prec *= 2


def rho_max(k1: int) -> Fraction:
    """Largest |offset| over all orderings of k1 growth branches and any
    number of division branches of the Collatz-type family."""
    if k1 < 0:
        raise ValueError("k1 must be >= 0")
    return Fraction(4 ** k1 - 3 ** k1, 3 ** k1)


@dataclass(frozen=True)
class NodeFamily:
    """A two-slope analysis family: ratios m_div/d < 1 < m_grow/d."""

    name: str
    d: int
    m_div: int
    m_grow: int
    constant: Fraction | None = None

    def __post_init__(self):
        if not 0 < self.m_div < self.d < self.m_grow:
            raise ValueError(
                f"need 0 < m_div < d < m_grow, got ({self.m_div}, {self.d}, {self.m_grow})")

    @property
    def ratio_div(self) -> Fraction:
        return Fraction(self.m_div, self.d)

    @property
    def ratio_grow(self) -> Fraction:
        return Fraction(self.m_grow, self.d)

    def lambda_range(self) -> tuple[Fraction, Fraction]:
        """Open interval confining every ratio product the node walk visits."""
        return (self.ratio_div / self.ratio_grow, self.ratio_grow / self.ratio_div)

    def terms(self, k1: int, k2: int) -> list[tuple[int, int]]:
        return [(k1, self.m_grow), (k2, self.m_div), (-(k1 + k2), self.d)]


COLLATZ_FAMILY = NodeFamily("collatz", 3, 2, 4, COLLATZ_CONSTANT)
THREE_X1_FAMILY = NodeFamily("3x1", 2, 1, 3, THREE_X1_CONSTANT)


def family_for_mapping(mapping: MappingDef) -> NodeFamily:
    """The two-slope analysis family of a mapping (e.g. every mod-3
    permutation variant shares the Collatz family)."""
    split = mapping.two_ratio_split()
    if split is None:
        raise ValueError(f"{mapping} does not have exactly two distinct branch slopes")
    grow, div = split
    m_grow = mapping.branches[grow[0]][0]
    m_div = mapping.branches[div[0]][0]
    if m_grow < 0 or m_div < 0:
        raise ValueError("two-slope analysis requires positive multipliers")
    for known in (COLLATZ_FAMILY, THREE_X1_FAMILY):
        if (mapping.d, m_div, m_grow) == (known.d, known.m_div, known.m_grow):
            return known
    return NodeFamily(mapping.name or f"two-slope mod {mapping.d}",
                      mapping.d, m_div, m_grow, None)


def node_family(selector) -> NodeFamily:
    """Resolve a NodeFamily from a name, NodeFamily or MappingDef."""
    if isinstance(selector, NodeFamily):
        return selector
    if isinstance(selector, MappingDef):
        return family_for_mapping(selector)
    if selector == "collatz":
        return COLLATZ_FAMILY
    if selector == "3x1":
        return THREE_X1_FAMILY
    from .mappings import mapping_from_name

    return family_for_mapping(mapping_from_name(selector))


def _as_pair(counts) -> tuple[int, int]:
    if isinstance(counts, BranchCounts):
        return counts.as_pair()
    k1, k2 = counts
    return int(k1), int(k2)


@dataclass(frozen=True)
class BoundResult:
    """The bound C on the least term of any cycle with the given counts."""

    C: float
    ln_C: float
    constant: Fraction
    k_growth: int


def bound_C(family, counts, constant=None, precision_bits: int | None = None) -> BoundResult:
    """C = constant / ((1/k_growth) * |ln lambda|).

    `family` is a NodeFamily, a family name, or a MappingDef.  Two-slope
    families divide |ln lambda| by k1 (growth uses); generalized
    mappings divide by the total count outside residue class 0 and
    require an explicit constant.  Undefined when lambda = 1 or when no
    growth branch was used.
    """
    bits = max(64, precision_bits or default_precision_bits())
    if isinstance(family, MappingDef) and family.two_ratio_split() is None:
        vec = counts.counts if isinstance(counts, BranchCounts) else tuple(counts)
        terms, negative = _lambda_terms(family, vec)
        k_growth = sum(vec) - vec[0]
        if constant is None:
            raise ValueError("generalized mappings need an explicit bound constant")
    else:
        fam = node_family(family)
        k1, k2 = _as_pair(counts)
        terms = fam.terms(k1, k2)
        negative = False
        k_growth = k1
        if constant is None:
            constant = fam.constant
        if constant is None:
            raise ValueError(f"family {fam.name!r} has no default bound constant")
    constant = Fraction(constant)
    if negative:
        warnings.warn("negative multiplier: bound applies to |lambda|", stacklevel=2)
    if k_growth <= 0:
        raise ValueError("bound undefined without growth-branch uses (k_growth = 0)")
    if _is_exact_one(terms):
        raise ValueError("bound undefined for lambda exactly 1")
    ev = _LogEvaluator(bits)
    value = ev.tight(terms)
    with mp.workprec(ev.prec):
        C = mp.mpf(constant.numerator) / constant.denominator * k_growth / abs(value)
        return BoundResult(float(C), float(mp.ln(C)), constant, k_growth)


@dataclass(frozen=True)
class Node:
    """One emitted maximum of the PP/PG walk: N_{i,j} on one side."""

    family: NodeFamily
    i: int
    j: int
    side: str                # "PP" (below 1) or "PG" (above 1)
    k1: int
    k2: int
    value: float             # the ratio product, correctly rounded
    ln_c: float | None       # None for the seed with k1 = 0

    @property
    def k(self) -> int:
        return self.k1 + self.k2

    @property
    def label(self) -> str:
        return f"N_{{{self.i},{self.j}}}"

    def lambda_fraction(self, max_k: int = 200_000) -> Fraction:
        """Exact ratio product; guarded because digits grow linearly in k."""
        if self.k > max_k:
            raise ValueError(f"k = {self.k} too deep for an explicit fraction")
        return lambda_exact(self.family, (self.k1, self.k2))

    def to_row(self) -> dict:
        return {"i": self.i, "j": self.j, "side": self.side,
                "k1": self.k1, "k2": self.k2, "k": self.k,
                "lambda": self.value, "ln_C": self.ln_c}


def iter_nodes(family, constant=None, precision_bits: int | None = None) -> Iterator[Node]:
    """The PP/PG walk: seeds first, then one node per product, forever.

    Each product PP*PG replaces the side it lands on; the main index i
    advances when the replaced side flips, j counts within a run.  Both
    seeds carry the label N_{1,1}.
    """
    fam = node_family(family)
    if constant is None:
        constant = fam.constant
    ev = _LogEvaluator(precision_bits)

    def ln_c_of(k1: int, k2: int) -> float | None:
        if k1 == 0 or constant is None:
            return None
        c = Fraction(constant)
        value = ev.tight(fam.terms(k1, k2))
        with mp.workprec(ev.prec):
            return float(mp.ln(mp.mpf(c.numerator) / c.denominator * k1 / abs(value)))

    def value_of(k1: int, k2: int) -> float:
        value = ev.tight(fam.terms(k1, k2))
        with mp.workprec(ev.prec):
            return float(mp.exp(value))

    pp = (0, 1)
    pg = (1, 0)
    yield Node(fam, 1, 1, "PP", *pp, value_of(*pp), ln_c_of(*pp))
    yield Node(fam, 1, 1, "PG", *pg, value_of(*pg), ln_c_of(*pg))

    i, j = 1, 1
    prev_side = None
    while True:
        k1, k2 = pp[0] + pg[0], pp[1] + pg[1]
        s = ev.sign(fam.terms(k1, k2))
        if s == 0:
            raise ArithmeticError("ratio product hit exactly 1; family is degenerate")
        side = "PP" if s < 0 else "PG"
        if side == "PP":
            pp = (k1, k2)
        else:
            pg = (k1, k2)
        if side != prev_side:
            i, j = i + 1, 1
            prev_side = side
        else:
            j += 1
        yield Node(fam, i, j, side, k1, k2, value_of(k1, k2), ln_c_of(k1, k2))


def generate_nodes(family, max_main_nodes: int | None = None,
                   max_k: int | None = None, max_nodes: int | None = None,
                   constant=None, precision_bits: int | None = None) -> list[Node]:
    """Nodes of the PP/PG walk up to a stop condition.

    max_main_nodes bounds the main index of emitted products (the two
    seeds are always included, so 0 gives seeds only); max_k bounds
    k1+k2; max_nodes bounds the total count.
    """
    if max_main_nodes is None and max_k is None and max_nodes is None:
        raise ValueError("need a stop condition (max_main_nodes, max_k or max_nodes)")
    out: list[Node] = []
    for node in iter_nodes(family, constant=constant, precision_bits=precision_bits):
        if node.i > 1 and max_main_nodes is not None and node.i > max_main_nodes:
            break
        if max_k is not None and node.k > max_k:
            break
        out.append(node)
        if max_nodes is not None and len(out) >= max_nodes:
            break
    return out


_shared_evaluator = _LogEvaluator()


def lambda_in_open_interval(family, k1: int, k2: int, lo, hi) -> bool:
    """Exact strict containment of the ratio product in (lo, hi).

    Decided by adaptive-precision log comparisons, so it works for k far
    beyond what explicit fractions or floats could separate.
    """
    fam = node_family(family)
    base = fam.terms(k1, k2)
    lo, hi = Fraction(lo), Fraction(hi)
    ev = _shared_evaluator
    above_lo = ev.sign(base + [(-1, lo.numerator), (1, lo.denominator)])
    below_hi = ev.sign(base + [(-1, hi.numerator), (1, hi.denominator)])
    return above_lo > 0 and below_hi < 0


@dataclass(frozen=True)
class ReciprocityReport:
    """Alignment of the 3x+1 node stream with the Collatz node stream."""

    pairs_checked: int
    mismatches: tuple[str, ...]
    runs_collatz: tuple[int, ...]
    runs_3x1: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _run_lengths(nodes: Iterable[Node]) -> tuple[int, ...]:
    runs: list[int] = []
    prev_i = None
    for n in nodes:
        if n.i == 1:    # seeds
            continue
        if n.i != prev_i:
            runs.append(1)
            prev_i = n.i
        else:
            runs[-1] += 1
    return tuple(runs)


def reciprocity_check(nodes_g: Sequence[Node], nodes_t: Sequence[Node]) -> ReciprocityReport:
    """Verify each 3x+1 node is the exact reciprocal of a Collatz node.

    The Collatz value for counts (k1, k2) is 2^(2k1+k2)/3^(k1+k2) and the
    3x+1 value for (k1', k2') is 3^k1'/2^(k1'+k2'), so exact reciprocity
    is the count identity (k1', k2') = (k1+k2, k1).  The 3x+1 stream must
    equal the mapped Collatz stream (sides swapped) shifted by one: only
    the 3x+1 seed 1/2 has no counterpart.
    """
    mismatches: list[str] = []
    if not nodes_t or (nodes_t[0].k1, nodes_t[0].k2) != (0, 1):
        mismatches.append("3x+1 stream does not start with the seed 1/2")
        return ReciprocityReport(0, tuple(mismatches), (), ())
    tail_t = nodes_t[1:]
    pairs = min(len(nodes_g), len(tail_t))
    for idx in range(pairs):
        g, t = nodes_g[idx], tail_t[idx]
        expect = (g.k1 + g.k2, g.k1)
        if (t.k1, t.k2) != expect:
            mismatches.append(
                f"position {idx}: counts {(t.k1, t.k2)} != {expect} from {(g.k1, g.k2)}")
        if {g.side, t.side} != {"PP", "PG"}:
            mismatches.append(f"position {idx}: sides {g.side}/{t.side} not swapped")
        if g.value and abs(t.value * g.value - 1.0) > 1e-12:
            mismatches.append(f"position {idx}: values {t.value} and {g.value} "
                              "are not reciprocal")
    runs_g = _run_lengths(nodes_g)
    runs_t = _run_lengths(tail_t)
    common = min(len(runs_g), len(runs_t)) - 1
    if common > 0 and runs_g[:common] != runs_t[1:common + 1]:
        mismatches.append(f"run structure differs: {runs_g[:common]} vs "
                          f"{runs_t[1:common + 1]} (offset by one)")
    return ReciprocityReport(pairs, tuple(mismatches),
                             _run_lengths(nodes_g), _run_lengths(nodes_t))
