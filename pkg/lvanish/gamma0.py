"""
Gamma_0(N) machinery.

Everything is projective (+-I identified): weight 2 - 2k is even, so slash
factors do not see the sign. The modular group is presented as
<S, U | S^2, U^3> with S = [[0,-1],[1,0]] and U = ST = [[0,-1],[1,1]];
right cosets Gamma_0(N) g are labelled by the bottom row of g in P^1(Z/N).
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import primefactors

from .arith import extended_gcd
from .errors import SearchBudgetError, ValidationError
from .qforms import GL2Matrix

logger = logging.getLogger(__name__)

S = GL2Matrix(0, -1, 1, 0)
U = GL2Matrix(0, -1, 1, 1)
T = GL2Matrix(1, 1, 0, 1)
MINUS_I = GL2Matrix(-1, 0, 0, -1)
LETTERS = {"S": S, "U": U}

TODD_COXETER_CAP = 200000


def gamma0_index(N: int) -> int:
    """[SL2(Z) : Gamma_0(N)] = N prod_{p | N} (1 + 1/p)."""
    index = N
    for p in primefactors(N):
        index = index // p * (p + 1)
    return index


def p1_orbits(N: int) -> Tuple[List[Tuple[int, int]], Dict[Tuple[int, int], int]]:
    """Points of P^1(Z/N) by direct orbit enumeration.

    Returns the canonical pairs and a lookup from every admissible pair
    (c, d) mod N to its class index.
    """
    units = [t for t in range(N) if math.gcd(t, N) == 1] if N > 1 else [0]
    lookup: Dict[Tuple[int, int], int] = {}
    points: List[Tuple[int, int]] = []
    for c in range(N):
        for d in range(N):
            if (c, d) in lookup or math.gcd(math.gcd(c, d), N) != 1:
                continue
            idx = len(points)
            points.append((c, d))
            for t in units:
                lookup[(t * c % N, t * d % N)] = idx
    return points, lookup


def _word_letters(gamma: GL2Matrix) -> List[str]:
    """Letters in {S, U} whose product is +-gamma (Euclid on the first column)."""
    if gamma.determinant != 1:
        raise ValidationError(f"Not in SL2(Z): {gamma}")
    letters: List[str] = []
    a, b, c, d = gamma.g11, gamma.g12, gamma.g21, gamma.g22
    while c != 0:
        q = a // c
        # gamma = T^q [[a - qc, b - qd], [c, d]]
        letters.extend(_t_power(q))
        a, b = a - q * c, b - q * d
        # gamma = S [[c, d], [-a, -b]] projectively
        letters.append("S")
        a, b, c, d = c, d, -a, -b
    # now +-[[1, n], [0, 1]]
    n = b * a
    letters.extend(_t_power(n))
    return letters


def _t_power(q: int) -> List[str]:
    # T = SU and T^-1 = U^2 S projectively
    if q >= 0:
        return ["S", "U"] * q
    return ["U", "U", "S"] * (-q)


def letters_product(letters: Sequence[str]) -> GL2Matrix:
    result = GL2Matrix.identity()
    for letter in letters:
        result = result @ LETTERS[letter]
    return result


@dataclass(frozen=True)
class CuspWitness:
    target: Fraction
    matrix: GL2Matrix


@dataclass
class Gamma0Context:
    """Coset table, Schreier generators and word decomposition for one level.

    ``generators`` feeds evaluation points and may be a user supplied
    generating set; ``word_basis`` is always the Schreier basis used by
    ``decompose``.
    """
    level: int
    index: int
    cosets: List[Tuple[int, int]]
    coset_reps: List[GL2Matrix]
    coset_graph: Dict[str, List[int]]
    word_basis: List[GL2Matrix]
    generators: List[GL2Matrix]
    _lookup: Dict[Tuple[int, int], int] = field(repr=False, default_factory=dict)
    _edge_table: Dict[Tuple[int, str], Optional[int]] = field(repr=False, default_factory=dict)

    def coset_of(self, gamma: GL2Matrix) -> int:
        N = self.level
        return self._lookup[(gamma.g21 % N, gamma.g22 % N)]

    def is_connected(self) -> bool:
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for letter in LETTERS:
                w = self.coset_graph[letter][v]
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == self.index


def _build_schreier(N: int):
    cosets, lookup = p1_orbits(N)
    index = len(cosets)

    def move(v: int, letter: str) -> int:
        c, d = cosets[v]
        if letter == "S":
            return lookup[(d % N, -c % N)]
        return lookup[(d % N, (d - c) % N)]

    graph = {letter: [move(v, letter) for v in range(index)] for letter in LETTERS}

    identity = lookup[(0, 1 % N)]
    reps: List[Optional[GL2Matrix]] = [None] * index
    tree_s_edges = set()

    def enter_triangle(v: int, rep: GL2Matrix, queue: deque) -> None:
        reps[v] = rep
        queue.append(v)
        w = graph["U"][v]
        if w != v:
            reps[w] = rep @ U
            queue.append(w)
            reps[graph["U"][w]] = rep @ U @ U
            queue.append(graph["U"][w])

    queue: deque = deque()
    enter_triangle(identity, GL2Matrix.identity(), queue)
    while queue:
        v = queue.popleft()
        w = graph["S"][v]
        if reps[w] is None:
            tree_s_edges.add((v, w))
            tree_s_edges.add((w, v))
            enter_triangle(w, reps[v] @ S, queue)

    basis: List[GL2Matrix] = []
    edge_table: Dict[Tuple[int, str], Optional[int]] = {}
    for v in range(index):
        w = graph["S"][v]
        if w == v:
            edge_table[(v, "S")] = len(basis)
            basis.append(reps[v] @ S @ reps[v].inverse())
        elif (v, w) in tree_s_edges:
            edge_table[(v, "S")] = None
        elif (w, "S") in edge_table:
            edge_table[(v, "S")] = -1 - edge_table[(w, "S")]
        else:
            edge_table[(v, "S")] = len(basis)
            basis.append(reps[v] @ S @ reps[w].inverse())
        if graph["U"][v] == v:
            edge_table[(v, "U")] = len(basis)
            basis.append(reps[v] @ U @ reps[v].inverse())
        else:
            edge_table[(v, "U")] = None

    has_order_two = any(graph["S"][v] == v for v in range(index))
    if not has_order_two:
        basis.append(MINUS_I)

    # coset 0 is the identity coset from here on
    order = [identity] + [v for v in range(index) if v != identity]
    relabel = {old: new for new, old in enumerate(order)}
    cosets = [cosets[v] for v in order]
    reps = [reps[v] for v in order]
    lookup = {pair: relabel[v] for pair, v in lookup.items()}
    graph = {letter: [relabel[targets[v]] for v in order] for letter, targets in graph.items()}
    edge_table = {(relabel[v], letter): g for (v, letter), g in edge_table.items()}
    return index, cosets, reps, graph, basis, lookup, edge_table


class _CosetEnumeration:
    """Todd-Coxeter over <S, U | S^2, U^3> with forward edges and union-find."""

    RELATORS = (("S", "S"), ("U", "U", "U"))

    def __init__(self, cap: int = TODD_COXETER_CAP):
        self.cap = cap
        self.labels: List[int] = []
        self.edges: List[Dict[str, int]] = []
        self.start = self._add()

    def _add(self) -> int:
        c = len(self.labels)
        if c >= self.cap:
            raise SearchBudgetError(f"Coset enumeration exceeded {self.cap} cosets")
        self.labels.append(c)
        self.edges.append({})
        return c

    def find(self, c: int) -> int:
        root = c
        while self.labels[root] != root:
            root = self.labels[root]
        while self.labels[c] != root:
            self.labels[c], c = root, self.labels[c]
        return root

    def step(self, c: int, letter: str) -> int:
        c = self.find(c)
        if letter not in self.edges[c]:
            self.edges[c][letter] = self._add()
        return self.find(self.edges[c][letter])

    def follow(self, c: int, word: Sequence[str]) -> int:
        for letter in word:
            c = self.step(c, letter)
        return c

    def unify(self, c1: int, c2: int) -> None:
        pending = [(c1, c2)]
        while pending:
            c1, c2 = pending.pop()
            c1, c2 = self.find(c1), self.find(c2)
            if c1 == c2:
                continue
            c1, c2 = min(c1, c2), max(c1, c2)
            self.labels[c2] = c1
            for letter, target in self.edges[c2].items():
                if letter in self.edges[c1]:
                    pending.append((self.edges[c1][letter], target))
                else:
                    self.edges[c1][letter] = target

    def run(self, subgroup_words: Sequence[Sequence[str]]) -> int:
        for word in subgroup_words:
            self.unify(self.follow(self.start, word), self.start)
        to_visit = 0
        while to_visit < len(self.labels):
            c = self.find(to_visit)
            if c == to_visit:
                for rel in self.RELATORS:
                    self.unify(self.follow(c, rel), c)
                    c = self.find(c)
                for letter in LETTERS:
                    self.step(c, letter)
            to_visit += 1
        return sum(1 for i, label in enumerate(self.labels) if i == label)


def subgroup_index(generators: Sequence[GL2Matrix], cap: int = TODD_COXETER_CAP) -> int:
    """Index in PSL2(Z) of the subgroup generated by ``generators``."""
    words = [_word_letters(g) for g in generators]
    return _CosetEnumeration(cap).run(words)


@lru_cache(maxsize=64)
def _default_context(N: int) -> Gamma0Context:
    index, cosets, reps, graph, basis, lookup, edge_table = _build_schreier(N)
    ctx = Gamma0Context(
        level=N,
        index=index,
        cosets=cosets,
        coset_reps=reps,
        coset_graph=graph,
        word_basis=basis,
        generators=list(basis),
        _lookup=lookup,
        _edge_table=edge_table,
    )
    logger.debug(f"Gamma0({N}): index {index}, {len(basis)} Schreier generators")
    return ctx


def build_context(N: int, generators: Optional[Sequence[GL2Matrix]] = None) -> Gamma0Context:
    """Coset table and generators for Gamma_0(N).

    A supplied generator list must lie in Gamma_0(N) and generate it; the
    latter is checked by coset enumeration of the subgroup they generate.
    """
    if N < 1:
        raise ValidationError(f"Level must be positive, got {N}")
    base = _default_context(N)
    if generators is None:
        return base
    generators = list(generators)
    for g in generators:
        if not g.in_gamma0(N):
            raise ValidationError(f"Generator {g} is not in Gamma0({N})")
    found = subgroup_index(generators)
    if found != base.index:
        raise ValidationError(
            f"Supplied generators span a subgroup of index {found}, Gamma0({N}) has index {base.index}"
        )
    return Gamma0Context(
        level=N,
        index=base.index,
        cosets=base.cosets,
        coset_reps=base.coset_reps,
        coset_graph=base.coset_graph,
        word_basis=base.word_basis,
        generators=generators,
        _lookup=base._lookup,
        _edge_table=base._edge_table,
    )


def decompose(ctx: Gamma0Context, gamma: GL2Matrix) -> List[Tuple[int, int]]:
    """Word [(basis index, exponent), ...] over ``ctx.word_basis`` with product +-gamma."""
    if not gamma.in_gamma0(ctx.level):
        raise ValidationError(f"{gamma} is not in Gamma0({ctx.level})")
    word: List[Tuple[int, int]] = []
    v = 0
    for letter in _word_letters(gamma):
        entry = ctx._edge_table[(v, letter)]
        if entry is not None:
            g, e = (entry, 1) if entry >= 0 else (-1 - entry, -1)
            if word and word[-1][0] == g:
                total = word[-1][1] + e
                word.pop()
                if total:
                    word.append((g, total))
            else:
                word.append((g, e))
        v = ctx.coset_graph[letter][v]
    if v != 0:
        raise ValidationError(f"Word walk for {gamma} did not return to the identity coset")
    return word


def word_product(ctx: Gamma0Context, word: Sequence[Tuple[int, int]]) -> GL2Matrix:
    result = GL2Matrix.identity()
    for g, e in word:
        result = result @ (ctx.word_basis[g] ** e)
    return result


def is_equivalent_to_zero(N: int, x) -> Optional[CuspWitness]:
    """Witness gamma in Gamma_0(N) with gamma * 0 = x, if x = q1/q2 has gcd(q2, N) = 1."""
    x = Fraction(x)
    q1, q2 = x.numerator, x.denominator
    if math.gcd(q2, N) != 1:
        return None
    # alpha q2 - N t q1 = 1
    g, alpha, s = extended_gcd(q2, N * q1)
    if g != 1:
        return None
    return CuspWitness(x, GL2Matrix(alpha, q1, -N * s, q2))


def cusp_point(N: int, q1: int, q2: int) -> Fraction:
    """The cusp q1 / (q2 N), which needs gcd(q1, q2 N) = 1."""
    if q2 <= 0 or math.gcd(q1, q2 * N) != 1:
        raise ValidationError(f"q1/(q2 N) needs q2 > 0 and gcd(q1, q2 N) = 1, got {q1}, {q2}, {N}")
    return Fraction(q1, q2 * N)


@dataclass(frozen=True)
class EvaluationPoint:
    point: Fraction
    generator: int
    power: int
    base: int

    @property
    def first_round(self) -> bool:
        return self.power == 1


def _usable_base(gamma: GL2Matrix) -> int:
    n = 0
    while True:
        for candidate in ((n, -n) if n else (0,)):
            if gamma.g21 * candidate + gamma.g22 != 0:
                return candidate
        n += 1


def evaluation_points(ctx: Gamma0Context, k: int) -> List[EvaluationPoint]:
    """gamma_i^j . n_ij for every generator and 1 <= j <= 2k - 1.

    n_ij is 0 unless gamma_i^j sends 0 to the cusp at infinity, in which case
    the smallest usable integer is taken. Points already listed are dropped.
    At level 1 every integer point is collapsed onto T . 0 = 1 (generator -1).
    """
    if k < 2:
        raise ValidationError(f"k must be at least 2, got {k}")
    seen = set()
    points: List[EvaluationPoint] = []
    for j in range(1, 2 * k):
        for i, gamma in enumerate(ctx.generators):
            power = gamma ** j
            n = _usable_base(power)
            x = power.act(n)
            if ctx.level == 1 and x.denominator == 1:
                x, i_src, n_src = Fraction(1), -1, 0
            else:
                i_src, n_src = i, n
            if x in seen:
                continue
            seen.add(x)
            points.append(EvaluationPoint(x, i_src, j, n_src))
    return points
