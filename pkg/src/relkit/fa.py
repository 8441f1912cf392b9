"""Finite-automaton kernel: representation, determinization, Boolean
operations, projection, emptiness, membership.

Machines are plain dataclasses, validated on construction and treated as
immutable afterwards; every operation is a pure function of its inputs.
States are arbitrary hashables and symbols may themselves be tuples over
component alphabets.  The reserved markers ``EPSILON`` (silent move) and
``PAD`` (end-of-component filler in multi-tape encodings) are singleton
objects distinct from every alphabet symbol.
"""

import os
from collections import deque
from dataclasses import dataclass, field
from typing import Any

from .errors import ResourceLimitError
from .graphs import reachable


class _Marker:
    __slots__ = ("_name",)

    def __init__(self, name):
        self._name = name

    def __repr__(self):
        return self._name


EPSILON = _Marker("eps")
PAD = _Marker("_")

DEFAULT_STATE_BUDGET = 1_000_000


def state_budget(budget=None):
    """Effective state cap: explicit argument, else RELKIT_STATE_BUDGET, else default."""
    if budget is not None:
        return budget
    return int(os.environ.get("RELKIT_STATE_BUDGET", DEFAULT_STATE_BUDGET))


def word(letters):
    """Coerce a string or iterable of symbols to a word tuple."""
    return tuple(letters)


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of distinct symbols.

    Declaration order is the canonical total order used by all
    lexicographic machinery downstream.
    """

    symbols: tuple

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if not self.symbols:
            raise ValueError("alphabet must be nonempty")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")
        if EPSILON in self.symbols or PAD in self.symbols:
            raise ValueError("alphabet may not contain the reserved eps/pad markers")

    @classmethod
    def of(cls, *symbols):
        return cls(tuple(symbols))

    def __contains__(self, sym):
        return sym in self.symbols

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def index(self, sym):
        return self.symbols.index(sym)


@dataclass
class Verdict:
    """Decision result with an optional machine-checkable witness."""

    holds: bool
    witness: Any = None
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.holds


@dataclass
class Nfa:
    """Nondeterministic finite automaton, possibly with EPSILON moves."""

    alphabet: Alphabet
    states: frozenset
    initial: frozenset
    transitions: frozenset  # triples (state, symbol-or-EPSILON, state)
    accepting: frozenset

    def __post_init__(self):
        self.states = frozenset(self.states)
        self.initial = frozenset(self.initial)
        self.transitions = frozenset(self.transitions)
        self.accepting = frozenset(self.accepting)
        if not self.initial <= self.states:
            raise ValueError("initial states must be declared states")
        if not self.accepting <= self.states:
            raise ValueError("accepting states must be declared states")
        for p, x, q in self.transitions:
            if p not in self.states or q not in self.states:
                raise ValueError(f"transition endpoint not a declared state: {(p, x, q)}")
            if x is not EPSILON and x not in self.alphabet:
                raise ValueError(f"transition symbol not in alphabet: {x!r}")

    def move_table(self):
        """dict (state, symbol) -> set of targets; EPSILON included as a symbol."""
        table = {}
        for p, x, q in self.transitions:
            table.setdefault((p, x), set()).add(q)
        return table

    def successor_graph(self):
        """dict state -> set of successor states, labels dropped."""
        adj = {}
        for p, _, q in self.transitions:
            adj.setdefault(p, set()).add(q)
        return adj

    def is_epsilon_free(self):
        return all(x is not EPSILON for _, x, _ in self.transitions)


@dataclass
class Dfa:
    """Complete deterministic automaton: one initial state, total delta."""

    alphabet: Alphabet
    states: frozenset
    initial: Any
    delta: dict  # (state, symbol) -> state
    accepting: frozenset

    def __post_init__(self):
        self.states = frozenset(self.states)
        self.accepting = frozenset(self.accepting)
        if self.initial not in self.states:
            raise ValueError("initial state must be a declared state")
        if not self.accepting <= self.states:
            raise ValueError("accepting states must be declared states")
        for q in self.states:
            for x in self.alphabet:
                if (q, x) not in self.delta:
                    raise ValueError(f"delta not total: missing {(q, x)!r}")
        for (p, x), q in self.delta.items():
            if p not in self.states or q not in self.states:
                raise ValueError("delta endpoint not a declared state")
            if x not in self.alphabet:
                raise ValueError(f"delta symbol not in alphabet: {x!r}")

    def run(self, w):
        q = self.initial
        for x in w:
            q = self.delta[(q, x)]
        return q


def epsilon_closure(nfa, states, table=None):
    if table is None:
        table = nfa.move_table()
    closure = set(states)
    todo = deque(closure)
    while todo:
        p = todo.popleft()
        for q in table.get((p, EPSILON), ()):
            if q not in closure:
                closure.add(q)
                todo.append(q)
    return closure


def eliminate_epsilon(a: Nfa) -> Nfa:
    """Language-equal epsilon-free automaton; epsilon-free input is returned as is."""
    if a.is_epsilon_free():
        return a
    table = a.move_table()
    closures = {p: epsilon_closure(a, {p}, table) for p in a.states}
    by_source = {}
    for (src, x), targets in table.items():
        if x is not EPSILON:
            by_source.setdefault(src, []).append((x, targets))
    transitions = set()
    for p in a.states:
        for r in closures[p]:
            for x, targets in by_source.get(r, ()):
                for q in targets:
                    transitions.add((p, x, q))
    accepting = frozenset(p for p in a.states if closures[p] & a.accepting)
    return Nfa(a.alphabet, a.states, a.initial, frozenset(transitions), accepting)


def accepts(a: Nfa, w) -> bool:
    """Forward subset simulation; unknown letters raise ValueError."""
    table = a.move_table()
    current = epsilon_closure(a, a.initial, table)
    for x in w:
        if x not in a.alphabet:
            raise ValueError(f"unknown symbol: {x!r}")
        step = set()
        for p in current:
            step |= table.get((p, x), set())
        current = epsilon_closure(a, step, table)
        if not current:
            return False
    return bool(current & a.accepting)


def determinize(a: Nfa, budget=None) -> Dfa:
    """Subset construction; input must be epsilon-free.

    The result is complete: the empty subset acts as the trap state and is
    materialized only if reachable.
    """
    if not a.is_epsilon_free():
        raise ValueError("determinize requires an epsilon-free automaton; eliminate first")
    cap = state_budget(budget)
    table = a.move_table()
    start = frozenset(a.initial)
    states = {start}
    delta = {}
    todo = deque([start])
    while todo:
        current = todo.popleft()
        for x in a.alphabet:
            step = set()
            for p in current:
                step |= table.get((p, x), set())
            nxt = frozenset(step)
            delta[(current, x)] = nxt
            if nxt not in states:
                states.add(nxt)
                if len(states) > cap:
                    raise ResourceLimitError(f"determinization exceeded {cap} states")
                todo.append(nxt)
    accepting = frozenset(s for s in states if s & a.accepting)
    return Dfa(a.alphabet, frozenset(states), start, delta, accepting)


def complement(d: Dfa) -> Dfa:
    return Dfa(d.alphabet, d.states, d.initial, dict(d.delta), d.states - d.accepting)


def dfa_as_nfa(d: Dfa) -> Nfa:
    transitions = frozenset((p, x, q) for (p, x), q in d.delta.items())
    return Nfa(d.alphabet, d.states, frozenset({d.initial}), transitions, d.accepting)


def intersect(a: Nfa, b: Nfa) -> Nfa:
    """Product of reachable state pairs; inputs may carry epsilon moves."""
    if a.alphabet != b.alphabet:
        raise ValueError("alphabet mismatch in intersection")
    a = eliminate_epsilon(a)
    b = eliminate_epsilon(b)
    ta, tb = a.move_table(), b.move_table()
    initial = {(p, q) for p in a.initial for q in b.initial}
    states = set(initial)
    transitions = set()
    todo = deque(initial)
    while todo:
        p, q = todo.popleft()
        for x in a.alphabet:
            for p2 in ta.get((p, x), ()):
                for q2 in tb.get((q, x), ()):
                    transitions.add(((p, q), x, (p2, q2)))
                    if (p2, q2) not in states:
                        states.add((p2, q2))
                        todo.append((p2, q2))
    accepting = {(p, q) for (p, q) in states if p in a.accepting and q in b.accepting}
    if not states:
        states = {("dead", "dead")}
        initial = set()
    return Nfa(a.alphabet, frozenset(states), frozenset(initial), frozenset(transitions), frozenset(accepting))


def project(a: Nfa, keep) -> Nfa:
    """Componentwise projection of a tuple-alphabet automaton.

    ``keep`` holds 1-based component indices.  A single kept component is
    unwrapped to its atomic symbols.
    """
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep must be nonempty")
    if not all(isinstance(s, tuple) for s in a.alphabet):
        raise ValueError("projection requires a tuple alphabet")
    arities = {len(s) for s in a.alphabet}
    if len(arities) != 1:
        raise ValueError("projection requires symbols of uniform arity")
    (k,) = arities
    if keep[0] < 1 or keep[-1] > k:
        raise ValueError(f"projection index out of range for arity {k}")

    def relabel(sym):
        picked = tuple(sym[i - 1] for i in keep)
        return picked[0] if len(keep) == 1 else picked

    seen = []
    for s in a.alphabet:
        r = relabel(s)
        if r not in seen:
            seen.append(r)
    transitions = frozenset(
        (p, x if x is EPSILON else relabel(x), q) for p, x, q in a.transitions
    )
    return Nfa(Alphabet(tuple(seen)), a.states, a.initial, transitions, a.accepting)


def with_alphabet(a: Nfa, alphabet: Alphabet) -> Nfa:
    """Same automaton under a redeclared alphabet covering the old symbols."""
    if not set(a.alphabet.symbols) <= set(alphabet.symbols):
        raise ValueError("new alphabet must cover the old symbols")
    return Nfa(alphabet, a.states, a.initial, a.transitions, a.accepting)


def is_empty(a: Nfa) -> Verdict:
    """Emptiness by graph search; a nonempty verdict carries a shortest word."""
    a = eliminate_epsilon(a)
    table = a.move_table()
    parent = {p: None for p in a.initial}
    todo = deque(a.initial)
    while todo:
        p = todo.popleft()
        if p in a.accepting:
            letters = []
            cur = p
            while parent[cur] is not None:
                prev, x = parent[cur]
                letters.append(x)
                cur = prev
            return Verdict(False, witness=tuple(reversed(letters)))
        for x in a.alphabet:
            for q in table.get((p, x), ()):
                if q not in parent:
                    parent[q] = (p, x)
                    todo.append(q)
    return Verdict(True)


def trim(a: Nfa) -> Nfa:
    """Restrict to states both reachable and co-reachable (productive)."""
    a = eliminate_epsilon(a)
    adj = a.successor_graph()
    fwd = reachable(adj, a.initial)
    radj = {}
    for p, _, q in a.transitions:
        radj.setdefault(q, set()).add(p)
    bwd = reachable(radj, a.accepting)
    keep = fwd & bwd
    if not keep:
        dead = "dead"
        return Nfa(a.alphabet, frozenset({dead}), frozenset(), frozenset(), frozenset())
    return Nfa(
        a.alphabet,
        frozenset(keep),
        a.initial & keep,
        frozenset((p, x, q) for p, x, q in a.transitions if p in keep and q in keep),
        a.accepting & keep,
    )


def language_upto(a: Nfa, max_len):
    """All accepted words of length <= max_len, by brute subset enumeration."""
    a = eliminate_epsilon(a)
    table = a.move_table()
    out = []
    frontier = [((), frozenset(a.initial))]
    for _ in range(max_len + 1):
        next_frontier = []
        for w, subset in frontier:
            if subset & a.accepting:
                out.append(w)
            for x in a.alphabet:
                step = set()
                for p in subset:
                    step |= table.get((p, x), set())
                if step:
                    next_frontier.append((w + (x,), frozenset(step)))
        frontier = next_frontier
    return out
