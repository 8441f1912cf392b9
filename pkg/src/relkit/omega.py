"""Omega-automata kernel: Buchi and deterministic parity machines over
(tuple) alphabets, lasso evaluation, the transition-profile monoid,
standard conversions, and the finiteness test for omega-languages.

Tuples of infinite words are encoded as single infinite words over a
product alphabet; the arity lives in the ``components`` metadata.
"""

import math
from collections import deque
from dataclasses import dataclass, field

from .fa import Alphabet, Nfa, EPSILON
from .graphs import reachable, strongly_connected_components, cycle_states
from . import fa as _fa


@dataclass(frozen=True)
class Lasso:
    """Ultimately periodic word: prefix followed by a nonempty period."""

    prefix: tuple
    period: tuple

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "period", tuple(self.period))
        if not self.period:
            raise ValueError("lasso period must be nonempty")

    def unroll(self, n):
        """The first n letters."""
        out = list(self.prefix)
        while len(out) < n:
            out.extend(self.period)
        return tuple(out[:n])

    def letter(self, i):
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]


def lasso_pair(left: Lasso, right: Lasso) -> Lasso:
    """Zip two lassos into one over the pair alphabet; prefixes and periods
    are first aligned to common lengths."""
    a, b = align_lassos([left, right])
    prefix = tuple(zip(a.prefix, b.prefix))
    period = tuple(zip(a.period, b.period))
    return Lasso(prefix, period)


def align_lassos(lassos):
    """Rewrite lassos to a common prefix length and a common period length
    without changing the infinite words they denote.

    Each prefix is extended with whole and partial periods up to the longest
    prefix, the period rotated accordingly; then all periods are raised to
    the lcm of their lengths.
    """
    lassos = [l if isinstance(l, Lasso) else Lasso(*l) for l in lassos]
    if not lassos:
        return []
    target = max(len(l.prefix) for l in lassos)
    shifted = []
    for l in lassos:
        gap = target - len(l.prefix)
        reps, rem = divmod(gap, len(l.period))
        head, tail = l.period[:rem], l.period[rem:]
        prefix = l.prefix + l.period * reps + head
        shifted.append(Lasso(prefix, tail + head))
    lcm = 1
    for l in shifted:
        lcm = lcm * len(l.period) // math.gcd(lcm, len(l.period))
    return [Lasso(l.prefix, l.period * (lcm // len(l.period))) for l in shifted]


def lasso_eq(a: Lasso, b: Lasso) -> bool:
    """Equality of the denoted infinite words, by sufficient unrolling."""
    lcm = len(a.period) * len(b.period) // math.gcd(len(a.period), len(b.period))
    n = max(len(a.prefix), len(b.prefix)) + 2 * lcm
    return a.unroll(n) == b.unroll(n)


def parse_lasso(text, split=None):
    """Parse the CLI lasso syntax ``u(v)^w``, e.g. ``a(ba)^w``.

    Symbols are single characters unless commas are present, in which case
    they are comma-separated tokens.
    """
    text = text.strip()
    if not text.endswith("^w"):
        raise ValueError("lasso must end with ^w")
    body = text[:-2]
    if not (body.endswith(")") and "(" in body):
        raise ValueError("lasso must have the shape u(v)^w")
    open_idx = body.index("(")
    u, v = body[:open_idx], body[open_idx + 1 : -1]

    def letters(s):
        if split is not None:
            return tuple(split(s))
        if "," in s:
            return tuple(x for x in s.split(",") if x)
        return tuple(s)

    return Lasso(letters(u), letters(v))


@dataclass
class BuchiAutomaton:
    """Nondeterministic Buchi automaton; epsilon-free by construction."""

    alphabet: Alphabet
    states: frozenset
    initial: frozenset
    transitions: frozenset  # triples (state, symbol, state)
    accepting: frozenset
    components: tuple = None  # component Alphabets when symbols are tuples

    def __post_init__(self):
        self.states = frozenset(self.states)
        self.initial = frozenset(self.initial)
        self.transitions = frozenset(self.transitions)
        self.accepting = frozenset(self.accepting)
        if self.components is not None:
            self.components = tuple(self.components)
        if not self.initial <= self.states or not self.accepting <= self.states:
            raise ValueError("initial/accepting states must be declared states")
        for p, x, q in self.transitions:
            if x is EPSILON:
                raise ValueError("Buchi automata are epsilon-free")
            if x not in self.alphabet:
                raise ValueError(f"transition symbol not in alphabet: {x!r}")
            if p not in self.states or q not in self.states:
                raise ValueError("transition endpoint not a declared state")

    def move_table(self):
        table = {}
        for p, x, q in self.transitions:
            table.setdefault((p, x), set()).add(q)
        return table

    def as_nfa(self) -> Nfa:
        return Nfa(self.alphabet, self.states, self.initial, self.transitions, self.accepting)

    @classmethod
    def from_nfa(cls, nfa: Nfa, components=None):
        if not nfa.is_epsilon_free():
            raise ValueError("Buchi automata are epsilon-free; eliminate first")
        return cls(nfa.alphabet, nfa.states, nfa.initial, nfa.transitions, nfa.accepting, components)


def lasso_accepts(a: BuchiAutomaton, w: Lasso) -> bool:
    """Direct semantics: product with the lasso graph, then search for a
    reachable cycle through an accepting state."""
    for x in w.prefix + w.period:
        if x not in a.alphabet:
            raise ValueError(f"unknown symbol: {x!r}")
    table = a.move_table()
    n_pre, n_per = len(w.prefix), len(w.period)
    total = n_pre + n_per

    def succ(node):
        q, i = node
        x = w.prefix[i] if i < n_pre else w.period[i - n_pre]
        j = i + 1
        if j == total:
            j = n_pre
        return [(q2, j) for q2 in table.get((q, x), ())]

    start = [(q, 0) for q in a.initial]
    seen = set(start)
    todo = deque(start)
    adj = {}
    while todo:
        node = todo.popleft()
        adj[node] = set(succ(node))
        for nxt in adj[node]:
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    on_cycle = cycle_states(seen, adj)
    return any(q in a.accepting for (q, i) in on_cycle)


@dataclass(frozen=True)
class TransitionProfile:
    """Summary of a Buchi automaton's behaviour under one finite word: for
    every state pair an edge mark, flagged when some connecting run passes
    an accepting state (endpoints included).  Profiles of the same
    automaton compose as a monoid."""

    marks: frozenset  # triples (p, q, through_accepting)
    automaton: BuchiAutomaton = field(compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "marks", frozenset(self.marks))
        if len({(p, q) for p, q, _ in self.marks}) != len(self.marks):
            raise ValueError("at most one mark per state pair")

    def edges(self):
        return {(p, q) for p, q, _ in self.marks}

    def flagged(self):
        return {(p, q) for p, q, f in self.marks if f}

    def successors(self):
        adj = {}
        for p, q, _ in self.marks:
            adj.setdefault(p, set()).add(q)
        return adj


def identity_profile(a: BuchiAutomaton) -> TransitionProfile:
    return TransitionProfile(frozenset((q, q, q in a.accepting) for q in a.states), a)


def letter_profile(a: BuchiAutomaton, x) -> TransitionProfile:
    marks = frozenset(
        (p, q, p in a.accepting or q in a.accepting) for (p, sym, q) in a.transitions if sym == x
    )
    return TransitionProfile(marks, a)


def profile_product(s: TransitionProfile, t: TransitionProfile) -> TransitionProfile:
    if s.automaton is not t.automaton:
        raise ValueError("profiles belong to different automata")
    by_source = {}
    for r, q, f2 in t.marks:
        by_source.setdefault(r, []).append((q, f2))
    best = {}
    for p, r, f1 in s.marks:
        for q, f2 in by_source.get(r, ()):
            flag = f1 or f2
            key = (p, q)
            best[key] = best.get(key, False) or flag
    return TransitionProfile(frozenset((p, q, f) for (p, q), f in best.items()), s.automaton)


def profile_of_word(a: BuchiAutomaton, w) -> TransitionProfile:
    profile = identity_profile(a)
    for x in w:
        profile = profile_product(profile, letter_profile(a, x))
    return profile


def up_accepts_profiles(a: BuchiAutomaton, w: Lasso) -> bool:
    """Lasso membership through the profile monoid: some state reachable
    from an initial state in the prefix profile must reach, inside the
    period profile, a cycle containing a flagged edge."""
    tau_u = profile_of_word(a, w.prefix)
    tau_v = profile_of_word(a, w.period)
    entries = {q for (p, q, _) in tau_u.marks if p in a.initial}
    if not entries:
        return False
    adj = tau_v.successors()
    fwd = reachable(adj, entries)
    for x, y, f in tau_v.marks:
        if f and x in fwd and x in reachable(adj, {y}):
            return True
    return False


@dataclass
class ParityTransducer:
    """Deterministic complete automaton over a tuple alphabet with a
    priority per state; a run is accepting when the maximal priority seen
    infinitely often is even."""

    components: tuple  # component Alphabets
    states: frozenset
    initial: object
    delta: dict  # (state, symbol) -> state
    priority: dict  # state -> int

    def __post_init__(self):
        self.components = tuple(self.components)
        self.states = frozenset(self.states)
        if self.initial not in self.states:
            raise ValueError("initial state must be declared")
        if set(self.priority) != set(self.states):
            raise ValueError("priority map must cover exactly the states")
        for (p, x), q in self.delta.items():
            if p not in self.states or q not in self.states:
                raise ValueError("delta endpoint not a declared state")
            if x not in self.alphabet():
                raise ValueError(f"delta symbol outside the product alphabet: {x!r}")

    @property
    def arity(self):
        return len(self.components)

    def alphabet(self):
        from itertools import product as _product

        return Alphabet(tuple(_product(*[tuple(c) for c in self.components])))

    def is_complete(self):
        return all((q, x) in self.delta for q in self.states for x in self.alphabet())


def parity_accepts(p: ParityTransducer, w: Lasso) -> bool:
    """Direct lasso semantics of the unique run."""
    if not p.is_complete():
        raise ValueError("parity evaluation requires a complete transducer")
    n_pre, n_per = len(w.prefix), len(w.period)
    seen = {}
    trace = []
    q, i = p.initial, 0
    while (q, i) not in seen:
        seen[(q, i)] = len(trace)
        trace.append(q)
        x = w.prefix[i] if i < n_pre else w.period[i - n_pre]
        q = p.delta[(q, x)]
        i = i + 1 if i + 1 < n_pre + n_per else n_pre
    cycle = trace[seen[(q, i)]:]
    return max(p.priority[s] for s in cycle) % 2 == 0


def complete_parity(p: ParityTransducer) -> ParityTransducer:
    """Totalize by routing missing moves to a fresh odd-priority sink."""
    alphabet = p.alphabet()
    missing = [(q, x) for q in p.states for x in alphabet if (q, x) not in p.delta]
    if not missing:
        return p
    sink = ("reject-sink",)
    while sink in p.states:
        sink = sink + ("'",)
    delta = dict(p.delta)
    for q, x in missing:
        delta[(q, x)] = sink
    for x in alphabet:
        delta[(sink, x)] = sink
    priority = dict(p.priority)
    priority[sink] = 1
    return ParityTransducer(p.components, p.states | {sink}, p.initial, delta, priority)


def parity_complement(p: ParityTransducer) -> ParityTransducer:
    """Same structure, every priority shifted up by one."""
    if not p.is_complete():
        raise ValueError("complement requires a complete transducer; run complete_parity first")
    return ParityTransducer(
        p.components, p.states, p.initial, dict(p.delta), {q: r + 1 for q, r in p.priority.items()}
    )


def parity_to_nba(p: ParityTransducer) -> BuchiAutomaton:
    """Language-equal Buchi automaton: guess the dominant even priority d,
    then allow only priorities <= d and demand priority d recurs."""
    if not p.is_complete():
        raise ValueError("conversion requires a complete transducer")
    evens = sorted({r for r in p.priority.values() if r % 2 == 0})
    alphabet = p.alphabet()
    states = {("free", q) for q in p.states}
    transitions = set()
    for (q, x), q2 in p.delta.items():
        transitions.add((("free", q), x, ("free", q2)))
        for d in evens:
            if p.priority[q2] <= d:
                states.add(("lock", q2, d))
                transitions.add((("free", q), x, ("lock", q2, d)))
            if p.priority[q] <= d and p.priority[q2] <= d:
                states.add(("lock", q, d))
                states.add(("lock", q2, d))
                transitions.add((("lock", q, d), x, ("lock", q2, d)))
    accepting = frozenset(s for s in states if s[0] == "lock" and p.priority[s[1]] == s[2])
    return BuchiAutomaton(
        alphabet,
        frozenset(states),
        frozenset({("free", p.initial)}),
        frozenset(transitions),
        accepting,
        components=p.components,
    )


def nba_intersect(a: BuchiAutomaton, b: BuchiAutomaton) -> BuchiAutomaton:
    """Two-flag product; accepting while waiting in phase 1 at an accepting
    a-state, which forces both accepting sets to recur on accepted lassos."""
    if a.alphabet != b.alphabet:
        raise ValueError("alphabet mismatch")
    ta, tb = a.move_table(), b.move_table()
    initial = {(p, q, 1) for p in a.initial for q in b.initial}
    states = set(initial)
    transitions = set()
    todo = deque(initial)
    while todo:
        s = todo.popleft()
        p, q, phase = s
        if phase == 1:
            nxt_phase = 2 if p in a.accepting else 1
        else:
            nxt_phase = 1 if q in b.accepting else 2
        for x in a.alphabet:
            for p2 in ta.get((p, x), ()):
                for q2 in tb.get((q, x), ()):
                    target = (p2, q2, nxt_phase)
                    transitions.add((s, x, target))
                    if target not in states:
                        states.add(target)
                        todo.append(target)
    accepting = {(p, q, ph) for (p, q, ph) in states if ph == 1 and p in a.accepting}
    if not states:
        states, initial = {("dead", "dead", 1)}, set()
    return BuchiAutomaton(
        a.alphabet, frozenset(states), frozenset(initial), frozenset(transitions),
        frozenset(accepting), components=a.components,
    )


def nba_union(a: BuchiAutomaton, b: BuchiAutomaton) -> BuchiAutomaton:
    if a.alphabet != b.alphabet:
        raise ValueError("alphabet mismatch")
    tag = lambda side, s: (side, s)
    states = {tag(0, s) for s in a.states} | {tag(1, s) for s in b.states}
    transitions = {(tag(0, p), x, tag(0, q)) for p, x, q in a.transitions} | {
        (tag(1, p), x, tag(1, q)) for p, x, q in b.transitions
    }
    initial = {tag(0, s) for s in a.initial} | {tag(1, s) for s in b.initial}
    accepting = {tag(0, s) for s in a.accepting} | {tag(1, s) for s in b.accepting}
    return BuchiAutomaton(
        a.alphabet, frozenset(states), frozenset(initial), frozenset(transitions),
        frozenset(accepting), components=a.components,
    )


def swap_components(a: BuchiAutomaton, j) -> BuchiAutomaton:
    """Rotate tuple symbols: the first j entries move to the end."""
    if a.components is None:
        raise ValueError("swap requires component metadata")
    k = len(a.components)
    if not 0 < j <= k:
        raise ValueError(f"swap index must be in 1..{k}")

    def rot(sym):
        return sym[j:] + sym[:j]

    components = a.components[j:] + a.components[:j]
    alphabet = Alphabet(tuple(dict.fromkeys(rot(s) for s in a.alphabet)))
    transitions = frozenset((p, rot(x), q) for p, x, q in a.transitions)
    return BuchiAutomaton(alphabet, a.states, a.initial, transitions, a.accepting, components)


def swap_parity(p: ParityTransducer, j) -> ParityTransducer:
    k = p.arity
    if not 0 < j <= k:
        raise ValueError(f"swap index must be in 1..{k}")
    delta = {(q, x[j:] + x[:j]): q2 for (q, x), q2 in p.delta.items()}
    return ParityTransducer(
        p.components[j:] + p.components[:j], p.states, p.initial, delta, dict(p.priority)
    )


def compose_j(a: BuchiAutomaton, b: BuchiAutomaton, j) -> BuchiAutomaton:
    """Relation composition linking the trailing entries of ``a`` with the
    leading entries of ``b``: lift to a triple product, intersect with the
    two-flag scheme, and project out the shared middle."""
    if a.components is None or b.components is None:
        raise ValueError("composition requires component metadata")
    k = len(a.components)
    if not 0 < j <= k:
        raise ValueError(f"composition index must be in 1..{k}")
    mid = k - j
    if b.components[:mid] != a.components[j:]:
        raise ValueError("shared-middle alphabets disagree")
    a_by_source = {}
    for p, x, q in a.transitions:
        a_by_source.setdefault(p, {}).setdefault(x, set()).add(q)
    by_mid = {}
    for q, x, q2 in b.transitions:
        by_mid.setdefault((q, x[:mid]), {}).setdefault(x[mid:], set()).add(q2)
    initial = {(p, q, 1) for p in a.initial for q in b.initial}
    states = set(initial)
    transitions = set()
    todo = deque(initial)
    while todo:
        s = todo.popleft()
        p, q, phase = s
        nxt_phase = (2 if p in a.accepting else 1) if phase == 1 else (1 if q in b.accepting else 2)
        for x, targets in a_by_source.get(p, {}).items():
            head, shared = x[:j], x[j:]
            for tail, btargets in by_mid.get((q, shared), {}).items():
                for p2 in targets:
                    for q2 in btargets:
                        target = (p2, q2, nxt_phase)
                        transitions.add((s, head + tail, target))
                        if target not in states:
                            states.add(target)
                            todo.append(target)
    components = a.components[:j] + b.components[mid:]
    from itertools import product as _product

    alphabet = Alphabet(tuple(_product(*[tuple(c) for c in components])))
    accepting = {(p, q, ph) for (p, q, ph) in states if ph == 1 and p in a.accepting}
    if not states:
        states, initial = {("dead", "dead", 1)}, set()
    return BuchiAutomaton(
        alphabet, frozenset(states), frozenset(initial), frozenset(transitions),
        frozenset(accepting), components=components,
    )


def trim_buchi(a: BuchiAutomaton) -> BuchiAutomaton:
    """Drop unreachable states and states with no nonempty path to an
    accepting state; the omega-language is unchanged."""
    adj = {}
    radj = {}
    for p, _, q in a.transitions:
        adj.setdefault(p, set()).add(q)
        radj.setdefault(q, set()).add(p)
    fwd = reachable(adj, a.initial)
    # states with a nonempty path to acceptance: predecessors of accepting states, closed backwards
    seeds = set()
    for f in a.accepting:
        seeds |= radj.get(f, set())
    live = reachable(radj, seeds)
    keep = fwd & live
    transitions = frozenset((p, x, q) for p, x, q in a.transitions if p in keep and q in keep)
    return BuchiAutomaton(
        a.alphabet, frozenset(keep) or frozenset({"dead"}), a.initial & keep, transitions,
        a.accepting & keep, components=a.components,
    )


def _dfa_growth_unbounded(dfa) -> bool:
    """Exact boundedness test for word counts per length of a trimmed DFA:
    unbounded iff two distinct cycles are chained, i.e. some cycle SCC is
    not a simple cycle, or two cycle SCCs are connected."""
    nfa = _fa.trim(_fa.dfa_as_nfa(dfa))
    adj = {}
    edge_count = {}
    for p, _, q in nfa.transitions:
        adj.setdefault(p, set()).add(q)
        edge_count[(p, q)] = edge_count.get((p, q), 0) + 1
    sccs = strongly_connected_components(nfa.states, adj)
    comp_of = {}
    cyclic = []
    for i, comp in enumerate(sccs):
        for s in comp:
            comp_of[s] = i
        nontrivial = len(comp) > 1 or any(s in adj.get(s, ()) for s in comp)
        if nontrivial:
            cyclic.append(i)
            # more than one internal edge choice at some state => two cycles share it
            for s in comp:
                internal = [q for q in adj.get(s, ()) if q in comp]
                multi = sum(edge_count[(s, q)] for q in internal)
                if multi > 1:
                    return True
    # chained distinct cycle SCCs
    comp_adj = {}
    for p, qs in adj.items():
        for q in qs:
            if comp_of[p] != comp_of[q]:
                comp_adj.setdefault(comp_of[p], set()).add(comp_of[q])
    cyclic_set = set(cyclic)
    for c in cyclic:
        seen = reachable(comp_adj, comp_adj.get(c, set()))
        seen |= comp_adj.get(c, set())
        if seen & cyclic_set:
            return True
    return False


def omega_finite(a: BuchiAutomaton) -> bool:
    """Finiteness of the omega-language: trim, then decide slenderness of
    the finite-word language of the trimmed automaton by the growth
    analysis of its determinization.

    This route is independent of the structural slenderness test in
    ``relkit.slender``; the two must agree on trimmed automata.
    """
    t = trim_buchi(a)
    if not t.initial:
        return True
    dfa = _fa.determinize(_fa.eliminate_epsilon(t.as_nfa()))
    return not _dfa_growth_unbounded(dfa)
