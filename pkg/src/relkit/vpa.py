"""Visibly pushdown automata with pop-on-empty, run semantics, the paired
product, well-matched reachability, and post* saturation over
configuration automata.

Stored stack words exclude the bottom marker: a configuration is a control
state plus the stack content top-first, and bottom-pop transitions fire
exactly when the stored stack is empty.  The saturation engine models the
bottom explicitly via the reserved ``BOTTOM`` symbol.
"""

from collections import deque
from dataclasses import dataclass, field

from .errors import ResourceLimitError
from .fa import Alphabet, EPSILON, Nfa, eliminate_epsilon, epsilon_closure, state_budget
from .fa import _Marker

BOTTOM = _Marker("BOT")


@dataclass
class Vpa:
    """Visibly pushdown automaton, possibly nondeterministic.

    ``push`` holds (p, c, q, gamma), ``pop`` holds (p, r, gamma, q) with
    gamma in the stack alphabet or BOTTOM, ``internal`` holds (p, a, q).
    """

    states: frozenset
    calls: tuple
    returns: tuple
    internals: tuple
    stack: tuple  # stack symbols, BOTTOM excluded
    initial: object
    push: frozenset
    pop: frozenset
    internal: frozenset
    accepting: frozenset

    def __post_init__(self):
        self.states = frozenset(self.states)
        self.accepting = frozenset(self.accepting)
        self.calls = tuple(self.calls)
        self.returns = tuple(self.returns)
        self.internals = tuple(self.internals)
        self.stack = tuple(self.stack)
        self.push = frozenset(self.push)
        self.pop = frozenset(self.pop)
        self.internal = frozenset(self.internal)
        parts = [set(self.calls), set(self.returns), set(self.internals)]
        if parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2]:
            raise ValueError("call/return/internal alphabets must be disjoint")
        if BOTTOM in self.stack:
            raise ValueError("BOTTOM is reserved and implicit")
        if self.initial not in self.states:
            raise ValueError("initial state must be declared")
        if not self.accepting <= self.states:
            raise ValueError("accepting states must be declared")
        for p, c, q, g in self.push:
            if c not in parts[0] or g not in self.stack or {p, q} - self.states:
                raise ValueError(f"bad push transition {(p, c, q, g)!r}")
        for p, r, g, q in self.pop:
            if r not in parts[1] or (g is not BOTTOM and g not in self.stack) or {p, q} - self.states:
                raise ValueError(f"bad pop transition {(p, r, g, q)!r}")
        for p, a, q in self.internal:
            if a not in parts[2] or {p, q} - self.states:
                raise ValueError(f"bad internal transition {(p, a, q)!r}")

    def letter_kind(self, x):
        if x in self.calls:
            return "call"
        if x in self.returns:
            return "return"
        if x in self.internals:
            return "internal"
        raise ValueError(f"unknown letter {x!r}")

    def is_deterministic(self):
        seen = set()
        for p, c, _, _ in self.push:
            if (p, c) in seen:
                return False
            seen.add((p, c))
        seen = set()
        for p, r, g, _ in self.pop:
            if (p, r, g) in seen:
                return False
            seen.add((p, r, g))
        seen = set()
        for p, a, _ in self.internal:
            if (p, a) in seen:
                return False
            seen.add((p, a))
        return True


class Dvpa(Vpa):
    """Vpa validated to be deterministic."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_deterministic():
            raise ValueError("transition relation is not deterministic")

    def push_map(self):
        return {(p, c): (q, g) for p, c, q, g in self.push}

    def pop_map(self):
        return {(p, r, g): q for p, r, g, q in self.pop}

    def internal_map(self):
        return {(p, a): q for p, a, q in self.internal}


@dataclass(frozen=True)
class Configuration:
    """Control state plus stack content, top-first; the bottom is implicit."""

    state: object
    stack: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "stack", tuple(self.stack))
        if BOTTOM in self.stack:
            raise ValueError("stored stacks exclude the bottom marker")


def stepper(d: Dvpa):
    """Single-step function over configurations; None marks a stall."""
    push, pop, internal = d.push_map(), d.pop_map(), d.internal_map()
    calls, returns = set(d.calls), set(d.returns)

    def step(c: Configuration, x):
        if x in calls:
            hit = push.get((c.state, x))
            if hit is None:
                return None
            return Configuration(hit[0], (hit[1],) + c.stack)
        if x in returns:
            if c.stack:
                q = pop.get((c.state, x, c.stack[0]))
                return None if q is None else Configuration(q, c.stack[1:])
            q = pop.get((c.state, x, BOTTOM))
            return None if q is None else Configuration(q, ())
        q = internal.get((c.state, x))
        return None if q is None else Configuration(q, c.stack)

    return step


def dvpa_run(d: Dvpa, c: Configuration, w):
    """The unique configuration reached on w, or None when the run stalls."""
    push, pop, internal = d.push_map(), d.pop_map(), d.internal_map()
    state, stack = c.state, list(c.stack)
    for x in w:
        kind = d.letter_kind(x)
        if kind == "call":
            hit = push.get((state, x))
            if hit is None:
                return None
            state = hit[0]
            stack.insert(0, hit[1])
        elif kind == "internal":
            state = internal.get((state, x))
            if state is None:
                return None
        elif stack:
            state = pop.get((state, x, stack[0]))
            if state is None:
                return None
            del stack[0]
        else:
            state = pop.get((state, x, BOTTOM))
            if state is None:
                return None
    return Configuration(state, tuple(stack))


def dvpa_accepts(d: Dvpa, w) -> bool:
    end = dvpa_run(d, Configuration(d.initial), w)
    return end is not None and end.state in d.accepting


def square(d: Vpa) -> Vpa:
    """Two synchronized copies on a common input; pop-on-empty transitions
    are purged, so runs of the square never touch the bottom."""
    states = frozenset((p, q) for p in d.states for q in d.states)
    push = frozenset(
        ((p, q), c, (p2, q2), (g1, g2))
        for p, c, p2, g1 in d.push
        for q, c2, q2, g2 in d.push
        if c == c2
    )
    pop = frozenset(
        ((p, q), r, (g1, g2), (p2, q2))
        for p, r, g1, p2 in d.pop
        for q, r2, g2, q2 in d.pop
        if r == r2 and g1 is not BOTTOM and g2 is not BOTTOM
    )
    internal = frozenset(
        ((p, q), a, (p2, q2))
        for p, a, p2 in d.internal
        for q, a2, q2 in d.internal
        if a == a2
    )
    stack = tuple((g1, g2) for g1 in d.stack for g2 in d.stack)
    return Vpa(
        states, d.calls, d.returns, d.internals, stack,
        (d.initial, d.initial), push, pop, internal,
        frozenset((p, q) for p in d.accepting for q in d.accepting),
    )


def compile_rules(v: Vpa):
    """Head-rewriting rules with the bottom explicit: push transitions
    rewrite every possible top (including BOTTOM, keeping it below), pops
    erase their symbol, bottom pops keep the bottom, internals rewrite the
    top to itself."""
    rules = []
    tops = tuple(v.stack) + (BOTTOM,)
    for p, c, q, g in v.push:
        for x in tops:
            rules.append((p, x, q, (g, x)))
    for p, r, g, q in v.pop:
        if g is BOTTOM:
            rules.append((p, BOTTOM, q, (BOTTOM,)))
        else:
            rules.append((p, g, q, ()))
    for p, a, q in v.internal:
        for x in tops:
            rules.append((p, x, q, (x,)))
    return rules


@dataclass
class ConfigAutomaton:
    """Regular set of configurations: an Nfa over the stack alphabet plus an
    entry state per control state; (p, stack) is in the set when the Nfa
    accepts the stack word from entry[p]."""

    nfa: Nfa
    entry: dict  # control state -> nfa state

    def contains(self, state, stack) -> bool:
        if state not in self.entry:
            return False
        table = self.nfa.move_table()
        current = epsilon_closure(self.nfa, {self.entry[state]}, table)
        for g in stack:
            step = set()
            for p in current:
                step |= table.get((p, g), set())
            current = epsilon_closure(self.nfa, step, table)
            if not current:
                return False
        return bool(current & self.nfa.accepting)

    def nonempty_from(self, state) -> bool:
        """Whether any configuration with this control state is in the set."""
        if state not in self.entry:
            return False
        adj = self.nfa.successor_graph()
        seen = {self.entry[state]}
        todo = deque(seen)
        while todo:
            p = todo.popleft()
            if p in self.nfa.accepting:
                return True
            for q in adj.get(p, ()):
                if q not in seen:
                    seen.add(q)
                    todo.append(q)
        return False


def _stack_alphabet(v: Vpa):
    return Alphabet(v.stack) if v.stack else Alphabet(("unused-stack-symbol",))


def singleton_config_automaton(v: Vpa, configs) -> ConfigAutomaton:
    """ConfigAutomaton for a finite set of configurations."""
    alphabet = _stack_alphabet(v)
    states = set()
    transitions = set()
    entry = {}
    accepting = set()
    for idx, (state, stack) in enumerate(configs):
        nodes = [("c", idx, i) for i in range(len(stack) + 1)]
        states.update(nodes)
        entry.setdefault(state, ("e", state))
        states.add(("e", state))
        transitions.add((("e", state), EPSILON, nodes[0]))
        for i, g in enumerate(stack):
            transitions.add((nodes[i], g, nodes[i + 1]))
        accepting.add(nodes[-1])
    for state in v.states:
        entry.setdefault(state, ("e", state))
        states.add(("e", state))
    nfa = Nfa(alphabet, frozenset(states), frozenset(entry.values()), frozenset(transitions), frozenset(accepting))
    return ConfigAutomaton(nfa, entry)


def post_star(v: Vpa, c: ConfigAutomaton, budget=None) -> ConfigAutomaton:
    """Saturation computing the configurations reachable from the set c.

    Standard P-automaton saturation over head-rewriting rules, with the
    bottom symbol explicit internally; the result is converted back to the
    implicit-bottom view.  Rules only read from control entry states, and
    no edge ever points into one, so epsilon facts (from erasing rules)
    form single steps and are folded in incrementally.
    """
    base = eliminate_epsilon(c.nfa)
    fin = ("fin",)
    ctl = {p: ("ctl", p) for p in v.states}
    ctl_name = {("ctl", p): p for p in v.states}

    rules_by_head = {}
    for p, g, q, w in compile_rules(v):
        rules_by_head.setdefault((p, g), []).append((q, w))

    cap = state_budget(budget)
    edges = set()
    eps = set()
    edges_from = {}
    eps_into = {}  # non-ctl state -> set of ctl source states
    queue = deque()

    def add_edge(s, g, t):
        if (s, g, t) in edges:
            return
        edges.add((s, g, t))
        if len(edges) > cap:
            raise ResourceLimitError(f"post* saturation exceeded {cap} edges")
        edges_from.setdefault(s, []).append((g, t))
        queue.append(("edge", s, g, t))

    def add_eps(s, t):
        if (s, t) in eps:
            return
        eps.add((s, t))
        eps_into.setdefault(t, set()).add(s)
        queue.append(("eps", s, t))

    base_table = base.move_table()
    for p, g, q in base.transitions:
        add_edge(("in", p), g, ("in", q))
    for t in base.accepting:
        add_edge(("in", t), BOTTOM, fin)
    for p, e in c.entry.items():
        for (src, g), targets in base_table.items():
            if src == e:
                for q in targets:
                    add_edge(ctl[p], g, ("in", q))
        if e in base.accepting:
            add_edge(ctl[p], BOTTOM, fin)

    def apply_rules(p, g, t):
        for q, w in rules_by_head.get((p, g), ()):
            if len(w) == 0:
                add_eps(ctl[q], t)
            elif len(w) == 1:
                add_edge(ctl[q], w[0], t)
            else:
                mid = ("mid", q, w[0])
                add_edge(ctl[q], w[0], mid)
                add_edge(mid, w[1], t)

    while queue:
        item = queue.popleft()
        if item[0] == "edge":
            _, s, g, t = item
            if s in ctl_name:
                apply_rules(ctl_name[s], g, t)
            for src in tuple(eps_into.get(s, ())):
                apply_rules(ctl_name[src], g, t)
        else:
            _, s, t = item
            for g, t2 in tuple(edges_from.get(t, ())):
                apply_rules(ctl_name[s], g, t2)

    # back to the implicit-bottom view: drop BOTTOM edges, re-derive acceptance
    states = {s for s, _, _ in edges} | {t for _, _, t in edges} | set(ctl.values()) | {fin}
    pub_transitions = {(s, g, t) for s, g, t in edges if g is not BOTTOM}
    pub_transitions |= {(s, EPSILON, t) for s, t in eps}
    accepting = {s for s, g, t in edges if g is BOTTOM and t is fin}
    # an eps edge into a state that reads BOTTOM to fin also accepts
    accepting |= {s for s, t in eps if t in accepting}
    nfa = eliminate_epsilon(
        Nfa(_stack_alphabet(v), frozenset(states), frozenset(ctl.values()),
            frozenset(pub_transitions), frozenset(accepting))
    )
    return ConfigAutomaton(nfa, dict(ctl))


def post_star_from(v: Vpa, configs, budget=None) -> ConfigAutomaton:
    return post_star(v, singleton_config_automaton(v, configs), budget)


def well_matched_closure(v: Vpa):
    """dict state -> bitmask-backed set of states co-reachable via a
    well-matched word, plus the node order.

    Direct summary fixpoint: internal moves are base edges; a matched
    call/return pair around an already-known closure adds a summary edge.
    Returns (nodes, reach_masks) with ``nodes`` fixing bit positions.
    """
    nodes = sorted(v.states, key=repr)
    idx = {s: i for i, s in enumerate(nodes)}
    n = len(nodes)
    succ = [0] * n
    for p, _, q in v.internal:
        succ[idx[p]] |= 1 << idx[q]
    push_entries = []  # (source bit index, pushed symbol, target index)
    for p, c, q, g in v.push:
        push_entries.append((idx[p], g, idx[q]))
    pop_src_mask = {}  # gamma -> mask of pop source states
    pop_targets = {}  # (source index, gamma) -> mask of targets
    for p, r, g, q in v.pop:
        if g is BOTTOM:
            continue
        pop_src_mask[g] = pop_src_mask.get(g, 0) | (1 << idx[p])
        key = (idx[p], g)
        pop_targets[key] = pop_targets.get(key, 0) | (1 << idx[q])

    while True:
        # transitive closure of succ by fixpoint sweeps over direct successors
        reach = [succ[i] | (1 << i) for i in range(n)]
        changed = True
        while changed:
            changed = False
            for i in range(n):
                acc = reach[i]
                m = succ[i]
                while m:
                    j = (m & -m).bit_length() - 1
                    m &= m - 1
                    acc |= reach[j]
                if acc != reach[i]:
                    reach[i] = acc
                    changed = True
        grown = False
        for p_i, g, q_i in push_entries:
            hits = reach[q_i] & pop_src_mask.get(g, 0)
            targets = 0
            m = hits
            while m:
                j = (m & -m).bit_length() - 1
                m &= m - 1
                targets |= pop_targets[(j, g)]
            if targets & ~succ[p_i]:
                succ[p_i] |= targets
                grown = True
        if not grown:
            return nodes, reach


def well_matched_pairs(d: Vpa):
    """Relation on state pairs of the square: ((p,q),(p2,q2)) when both
    copies can traverse a common well-matched word, by per-source post*
    membership of the empty-stack configuration."""
    sq = square(d)
    out = {}
    for p in d.states:
        for q in d.states:
            sat = post_star_from(sq, [((p, q), ())])
            hits = set()
            for p2 in d.states:
                for q2 in d.states:
                    if sat.contains((p2, q2), ()):
                        hits.add((p2, q2))
            out[(p, q)] = hits
    return out


def complete_dvpa(d: Dvpa) -> Dvpa:
    """Totalize with a non-accepting absorbing sink.

    The language and the equivalence of configurations over the original
    states are unchanged; runs that would stall instead fall into the sink,
    which makes stall-separated configurations visible to search procedures
    that simulate both copies to the end.
    """
    push, pop, internal = d.push_map(), d.pop_map(), d.internal_map()
    sink = ("vpa-sink",)
    while sink in d.states:
        sink = sink + ("'",)
    stack = d.stack if d.stack else ("vpa-sink-symbol",)
    g0 = stack[0]
    states = set(d.states) | {sink}
    new_push = set(d.push)
    new_pop = set(d.pop)
    new_internal = set(d.internal)
    for p in states:
        for c in d.calls:
            if p is sink or (p, c) not in push:
                new_push.add((p, c, sink, g0))
        for r in d.returns:
            for g in tuple(stack) + (BOTTOM,):
                if p is sink or (p, r, g) not in pop:
                    new_pop.add((p, r, g, sink))
        for a in d.internals:
            if p is sink or (p, a) not in internal:
                new_internal.add((p, a, sink))
    return Dvpa(
        frozenset(states), d.calls, d.returns, d.internals, stack, d.initial,
        frozenset(new_push), frozenset(new_pop), frozenset(new_internal), d.accepting,
    )


def mark_unmatched(word_letters, calls, returns):
    """Positions of unmatched calls and unmatched returns in a word."""
    calls, returns = set(calls), set(returns)
    stack = []
    unmatched_returns = []
    for i, x in enumerate(word_letters):
        if x in calls:
            stack.append(i)
        elif x in returns:
            if stack:
                stack.pop()
            else:
                unmatched_returns.append(i)
    return tuple(stack), tuple(unmatched_returns)


def call_decomposition(word_letters, calls, returns):
    """Unique split u = prefix . w1 c1 w2 c2 ... cn w_{n+1} with unmatched
    calls ci, well-matched wi, and the prefix the shortest one containing
    every unmatched return."""
    w = tuple(word_letters)
    unmatched_calls, unmatched_returns = mark_unmatched(w, calls, returns)
    cut = unmatched_returns[-1] + 1 if unmatched_returns else 0
    prefix = w[:cut]
    segments = []
    last = cut
    for i in unmatched_calls:
        segments.append((w[last:i], w[i]))
        last = i + 1
    return prefix, tuple(segments), w[last:]


def pop_decomposition(word_letters, calls, returns):
    """Unique split u = w_n r_n ... w_1 r_1 w_0 . suffix with unmatched
    returns ri, well-matched wi, and the suffix starting at the first
    unmatched call."""
    w = tuple(word_letters)
    unmatched_calls, unmatched_returns = mark_unmatched(w, calls, returns)
    cut = unmatched_calls[0] if unmatched_calls else len(w)
    segments = []
    last = 0
    for i in unmatched_returns:
        segments.append((w[last:i], w[i]))
        last = i + 1
    return tuple(segments), w[last:cut], w[cut:]


def is_well_matched(word_letters, calls, returns):
    uc, ur = mark_unmatched(word_letters, calls, returns)
    return not uc and not ur
