"""Finite-word relation machines: synchronous transducers (automatic
relations, read in lockstep with end padding) and deterministic
asynchronous transducers (deterministic rational relations, evaluated
with endmarker semantics).
"""

from dataclasses import dataclass
from itertools import product

from .fa import EPSILON, PAD, Alphabet, Nfa, eliminate_epsilon, accepts, intersect


def padded_product_alphabet(components):
    """Product alphabet (S1 u {PAD}) x ... x (Sk u {PAD}) minus the all-pad tuple.

    Order is lexicographic in the component declaration orders with PAD
    ranked last, which keeps the order canonical and derived.
    """
    axes = [tuple(c) + (PAD,) for c in components]
    symbols = tuple(t for t in product(*axes) if any(x is not PAD for x in t))
    return Alphabet(symbols)


def pad_encode(components, parts):
    """Lockstep encoding of a word tuple: one product letter per position."""
    n = max((len(p) for p in parts), default=0)
    out = []
    for i in range(n):
        out.append(tuple(p[i] if i < len(p) else PAD for p in parts))
    return tuple(out)


def pad_decode(encoded, arity):
    """Inverse of pad_encode; raises if a real letter follows a pad."""
    parts = [[] for _ in range(arity)]
    done = [False] * arity
    for sym in encoded:
        for j, x in enumerate(sym):
            if x is PAD:
                done[j] = True
            else:
                if done[j]:
                    raise ValueError("letter after pad in component %d" % (j + 1))
                parts[j].append(x)
    return tuple(tuple(p) for p in parts)


def well_padded_nfa(components):
    """Automaton of all valid lockstep encodings: pads persist per component.

    States are frozensets of already-padded component indices; the all-pad
    letter does not exist, so encodings are unique.
    """
    arity = len(components)
    alphabet = padded_product_alphabet(components)
    states = set()
    transitions = set()
    initial = frozenset()
    todo = [initial]
    states.add(initial)
    while todo:
        padded = todo.pop()
        for sym in alphabet:
            nxt = set(padded)
            ok = True
            for j, x in enumerate(sym):
                if x is PAD:
                    nxt.add(j)
                elif j in padded:
                    ok = False
                    break
            if not ok:
                continue
            nxt = frozenset(nxt)
            transitions.add((padded, sym, nxt))
            if nxt not in states:
                states.add(nxt)
                todo.append(nxt)
    return Nfa(alphabet, frozenset(states), frozenset({initial}), frozenset(transitions), frozenset(states))


def check_padding_discipline(nfa: Nfa, arity):
    """Annotation pass: no reachable path re-introduces a real letter after
    a pad was read in the same component.  Returns the offending transition
    or None."""
    by_source = {}
    for p, sym, q in nfa.transitions:
        by_source.setdefault(p, []).append((sym, q))
    # padded[q] = set of components j such that some path into q read a pad in j
    padded = {q: set() for q in nfa.states}
    todo = list(nfa.initial)
    seen = set(nfa.initial)
    while todo:
        p = todo.pop()
        for sym, q in by_source.get(p, ()):
            if sym is EPSILON:
                pads = set()
            else:
                pads = {j for j, x in enumerate(sym) if x is PAD}
                for j in padded[p]:
                    if sym[j] is not PAD:
                        return (p, sym, q)
            carry = padded[p] | pads
            if q not in seen or not carry <= padded[q]:
                padded[q] |= carry
                seen.add(q)
                todo.append(q)
    return None


@dataclass
class SyncTransducer:
    """Synchronous k-tape transducer: an Nfa over the padded product alphabet."""

    components: tuple  # component Alphabets
    nfa: Nfa

    def __post_init__(self):
        self.components = tuple(self.components)
        bad = check_padding_discipline(self.nfa, self.arity)
        if bad is not None:
            raise ValueError(f"padding discipline violated at transition {bad!r}")

    @property
    def arity(self):
        return len(self.components)

    def product_alphabet(self):
        return padded_product_alphabet(self.components)


def sync_accepts(t: SyncTransducer, parts) -> bool:
    """Membership of a word tuple: accept its lockstep padded encoding."""
    parts = tuple(tuple(p) for p in parts)
    if len(parts) != t.arity:
        raise ValueError(f"arity mismatch: expected {t.arity} components")
    for j, part in enumerate(parts):
        for x in part:
            if x not in t.components[j]:
                raise ValueError(f"symbol {x!r} not in component alphabet {j + 1}")
    return accepts(t.nfa, pad_encode(t.components, parts))


def sync_as_nfa(t: SyncTransducer) -> Nfa:
    """The padded-product view, intersected with the well-padded language.

    The intersection restores the structural padding discipline after
    Boolean pipelines (e.g. complement) that may break it.
    """
    return intersect(t.nfa, well_padded_nfa(t.components))


@dataclass
class DetTransducer:
    """Deterministic asynchronous transducer.

    The state determines which tape is read next (``tape_of``, 1-based).
    ``delta`` maps (state, letter) to a state, where the letter is drawn
    from the state's tape alphabet, the endmarker, or EPSILON; if an
    EPSILON move is defined for a state, no other move may be.
    """

    components: tuple  # component Alphabets
    states: frozenset
    tape_of: dict  # state -> tape index, 1-based
    initial: object
    delta: dict  # (state, letter) -> state
    accepting: frozenset
    endmarker: object = "#"

    def __post_init__(self):
        self.components = tuple(self.components)
        self.states = frozenset(self.states)
        self.accepting = frozenset(self.accepting)
        if self.initial not in self.states:
            raise ValueError("initial state must be declared")
        if not self.accepting <= self.states:
            raise ValueError("accepting states must be declared")
        if set(self.tape_of) != set(self.states):
            raise ValueError("tape partition must cover exactly the states")
        for q, j in self.tape_of.items():
            if not 1 <= j <= self.arity:
                raise ValueError(f"tape index out of range for state {q!r}")
        for j, comp in enumerate(self.components, start=1):
            if self.endmarker in comp:
                raise ValueError("endmarker must be fresh for every tape alphabet")
        eps_states = {q for (q, x) in self.delta if x is EPSILON}
        for (q, x), target in self.delta.items():
            if q not in self.states or target not in self.states:
                raise ValueError("delta endpoint not a declared state")
            if x is EPSILON:
                continue
            if q in eps_states:
                raise ValueError(f"state {q!r} mixes eps and letter moves")
            if x != self.endmarker and x not in self.components[self.tape_of[q] - 1]:
                raise ValueError(f"letter {x!r} not readable on tape {self.tape_of[q]}")

    @property
    def arity(self):
        return len(self.components)


def det_run_configs(t: DetTransducer, tapes):
    """Configurations (state, positions) visited by the unique run on the
    given fully extended tapes (endmarkers already appended).  Stops on a
    stall or when a configuration repeats (pure-eps divergence)."""
    pos = [0] * t.arity
    q = t.initial
    seen = set()
    while True:
        config = (q, tuple(pos))
        if config in seen:
            return
        seen.add(config)
        yield config
        if (q, EPSILON) in t.delta:
            q = t.delta[(q, EPSILON)]
            continue
        j = t.tape_of[q] - 1
        if pos[j] >= len(tapes[j]):
            return
        x = tapes[j][pos[j]]
        if (q, x) not in t.delta:
            return
        q = t.delta[(q, x)]
        pos[j] += 1


def det_accepts(t: DetTransducer, parts) -> bool:
    """Endmarker semantics: accept iff the unique run on the tuple extended
    with one endmarker per tape reaches an accepting state with every tape
    fully consumed.  Stalls and pure-eps divergence reject."""
    parts = tuple(tuple(p) for p in parts)
    if len(parts) != t.arity:
        raise ValueError(f"arity mismatch: expected {t.arity} components")
    tapes = [p + (t.endmarker,) for p in parts]
    full = tuple(len(tape) for tape in tapes)
    for q, pos in det_run_configs(t, tapes):
        if pos == full and q in t.accepting:
            return True
    return False


def sync_product_of_languages(n1: Nfa, n2: Nfa, comp1: Alphabet, comp2: Alphabet) -> SyncTransducer:
    """Synchronous transducer for the direct product L(n1) x L(n2)."""
    n1 = eliminate_epsilon(n1)
    n2 = eliminate_epsilon(n2)
    t1, t2 = n1.move_table(), n2.move_table()
    done1, done2 = "done1", "done2"
    states = set()
    transitions = set()
    initial = {(p, q) for p in n1.initial for q in n2.initial}
    todo = list(initial)
    states |= initial
    accepting = set()

    def add(state):
        if state not in states:
            states.add(state)
            todo.append(state)

    while todo:
        s = todo.pop()
        x_state, y_state = s
        if (x_state is done1 or x_state in n1.accepting) and (y_state is done2 or y_state in n2.accepting):
            accepting.add(s)
        for a in comp1:
            for b in comp2:
                if x_state is not done1 and y_state is not done2:
                    for p2 in t1.get((x_state, a), ()):
                        for q2 in t2.get((y_state, b), ()):
                            nxt = (p2, q2)
                            add(nxt)
                            transitions.add((s, (a, b), nxt))
        for b in comp2:
            if y_state is done2:
                continue
            src_ok = x_state is done1 or x_state in n1.accepting
            if not src_ok:
                continue
            for q2 in t2.get((y_state, b), ()):
                nxt = (done1, q2)
                add(nxt)
                transitions.add((s, (PAD, b), nxt))
        for a in comp1:
            if x_state is done1:
                continue
            src_ok = y_state is done2 or y_state in n2.accepting
            if not src_ok:
                continue
            for p2 in t1.get((x_state, a), ()):
                nxt = (p2, done2)
                add(nxt)
                transitions.add((s, (a, PAD), nxt))
    if not states:
        states = {("dead", "dead")}
        initial = set()
    nfa = Nfa(
        padded_product_alphabet((comp1, comp2)),
        frozenset(states),
        frozenset(initial),
        frozenset(transitions),
        frozenset(accepting),
    )
    return SyncTransducer((comp1, comp2), nfa)
