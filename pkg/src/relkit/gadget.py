"""Executable reduction machinery for deterministic two-tape transducers:
normalization into sink form, the paired Buchi machines whose equivalence
encodes intersection-emptiness of two finite-word relations, and lasso
evaluation of deterministic Buchi transducers.
"""

from dataclasses import dataclass

from .fa import Alphabet, EPSILON
from .omega import Lasso
from .transducers import DetTransducer


@dataclass
class DetBuchiTransducer:
    """Deterministic two-tape transducer read against infinite tapes with
    Buchi acceptance; the state fixes which tape is read next."""

    components: tuple  # component Alphabets
    states: frozenset
    tape_of: dict
    initial: object
    delta: dict  # (state, letter-or-EPSILON) -> state
    accepting: frozenset

    def __post_init__(self):
        self.components = tuple(self.components)
        self.states = frozenset(self.states)
        self.accepting = frozenset(self.accepting)
        if self.initial not in self.states:
            raise ValueError("initial state must be declared")
        if not self.accepting <= self.states:
            raise ValueError("accepting states must be declared")
        eps_states = {q for (q, x) in self.delta if x is EPSILON}
        for (q, x), t in self.delta.items():
            if q not in self.states or t not in self.states:
                raise ValueError("delta endpoint not a declared state")
            if x is not EPSILON:
                if q in eps_states:
                    raise ValueError(f"state {q!r} mixes eps and letter moves")
                if x not in self.components[self.tape_of[q] - 1]:
                    raise ValueError(f"letter {x!r} not readable on tape {self.tape_of[q]}")


_ACC = ("acc",)
_REJ = ("rej",)


def _eps_chain_accepts(t: DetTransducer, start):
    """Follow the deterministic eps chain; True when it passes an accepting
    state, False when it ends or cycles without one."""
    seen = set()
    q = start
    while True:
        if q in t.accepting:
            return True
        if (q, EPSILON) not in t.delta or q in seen:
            return False
        seen.add(q)
        q = t.delta[(q, EPSILON)]


def _eps_divergent(t: DetTransducer, q):
    """True when the eps chain from q cycles without reaching a state that
    reads input."""
    seen = set()
    while (q, EPSILON) in t.delta:
        if q in seen:
            return True
        seen.add(q)
        q = t.delta[(q, EPSILON)]
    return False


def normalize(t: DetTransducer) -> DetTransducer:
    """Sink normal form: a fresh initial state without incoming moves and
    unique accepting/rejecting sinks entered exactly when the endmarker has
    been consumed on both tapes, neither with outgoing moves.

    The machine is also made total over well-formed inputs: stalls,
    exhausted-tape reads and diverging eps chains are routed through junk
    states that consume the remaining input and reject.  The accepted
    relation is unchanged.
    """
    if t.arity != 2:
        raise ValueError("normalization handles two-tape transducers")
    mark = t.endmarker
    junk = {bits: ("junk", bits) for bits in ((0, 0), (1, 0), (0, 1))}

    def mapped(q, bits):
        """The normalized state standing for (q, bits); junk when the eps
        chain diverges or ends reading an exhausted tape."""
        if _eps_divergent(t, q):
            return junk[bits]
        probe = q
        while (probe, EPSILON) in t.delta:
            probe = t.delta[(probe, EPSILON)]
        if bits[t.tape_of[probe] - 1]:
            return junk[bits]
        return ("n", q, bits)

    states = set(junk.values()) | {_ACC, _REJ, ("init",)}
    tape_of = {junk[(0, 0)]: 1, junk[(1, 0)]: 2, junk[(0, 1)]: 1, _ACC: 1, _REJ: 1}
    delta = {}

    def rows_for(q, bits):
        """Outgoing rows of the live normalized state (q, bits)."""
        out = {}
        if (q, EPSILON) in t.delta:
            out[EPSILON] = mapped(t.delta[(q, EPSILON)], bits)
            return t.tape_of[q], out
        j = t.tape_of[q]
        for x in t.components[j - 1]:
            if (q, x) in t.delta:
                out[x] = mapped(t.delta[(q, x)], bits)
            else:
                out[x] = junk[bits]
        new_bits = (1, bits[1]) if j == 1 else (bits[0], 1)
        if (q, mark) in t.delta:
            target = t.delta[(q, mark)]
            if new_bits == (1, 1):
                out[mark] = _ACC if _eps_chain_accepts(t, target) else _REJ
            else:
                out[mark] = mapped(target, new_bits)
        else:
            out[mark] = _REJ if new_bits == (1, 1) else junk[new_bits]
        return j, out

    todo = [("init",)]
    seen = {("init",)}
    while todo:
        s = todo.pop()
        if s == ("init",):
            tape, rows = rows_for(t.initial, (0, 0))
        else:
            _, q, bits = s
            tape, rows = rows_for(q, bits)
        tape_of[s] = tape
        for x, target in rows.items():
            delta[(s, x)] = target
            states.add(target)
            if target not in seen and target[0] == "n":
                seen.add(target)
                todo.append(target)
        states.add(s)

    # junk rows: consume the remaining letters of both tapes, then reject
    for x in t.components[0]:
        delta[(junk[(0, 0)], x)] = junk[(0, 0)]
        delta[(junk[(0, 1)], x)] = junk[(0, 1)]
    delta[(junk[(0, 0)], mark)] = junk[(1, 0)]
    delta[(junk[(0, 1)], mark)] = _REJ
    for x in t.components[1]:
        delta[(junk[(1, 0)], x)] = junk[(1, 0)]
    delta[(junk[(1, 0)], mark)] = _REJ

    return DetTransducer(
        t.components, frozenset(states), tape_of, ("init",), delta,
        frozenset({_ACC}), endmarker=mark,
    )


@dataclass
class GadgetPair:
    """Two deterministic Buchi transducers differing only in their initial
    state; they accept the same relation exactly when the two source
    relations do not intersect."""

    left: DetBuchiTransducer
    right: DetBuchiTransducer
    source_left: DetTransducer
    source_right: DetTransducer


def build_gadget(aR: DetTransducer, aS: DetTransducer) -> GadgetPair:
    """Join two normalized transducers: the accepting sink of each machine
    adopts the rows of its own initial state, the rejecting sink adopts the
    other machine's initial rows, and the accepting set is asymmetric (the
    second machine's accepting sink is left out)."""
    if aR.components != aS.components:
        raise ValueError("alphabet mismatch between the two transducers")
    if aR.endmarker != aS.endmarker:
        raise ValueError("endmarker mismatch")
    for t in (aR, aS):
        if _ACC not in t.states or _REJ not in t.states:
            raise ValueError("inputs must be normalized first")
    mark = aR.endmarker
    comps = (
        Alphabet(tuple(aR.components[0]) + (mark,)),
        Alphabet(tuple(aR.components[1]) + (mark,)),
    )

    def tag(side, s):
        return (side, s)

    states = {tag("R", s) for s in aR.states} | {tag("S", s) for s in aS.states}
    delta = {}
    tape_of = {}

    def install(side, t):
        for s in t.states:
            tape_of[tag(side, s)] = t.tape_of[s]
        for (q, x), target in t.delta.items():
            delta[(tag(side, q), x)] = tag(side, target)

    install("R", aR)
    install("S", aS)

    def adopt(state, side, t):
        """state takes the rows (and tape) of t's initial state."""
        init = t.initial
        tape_of[state] = t.tape_of[init]
        for (q, x), target in t.delta.items():
            if q == init:
                delta[(state, x)] = tag(side, target)

    adopt(tag("R", _ACC), "R", aR)
    adopt(tag("R", _REJ), "S", aS)
    adopt(tag("S", _ACC), "S", aS)
    adopt(tag("S", _REJ), "R", aR)

    accepting = frozenset({tag("R", _ACC), tag("R", _REJ), tag("S", _REJ)})
    left = DetBuchiTransducer(comps, frozenset(states), dict(tape_of),
                              tag("R", aR.initial), dict(delta), accepting)
    right = DetBuchiTransducer(comps, frozenset(states), dict(tape_of),
                               tag("S", aS.initial), dict(delta), accepting)
    return GadgetPair(left, right, aR, aS)


def det_buchi_lasso_accepts(b: DetBuchiTransducer, left: Lasso, right: Lasso) -> bool:
    """Run the unique computation on the pair of ultimately periodic tapes
    over the finite configuration space and accept when the configuration
    cycle contains a Buchi state and consumes letters from both tapes."""
    tapes = (left, right)
    bounds = [(len(l.prefix), len(l.period)) for l in tapes]

    def advance(i, pos):
        n_pre, n_per = bounds[i]
        nxt = pos + 1
        return nxt if nxt < n_pre + n_per else n_pre

    def step(config):
        """(next config, consumed tape index or None); None on a stall."""
        q, p1, p2 = config
        if (q, EPSILON) in b.delta:
            return (b.delta[(q, EPSILON)], p1, p2), None
        j = b.tape_of[q]
        pos = p1 if j == 1 else p2
        x = tapes[j - 1].letter(pos)
        if (q, x) not in b.delta:
            return None, None
        q2 = b.delta[(q, x)]
        if j == 1:
            return (q2, advance(0, p1), p2), 1
        return (q2, p1, advance(1, p2)), 2

    seen = {}
    trace = []
    config = (b.initial, 0, 0)
    while config not in seen:
        seen[config] = len(trace)
        trace.append(config)
        config, _ = step(config)
        if config is None:
            return False
    cycle = trace[seen[config]:]
    consumed = {1: False, 2: False}
    buchi_hit = False
    cur = cycle[0]
    for _ in range(len(cycle)):
        if cur[0] in b.accepting:
            buchi_hit = True
        cur, tape = step(cur)
        if tape is not None:
            consumed[tape] = True
    return buchi_hit and consumed[1] and consumed[2]
