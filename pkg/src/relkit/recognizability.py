"""Recognizability of binary automatic relations, by reduction to the
regularity problem of a deterministic visibly pushdown automaton.

The relation is first renamed so the two tape alphabets are disjoint; the
words reverse(u) separator v for related pairs (u, v) then form a visibly
pushdown language whose DVPA performs a reverse powerset construction
while pushing and the forward powerset while popping.  That language is
regular exactly when the relation is a finite union of products.
"""

from collections import deque
from dataclasses import dataclass

from .errors import ResourceLimitError
from .fa import Alphabet, EPSILON, PAD, Nfa, Verdict, eliminate_epsilon, state_budget
from .regularity import PairVerdict, is_regular
from .transducers import SyncTransducer
from .vpa import BOTTOM, Dvpa

SEPARATOR = "#"


def _rename_symbol(sym, taken):
    base = f"{sym}_2" if isinstance(sym, str) else ("2", sym)
    fresh = base
    while fresh in taken:
        fresh = f"{fresh}x" if isinstance(fresh, str) else fresh + ("x",)
    return fresh


def disjointify(t: SyncTransducer) -> SyncTransducer:
    """Rename second-tape letters to fresh tagged copies when the two tape
    alphabets overlap; the relation is isomorphic under the renaming."""
    comp1, comp2 = t.components
    overlap = set(comp1.symbols) & set(comp2.symbols)
    if not overlap:
        return t
    taken = set(comp1.symbols) | set(comp2.symbols)
    ren = {}
    for sym in comp2:
        fresh = _rename_symbol(sym, taken)
        taken.add(fresh)
        ren[sym] = fresh
    new_comp2 = Alphabet(tuple(ren[s] for s in comp2))

    def relabel(sym):
        if sym is EPSILON:
            return EPSILON
        x, y = sym
        return (x, y if y is PAD else ren[y])

    alphabet = Alphabet(tuple(dict.fromkeys(
        relabel(s) for s in t.nfa.alphabet
    )))
    nfa = Nfa(
        alphabet,
        t.nfa.states,
        t.nfa.initial,
        frozenset((p, relabel(x), q) for p, x, q in t.nfa.transitions),
        t.nfa.accepting,
    )
    return SyncTransducer((comp1, new_comp2), nfa)


@dataclass
class LrDvpa:
    """DVPA for the reversed-first-component language of a binary relation,
    with a link back to the source transducer."""

    dvpa: Dvpa
    source: SyncTransducer
    separator: object = SEPARATOR


def build_LR_dvpa(t: SyncTransducer, budget=None) -> LrDvpa:
    """Reverse powerset construction.

    The push phase reads reverse(u) and stacks (letter, predecessor set)
    pairs, where the set tracks the states from which the still-unread part
    of reverse(u) can finish the first tape alone; the separator switches
    to the forward phase, which pops one stacked letter per second-tape
    letter and runs the forward powerset; exhausted stacks pop the implicit
    bottom, which supplies the pair (no letter, accepting set).  A state
    (P, S) accepts when the forward set P meets the stacked set S.
    """
    comp1, comp2 = t.components
    if set(comp1.symbols) & set(comp2.symbols):
        raise ValueError("tape alphabets must be disjoint; call disjointify first")
    separator = SEPARATOR
    taken = set(comp1.symbols) | set(comp2.symbols)
    while separator in taken:
        separator += "L"
    nfa = eliminate_epsilon(t.nfa)
    cap = state_budget(budget)

    # predecessor table under (letter, pad) moves, successor table under full pairs
    pred1 = {}
    step = {}
    for p, sym, q in nfa.transitions:
        x, y = sym
        if y is PAD and x is not PAD:
            pred1.setdefault((x, q), set()).add(p)
        if y is not PAD:
            step.setdefault((p, x, y), set()).add(q)

    accepting_set = frozenset(nfa.accepting)
    initial_set = frozenset(nfa.initial)

    # pass 1: backward sets reachable while pushing reverse(u)
    push_states = {accepting_set}
    push = set()
    internal = set()
    stack_symbols = set()
    todo = deque([accepting_set])
    while todo:
        s = todo.popleft()
        for c in comp1:
            s2 = frozenset(p for q in s for p in pred1.get((c, q), ()))
            push.add((("push", s), c, ("push", s2), (c, s)))
            stack_symbols.add((c, s))
            if s2 not in push_states:
                push_states.add(s2)
                if len(push_states) > cap:
                    raise ResourceLimitError(f"reverse powerset exceeded {cap} states")
                todo.append(s2)

    # pass 2: forward sets over pops, with every stacked cell now known
    pair_states = set()
    pop = set()
    todo = deque()
    for s in push_states:
        target = (initial_set, s)
        internal.add((("push", s), separator, ("pair", target)))
        if target not in pair_states:
            pair_states.add(target)
            todo.append(target)
    while todo:
        data = todo.popleft()
        fwd, _ = data
        for r in comp2:
            moves = []
            for (c, s) in stack_symbols:
                nxt = frozenset(q for p in fwd for q in step.get((p, c, r), ()))
                moves.append(((c, s), (nxt, s)))
            bottom_nxt = frozenset(q for p in fwd for q in step.get((p, PAD, r), ()))
            moves.append((BOTTOM, (bottom_nxt, accepting_set)))
            for cell, target in moves:
                pop.add((("pair", data), r, cell, ("pair", target)))
                if target not in pair_states:
                    pair_states.add(target)
                    if len(pair_states) > cap:
                        raise ResourceLimitError(f"reverse powerset exceeded {cap} states")
                    todo.append(target)

    states = {("push", s) for s in push_states} | {("pair", d) for d in pair_states}
    accepting = frozenset(("pair", (p, s)) for (p, s) in pair_states if p & s)
    dvpa = Dvpa(
        frozenset(states),
        tuple(comp1),
        tuple(comp2),
        (separator,),
        tuple(sorted(stack_symbols, key=repr)),
        ("push", accepting_set),
        frozenset(push),
        frozenset(pop),
        frozenset(internal),
        accepting,
    )
    return LrDvpa(dvpa, t, separator)


def encode_lr_word(u, v, separator=SEPARATOR):
    """The word reverse(u) separator v."""
    return tuple(reversed(tuple(u))) + (separator,) + tuple(v)


def is_recognizable(t: SyncTransducer, budget=None) -> Verdict:
    """Whether the binary relation is a finite union of direct products:
    rename the tapes apart, build the reverse-powerset DVPA, and test its
    language for regularity."""
    if t.arity != 2:
        raise ValueError("recognizability test handles binary relations")
    renamed = disjointify(t)
    lr = build_LR_dvpa(renamed, budget)
    verdict: PairVerdict = is_regular(lr.dvpa, budget)
    details = dict(verdict.details)
    details["dvpa_states"] = len(lr.dvpa.states)
    if verdict.holds:
        return Verdict(True, details=details)
    return Verdict(False, witness={
        "config_pair": verdict.pair,
        "separator": verdict.separator,
        "separator_found": verdict.separator_found,
    }, details=details)
