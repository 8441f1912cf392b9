"""Slenderness of a regular language from an Nfa, with witness extraction.

A language is slender when the number of words per length is bounded.
Non-slenderness is certified by a replayable witness: a reachable loop
state q, two continuations from q that disagree at a synchronized index,
and two pump states that loop and reach acceptance.  Distributing loop
repetitions between q's loop and a pump loop then yields arbitrarily many
distinct words of a common length.
"""

import math
from collections import deque
from dataclasses import dataclass

from .fa import Nfa, Verdict, accepts
from .graphs import reachable, cycle_states


@dataclass
class SlenderWitness:
    loop_state: object
    access: tuple  # initial -> loop_state
    loop: tuple  # nonempty cycle at loop_state
    u1: tuple  # loop_state -> pump1
    u2: tuple  # loop_state -> pump2
    differ_at: int  # index with u1[i] != u2[i], within both
    pump1: object
    pump2: object
    w1: tuple  # nonempty cycle at pump1
    w2: tuple  # nonempty cycle at pump2
    v1: tuple  # pump1 -> accepting
    v2: tuple  # pump2 -> accepting


def _word_reaches(table, source, w, target):
    current = {source}
    for x in w:
        step = set()
        for p in current:
            step |= table.get((p, x), set())
        current = step
        if not current:
            return False
    return target in current


def _shortest_word(table, alphabet, sources, targets, nonempty=False):
    """BFS word from some source to some target; None if unreachable."""
    start = [(s, ()) for s in sources]
    if not nonempty:
        for s, w in start:
            if s in targets:
                return s, w, s
    seen = set(sources)
    queue = deque((s, w, s) for s, w in start)
    while queue:
        origin, w, p = queue.popleft()
        for x in alphabet:
            for q in table.get((p, x), ()):
                if q in targets:
                    return origin, w + (x,), q
                if q not in seen:
                    seen.add(q)
                    queue.append((origin, w + (x,), q))
    return None


def _cycle_word(table, alphabet, state):
    """Shortest nonempty word labelling a cycle at ``state``."""
    hit = _shortest_word(table, alphabet, {state}, {state}, nonempty=True)
    return None if hit is None else hit[1]


def is_slender(a: Nfa) -> Verdict:
    """Structural slenderness test.

    Computes the reachable loop states and the pump states (on a cycle,
    with acceptance reachable), then searches the flagged pair graph on
    Q x Q x {0,1} whose flag records a seen disagreement; the language is
    not slender exactly when some flagged pair with pump states reachable
    from both sides is reachable from a diagonal loop seed.
    """
    if not a.is_epsilon_free():
        raise ValueError("is_slender requires an epsilon-free automaton; eliminate first")
    table = a.move_table()
    adj = a.successor_graph()
    reach = reachable(adj, a.initial)
    loops = cycle_states(a.states, adj)
    radj = {}
    for p, _, q in a.transitions:
        radj.setdefault(q, set()).add(p)
    co_accepting = reachable(radj, a.accepting)
    pumps = loops & co_accepting
    pump_reaching = reachable(radj, pumps) | pumps

    seeds = reach & loops
    if not seeds or not pumps:
        return Verdict(True)

    # flagged pair search from all diagonal seeds at once
    start = {(q, q, 0): None for q in seeds}
    parent = dict(start)
    queue = deque(start)
    hit = None
    while queue and hit is None:
        node = queue.popleft()
        x, y, b = node
        for xa in a.alphabet:
            xs = table.get((x, xa), ())
            if not xs:
                continue
            for ya in a.alphabet:
                ys = table.get((y, ya), ())
                if not ys:
                    continue
                b2 = b or (xa != ya)
                for x2 in xs:
                    for y2 in ys:
                        node2 = (x2, y2, b2)
                        if node2 in parent:
                            continue
                        parent[node2] = (node, xa, ya)
                        if b2 and x2 in pump_reaching and y2 in pump_reaching:
                            hit = node2
                            break
                        queue.append(node2)
                    if hit:
                        break
                if hit:
                    break
            if hit:
                break
    if hit is None:
        return Verdict(True)

    # decode the lockstep pair back to the seed
    pair1, pair2 = [], []
    node = hit
    while parent[node] is not None:
        node, xa, ya = parent[node]
        pair1.append(xa)
        pair2.append(ya)
    pair1.reverse()
    pair2.reverse()
    seed = node[0]
    differ_at = next(i for i in range(len(pair1)) if pair1[i] != pair2[i])

    # independent tails into pump states
    t1 = _shortest_word(table, a.alphabet, {hit[0]}, pumps)
    t2 = _shortest_word(table, a.alphabet, {hit[1]}, pumps)
    u1 = tuple(pair1) + t1[1]
    u2 = tuple(pair2) + t2[1]
    p1, p2 = t1[2], t2[2]

    access = _shortest_word(table, a.alphabet, a.initial, {seed})[1]
    loop = _cycle_word(table, a.alphabet, seed)
    w1 = _cycle_word(table, a.alphabet, p1)
    w2 = _cycle_word(table, a.alphabet, p2)
    v1 = _shortest_word(table, a.alphabet, {p1}, a.accepting)[1]
    v2 = _shortest_word(table, a.alphabet, {p2}, a.accepting)[1]
    witness = SlenderWitness(seed, access, loop, u1, u2, differ_at, p1, p2, w1, w2, v1, v2)
    return Verdict(False, witness=witness)


def replay_witness(a: Nfa, w: SlenderWitness) -> bool:
    """Validate every run condition of a witness by direct simulation."""
    table = a.move_table()
    checks = [
        any(_word_reaches(table, s, w.access, w.loop_state) for s in a.initial),
        len(w.loop) > 0 and _word_reaches(table, w.loop_state, w.loop, w.loop_state),
        _word_reaches(table, w.loop_state, w.u1, w.pump1),
        _word_reaches(table, w.loop_state, w.u2, w.pump2),
        w.differ_at < min(len(w.u1), len(w.u2)) and w.u1[w.differ_at] != w.u2[w.differ_at],
        len(w.w1) > 0 and _word_reaches(table, w.pump1, w.w1, w.pump1),
        len(w.w2) > 0 and _word_reaches(table, w.pump2, w.w2, w.pump2),
        any(_word_reaches(table, w.pump1, w.v1, f) for f in a.accepting),
        any(_word_reaches(table, w.pump2, w.v2, f) for f in a.accepting),
    ]
    return all(checks)


def pump_witness(a: Nfa, w: SlenderWitness, n: int):
    """The n+1 accepted words obtained by distributing n loop repetitions
    between the seed loop and a pump loop, loops first raised to a common
    length.  They are pairwise distinct and of equal length."""
    # pick the continuation that is not a prefix of loop^omega; at least one
    # of u1/u2 is not, since they disagree at a shared index
    def is_prefix_of_power(u, loop):
        return all(u[i] == loop[i % len(loop)] for i in range(len(u)))

    if not is_prefix_of_power(w.u1, w.loop):
        u, pump_loop, tail = w.u1, w.w1, w.v1
    else:
        u, pump_loop, tail = w.u2, w.w2, w.v2
    lcm = len(w.loop) * len(pump_loop) // math.gcd(len(w.loop), len(pump_loop))
    big_loop = w.loop * (lcm // len(w.loop))
    big_pump = pump_loop * (lcm // len(pump_loop))
    words = []
    for i in range(n + 1):
        words.append(w.access + big_loop * i + u + big_pump * (n - i) + tail)
    return words
