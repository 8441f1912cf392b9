"""Small graph helpers shared by the decision procedures.

Graphs are adjacency dicts node -> iterable of successors.  Nodes are
arbitrary hashables.
"""

from collections import deque


def reachable(adj, sources):
    """Forward closure of ``sources`` under ``adj``."""
    seen = set(sources)
    todo = deque(seen)
    while todo:
        u = todo.popleft()
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return seen


def reverse_graph(adj):
    rev = {}
    for u, vs in adj.items():
        for v in vs:
            rev.setdefault(v, set()).add(u)
    return rev


def strongly_connected_components(nodes, adj):
    """Tarjan's algorithm, iterative.  Returns a list of node sets."""
    index = {}
    lowlink = {}
    on_stack = set()
    stack = []
    sccs = []
    counter = [0]

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(adj.get(root, ())))]
        index[root] = lowlink[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = lowlink[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(adj.get(succ, ()))))
                    advanced = True
                    break
                if succ in on_stack:
                    lowlink[node] = min(lowlink[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == node:
                        break
                sccs.append(comp)
    return sccs


def cycle_states(nodes, adj):
    """States lying on some nonempty cycle: nontrivial SCCs plus self-loops."""
    on_cycle = set()
    for comp in strongly_connected_components(nodes, adj):
        if len(comp) > 1:
            on_cycle |= comp
        else:
            (u,) = comp
            if u in adj and u in adj[u]:
                on_cycle.add(u)
    return on_cycle
