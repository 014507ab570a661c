"""Canonical labeling of small colored multigraphs.

Structures are given as node colors plus a multiset of labeled directed
arcs; colors and labels must already be strings.  The canonical form is
the lexicographically least encoding over every node ordering reachable
by individualization/refinement, so two structures get the same bytes
exactly when they are isomorphic.  Branching on interchangeable nodes
(those whose transposition is an automorphism) is skipped, which keeps
stars and parallel-edge bundles cheap.
"""
from __future__ import annotations

import json
from collections import Counter
from typing import Hashable, Iterable


def canonical_form(
    colors: dict[Hashable, str],
    arcs: Iterable[tuple[Hashable, Hashable, str]],
) -> bytes:
    nodes = list(colors)
    index = {node: i for i, node in enumerate(nodes)}
    n = len(nodes)
    color = [colors[node] for node in nodes]
    arc_list = [(index[u], index[v], label) for u, v, label in arcs]
    arc_count = Counter(arc_list)

    adj: list[list[tuple[str, str, int]]] = [[] for _ in range(n)]
    for u, v, label in arc_list:
        adj[u].append((">", label, v))
        adj[v].append(("<", label, u))

    def refine(cells: list[int]) -> list[int]:
        while True:
            sigs = [
                (cells[i], tuple(sorted((d, lab, cells[o]) for d, lab, o in adj[i])))
                for i in range(n)
            ]
            ranks = {s: r for r, s in enumerate(sorted(set(sigs)))}
            new = [ranks[s] for s in sigs]
            if len(ranks) == len(set(cells)):
                return new
            cells = new

    def interchangeable(i: int, j: int) -> bool:
        def swap(x: int) -> int:
            return j if x == i else i if x == j else x

        swapped = Counter((swap(u), swap(v), lab) for u, v, lab in arc_list)
        return swapped == arc_count

    def encode(cells: list[int]):
        order = sorted(range(n), key=lambda i: cells[i])
        return (
            tuple(color[i] for i in order),
            tuple(sorted((cells[u], cells[v], lab) for u, v, lab in arc_list)),
        )

    best = None

    def search(cells: list[int]) -> None:
        nonlocal best
        cells = refine(cells)
        if len(set(cells)) == n:
            enc = encode(cells)
            if best is None or enc < best:
                best = enc
            return
        sizes = Counter(cells)
        target = min(c for c, k in sizes.items() if k > 1)
        reps: list[int] = []
        for i in range(n):
            if cells[i] != target:
                continue
            if any(interchangeable(i, r) for r in reps):
                continue
            reps.append(i)
        for i in reps:
            keyed = [(c, 0 if j == i else 1) for j, c in enumerate(cells)]
            ranks = {k: r for r, k in enumerate(sorted(set(keyed)))}
            search([ranks[k] for k in keyed])

    initial = {c: r for r, c in enumerate(sorted(set(color)))}
    search([initial[c] for c in color])
    if best is None:
        best = ((), ())
    return json.dumps([list(best[0]), [list(a) for a in best[1]]], separators=(",", ":")).encode()
