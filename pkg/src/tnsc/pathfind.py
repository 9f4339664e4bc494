"""Disjoint-path computation between slice endpoints.

Link- and node-disjoint sets are found with successive shortest augmenting
paths over a unit-capacity residual network (negative-cost reverse arcs),
which is optimal and immune to the trap topologies that defeat greedy
removal. Risk-group disjointness is NP-hard in general, so that mode runs a
budget-bounded backtracking search and reports budget exhaustion explicitly.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Sequence

from .errors import InsufficientDiversity, Unreachable
from .model import NetworkTopology, Path

DEFAULT_SRLG_BUDGET = 1000

# Flow-graph node keys: plain node ids in link mode, (id, side) pairs after
# node splitting, where side 0 is the ingress half and 1 the egress half.
_IN = 0
_OUT = 1


class DisjointnessMode(str, Enum):
    LINK_DISJOINT = "link_disjoint"
    NODE_DISJOINT = "node_disjoint"
    SRLG_DISJOINT = "srlg_disjoint"


@dataclass
class _Arc:
    u: object
    v: object
    cost: float
    link: str | None
    flow: int = 0


@dataclass
class _FlowNet:
    node_count: int
    arcs: list[_Arc]
    source: object
    sink: object
    by_link: dict[str, list[_Arc]] = field(default_factory=dict)


def _check_endpoints(topology: NetworkTopology, src: str, dst: str) -> None:
    for node in (src, dst):
        if node not in topology.nodes:
            raise ValueError(f"unknown node {node!r}")
    if src == dst:
        raise ValueError("src and dst must differ")


def _resolve_costs(topology: NetworkTopology,
                   link_costs: Mapping[str, float] | None) -> dict[str, float]:
    costs = {link.id: 1.0 for link in topology.links}
    if link_costs:
        for link_id, cost in link_costs.items():
            if link_id not in costs:
                raise ValueError(f"cost override for unknown link {link_id!r}")
            if cost < 0:
                raise ValueError(f"negative cost for link {link_id!r}")
            costs[link_id] = float(cost)
    return costs


def _resolve_usable(topology: NetworkTopology,
                    usable_links: frozenset[str] | set[str] | None) -> set[str]:
    if usable_links is None:
        return {link.id for link in topology.links}
    unknown = set(usable_links) - set(topology.link_by_id)
    if unknown:
        raise ValueError(f"usable_links references unknown links {sorted(unknown)}")
    return set(usable_links)


def _build_flow_net(topology: NetworkTopology, src: str, dst: str,
                    split_nodes: bool, costs: Mapping[str, float],
                    usable: set[str]) -> _FlowNet:
    arcs: list[_Arc] = []
    by_link: dict[str, list[_Arc]] = {}
    ordered_links = [link for link in sorted(topology.links, key=lambda l: l.id)
                     if link.id in usable]
    if not split_nodes:
        for link in ordered_links:
            pair = [_Arc(link.a, link.b, costs[link.id], link.id),
                    _Arc(link.b, link.a, costs[link.id], link.id)]
            arcs.extend(pair)
            by_link[link.id] = pair
        return _FlowNet(node_count=len(topology.nodes), arcs=arcs,
                        source=src, sink=dst, by_link=by_link)

    # Node splitting: a unit-capacity internal arc per intermediate node makes
    # arc-disjointness in the split graph equal node-disjointness in the
    # original. Endpoints get no internal arc; they are shared by definition.
    for node in sorted(topology.nodes):
        if node not in (src, dst):
            arcs.append(_Arc((node, _IN), (node, _OUT), 0.0, None))
    for link in ordered_links:
        pair = [_Arc((link.a, _OUT), (link.b, _IN), costs[link.id], link.id),
                _Arc((link.b, _OUT), (link.a, _IN), costs[link.id], link.id)]
        arcs.extend(pair)
        by_link[link.id] = pair
    return _FlowNet(node_count=2 * len(topology.nodes), arcs=arcs,
                    source=(src, _OUT), sink=(dst, _IN), by_link=by_link)


def _residual_shortest(net: _FlowNet) -> list[tuple[_Arc, bool]] | None:
    """Bellman-Ford over the residual graph (reverse arcs carry negated
    cost). Returns the augmenting steps from source to sink, or None."""
    dist: dict = {net.source: 0.0}
    pred: dict = {}
    for _ in range(net.node_count + 1):
        changed = False
        for arc in net.arcs:
            if arc.flow == 0 and arc.u in dist:
                candidate = dist[arc.u] + arc.cost
                if candidate < dist.get(arc.v, float("inf")):
                    dist[arc.v] = candidate
                    pred[arc.v] = (arc.u, arc, True)
                    changed = True
            if arc.flow == 1 and arc.v in dist:
                candidate = dist[arc.v] - arc.cost
                if candidate < dist.get(arc.u, float("inf")):
                    dist[arc.u] = candidate
                    pred[arc.u] = (arc.v, arc, False)
                    changed = True
        if not changed:
            break
    else:
        raise RuntimeError("negative cycle in residual graph")
    if net.sink not in dist:
        return None
    steps: list[tuple[_Arc, bool]] = []
    node = net.sink
    while node != net.source:
        prev, arc, forward = pred[node]
        steps.append((arc, forward))
        node = prev
    steps.reverse()
    return steps


def _augment(steps: list[tuple[_Arc, bool]]) -> None:
    for arc, forward in steps:
        arc.flow = 1 if forward else 0


def _cancel_antiparallel(net: _FlowNet) -> None:
    # Flow in both directions over one undirected link cancels out; dropping
    # the pair preserves conservation and the flow value.
    for pair in net.by_link.values():
        if len(pair) == 2 and pair[0].flow == 1 and pair[1].flow == 1:
            pair[0].flow = 0
            pair[1].flow = 0


def _original_name(key) -> str:
    return key if isinstance(key, str) else key[0]


def _decompose(net: _FlowNet, k: int) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Split the unit flow into k walks, loop-erased to simple paths."""
    outgoing: dict = {}
    for arc in net.arcs:
        if arc.flow == 1:
            outgoing.setdefault(arc.u, []).append(arc)
    for bucket in outgoing.values():
        bucket.sort(key=lambda a: (a.v, a.link or ""))

    paths = []
    for _ in range(k):
        nodes = [_original_name(net.source)]
        links: list[str] = []
        key = net.source
        while key != net.sink:
            arc = outgoing[key].pop(0)
            key = arc.v
            if arc.link is not None:
                name = _original_name(key)
                if name in nodes:
                    cut = nodes.index(name)
                    nodes = nodes[: cut + 1]
                    links = links[:cut]
                else:
                    nodes.append(name)
                    links.append(arc.link)
        paths.append((tuple(nodes), tuple(links)))
    return paths


def shortest_path(topology: NetworkTopology, src: str, dst: str,
                  link_costs: Mapping[str, float] | None = None,
                  usable_links: frozenset[str] | set[str] | None = None) -> Path:
    """Minimum-cost simple path; ties resolve to the lexicographically
    smallest node sequence. Raises Unreachable when no path exists."""
    _check_endpoints(topology, src, dst)
    costs = _resolve_costs(topology, link_costs)
    usable = _resolve_usable(topology, usable_links)
    heap: list[tuple[float, tuple[str, ...]]] = [(0.0, (src,))]
    settled: set[str] = set()
    while heap:
        cost, nodes = heapq.heappop(heap)
        last = nodes[-1]
        if last in settled:
            continue
        settled.add(last)
        if last == dst:
            return Path.through(topology, nodes)
        for neighbor, link_id in topology.adjacency[last]:
            if link_id in usable and neighbor not in settled:
                heapq.heappush(heap, (cost + costs[link_id], nodes + (neighbor,)))
    raise Unreachable(src, dst)


def k_disjoint_paths(topology: NetworkTopology, src: str, dst: str, k: int,
                     mode: DisjointnessMode = DisjointnessMode.LINK_DISJOINT,
                     *,
                     link_costs: Mapping[str, float] | None = None,
                     usable_links: frozenset[str] | set[str] | None = None,
                     srlg_budget: int = DEFAULT_SRLG_BUDGET) -> list[Path]:
    """Compute k pairwise-disjoint simple paths between src and dst.

    Link and node modes minimize the summed path cost over all valid sets
    and report the true maximum diversity on failure. SRLG mode is a bounded
    search: InsufficientDiversity with ``budget_exhausted`` set means the
    search gave up, not that no set exists. The returned list is sorted by
    (cost, node sequence) and is deterministic for identical inputs.
    """
    _check_endpoints(topology, src, dst)
    if k < 1:
        raise ValueError("k must be at least 1")
    costs = _resolve_costs(topology, link_costs)
    usable = _resolve_usable(topology, usable_links)

    if mode is DisjointnessMode.SRLG_DISJOINT:
        paths = _srlg_disjoint(topology, src, dst, k, costs, usable, srlg_budget)
    else:
        net = _build_flow_net(topology, src, dst,
                              mode is DisjointnessMode.NODE_DISJOINT, costs, usable)
        for found in range(k):
            steps = _residual_shortest(net)
            if steps is None:
                raise InsufficientDiversity(requested=k, found=found)
            _augment(steps)
        _cancel_antiparallel(net)
        paths = [Path(nodes=nodes, links=links)
                 for nodes, links in _decompose(net, k)]

    paths.sort(key=lambda p: (p.cost(costs), p.nodes))
    if not verify_disjoint(topology, paths, mode):
        raise RuntimeError("internal error: computed paths fail disjointness check")
    return paths


def max_disjoint_count(topology: NetworkTopology, src: str, dst: str,
                       mode: DisjointnessMode = DisjointnessMode.LINK_DISJOINT,
                       *,
                       link_costs: Mapping[str, float] | None = None,
                       usable_links: frozenset[str] | set[str] | None = None,
                       srlg_budget: int = DEFAULT_SRLG_BUDGET) -> int:
    """Largest k for which k disjoint paths exist (0 when unreachable).

    Link and node modes are exact via max flow with unit capacities; SRLG
    mode probes increasing k with the bounded search and is conservative
    when the budget runs out.
    """
    _check_endpoints(topology, src, dst)
    costs = _resolve_costs(topology, link_costs)
    usable = _resolve_usable(topology, usable_links)

    if mode is DisjointnessMode.SRLG_DISJOINT:
        ceiling = max_disjoint_count(topology, src, dst,
                                     DisjointnessMode.LINK_DISJOINT,
                                     link_costs=link_costs,
                                     usable_links=usable_links)
        best = 0
        for k in range(1, ceiling + 1):
            try:
                _srlg_disjoint(topology, src, dst, k, costs, usable, srlg_budget)
            except InsufficientDiversity:
                break
            best = k
        return best

    net = _build_flow_net(topology, src, dst,
                          mode is DisjointnessMode.NODE_DISJOINT, costs, usable)
    count = 0
    while True:
        steps = _residual_shortest(net)
        if steps is None:
            return count
        _augment(steps)
        count += 1


def verify_disjoint(topology: NetworkTopology, paths: Sequence[Path],
                    mode: DisjointnessMode) -> bool:
    """Independent set-intersection check of a candidate path set.

    Validates every path against the topology and tests pairwise
    disjointness for the given mode. Deliberately shares nothing with the
    search routines above so it can vouch for their output.
    """
    if not paths:
        return False
    for path in paths:
        if len(set(path.nodes)) != len(path.nodes):
            return False
        for i, (a, b) in enumerate(zip(path.nodes, path.nodes[1:])):
            link = topology.link_between(a, b)
            if link is None or link.id != path.links[i]:
                return False
    first = paths[0]
    for path in paths[1:]:
        if path.nodes[0] != first.nodes[0] or path.nodes[-1] != first.nodes[-1]:
            return False
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            if set(paths[i].links) & set(paths[j].links):
                return False
            if mode is DisjointnessMode.NODE_DISJOINT:
                if set(paths[i].nodes[1:-1]) & set(paths[j].nodes[1:-1]):
                    return False
            if mode is DisjointnessMode.SRLG_DISJOINT:
                tags_i = _srlg_tags(topology, paths[i])
                tags_j = _srlg_tags(topology, paths[j])
                if tags_i & tags_j:
                    return False
    return True


def _srlg_tags(topology: NetworkTopology, path: Path) -> frozenset[int]:
    return frozenset().union(*(topology.link_by_id[link].srlgs
                               for link in path.links))


# ---------------------------------------------------------------------------
# SRLG-constrained search
# ---------------------------------------------------------------------------


class _BudgetExhausted(Exception):
    pass


class _Budget:
    def __init__(self, limit: int):
        self.remaining = limit

    def spend(self) -> None:
        if self.remaining <= 0:
            raise _BudgetExhausted()
        self.remaining -= 1


def _ordered_simple_paths(topology: NetworkTopology, src: str, dst: str,
                          allowed: set[str], costs: Mapping[str, float],
                          budget: _Budget) -> Iterator[Path]:
    """Yield simple paths in (cost, node sequence) order. Every heap
    expansion spends one unit of the shared search budget."""
    heap: list[tuple[float, tuple[str, ...]]] = [(0.0, (src,))]
    while heap:
        budget.spend()
        cost, nodes = heapq.heappop(heap)
        last = nodes[-1]
        if last == dst:
            yield Path.through(topology, nodes)
            continue
        for neighbor, link_id in topology.adjacency[last]:
            if link_id in allowed and neighbor not in nodes:
                heapq.heappush(heap, (cost + costs[link_id], nodes + (neighbor,)))


def _srlg_disjoint(topology: NetworkTopology, src: str, dst: str, k: int,
                   costs: Mapping[str, float], usable: set[str],
                   budget_limit: int) -> list[Path]:
    """Backtracking over path choices: each level excludes the links and
    risk groups claimed so far. First full set found wins, so the result is
    deterministic but not necessarily cost-minimal."""
    budget = _Budget(budget_limit)
    deepest = 0

    def search(chosen: list[Path], used_links: frozenset[str],
               used_srlgs: frozenset[int]) -> list[Path] | None:
        nonlocal deepest
        deepest = max(deepest, len(chosen))
        if len(chosen) == k:
            return chosen
        allowed = {
            link_id for link_id in usable
            if link_id not in used_links
            and not (topology.link_by_id[link_id].srlgs & used_srlgs)
        }
        for path in _ordered_simple_paths(topology, src, dst, allowed, costs, budget):
            result = search(
                chosen + [path],
                used_links | set(path.links),
                used_srlgs | _srlg_tags(topology, path),
            )
            if result is not None:
                return result
        return None

    try:
        result = search([], frozenset(), frozenset())
    except _BudgetExhausted:
        raise InsufficientDiversity(requested=k, found=deepest,
                                    budget_exhausted=True) from None
    if result is None:
        raise InsufficientDiversity(requested=k, found=deepest)
    return list(result)
