from __future__ import annotations

import pytest

from tnsc import (
    AllocationState,
    Bound,
    BoundsMode,
    Controller,
    PortSpec,
    SliceRequest,
    TraitBounds,
    validate_topology,
)


def make_topology(nodes, links, devices=()):
    """Compact builder: links as (id, a, b) or (id, a, b, extras dict),
    devices as (node, count) with 24x10GE defaulting, or full dicts."""
    link_entries = []
    for link in links:
        entry = {"id": link[0], "a": link[1], "b": link[2]}
        if len(link) > 3:
            entry.update(link[3])
        link_entries.append(entry)
    device_entries = []
    for device in devices:
        if isinstance(device, dict):
            device_entries.append(device)
        else:
            node, count = device
            device_entries.append(
                {"node": node, "ports": [{"type": "10GE", "gbps": 10, "count": count}]}
            )
    return validate_topology(
        {"nodes": list(nodes), "links": link_entries, "devices": device_entries}
    )


def make_request(rid="TS_1", src="A", dst="C", control=True, p=2, d=15, s=2,
                 weights=None):
    return SliceRequest(
        id=rid, src=src, dst=dst, control=control, disjoint_paths=p,
        client_ports=PortSpec("10GE", 10.0, d), calendar_slots=s, weights=weights,
    )


@pytest.fixture
def four_cycle():
    return make_topology(
        "ABCD",
        [("L_AB", "A", "B"), ("L_BC", "B", "C"), ("L_CD", "C", "D"),
         ("L_DA", "D", "A")],
        [("A", 24), ("C", 24)],
    )


@pytest.fixture
def theta():
    """Three internally disjoint 2-hop routes between A and C."""
    return make_topology(
        "ABCDE",
        [("L_AB", "A", "B"), ("L_AD", "A", "D"), ("L_AE", "A", "E"),
         ("L_BC", "B", "C"), ("L_DC", "D", "C"), ("L_EC", "E", "C")],
        [("A", 30), ("C", 30)],
    )


@pytest.fixture
def table2_bounds():
    return TraitBounds(
        mode=BoundsMode.STATIC,
        topology=Bound(2, 4),
        device=Bound(1, 24),
        data_plane=Bound(1, 20),
    )


@pytest.fixture
def ts1():
    return make_request("TS_1", p=2, d=15, s=2)


@pytest.fixture
def ts2():
    return make_request("TS_2", p=3, d=12, s=3)


def assert_conserved(controller: Controller) -> None:
    """Ledger conservation plus the allocation invariants of active slices."""
    from tnsc import verify_disjoint

    active = [record for record in controller.records.values()
              if record.state is AllocationState.ACTIVE]
    for record in active:
        request = controller.requests[record.slice_id]
        assert len(record.paths) == request.disjoint_paths, record.slice_id
        assert verify_disjoint(controller.topology, record.paths,
                               controller.mode), record.slice_id
        covered = {link for path in record.paths for link in path.links}
        assert set(record.slots_per_link) == covered, record.slice_id
        assert all(slots == request.calendar_slots
                   for slots in record.slots_per_link.values()), record.slice_id
    for link in controller.topology.links:
        held = sum(record.slots_per_link.get(link.id, 0) for record in active)
        residual = controller.ledger.residual_slots[link.id]
        assert held + residual == link.slot_capacity, link.id
        assert residual >= 0
    for device in controller.topology.devices:
        for group in device.port_groups:
            key = (device.node, group.port_type, group.gbps)
            held = sum(
                spec.count
                for record in active
                for node, spec in record.ports_per_device.items()
                if node == device.node and spec.port_type == group.port_type
                and spec.gbps == group.gbps
            )
            residual = controller.ledger.residual_ports[key]
            assert held + residual == group.count, key
            assert residual >= 0
    holders = {record.slice_id for record in active
               if record.control_context is not None}
    assert set(controller.ledger.control_contexts) == holders
