"""Independent brute-force oracles the implementation is checked against.

These deliberately reimplement behavior from scratch (own neighbor
arithmetic, plain FIFO queues) so they share no code with the package.
"""

from collections import deque


def grid_neighbors(plane: int, slot: int, planes: int, slots: int):
    return [
        ((plane - 1) % planes, slot),
        ((plane + 1) % planes, slot),
        (plane, (slot + 1) % slots),
        (plane, (slot - 1) % slots),
    ]


def bfs_distances(planes: int, slots: int, start: tuple[int, int]) -> dict:
    """Shortest hop counts from start over the full torus neighbor graph."""
    dist = {start: 0}
    q = deque([start])
    while q:
        node = q.popleft()
        for nbr in grid_neighbors(*node, planes, slots):
            if nbr not in dist:
                dist[nbr] = dist[node] + 1
                q.append(nbr)
    return dist


def flood_oracle(
    members: set[tuple[int, int]],
    planes: int,
    slots: int,
    origin: tuple[int, int],
) -> tuple[int, set[tuple[int, int]]]:
    """Simulate the forwarding rule with a FIFO queue; count edge traversals.

    The origin sends to every member neighbor; a member forwards on first
    sight to member neighbors other than its sender, and drops repeats.
    Returns (messages sent, members that processed the payload).
    """
    assert origin in members
    processed = {origin}
    messages = 0
    q: deque = deque()
    for nbr in grid_neighbors(*origin, planes, slots):
        if nbr in members:
            messages += 1
            q.append((nbr, origin))
    while q:
        node, sender = q.popleft()
        if node in processed:
            continue
        processed.add(node)
        for nbr in grid_neighbors(*node, planes, slots):
            if nbr in members and nbr != sender:
                messages += 1
                q.append((nbr, node))
    return messages, processed


def serial_replay(tx_dicts: list[dict]) -> dict:
    """Re-execute committed transactions serially: key -> (value, version)."""
    state: dict = {}
    for tx in tx_dicts:
        for op in tx["ops"]:
            if op["op"] == "write":
                value, version = op["value"], state.get(op["key"], (None, 0))[1] + 1
                state[op["key"]] = (value, version)
    return state
