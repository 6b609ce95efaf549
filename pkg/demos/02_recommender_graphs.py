"""The three recommender graphs built from one link stream.

BIP forgets time entirely, STG snapshots it into session slices, LSG
keeps every timestamped occurrence as its own node.

Run from the repository root:  python demos/02_recommender_graphs.py
"""

from linkrec import Event, LinkStream, build_bip, build_lsg, build_stg, edge_list_lines

# Two users, four items, six timestamps.
events = [
    Event(1, "u1", "i1"), Event(1, "u2", "i3"),
    Event(2, "u1", "i2"), Event(2, "u2", "i3"),
    Event(3, "u2", "i4"), Event(4, "u1", "i3"),
    Event(5, "u2", "i4"), Event(6, "u1", "i2"),
]
stream = LinkStream.from_events(events)

# --- BIP: one node per user/item, weight-1 edges both ways ------------------
bip = build_bip(stream)
print(f"BIP: {bip.n_nodes} nodes, {bip.n_edges} directed edges")
assert bip.n_nodes == 6 and bip.n_edges == 10  # 5 distinct pairs, both ways

# --- STG: BIP plus session nodes (user, slice) ------------------------------
# With slices of 3 time units both users are active in both slices, so four
# session nodes appear. Sessions point at the items picked in the slice
# (weight 1); items point back with the eta_s weight.
stg = build_stg(stream, delta=3, eta_s=0.5)
sessions = sorted(n for n in stg.nodes if n[0] == "S")
print(f"STG(delta=3): {stg.n_nodes} nodes, sessions={sessions}")

back_weights = {w for (src, dst), w in stg.edges.items() if dst[0] == "S"}
assert back_weights == {0.5}

# eta_s = 0 drops item->session edges entirely (no zero-weight edges are
# ever stored, so out-degrees stay meaningful).
stg0 = build_stg(stream, delta=3, eta_s=0.0)
assert all(dst[0] != "S" for _, dst in stg0.edges)

# --- LSG: temporal nodes, event edges, chain edges ---------------------------
# Each (t, user) and (t, item) occurrence is a node. Event edges connect
# the two sides at a shared timestamp; chain edges connect consecutive
# occurrences of the same user or item (forward weight 1, backward eta_s).
lsg = build_lsg(stream, eta_s=0.5)
print(f"LSG: {lsg.n_nodes} nodes, {lsg.n_edges} directed edges")
assert lsg.n_nodes == 16

forward = [(a, b) for (a, b) in lsg.edges if a[0] == b[0] and a[1] < b[1]]
backward = [(a, b) for (a, b) in lsg.edges if a[0] == b[0] and a[1] > b[1]]
print(f"chain edges: {len(forward)} forward, {len(backward)} backward")

# Any graph can be dumped as a deterministic edge list for inspection.
print("\nfirst LSG edge-list lines:")
for line in edge_list_lines(lsg)[:6]:
    print(" ", line)
