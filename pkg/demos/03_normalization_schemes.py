"""The four edge-reweighting schemes and their degenerate cases.

none keeps raw counts (degree information survives, magnitudes can
blow up); row divides by the aggregating node's own mass (mean
aggregation, degree information destroyed); sym splits the correction
between both endpoints; dir uses in-degree on the target side and
out-degree on the source side of each edge.
"""

import numpy as np

import hopscope as hs

nice = dict(precision=3, suppress=True)

g = hs.from_edge_list([(0, 1), (0, 2), (1, 2), (2, 0), (3, 0)], 5)  # node 4 isolated
print("adjacency:\n", g.to_dense())
for scheme in ("none", "row", "sym", "dir"):
    w = hs.normalize(g, scheme)
    print(f"\nscheme={scheme} (zero rows: {w.zero_row_count})")
    with np.printoptions(**nice):
        print(w.to_dense())

print()
print("=" * 64)
print("row scheme rows sum to one wherever a node has anything to average")
w = hs.normalize(g, "row")
print("row sums:", np.round(w.to_dense().sum(axis=1), 12))

print()
print("=" * 64)
print("the canonical aggregation: self-loops plus symmetric reweighting")
p3 = hs.symmetrize(hs.from_edge_list([(0, 1), (1, 2)], 3))
canon = hs.gcn_canonical(p3)
with np.printoptions(**nice):
    print(canon.to_dense())
print("middle node self-weight = 1/3 (its looped degree is 3)")

print()
print("=" * 64)
print("a powered matrix is normalized by its own row/column sums")
p2 = hs.mat_power_count(hs.symmetrize(p3), 2)
w2 = hs.normalize(p2, "row")
print("support of A^2 kept, rows renormalized:")
with np.printoptions(**nice):
    print(w2.to_dense())
