"""Depth sweeps, gradient traces, and very deep stacks.

Three experiments on synthetic sparse digraphs:

1. a sweep over k for three parameter-matched architectures (deep
   stack, single layer on the k-th power, one aggregation plus linear
   layers), written to CSV exactly as the command line would;
2. per-layer gradient-norm traces for a deep self-looped model, where
   the first-layer/last-layer ratio exposes how much signal survives
   the trip back through the stack;
3. a 50-layer run on a low-density digraph that trains to the same
   accuracy as its 2-layer sibling.
"""

import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

import hopscope as hs

print("=" * 64)
print("1. Accuracy vs depth/power on a sparse hybrid task")
print("=" * 64)
dataset = hs.synthesize_dataset("hybrid", n=400, seed=5, feature_signal=0.6)
cfg = hs.TrainConfig(lr=0.05, max_epochs=300, early_stop_patience=120, lr_sched_patience=60, seed=0)
arches = [
    hs.ModelSpec(arch=a, k=1, hidden_width=8, activation="relu", norm="sym", propagation="forward")
    for a in ("k_layer_gcn", "one_layer_power_k", "hybrid_power_plus_linear")
]
rows = hs.run_sweep(arches, range(1, 9), dataset, cfg, n_splits=3)
out = Path(tempfile.gettempdir()) / "hopscope_sweep_demo.csv"
hs.save_sweep_csv(rows, out)
print(f"wrote {out}")
series = {}
for r in rows:
    series.setdefault(r.arch, []).append(r)
print(f"{'k':>3s}  " + "".join(f"{a:>28s}" for a in series) + "   density")
for i in range(8):
    cells = "".join(f"{series[a][i].acc_mean:>28.3f}" for a in series)
    print(f"{i + 1:3d}  {cells}   {rows[i].density:.4f}")
print("the single layer on the k-th power holds steady while both deep")
print("parameter stacks decay: the depth, not the receptive field, hurts")

print()
print("=" * 64)
print("2. Gradient norms through a deep self-looped stack")
print("=" * 64)
graph, x, labels = dataset
split = hs.make_splits(labels, n_splits=1, seed=0)[0]
deep = hs.ModelSpec(arch="k_layer_gcn_selfloop", k=20, hidden_width=8, activation="relu",
                    norm="sym", propagation="forward")
metrics = hs.train_model(deep, graph, x, labels, split,
                         replace(cfg, max_epochs=60, early_stop_patience=50, lr_sched_patience=30))
trace = np.array(metrics.grad_norm_traces[0])  # epochs x layers
ratio = trace[:, 0] / np.maximum(trace[:, -1], 1e-30)
print(f"20-layer self-looped model, {trace.shape[0]} epochs")
print("first/last layer gradient-norm ratio over epochs (median {:.2e})".format(np.median(ratio)))
print("epoch  1: ratio {:.2e}".format(ratio[0]))
print("epoch {:2d}: ratio {:.2e}".format(len(ratio), ratio[-1]))
print("ratios far below one = the early layers barely hear the loss")

print()
print("=" * 64)
print("3. Fifty layers on a low-density digraph, next to two layers")
print("=" * 64)
graph, x, labels = hs.synthesize_dataset("sparse_digraph_deep", n=400, seed=3)
splits = hs.make_splits(labels, n_splits=3, seed=0)
spec = hs.ModelSpec(arch="k_layer_gcn", k=50, hidden_width=16, activation="identity",
                    norm="row", propagation="forward")
deep_cfg = hs.TrainConfig(lr=0.005, max_epochs=600, early_stop_patience=250, lr_sched_patience=200, seed=0)
for k in (50, 2):
    accs = []
    for si, split in enumerate(splits):
        seed = int(np.random.SeedSequence(entropy=0, spawn_key=(si, 17)).generate_state(1)[0])
        m = hs.train_model(replace(spec, k=k), graph, x, labels, split, replace(deep_cfg, seed=seed))
        accs.append(m.accuracies[0])
    print(f"  {k:2d}-layer: mean accuracy {np.mean(accs):.3f}")
print("low connection density keeps the reach (and the task) intact at depth")
