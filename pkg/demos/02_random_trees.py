# %% [markdown]
# # Hierarchies on structureless data
#
# Uniform random values have no planted structure, yet the procedure
# still splits every cluster in two until only single objects remain.
# Different seeds give different trees. Each parameter is compared with
# the exponential ratio (XR) metric.

# %%
import argparse
import pathlib
import time

from etsm import build_hierarchy, export_tree, gen_random, render_svg

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--out", default="demo_output")
parser.add_argument("--objects", type=int, default=60)
parser.add_argument("--params", type=int, default=60)
parser.add_argument("--threads", type=int, default=2)
args = parser.parse_args()
out = pathlib.Path(args.out)
out.mkdir(parents=True, exist_ok=True)

# %%
trees = {}
for seed in (1, 2, 3):
    ds = gen_random(args.objects, args.params, 1, 500, seed=seed)
    start = time.perf_counter()
    tree = build_hierarchy(ds, threads=args.threads)
    trees[seed] = tree
    print(f"seed {seed}: {len(tree.leaves())} leaves, {len(tree.internal_nodes())} internal "
          f"nodes, depth {tree.depth()}, {time.perf_counter() - start:.2f}s")

# %% [markdown]
# A binary tree with every object in its own leaf has one fewer internal
# node than leaves. Comparing the sets of clades tells the trees apart.

# %%
seeds = sorted(trees)
for i, a in enumerate(seeds):
    for b in seeds[i + 1:]:
        shared = len(trees[a].clades() & trees[b].clades())
        print(f"seeds {a} and {b} share {shared} clades out of {len(trees[a].clades())}")

# %%
for seed, tree in trees.items():
    (out / f"random_{seed}.nwk").write_text(export_tree(tree, "NEWICK") + "\n")
(out / "random_1_radial.svg").write_text(render_svg(trees[1], mode="RADIAL"))
print("NEWICK for seed 1 starts with", export_tree(trees[1], "NEWICK")[:70], "...")
