# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # When structure helps
#
# On a flat model every strategy needs about half the space on average to
# hit one uniformly chosen target.  Structure only pays off once the good
# configurations cluster in a part of the tree.
#
# First the flat case, a 1024-configuration LLVM replica with distinct
# synthesized values.

# %%
from fmlearn import ExperimentConfig, run_rq1

flat = run_rq1(ExperimentConfig.from_dict({
    "model": "bundled:llvm-replica", "runs": 256,
    "synthesize": {"name": "time", "unit": "s", "base": 0},
}))
print(flat.to_table())

# %% [markdown]
# ## A deeper robot controller
#
# `robot-deep` nests a planner five levels down.  Its only solitary optional
# feature, `Pruning`, sits under the search component; every other choice is
# a three-way alternative.  Pruning cuts the synthesized latency in half,
# at least unless the extra-large power supply meets a radar sensor.

# %%
from fmlearn import Requirement, bundled_model, synthesize

robot = bundled_model("robot-deep")
print(robot.size, "configurations, depth", robot.depth)
spec = {"name": "latency", "unit": "ms", "base": 100, "default_weight": 0,
        "weights": {"Pruning": -50, "XL": 15, "Radar": 15}}
good = synthesize(robot, spec).effective_set(Requirement("latency", "atMost", 70))
print(len(good), "fast configurations, all with Pruning:", all("Pruning" in c for c in good))
print("degree of Pruning:", robot.degree("Pruning"))

# %% [markdown]
# Pruning has the largest degree among the leaves, which is where the degree
# strategy starts whenever the start configuration has it.  Run both
# strategies on the same targets and starts:

# %%
deep = run_rq1(ExperimentConfig.from_dict({
    "model": "bundled:robot-deep", "strategies": ["Rand", "Deg"], "runs": 486,
    "synthesize": spec, "requirement": {"mode": "atMost", "target": 70},
}))
print(deep.to_table())

rand = deep.result("Rand").iterations
deg = deep.result("Deg").iterations
wins = sum(d < r for r, d in zip(rand, deg))
losses = sum(d > r for r, d in zip(rand, deg))
print(f"Deg faster in {wins} runs, slower in {losses}")
