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
# # A web application's adaptation space
#
# The bundled `webapp` model describes a small self-adaptive web
# application.  Data logging is mandatory and runs at one of three levels.
# Content discovery is optional and offers search, recommendations or both.
# A cross-tree constraint says recommendations need Max or Medium logging.
#
# Each valid configuration is one way the running system can be adapted.

# %%
from fmlearn import bundled_model, configuration, conf_deg, validate

webapp = bundled_model("webapp")
print(webapp.size, "configurations")
for c in webapp.configurations():
    print("  ", ", ".join(c.sorted()))

# %% [markdown]
# The constraint rules out low-level logging next to recommendations:

# %%
print(validate(webapp, configuration("WebApplication", "DataLogging", "Min",
                                     "ContentDiscovery", "Recommendation")))
print(validate(webapp, configuration("WebApplication", "DataLogging", "Max",
                                     "ContentDiscovery", "Recommendation")))

# %% [markdown]
# ## Feature degree
#
# The degree of a feature counts the configurations that activate it.
# Search appears in 5 of them; Recommendation in only 4 because of the
# constraint.  The degree strategy uses these counts to decide which part of
# the space to explore first.

# %%
for f in ("Search", "Recommendation", "Max", "Min"):
    print(f"{f:>15}: {conf_deg(webapp, f)}")

# %% [markdown]
# ## Exploring until something works
#
# Suppose every configuration with recommendations is too slow.  We start
# from one of them and let each strategy propose configurations until one
# meets the requirement.  `run_episode` drives the loop and keeps the trace.

# %%
from fmlearn import run_episode

start = configuration("WebApplication", "DataLogging", "Max", "ContentDiscovery", "Recommendation")
fast = lambda c: "Recommendation" not in c

for kind in ("Rand", "Inc", "Deg"):
    ep = run_episode(kind, webapp, start, seed=3, oracle=fast)
    print(f"{kind:>4}: {ep.iterations} iterations, found {ep.found.sorted()}")

# %% [markdown]
# The incremental strategy stays close to the start: it drains the block
# of configurations around its anchor leaf before climbing to the parent.
# Starting from Recommendation, that means four slow configurations first.

# %%
from fmlearn import start_episode

for seed in range(20):
    state = start_episode("Inc", webapp, start, seed)
    if webapp.order[state.current_feature] == "Recommendation":
        break
ep = run_episode("Inc", webapp, start, seed, fast)
for c, ok in ep.trace:
    print("ok  " if ok else "    ", ", ".join(c.sorted()))
