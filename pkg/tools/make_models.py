"""Regenerate the bundled feature models under src/fmlearn/data."""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))
from fmlearn.model import FeatureModel

OUT = ROOT / "src" / "fmlearn" / "data"

def n(fid, var=None, children=(), group=None):
    d = {"id": fid}
    if var: d["variability"] = var
    d["group"] = group
    d["children"] = list(children)
    return d

def alt(fid, var, members, kind="alternative"):
    return n(fid, var, [n(m, "optional") for m in members], {"kind": kind, "members": list(members)})

def write(name, root, constraints=(), fname=None):
    doc = {"name": name, "root": root, "constraints": [
        {"kind": k, "lhs": list(l), "rhs": list(r)} for k, l, r in constraints]}
    m = FeatureModel.from_dict(doc)
    path = OUT / (fname or f"{name}.fm.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(m.to_dict(), indent=2) + "\n")
    print(f"{path.name}: size={m.size} features={len(m.features)} depth={m.depth} optional={len(m.optional_features)}")
    return m

# running example
logging = ["Min", "Medium", "Max"]
cd = n("ContentDiscovery", "optional", [n("Search", "optional"), n("Recommendation", "optional")])
write("webapp", n("WebApplication", None, [alt("DataLogging", "mandatory", logging), cd]),
      [("requires", ["Recommendation"], ["Max", "Medium"])])
write("webapp-evolved", n("WebApplication", None, [alt("DataLogging", "mandatory", logging + ["Optimized"]), cd]),
      [("requires", ["Recommendation"], ["Max", "Medium"])])

# LLVM replica: 10 independent optional optimisation passes, depth 1
llvm = ["gvn", "instcombine", "inline", "jump_threading", "licm", "loop_reduce",
        "loop_rotate", "loop_unroll", "loop_unswitch", "simplifycfg"]
write("llvm-replica", n("LLVM", None, [n(f, "optional") for f in llvm]))

# BerkeleyC replica: page size group at the root, cache size group, 7 optional compile flags
bc_opt = ["HAVE_CRYPTO", "HAVE_HASH", "HAVE_REPLICATION", "HAVE_VERIFY",
          "HAVE_SEQUENCE", "HAVE_STATISTICS", "DIAGNOSTIC"]
pages = ["PS1K", "PS4K", "PS8K", "PS16K", "PS32K"]
root = n("BerkeleyDBC", None,
         [n(p, "optional") for p in pages] + [alt("CacheSize", "mandatory", ["CS16MB", "CS32MB", "CS64MB", "CS512MB"])]
         + [n(f, "optional") for f in bc_opt],
         {"kind": "alternative", "members": pages})
write("berkeleyc-replica", root)

# BerkeleyJ replica: depth 5, 26 features, 7 optional features
root = n("BerkeleyDBJ", None, [
    n("Persistence", "mandatory", [
        n("IO", "mandatory", [
            alt("IOMode", "mandatory", ["NIO", "ChunkedNIO"]),
            n("SynchronizedIO", "optional"),
        ]),
        n("Checksum", "optional"),
    ]),
    n("Concurrency", "mandatory", [n("Latches", "mandatory"), n("Locking", "mandatory"), n("Transactions", "mandatory")]),
    n("Memory", "mandatory", [
        n("Caching", "mandatory", [
            n("Eviction", "mandatory", [
                n("Evictor", "optional", [n("CriticalEviction", "optional")]),
            ]),
            n("MemoryBudget", "optional"),
        ]),
    ]),
    n("Logging", "mandatory", [
        alt("LogLevel", "mandatory", ["Severe", "Info", "Fine", "Finest"]),
        n("ConsoleHandler", "optional"),
    ]),
    n("Statistics", "optional"),
])
write("berkeleyj-replica", root,
      [("requires", ["SynchronizedIO"], ["NIO"]), ("requires", ["ConsoleHandler"], ["Severe"])])

# deep model for the structural-guidance check: one solitary optional leaf
# (Pruning) deep in the planner subtree, every other leaf an alternative member
root = n("Robot", None, [
    n("Control", "mandatory", [
        n("Planner", "mandatory", [
            n("Search", "mandatory", [
                alt("Heuristic", "mandatory", ["Manhattan", "Euclid", "Octile"]),
                n("Pruning", "optional"),
            ]),
            alt("Horizon", "mandatory", ["Short", "Medium", "Long"]),
        ]),
    ]),
    n("Sensing", "mandatory", [alt("Lidar", "mandatory", ["L2D", "L3D", "Radar"]),
                               alt("Power", "mandatory", ["Small", "Large", "XL"])]),
    alt("Comms", "mandatory", ["Wifi", "LTE", "Mesh"]),
])
write("robot-deep", root)

# CloudRM evolution: placement algorithms as an alternative group at the root
def tasks(): return alt("TasksPerVM", "mandatory", [f"Tasks{k}" for k in range(2, 12)])
ms_sizes = [f"MS_Size{v:03d}" for v in range(10, 81, 5)]          # 0.10 .. 0.80
cf_sizes = [f"CF_Size{v:03d}" for v in range(10, 86, 5)]          # 0.10 .. 0.85
def maxsize(step):
    sizes = ["MS_Size025"] if step < 3 else ms_sizes
    heur = ["MS_FF"] if step < 3 else ["MS_FF", "MS_BF", "MS_WF"]
    return n("Maxsize", "optional", [alt("MS_MaxVMSize", "mandatory", sizes), alt("MS_VMSelection", "mandatory", heur)])
def cf():
    return n("ConsolidationFriendly", "optional", [
        alt("CF_PMSelection", "mandatory", ["CF_PM_FF", "CF_PM_BF", "CF_PM_WF"]),
        alt("CF_VMSelection", "mandatory", ["CF_VM_FF", "CF_VM_BF", "CF_VM_WF"]),
        alt("CF_MaxVMSize", "mandatory", cf_sizes),
        n("CF_Reoptimization", "optional"),
        n("CF_LiveMigration", "mandatory"),
    ])
def cloud(step):
    placements = [n("Simple", "optional")]
    if step >= 1: placements.append(n("Multiple", "optional", [tasks()]))
    if step >= 2: placements.append(maxsize(step))
    if step >= 4: placements.append(cf())
    ids = [p["id"] for p in placements]
    if step == 0:
        return n("CloudRM", None, [n("Simple", "mandatory")])
    return n("CloudRM", None, placements, {"kind": "alternative", "members": ids})
for step in range(5):
    write(f"cloudrm-step{step}", cloud(step), fname=f"cloudrm/step{step}.fm.json")
write("cloudrm-replica", cloud(4))

notes = [
    "Simple placement only",
    "Multiple placement added",
    "Maxsize placement added",
    "Maxsize parameters widened",
    "ConsolidationFriendly placement added",
]
manifest = {"name": "cloudrm", "steps": [
    {"model": f"step{i}.fm.json", "note": note} for i, note in enumerate(notes)]}
(OUT / "cloudrm" / "scenario.json").write_text(json.dumps(manifest, indent=2) + "\n")
