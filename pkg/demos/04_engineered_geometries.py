# %% [markdown]
# # Engineering the learned geometry
#
# Training with the limiting loss drives each embedding onto its class
# prototype, so the class-mean Gram copies whatever geometry the prototypes
# have, including asymmetric ones.

# %%
import numpy as np

from protogeom import GeometrySpec, RunConfig, run
from protogeom.analysis import mean_gram, normalized
from protogeom.serialize import write_pgm

np.set_printoptions(precision=3, suppress=True)
base = dict(
    k=4, d=8, n_maj=50, ratio=10, batch_size=32, loss="limit", tau=0.1, lr=0.05, epochs=1000, anneal_epochs=(600, 800)
)

geometries = {
    "etf": GeometrySpec("etf"),
    "minority_angle": GeometrySpec("minority_angle", minority=(2, 3), cos_min_min=-0.9, cos_rest=-0.1),
    "majority_collapse": GeometrySpec("majority_collapse", majority=(0, 1)),
}

# %%
for name, spec in geometries.items():
    state = run(RunConfig(**base, geometry=spec))
    g_m = mean_gram(state.embeddings)
    print(f"{name}: delta={state.history[-1].delta:.2e}")
    print(normalized(g_m))
    write_pgm(f"learned_{name}.pgm", g_m)
