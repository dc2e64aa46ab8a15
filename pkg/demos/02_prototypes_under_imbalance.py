# %% [markdown]
# # More prototype copies, closer to an ETF
#
# Free embeddings on STEP-imbalanced labels (two majority classes with 50
# samples, two minority classes with 5) trained with supervised-contrastive
# loss. Each batch is augmented with ``n_w`` copies of every ETF prototype.
# Vanilla SCL (``n_w = 0``) ends far from the ETF; a handful of copies is
# enough to pull the class means onto it.

# %%
import numpy as np

from protogeom import RunConfig, run
from protogeom.analysis import mean_gram, normalized

np.set_printoptions(precision=3, suppress=True)
base = dict(k=4, d=8, n_maj=50, ratio=10, batch_size=32, tau=0.1, lr=0.05, epochs=300, anneal_epochs=(210,))

# %%
for n_w in (0, 2, 8, 32):
    loss = "scl" if n_w == 0 else "scl_proto"
    deltas = [run(RunConfig(**base, loss=loss, n_w=n_w, seed=s)).history[-1].delta for s in range(5)]
    print(f"n_w={n_w:3d}  median delta to ETF = {np.median(deltas):.4f}")

# %% the class-mean Gram for vanilla SCL vs. 32 copies
for n_w in (0, 32):
    state = run(RunConfig(**base, loss="scl" if n_w == 0 else "scl_proto", n_w=n_w))
    print(f"n_w={n_w}\n", normalized(mean_gram(state.embeddings)))

# %% delta over training (first few epochs and the end)
state = run(RunConfig(**base, loss="scl_proto", n_w=8))
for rec in state.history[:5] + state.history[-2:]:
    print(rec.epoch, round(rec.loss, 3), round(rec.delta, 4), round(rec.alignment, 4))
