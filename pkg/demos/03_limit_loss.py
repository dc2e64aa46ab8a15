# %% [markdown]
# # Many prototype copies and the cross-entropy form
#
# As ``n_w`` grows the augmented loss is dominated by prototype terms. The
# limiting loss is cross-entropy against the fixed prototypes plus an
# alignment reward. Comparing gradients shows the augmented gradient does
# converge, but to the limit gradient *plus* a residual: every sample
# appears in the denominators of all ``k * n_w`` prototype anchors, and
# that share, O(1/n_w) per anchor, does not vanish once summed.

# %%
import numpy as np

from protogeom import BatchPlan, EmbeddingSet, LossParams, limit_gap, limit_loss, make_etf, scl_augmented_loss

rng = np.random.default_rng(0)
h = rng.standard_normal((8, 16))
emb = EmbeddingSet(h / np.linalg.norm(h, axis=0), np.arange(16) % 4, 4)
protos = make_etf(4, 8)
plan = BatchPlan(np.arange(16))

# %% relative gradient gap to the limit loss
for tau in (1.0, 0.1):
    print(f"tau={tau}")
    for n_w, gap in limit_gap(emb, protos, plan, [10, 100, 1000, 10_000, 100_000], LossParams(tau)):
        print(f"  n_w={n_w:>7d}  gap={gap:.4f}")

# %% the residual sum_c exp(h.w_c/tau) w_c / (tau (Lambda_c + e^{1/tau})) accounts for the floor
tau = 1.0
w = protos.vectors
lam = np.exp(protos.gram / tau).sum(axis=0) - np.exp(1 / tau)
resid = w @ (np.exp(emb.vectors.T @ w / tau) / (tau * (lam + np.exp(1 / tau)))).T
ref = limit_loss(emb, plan, protos, LossParams(tau)).grad + resid
for n_w in (10**3, 10**5, 10**7):
    g = scl_augmented_loss(emb, BatchPlan(plan.sample_indices, n_w), protos, LossParams(tau)).grad
    print(f"n_w={n_w:>9d}  gap to limit+residual = {np.linalg.norm(g - ref) / np.linalg.norm(ref):.2e}")

# %% cost does not depend on n_w
for n_w in (10, 10**6):
    rep = scl_augmented_loss(emb, BatchPlan(plan.sample_indices, n_w), protos)
    print(n_w, rep.inner_product_count)
