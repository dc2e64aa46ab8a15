# %% [markdown]
# # Prototype geometries
#
# A geometry is fixed by its Gram matrix; the generators below produce unit
# prototypes in R^d that realize it. Orientation is random but seeded.

# %%
import numpy as np

from protogeom import make_etf, make_majority_collapse, make_minority_angle, make_from_gram
from protogeom.errors import NotPSDError
from protogeom.serialize import write_pgm

np.set_printoptions(precision=3, suppress=True)

# %% simplex ETF: every pair at cos = -1/(k-1)
etf = make_etf(k=4, d=8, seed=0)
print(etf.gram)

# %% minority classes 2 and 3 pushed apart, everything else at -0.1
minority = make_minority_angle(4, minority={2, 3}, cos_min_min=-0.9, cos_rest=-0.1, d=8)
print(minority.gram)

# %% not every two-level pattern exists: with the rest at -1/3 the matrix is indefinite
try:
    make_minority_angle(4, {2, 3}, -0.9, -1 / 3, d=8)
except NotPSDError as exc:
    print("rejected:", exc)

# %% majority classes 0 and 1 share a prototype; the 3 distinct directions form an ETF(3)
collapse = make_majority_collapse(4, majority={0, 1}, d=8)
print(collapse.gram)

# %% any unit-diagonal PSD matrix can be a target
target = np.array([[1.0, 0.5, -0.5], [0.5, 1.0, 0.0], [-0.5, 0.0, 1.0]])
print(make_from_gram(target, d=3).gram)

# %% heatmaps (32x32 pixel cells, -1 black, +1 white)
for name, p in [("etf", etf), ("minority", minority), ("collapse", collapse)]:
    write_pgm(f"{name}_gram.pgm", p.gram)
