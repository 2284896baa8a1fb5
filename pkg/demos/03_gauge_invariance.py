"""Generators related by the SU(2) Moebius gauge give the same curvatures."""
# %%
import numpy as np

from minsurf4 import geometry as geo
from minsurf4.expr import HoloFn

rng = np.random.default_rng(0)
w1, w2 = HoloFn.parse("exp(z)"), HoloFn.parse("z^2")

# %% the gauge map is built as a new expression
print("z under (a, b) = (0, 1):", geo.moebius(HoloFn.parse("z"), geo.MoebiusParams(0, 1)))

# %% random unit (a, b) for each generator leave (K, kappa) unchanged
z0 = 0.4 + 0.3j
ref = geo.curvature_pair(w1, w2, z0)
for _ in range(5):
    m1, m2 = geo.MoebiusParams.random(rng), geo.MoebiusParams.random(rng)
    c = geo.curvature_pair(geo.moebius(w1, m1), geo.moebius(w2, m2), z0)
    print(f"K {c.K:+.15f}  kappa {c.kappa:+.15f}   (reference {ref.K:+.15f}, {ref.kappa:+.15f})")

# %% on the Weierstrass side the same gauge is a unitary map of (F, G)
m = geo.MoebiusParams.random(rng)
fg = geo.su2_transform(geo.weierstrass_FG(w1, z0), m)
print("G^/F^ =", fg.G / fg.F)
print("w^    =", geo.moebius(w1, m)(z0))

# %% parameters off the unit sphere are refused unless renormalised
try:
    geo.moebius(w1, geo.MoebiusParams(1, 1))
except geo.NormalizationError as exc:
    print("refused:", exc)
print("renormalised:", geo.moebius(w1, geo.MoebiusParams(1, 1), renormalize=True))
