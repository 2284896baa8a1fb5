"""Densities, curvature pairs and numerical residuals of the natural system."""
# %%
from minsurf4 import geometry as geo
from minsurf4 import numerics as num
from minsurf4.expr import HoloFn

z, z2 = HoloFn.parse("z"), HoloFn.parse("z^2")

# %% density of a single generator: 4|w'|^2 / (|w|^2 + 1)^2
print("nu(z) at 0   =", geo.liouville_density(z, 0))
print("nu(z^2) at 1 =", geo.liouville_density(z2, 1))

# %% a pair of generators gives p, q and the curvature pair (K, kappa)
pq = geo.pq_from_w(z, z2, 1)
print("p, q         =", pq.p, pq.q)
print("from p, q    =", geo.curvatures_from_pq(pq))
print("direct       =", geo.curvature_pair(z, z2, 1))

# %% the alpha/beta substitution inverts exactly
ab = geo.alpha_beta_from_curvatures(geo.CurvaturePair(-5.0, -3.0))
print("alpha, beta  =", ab.alpha, ab.beta, "->", geo.pq_from_alpha_beta(ab))

# %% the density equation on a grid: residual max_rel and its order under refinement
grid = num.GridSpec.square(-1, 1, -1, 1, 101)
coarse = num.residual_liouville(HoloFn.parse("exp(z)"), grid)
fine = num.residual_liouville(HoloFn.parse("exp(z)"), grid.refined())
print(coarse.to_json())
print("order:", num.convergence_order(coarse, fine))

# %% the natural system for (z, z^2) away from the critical point of z^2
strip = num.GridSpec.square(0.5, 1.5, -0.5, 0.5, 101)
for form in ("eq2", "eq1"):
    for a, b in zip(num.residual_system(z, z2, strip, form),
                    num.residual_system(z, z2, strip.refined(), form)):
        o = num.convergence_order(a, b)
        print(f"{a.equation:36} max_rel {a.max_rel:.2e}  order {o.order:.3f}")

# %% every intermediate form of the derivation, in alpha/beta and in p/q
for r in num.residual_chain(z, z2, strip):
    print(f"{r.equation:36} max_rel {r.max_rel:.2e}")
