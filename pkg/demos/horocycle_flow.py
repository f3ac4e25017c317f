# coding: utf-8

# # Horocycles on the Bolza surface
#
# Points of the unit tangent bundle are elements of PSL(2, R) modulo the Bolza
# group.  The geodesic flow is right multiplication by a_t = diag(e^(t/2),
# e^(-t/2)) and the horocycle flows by the unipotents.  Long horocycle averages
# of a bump observable approach its Liouville mean.

# In[1]:

import numpy as np

from fuplab.hyperbolic_dynamics import (
    Observable,
    a_t,
    bolza,
    horocycle_average,
    liouville_average,
    n_minus,
    n_plus,
    random_points,
)


# The commutation relations between the flows, and the defining relation of the
# group (the product of the generators in the order 0,5,2,7,4,1,6,3 is +-1).

# In[2]:

t, s = 0.7, 1.3
print(np.abs(a_t(t) @ n_plus(s) @ a_t(-t) - n_plus(np.exp(t) * s)).max())
print(np.abs(a_t(t) @ n_minus(s) @ a_t(-t) - n_minus(np.exp(-t) * s)).max())
print("relation error:", max(bolza().relation_errors()))


# The bump observable: its exact mean over the surface, and a Monte Carlo
# estimate from Liouville samples.

# In[3]:

f = Observable()
mc = liouville_average(f, 100_000, seed=1)
print("exact mean:", round(f.exact_mean(bolza()), 6), " MC:", round(mc.mean, 5), "+-", round(mc.stderr, 5))


# Horocycle averages at growing T from a few seeded base points.

# In[4]:

for g in random_points(4, seed=0):
    errs = [abs(horocycle_average(f, g, T, int(50 * T)) - mc.mean) for T in (10, 20, 40, 80)]
    print(" ".join(f"{e:.4f}" for e in errs))
