# coding: utf-8

# # Porous sets and their regular Cantor hulls
#
# A closed set Omega in [0, 1] is nu-porous on scales alpha0..alpha1 when every
# window I of length between alpha0 and alpha1 contains a gap of Omega of length
# at least nu*|I|.  This notebook certifies porosity for the middle-thirds Cantor
# set and for a random porous set, then wraps the random set in a regular Cantor
# set and checks the upper and lower regularity bounds of its natural measure.

# In[1]:

from fuplab.interval_sets import cantor_set, porosity_check, random_porous
from fuplab.regular_sets import RegularMeasure, containment_check, embed_porous, regularity_check


# The level-8 approximation of the Cantor set keeps 2^8 intervals of length 3^-8.
# Windows may sit anywhere, so the guaranteed gap fraction is smaller than the
# familiar 1/3; porosity 0.2 passes on scales 3^-7..1, and the ladder check
# certifies a quarter of the requested value.

# In[2]:

C = cantor_set(8)
report = porosity_check(C, 0.2, 3.0**-7, 1.0)
print(len(C), "intervals, measure", C.measure)
print("certified:", report.certified, "nu certified:", report.nu_certified, "windows:", report.windows_checked)


# Asking for more porosity than the set has fails, and the report names the worst
# window it found.

# In[3]:

bad = porosity_check(C, 0.4, 3.0**-7, 1.0)
print("certified:", bad.certified, "witness window:", bad.witness, "worst gap ratio:", round(bad.worst_ratio, 4))


# A seeded random porous set, its Cantor hull, and the containment check on the
# alpha0-grid.

# In[4]:

nu, alpha0 = 0.25, 2.0**-12
omega = random_porous(nu, alpha0, seed=3)
tree = embed_porous(omega, nu, alpha0)
print("intervals in Omega:", len(omega))
print("base L =", tree.L, " cutoff level k0 =", tree.k0)
print("contained:", containment_check(omega, tree, alpha0))


# The measure gives each kept node of level k the mass (L-1)^-k, so it is
# delta-regular with delta = log(L-1)/log(L) and constant C_R = 2L.

# In[5]:

mu = RegularMeasure(tree)
r = regularity_check(mu, 10_000, seed=0)
print("delta =", round(mu.delta, 4), " C_R =", mu.C_R)
print("upper ok:", r.upper_ok, " worst upper ratio:", round(r.worst_upper_ratio, 3))
print("lower ok:", r.lower_ok, " worst lower ratio:", round(r.worst_lower_ratio, 3))
