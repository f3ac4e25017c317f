# coding: utf-8

# # Porosity along unstable horocycles
#
# Given balls in the unit tangent bundle, the unstable horocycle through a
# point, pushed forward by the geodesic flow, must enter one of them.  The
# witness search finds the time s0 and the flow exponent j, and verifies that a
# small slice of the horocycle lands inside a ball.

# In[1]:

from fuplab.hyperbolic_dynamics import (
    Direction,
    SliceSpec,
    default_targets,
    hitting_time,
    porosity_witness,
    random_points,
)


# Hitting times of the target balls along the unstable horocycle.

# In[2]:

targets = default_targets(0.3)
for g in random_points(5, seed=2):
    print([hitting_time(b.shrink(0.8), g, 2000.0, Direction.UNSTABLE) for b in targets])


# Witnesses at three values of tau.

# In[3]:

for tau in (1.0, 0.5, 0.25):
    for g in random_points(3, seed=8):
        w = porosity_witness(targets, g, tau, 600.0, SliceSpec(1.0, 0.005))
        print(f"tau={tau}  s0={w.s0:.4f}  j={w.j}  verified={w.verified}  max distance={w.max_distance:.3f}")
