# coding: utf-8

# # Counting controlled words
#
# Words over {1, 2} of length N0 are split by how many 1s they contain.  A word
# is controlled at level alpha when its density of 1s is at least alpha; the
# rare uncontrolled words are the ones counted here.  The counts are exact big
# integers and are compared with the binomial bound and the entropy estimate
# H(alpha) <= sqrt(alpha).

# In[1]:

import math

from fuplab.words import (
    binomial_bound,
    controlled_set_size,
    count_X,
    density,
    derive_params,
    entropy,
    enumerate_uncontrolled,
    parse_word,
    xy_membership,
)


# The number of uncontrolled words (controlled_set_size) agrees with
# brute-force enumeration.

# In[2]:

for N0 in (4, 8, 12, 16):
    print(N0, [(a, controlled_set_size(N0, a), enumerate_uncontrolled(N0, a)) for a in (0.1, 0.25, 0.5)])


# In[3]:

w = parse_word("112112122222")
print("density of ones:", density(w))


# Membership in X or Y looks at a word cut into eight equal blocks; the second
# value names the first controlled block.  Words with no controlled block form X.

# In[4]:

print(xy_membership(parse_word("2222222222222222"), 0.25))
print(xy_membership(parse_word("2222221122222222"), 0.25))


# Parameters derived from (h, rho, beta), and the size of the eight-block set X.

# In[5]:

p = derive_params(2.0**-40, 0.5, 0.125)
rep = count_X(p)
print(p.to_json())
print("uncontrolled words:", rep.n_uncontrolled, " |X| has", len(str(rep.n_X)), "digits")
print("n_X / h^(-4 sqrt(alpha)) =", rep.ratio_to_bound)


# The entropy bound holds on the admissible range alpha <= 1/4096 but not for
# every alpha in (0, 1): it fails on roughly [0.086, 0.479].

# In[6]:

for a in (1 / 4096, 0.05, 0.1, 0.3, 0.5):
    print(f"alpha={a:.5f}  H={entropy(a):.4f}  sqrt={math.sqrt(a):.4f}  ok={entropy(a) <= math.sqrt(a)}")
print(binomial_bound(64, 0.25) >= controlled_set_size(64, 0.25))
