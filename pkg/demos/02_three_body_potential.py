# %% [markdown]
# # Three-body potential with one excited atom
#
# Atoms A and B are in their ground state; C is excited. The potential has
# a resonant part that oscillates in space and a nonresonant part of fixed
# sign. Two independent routes are available: the closed single-exponential
# form and the cyclic average of pair energies.

# %%
import numpy as np

from cp3 import equilateral, excited, ground, three_body_closed, three_body_symmetrized
from cp3.verify import sign_changes, triangle_345

A, B, C = ground(1.3), ground(0.9), excited(1.0, [0.0, 0.0, 1.0])
t = triangle_345()
closed = three_body_closed(t, A, B, C)
sym = three_body_symmetrized(t, A, B, C)
print("closed      ", closed.as_dict())
print("symmetrized ", sym.as_dict())

# %% [markdown]
# Sweep an equilateral triangle and count sign changes of each part.

# %%
ds = np.linspace(0.5, 20.0, 96)
res, nr = [], []
for d in ds:
    e = three_body_closed(equilateral(d), A, B, C)
    res.append(e.resonant)
    nr.append(e.nonresonant)
print("resonant sign changes   ", sign_changes(res))
print("nonresonant sign changes", sign_changes(nr))
for d, x, y in list(zip(ds, res, nr))[::12]:
    print(f"k0 d = {d:5.2f}  resonant = {x: .3e}  nonresonant = {y: .3e}")
