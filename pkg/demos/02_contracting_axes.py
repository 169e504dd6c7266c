"""Projections to cyclic axes in the tree of F2, and what changes on Z^2."""

# %%
from markedlength import (ContractingAxis, MarkedGroup, WordMetric, contraction_constant,
                          lemma_audit, proj_diameter, project, weakly_independent)

F2 = MarkedGroup.free(2)
d = WordMetric(F2)
axis = ContractingAxis(F2.parse("a"), window=8)

for w in ["aaabb", "b", "aaaaab"]:
    r = project(axis, F2.parse(w), d)
    print(f"pi({w}) = {[str(p) for p in r.points]}  at distance {r.distance}")
print("diam pi{b, a^5 b} =", proj_diameter(axis, F2.parse("b"), F2.parse("aaaaab"), d))

# %% Contraction constants at audit radius 6.  The discrete orbit of ab skips
# the vertex a; adding the geodesics between orbit points removes the gap.
for h, hull in [("a", False), ("ab", False), ("ab", True)]:
    res = contraction_constant(ContractingAxis(F2.parse(h), 8, hull=hull), d, 6)
    print(f"<{h}> hull={hull}: C = {res.C}  ({res.geodesics} geodesics)")

# %% The projection lemmas hold with that constant on the whole ball of radius 5.
rep = lemma_audit(ContractingAxis(F2.parse("ab"), 8), d, 5)
print("violations:", rep["violations"])

# %% Independent axes project to bounded sets; nested ones do not.
print(weakly_independent(F2.parse("a"), F2.parse("b"), d).to_dict())
print(weakly_independent(F2.parse("a"), F2.parse("aa"), d).to_dict())

# %% In Z^2 the estimate keeps growing with the radius: no contraction.
Z2 = MarkedGroup.free_product([("abelian", 2)])
flat = ContractingAxis(Z2.parse("a"), 12)
print("Z^2:", [contraction_constant(flat, WordMetric(Z2), R).C for R in (4, 6, 8)])
