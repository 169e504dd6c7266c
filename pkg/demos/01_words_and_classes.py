"""Words, normal forms and conjugacy classes in F2 and in Z * Z^2."""

# %%
from markedlength import (MarkedGroup, WordMetric, conjugacy_key, cyclic_reduce,
                          enumerate_conjugacy_reps, geodesic, sphere_size)

F2 = MarkedGroup.free(2)
g = F2.parse("b a b A B")
print("normal form:", g, "length", len(g))

core, conj = cyclic_reduce(g)
print("cyclic core:", core, "via conjugator", conj)
print("class key:", conjugacy_key(g).canonical)

# %% Spheres grow like 4 * 3^(n-1); classes like 3^n / n.
for n in range(7):
    classes = sum(1 for k in enumerate_conjugacy_reps(F2, n) if len(k.canonical.word) == n)
    print(f"n={n}  |S(n)|={sphere_size(F2, n):5d}  classes={classes}")

# %% A second generating set shortcuts ab.
S2 = WordMetric(F2, ["a", "b", "ab"])
for w in ["ab", "ba", "abab", "aB"]:
    x = F2.parse(w)
    path = [str(v) for v in geodesic(S2, F2.identity, x).vertices]
    print(f"|{w}|_S2 = {S2.dist1(x)}   geodesic {' -> '.join(path)}")

# %% Free products: the abelian factor sorts its letters.
G = MarkedGroup.free_product([("free", 1), ("abelian", 2)])
x = G.parse("b a c a A B")
print("Z * Z^2:", x)
