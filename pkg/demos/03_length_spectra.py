"""Comparing marked length spectra of two word metrics on F2."""

# %%
from markedlength import (MarkedGroup, ScaledMetric, WordMetric, dilation_bounds,
                          extension_certificate, length_profile, mls_compare,
                          rough_isometry_certificate)

F2 = MarkedGroup.free(2)
S1 = WordMetric(F2)
S2 = WordMetric(F2, ["a", "b", "ab"])

# %% Stable length sits below the algebraic length, which sits below d(1, g).
for w in ["abA", "ab", "aabAB"]:
    p = length_profile(S2, F2.parse(w), R=3)
    print(f"{w:6s} stable={p.stable.value} ({p.stable.method})  algebraic={p.algebraic}  d={p.upper}")

# %% The spectra differ, first at the class of ab.
rep = mls_compare(S1, S2, L=4)
print("witness:", rep.witness, rep.witness_lengths, "over", len(rep.classes), "classes")
print("dilation:", dilation_bounds(S1, S2, 4))
print("rough isometry C(R):", [row["C"] for row in rough_isometry_certificate(S1, S2, 1, 1, 6).C_profile])

# %% A metric and its double have proportional spectra.
D2 = ScaledMetric(S1, 2)
print("d vs 2d dilation:", dilation_bounds(S1, D2, 6))

# %% Three letters suffice to glue any two words almost geodesically.
F = [F2.parse("a"), F2.parse("b"), F2.parse("A")]
cert = extension_certificate(F, 1, 8)
print(f"extension certificate R=8: passed={cert.passed} "
      f"({cert.pairs} pairs, {cert.evaluated} prefix classes)")
