"""Simple random walk on F2: return probabilities, spectral radius, Green metric."""

# %%
import math

from markedlength import GreenMetric, MarkedGroup, RandomWalkMeasure, WordMetric
from markedlength.metrics import return_probabilities, spectral_radius_report
from markedlength.mls import coarse_additivity_check

F2 = MarkedGroup.free(2)
mu = RandomWalkMeasure.uniform(F2)
p = return_probabilities(mu, 40)
print("P(return at 2, 4, 6):", p[2], p[4], p[6])

# %% Both estimators are lower bounds for sqrt(3)/2.
rep = spectral_radius_report(mu, 40)
print(f"rho_hat={rep.value:.4f} (root {rep.root_estimate:.4f}, ratio {rep.ratio_estimate:.4f}),"
      f" exact {math.sqrt(3) / 2:.4f}")

# %% The Green distance to a letter tends to log 3; truncation leaves an error bar.
for N in (20, 40, 80):
    G = GreenMetric(mu, N=N, tail_tol=math.inf)
    d = G.measure(F2.parse("a"))
    print(f"N={N}: d(1, a) = {d.value:.6f} +- {d.error:.2e}  (log 3 = {math.log(3):.6f})")

# %% Along tree geodesics the Green metric is additive; one step off, it is not.
G = GreenMetric(mu, N=40, tail_tol=1.0)
print(coarse_additivity_check(G, WordMetric(F2), 1, 4))
