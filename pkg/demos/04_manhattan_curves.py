"""Manhattan curves: the (d, 2d) line and the (S1, S2) curve."""

# %%
import math

from markedlength import (MarkedGroup, ScaledMetric, WordMetric, conj_growth_rate, growth_rate,
                          line_test, manhattan_curve, poincare_partial)

F2 = MarkedGroup.free(2)
S1 = WordMetric(F2)
print("growth:", growth_rate(S1, 8).value, "class growth:", conj_growth_rate(S1, 12).value,
      "log 3:", math.log(3))

# %% The Poincare series of d converges past log 3.
for b in (1.0, 1.2):
    print(f"b={b}:", poincare_partial(S1, S1, 0, b, 8).verdict)

# %% For (d, 2d) the curve is log 3 - 2a.
grid = [0.05 * i for i in range(11)]
s = manhattan_curve(S1, ScaledMetric(S1, 2), grid, 10)
for a, th, bt in zip(grid, s.theta, s.big_theta):
    print(f"a={a:.2f}  theta={th:.4f}  Theta={bt:.4f}  exact={math.log(3) - 2 * a:.4f}")
print(line_test(s, dilation=(2, 2)).to_dict())

# %% For (S1, S2) the same estimators still give theta <= Theta.
S2 = WordMetric(F2, ["a", "b", "ab"])
s = manhattan_curve(S1, S2, [0.0, 0.2, 0.4, 0.6, 0.8], 8, endpoints=False)
for a, th, bt in zip(s.grid, s.theta, s.big_theta):
    print(f"a={a:.1f}  theta={th:.4f}  Theta={bt:.4f}")
