"""Initial data that shrink like 1/n while the solution at a fixed time grows like exp(X1 n T0)."""

import math

from elastic_kh import BackgroundState, find_n_star, illposedness_table, quartic_roots

state = BackgroundState.from_km(0.0, 1.0)
x1 = quartic_roots(state).x1
print(f"X1 = {x1:.6f}")
print(f"{'n':>4} {'log10 |U(0)|':>14} {'log10 |U(T0)|':>14} {'decades gained':>15}")
for row in illposedness_table(state, j=3, k=3, T0=1.0, n_list=[5, 10, 20, 40, 80]):
    print(f"{row.n:4d} {row.initial.log10_combined:14.4f} {row.grown.log10_combined:14.4f} {row.log10_ratio:15.4f}")
print("guaranteed amplification by 2 from n =", find_n_star(state, alpha=2.0, T0=1.0, j=3, k=3))
print("asymptotic slope in decades per unit n:", x1 / math.log(10))
