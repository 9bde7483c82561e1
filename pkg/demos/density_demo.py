"""Stable densities: values at the origin, mass and two-sided tail ratios."""
import numpy as np
from scipy import special

from stablelp.density import StableParams, check_two_sided, stable_density

for alpha in (0.8, 1.0, 1.5, 1.9):
    tab = stable_density(StableParams(alpha), 1.0)
    g = tab.values
    exact = special.gamma(1 + 1 / alpha) / np.pi
    ts = check_two_sided(tab)
    print(f"alpha={alpha:4.2f}  p(1,0)={g.values[g.n // 2]:.10f}  exact={exact:.10f}  "
          f"mass={tab.mass:.8f}  ratio in [{ts['ratio_min']:.4f}, {ts['ratio_max']:.4f}]")
