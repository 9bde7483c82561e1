"""L^2 and L^p ratios of a few square functions for the Gaussian fixture."""
from stablelp import functionals as lp
from stablelp.density import StableParams
from stablelp.fixtures import fixture
from stablelp.grid import lp_norm

f = fixture("gauss", half_extent=32.0, spacing=1 / 32)
reps = lp.compute_functionals(f, StableParams(1.5), ("g_up", "g_arrow_alpha", "g_alpha"))
for p in (1.5, 2.0, 4.0):
    row = "  ".join(f"{k}={r.norm(p) / lp_norm(f, p):.4f}" for k, r in reps.items())
    print(f"p={p}: {row}")
