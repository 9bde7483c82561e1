"""Exit time and exit position of (Y, Z) from (0, 1), checked against their laws."""
from stablelp import montecarlo as mc
from stablelp.density import StableParams

p = StableParams(1.5)
batch = mc.run_paths(p, mc.McConfig(n_paths=20000, dt=1e-3, seed=1))
for name, r in (("exit time", mc.ks_exit_time(batch)), ("exit position", mc.ks_exit_position(batch, p))):
    print(f"{name}: KS={r['ks']:.4f} threshold={r['threshold']:.4f} p={r['pvalue']:.3f}")
print(f"censored fraction: {batch.censored_fraction:.2e}")
