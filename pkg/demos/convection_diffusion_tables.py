"""
Iteration ladders for the three-level convection-diffusion system
=================================================================

Two preconditioners on the same flipped system: the Toeplitz one stays flat
as the mesh doubles, the absolute-value circulant Kronecker sum does not.
"""

from flipspec.experiments import ExperimentConfig, run_table

cfg = ExperimentConfig(exp="ex3", out="flipspec_out")
rows = run_table(cfg)

print(f"{'d_n':>6}  {'preconditioner':<14} {'iterations':>10}  converged")
for r in rows:
    print(f"{r['d_n']:>6}  {r['preconditioner']:<14} {r['iterations']:>10}"
          f"  {r['converged']}")

by_precond = {}
for r in rows:
    by_precond.setdefault(r["preconditioner"], []).append(r["iterations"])
for name, col in by_precond.items():
    growth = " -> ".join(str(v) for v in col)
    print(f"{name}: {growth}")
