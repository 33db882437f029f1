# %% [markdown]
# # A small Monte Carlo
#
# Compare the CSS and local Whittle estimators of the fractional order and
# the smoother fit on one design cell. Replications have their own seeds,
# so cells can run in any order.

# %%
from fracuc.mc import McDesign, run_study, table_header, table_rows

design = McDesign(d0_values=(1.25,), rho_values=(1.0,), n_values=(100,), replications=25,
                  seed=1, bandwidth_exponents=(0.55, 0.65))
rows = run_study(design)
print(table_header(design.bandwidth_exponents))
for row in table_rows(rows):
    print([round(v, 4) if isinstance(v, float) else v for v in row])
