"""The three ratio experiments at a glance (reduced trial counts).

Each experiment sweeps a grid of condition numbers and residual norms and
reports estimate/exact ratios per cell.  The command line exposes the same
runs as `ilscond table1|table2|table3` with CSV/JSON output; pass --full for
the published problem sizes.
"""

from ilscond.bench import run_experiment, table1_config, table2_config, table3_config

print("experiment 1: probabilistic + small-sample 2-norm estimators")
print(run_experiment(table1_config(trials=10, seed=0)).format_table())

print("experiment 2: small-sample mixed/componentwise estimators")
print(run_experiment(table2_config(trials=10, seed=0)).format_table())

print("experiment 3: structured vs unstructured condition numbers")
print(run_experiment(table3_config(trials=10, seed=0)).format_table())
