"""
Cantilever with two load cases
==============================

Objective and sensitivities are summed over the two separate load cases;
the history is written to ``out_cantilever2/log.csv``.
"""
from normtop import RunConfig, make_cantilever_two, run, sparsity_metrics

problem = make_cantilever_two(60, 40)
for case in problem.load_cases:
    print("load case:", case.entries)

# %%
result = run(RunConfig(problem="cantilever2", objective="l2", out="out_cantilever2"))
print(result.status.value, "after", len(result.history), "iterations")
print("first/last objective:", result.history[0].objective, result.history[-1].objective)
print(sparsity_metrics(result.design))
