"""Per-round parameter change caused by aggregation.

Reset-mode FedAvg overwrites every party's model with the average each round,
so parties repeatedly jump by a large amount. Persist-mode FedAvg+ never
overwrites a party's model, so its change is zero. Its center_gap column shows
how far uploads sit from the centre: that disagreement is kept in the personal
models instead of being erased every round.
"""

from fedplus import FederationConfig, LocalSolveSpec, SynthSpec, generate, preset_config, run_federation

tasks = generate(SynthSpec(zeta=1000.0, beta=10.0, parties=30, seed=0))
base = FederationConfig(rounds=40, local=LocalSolveSpec(steps=20, gamma=0.01, batch_size=32), parties_per_round=10, eval_every=40)

flat = run_federation(preset_config("fedavg", base), tasks)
plus = run_federation(preset_config("fedavg+", base), tasks)

print("round  fedavg change  fedavg+ change  fedavg+ center_gap")
for a, b in zip(flat, plus):
    if a.round % 5 == 0 or a.round == 1:
        print(f"{a.round:5d}  {a.change['mean']:13.4f}  {b.change['mean']:14.4f}  {b.center_gap['mean']:18.4f}")
