"""Two parties with quadratic losses centred at 0 and 2.

With a penalty weight alpha, each party settles between its own optimum and
the shared centre: x_n = (c_n + alpha * centre) / (1 + alpha). Plain FedAvg
collapses both parties onto the centre instead.
"""

from fedplus import FederationConfig, LocalSolveSpec, QuadraticTask, preset_config, run_federation

tasks = [QuadraticTask([0.0]), QuadraticTask([2.0])]
base = FederationConfig(rounds=400, local=LocalSolveSpec(steps=5, gamma=0.1, batch_size=None), parties_per_round=2)

print("alpha   party 0   party 1   centre")
for alpha in (0.1, 1.0, 10.0):
    last = run_federation(preset_config("fedavg+", base, alpha=alpha), tasks, record_states=True)[-1]
    x0, x1 = last.uploads[0][0], last.uploads[1][0]
    print(f"{alpha:>5}  {x0:8.4f}  {x1:8.4f}  {last.x_hat_after[0]:7.4f}"
          f"   closed form {(0 + alpha) / (1 + alpha):.4f} / {(2 + alpha) / (1 + alpha):.4f}")

last = run_federation(preset_config("fedavg", base), tasks, record_states=True)[-1]
print(f"fedavg centre {last.x_hat_after[0]:.4f}; every party is evaluated at this single point")
