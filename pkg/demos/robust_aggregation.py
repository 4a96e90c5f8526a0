"""How the three centre estimators react to one corrupted party.

Five parties agree closely; a sixth reports a wildly wrong model. The mean is
dragged away, both medians stay with the honest majority.
"""

import numpy as np

from fedplus import CentralitySpec, aggregate
from fedplus.aggregators import weiszfeld

rng = np.random.default_rng(0)
honest = rng.normal(loc=1.0, scale=0.01, size=(5, 3))

for magnitude in (1e1, 1e3, 1e6):
    models = np.vstack([honest, np.full(3, magnitude)])
    row = []
    for kind in ("mean", "geometric-median", "coordinate-median"):
        centre = aggregate(CentralitySpec(kind), models)
        row.append(f"{kind} off by {np.linalg.norm(centre - honest.mean(axis=0)):.3g}")
    print(f"outlier at {magnitude:.0e}: " + ", ".join(row))

trace = []
weiszfeld(np.vstack([honest, np.full(3, 1e6)]), trace=trace)
print(f"Weiszfeld accepted {len(trace)} iterates; objective {trace[0]:.6g} -> {trace[-1]:.6g}")
