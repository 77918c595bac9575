"""Topological transition of the dissipative SSH chain under pure loss.

Sweeps the intracell hopping t1 at fixed t2 = 1 and loss rate 4/3 and prints,
for each point:

* the no-jump winding number omega (zeros and poles of det h_+/- counted
  against the sub-GBZ loops),
* the Zak phase of band E_{1,-} of the full (quantum-jump) shape matrix,
* the number of zero-energy edge modes of the open chain (L = 50).

Both invariants switch at t1 = +-sqrt(t2^2 + (gamma/2)^2) ~ +-1.2019, and the
edge-mode count follows omega: 8 modes where omega = 4, none where omega = 0.

Run with ``python3 demos/winding_transition.py``.
"""

import numpy as np

from nhtopo.invariants import compute_invariants
from nhtopo.model import ModelParams, obc_spectrum, transition_point
from nhtopo.errors import NumericalError
from nhtopo.thirdq import shape_matrix_blocks

GAMMA = 4 / 3


def main():
    print(f"predicted transition: t1 = +-{transition_point(1.0, GAMMA):.4f}")
    print(f"{'t1':>7} {'omega':>6} {'nu/pi':>6} {'edges':>6}")
    for t1 in np.linspace(-2.0, 2.0, 17):
        p = ModelParams(t1=float(t1), t2=1.0, gamma_l=GAMMA)
        try:
            omega = compute_invariants(p, "shape-nojump", bands=(), symmetry=False).omega
            nu = compute_invariants(p, "shape-jump", symmetry=False).nu_by_band["1-"]
        except NumericalError as err:
            print(f"{t1:7.3f}  gap closes ({err})")
            continue
        chain = shape_matrix_blocks(p.with_(kappa=0.0, cells=50), drop_overall_loss=True)
        edges = obc_spectrum(chain).edge_mode_count
        print(f"{t1:7.3f} {omega:6.0f} {np.round(nu / np.pi, 2) + 0.0:6.2f} {edges:6d}")


if __name__ == "__main__":
    main()
