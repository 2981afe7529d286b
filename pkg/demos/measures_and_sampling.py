"""Tour of the edge-measure families: construction, marginals, sampling.

Run:  python3 demos/measures_and_sampling.py
"""

import numpy as np

from edgeproc import explicit, power_law_product, first_rank, factorial_max
from edgeproc.process import replica_rng


def main():
    print("=== explicit measures ===")
    triangle = explicit([((1, 2), 1 / 3), ((1, 3), 1 / 3), ((2, 3), 1 / 3)])
    print("triangle support:", triangle.edges)
    print("mass of {1,2}:", triangle.mass((1, 2)))
    print("neighborhood mass M_{12} = M_1 + M_2 - mu_12 =",
          triangle.edge_mass((1, 2)))

    print("\n=== a power-law product measure, mu_ij ~ (ij)^-2.5 ===")
    plp = power_law_product(2.5, n_max=100)
    print("edges on the window:", plp.n_edges)
    print("total truncated mass:", f"{plp.total_mass:.6f}")
    print("mass discarded by the truncation (exact tail):",
          f"{plp.off_window_mass:.3e}")
    norm = plp.normalize()
    print("after normalization the vertex marginals sum to",
          f"{norm.marginals.total:.12f}", "(always 2 for a probability measure)")

    print("\n=== sampling via alias tables ===")
    rng = replica_rng(0, 0)
    draws = norm.sample_edge_indices(200_000, rng)
    top = np.argsort(-norm.w)[:5]
    print("edge      probability   empirical")
    for k in top:
        e = (int(norm.ei[k]), int(norm.ej[k]))
        print(f"{str(e):10s} {norm.w[k]:.6f}     {np.mean(draws == k):.6f}")

    print("\n=== other families ===")
    fr = first_rank(np.arange(1, 6, dtype=float) ** -2)
    print("first-rank sigma_i = i^-2: mu_23 = sigma_2 sigma_3 =",
          fr.mass((2, 3)))
    fm = factorial_max(6)
    print("factorial-max: mu_ij = (max(i,j)!)^-4, e.g. mu_25 =",
          fm.mass((2, 5)))
    print("support connected on the window?", fm.support_connected())


if __name__ == "__main__":
    main()
