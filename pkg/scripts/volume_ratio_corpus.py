"""Distribution of V(Z(mu))/V(T^n) over random centred isotropic measures.

Prints quantiles per dimension and the closest approach to the simplex value,
together with the nearest regular-simplex configuration distance there.
"""

import argparse

import numpy as np

from reviso.geometry import simplex_volume_formula
from reviso.measures import random_isotropic
from reviso.zbody import nearest_circumscribed_simplex, z_body


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--dims", default="2,3,4")
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    for n in map(int, a.dims.split(",")):
        VT = simplex_volume_formula(n)
        mus = [random_isotropic(n, n + 2 + i % (2 * n + 2), a.seed * 100_000 + 1000 * n + i) for i in range(a.count)]
        r = np.array([z_body(mu).volume / VT for mu in mus])
        j = int(np.argmax(r))
        dh = nearest_circumscribed_simplex(mus[j], mode="max")[1]
        q = np.quantile(r, [0.05, 0.5, 0.95])
        print(f"n={n}: ratio q05={q[0]:.4f} median={q[1]:.4f} q95={q[2]:.4f} max={r[j]:.6f} "
              f"(atoms {mus[j].k}, delta_H {dh:.4f})")


if __name__ == "__main__":
    main()
