"""Fixed-point dimension and asymptotic rate of the qudit constructions over random A.

One CSV row per draw: variant,d,draw,fixed_point_dim,stationary_sufficient,converges,rate.
"""

import argparse
import csv
import logging
import sys
import time

import numpy as np

from twirlkit.attractors import check_convergence_to_twirl, stationarity_sufficient
from twirlkit.qudit import AParams, ConstructionSpec, Variant, build_ensemble

log = logging.getLogger("qudit_sweep")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 5])
    ap.add_argument("--draws", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--variants", nargs="+", default=["three_op", "two_op"])
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)

    rng = np.random.default_rng(args.seed)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["variant", "d", "draw", "fixed_point_dim", "stationary_sufficient", "converges", "rate"])
    for variant in map(Variant, args.variants):
        for d in args.dims:
            t0 = time.perf_counter()
            ok = 0
            for k in range(args.draws):
                e = build_ensemble(ConstructionSpec(d, A=AParams.random(rng), variant=variant))
                rep = check_convergence_to_twirl(e)
                ok += rep.converges_to_twirl
                w.writerow([variant.value, d, k, rep.fixed_point_dim, stationarity_sufficient(e),
                            rep.converges_to_twirl, f"{rep.subdominant_modulus:.6f}"])
            tag = " (conjectural)" if variant is Variant.TWO_OP_ODD_D and d % 2 == 0 else ""
            log.info("%s d=%d: %d/%d converge%s, %.1fs", variant.value, d, ok, args.draws, tag,
                     time.perf_counter() - t0)


if __name__ == "__main__":
    main()
