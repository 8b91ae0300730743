#!/usr/bin/env python3
"""Reference AC power flow of the bundled ieee39 case, solved with PYPOWER
on its own copy of the IEEE 39-bus data (no generator reaches its Q limit in the base case).

Usage: python3 tools/oracles/pf_reference.py > tests/data/ieee39_pf_reference.json
"""
import json
import sys

import numpy as np
from pypower.api import case39, ppoption, runpf


def main():
    opt = ppoption(VERBOSE=0, OUT_ALL=0, PF_TOL=1e-12, ENFORCE_Q_LIMS=0)
    res, ok = runpf(case39(), opt)
    if not ok:
        sys.exit("pypower did not converge")
    base = res["baseMVA"]
    out = {
        "source": "pypower runpf, case39, ENFORCE_Q_LIMS=0, PF_TOL=1e-12",
        "buses": [
            {"id": int(b[0]), "Vm": float(b[7]), "Va_rad": float(np.deg2rad(b[8]))}
            for b in res["bus"]
        ],
        "generators": [
            {"bus": int(g[0]), "P_g": float(g[1]) / base, "Q_g": float(g[2]) / base}
            for g in res["gen"]
        ],
    }
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
