#!/usr/bin/env python3
"""Convert the public IEEE 39-bus (New England) listing shipped with PYPOWER
into the stvs case schema, attaching the commonly published 10-machine
dynamic data (100 MVA system base).

Usage: python3 tools/convert_case39.py > data/ieee39.json
"""
import json
import sys

from pypower.api import case39

# bus: (H, x_d, x'_d, x_q, T'_d0, x_leakage), 100 MVA base
MACHINES = {
    30: (42.0, 0.1000, 0.0310, 0.0690, 10.20, 0.0125),
    31: (30.3, 0.2950, 0.0697, 0.2820, 6.56, 0.0350),
    32: (35.8, 0.2495, 0.0531, 0.2370, 5.70, 0.0304),
    33: (28.6, 0.2620, 0.0436, 0.2580, 5.69, 0.0295),
    34: (26.0, 0.6700, 0.1320, 0.6200, 5.40, 0.0540),
    35: (34.8, 0.2540, 0.0500, 0.2410, 7.30, 0.0224),
    36: (26.4, 0.2950, 0.0490, 0.2920, 5.66, 0.0322),
    37: (24.3, 0.2900, 0.0570, 0.2800, 6.70, 0.0280),
    38: (34.5, 0.2106, 0.0570, 0.2050, 4.79, 0.0298),
    39: (500.0, 0.0200, 0.0060, 0.0190, 7.00, 0.0030),
}

# First-order exciter defaults shared by all units.
K_A = 5.0
T_E = 0.2

# Load buses carrying induction-motor load by default, and the share.
MOTOR_BUSES = [3, 4, 7, 8, 15, 16, 18, 20, 21, 23, 24, 27]
MOTOR_SHARE = 0.3

# Switchable capacitor banks in the 15/16 zone, off in the base case so
# the base power flow is the textbook one.
SHUNTS = [(4, 0.5), (15, 0.5), (16, 0.5), (24, 0.5)]


def main():
    ppc = case39()
    base = float(ppc["baseMVA"])
    kinds = {1: "PQ", 2: "PV", 3: "slack"}
    vset = {int(g[0]): float(g[5]) for g in ppc["gen"]}

    buses = []
    for b in ppc["bus"]:
        bid = int(b[0])
        kind = kinds[int(b[1])]
        entry = {
            "id": bid,
            "kind": kind,
            "P_load": float(b[2]) / base,
            "Q_load": float(b[3]) / base,
            "motor_share": MOTOR_SHARE if bid in MOTOR_BUSES else 0.0,
        }
        if kind != "PQ":
            entry["V_set"] = vset[bid]
        buses.append(entry)

    branches = []
    for br in ppc["branch"]:
        f, t = int(br[0]), int(br[1])
        entry = {
            "id": f"{f}-{t}",
            "from": f,
            "to": t,
            "r": float(br[2]),
            "x": float(br[3]),
            "b": float(br[4]),
            "status": bool(br[10]),
        }
        if float(br[8]) != 0.0:
            entry["tap"] = float(br[8])
        branches.append(entry)

    generators = []
    for g in ppc["gen"]:
        bus = int(g[0])
        h, xd, xdp, xq, td0, xl = MACHINES[bus]
        xad = xd - xl
        generators.append({
            "bus": bus,
            "P_g0": float(g[1]) / base,
            "x_d": xd,
            "x_d_prime": xdp,
            "x_q": xq,
            "x_ad": xad,
            "x_f": xad * xad / (xd - xdp),
            "T_d0_prime": td0,
            "K_A": K_A,
            "T_e": T_E,
            "Q_max": float(g[3]) / base,
            "H": h,
            "D": 0.0,
            "is_condenser": False,
        })

    shunts = [{"id": f"cap_{bus}", "bus": bus, "b": b, "status": False}
              for bus, b in SHUNTS]

    case = {
        "base_mva": base,
        "f0": 60.0,
        "buses": buses,
        "branches": branches,
        "generators": generators,
        "motors": [],
        "shunts": shunts,
    }
    json.dump(case, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
