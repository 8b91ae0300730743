#!/usr/bin/env python3
"""Recompute nadir and checkpoint voltage of one bus from a trajectory CSV,
independently of the C++ metric extraction.

Usage: python3 tools/oracles/reanalyze_csv.py trajectory.csv BUS T_FAULT T_CLR [CHECKPOINT]
Prints JSON {"V_nadir": ..., "V_checkpoint": ...}.
"""
import json
import sys

import numpy as np


def main():
    path, bus, t_fault, t_clr = sys.argv[1], sys.argv[2], float(sys.argv[3]), float(sys.argv[4])
    checkpoint = float(sys.argv[5]) if len(sys.argv) > 5 else 0.4
    data = np.genfromtxt(path, delimiter=",", names=True)
    t = data["t"]
    v = data[f"bus_{bus}_Vmag"]
    # Event instants appear twice; the second row is the post-event state.
    after = np.ones_like(t, dtype=bool)
    first_fault = np.argmax(t >= t_fault - 1e-12)
    after[:first_fault + 1] = False
    nadir = float(v[after].min())
    tc = t_clr + checkpoint
    hi = int(np.searchsorted(t, tc, side="right"))
    lo = hi - 1
    w = (tc - t[lo]) / (t[hi] - t[lo]) if hi < len(t) else 0.0
    check = float(v[lo] * (1 - w) + v[min(hi, len(t) - 1)] * w)
    json.dump({"V_nadir": nadir, "V_checkpoint": check}, sys.stdout)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
