#!/usr/bin/env python3
"""Linear-ODE oracle for the generator flux / exciter pair under a stepped
terminal voltage.

Within a stage (terminal magnitude V, q component V_q held constant):
    T'_d0 dpsi/dt = E_fd - [psi + (x_d - x'_d)(psi - V_q)/x'_d]
    T_e  dE_fd/dt = E_fd0 + K_A (V_ref - V) - E_fd
The system x' = A x + b is solved by eigen-decomposition; the flux is then
split into its per-eigenvalue amplitudes. Two-stage trajectories are also
integrated with scipy (Radau, rtol 1e-12) as a second, numerical check.

Usage: python3 tools/oracles/flux_oracle.py > tests/data/flux_oracle.json
"""
import json
import sys

import numpy as np
from scipy.integrate import solve_ivp


def system(p, V, Vq):
    xd, xdp, td0, te, ka = p["x_d"], p["x_d_prime"], p["T_d0_prime"], p["T_e"], p["K_A"]
    A = np.array([[-(xd / xdp) / td0, 1.0 / td0], [0.0, -1.0 / te]])
    b = np.array([(xd - xdp) * Vq / xdp / td0, (p["E_fd0"] + ka * (p["V_ref"] - V)) / te])
    return A, b


def eigen_amplitudes(p, V, Vq, psi0, efd0):
    """psi(t) = sum_k a_k exp(lambda_k t) + psi_eq; returns (a by lambda, psi_eq)."""
    A, b = system(p, V, Vq)
    x_eq = np.linalg.solve(A, -b)
    lam, vec = np.linalg.eig(A)
    coef = np.linalg.solve(vec, np.array([psi0, efd0]) - x_eq)
    amps = {float(l): float(vec[0, k] * coef[k]) for k, l in enumerate(lam)}
    return amps, float(x_eq[0]), float(x_eq[1])


def coefficients(p, V, Vq, psi0, efd0):
    amps, psi_eq, _ = eigen_amplitudes(p, V, Vq, psi0, efd0)
    td = p["T_d0_prime"] * p["x_d_prime"] / p["x_d"]
    lam_d, lam_e = -1.0 / td, -1.0 / p["T_e"]
    a1 = next(v for l, v in amps.items() if abs(l - lam_d) < 1e-9 * abs(lam_d))
    a2 = next(v for l, v in amps.items() if abs(l - lam_e) < 1e-9 * abs(lam_e))
    return a1, a2, psi_eq


def integrate(p, stages, psi0, efd0, times):
    """stages: list of (t_start, V, Vq); returns psi at `times` (Radau)."""
    out = []
    x = np.array([psi0, efd0])
    t_prev = stages[0][0]
    bounds = [s[0] for s in stages[1:]] + [max(times) + 1e-9]
    for (t0, V, Vq), t1 in zip(stages, bounds):
        A, b = system(p, V, Vq)
        ts = [t for t in times if t0 <= t < t1]
        sol = solve_ivp(lambda t, y: A @ y + b, (t0, t1), x, method="Radau",
                        rtol=1e-12, atol=1e-14, t_eval=ts if ts else None, dense_output=True)
        if ts:
            out.extend(float(v) for v in sol.sol(ts)[0])
        x = sol.sol(t1)
    return out


def main():
    rep = {"x_d": 2.0, "x_d_prime": 0.3, "T_d0_prime": 6.0, "T_e": 0.5, "K_A": 50.0,
           "V_ref": 1.0, "E_fd0": 1.2}
    a1, a2, a3 = coefficients(rep, 0.5, 0.5, 1.05, 1.2)
    representative = {"params": rep, "V_stage": 0.5, "V_q": 0.5, "psi_start": 1.05, "E_fd_start": 1.2,
                      "A1": a1, "A2": a2, "A3": a3}

    rng = np.random.default_rng(20240601)
    draws = []
    for _ in range(8):
        xd = rng.uniform(0.8, 2.2)
        p = {"x_d": xd, "x_d_prime": rng.uniform(0.15, 0.4) * xd / 2.0 + 0.05,
             "T_d0_prime": rng.uniform(4.0, 9.0), "T_e": rng.uniform(0.02, 0.6),
             "K_A": rng.uniform(5.0, 200.0), "V_ref": rng.uniform(0.98, 1.05),
             "E_fd0": rng.uniform(1.5, 2.6)}
        psi0 = rng.uniform(0.95, 1.15)
        V_flt, V_clr = rng.uniform(0.2, 0.7), rng.uniform(0.8, 0.98)
        Vq_flt, Vq_clr = V_flt * rng.uniform(0.9, 1.0), V_clr * rng.uniform(0.9, 1.0)
        t_fault, T_clr = 0.1, 0.1 + rng.uniform(0.05, 0.2)
        times = [float(t) for t in np.linspace(t_fault, T_clr + 0.6, 25)]
        psi = integrate(p, [(t_fault, V_flt, Vq_flt), (T_clr, V_clr, Vq_clr)], psi0, p["E_fd0"], times)
        draws.append({"params": p, "psi0": psi0, "t_fault": t_fault, "T_clr": T_clr,
                      "V_flt": V_flt, "V_q_flt": Vq_flt, "V_clr": V_clr, "V_q_clr": Vq_clr,
                      "times": times, "psi": psi})

    json.dump({"representative": representative, "two_stage": draws}, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
