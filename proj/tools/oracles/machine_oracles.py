#!/usr/bin/env python3
"""Phasor-construction oracles for machine quantities.

- initial flux: E_Q = V + j x_q I locates the q axis; psi'_d = V_q + x'_d I_d.
- xy admittance: injected current of a salient machine built from the dq
  stator equations, differentiated numerically with respect to V_x, V_y
  and the flux.
- induction motor: steady state of the transient model found by
  integrating the rotor-circuit equation to rest; E'/V gives C.

Usage: python3 tools/oracles/machine_oracles.py > tests/data/machine_oracles.json
"""
import cmath
import json
import math
import sys

import numpy as np
from scipy.integrate import solve_ivp


def initial_flux(P, Q, V, x_q, x_dp):
    Vc = complex(V, 0.0)
    I = (complex(P, Q) / Vc).conjugate()
    EQ = Vc + 1j * x_q * I
    q_axis = EQ / abs(EQ)
    d_axis = q_axis * -1j
    V_q = (Vc * q_axis.conjugate()).real
    I_d = (I * d_axis.conjugate()).real
    return V_q + x_dp * I_d


def injected_current(psi, Vx, Vy, delta, x_dp, x_q):
    # dq frame: network = (d + j q) e^{j(delta - pi/2)}
    rot = cmath.exp(1j * (delta - math.pi / 2))
    vdq = complex(Vx, Vy) / rot
    V_d, V_q = vdq.real, vdq.imag
    I_d = (psi - V_q) / x_dp
    I_q = V_d / x_q
    I = complex(I_d, I_q) * rot
    return np.array([I.real, I.imag])


def xy_admittance(delta, x_dp, x_q):
    h = 1e-6
    base = injected_current(1.0, 0.0, 0.0, delta, x_dp, x_q)
    C = (injected_current(1.0 + h, 0.0, 0.0, delta, x_dp, x_q) - injected_current(1.0 - h, 0.0, 0.0, delta, x_dp, x_q)) / (2 * h)
    col_x = (injected_current(1.0, h, 0.0, delta, x_dp, x_q) - injected_current(1.0, -h, 0.0, delta, x_dp, x_q)) / (2 * h)
    col_y = (injected_current(1.0, 0.0, h, delta, x_dp, x_q) - injected_current(1.0, 0.0, -h, delta, x_dp, x_q)) / (2 * h)
    del base
    # I = psi C - M V  =>  M = -[col_x col_y]
    return {"delta": delta, "x_d_prime": x_dp, "x_q": x_q,
            "G_x": -col_x[0], "B_x": -col_y[0], "B_y": -col_x[1], "G_y": -col_y[1],
            "C_x": C[0], "C_y": C[1]}


def motor_steady(m, f0, s0, V):
    X_mu = 2 * math.pi * f0 * m["T_0_prime"] * m["R_2"] - m["X_2"]
    X = m["X_1"] + X_mu
    Xp = m["X_1"] + m["X_2"] * X_mu / (m["X_2"] + X_mu)
    ws = 2 * math.pi * f0

    def rhs(t, y):
        E = complex(y[0], y[1])
        I = (V - E) / (1j * Xp)
        dE = -1j * ws * s0 * E - (E - 1j * (X - Xp) * I) / m["T_0_prime"]
        return [dE.real, dE.imag]

    sol = solve_ivp(rhs, (0.0, 40 * m["T_0_prime"]), [0.0, 0.0], method="Radau", rtol=1e-12, atol=1e-14)
    E = complex(sol.y[0, -1], sol.y[1, -1])
    C = E / V
    I = (V - E) / (1j * Xp)
    P = (V * I.conjugate()).real
    return {"X_mu": X_mu, "X": X, "X_prime": Xp, "C_R": C.real, "C_I": C.imag, "P": P,
            "K_Z": -C.imag * abs(V) ** 2 / (P * Xp)}


def motor_formula(m, f0, s0):
    X_mu = 2 * math.pi * f0 * m["T_0_prime"] * m["R_2"] - m["X_2"]
    X = m["X_1"] + X_mu
    Xp = m["X_1"] + m["X_2"] * X_mu / (m["X_2"] + X_mu)
    r = (X - Xp) / Xp
    C = -r / complex(-1.0 - r, -2 * math.pi * f0 * s0 * m["T_0_prime"])
    return {"X_mu": X_mu, "X": X, "X_prime": Xp, "C_R": C.real, "C_I": C.imag}


def generator_step(p, V_before, V_after, t_end=10.0):
    """psi, E_fd after a terminal-voltage step (V_d = 0), from steady state."""
    xd, xdp, td0, te, ka = p["x_d"], p["x_d_prime"], p["T_d0_prime"], p["T_e"], p["K_A"]
    psi0 = p["psi0"]
    Eq0 = psi0 + (xd - xdp) * (psi0 - V_before) / xdp

    def rhs(t, y):
        psi, efd = y
        Eq = psi + (xd - xdp) * (psi - V_after) / xdp
        return [(efd - Eq) / td0, (Eq0 + ka * (V_before - V_after) - efd) / te]

    ts = [float(t) for t in np.linspace(0.0, t_end, 11)]
    sol = solve_ivp(rhs, (0.0, t_end), [psi0, Eq0], method="Radau", rtol=1e-12, atol=1e-14, t_eval=ts)
    return {"params": p, "V_before": V_before, "V_after": V_after, "E_fd0": Eq0, "times": ts,
            "psi": [float(v) for v in sol.y[0]], "E_fd": [float(v) for v in sol.y[1]]}


def motor_step(m, f0, s0, V0, V1, T_0, k, t_end=1.0):
    X_mu = 2 * math.pi * f0 * m["T_0_prime"] * m["R_2"] - m["X_2"]
    X = m["X_1"] + X_mu
    Xp = m["X_1"] + m["X_2"] * X_mu / (m["X_2"] + X_mu)
    ws = 2 * math.pi * f0
    r = (X - Xp) / Xp
    C = -r / complex(-1.0 - r, -ws * s0 * m["T_0_prime"])
    E0 = C * V0

    def rhs(t, y):
        E = complex(y[0], y[1])
        s = y[2]
        I = (V1 - E) / (1j * Xp)
        dE = -1j * ws * s * E - (E - 1j * (X - Xp) * I) / m["T_0_prime"]
        Te = (E * I.conjugate()).real
        ds = (T_0 * (1.0 - s) ** k - Te) / (2 * m["H_m"])
        return [dE.real, dE.imag, ds]

    ts = [float(t) for t in np.linspace(0.0, t_end, 11)]
    sol = solve_ivp(rhs, (0.0, t_end), [E0.real, E0.imag, s0], method="Radau", rtol=1e-12, atol=1e-14, t_eval=ts)
    return {"params": m, "f0": f0, "s0": s0, "V0": [V0.real, V0.imag], "V1": [V1.real, V1.imag], "T_0": T_0,
            "k": k, "E0": [E0.real, E0.imag], "times": ts,
            "E_re": [float(v) for v in sol.y[0]], "E_im": [float(v) for v in sol.y[1]],
            "slip": [float(v) for v in sol.y[2]]}


def main():
    rng = np.random.default_rng(7)
    flux = []
    for _ in range(20):
        P, Q = rng.uniform(0.0, 9.0), rng.uniform(-1.0, 3.0)
        V = rng.uniform(0.95, 1.08)
        x_q = rng.uniform(0.02, 0.7)
        x_dp = rng.uniform(0.2, 0.9) * x_q
        flux.append({"P": P, "Q": Q, "V": V, "x_q": x_q, "x_d_prime": x_dp,
                     "psi": initial_flux(P, Q, V, x_q, x_dp)})
    xy = [xy_admittance(d, xdp, xq) for d, xdp, xq in
          [(0.3, 0.05, 0.24), (1.1, 0.3, 1.7), (-0.7, 0.031, 0.069), (2.5, 0.132, 0.62),
           (math.pi / 6, 0.25, 1.7)]]
    motors = []
    for m, s0, V in [({"X_1": 0.1, "X_2": 0.08, "R_2": 0.012, "T_0_prime": 0.5}, 0.02, complex(1.0, 0.0)),
                     ({"X_1": 0.15, "X_2": 0.12, "R_2": 0.02, "T_0_prime": 0.4}, 0.035, cmath.rect(0.97, -0.3))]:
        r = motor_steady(m, 60.0, s0, V)
        motors.append({"params": m, "f0": 60.0, "s0": s0, "V": [V.real, V.imag], **r})
    rep = {"X_1": 0.1, "X_2": 0.12, "R_2": 0.02, "T_0_prime": 3.12 / (2 * math.pi * 60.0 * 0.02)}
    representative = {"params": rep, "f0": 60.0, "s0": 0.02, **motor_formula(rep, 60.0, 0.02)}
    gen_step = generator_step({"x_d": 1.8, "x_d_prime": 0.3, "T_d0_prime": 6.0, "T_e": 0.2, "K_A": 5.0,
                               "psi0": 1.1}, 1.0, 0.9)
    mstep_params = {"X_1": 0.1, "X_2": 0.08, "R_2": 0.012, "T_0_prime": 0.5, "H_m": 0.5}
    ms = motor_formula(mstep_params, 60.0, 0.02)
    V0 = complex(1.0, 0.0)
    C = complex(ms["C_R"], ms["C_I"])
    I0 = (V0 - C * V0) / (1j * ms["X_prime"])
    T_0 = ((C * V0) * I0.conjugate()).real / (1.0 - 0.02) ** 2
    mot_step = motor_step(mstep_params, 60.0, 0.02, V0, complex(0.8, 0.0), T_0, 2.0)
    json.dump({"initial_flux": flux, "xy_admittance": xy, "motor": motors, "motor_representative": representative,
               "generator_step": gen_step, "motor_step": mot_step}, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
