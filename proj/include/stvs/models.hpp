#pragma once

// Dynamic device models as pure functions: third-order synchronous machine
// with a first-order exciter, and a single-cage induction motor behind its
// transient reactance.
//
// Frame convention: the network phasor of a machine quantity with dq
// components (d, q) is (d + jq) * e^{j(delta - pi/2)}; the q axis leads the
// d axis and the internal EMF psi'_d lies on the q axis.

#include "stvs/case.hpp"
#include "stvs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace stvs {

struct Dq {
  double d = 0.0;
  double q = 0.0;
};

inline Dq to_dq(cplx v, double delta) {
  const cplx r = v * kJ * unit_phasor(-delta);
  return {r.real(), r.imag()};
}

inline cplx from_dq(Dq v, double delta) { return cplx(v.d, v.q) * (-kJ) * unit_phasor(delta); }

// ---------------------------------------------------------------------------
// Synchronous machine

struct StatorOutputs {
  double I_d = 0.0;
  double I_q = 0.0;
  double P_g = 0.0;
  double Q_g = 0.0;
};

// Stator algebra without armature resistance:
// V_q = psi'_d - x'_d I_d and V_d = x_q I_q.
inline StatorOutputs stator_algebra(double psi_d_prime, Dq V, const GeneratorParams& p) {
  StatorOutputs o;
  o.I_d = (psi_d_prime - V.q) / p.x_d_prime;
  o.I_q = V.d / p.x_q;
  o.P_g = V.d * o.I_d + V.q * o.I_q;
  o.Q_g = V.q * o.I_d - V.d * o.I_q;
  return o;
}

// Internal EMF E_q = psi'_d + (x_d - x'_d) I_d.
inline double internal_emf(double psi_d_prime, Dq V, const GeneratorParams& p) {
  return psi_d_prime + (p.x_d - p.x_d_prime) * (psi_d_prime - V.q) / p.x_d_prime;
}

struct ExciterSettings {
  double E_fd0 = 1.0;
  double V_ref = 1.0;
  double E_fd_max = 5.0;
  bool clamp = true;
};

struct GeneratorRates {
  double dpsi_d_prime = 0.0;
  double dE_fd = 0.0;
};

// T'_d0 dpsi'_d/dt = E_fd - E_q and T_e dE_fd/dt = E_fd0 + K_A (V_ref - V) - E_fd.
// With clamping enabled the exciter output is held inside [0, E_fd_max]
// (non-windup limit).
inline GeneratorRates generator_derivatives(double psi_d_prime, double E_fd, Dq V, const GeneratorParams& p,
                                            const ExciterSettings& ex) {
  GeneratorRates r;
  const double E_q = internal_emf(psi_d_prime, V, p);
  r.dpsi_d_prime = (E_fd - E_q) / p.T_d0_prime;
  const double v_mag = std::hypot(V.d, V.q);
  r.dE_fd = (ex.E_fd0 + p.K_A * (ex.V_ref - v_mag) - E_fd) / p.T_e;
  if (ex.clamp) {
    if (E_fd >= ex.E_fd_max && r.dE_fd > 0.0) r.dE_fd = 0.0;
    if (E_fd <= 0.0 && r.dE_fd < 0.0) r.dE_fd = 0.0;
  }
  return r;
}

// Rate of the spontaneous flux component: the same flux equation with the
// excitation voltage frozen at its pre-fault value.
inline double spontaneous_flux_rate(double psi_spn, Dq V, const GeneratorParams& p, double E_fd0) {
  return (E_fd0 - internal_emf(psi_spn, V, p)) / p.T_d0_prime;
}

struct QDecomposition {
  double Q_spon = 0.0;
  double Q_exc = 0.0;
};

// Q_spon = (V_q psi_spn - V_q^2)/x'_d - V_d^2/x_q and Q_exc = V_q dpsi/x'_d,
// where psi_spn + dpsi = psi'_d.
inline QDecomposition decompose_Q(double psi_spn, double delta_psi, Dq V, const GeneratorParams& p) {
  QDecomposition out;
  out.Q_spon = (V.q * psi_spn - V.q * V.q) / p.x_d_prime - V.d * V.d / p.x_q;
  out.Q_exc = V.q * delta_psi / p.x_d_prime;
  return out;
}

// Real 2x2 admittance of a salient machine in the network xy frame and its
// flux-to-current coefficients: the injected current is
//   [I_x; I_y] = psi'_d [C_x; C_y] - [[G_x, B_x], [B_y, G_y]] [V_x; V_y].
struct XyAdmittance {
  double G_x = 0.0;
  double G_y = 0.0;
  double B_x = 0.0;
  double B_y = 0.0;
  double C_x = 0.0;
  double C_y = 0.0;
};

inline XyAdmittance generator_xy_admittance(const GeneratorParams& p, double delta) {
  const double s = std::sin(delta);
  const double c = std::cos(delta);
  const double den = p.x_q * p.x_d_prime;
  XyAdmittance a;
  a.G_x = (p.x_q - p.x_d_prime) * s * c / den;
  a.G_y = -a.G_x;
  a.B_x = (p.x_d_prime + (p.x_q - p.x_d_prime) * s * s) / den;
  a.B_y = -(p.x_d_prime + (p.x_q - p.x_d_prime) * c * c) / den;
  a.C_x = s / p.x_d_prime;
  a.C_y = -c / p.x_d_prime;
  return a;
}

// ---------------------------------------------------------------------------
// Induction motor

inline double motor_transient_reactance(const MotorParams& m, double f0) {
  const double x_mu = m.X_mu(f0);
  return m.X_1 + m.X_2 * x_mu / (m.X_2 + x_mu);
}

struct MotorCoefficients {
  double X = 0.0;
  double X_prime = 0.0;
  double X_mu = 0.0;
  cplx C;  // steady-state ratio E'/V at slip s0
  double C_R = 0.0;
  double C_I = 0.0;
  std::optional<double> K_Z;  // absent when P_m == 0
};

inline MotorCoefficients motor_coefficients(const MotorParams& m, double f0, double s0, double V_LD0, double P_m) {
  MotorCoefficients k;
  k.X_mu = m.X_mu(f0);
  if (!(k.X_mu > 0.0)) throw ValidationError("motor.T_0_prime", "inconsistent motor parameters: X_mu <= 0");
  k.X = m.X_1 + k.X_mu;
  k.X_prime = m.X_1 + m.X_2 * k.X_mu / (m.X_2 + k.X_mu);
  const double ratio = (k.X - k.X_prime) / k.X_prime;
  k.C = -ratio / cplx(-1.0 - ratio, -2.0 * kPi * f0 * s0 * m.T_0_prime);
  k.C_R = k.C.real();
  k.C_I = k.C.imag();
  if (P_m != 0.0) k.K_Z = -k.C_I * V_LD0 * V_LD0 / (P_m * k.X_prime);
  return k;
}

struct MotorRates {
  cplx dE_prime;
  double dslip = 0.0;
  double T_elec = 0.0;
  cplx I;  // current drawn from the bus
};

// Transient motor model, current I drawn from the bus:
//   V = E' + jX' I
//   dE'/dt = -j w_s s E' - (E' - j(X - X') I) / T'_0
//   ds/dt  = (T_0 (1 - s)^k - Re(E' I*)) / (2 H_m)
// The steady state of the first equation is E' = C V with C from
// motor_coefficients.
inline MotorRates motor_derivatives(cplx E_prime, double slip, cplx V, const MotorParams& m, double f0,
                                    double T_0) {
  const double x_mu = m.X_mu(f0);
  const double X = m.X_1 + x_mu;
  const double Xp = m.X_1 + m.X_2 * x_mu / (m.X_2 + x_mu);
  const double ws = 2.0 * kPi * f0;
  MotorRates r;
  r.I = (V - E_prime) / (kJ * Xp);
  r.dE_prime = -kJ * ws * slip * E_prime - (E_prime - kJ * (X - Xp) * r.I) / m.T_0_prime;
  r.T_elec = (E_prime * std::conj(r.I)).real();
  const double speed = std::max(0.0, 1.0 - slip);
  r.dslip = (T_0 * std::pow(speed, m.load_torque_exponent) - r.T_elec) / (2.0 * m.H_m);
  return r;
}

// Steady-state electrical power drawn at slip s and terminal voltage V.
inline double motor_steady_power(const MotorParams& m, double f0, double s, cplx V) {
  const auto k = motor_coefficients(m, f0, s, std::abs(V), 0.0);
  const cplx E = k.C * V;
  const cplx I = (V - E) / (kJ * k.X_prime);
  return (V * std::conj(I)).real();
}

}  // namespace stvs
