#pragma once

// Closed-form flux linkage under a stepped terminal voltage. Within one
// stage the terminal voltage is held at V_stage, so the flux/exciter pair is
// linear with constant forcing:
//   T'_d0 dpsi/dt = E_fd - E_q,   T_e dE_fd/dt = E_fd0 + K_A (V_ref - V_stage) - E_fd
// and the flux is A1 e^{-t/T'_d} + A2 e^{-t/T_e} + A3.

#include "stvs/case.hpp"
#include "stvs/error.hpp"
#include "stvs/linalg.hpp"
#include "stvs/models.hpp"
#include "stvs/network.hpp"
#include "stvs/powerflow.hpp"
#include "stvs/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace stvs {

struct StageInput {
  double E_fd0 = 1.0;        // pre-fault excitation
  double V_ref = 1.0;        // pre-fault terminal magnitude
  double V_stage = 1.0;      // terminal magnitude held in this stage
  double V_q = 1.0;          // q component of the stage voltage
  double psi_start = 1.0;    // flux at the stage boundary
  double psi_spn_start = 1.0;
  double E_fd_start = 1.0;   // exciter output at the stage boundary
};

struct FluxCoefficients {
  double A1 = 0.0, A2 = 0.0, A3 = 0.0;
  // Auxiliary set: A4 = A'1, A5 = A2, A6 = A3 - A8, A7 = psi_start - A8,
  // A8 = equilibrium of the flux with E_fd frozen at E_fd0.
  double A4 = 0.0, A5 = 0.0, A6 = 0.0, A7 = 0.0, A8 = 0.0;
  // Reactive-power set: spontaneous flux = Ap4 e^{-t/T'_d} + Ap5, control
  // flux = Ap1 e^{-t/T'_d} + Ap2 e^{-t/T_e} + Ap3.
  double Ap1 = 0.0, Ap2 = 0.0, Ap3 = 0.0, Ap4 = 0.0, Ap5 = 0.0;
  double T_d_prime = 1.0;
  double T_e = 1.0;
  double psi_start = 0.0;
  double psi_spn_start = 0.0;
  double E_fd_start = 0.0;
  double E_fd_target = 0.0;  // exciter asymptote in this stage
  // T_e == T'_d: the T_e exponential degenerates to B t e^{-t/T'_d}.
  bool repeated_root = false;
  double B = 0.0;
};

inline FluxCoefficients flux_coefficients(const GeneratorParams& p, const StageInput& in) {
  FluxCoefficients c;
  c.T_d_prime = p.T_d_prime();
  c.T_e = p.T_e;
  c.psi_start = in.psi_start;
  c.psi_spn_start = in.psi_spn_start;
  c.E_fd_start = in.E_fd_start;
  c.E_fd_target = in.E_fd0 + p.K_A * (in.V_ref - in.V_stage);
  const double xd = p.x_d, xdp = p.x_d_prime;
  const double dE = in.E_fd_start - c.E_fd_target;

  c.A3 = (in.V_q * (xd - xdp) + c.E_fd_target * xdp) / xd;
  const double den = xd * p.T_e - p.T_d0_prime * xdp;
  if (std::abs(den) <= 1e-9 * std::max(xd * p.T_e, p.T_d0_prime * xdp)) {
    c.repeated_root = true;
    c.A2 = 0.0;
    c.B = dE / p.T_d0_prime;
  } else {
    c.A2 = dE * p.T_e * xdp / den;
  }
  c.A1 = in.psi_start - c.A2 - c.A3;

  c.A8 = in.V_q + (in.E_fd0 - in.V_q) * xdp / xd;
  c.A7 = in.psi_start - c.A8;
  c.A6 = c.A3 - c.A8;
  c.A5 = c.A2;
  c.Ap4 = in.psi_spn_start - c.A8;
  c.Ap5 = c.A8;
  c.Ap1 = c.A1 - c.Ap4;
  c.Ap2 = c.A2;
  c.Ap3 = c.A6;
  c.A4 = c.Ap1;
  return c;
}

// First-stage convenience: the stage starts from the pre-fault steady state.
inline FluxCoefficients flux_coefficients(const GeneratorParams& p, double E_fd0, double V_0, double V_stage,
                                          double V_q_stage, double psi_start) {
  return flux_coefficients(p, StageInput{E_fd0, V_0, V_stage, V_q_stage, psi_start, psi_start, E_fd0});
}

// Written around psi_start so that t = 0 reproduces it exactly.
inline double analytic_flux(const FluxCoefficients& c, double t) {
  const double e1 = std::expm1(-t / c.T_d_prime);
  double psi = c.psi_start + c.A1 * e1;
  if (c.repeated_root)
    psi += c.B * t * std::exp(-t / c.T_d_prime);
  else
    psi += c.A2 * std::expm1(-t / c.T_e);
  return psi;
}

inline double analytic_spontaneous_flux(const FluxCoefficients& c, double t) {
  return c.psi_spn_start + c.Ap4 * std::expm1(-t / c.T_d_prime);
}

inline double analytic_control_flux(const FluxCoefficients& c, double t) {
  const double e1 = std::expm1(-t / c.T_d_prime);
  double d = (c.psi_start - c.psi_spn_start) + c.Ap1 * e1;
  if (c.repeated_root)
    d += c.B * t * std::exp(-t / c.T_d_prime);
  else
    d += c.Ap2 * std::expm1(-t / c.T_e);
  return d;
}

inline double analytic_exciter(const FluxCoefficients& c, double t) {
  return c.E_fd_target + (c.E_fd_start - c.E_fd_target) * std::exp(-t / c.T_e);
}

struct AnalyticQ {
  double Q_spon = 0.0;
  double Q_exc = 0.0;
  double Q_g = 0.0;
};

inline AnalyticQ analytic_Q(const FluxCoefficients& c, Dq V, const GeneratorParams& p, double t) {
  AnalyticQ q;
  const double e1 = std::exp(-t / c.T_d_prime);
  q.Q_spon = V.q / p.x_d_prime * (c.Ap4 * e1 + c.Ap5) - (V.q * V.q / p.x_d_prime + V.d * V.d / p.x_q);
  q.Q_exc = V.q * analytic_control_flux(c, t) / p.x_d_prime;
  q.Q_g = stator_algebra(analytic_flux(c, t), V, p).Q_g;
  return q;
}

// Window mean of R psi(t) over [0, delta_T] in closed form.
inline double analytic_vrc_term(const FluxCoefficients& c, double R, double delta_T) {
  if (!(delta_T > 0.0)) throw ValidationError("delta_T", "must be positive");
  const double td = c.T_d_prime;
  double integral = c.A1 * -std::expm1(-delta_T / td) * td + c.A3 * delta_T;
  if (c.repeated_root)
    integral += c.B * (td * td - td * (delta_T + td) * std::exp(-delta_T / td));
  else
    integral += c.A2 * -std::expm1(-delta_T / c.T_e) * c.T_e;
  return R / delta_T * integral;
}

// ---------------------------------------------------------------------------
// Stepped profile

// First-order motor relaxation inside one piece:
// |E'|(t) = target + (start - target) e^{-t/tau}.
struct MotorRelaxation {
  double start = 0.0;
  double target = 0.0;
  double tau = 1.0;
};

struct ProfilePiece {
  StageTag tag = StageTag::flt;
  double t_start = 0.0;
  double t_end = 0.0;  // the last piece extends indefinitely
  std::vector<double> V;             // per generator terminal magnitude
  std::vector<Dq> V_dq;              // per generator, frozen pre-fault delta
  std::vector<FluxCoefficients> coeffs;
  std::vector<MotorRelaxation> motors;  // per motor
};

struct SteppedProfile {
  std::vector<int> generator_buses;
  std::vector<double> V_0;
  std::vector<double> V_flt, V_clr;
  std::vector<Dq> V_dq_flt, V_dq_clr;
  std::vector<double> psi_0;
  double t_fault = 0.0;
  double T_clr = 0.0;
  std::vector<ProfilePiece> pieces;
};

struct ProfileOptions {
  int pieces_per_stage = 1;  // 1: the plain two-stage profile
  double post_window = 0.4;  // length of the post-clearing piece set (s)
};

namespace detail {

// Motor internal voltage relaxes toward |C| V_bus with the short-circuit
// rotor constant T'_0 X'/X; the angle stays at its pre-fault value.
inline MotorRelaxation relax_motor(const MotorInit& mi, double E_start, double V_bus) {
  return {E_start, std::abs(mi.coeffs.C) * V_bus, mi.params.T_0_prime * mi.coeffs.X_prime / mi.coeffs.X};
}

inline double relaxed_value(const MotorRelaxation& m, double dt) {
  return m.target + (m.start - m.target) * std::exp(-dt / m.tau);
}

}  // namespace detail

inline SteppedProfile stepped_profile(const SystemCase& c, const DynamicInit& init, const FaultScenario& s,
                                      const RMatrix& R_flt, const RMatrix& R_clr, const ProfileOptions& opt = {}) {
  if (opt.pieces_per_stage < 1) throw ValidationError("pieces_per_stage", "must be >= 1");
  const auto devices = collect_devices(c, init);
  const std::size_t ng = init.generators.size();
  const std::size_t nd = devices.size();

  SteppedProfile prof;
  prof.t_fault = s.t_fault;
  prof.T_clr = s.T_clr;
  std::vector<double> flux(nd);  // generator psi and motor |E'|
  std::vector<double> psi_spn(ng), E_fd(ng);
  for (std::size_t j = 0; j < nd; ++j) flux[j] = devices[j].flux0;
  for (std::size_t k = 0; k < ng; ++k) {
    const auto& gi = init.generators[k];
    prof.generator_buses.push_back(c.generators[gi.index].bus);
    prof.V_0.push_back(gi.V_ref);
    prof.psi_0.push_back(gi.psi_d0_prime);
    psi_spn[k] = gi.psi_d0_prime;
    E_fd[k] = gi.E_fd0;
  }

  const auto bus_voltage = [&](const RMatrix& R, std::size_t bus) {
    cplx v(0.0, 0.0);
    for (std::size_t j = 0; j < nd; ++j)
      v += R.response_at(static_cast<Eigen::Index>(bus), static_cast<Eigen::Index>(j)) * flux[j];
    return v;
  };

  const double fault_len = s.T_clr - s.t_fault;
  for (int stage = 0; stage < 2; ++stage) {
    const RMatrix& R = stage == 0 ? R_flt : R_clr;
    const double t0 = stage == 0 ? s.t_fault : s.T_clr;
    const double len = (stage == 0 ? fault_len : opt.post_window) / opt.pieces_per_stage;
    for (int piece = 0; piece < opt.pieces_per_stage; ++piece) {
      ProfilePiece pc;
      pc.tag = R.tag;
      pc.t_start = t0 + piece * len;
      pc.t_end = pc.t_start + len;
      for (std::size_t j = ng; j < nd; ++j)
        pc.motors.push_back(
            detail::relax_motor(init.motors[devices[j].source], flux[j], std::abs(bus_voltage(R, devices[j].bus))));
      for (std::size_t k = 0; k < ng; ++k) {
        const cplx v = bus_voltage(R, devices[k].bus);
        const Dq vdq = to_dq(v, devices[k].angle);
        pc.V.push_back(std::abs(v));
        pc.V_dq.push_back(vdq);
        const GeneratorParams& p = c.generators[init.generators[k].index];
        const StageInput in{init.generators[k].E_fd0, init.generators[k].V_ref, std::abs(v), vdq.q, flux[k],
                            psi_spn[k], E_fd[k]};
        pc.coeffs.push_back(flux_coefficients(p, in));
      }
      if (piece == 0) {
        (stage == 0 ? prof.V_flt : prof.V_clr) = pc.V;
        (stage == 0 ? prof.V_dq_flt : prof.V_dq_clr) = pc.V_dq;
      }
      // Advance every device to the end of the piece.
      for (std::size_t k = 0; k < ng; ++k) {
        flux[k] = analytic_flux(pc.coeffs[k], len);
        psi_spn[k] = analytic_spontaneous_flux(pc.coeffs[k], len);
        E_fd[k] = analytic_exciter(pc.coeffs[k], len);
      }
      for (std::size_t j = ng; j < nd; ++j) flux[j] = detail::relaxed_value(pc.motors[j - ng], len);
      prof.pieces.push_back(std::move(pc));
    }
  }
  prof.pieces.back().t_end = std::numeric_limits<double>::infinity();
  return prof;
}

inline const ProfilePiece* profile_piece(const SteppedProfile& prof, double t) {
  if (t < prof.t_fault) return nullptr;
  for (const auto& pc : prof.pieces)
    if (t < pc.t_end) return &pc;
  return &prof.pieces.back();
}

inline double profile_flux(const SteppedProfile& prof, std::size_t gen, double t) {
  const ProfilePiece* pc = profile_piece(prof, t);
  if (!pc) return prof.psi_0[gen];
  return analytic_flux(pc->coeffs[gen], t - pc->t_start);
}

// Post-clearing coefficients of the first piece after clearing.
inline const ProfilePiece& clearing_piece(const SteppedProfile& prof) {
  for (const auto& pc : prof.pieces)
    if (pc.tag == StageTag::clr) return pc;
  return prof.pieces.back();
}

// ---------------------------------------------------------------------------
// Analytic vs simulated flux

struct FluxErrorStats {
  int bus = 0;
  double max_fault = 0.0;   // relative, during the fault
  double mean_fault = 0.0;
  double max_post = 0.0;    // relative, window after clearing
  double mean_post = 0.0;
};

struct FluxComparison {
  std::string scenario_id;
  double window = 0.4;
  std::vector<FluxErrorStats> generators;
  double max_fault = 0.0;
  double max_post = 0.0;
};

inline FluxComparison compare_flux(const SteppedProfile& prof, const Trajectory& tr, const std::string& scenario_id,
                                   double window = 0.4) {
  FluxComparison out;
  out.scenario_id = scenario_id;
  out.window = window;
  for (std::size_t k = 0; k < prof.generator_buses.size(); ++k) {
    FluxErrorStats st;
    st.bus = prof.generator_buses[k];
    const auto g = tr.generator_position(st.bus);
    int n_f = 0, n_p = 0;
    for (std::size_t r = 0; r < tr.size(); ++r) {
      const double t = tr.t[r];
      const double sim = tr.generators[r][g].psi;
      const double err = std::abs(profile_flux(prof, k, t) - sim) / std::abs(sim);
      if (tr.stage[r] == StageTag::flt) {
        st.max_fault = std::max(st.max_fault, err);
        st.mean_fault += err;
        ++n_f;
      } else if (tr.stage[r] == StageTag::clr && t <= prof.T_clr + window + 1e-12) {
        st.max_post = std::max(st.max_post, err);
        st.mean_post += err;
        ++n_p;
      }
    }
    if (n_f) st.mean_fault /= n_f;
    if (n_p) st.mean_post /= n_p;
    out.max_fault = std::max(out.max_fault, st.max_fault);
    out.max_post = std::max(out.max_post, st.max_post);
    out.generators.push_back(st);
  }
  return out;
}

inline json comparison_to_json(const FluxComparison& cmp) {
  json j{{"scenario_id", cmp.scenario_id}, {"window", cmp.window}, {"max_error_fault", cmp.max_fault},
         {"max_error_post", cmp.max_post}, {"generators", json::array()}};
  for (const auto& g : cmp.generators)
    j["generators"].push_back({{"bus", g.bus},
                               {"max_error_fault", g.max_fault},
                               {"mean_error_fault", g.mean_fault},
                               {"max_error_post", g.max_post},
                               {"mean_error_post", g.mean_post}});
  return j;
}

}  // namespace stvs
