#pragma once

// Newton-Raphson AC power flow (polar form) and initialization of the
// dynamic device states from the solved operating point.

#include "stvs/admittance.hpp"
#include "stvs/case.hpp"
#include "stvs/error.hpp"
#include "stvs/linalg.hpp"
#include "stvs/models.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

namespace stvs {

struct PowerFlowOptions {
  double tolerance = 1e-8;
  int max_iterations = 30;
  bool enforce_q_limits = true;
};

struct PowerFlowSolution {
  std::vector<cplx> V;       // per bus, case order
  std::vector<double> P_g;   // per generator, case order (0 when out of service)
  std::vector<double> Q_g;
  double mismatch = 0.0;     // max |dP|, |dQ| at the last iterate
  int iterations = 0;        // Newton updates over all re-solves
  int final_iterations = 0;  // Newton updates of the last solve
  std::vector<int> limited_buses;  // PV buses converted to PQ at Q_max
};

namespace detail {

struct PfBus {
  BusKind kind = BusKind::pq;
  double P_spec = 0.0;
  double Q_spec = 0.0;
};

inline std::vector<PfBus> pf_specs(const SystemCase& c, const std::vector<int>& limited) {
  std::vector<PfBus> specs(c.buses.size());
  for (std::size_t k = 0; k < c.buses.size(); ++k) {
    specs[k].kind = c.buses[k].kind;
    specs[k].P_spec = -c.buses[k].P_load;
    specs[k].Q_spec = -c.buses[k].Q_load;
  }
  std::vector<bool> regulated(c.buses.size(), false);
  for (const GeneratorParams& g : c.generators) {
    if (!g.status) continue;
    const auto k = c.bus_index(g.bus);
    if (specs[k].kind != BusKind::slack) specs[k].P_spec += g.P_g0;
    if (g.Q_g0) {
      specs[k].Q_spec += *g.Q_g0;
    } else {
      regulated[k] = true;
    }
  }
  for (std::size_t k = 0; k < c.buses.size(); ++k) {
    if (specs[k].kind == BusKind::pv && !regulated[k]) specs[k].kind = BusKind::pq;
  }
  for (int bus : limited) {
    const auto k = c.bus_index(bus);
    const auto gi = c.find_generator(bus);
    specs[k].kind = BusKind::pq;
    specs[k].Q_spec += c.generators[*gi].Q_max;
  }
  return specs;
}

// Plain Newton iterations from `V`; returns the number of updates.
inline int newton_solve(const CMatrix& Y, const std::vector<PfBus>& specs, const SystemCase& c, CVector& V,
                        const PowerFlowOptions& opt, double& mismatch) {
  const auto n = static_cast<Eigen::Index>(specs.size());
  std::vector<Eigen::Index> ang, mag;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (specs[k].kind != BusKind::slack) ang.push_back(k);
    if (specs[k].kind == BusKind::pq) mag.push_back(k);
  }
  const auto na = static_cast<Eigen::Index>(ang.size());
  const auto nm = static_cast<Eigen::Index>(mag.size());
  const auto dim = na + nm;

  auto residual = [&](const CVector& v, RVec& f) {
    const CVector S = v.cwiseProduct((Y * v).conjugate());
    f.resize(dim);
    for (Eigen::Index a = 0; a < na; ++a) f(a) = specs[ang[a]].P_spec - S(ang[a]).real();
    for (Eigen::Index m = 0; m < nm; ++m) f(na + m) = specs[mag[m]].Q_spec - S(mag[m]).imag();
    return f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  };

  RVec f;
  mismatch = residual(V, f);
  int it = 0;
  while (mismatch > opt.tolerance) {
    if (it >= opt.max_iterations) {
      std::ostringstream os;
      os << "power flow did not converge after " << it << " iterations (mismatch " << mismatch << ")";
      throw NumericalError(os.str());
    }
    // dS/dtheta and dS/d|V| in complex form.
    const CVector I = Y * V;
    CVector Vn(n);
    for (Eigen::Index k = 0; k < n; ++k) Vn(k) = V(k) / std::abs(V(k));
    const CMatrix dS_dth = kJ * V.asDiagonal() * (CMatrix(I.asDiagonal()) - Y * V.asDiagonal()).conjugate();
    const CMatrix dS_dvm = V.asDiagonal() * (Y * Vn.asDiagonal()).conjugate() + CMatrix(I.conjugate().asDiagonal()) * Vn.asDiagonal();

    RMat J(dim, dim);
    for (Eigen::Index r = 0; r < na; ++r) {
      for (Eigen::Index a = 0; a < na; ++a) J(r, a) = dS_dth(ang[r], ang[a]).real();
      for (Eigen::Index m = 0; m < nm; ++m) J(r, na + m) = dS_dvm(ang[r], mag[m]).real();
    }
    for (Eigen::Index r = 0; r < nm; ++r) {
      for (Eigen::Index a = 0; a < na; ++a) J(na + r, a) = dS_dth(mag[r], ang[a]).imag();
      for (Eigen::Index m = 0; m < nm; ++m) J(na + r, na + m) = dS_dvm(mag[r], mag[m]).imag();
    }
    Eigen::PartialPivLU<RMat> lu(J);
    if (!(lu.rcond() > 1e-14)) {
      const auto piv = weakest_pivot(lu);
      const auto bus = piv < na ? ang[piv] : mag[piv - na];
      throw NumericalError("singular power-flow Jacobian at bus " + std::to_string(c.buses[bus].id));
    }
    const RVec dx = lu.solve(f);
    for (Eigen::Index a = 0; a < na; ++a) {
      const auto k = ang[a];
      V(k) = std::polar(std::abs(V(k)), std::arg(V(k)) + dx(a));
    }
    for (Eigen::Index m = 0; m < nm; ++m) {
      const auto k = mag[m];
      V(k) = std::polar(std::abs(V(k)) + dx(na + m), std::arg(V(k)));
    }
    ++it;
    mismatch = residual(V, f);
  }
  return it;
}

}  // namespace detail

// Solves the steady state. PV buses whose generator would exceed Q_max are
// converted to PQ at Q_max and the flow is re-solved (no hysteresis).
inline PowerFlowSolution solve_power_flow(const SystemCase& c, const PowerFlowOptions& opt = {}) {
  const CMatrix Y = bus_admittance(c);
  const auto n = static_cast<Eigen::Index>(c.buses.size());

  PowerFlowSolution sol;
  CVector V(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Bus& b = c.buses[k];
    V(k) = (b.kind != BusKind::pq && b.V_set) ? cplx(*b.V_set, 0.0) : cplx(1.0, 0.0);
  }
  // A PV bus without a regulating unit starts flat at 1 pu like a PQ bus.
  for (;;) {
    const auto specs = detail::pf_specs(c, sol.limited_buses);
    for (Eigen::Index k = 0; k < n; ++k)
      if (specs[k].kind != BusKind::pq) V(k) = std::polar(*c.buses[k].V_set, std::arg(V(k)));
    sol.final_iterations = detail::newton_solve(Y, specs, c, V, opt, sol.mismatch);
    sol.iterations += sol.final_iterations;
    if (!opt.enforce_q_limits) break;

    const CVector S = V.cwiseProduct((Y * V).conjugate());
    bool changed = false;
    for (const GeneratorParams& g : c.generators) {
      if (!g.status || g.Q_g0) continue;
      const auto k = c.bus_index(g.bus);
      if (specs[k].kind != BusKind::pv) continue;
      const double q = S(k).imag() + c.buses[k].Q_load;
      if (q > g.Q_max + opt.tolerance) {
        sol.limited_buses.push_back(g.bus);
        changed = true;
      }
    }
    if (!changed) break;
  }

  const CVector S = V.cwiseProduct((Y * V).conjugate());
  sol.V.assign(V.data(), V.data() + n);
  const auto specs = detail::pf_specs(c, sol.limited_buses);
  sol.P_g.assign(c.generators.size(), 0.0);
  sol.Q_g.assign(c.generators.size(), 0.0);
  for (std::size_t gi = 0; gi < c.generators.size(); ++gi) {
    const GeneratorParams& g = c.generators[gi];
    if (!g.status) continue;
    const auto k = c.bus_index(g.bus);
    sol.P_g[gi] = specs[k].kind == BusKind::slack ? S(k).real() + c.buses[k].P_load : g.P_g0;
    if (g.Q_g0) {
      sol.Q_g[gi] = *g.Q_g0;
    } else if (std::find(sol.limited_buses.begin(), sol.limited_buses.end(), g.bus) != sol.limited_buses.end()) {
      sol.Q_g[gi] = g.Q_max;
    } else {
      sol.Q_g[gi] = S(k).imag() + c.buses[k].Q_load;
    }
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Initial flux linkage

// Closed form of the pre-fault d-axis transient flux linkage in terms of the
// generator's terminal operating point.
inline double initial_flux(double P_g0, double Q_g0, double V_g0, double x_q, double x_d_prime) {
  if (!(V_g0 > 0.0)) throw ValidationError("V_g0", "terminal voltage must be positive");
  const double V2 = V_g0 * V_g0;
  const double num = V_g0 * (V2 + Q_g0 * x_q) + (P_g0 * P_g0 * x_q + V2 * Q_g0 + Q_g0 * Q_g0 * x_q) * x_d_prime / V_g0;
  const double den = std::hypot(P_g0 * x_q, V2 + Q_g0 * x_q);
  return num / den;
}

struct GeneratorInit {
  std::size_t index = 0;  // into SystemCase::generators
  double delta = 0.0;
  double omega = 1.0;
  double E_q0 = 0.0;
  double E_fd0 = 0.0;
  double psi_d0_prime = 0.0;
  double V_ref = 0.0;
  double P_g0 = 0.0;
  double Q_g0 = 0.0;
  Dq V_dq;
  Dq I_dq;
};

struct MotorInit {
  MotorParams params;  // on system base
  double s0 = 0.0;
  cplx E_prime0;
  double P_m = 0.0;   // electrical (= mechanical) power at s0
  double Q = 0.0;     // reactive power drawn at s0
  double T_0 = 0.0;   // mechanical torque coefficient, T_mech = T_0 (1 - s)^k
  MotorCoefficients coeffs;
};

struct DynamicInit {
  std::vector<GeneratorInit> generators;  // in-service units only
  std::vector<MotorInit> motors;
  std::vector<cplx> load_admittance;      // static load part per bus
};

struct InitOptions {
  double slip_floor = 1e-4;
  double flux_crosscheck_tol = 1e-10;
};

namespace detail {

inline MotorInit init_motor(const MotorParams& m, double f0, cplx V, double P_target, const InitOptions& opt) {
  MotorInit mi;
  mi.params = m;
  const auto power = [&](double s) { return motor_steady_power(m, f0, s, V); };
  const double s_max = 1.0 - 1e-9;
  // Peak of the power-slip curve bounds the stable branch.
  const auto peak = boost::math::tools::brent_find_minima([&](double s) { return -power(s); }, opt.slip_floor, s_max, 52);
  const double s_peak = peak.first;
  const double p_peak = -peak.second;
  if (P_target > p_peak)
    throw NumericalError("motor on bus " + std::to_string(m.bus) + " stalls at initialization (load " +
                         std::to_string(P_target) + " pu above peak " + std::to_string(p_peak) + " pu)");
  double s0 = opt.slip_floor;
  if (P_target > power(opt.slip_floor)) {
    std::uintmax_t iters = 200;
    const auto br = boost::math::tools::toms748_solve([&](double s) { return power(s) - P_target; }, opt.slip_floor,
                                                      s_peak, boost::math::tools::eps_tolerance<double>(52), iters);
    s0 = 0.5 * (br.first + br.second);
  }
  if (!(s0 > 0.0 && s0 < 1.0)) throw NumericalError("motor on bus " + std::to_string(m.bus) + " has no valid slip");
  mi.s0 = s0;
  mi.coeffs = motor_coefficients(m, f0, s0, std::abs(V), power(s0));
  mi.E_prime0 = mi.coeffs.C * V;
  const cplx I = (V - mi.E_prime0) / (kJ * mi.coeffs.X_prime);
  const cplx S = V * std::conj(I);
  mi.P_m = S.real();
  mi.Q = S.imag();
  mi.T_0 = (mi.E_prime0 * std::conj(I)).real() / std::pow(1.0 - s0, m.load_torque_exponent);
  return mi;
}

}  // namespace detail

// Device states consistent with the power-flow solution: every derivative
// vanishes at t = 0.
inline DynamicInit init_dynamics(const SystemCase& c, const PowerFlowSolution& pf, const InitOptions& opt = {}) {
  DynamicInit init;
  for (std::size_t gi = 0; gi < c.generators.size(); ++gi) {
    const GeneratorParams& g = c.generators[gi];
    if (!g.status) continue;
    const auto k = c.bus_index(g.bus);
    const cplx V = pf.V[k];
    const double P = pf.P_g[gi];
    const double Q = pf.Q_g[gi];
    // The slack machine balances the system and is not held to Q_max.
    if (Q > g.Q_max + 1e-6 && c.buses[k].kind != BusKind::slack)
      throw NumericalError("generator on bus " + std::to_string(g.bus) + " exceeds Q_max at initialization");
    GeneratorInit gin;
    gin.index = gi;
    gin.P_g0 = P;
    gin.Q_g0 = Q;
    const cplx I = std::conj(cplx(P, Q) / V);
    gin.delta = std::arg(V + kJ * g.x_q * I);
    gin.V_dq = to_dq(V, gin.delta);
    gin.I_dq = to_dq(I, gin.delta);
    gin.psi_d0_prime = gin.V_dq.q + g.x_d_prime * gin.I_dq.d;
    const double closed = initial_flux(P, Q, std::abs(V), g.x_q, g.x_d_prime);
    if (std::abs(closed - gin.psi_d0_prime) > opt.flux_crosscheck_tol * std::max(1.0, std::abs(closed)))
      throw NumericalError("initial flux cross-check failed for generator on bus " + std::to_string(g.bus));
    gin.E_q0 = gin.psi_d0_prime + (g.x_d - g.x_d_prime) * gin.I_dq.d;
    gin.E_fd0 = gin.E_q0;
    gin.V_ref = std::abs(V);
    init.generators.push_back(gin);
  }

  init.load_admittance.assign(c.buses.size(), cplx(0.0, 0.0));
  std::vector<double> P_static(c.buses.size()), Q_static(c.buses.size());
  for (std::size_t k = 0; k < c.buses.size(); ++k) {
    P_static[k] = c.buses[k].P_load;
    Q_static[k] = c.buses[k].Q_load;
  }
  for (std::size_t k = 0; k < c.buses.size(); ++k) {
    const Bus& b = c.buses[k];
    const MotorParams* explicit_motor = nullptr;
    for (const MotorParams& m : c.motors)
      if (m.bus == b.id) explicit_motor = &m;
    if (b.motor_share <= 0.0 && !explicit_motor) continue;
    const double P_target = b.motor_share * b.P_load;
    if (!explicit_motor && P_target <= 0.0) continue;
    const MotorParams m = explicit_motor ? *explicit_motor : composite_motor(b.id, P_target, c.f0);
    MotorInit mi = detail::init_motor(m, c.f0, pf.V[k], P_target, opt);
    P_static[k] -= mi.P_m;
    Q_static[k] -= mi.Q;
    init.motors.push_back(std::move(mi));
  }
  for (std::size_t k = 0; k < c.buses.size(); ++k) {
    const double v2 = std::norm(pf.V[k]);
    init.load_admittance[k] = cplx(P_static[k], -Q_static[k]) / v2;
  }
  return init;
}

}  // namespace stvs
