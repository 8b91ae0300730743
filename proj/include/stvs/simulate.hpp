#pragma once

// Reference time-domain simulator. Device ODEs are integrated against the
// algebraic network; the network is solved exactly at every stage
// evaluation with the devices represented as Norton sources behind their
// transient reactance plus a saliency correction.

#include "stvs/case.hpp"
#include "stvs/error.hpp"
#include "stvs/linalg.hpp"
#include "stvs/models.hpp"
#include "stvs/network.hpp"
#include "stvs/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace stvs {

enum class Integrator { rk4, trapezoidal };

struct SimOptions {
  double dt = 1e-3;
  double t_end = 3.0;
  Integrator integrator = Integrator::rk4;
  bool swing_enabled = true;
  int record_stride = 1;
  double E_fd_max = 5.0;
  bool exciter_clamp = true;
  double psi_abort = 10.0;
};

inline void validate(const SimOptions& o, const std::optional<FaultScenario>& s) {
  if (!(o.dt > 0.0)) throw ValidationError("options.dt", "must be positive");
  if (!(o.t_end > 0.0)) throw ValidationError("options.t_end", "must be positive");
  if (o.record_stride < 1) throw ValidationError("options.record_stride", "must be >= 1");
  if (s && !(o.t_end > s->T_clr)) throw ValidationError("options.t_end", "must exceed the clearing time");
}

// ---------------------------------------------------------------------------
// Network solve

// Device-side inputs of one network solve: internal flux magnitude and its
// angle (rotor angle for generators, angle of E' for motors).
struct DeviceSource {
  double flux = 0.0;
  double angle = 0.0;
};

// Exact solve of Y_stage V = I_inj(V) for a fixed topology stage.
// Every device is a Norton source flux e^{j angle}/(j x'_d) behind 1/(j x'_d);
// salient generators add a_k V_d,k e^{j delta_k}, a_k = 1/x_q - 1/x'_d,
// handled through a small real system in the V_d unknowns.
class NetworkSolver {
 public:
  NetworkSolver(const TopologyStage& stage, const std::vector<Device>& devices) : tag_(stage.tag), devices_(devices) {
    CMatrix Y = stage.Y;
    for (const Device& d : devices_) Y(d.bus, d.bus) += 1.0 / cplx(0.0, d.x_d_prime);
    Eigen::PartialPivLU<CMatrix> lu(Y);
    if (!(lu.rcond() > 1e-14))
      throw NumericalError(std::string("singular network matrix in stage ") + stage_name(tag_) + " near bus position " +
                           std::to_string(weakest_pivot(lu)));
    const auto n = Y.rows();
    const auto nd = static_cast<Eigen::Index>(devices_.size());
    CMatrix E = CMatrix::Zero(n, nd);
    for (Eigen::Index j = 0; j < nd; ++j) E(devices_[j].bus, j) = 1.0;
    Zcols_ = lu.solve(E);
    Zdev_.resize(nd, nd);
    for (Eigen::Index i = 0; i < nd; ++i)
      for (Eigen::Index j = 0; j < nd; ++j) Zdev_(i, j) = Zcols_(devices_[i].bus, j);
    for (const Device& d : devices_) {
      const double a = 1.0 / d.x_q - 1.0 / d.x_d_prime;
      saliency_.push_back(a);
      if (a != 0.0) ++salient_;
    }
  }

  StageTag tag() const { return tag_; }
  std::size_t size() const { return devices_.size(); }

  // Total current injected at each device bus by its device.
  CVector injections(const std::vector<DeviceSource>& src) const {
    const auto nd = static_cast<Eigen::Index>(devices_.size());
    CVector I(nd);
    for (Eigen::Index j = 0; j < nd; ++j)
      I(j) = src[j].flux * unit_phasor(src[j].angle) / cplx(0.0, devices_[j].x_d_prime);
    if (salient_ == 0) return I;

    const CVector V0 = Zdev_ * I;
    std::vector<Eigen::Index> sal;
    for (Eigen::Index j = 0; j < nd; ++j)
      if (saliency_[j] != 0.0) sal.push_back(j);
    const auto ns = static_cast<Eigen::Index>(sal.size());
    RMat M = RMat::Identity(ns, ns);
    RVec b(ns);
    for (Eigen::Index r = 0; r < ns; ++r) {
      const cplx rot = kJ * unit_phasor(-src[sal[r]].angle);
      b(r) = (rot * V0(sal[r])).real();
      for (Eigen::Index c = 0; c < ns; ++c)
        M(r, c) -= saliency_[sal[c]] * (rot * Zdev_(sal[r], sal[c]) * unit_phasor(src[sal[c]].angle)).real();
    }
    const RVec vd = M.partialPivLu().solve(b);
    for (Eigen::Index c = 0; c < ns; ++c) I(sal[c]) += saliency_[sal[c]] * vd(c) * unit_phasor(src[sal[c]].angle);
    return I;
  }

  CVector device_voltages(const CVector& I) const { return Zdev_ * I; }
  CVector bus_voltages(const CVector& I) const { return Zcols_ * I; }

  CVector solve(const std::vector<DeviceSource>& src) const { return bus_voltages(injections(src)); }

 private:
  StageTag tag_;
  std::vector<Device> devices_;
  CMatrix Zcols_;  // [N_bus x N_dev] columns of the extended impedance
  CMatrix Zdev_;   // rows of Zcols_ at the device buses
  std::vector<double> saliency_;
  int salient_ = 0;
};

// Stage-level convenience for callers holding only a stage and sources.
inline std::vector<cplx> network_solve(const TopologyStage& stage, const std::vector<Device>& devices,
                                       const std::vector<DeviceSource>& src) {
  const CVector V = NetworkSolver(stage, devices).solve(src);
  return {V.data(), V.data() + V.size()};
}

// ---------------------------------------------------------------------------
// Trajectory

struct GeneratorSample {
  double psi = 0.0;      // psi'_d
  double psi_spn = 0.0;  // spontaneous component
  double E_fd = 0.0;
  double E_q = 0.0;
  double V_d = 0.0;
  double V_q = 0.0;
  double I_d = 0.0;
  double I_q = 0.0;
  double P_g = 0.0;
  double Q_g = 0.0;
  double Q_spon = 0.0;
  double Q_exc = 0.0;
  double delta = 0.0;
  double omega = 1.0;
};

struct MotorSample {
  cplx E_prime;
  double slip = 0.0;
  double P = 0.0;  // drawn from the bus
  double Q = 0.0;
};

struct SimEvent {
  std::string event;
  double t = 0.0;
  std::string detail;
};

struct Trajectory {
  std::vector<int> bus_ids;
  std::vector<int> generator_buses;
  std::vector<int> motor_buses;
  std::vector<double> t;
  std::vector<StageTag> stage;
  std::vector<std::vector<cplx>> V;                      // [record][bus]
  std::vector<std::vector<GeneratorSample>> generators;  // [record][generator]
  std::vector<std::vector<MotorSample>> motors;          // [record][motor]
  std::vector<SimEvent> events;

  std::size_t size() const { return t.size(); }
  std::size_t bus_position(int id) const {
    for (std::size_t k = 0; k < bus_ids.size(); ++k)
      if (bus_ids[k] == id) return k;
    throw ValidationError("bus", "bus " + std::to_string(id) + " not in trajectory");
  }
  std::size_t generator_position(int bus) const {
    for (std::size_t k = 0; k < generator_buses.size(); ++k)
      if (generator_buses[k] == bus) return k;
    throw ValidationError("generator", "no generator on bus " + std::to_string(bus) + " in trajectory");
  }
};

// ---------------------------------------------------------------------------
// Simulator

namespace detail {

class Simulator {
 public:
  Simulator(const SystemCase& c, const DynamicInit& init, const std::optional<FaultScenario>& s, const SimOptions& o)
      : case_(c), init_(init), scenario_(s), opt_(o) {
    validate(opt_, scenario_);
    if (scenario_) validate(*scenario_, case_);
    devices_ = collect_devices(case_, init_);
    ng_ = init_.generators.size();
    nm_ = init_.motors.size();
    FaultScenario dummy;
    const FaultScenario& sc = scenario_ ? *scenario_ : dummy;
    solvers_.emplace_back(build_stage(case_, init_.load_admittance, sc, StageTag::pre), devices_);
    if (scenario_) {
      solvers_.emplace_back(build_stage(case_, init_.load_admittance, sc, StageTag::flt), devices_);
      solvers_.emplace_back(build_stage(case_, init_.load_admittance, sc, StageTag::clr), devices_);
    }
    for (const auto& gi : init_.generators) {
      const GeneratorParams& p = case_.generators[gi.index];
      params_.push_back(p);
      ExciterSettings ex;
      ex.E_fd0 = gi.E_fd0;
      ex.V_ref = gi.V_ref;
      ex.E_fd_max = opt_.E_fd_max;
      ex.clamp = opt_.exciter_clamp;
      exciters_.push_back(ex);
    }
    stalled_.assign(nm_, false);
  }

  Trajectory run() {
    Trajectory tr;
    for (const Bus& b : case_.buses) tr.bus_ids.push_back(b.id);
    for (const auto& gi : init_.generators) tr.generator_buses.push_back(case_.generators[gi.index].bus);
    for (const auto& mi : init_.motors) tr.motor_buses.push_back(mi.params.bus);

    RVec x = initial_state();
    const long long n_steps = std::llround(opt_.t_end / opt_.dt);
    long long k_fault = -1, k_clr = -1;
    if (scenario_) {
      k_fault = std::llround(scenario_->t_fault / opt_.dt);
      k_clr = std::llround(scenario_->T_clr / opt_.dt);
      if (k_clr <= k_fault) k_clr = k_fault + 1;
    }
    stage_ = 0;
    record(tr, x, 0.0);
    for (long long k = 0; k < n_steps; ++k) {
      const double t = static_cast<double>(k) * opt_.dt;
      if (k == k_fault) switch_stage(tr, x, t, 1, "fault_applied", "bus " + std::to_string(scenario_->faulted_bus));
      if (k == k_clr)
        switch_stage(tr, x, t, 2, "fault_cleared",
                     scenario_->tripped_branch.empty() ? "no branch opened" : "opened " + scenario_->tripped_branch);
      step(x, t);
      const double t1 = static_cast<double>(k + 1) * opt_.dt;
      post_step(tr, x, t1);
      if ((k + 1) % opt_.record_stride == 0 || k + 1 == n_steps) record(tr, x, t1);
    }
    return tr;
  }

 private:
  // State layout: per generator [psi, E_fd, psi_spn, delta, omega], then per
  // motor [Re E', Im E', slip].
  static constexpr int kGen = 5;
  static constexpr int kMot = 3;

  Eigen::Index gen_at(std::size_t k) const { return static_cast<Eigen::Index>(kGen * k); }
  Eigen::Index mot_at(std::size_t m) const { return static_cast<Eigen::Index>(kGen * ng_ + kMot * m); }

  RVec initial_state() const {
    RVec x(static_cast<Eigen::Index>(kGen * ng_ + kMot * nm_));
    for (std::size_t k = 0; k < ng_; ++k) {
      const auto& gi = init_.generators[k];
      x.segment(gen_at(k), kGen) << gi.psi_d0_prime, gi.E_fd0, gi.psi_d0_prime, gi.delta, 1.0;
    }
    for (std::size_t m = 0; m < nm_; ++m) {
      const auto& mi = init_.motors[m];
      x.segment(mot_at(m), kMot) << mi.E_prime0.real(), mi.E_prime0.imag(), mi.s0;
    }
    return x;
  }

  std::vector<DeviceSource> sources(const RVec& x) const {
    std::vector<DeviceSource> src(devices_.size());
    for (std::size_t k = 0; k < ng_; ++k) src[k] = {x(gen_at(k)), x(gen_at(k) + 3)};
    for (std::size_t m = 0; m < nm_; ++m) {
      const cplx E(x(mot_at(m)), x(mot_at(m) + 1));
      src[ng_ + m] = {std::abs(E), std::arg(E)};
    }
    return src;
  }

  // Motor internal voltages enter the source list as magnitude/angle; a
  // vanishing E' has an undefined angle but contributes nothing.
  CVector device_voltages(const RVec& x) const {
    const NetworkSolver& ns = solvers_[stage_];
    return ns.device_voltages(ns.injections(sources(x)));
  }

  RVec derivatives(const RVec& x) const {
    const CVector Vdev = device_voltages(x);
    RVec dx = RVec::Zero(x.size());
    const double ws = 2.0 * kPi * case_.f0;
    for (std::size_t k = 0; k < ng_; ++k) {
      const auto o = gen_at(k);
      const GeneratorParams& p = params_[k];
      const Dq V = to_dq(Vdev(static_cast<Eigen::Index>(k)), x(o + 3));
      const auto r = generator_derivatives(x(o), x(o + 1), V, p, exciters_[k]);
      dx(o) = r.dpsi_d_prime;
      dx(o + 1) = r.dE_fd;
      dx(o + 2) = spontaneous_active_ ? spontaneous_flux_rate(x(o + 2), V, p, exciters_[k].E_fd0) : r.dpsi_d_prime;
      if (opt_.swing_enabled && p.H > 0.0) {
        const double P_e = stator_algebra(x(o), V, p).P_g;
        const double slip = x(o + 4) - 1.0;
        dx(o + 3) = ws * slip;
        dx(o + 4) = (init_.generators[k].P_g0 - P_e - p.D * slip) / (2.0 * p.H);
      }
    }
    for (std::size_t m = 0; m < nm_; ++m) {
      const auto o = mot_at(m);
      const auto& mi = init_.motors[m];
      const cplx V = Vdev(static_cast<Eigen::Index>(ng_ + m));
      const auto r = motor_derivatives(cplx(x(o), x(o + 1)), x(o + 2), V, mi.params, case_.f0, mi.T_0);
      dx(o) = r.dE_prime.real();
      dx(o + 1) = r.dE_prime.imag();
      dx(o + 2) = stalled_[m] ? std::min(0.0, r.dslip) : r.dslip;
    }
    return dx;
  }

  void step(RVec& x, double t) {
    const double h = opt_.dt;
    if (opt_.integrator == Integrator::rk4) {
      const RVec k1 = derivatives(x);
      const RVec k2 = derivatives(x + 0.5 * h * k1);
      const RVec k3 = derivatives(x + 0.5 * h * k2);
      const RVec k4 = derivatives(x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      trapezoidal_step(x, t);
    }
    clamp_exciters(x);
  }

  // Chord Newton on y - x - h/2 (f(x) + f(y)) = 0; the iteration matrix is
  // rebuilt on stage changes and whenever the chord iteration stalls.
  void trapezoidal_step(RVec& x, double t) {
    const double h = opt_.dt;
    const RVec fx = derivatives(x);
    RVec y = x + h * fx;
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (!chord_ || attempt > 0) build_chord(x);
      for (int it = 0; it < 25; ++it) {
        const RVec g = y - x - 0.5 * h * (fx + derivatives(y));
        const RVec dy = chord_->solve(g);
        y -= dy;
        if (dy.cwiseAbs().maxCoeff() < 1e-13) {
          x = y;
          return;
        }
      }
    }
    throw NumericalError("trapezoidal iteration did not converge at t = " + std::to_string(t));
  }

  void build_chord(const RVec& x) {
    const auto n = x.size();
    const RVec f0 = derivatives(x);
    RMat J(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
      RVec xp = x;
      const double eps = 1e-7 * std::max(1.0, std::abs(x(c)));
      xp(c) += eps;
      J.col(c) = (derivatives(xp) - f0) / eps;
    }
    chord_.emplace(RMat::Identity(n, n) - 0.5 * opt_.dt * J);
  }

  void clamp_exciters(RVec& x) const {
    if (!opt_.exciter_clamp) return;
    for (std::size_t k = 0; k < ng_; ++k) x(gen_at(k) + 1) = std::clamp(x(gen_at(k) + 1), 0.0, opt_.E_fd_max);
  }

  void switch_stage(Trajectory& tr, RVec& x, double t, std::size_t next, const char* name, const std::string& detail) {
    if (tr.t.empty() || tr.t.back() != t || tr.stage.back() != solvers_[stage_].tag()) record(tr, x, t);
    stage_ = next;
    chord_.reset();
    if (next == 1) {
      // The spontaneous shadow starts from the actual flux at fault inception.
      for (std::size_t k = 0; k < ng_; ++k) x(gen_at(k) + 2) = x(gen_at(k));
      spontaneous_active_ = true;
    }
    tr.events.push_back({name, t, detail});
    record(tr, x, t);
  }

  void post_step(Trajectory& tr, RVec& x, double t) {
    for (std::size_t k = 0; k < ng_; ++k) {
      const double psi = x(gen_at(k));
      if (!std::isfinite(psi) || std::abs(psi) > opt_.psi_abort)
        throw NumericalError("flux of generator on bus " + std::to_string(params_[k].bus) + " diverged (" +
                             std::to_string(psi) + " pu) at t = " + std::to_string(t));
    }
    for (std::size_t m = 0; m < nm_; ++m) {
      auto o = mot_at(m);
      if (x(o + 2) >= 1.0) {
        x(o + 2) = 1.0;
        if (!stalled_[m]) {
          stalled_[m] = true;
          tr.events.push_back({"motor_stall", t, "bus " + std::to_string(init_.motors[m].params.bus)});
        }
      } else if (stalled_[m] && x(o + 2) < 1.0) {
        stalled_[m] = false;
      }
    }
  }

  void record(Trajectory& tr, const RVec& x, double t) const {
    const NetworkSolver& ns = solvers_[stage_];
    const CVector I = ns.injections(sources(x));
    const CVector Vbus = ns.bus_voltages(I);
    tr.t.push_back(t);
    tr.stage.push_back(ns.tag());
    tr.V.emplace_back(Vbus.data(), Vbus.data() + Vbus.size());
    std::vector<GeneratorSample> gs(ng_);
    for (std::size_t k = 0; k < ng_; ++k) {
      const auto o = gen_at(k);
      const GeneratorParams& p = params_[k];
      GeneratorSample& g = gs[k];
      g.psi = x(o);
      g.E_fd = x(o + 1);
      g.psi_spn = x(o + 2);
      g.delta = x(o + 3);
      g.omega = x(o + 4);
      const Dq V = to_dq(Vbus(devices_[k].bus), g.delta);
      g.V_d = V.d;
      g.V_q = V.q;
      const auto st = stator_algebra(g.psi, V, p);
      g.I_d = st.I_d;
      g.I_q = st.I_q;
      g.P_g = st.P_g;
      g.Q_g = st.Q_g;
      g.E_q = internal_emf(g.psi, V, p);
      const auto q = decompose_Q(g.psi_spn, g.psi - g.psi_spn, V, p);
      g.Q_spon = q.Q_spon;
      g.Q_exc = q.Q_exc;
    }
    std::vector<MotorSample> ms(nm_);
    for (std::size_t m = 0; m < nm_; ++m) {
      const auto o = mot_at(m);
      const cplx E(x(o), x(o + 1));
      const cplx V = Vbus(devices_[ng_ + m].bus);
      const cplx Im = (V - E) / cplx(0.0, devices_[ng_ + m].x_d_prime);
      const cplx S = V * std::conj(Im);
      ms[m] = {E, x(o + 2), S.real(), S.imag()};
    }
    tr.generators.push_back(std::move(gs));
    tr.motors.push_back(std::move(ms));
  }

  const SystemCase& case_;
  const DynamicInit& init_;
  std::optional<FaultScenario> scenario_;
  SimOptions opt_;
  std::vector<Device> devices_;
  std::vector<NetworkSolver> solvers_;
  std::vector<GeneratorParams> params_;
  std::vector<ExciterSettings> exciters_;
  std::vector<bool> stalled_;
  std::optional<Eigen::PartialPivLU<RMat>> chord_;
  std::size_t ng_ = 0;
  std::size_t nm_ = 0;
  std::size_t stage_ = 0;
  bool spontaneous_active_ = false;
};

}  // namespace detail

inline Trajectory simulate(const SystemCase& c, const DynamicInit& init, const std::optional<FaultScenario>& s,
                           const SimOptions& opt = {}) {
  return detail::Simulator(c, init, s, opt).run();
}

// ---------------------------------------------------------------------------
// Metrics

struct BusMetrics {
  int bus = 0;
  double V_nadir = 0.0;
  double t_nadir = 0.0;
  double V_checkpoint = 0.0;
  std::optional<double> recovery_time;  // empty: not recovered
};

inline double bus_magnitude(const Trajectory& tr, std::size_t record, std::size_t bus) {
  return std::abs(tr.V[record][bus]);
}

// Linear interpolation of a recorded quantity; at an event instant the
// post-event row is used.
template <typename F>
double interpolate_at(const Trajectory& tr, double t, F&& value) {
  if (tr.t.empty() || t < tr.t.front() - 1e-12 || t > tr.t.back() + 1e-12)
    throw ValidationError("checkpoint", "time " + std::to_string(t) + " outside the trajectory");
  const auto it = std::upper_bound(tr.t.begin(), tr.t.end(), t);
  if (it == tr.t.end()) return value(tr.t.size() - 1);
  const auto hi = static_cast<std::size_t>(it - tr.t.begin());
  if (hi == 0) return value(0);
  const auto lo = hi - 1;
  const double w = (t - tr.t[lo]) / (tr.t[hi] - tr.t[lo]);
  return (1.0 - w) * value(lo) + w * value(hi);
}

inline std::vector<BusMetrics> extract_metrics(const Trajectory& tr, const FaultScenario& s) {
  const double t_check = s.T_clr + s.checkpoint;
  if (tr.t.empty() || t_check > tr.t.back() + 1e-12)
    throw ValidationError("checkpoint", "checkpoint beyond the end of the trajectory");
  std::vector<BusMetrics> out;
  for (std::size_t b = 0; b < tr.bus_ids.size(); ++b) {
    BusMetrics m;
    m.bus = tr.bus_ids[b];
    m.V_nadir = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < tr.size(); ++r) {
      if (tr.t[r] < s.t_fault - 1e-12 || tr.stage[r] == StageTag::pre) continue;
      const double v = bus_magnitude(tr, r, b);
      if (v < m.V_nadir) {
        m.V_nadir = v;
        m.t_nadir = tr.t[r];
      }
    }
    m.V_checkpoint = interpolate_at(tr, t_check, [&](std::size_t r) { return bus_magnitude(tr, r, b); });
    // First post-clearing instant from which V stays at or above V_th2.
    std::optional<double> rec;
    for (std::size_t r = tr.size(); r-- > 0;) {
      if (tr.stage[r] != StageTag::clr) break;
      if (bus_magnitude(tr, r, b) >= s.V_th2)
        rec = tr.t[r];
      else
        break;
    }
    m.recovery_time = rec;
    out.push_back(m);
  }
  return out;
}

}  // namespace stvs
