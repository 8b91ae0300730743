#pragma once

// Voltage inertia (VIC) and voltage recovery (VRC) indexes, requirement
// assessment (VIR/VRR) and security checks against precomputed requirements.

#include "stvs/analytic.hpp"
#include "stvs/case.hpp"
#include "stvs/error.hpp"
#include "stvs/network.hpp"
#include "stvs/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace stvs {

struct BusIndex {
  std::vector<double> components;  // per device
  double total = 0.0;
};

inline BusIndex compute_vic(const RMatrix& R_flt, const std::vector<double>& flux0, std::size_t bus) {
  BusIndex out;
  const auto b = static_cast<Eigen::Index>(bus);
  for (std::size_t j = 0; j < flux0.size(); ++j) {
    out.components.push_back(R_flt.R(b, static_cast<Eigen::Index>(j)) * flux0[j]);
    out.total += out.components.back();
  }
  return out;
}

// Flux of device j in a trajectory row: psi'_d for generators, the component
// of E' along its pre-fault direction for motors.
inline double device_flux(const Trajectory& tr, const std::vector<Device>& devices, std::size_t record,
                          std::size_t j) {
  const Device& d = devices[j];
  if (d.kind == DeviceKind::generator) return tr.generators[record][d.source].psi;
  return (tr.motors[record][d.source].E_prime * unit_phasor(-d.angle)).real();
}

namespace detail {

// Trapezoidal integral of value(r) over [t0, t1] on the recorded grid,
// starting from the post-event row at t0 and interpolating at t1.
template <typename F>
double window_integral(const Trajectory& tr, double t0, double t1, F&& value) {
  if (tr.t.empty() || t0 < tr.t.front() - 1e-12 || t1 > tr.t.back() + 1e-12)
    throw ValidationError("delta_T", "window exceeds the trajectory");
  std::size_t r = 0;
  while (r + 1 < tr.size() && tr.t[r + 1] <= t0 + 1e-12) ++r;
  double sum = 0.0;
  double t_prev = t0;
  double v_prev = interpolate_at(tr, t0, value);
  if (std::abs(tr.t[r] - t0) <= 1e-12) v_prev = value(r);
  for (++r; r < tr.size() && tr.t[r] < t1 - 1e-12; ++r) {
    if (tr.t[r] == t_prev) continue;
    const double v = value(r);
    sum += 0.5 * (v + v_prev) * (tr.t[r] - t_prev);
    t_prev = tr.t[r];
    v_prev = v;
  }
  const double v_end = interpolate_at(tr, t1, value);
  sum += 0.5 * (v_end + v_prev) * (t1 - t_prev);
  return sum;
}

}  // namespace detail

struct VrcWindow {
  double T_clr = 0.2;
  double delta_T = 0.4;
  double t_fault = 0.1;
};

// Simulated path: trapezoidal window mean of R_clr psi_j(t). Devices flagged
// to count from fault inception use R_flt until clearing.
inline BusIndex compute_vrc(const Trajectory& tr, const std::vector<Device>& devices, const std::vector<bool>& from_fault,
                            const RMatrix& R_flt, const RMatrix& R_clr, const VrcWindow& w, std::size_t bus) {
  if (!(w.delta_T > 0.0)) throw ValidationError("delta_T", "must be positive");
  BusIndex out;
  const auto b = static_cast<Eigen::Index>(bus);
  for (std::size_t j = 0; j < devices.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    double value = 0.0;
    if (j < from_fault.size() && from_fault[j]) {
      const double t0 = w.t_fault, t1 = w.t_fault + w.delta_T;
      const auto flux = [&](std::size_t r) { return device_flux(tr, devices, r, j); };
      const double mid = std::min(w.T_clr, t1);
      double integral = R_flt.R(b, jj) * detail::window_integral(tr, t0, mid, flux);
      if (t1 > mid) integral += R_clr.R(b, jj) * detail::window_integral(tr, mid, t1, flux);
      value = integral / w.delta_T;
    } else {
      const double integral = detail::window_integral(tr, w.T_clr, w.T_clr + w.delta_T,
                                                      [&](std::size_t r) { return device_flux(tr, devices, r, j); });
      value = R_clr.R(b, jj) * integral / w.delta_T;
    }
    out.components.push_back(value);
    out.total += value;
  }
  return out;
}

// Analytic path over the stepped profile: generators through the closed-form
// flux integral, motors through their first-order relaxation.
inline double profile_flux_integral(const SteppedProfile& prof, std::size_t gen, double t0, double t1) {
  double sum = 0.0;
  for (const auto& pc : prof.pieces) {
    const double a = std::max(t0, pc.t_start), b = std::min(t1, pc.t_end);
    if (b <= a) continue;
    const auto& c = pc.coeffs[gen];
    const auto F = [&](double t) {
      // Antiderivative of the flux in piece-local time.
      double v = c.A3 * t - c.A1 * c.T_d_prime * std::exp(-t / c.T_d_prime);
      if (c.repeated_root)
        v += -c.B * c.T_d_prime * (t + c.T_d_prime) * std::exp(-t / c.T_d_prime);
      else
        v += -c.A2 * c.T_e * std::exp(-t / c.T_e);
      return v;
    };
    sum += F(b - pc.t_start) - F(a - pc.t_start);
  }
  return sum;
}

inline double profile_motor_integral(const SteppedProfile& prof, std::size_t motor, double t0, double t1) {
  double sum = 0.0;
  for (const auto& pc : prof.pieces) {
    const double a = std::max(t0, pc.t_start), b = std::min(t1, pc.t_end);
    if (b <= a) continue;
    const auto& m = pc.motors[motor];
    const auto F = [&](double t) { return m.target * t - (m.start - m.target) * m.tau * std::exp(-t / m.tau); };
    sum += F(b - pc.t_start) - F(a - pc.t_start);
  }
  return sum;
}

inline BusIndex compute_vrc_analytic(const SteppedProfile& prof, const std::vector<Device>& devices,
                                     const std::vector<bool>& from_fault, const RMatrix& R_flt, const RMatrix& R_clr,
                                     const VrcWindow& w, std::size_t bus) {
  if (!(w.delta_T > 0.0)) throw ValidationError("delta_T", "must be positive");
  BusIndex out;
  const auto b = static_cast<Eigen::Index>(bus);
  for (std::size_t j = 0; j < devices.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const Device& d = devices[j];
    const auto integral = [&](double t0, double t1) {
      if (d.kind == DeviceKind::generator) return profile_flux_integral(prof, d.source, t0, t1);
      return profile_motor_integral(prof, d.source, t0, t1);
    };
    double value = 0.0;
    if (j < from_fault.size() && from_fault[j]) {
      const double t1 = w.t_fault + w.delta_T, mid = std::min(w.T_clr, t1);
      double s = R_flt.R(b, jj) * integral(w.t_fault, mid);
      if (t1 > mid) s += R_clr.R(b, jj) * integral(mid, t1);
      value = s / w.delta_T;
    } else {
      value = R_clr.R(b, jj) * integral(w.T_clr, w.T_clr + w.delta_T) / w.delta_T;
    }
    out.components.push_back(value);
    out.total += value;
  }
  return out;
}

// Charge form: (R/dT)(x_ad Q_f - x_ad^2/x_f Q_d) with Q_f, Q_d the field and
// d-axis stator charges over the window, field current i_f = E_q / x_ad.
inline double charge_vrc(const Trajectory& tr, const GeneratorParams& p, std::size_t gen, double R, double T_clr,
                         double delta_T) {
  if (!(delta_T > 0.0)) throw ValidationError("delta_T", "must be positive");
  if (tr.generators.empty() || gen >= tr.generators.front().size())
    throw ValidationError("trajectory", "missing current channels for generator " + std::to_string(gen));
  const double Q_f = detail::window_integral(tr, T_clr, T_clr + delta_T,
                                             [&](std::size_t r) { return tr.generators[r][gen].E_q / p.x_ad; });
  const double Q_d =
      detail::window_integral(tr, T_clr, T_clr + delta_T, [&](std::size_t r) { return tr.generators[r][gen].I_d; });
  return R / delta_T * (p.x_ad * Q_f - p.x_ad * p.x_ad / p.x_f * Q_d);
}

// ---------------------------------------------------------------------------
// Voltage superposition along a trajectory

struct SuperpositionOptions {
  // Rebuild R with the recorded device angles and project onto the pre-fault
  // direction rotated with the centre of inertia. Off: pre-fault R per stage.
  bool refresh_angles = true;
  int stride = 1;
};

struct SuperpositionSeries {
  int bus = 0;
  std::vector<std::string> devices;
  std::vector<double> t;
  std::vector<double> V_sim;   // simulated magnitude
  std::vector<double> V_est;   // sum of device components
  std::vector<std::vector<double>> components;  // [record][device]
  double error_fault_instant = 0.0;
  double error_mean = 0.0;
  double error_max = 0.0;
};

inline double inertia_centre(const SystemCase& c, const DynamicInit& init, const std::vector<double>& delta) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < init.generators.size(); ++k) {
    const double H = c.generators[init.generators[k].index].H;
    num += H * delta[k];
    den += H;
  }
  return den > 0.0 ? num / den : 0.0;
}

// Records from the fault instant onward: compares |V_i| with sum_j R_ij flux_j.
inline SuperpositionSeries voltage_superposition(const SystemCase& c, const DynamicInit& init, const FaultScenario& s,
                                                 const Trajectory& tr, const std::vector<cplx>& prefault_V, int bus_id,
                                                 const SuperpositionOptions& opt = {}) {
  if (opt.stride < 1) throw ValidationError("stride", "must be >= 1");
  const auto devices = collect_devices(c, init);
  const std::size_t ng = init.generators.size();
  const std::size_t nd = devices.size();
  const auto bus = static_cast<Eigen::Index>(c.bus_index(bus_id));
  const TopologyStage flt = build_stage(c, init.load_admittance, s, StageTag::flt);
  const TopologyStage clr = build_stage(c, init.load_admittance, s, StageTag::clr);
  const RMatrix R_flt = compute_R(flt, devices, prefault_V);
  const RMatrix R_clr = compute_R(clr, devices, prefault_V);
  std::vector<double> delta0;
  for (const auto& gi : init.generators) delta0.push_back(gi.delta);
  const double coi0 = inertia_centre(c, init, delta0);

  SuperpositionSeries out;
  out.bus = bus_id;
  for (const Device& d : devices) out.devices.push_back(d.name);
  bool first = true;
  std::size_t counter = 0;
  for (std::size_t r = 0; r < tr.size(); ++r) {
    if (tr.stage[r] == StageTag::pre || tr.t[r] < s.t_fault - 1e-12) continue;
    const bool fault_instant = first;
    first = false;
    if (!fault_instant && counter++ % static_cast<std::size_t>(opt.stride) != 0) continue;
    const TopologyStage& stage = tr.stage[r] == StageTag::flt ? flt : clr;
    std::vector<double> flux(nd);
    std::optional<RMatrix> refreshed;
    if (opt.refresh_angles) {
      std::vector<double> angles(nd), w(nd, 1.0), delta(ng);
      for (std::size_t k = 0; k < ng; ++k) delta[k] = angles[k] = tr.generators[r][k].delta;
      for (std::size_t m = 0; m < nd - ng; ++m) angles[ng + m] = std::arg(tr.motors[r][m].E_prime);
      const cplx rot = unit_phasor(inertia_centre(c, init, delta) - coi0);
      std::vector<cplx> dir(prefault_V.size());
      for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = prefault_V[i] * rot;
      refreshed = compute_R(stage, devices, dir, angles, w);
      for (std::size_t j = 0; j < nd; ++j)
        flux[j] = j < ng ? tr.generators[r][j].psi : std::abs(tr.motors[r][j - ng].E_prime);
    } else {
      for (std::size_t j = 0; j < nd; ++j) flux[j] = device_flux(tr, devices, r, j);
    }
    const RMatrix& R = refreshed ? *refreshed : (tr.stage[r] == StageTag::flt ? R_flt : R_clr);
    std::vector<double> comp(nd);
    double est = 0.0;
    for (std::size_t j = 0; j < nd; ++j) {
      comp[j] = R.R(bus, static_cast<Eigen::Index>(j)) * flux[j];
      est += comp[j];
    }
    const double v = bus_magnitude(tr, r, static_cast<std::size_t>(bus));
    const double err = std::abs(v - est) / v;
    if (fault_instant) out.error_fault_instant = err;
    out.error_max = std::max(out.error_max, err);
    out.error_mean += err;
    out.t.push_back(tr.t[r]);
    out.V_sim.push_back(v);
    out.V_est.push_back(est);
    out.components.push_back(std::move(comp));
  }
  if (!out.t.empty()) out.error_mean /= static_cast<double>(out.t.size());
  return out;
}

// ---------------------------------------------------------------------------
// Reports

struct IndexReport {
  std::string scenario_id;
  std::string method;  // "analytic" or "simulated"
  double delta_T = 0.4;
  std::vector<int> buses;
  std::vector<std::string> devices;
  RMat vic;  // [bus x device]
  RMat vrc;
  std::vector<double> vic_total;
  std::vector<double> vrc_total;

  std::size_t bus_position(int id) const {
    for (std::size_t k = 0; k < buses.size(); ++k)
      if (buses[k] == id) return k;
    throw ValidationError("bus", "bus " + std::to_string(id) + " not in report");
  }
};

// Fills one report row per bus of `bus_ids`.
template <typename VrcFn>
IndexReport build_report(const std::string& scenario_id, const std::string& method, double delta_T,
                         const std::vector<int>& bus_ids, const std::vector<std::size_t>& bus_rows,
                         const std::vector<Device>& devices, const RMatrix& R_flt, VrcFn&& vrc_of_bus) {
  IndexReport rep;
  rep.scenario_id = scenario_id;
  rep.method = method;
  rep.delta_T = delta_T;
  rep.buses = bus_ids;
  for (const Device& d : devices) rep.devices.push_back(d.name);
  std::vector<double> flux0;
  for (const Device& d : devices) flux0.push_back(d.flux0);
  const auto nb = static_cast<Eigen::Index>(bus_rows.size());
  const auto nd = static_cast<Eigen::Index>(devices.size());
  rep.vic.resize(nb, nd);
  rep.vrc.resize(nb, nd);
  for (Eigen::Index r = 0; r < nb; ++r) {
    const BusIndex vic = compute_vic(R_flt, flux0, bus_rows[r]);
    const BusIndex vrc = vrc_of_bus(bus_rows[r]);
    for (Eigen::Index j = 0; j < nd; ++j) {
      rep.vic(r, j) = vic.components[j];
      rep.vrc(r, j) = vrc.components[j];
    }
    rep.vic_total.push_back(vic.total);
    rep.vrc_total.push_back(vrc.total);
  }
  return rep;
}

inline json report_to_json(const IndexReport& rep) {
  json j;
  j["scenario_id"] = rep.scenario_id;
  j["method"] = rep.method;
  j["delta_T"] = rep.delta_T;
  j["vic"] = json::object();
  j["vrc"] = json::object();
  j["vic_total"] = json::object();
  j["vrc_total"] = json::object();
  for (std::size_t r = 0; r < rep.buses.size(); ++r) {
    const std::string bus = std::to_string(rep.buses[r]);
    json vic = json::object(), vrc = json::object();
    for (std::size_t d = 0; d < rep.devices.size(); ++d) {
      vic[rep.devices[d]] = rep.vic(r, d);
      vrc[rep.devices[d]] = rep.vrc(r, d);
    }
    j["vic"][bus] = vic;
    j["vrc"][bus] = vrc;
    j["vic_total"][bus] = rep.vic_total[r];
    j["vrc_total"][bus] = rep.vrc_total[r];
  }
  return j;
}

inline IndexReport report_from_json(const json& j) {
  IndexReport rep;
  rep.scenario_id = detail::get_required<std::string>(j, "$", "scenario_id");
  rep.method = detail::get_or<std::string>(j, "$", "method", "");
  rep.delta_T = detail::get_or<double>(j, "$", "delta_T", 0.4);
  const json& vic = j.at("vic");
  const json& vrc = j.at("vrc");
  // JSON objects come back in key order; restore numeric bus order.
  for (auto it = vic.begin(); it != vic.end(); ++it) rep.buses.push_back(std::stoi(it.key()));
  std::sort(rep.buses.begin(), rep.buses.end());
  if (!rep.buses.empty()) {
    for (auto it = vic.at(std::to_string(rep.buses.front())).begin(); it != vic.at(std::to_string(rep.buses.front())).end(); ++it)
      rep.devices.push_back(it.key());
  }
  const auto nb = static_cast<Eigen::Index>(rep.buses.size());
  const auto nd = static_cast<Eigen::Index>(rep.devices.size());
  rep.vic.resize(nb, nd);
  rep.vrc.resize(nb, nd);
  for (Eigen::Index r = 0; r < nb; ++r) {
    const std::string bus = std::to_string(rep.buses[r]);
    for (Eigen::Index d = 0; d < nd; ++d) {
      rep.vic(r, d) = vic.at(bus).at(rep.devices[d]).get<double>();
      rep.vrc(r, d) = vrc.at(bus).at(rep.devices[d]).get<double>();
    }
    rep.vic_total.push_back(j.at("vic_total").at(bus).get<double>());
    rep.vrc_total.push_back(j.at("vrc_total").at(bus).get<double>());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Requirement curves

struct RequirementSample {
  std::size_t id = 0;
  bool valid = false;
  std::string failure;
  double vic = 0.0;
  double vrc = 0.0;
  double V_nadir = 0.0;
  double V_checkpoint = 0.0;
};

struct ThresholdFit {
  double value = 0.0;          // critical index value
  bool extrapolated = false;   // no crossing inside the sampled range
  std::string bound;           // "", "<=min", ">=max"
  std::string method;          // "isotonic" or "linear"
  std::vector<double> knot_x;  // fitted relation
  std::vector<double> knot_y;
};

struct RequirementCurve {
  std::string fault_id;
  double V_th1 = 0.75;
  double V_th2 = 0.85;
  std::vector<RequirementSample> samples;
  std::size_t n_valid = 0;
  std::size_t n_discarded = 0;
  ThresholdFit vir;
  ThresholdFit vrr;
};

// Pool-adjacent-violators fit of a non-decreasing y(x). Returns block knots:
// mean x and fitted value of each block, in increasing x.
inline void isotonic_fit(std::vector<double> x, std::vector<double> y, std::vector<double>& kx, std::vector<double>& ky) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  struct Block {
    double sx, sy;
    double n;
  };
  std::vector<Block> blocks;
  for (auto i : order) {
    blocks.push_back({x[i], y[i], 1.0});
    while (blocks.size() > 1) {
      const Block& hi = blocks.back();
      const Block& lo = blocks[blocks.size() - 2];
      if (lo.sy / lo.n <= hi.sy / hi.n) break;
      const Block merged{lo.sx + hi.sx, lo.sy + hi.sy, lo.n + hi.n};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  kx.clear();
  ky.clear();
  for (const Block& b : blocks) {
    kx.push_back(b.sx / b.n);
    ky.push_back(b.sy / b.n);
  }
}

// Index value at which the fitted metric first reaches `threshold`.
inline ThresholdFit fit_threshold(const std::vector<double>& x, const std::vector<double>& y, double threshold) {
  ThresholdFit fit;
  const double xmin = *std::min_element(x.begin(), x.end());
  const double xmax = *std::max_element(x.begin(), x.end());
  isotonic_fit(x, y, fit.knot_x, fit.knot_y);
  fit.method = "isotonic";
  if (fit.knot_x.size() >= 2) {
    if (fit.knot_y.front() >= threshold) {
      fit.value = xmin;
      fit.extrapolated = true;
      fit.bound = "<=min";
      return fit;
    }
    if (fit.knot_y.back() < threshold) {
      fit.value = xmax;
      fit.extrapolated = true;
      fit.bound = ">=max";
      return fit;
    }
    for (std::size_t k = 1; k < fit.knot_x.size(); ++k) {
      if (fit.knot_y[k] >= threshold) {
        const double w = (threshold - fit.knot_y[k - 1]) / (fit.knot_y[k] - fit.knot_y[k - 1]);
        fit.value = fit.knot_x[k - 1] + w * (fit.knot_x[k] - fit.knot_x[k - 1]);
        return fit;
      }
    }
  }
  // Degenerate isotonic fit (one block): least-squares line.
  fit.method = "linear";
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double a = sxx > 0.0 ? sxy / sxx : 0.0;
  const double b = my - a * mx;
  fit.knot_x = {xmin, xmax};
  fit.knot_y = {a * xmin + b, a * xmax + b};
  if (a > 0.0) {
    fit.value = (threshold - b) / a;
    if (fit.value < xmin) {
      fit.value = xmin;
      fit.extrapolated = true;
      fit.bound = "<=min";
    } else if (fit.value > xmax) {
      fit.value = xmax;
      fit.extrapolated = true;
      fit.bound = ">=max";
    }
  } else {
    const bool above = my >= threshold;
    fit.value = above ? xmin : xmax;
    fit.extrapolated = true;
    fit.bound = above ? "<=min" : ">=max";
  }
  return fit;
}

inline void fit_requirements(RequirementCurve& curve) {
  std::vector<double> vic, nadir, vrc, check;
  for (const auto& s : curve.samples) {
    if (!s.valid) continue;
    vic.push_back(s.vic);
    nadir.push_back(s.V_nadir);
    vrc.push_back(s.vrc);
    check.push_back(s.V_checkpoint);
  }
  curve.n_valid = vic.size();
  curve.n_discarded = curve.samples.size() - curve.n_valid;
  if (curve.n_valid < 10)
    throw NumericalError("fault " + curve.fault_id + ": only " + std::to_string(curve.n_valid) +
                         " valid samples (at least 10 required)");
  curve.vir = fit_threshold(vic, nadir, curve.V_th1);
  curve.vrr = fit_threshold(vrc, check, curve.V_th2);
}

// Runs `evaluate(sample_id)` for every sample on `jobs` worker threads.
// Results are stored by sample id, so the outcome does not depend on the
// thread schedule. Numerical failures mark the sample invalid.
template <typename Evaluate>
std::vector<RequirementSample> run_samples(std::size_t n_samples, int jobs, Evaluate&& evaluate) {
  std::vector<RequirementSample> out(n_samples);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < n_samples; i = next++) {
      RequirementSample s;
      try {
        s = evaluate(i);
        s.valid = true;
      } catch (const NumericalError& e) {
        s = RequirementSample{};
        s.failure = e.what();
      }
      s.id = i;
      out[i] = s;
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(n_samples)));
  if (n_threads == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

// `evaluate(sample_id)` returns a RequirementSample (index values and
// simulated voltage metrics) and throws NumericalError for infeasible points.
template <typename Evaluate>
RequirementCurve assess_requirements(const FaultScenario& fault, std::size_t n_samples, int jobs, Evaluate&& evaluate) {
  RequirementCurve curve;
  curve.fault_id = fault.id;
  curve.V_th1 = fault.V_th1;
  curve.V_th2 = fault.V_th2;
  curve.samples = run_samples(n_samples, jobs, evaluate);
  fit_requirements(curve);
  return curve;
}

struct Requirement {
  double vir = 0.0;
  double vrr = 0.0;
  std::size_t n_samples = 0;
  bool extrapolated = false;
};

using RequirementTable = std::map<std::string, Requirement>;

inline Requirement to_requirement(const RequirementCurve& c) {
  return {c.vir.value, c.vrr.value, c.n_valid, c.vir.extrapolated || c.vrr.extrapolated};
}

inline json requirements_to_json(const RequirementTable& t) {
  json j = json::object();
  for (const auto& [id, r] : t)
    j[id] = {{"vir", r.vir}, {"vrr", r.vrr}, {"n_samples", r.n_samples}, {"extrapolated", r.extrapolated}};
  return j;
}

inline RequirementTable requirements_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("$", "requirements must be an object keyed by fault id");
  RequirementTable t;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string p = it.key();
    Requirement r;
    r.vir = detail::get_required<double>(it.value(), p, "vir");
    r.vrr = detail::get_required<double>(it.value(), p, "vrr");
    r.n_samples = detail::get_or<std::size_t>(it.value(), p, "n_samples", 0);
    r.extrapolated = detail::get_or<bool>(it.value(), p, "extrapolated", false);
    t[p] = r;
  }
  return t;
}

inline json curve_to_json(const RequirementCurve& c) {
  const auto fit = [](const ThresholdFit& f) {
    return json{{"value", f.value},   {"extrapolated", f.extrapolated}, {"bound", f.bound},
                {"method", f.method}, {"knot_x", f.knot_x},             {"knot_y", f.knot_y}};
  };
  json samples = json::array();
  for (const auto& s : c.samples) {
    json e{{"id", s.id}, {"valid", s.valid}};
    if (s.valid) {
      e["vic"] = s.vic;
      e["vrc"] = s.vrc;
      e["V_nadir"] = s.V_nadir;
      e["V_checkpoint"] = s.V_checkpoint;
    } else {
      e["failure"] = s.failure;
    }
    samples.push_back(e);
  }
  return {{"fault_id", c.fault_id}, {"V_th1", c.V_th1},         {"V_th2", c.V_th2},
          {"n_valid", c.n_valid},   {"n_discarded", c.n_discarded}, {"vir", fit(c.vir)},
          {"vrr", fit(c.vrr)},      {"samples", samples}};
}

// ---------------------------------------------------------------------------
// Security check

struct FaultIndexes {
  std::string fault_id;
  double vic = 0.0;
  double vrc = 0.0;
};

struct FaultVerdict {
  std::string fault_id;
  double vic = 0.0, vir = 0.0, vic_margin = 0.0;
  double vrc = 0.0, vrr = 0.0, vrc_margin = 0.0;
  bool inertia_ok = false;
  bool recovery_ok = false;
  bool secure = false;
};

struct SecurityVerdict {
  std::vector<FaultVerdict> faults;
  bool secure = true;
};

// Inclusive comparisons: an index exactly at its requirement passes with
// margin 0.
inline SecurityVerdict check_security(const std::vector<FaultIndexes>& indexes, const RequirementTable& req) {
  SecurityVerdict out;
  for (const auto& fi : indexes) {
    const auto it = req.find(fi.fault_id);
    if (it == req.end()) throw ValidationError("requirements", "no requirement for fault " + fi.fault_id);
    FaultVerdict v;
    v.fault_id = fi.fault_id;
    v.vic = fi.vic;
    v.vir = it->second.vir;
    v.vic_margin = v.vic - v.vir;
    v.vrc = fi.vrc;
    v.vrr = it->second.vrr;
    v.vrc_margin = v.vrc - v.vrr;
    v.inertia_ok = v.vic >= v.vir;
    v.recovery_ok = v.vrc >= v.vrr;
    v.secure = v.inertia_ok && v.recovery_ok;
    out.secure = out.secure && v.secure;
    out.faults.push_back(v);
  }
  return out;
}

inline json verdict_to_json(const SecurityVerdict& v) {
  json faults = json::array();
  for (const auto& f : v.faults)
    faults.push_back({{"fault_id", f.fault_id},
                      {"vic", f.vic},
                      {"vir", f.vir},
                      {"vic_margin", f.vic_margin},
                      {"vrc", f.vrc},
                      {"vrr", f.vrr},
                      {"vrc_margin", f.vrc_margin},
                      {"inertia_ok", f.inertia_ok},
                      {"recovery_ok", f.recovery_ok},
                      {"secure", f.secure}});
  return {{"secure", v.secure}, {"faults", faults}};
}

// ---------------------------------------------------------------------------
// Operating-point sampler

struct SamplerOptions {
  double V_lo = 0.95;
  double V_hi = 1.08;
  double shunt_toggle_probability = 0.2;
  double q_dispatch_probability = 0.0;  // chance that a zone unit runs at fixed Q
  double zone_radius = 0.03;            // electrical-distance radius (pu impedance)
};

// Perturbs var-device setpoints inside the electrical neighbourhood of the
// faulted bus. Sample i is drawn from its own engine seeded with (seed, i).
class ZoneSampler {
 public:
  ZoneSampler(const SystemCase& c, const RMat& distance, int faulted_bus, const SamplerOptions& opt, std::uint64_t seed)
      : case_(c), opt_(opt), seed_(seed) {
    const auto f = static_cast<Eigen::Index>(c.bus_index(faulted_bus));
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
      const GeneratorParams& p = c.generators[g];
      if (!p.status) continue;
      const auto b = static_cast<Eigen::Index>(c.bus_index(p.bus));
      if (c.buses[b].kind == BusKind::pq) continue;
      if (distance(f, b) <= opt.zone_radius) zone_generators_.push_back(g);
    }
    for (std::size_t s = 0; s < c.shunts.size(); ++s) {
      const auto b = static_cast<Eigen::Index>(c.bus_index(c.shunts[s].bus));
      if (distance(f, b) <= opt.zone_radius) zone_shunts_.push_back(s);
    }
  }

  const std::vector<std::size_t>& zone_generators() const { return zone_generators_; }
  const std::vector<std::size_t>& zone_shunts() const { return zone_shunts_; }

  OperatingPoint operator()(std::size_t id) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    OperatingPoint op;
    op.id = "sample_" + std::to_string(id);
    for (auto g : zone_generators_) {
      const GeneratorParams& p = case_.generators[g];
      GeneratorSetpoint sp;
      sp.bus = p.bus;
      sp.V_g0 = opt_.V_lo + (opt_.V_hi - opt_.V_lo) * unit(rng);
      const double u_q = unit(rng);
      const double q = p.Q_max * unit(rng);
      if (u_q < opt_.q_dispatch_probability && case_.buses[case_.bus_index(p.bus)].kind == BusKind::pv) {
        sp.V_g0.reset();
        sp.Q_g0 = q;
      }
      op.generators.push_back(sp);
    }
    for (auto s : zone_shunts_) {
      const bool toggle = unit(rng) < opt_.shunt_toggle_probability;
      op.shunts.push_back({case_.shunts[s].id, toggle ? !case_.shunts[s].status : case_.shunts[s].status});
    }
    return op;
  }

 private:
  SystemCase case_;
  SamplerOptions opt_;
  std::uint64_t seed_;
  std::vector<std::size_t> zone_generators_;
  std::vector<std::size_t> zone_shunts_;
};

}  // namespace stvs
