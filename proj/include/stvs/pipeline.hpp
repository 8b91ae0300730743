#pragma once

// End-to-end helpers: operating point -> power flow -> initialization ->
// R matrices -> indexes, with or without a reference simulation.

#include "stvs/analytic.hpp"
#include "stvs/case.hpp"
#include "stvs/indexes.hpp"
#include "stvs/network.hpp"
#include "stvs/powerflow.hpp"
#include "stvs/simulate.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stvs {

struct PreparedCase {
  SystemCase sys;
  PowerFlowSolution pf;
  DynamicInit init;
  std::vector<Device> devices;
  std::vector<bool> vrc_from_fault;  // per device
};

inline PreparedCase prepare(const SystemCase& c, const PowerFlowOptions& pf_opt = {}) {
  PreparedCase p;
  p.sys = c;
  p.pf = solve_power_flow(p.sys, pf_opt);
  p.init = init_dynamics(p.sys, p.pf);
  p.devices = collect_devices(p.sys, p.init);
  for (const Device& d : p.devices)
    p.vrc_from_fault.push_back(d.kind == DeviceKind::generator &&
                               p.sys.generators[p.init.generators[d.source].index].vrc_from_fault);
  return p;
}

struct ScenarioModel {
  FaultScenario scenario;
  TopologyStage flt;
  TopologyStage clr;
  RMatrix R_flt;
  RMatrix R_clr;
};

inline ScenarioModel scenario_model(const PreparedCase& p, const FaultScenario& s) {
  validate(s, p.sys);
  ScenarioModel m;
  m.scenario = s;
  m.flt = build_stage(p.sys, p.init.load_admittance, s, StageTag::flt);
  m.clr = build_stage(p.sys, p.init.load_admittance, s, StageTag::clr);
  m.R_flt = compute_R(m.flt, p.devices, p.pf.V);
  m.R_clr = compute_R(m.clr, p.devices, p.pf.V);
  return m;
}

inline VrcWindow vrc_window(const FaultScenario& s) { return {s.T_clr, s.delta_T, s.t_fault}; }

// All buses when `bus_ids` is empty.
inline std::vector<std::size_t> bus_rows(const SystemCase& c, std::vector<int>& bus_ids) {
  if (bus_ids.empty())
    for (const Bus& b : c.buses) bus_ids.push_back(b.id);
  std::vector<std::size_t> rows;
  for (int id : bus_ids) rows.push_back(c.bus_index(id));
  return rows;
}

inline IndexReport analytic_report(const PreparedCase& p, const ScenarioModel& m, std::vector<int> bus_ids = {},
                                   const ProfileOptions& popt = {}) {
  const auto rows = bus_rows(p.sys, bus_ids);
  const SteppedProfile prof = stepped_profile(p.sys, p.init, m.scenario, m.R_flt, m.R_clr, popt);
  return build_report(m.scenario.id, "analytic", m.scenario.delta_T, bus_ids, rows, p.devices, m.R_flt,
                      [&](std::size_t row) {
                        return compute_vrc_analytic(prof, p.devices, p.vrc_from_fault, m.R_flt, m.R_clr,
                                                    vrc_window(m.scenario), row);
                      });
}

inline IndexReport simulated_report(const PreparedCase& p, const ScenarioModel& m, const Trajectory& tr,
                                    std::vector<int> bus_ids = {}) {
  const auto rows = bus_rows(p.sys, bus_ids);
  return build_report(m.scenario.id, "simulated", m.scenario.delta_T, bus_ids, rows, p.devices, m.R_flt,
                      [&](std::size_t row) {
                        return compute_vrc(tr, p.devices, p.vrc_from_fault, m.R_flt, m.R_clr, vrc_window(m.scenario),
                                           row);
                      });
}

// Monitor-bus VIC/VRC without simulation.
inline FaultIndexes monitor_indexes(const PreparedCase& p, const FaultScenario& s) {
  const ScenarioModel m = scenario_model(p, s);
  const IndexReport rep = analytic_report(p, m, {s.monitor_bus});
  return {s.id, rep.vic_total[0], rep.vrc_total[0]};
}

struct DirectOutcome {
  double V_nadir = 0.0;
  double V_checkpoint = 0.0;
  bool secure = false;  // nadir >= V_th1 and checkpoint >= V_th2
};

inline DirectOutcome direct_outcome(const PreparedCase& p, const FaultScenario& s, const SimOptions& opt) {
  const Trajectory tr = simulate(p.sys, p.init, s, opt);
  const auto metrics = extract_metrics(tr, s);
  const BusMetrics& bm = metrics[tr.bus_position(s.monitor_bus)];
  return {bm.V_nadir, bm.V_checkpoint, bm.V_nadir >= s.V_th1 && bm.V_checkpoint >= s.V_th2};
}

// One requirement sample: index values from the analytic path, voltage
// metrics from the reference simulation. Infeasible points throw
// NumericalError.
inline RequirementSample evaluate_point(const SystemCase& base, const OperatingPoint& op, const FaultScenario& s,
                                        const SimOptions& opt) {
  SystemCase c;
  try {
    c = apply_operating_point(base, op);
  } catch (const ValidationError& e) {
    throw NumericalError(std::string("infeasible operating point: ") + e.what());
  }
  const PreparedCase p = prepare(c);
  const FaultIndexes fi = monitor_indexes(p, s);
  const DirectOutcome d = direct_outcome(p, s, opt);
  RequirementSample out;
  out.vic = fi.vic;
  out.vrc = fi.vrc;
  out.V_nadir = d.V_nadir;
  out.V_checkpoint = d.V_checkpoint;
  return out;
}

inline ZoneSampler make_sampler(const SystemCase& base, const FaultScenario& s, const SamplerOptions& opt,
                                std::uint64_t seed) {
  const PreparedCase p = prepare(base);
  const TopologyStage pre = build_stage(p.sys, p.init.load_admittance, s, StageTag::pre);
  return ZoneSampler(base, electrical_distance(pre, p.devices), s.faulted_bus, opt, seed);
}

}  // namespace stvs
