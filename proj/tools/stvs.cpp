// stvs: batch front end for power flow, fault simulation, flux indexes and
// requirement assessment. Outputs are CSV/JSON only.

#include "stvs/io.hpp"
#include "stvs/pipeline.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace stvs;

namespace {

struct Global {
  std::uint64_t seed = 1;
  int jobs = 0;
  std::string format = "csv";
  std::string out_dir = "out";
};

struct SimFlags {
  std::optional<double> dt;
  std::optional<double> t_end;
  std::string integrator;
  bool no_swing = false;
  std::optional<int> record_stride;

  SimOptions resolve() const {
    SimOptions o;
    if (dt) o.dt = *dt;
    if (t_end) o.t_end = *t_end;
    if (record_stride) o.record_stride = *record_stride;
    if (integrator == "trapezoidal") o.integrator = Integrator::trapezoidal;
    o.swing_enabled = !no_swing;
    return o;
  }

  void add_to(CLI::App* cmd) {
    cmd->add_option("--dt", dt, "integration step (s)");
    cmd->add_option("--t-end", t_end, "simulated horizon (s)");
    cmd->add_option("--integrator", integrator, "rk4 | trapezoidal")->check(CLI::IsMember({"rk4", "trapezoidal"}));
    cmd->add_flag("--no-swing", no_swing, "hold rotor angles at their pre-fault values");
    cmd->add_option("--record-stride", record_stride, "record every n-th step");
  }
};

int jobs_or_default(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

fs::path ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
  return p;
}

// Tabular outputs honour --format.
std::string write_table(const fs::path& stem, const CsvTable& t, const std::string& format) {
  if (format == "json") {
    json rows = json::array();
    for (const auto& r : t.rows) {
      json e = json::object();
      for (std::size_t k = 0; k < t.header.size(); ++k) e[t.header[k]] = r[k];
      rows.push_back(e);
    }
    const std::string path = stem.string() + ".json";
    write_json(path, rows);
    return path;
  }
  const std::string path = stem.string() + ".csv";
  write_csv(path, t);
  return path;
}

SystemCase load_with_point(const std::string& case_path, const std::string& op_path) {
  SystemCase c = load_case(case_path);
  if (!op_path.empty()) c = apply_operating_point(c, load_operating_point(op_path));
  return c;
}

// Runs f(k) for k in [0, n) on `jobs` threads; the first error is rethrown.
template <typename F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  const auto worker = [&]() {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        f(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!err) err = std::current_exception();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int k = 1; k < nt; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

void print_header(const std::string& cmd, const std::string& case_path, const std::string& scenario_path,
                  const SimOptions& o, const Global& g) {
  std::cerr << "stvs " << cmd << " | case " << case_path;
  if (!scenario_path.empty()) std::cerr << " | scenarios " << scenario_path;
  std::cerr << " | dt " << o.dt << " t_end " << o.t_end << " | seed " << g.seed << " | jobs " << jobs_or_default(g.jobs)
            << " | precedence: flags > scenario file > case defaults\n";
}

// ---------------------------------------------------------------------------

int cmd_case_validate(const std::string& path) {
  const SystemCase c = load_case(path);
  int slack = 0;
  for (const Bus& b : c.buses)
    if (b.kind == BusKind::slack) slack = b.id;
  const json j{{"case", path},
               {"valid", true},
               {"buses", c.buses.size()},
               {"branches", c.branches.size()},
               {"generators", c.generators.size()},
               {"motors", c.motors.size()},
               {"shunts", c.shunts.size()},
               {"slack_bus", slack}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_pf_run(const Global& g, const std::string& case_path, const std::string& op_path) {
  const SystemCase c = load_with_point(case_path, op_path);
  const PowerFlowSolution pf = solve_power_flow(c);
  const fs::path dir = ensure_dir(g.out_dir);
  CsvTable buses;
  buses.header = {"bus", "Vmag", "angle_deg"};
  for (std::size_t k = 0; k < c.buses.size(); ++k)
    buses.rows.push_back({double(c.buses[k].id), std::abs(pf.V[k]), std::arg(pf.V[k]) * 180.0 / kPi});
  CsvTable gens;
  gens.header = {"bus", "P_g", "Q_g"};
  for (std::size_t k = 0; k < c.generators.size(); ++k)
    gens.rows.push_back({double(c.generators[k].bus), pf.P_g[k], pf.Q_g[k]});
  write_table(dir / "pf_buses", buses, g.format);
  write_table(dir / "pf_generators", gens, g.format);
  const json summary{{"converged", true},
                     {"iterations", pf.iterations},
                     {"final_iterations", pf.final_iterations},
                     {"mismatch", pf.mismatch},
                     {"limited_buses", pf.limited_buses}};
  write_json((dir / "pf_summary.json").string(), summary);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_sim_run(const Global& g, const std::string& case_path, const std::string& op_path,
                const std::string& scenario_path, const SimOptions& o) {
  print_header("sim run", case_path, scenario_path, o, g);
  const SystemCase c = load_with_point(case_path, op_path);
  const auto scenarios = load_scenarios(scenario_path);
  const PreparedCase p = prepare(c);
  parallel_for(scenarios.size(), jobs_or_default(g.jobs), [&](std::size_t k) {
    const FaultScenario& s = scenarios[k];
    const Trajectory tr = simulate(p.sys, p.init, s, o);
    const fs::path dir = ensure_dir(fs::path(g.out_dir) / s.id);
    write_trajectory(tr, (dir / "trajectory.csv").string());
    write_json((dir / "metrics.json").string(), metrics_to_json(extract_metrics(tr, s), s));
    write_events(tr.events, (dir / "events.jsonl").string());
  });
  for (const auto& s : scenarios) std::cout << (fs::path(g.out_dir) / s.id).string() << '\n';
  return 0;
}

int cmd_analytic_compare(const Global& g, const std::string& case_path, const std::string& op_path,
                         const std::string& scenario_path, const SimOptions& o, int pieces, double window) {
  print_header("analytic compare", case_path, scenario_path, o, g);
  const SystemCase c = load_with_point(case_path, op_path);
  const auto scenarios = load_scenarios(scenario_path);
  const PreparedCase p = prepare(c);
  parallel_for(scenarios.size(), jobs_or_default(g.jobs), [&](std::size_t k) {
    const FaultScenario& s = scenarios[k];
    const ScenarioModel m = scenario_model(p, s);
    ProfileOptions popt;
    popt.pieces_per_stage = pieces;
    popt.post_window = window;
    const SteppedProfile prof = stepped_profile(p.sys, p.init, s, m.R_flt, m.R_clr, popt);
    const Trajectory tr = simulate(p.sys, p.init, s, o);
    const fs::path dir = ensure_dir(fs::path(g.out_dir) / s.id);
    write_json((dir / "flux_compare.json").string(), comparison_to_json(compare_flux(prof, tr, s.id, window)));

    // Flux traces and reactive-power decomposition, simulated vs analytic.
    CsvTable flux, q;
    flux.header = {"t"};
    q.header = {"t"};
    for (int bus : tr.generator_buses) {
      const std::string b = "gen_" + std::to_string(bus);
      flux.header.insert(flux.header.end(), {b + "_psi_sim", b + "_psi_analytic"});
      q.header.insert(q.header.end(), {b + "_Qspon_sim", b + "_Qexc_sim", b + "_Q_sim", b + "_Qspon_analytic",
                                       b + "_Qexc_analytic", b + "_Q_analytic"});
    }
    for (std::size_t r = 0; r < tr.size(); ++r) {
      const double t = tr.t[r];
      if (t > s.T_clr + window + 1e-12) break;
      std::vector<double> fr{t}, qr{t};
      const ProfilePiece* pc = profile_piece(prof, t);
      for (std::size_t gk = 0; gk < tr.generator_buses.size(); ++gk) {
        const GeneratorSample& gs = tr.generators[r][gk];
        fr.push_back(gs.psi);
        fr.push_back(profile_flux(prof, gk, t));
        qr.insert(qr.end(), {gs.Q_spon, gs.Q_exc, gs.Q_g});
        if (pc) {
          const GeneratorParams& gp = p.sys.generators[p.init.generators[gk].index];
          const AnalyticQ aq = analytic_Q(pc->coeffs[gk], pc->V_dq[gk], gp, t - pc->t_start);
          qr.insert(qr.end(), {aq.Q_spon, aq.Q_exc, aq.Q_g});
        } else {
          qr.insert(qr.end(), {gs.Q_spon, gs.Q_exc, gs.Q_g});
        }
      }
      flux.rows.push_back(std::move(fr));
      q.rows.push_back(std::move(qr));
    }
    write_table(dir / "flux_traces", flux, g.format);
    write_table(dir / "q_decomposition", q, g.format);

    // Device voltage components at the monitor bus.
    const SuperpositionSeries sp = voltage_superposition(p.sys, p.init, s, tr, p.pf.V, s.monitor_bus);
    CsvTable comp;
    comp.header = {"t", "V_sim", "V_sum", "V_generators", "V_motors"};
    for (const auto& d : sp.devices) comp.header.push_back(d);
    for (std::size_t r = 0; r < sp.t.size(); ++r) {
      double vg = 0.0, vm = 0.0;
      for (std::size_t j = 0; j < p.devices.size(); ++j)
        (p.devices[j].kind == DeviceKind::generator ? vg : vm) += sp.components[r][j];
      std::vector<double> row{sp.t[r], sp.V_sim[r], sp.V_est[r], vg, vm};
      row.insert(row.end(), sp.components[r].begin(), sp.components[r].end());
      comp.rows.push_back(std::move(row));
    }
    write_table(dir / "voltage_components", comp, g.format);
    write_json((dir / "superposition.json").string(), {{"scenario_id", s.id},
                                                        {"bus", sp.bus},
                                                        {"error_fault_instant", sp.error_fault_instant},
                                                        {"error_mean", sp.error_mean},
                                                        {"error_max", sp.error_max}});
  });
  for (const auto& s : scenarios) std::cout << (fs::path(g.out_dir) / s.id).string() << '\n';
  return 0;
}

std::vector<int> parse_sites(const std::string& list) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw ValidationError("--condenser-sites", "not a bus id: " + tok);
    }
  }
  return out;
}

int cmd_index_report(const Global& g, const std::string& case_path, const std::string& op_path,
                     const std::string& scenario_path, const SimOptions& o, const std::string& method,
                     const std::vector<int>& buses, const std::string& sites, double rating) {
  print_header("index report", case_path, scenario_path, o, g);
  const SystemCase c = load_with_point(case_path, op_path);
  const auto scenarios = load_scenarios(scenario_path);
  const PreparedCase p = prepare(c);
  const auto site_list = sites.empty() ? std::vector<int>{} : parse_sites(sites);
  parallel_for(scenarios.size(), jobs_or_default(g.jobs), [&](std::size_t k) {
    const FaultScenario& s = scenarios[k];
    const ScenarioModel m = scenario_model(p, s);
    const fs::path dir = ensure_dir(fs::path(g.out_dir) / s.id);
    IndexReport rep;
    if (method == "simulated") {
      rep = simulated_report(p, m, simulate(p.sys, p.init, s, o), buses);
    } else {
      rep = analytic_report(p, m, buses);
    }
    write_report(rep, (dir / "index_report.json").string());
    if (site_list.empty()) return;

    // Condenser siting: monitor-bus VIC with one condenser added per site.
    const double base = monitor_indexes(p, s).vic;
    const TopologyStage pre = build_stage(p.sys, p.init.load_admittance, s, StageTag::pre);
    const RMat dist = electrical_distance(pre, p.devices);
    const auto mon = p.sys.bus_index(s.monitor_bus);
    CsvTable t;
    t.header = {"site", "distance", "vic", "vic_gain"};
    for (int site : site_list) {
      const double V_set = std::abs(p.pf.V[p.sys.bus_index(site)]);
      const PreparedCase q = prepare(with_condenser(p.sys, site, V_set, rating));
      const double vic = monitor_indexes(q, s).vic;
      t.rows.push_back({double(site), dist(mon, p.sys.bus_index(site)), vic, vic - base});
    }
    write_table(dir / "condenser_sites", t, g.format);
  });
  for (const auto& s : scenarios) std::cout << (fs::path(g.out_dir) / s.id).string() << '\n';
  return 0;
}

SamplerOptions sampler_options(double radius, double q_prob) {
  SamplerOptions so;
  so.zone_radius = radius;
  so.q_dispatch_probability = q_prob;
  return so;
}

int cmd_sweep_points(const Global& g, const std::string& case_path, const std::string& op_path,
                     const std::string& scenario_path, const SimOptions& o, std::size_t n, double radius,
                     double q_prob) {
  print_header("sweep points", case_path, scenario_path, o, g);
  const SystemCase c = load_with_point(case_path, op_path);
  const auto scenarios = load_scenarios(scenario_path);
  for (const auto& s : scenarios) {
    const ZoneSampler sampler = make_sampler(c, s, sampler_options(radius, q_prob), g.seed);
    const auto samples =
        run_samples(n, jobs_or_default(g.jobs), [&](std::size_t i) { return evaluate_point(c, sampler(i), s, o); });
    CsvTable t;
    t.header = {"sample", "valid", "vic", "vrc", "V_nadir", "V_checkpoint"};
    for (const auto& r : samples)
      t.rows.push_back({double(r.id), r.valid ? 1.0 : 0.0, r.vic, r.vrc, r.V_nadir, r.V_checkpoint});
    const fs::path dir = ensure_dir(fs::path(g.out_dir) / s.id);
    std::cout << write_table(dir / "sweep", t, g.format) << '\n';
  }
  return 0;
}

int cmd_assess(const Global& g, const std::string& case_path, const std::string& op_path,
               const std::string& scenario_path, const SimOptions& o, std::size_t n, double radius, double q_prob) {
  print_header("assess requirements", case_path, scenario_path, o, g);
  if (n < 20) throw ValidationError("--samples", "at least 20 samples are required");
  const SystemCase c = load_with_point(case_path, op_path);
  const auto scenarios = load_scenarios(scenario_path);
  RequirementTable table;
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const FaultScenario& s = scenarios[k];
    const ZoneSampler sampler = make_sampler(c, s, sampler_options(radius, q_prob), g.seed);
    const RequirementCurve curve = assess_requirements(
        s, n, jobs_or_default(g.jobs), [&](std::size_t i) { return evaluate_point(c, sampler(i), s, o); });
    const fs::path dir = ensure_dir(fs::path(g.out_dir) / s.id);
    write_report(curve, (dir / "requirement_curve.json").string());
    table[s.id] = to_requirement(curve);
  }
  ensure_dir(g.out_dir);
  const std::string path = (fs::path(g.out_dir) / "requirements.json").string();
  write_json(path, requirements_to_json(table));
  std::cout << path << '\n';
  return 0;
}

int cmd_security_check(const Global& g, const std::string& case_path, const std::string& point_path,
                       const std::string& req_path, const std::string& scenario_path, const SimOptions& o,
                       bool direct) {
  const SystemCase base = load_case(case_path);
  const OperatingPoint op = point_path.empty() ? OperatingPoint{} : load_operating_point(point_path);
  const SystemCase c = apply_operating_point(base, op);
  const RequirementTable req = requirements_from_json(read_json(req_path));
  const auto scenarios = load_scenarios(scenario_path);
  const PreparedCase p = prepare(c);
  std::vector<FaultIndexes> idx(scenarios.size());
  std::vector<DirectOutcome> sims(scenarios.size());
  parallel_for(scenarios.size(), jobs_or_default(g.jobs), [&](std::size_t k) {
    idx[k] = monitor_indexes(p, scenarios[k]);
    if (direct) sims[k] = direct_outcome(p, scenarios[k], o);
  });
  const SecurityVerdict v = check_security(idx, req);
  json j = verdict_to_json(v);
  j["point"] = op.id;
  if (direct) {
    for (std::size_t k = 0; k < scenarios.size(); ++k) {
      j["faults"][k]["V_nadir_sim"] = sims[k].V_nadir;
      j["faults"][k]["V_checkpoint_sim"] = sims[k].V_checkpoint;
      j["faults"][k]["secure_sim"] = sims[k].secure;
    }
  }
  ensure_dir(g.out_dir);
  const std::string stem = op.id.empty() ? "verdict" : "verdict_" + op.id;
  write_json((fs::path(g.out_dir) / (stem + ".json")).string(), j);
  std::cout << "fault        VIC      VIR      margin   VRC      VRR      margin   verdict\n";
  for (const auto& f : v.faults) {
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %8.4f %8.4f %+8.4f %8.4f %8.4f %+8.4f   %s\n", f.fault_id.c_str(), f.vic,
                  f.vir, f.vic_margin, f.vrc, f.vrr, f.vrc_margin, f.secure ? "secure" : "insecure");
    std::cout << line;
  }
  std::cout << "overall: " << (v.secure ? "secure" : "insecure") << '\n';
  return 0;
}

int report_error(const char* kind, const std::string& msg, const std::string& path, int code) {
  json j{{"error", kind}, {"message", msg}, {"exit_code", code}};
  if (!path.empty()) j["path"] = path;
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Short-term voltage stability toolkit"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads (default: available cores)");
  app.add_option("--format", g.format, "tabular output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("-o,--out", g.out_dir, "output directory")->capture_default_str();

  std::string case_path, op_path, scenario_path, req_path, point_path, method = "analytic", sites;
  std::vector<int> buses;
  std::size_t n_samples = 200;
  double radius = 0.03, q_prob = 0.0, window = 0.4, rating = 2.0;
  int pieces = 1;
  bool direct = false;
  SimFlags sim;

  auto add_case = [&](CLI::App* cmd) {
    cmd->add_option("--case", case_path, "case file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--op", op_path, "operating-point overrides")->check(CLI::ExistingFile);
  };
  auto add_scenario = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_path, "scenario file (one or many)")->required()->check(CLI::ExistingFile);
  };
  auto add_sampler = [&](CLI::App* cmd) {
    cmd->add_option("--samples", n_samples, "operating points per fault")->capture_default_str();
    cmd->add_option("--zone-radius", radius, "electrical-distance radius of the fault zone")->capture_default_str();
    cmd->add_option("--q-dispatch", q_prob, "probability that a zone unit runs at fixed Q")->capture_default_str();
  };

  auto* case_cmd = app.add_subcommand("case", "case files")->require_subcommand(1);
  auto* case_validate = case_cmd->add_subcommand("validate", "validate a case file");
  case_validate->add_option("path", case_path, "case file")->required();

  auto* pf_cmd = app.add_subcommand("pf", "power flow")->require_subcommand(1);
  auto* pf_run = pf_cmd->add_subcommand("run", "solve the power flow");
  add_case(pf_run);

  auto* sim_cmd = app.add_subcommand("sim", "time-domain simulation")->require_subcommand(1);
  auto* sim_run = sim_cmd->add_subcommand("run", "simulate fault scenarios");
  add_case(sim_run);
  add_scenario(sim_run);
  sim.add_to(sim_run);

  auto* an_cmd = app.add_subcommand("analytic", "closed-form flux")->require_subcommand(1);
  auto* an_compare = an_cmd->add_subcommand("compare", "analytic vs simulated flux, Q decomposition, voltage components");
  add_case(an_compare);
  add_scenario(an_compare);
  sim.add_to(an_compare);
  an_compare->add_option("--pieces", pieces, "voltage steps per stage")->capture_default_str();
  an_compare->add_option("--window", window, "post-clearing comparison window (s)")->capture_default_str();

  auto* idx_cmd = app.add_subcommand("index", "voltage support indexes")->require_subcommand(1);
  auto* idx_report = idx_cmd->add_subcommand("report", "VIC/VRC per bus and device");
  add_case(idx_report);
  add_scenario(idx_report);
  sim.add_to(idx_report);
  idx_report->add_option("--method", method, "analytic | simulated")
      ->check(CLI::IsMember({"analytic", "simulated"}))
      ->capture_default_str();
  idx_report->add_option("--buses", buses, "report rows (default: all buses)")->delimiter(',');
  idx_report->add_option("--condenser-sites", sites, "comma-separated candidate buses for a condenser");
  idx_report->add_option("--condenser-rating", rating, "condenser rating (pu of system base)")->capture_default_str();

  auto* as_cmd = app.add_subcommand("assess", "requirement assessment")->require_subcommand(1);
  auto* as_req = as_cmd->add_subcommand("requirements", "VIR/VRR per fault from sampled operating points");
  add_case(as_req);
  add_scenario(as_req);
  sim.add_to(as_req);
  add_sampler(as_req);

  auto* sec_cmd = app.add_subcommand("security", "security screening")->require_subcommand(1);
  auto* sec_check = sec_cmd->add_subcommand("check", "check an operating point against requirements");
  sec_check->add_option("--case", case_path, "case file")->required()->check(CLI::ExistingFile);
  sec_check->add_option("--point", point_path, "operating point")->check(CLI::ExistingFile);
  sec_check->add_option("--requirements", req_path, "requirement table")->required()->check(CLI::ExistingFile);
  add_scenario(sec_check);
  sim.add_to(sec_check);
  sec_check->add_flag("--simulate", direct, "also simulate every fault for comparison");

  auto* sw_cmd = app.add_subcommand("sweep", "operating-point sweeps")->require_subcommand(1);
  auto* sw_points = sw_cmd->add_subcommand("points", "VIC/VRC and simulated voltage metrics per sampled point");
  add_case(sw_points);
  add_scenario(sw_points);
  sim.add_to(sw_points);
  add_sampler(sw_points);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("validation", e.what(), "", 1);
  }

  try {
    const SimOptions o = sim.resolve();
    if (case_validate->parsed()) return cmd_case_validate(case_path);
    if (pf_run->parsed()) return cmd_pf_run(g, case_path, op_path);
    if (sim_run->parsed()) return cmd_sim_run(g, case_path, op_path, scenario_path, o);
    if (an_compare->parsed()) return cmd_analytic_compare(g, case_path, op_path, scenario_path, o, pieces, window);
    if (idx_report->parsed())
      return cmd_index_report(g, case_path, op_path, scenario_path, o, method, buses, sites, rating);
    if (as_req->parsed()) return cmd_assess(g, case_path, op_path, scenario_path, o, n_samples, radius, q_prob);
    if (sec_check->parsed()) return cmd_security_check(g, case_path, point_path, req_path, scenario_path, o, direct);
    if (sw_points->parsed()) return cmd_sweep_points(g, case_path, op_path, scenario_path, o, n_samples, radius, q_prob);
  } catch (const ValidationError& e) {
    return report_error(e.kind(), e.what(), e.path(), 1);
  } catch (const ParseError& e) {
    return report_error(e.kind(), e.what(), "", 1);
  } catch (const NumericalError& e) {
    return report_error(e.kind(), e.what(), "", 2);
  } catch (const IoError& e) {
    return report_error(e.kind(), e.what(), "", 3);
  }
  return 1;
}
