#pragma once

// Result artifacts: trajectory CSV, JSON reports, event logs.

#include "stvs/case.hpp"
#include "stvs/error.hpp"
#include "stvs/indexes.hpp"
#include "stvs/simulate.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace stvs {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return k;
    throw ValidationError("csv", "no column " + name);
  }
};

inline void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (std::size_t k = 0; k < table.header.size(); ++k) out << (k ? "," : "") << table.header[k];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) return table;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError(path + ":" + std::to_string(lineno), "not a number: " + cell);
      }
    }
    if (row.size() != table.header.size())
      throw ValidationError(path + ":" + std::to_string(lineno), "column count differs from header");
    table.rows.push_back(std::move(row));
  }
  return table;
}

// Columns: t, bus magnitudes, per generator psi/Efd/Q/Qspon/Qexc, motor slips.
inline CsvTable trajectory_table(const Trajectory& tr) {
  CsvTable t;
  t.header.push_back("t");
  for (int id : tr.bus_ids) t.header.push_back("bus_" + std::to_string(id) + "_Vmag");
  for (int id : tr.generator_buses)
    for (const char* q : {"psi", "Efd", "Q", "Qspon", "Qexc"})
      t.header.push_back("gen_" + std::to_string(id) + "_" + q);
  for (int id : tr.motor_buses) t.header.push_back("motor_" + std::to_string(id) + "_slip");
  for (std::size_t r = 0; r < tr.size(); ++r) {
    std::vector<double> row;
    row.reserve(t.header.size());
    row.push_back(tr.t[r]);
    for (const cplx& v : tr.V[r]) row.push_back(std::abs(v));
    for (const GeneratorSample& g : tr.generators[r]) {
      row.push_back(g.psi);
      row.push_back(g.E_fd);
      row.push_back(g.Q_g);
      row.push_back(g.Q_spon);
      row.push_back(g.Q_exc);
    }
    for (const MotorSample& m : tr.motors[r]) row.push_back(m.slip);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_trajectory(const Trajectory& tr, const std::string& path) { write_csv(path, trajectory_table(tr)); }

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

inline json read_json(const std::string& path) {
  try {
    return detail::read_json_file(path);
  } catch (const ValidationError& e) {
    throw IoError(e.what());
  }
}

inline void write_report(const IndexReport& rep, const std::string& path) { write_json(path, report_to_json(rep)); }
inline void write_report(const RequirementCurve& c, const std::string& path) { write_json(path, curve_to_json(c)); }
inline IndexReport read_report(const std::string& path) { return report_from_json(read_json(path)); }

inline void write_events(const std::vector<SimEvent>& events, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& e : events) out << json{{"event", e.event}, {"t", e.t}, {"detail", e.detail}}.dump() << '\n';
}

inline json metrics_to_json(const std::vector<BusMetrics>& metrics, const FaultScenario& s) {
  json buses = json::object();
  for (const auto& m : metrics) {
    json e{{"V_nadir", m.V_nadir}, {"t_nadir", m.t_nadir}, {"V_checkpoint", m.V_checkpoint}};
    e["recovery_time"] = m.recovery_time ? json(*m.recovery_time) : json(nullptr);
    buses[std::to_string(m.bus)] = e;
  }
  return {{"scenario_id", s.id},
          {"monitor_bus", s.monitor_bus},
          {"V_th1", s.V_th1},
          {"V_th2", s.V_th2},
          {"checkpoint_time", s.T_clr + s.checkpoint},
          {"buses", buses}};
}

}  // namespace stvs
