#pragma once

#include "catch_amalgamated.hpp"

#include "stvs/io.hpp"
#include "stvs/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <string>

namespace test {

inline std::string data(const std::string& name) { return std::string(STVS_DATA_DIR) + "/" + name; }
inline std::string test_data(const std::string& name) { return std::string(STVS_TEST_DATA_DIR) + "/" + name; }

inline stvs::json oracle(const std::string& name) { return stvs::read_json(test_data(name)); }

inline const stvs::SystemCase& ieee39() {
  static const stvs::SystemCase c = stvs::load_case(data("ieee39.json"));
  return c;
}

inline stvs::FaultScenario flt_1727() { return stvs::load_scenarios(data("scenarios/flt_1727.json")).at(0); }

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("stvs_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Two-bus case: slack at bus 1 feeding a PQ load at bus 2 over x.
inline stvs::SystemCase two_bus(double P, double Q, double x) {
  stvs::SystemCase c;
  c.base_mva = 100.0;
  c.f0 = 60.0;
  stvs::Bus b1;
  b1.id = 1;
  b1.kind = stvs::BusKind::slack;
  b1.V_set = 1.0;
  stvs::Bus b2;
  b2.id = 2;
  b2.P_load = P;
  b2.Q_load = Q;
  c.buses = {b1, b2};
  stvs::Branch br;
  br.id = "1-2";
  br.from = 1;
  br.to = 2;
  br.x = x;
  c.branches = {br};
  return c;
}

inline stvs::GeneratorParams machine(int bus) {
  stvs::GeneratorParams g;
  g.bus = bus;
  g.x_d = 1.8;
  g.x_d_prime = 0.3;
  g.x_q = 1.7;
  g.x_ad = 1.65;
  g.x_f = 1.65 * 1.65 / 1.5;
  g.T_d0_prime = 6.0;
  g.K_A = 5.0;
  g.T_e = 0.2;
  g.Q_max = 5.0;
  g.H = 5.0;
  return g;
}

}  // namespace test
