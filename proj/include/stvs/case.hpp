#pragma once

// System case, operating point and fault scenario model together with the
// JSON schema readers/writers and validation.

#include "stvs/error.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace stvs {

using nlohmann::json;

enum class BusKind { slack, pv, pq };

struct Bus {
  int id = 0;
  BusKind kind = BusKind::pq;
  std::optional<double> V_set;  // slack/PV only
  double P_load = 0.0;
  double Q_load = 0.0;
  double motor_share = 0.0;  // fraction of P_load served by an induction motor
  bool operator==(const Bus&) const = default;
};

struct Branch {
  std::string id;  // defaults to "<from>-<to>"
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double b = 0.0;    // total line charging
  double tap = 1.0;  // off-nominal ratio on the from side
  bool status = true;
  bool operator==(const Branch&) const = default;
};

struct GeneratorParams {
  int bus = 0;
  double P_g0 = 0.0;
  std::optional<double> Q_g0;  // when set the unit is dispatched at fixed Q
  double x_d = 0.0;
  double x_d_prime = 0.0;
  double x_q = 0.0;
  double x_ad = 0.0;
  double x_f = 0.0;
  double T_d0_prime = 0.0;
  double K_A = 0.0;
  double T_e = 0.0;
  double Q_max = 0.0;
  double H = 0.0;  // inertia constant (s), swing equation only
  double D = 0.0;  // damping (pu torque / pu speed)
  bool is_condenser = false;
  bool status = true;
  bool vrc_from_fault = false;  // VRC window starts at fault inception

  // Short-circuit transient time constant T'_d = T'_d0 x'_d / x_d.
  double T_d_prime() const { return T_d0_prime * x_d_prime / x_d; }
  bool operator==(const GeneratorParams&) const = default;
};

struct MotorParams {
  int bus = 0;
  double X_1 = 0.0;
  double X_2 = 0.0;
  double R_2 = 0.0;
  double T_0_prime = 0.0;
  double H_m = 0.0;
  double load_torque_exponent = 2.0;

  // Magnetizing reactance implied by the rotor time constant.
  double X_mu(double f0) const { return 2.0 * std::numbers::pi * f0 * T_0_prime * R_2 - X_2; }
  bool operator==(const MotorParams&) const = default;
};

struct Shunt {
  std::string id;
  int bus = 0;
  double b = 0.0;  // susceptance, capacitive positive
  bool status = true;
  bool operator==(const Shunt&) const = default;
};

struct SystemCase {
  double base_mva = 100.0;
  double f0 = 60.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<GeneratorParams> generators;
  std::vector<MotorParams> motors;
  std::vector<Shunt> shunts;

  bool operator==(const SystemCase&) const = default;

  // Position of a bus id in `buses`; throws ValidationError when absent.
  std::size_t bus_index(int id) const {
    for (std::size_t k = 0; k < buses.size(); ++k)
      if (buses[k].id == id) return k;
    throw ValidationError("bus", "unknown bus id " + std::to_string(id));
  }
  std::optional<std::size_t> find_branch(const std::string& id) const {
    for (std::size_t k = 0; k < branches.size(); ++k)
      if (branches[k].id == id) return k;
    return std::nullopt;
  }
  std::optional<std::size_t> find_generator(int bus) const {
    for (std::size_t k = 0; k < generators.size(); ++k)
      if (generators[k].bus == bus) return k;
    return std::nullopt;
  }
};

// Composite industrial motor on its own rating; used for buses with
// motor_share > 0 and no explicit MotorParams. The rating is P_m / load_factor.
struct CompositeMotor {
  static constexpr double X_1 = 0.10;
  static constexpr double X_2 = 0.12;
  static constexpr double R_2 = 0.02;
  static constexpr double X_mu = 3.0;
  static constexpr double H_m = 0.7;
  static constexpr double torque_exponent = 2.0;
  static constexpr double load_factor = 0.8;
};

// Motor parameters on system base for a motor of active power `P_m` (pu).
inline MotorParams composite_motor(int bus, double P_m, double f0) {
  const double rating = P_m / CompositeMotor::load_factor;  // pu of system base
  const double scale = rating > 0.0 ? 1.0 / rating : 1.0;
  MotorParams m;
  m.bus = bus;
  m.X_1 = CompositeMotor::X_1 * scale;
  m.X_2 = CompositeMotor::X_2 * scale;
  m.R_2 = CompositeMotor::R_2 * scale;
  m.T_0_prime = (CompositeMotor::X_2 + CompositeMotor::X_mu) / (2.0 * std::numbers::pi * f0 * CompositeMotor::R_2);
  m.H_m = CompositeMotor::H_m * (rating > 0.0 ? rating : 1.0);
  m.load_torque_exponent = CompositeMotor::torque_exponent;
  return m;
}

struct GeneratorSetpoint {
  int bus = 0;
  std::optional<double> P_g0;
  std::optional<double> Q_g0;
  std::optional<double> V_g0;
  std::optional<bool> status;
};

struct ShuntSetpoint {
  std::string id;
  bool status = true;
};

struct BusSetpoint {
  int id = 0;
  std::optional<double> load_scale;
  std::optional<double> motor_share;
};

struct OperatingPoint {
  std::string id;
  std::vector<GeneratorSetpoint> generators;
  std::vector<ShuntSetpoint> shunts;
  std::vector<BusSetpoint> buses;
};

struct FaultScenario {
  std::string id;
  int faulted_bus = 0;
  std::string tripped_branch;  // empty: nothing is opened at clearing
  int monitor_bus = 0;
  double t_fault = 0.1;
  double T_clr = 0.2;  // absolute clearing instant (s)
  double fault_admittance = 1e4;
  double V_th1 = 0.75;
  double V_th2 = 0.85;
  double delta_T = 0.4;
  double checkpoint = 0.4;  // recovery deadline after clearing (s)
};

namespace detail {

inline std::string at(const std::string& path, const char* key) { return path + "." + key; }

template <typename T>
T get_required(const json& j, const std::string& path, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(at(path, key), "missing field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(at(path, key), std::string("wrong type: ") + e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(at(path, key), std::string("wrong type: ") + e.what());
  }
}

template <typename T>
std::optional<T> get_opt(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(at(path, key), std::string("wrong type: ") + e.what());
  }
}

inline std::string idx(const std::string& path, std::size_t k) { return path + "[" + std::to_string(k) + "]"; }

inline const json& array_field(const json& j, const char* key) {
  static const json empty = json::array();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_array()) throw ValidationError(key, "expected an array");
  return j.at(key);
}

inline BusKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "slack") return BusKind::slack;
  if (s == "PV" || s == "pv") return BusKind::pv;
  if (s == "PQ" || s == "pq") return BusKind::pq;
  throw ValidationError(path, "unknown bus kind '" + s + "'");
}

inline const char* kind_name(BusKind k) {
  switch (k) {
    case BusKind::slack: return "slack";
    case BusKind::pv: return "PV";
    case BusKind::pq: return "PQ";
  }
  return "PQ";
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace detail

inline void validate(const SystemCase& c) {
  using detail::idx;
  if (!(c.base_mva > 0.0)) throw ValidationError("base_mva", "must be positive");
  if (!(c.f0 > 0.0)) throw ValidationError("f0", "must be positive");
  if (c.buses.empty()) throw ValidationError("buses", "case has no buses");

  std::set<int> ids;
  int slack = 0;
  for (std::size_t k = 0; k < c.buses.size(); ++k) {
    const Bus& b = c.buses[k];
    const auto p = idx("buses", k);
    if (!ids.insert(b.id).second) throw ValidationError(p + ".id", "duplicate bus id " + std::to_string(b.id));
    if (b.kind == BusKind::slack) ++slack;
    if (b.kind != BusKind::pq) {
      if (!b.V_set) throw ValidationError(p + ".V_set", "required for slack/PV buses");
      if (!(*b.V_set > 0.8 && *b.V_set < 1.2)) throw ValidationError(p + ".V_set", "outside (0.8, 1.2)");
    }
    if (!(b.motor_share >= 0.0 && b.motor_share <= 1.0))
      throw ValidationError(p + ".motor_share", "outside [0, 1]");
  }
  if (slack != 1) throw ValidationError("buses", "expected exactly one slack bus, found " + std::to_string(slack));

  std::set<std::string> branch_ids;
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const Branch& br = c.branches[k];
    const auto p = idx("branches", k);
    if (!ids.count(br.from)) throw ValidationError(p + ".from", "unknown bus " + std::to_string(br.from));
    if (!ids.count(br.to)) throw ValidationError(p + ".to", "unknown bus " + std::to_string(br.to));
    if (br.from == br.to) throw ValidationError(p, "branch connects a bus to itself");
    if (!(br.x != 0.0) || !std::isfinite(br.x)) throw ValidationError(p + ".x", "series reactance must be nonzero");
    if (!(br.tap > 0.0)) throw ValidationError(p + ".tap", "must be positive");
    if (!branch_ids.insert(br.id).second) throw ValidationError(p + ".id", "duplicate branch id " + br.id);
  }

  std::set<int> gen_buses;
  for (std::size_t k = 0; k < c.generators.size(); ++k) {
    const GeneratorParams& g = c.generators[k];
    const auto p = idx("generators", k);
    if (!ids.count(g.bus)) throw ValidationError(p + ".bus", "unknown bus " + std::to_string(g.bus));
    if (!gen_buses.insert(g.bus).second) throw ValidationError(p + ".bus", "more than one generator on bus");
    if (!(g.x_d_prime > 0.0)) throw ValidationError(p + ".x_d_prime", "must be positive");
    if (!(g.x_d >= g.x_d_prime)) throw ValidationError(p + ".x_d", "must be >= x_d_prime");
    if (!(g.x_q > 0.0)) throw ValidationError(p + ".x_q", "must be positive");
    if (!(g.x_ad > 0.0)) throw ValidationError(p + ".x_ad", "must be positive");
    if (!(g.x_f > 0.0)) throw ValidationError(p + ".x_f", "must be positive");
    if (std::abs(g.x_ad * g.x_ad / g.x_f - (g.x_d - g.x_d_prime)) > 1e-6 * g.x_d)
      throw ValidationError(p + ".x_f", "inconsistent: x_ad^2/x_f must equal x_d - x_d_prime");
    if (!(g.T_d0_prime > 0.0)) throw ValidationError(p + ".T_d0_prime", "must be positive");
    if (!(g.T_e > 0.0)) throw ValidationError(p + ".T_e", "must be positive");
    if (!(g.K_A >= 0.0)) throw ValidationError(p + ".K_A", "must be non-negative");
    if (!(g.H >= 0.0)) throw ValidationError(p + ".H", "must be non-negative");
    if (g.is_condenser && g.P_g0 != 0.0) throw ValidationError(p + ".P_g0", "condenser must have zero active power");
    if (g.Q_g0 && *g.Q_g0 > g.Q_max) throw ValidationError(p + ".Q_g0", "exceeds Q_max");
    const Bus& b = c.buses[c.bus_index(g.bus)];
    if (b.kind == BusKind::pq && !g.Q_g0 && g.status)
      throw ValidationError(p + ".Q_g0", "generator on a PQ bus needs a fixed Q_g0");
  }

  std::set<int> motor_buses;
  for (std::size_t k = 0; k < c.motors.size(); ++k) {
    const MotorParams& m = c.motors[k];
    const auto p = idx("motors", k);
    if (!ids.count(m.bus)) throw ValidationError(p + ".bus", "unknown bus " + std::to_string(m.bus));
    if (!motor_buses.insert(m.bus).second) throw ValidationError(p + ".bus", "more than one motor on bus");
    if (!(m.X_1 > 0.0)) throw ValidationError(p + ".X_1", "must be positive");
    if (!(m.X_2 > 0.0)) throw ValidationError(p + ".X_2", "must be positive");
    if (!(m.R_2 > 0.0)) throw ValidationError(p + ".R_2", "must be positive");
    if (!(m.T_0_prime > 0.0)) throw ValidationError(p + ".T_0_prime", "must be positive");
    if (!(m.H_m > 0.0)) throw ValidationError(p + ".H_m", "must be positive");
    if (!(m.X_mu(c.f0) > 0.0))
      throw ValidationError(p + ".T_0_prime", "implied magnetizing reactance 2*pi*f0*T_0_prime*R_2 - X_2 is not positive");
  }

  std::set<std::string> shunt_ids;
  for (std::size_t k = 0; k < c.shunts.size(); ++k) {
    const Shunt& s = c.shunts[k];
    const auto p = idx("shunts", k);
    if (!ids.count(s.bus)) throw ValidationError(p + ".bus", "unknown bus " + std::to_string(s.bus));
    if (!shunt_ids.insert(s.id).second) throw ValidationError(p + ".id", "duplicate shunt id " + s.id);
  }
}

inline SystemCase case_from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ValidationError("$", "case must be a JSON object");
  SystemCase c;
  c.base_mva = get_required<double>(j, "$", "base_mva");
  c.f0 = get_required<double>(j, "$", "f0");

  const json& buses = array_field(j, "buses");
  for (std::size_t k = 0; k < buses.size(); ++k) {
    const auto p = idx("buses", k);
    const json& e = buses[k];
    Bus b;
    b.id = get_required<int>(e, p, "id");
    b.kind = parse_kind(get_required<std::string>(e, p, "kind"), p + ".kind");
    b.V_set = get_opt<double>(e, p, "V_set");
    b.P_load = get_or<double>(e, p, "P_load", 0.0);
    b.Q_load = get_or<double>(e, p, "Q_load", 0.0);
    b.motor_share = get_or<double>(e, p, "motor_share", 0.0);
    c.buses.push_back(b);
  }

  const json& branches = array_field(j, "branches");
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const auto p = idx("branches", k);
    const json& e = branches[k];
    Branch br;
    br.from = get_required<int>(e, p, "from");
    br.to = get_required<int>(e, p, "to");
    br.id = get_or<std::string>(e, p, "id", std::to_string(br.from) + "-" + std::to_string(br.to));
    br.r = get_or<double>(e, p, "r", 0.0);
    br.x = get_required<double>(e, p, "x");
    br.b = get_or<double>(e, p, "b", 0.0);
    br.tap = get_or<double>(e, p, "tap", 1.0);
    br.status = get_or<bool>(e, p, "status", true);
    c.branches.push_back(br);
  }

  const json& gens = array_field(j, "generators");
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const auto p = idx("generators", k);
    const json& e = gens[k];
    GeneratorParams g;
    g.bus = get_required<int>(e, p, "bus");
    g.P_g0 = get_or<double>(e, p, "P_g0", 0.0);
    g.Q_g0 = get_opt<double>(e, p, "Q_g0");
    g.x_d = get_required<double>(e, p, "x_d");
    g.x_d_prime = get_required<double>(e, p, "x_d_prime");
    g.x_q = get_required<double>(e, p, "x_q");
    g.x_ad = get_required<double>(e, p, "x_ad");
    g.x_f = get_required<double>(e, p, "x_f");
    g.T_d0_prime = get_required<double>(e, p, "T_d0_prime");
    g.K_A = get_required<double>(e, p, "K_A");
    g.T_e = get_required<double>(e, p, "T_e");
    g.Q_max = get_required<double>(e, p, "Q_max");
    g.H = get_or<double>(e, p, "H", 0.0);
    g.D = get_or<double>(e, p, "D", 0.0);
    g.is_condenser = get_or<bool>(e, p, "is_condenser", false);
    g.status = get_or<bool>(e, p, "status", true);
    g.vrc_from_fault = get_or<bool>(e, p, "vrc_from_fault", false);
    c.generators.push_back(g);
  }

  const json& motors = array_field(j, "motors");
  for (std::size_t k = 0; k < motors.size(); ++k) {
    const auto p = idx("motors", k);
    const json& e = motors[k];
    MotorParams m;
    m.bus = get_required<int>(e, p, "bus");
    m.X_1 = get_required<double>(e, p, "X_1");
    m.X_2 = get_required<double>(e, p, "X_2");
    m.R_2 = get_required<double>(e, p, "R_2");
    m.T_0_prime = get_required<double>(e, p, "T_0_prime");
    m.H_m = get_required<double>(e, p, "H_m");
    m.load_torque_exponent = get_or<double>(e, p, "load_torque_exponent", 2.0);
    c.motors.push_back(m);
  }

  const json& shunts = array_field(j, "shunts");
  for (std::size_t k = 0; k < shunts.size(); ++k) {
    const auto p = idx("shunts", k);
    const json& e = shunts[k];
    Shunt s;
    s.bus = get_required<int>(e, p, "bus");
    s.id = get_or<std::string>(e, p, "id", "shunt_" + std::to_string(k));
    s.b = get_required<double>(e, p, "b");
    s.status = get_or<bool>(e, p, "status", true);
    c.shunts.push_back(s);
  }

  validate(c);
  return c;
}

inline json case_to_json(const SystemCase& c) {
  json j;
  j["base_mva"] = c.base_mva;
  j["f0"] = c.f0;
  j["buses"] = json::array();
  for (const Bus& b : c.buses) {
    json e{{"id", b.id}, {"kind", detail::kind_name(b.kind)}, {"P_load", b.P_load}, {"Q_load", b.Q_load},
           {"motor_share", b.motor_share}};
    if (b.V_set) e["V_set"] = *b.V_set;
    j["buses"].push_back(e);
  }
  j["branches"] = json::array();
  for (const Branch& br : c.branches)
    j["branches"].push_back({{"id", br.id}, {"from", br.from}, {"to", br.to}, {"r", br.r}, {"x", br.x},
                             {"b", br.b}, {"tap", br.tap}, {"status", br.status}});
  j["generators"] = json::array();
  for (const GeneratorParams& g : c.generators) {
    json e{{"bus", g.bus},       {"P_g0", g.P_g0},   {"x_d", g.x_d},     {"x_d_prime", g.x_d_prime},
           {"x_q", g.x_q},       {"x_ad", g.x_ad},   {"x_f", g.x_f},     {"T_d0_prime", g.T_d0_prime},
           {"K_A", g.K_A},       {"T_e", g.T_e},     {"Q_max", g.Q_max}, {"H", g.H},
           {"D", g.D},           {"is_condenser", g.is_condenser},       {"status", g.status},
           {"vrc_from_fault", g.vrc_from_fault}};
    if (g.Q_g0) e["Q_g0"] = *g.Q_g0;
    j["generators"].push_back(e);
  }
  j["motors"] = json::array();
  for (const MotorParams& m : c.motors)
    j["motors"].push_back({{"bus", m.bus}, {"X_1", m.X_1}, {"X_2", m.X_2}, {"R_2", m.R_2},
                           {"T_0_prime", m.T_0_prime}, {"H_m", m.H_m},
                           {"load_torque_exponent", m.load_torque_exponent}});
  j["shunts"] = json::array();
  for (const Shunt& s : c.shunts)
    j["shunts"].push_back({{"id", s.id}, {"bus", s.bus}, {"b", s.b}, {"status", s.status}});
  return j;
}

inline SystemCase load_case(const std::string& path) { return case_from_json(detail::read_json_file(path)); }

inline void save_case(const SystemCase& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << case_to_json(c).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Operating points

inline OperatingPoint operating_point_from_json(const json& j) {
  using namespace detail;
  OperatingPoint op;
  op.id = get_or<std::string>(j, "$", "id", "");
  const json& gens = array_field(j, "generators");
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const auto p = idx("generators", k);
    GeneratorSetpoint g;
    g.bus = get_required<int>(gens[k], p, "bus");
    g.P_g0 = get_opt<double>(gens[k], p, "P_g0");
    g.Q_g0 = get_opt<double>(gens[k], p, "Q_g0");
    g.V_g0 = get_opt<double>(gens[k], p, "V_g0");
    g.status = get_opt<bool>(gens[k], p, "status");
    op.generators.push_back(g);
  }
  const json& shunts = array_field(j, "shunts");
  for (std::size_t k = 0; k < shunts.size(); ++k) {
    const auto p = idx("shunts", k);
    op.shunts.push_back({get_required<std::string>(shunts[k], p, "id"), get_required<bool>(shunts[k], p, "status")});
  }
  const json& buses = array_field(j, "buses");
  for (std::size_t k = 0; k < buses.size(); ++k) {
    const auto p = idx("buses", k);
    BusSetpoint b;
    b.id = get_required<int>(buses[k], p, "id");
    b.load_scale = get_opt<double>(buses[k], p, "load_scale");
    b.motor_share = get_opt<double>(buses[k], p, "motor_share");
    op.buses.push_back(b);
  }
  return op;
}

inline json operating_point_to_json(const OperatingPoint& op) {
  json j;
  j["id"] = op.id;
  j["generators"] = json::array();
  for (const auto& g : op.generators) {
    json e{{"bus", g.bus}};
    if (g.P_g0) e["P_g0"] = *g.P_g0;
    if (g.Q_g0) e["Q_g0"] = *g.Q_g0;
    if (g.V_g0) e["V_g0"] = *g.V_g0;
    if (g.status) e["status"] = *g.status;
    j["generators"].push_back(e);
  }
  j["shunts"] = json::array();
  for (const auto& s : op.shunts) j["shunts"].push_back({{"id", s.id}, {"status", s.status}});
  j["buses"] = json::array();
  for (const auto& b : op.buses) {
    json e{{"id", b.id}};
    if (b.load_scale) e["load_scale"] = *b.load_scale;
    if (b.motor_share) e["motor_share"] = *b.motor_share;
    j["buses"].push_back(e);
  }
  return j;
}

inline OperatingPoint load_operating_point(const std::string& path) {
  return operating_point_from_json(detail::read_json_file(path));
}

// Returns a copy of `c` with the operating-point substitutions applied. The
// input is never modified.
inline SystemCase apply_operating_point(const SystemCase& c, const OperatingPoint& op) {
  SystemCase out = c;
  for (std::size_t k = 0; k < op.generators.size(); ++k) {
    const auto& sp = op.generators[k];
    const auto p = detail::idx("generators", k);
    const auto gi = out.find_generator(sp.bus);
    if (!gi) throw ValidationError(p + ".bus", "no generator on bus " + std::to_string(sp.bus));
    GeneratorParams& g = out.generators[*gi];
    if (sp.status) g.status = *sp.status;
    if (sp.P_g0) {
      if (*sp.P_g0 < 0.0) throw ValidationError(p + ".P_g0", "must be non-negative");
      if (g.is_condenser && *sp.P_g0 != 0.0) throw ValidationError(p + ".P_g0", "condenser active power is fixed at 0");
      g.P_g0 = *sp.P_g0;
    }
    if (sp.V_g0) {
      if (!(*sp.V_g0 > 0.8 && *sp.V_g0 < 1.2)) throw ValidationError(p + ".V_g0", "outside (0.8, 1.2)");
      Bus& b = out.buses[out.bus_index(sp.bus)];
      if (b.kind == BusKind::pq) throw ValidationError(p + ".V_g0", "bus is not voltage controlled");
      b.V_set = *sp.V_g0;
      g.Q_g0.reset();
    }
    if (sp.Q_g0) {
      if (*sp.Q_g0 > g.Q_max) throw ValidationError(p + ".Q_g0", "exceeds Q_max");
      g.Q_g0 = *sp.Q_g0;
    }
  }
  for (std::size_t k = 0; k < op.shunts.size(); ++k) {
    const auto& sp = op.shunts[k];
    bool found = false;
    for (Shunt& s : out.shunts)
      if (s.id == sp.id) {
        s.status = sp.status;
        found = true;
      }
    if (!found) throw ValidationError(detail::idx("shunts", k) + ".id", "unknown shunt " + sp.id);
  }
  for (std::size_t k = 0; k < op.buses.size(); ++k) {
    const auto& sp = op.buses[k];
    const auto p = detail::idx("buses", k);
    std::size_t bi = 0;
    try {
      bi = out.bus_index(sp.id);
    } catch (const ValidationError&) {
      throw ValidationError(p + ".id", "unknown bus " + std::to_string(sp.id));
    }
    Bus& b = out.buses[bi];
    if (sp.load_scale) {
      if (*sp.load_scale < 0.0) throw ValidationError(p + ".load_scale", "must be non-negative");
      b.P_load *= *sp.load_scale;
      b.Q_load *= *sp.load_scale;
    }
    if (sp.motor_share) {
      if (!(*sp.motor_share >= 0.0 && *sp.motor_share <= 1.0))
        throw ValidationError(p + ".motor_share", "outside [0, 1]");
      b.motor_share = *sp.motor_share;
    }
  }
  validate(out);
  return out;
}

// Copy of `c` with a synchronous condenser on `bus` regulating its terminal
// to V_set. Machine data are those of a typical salient condenser scaled to
// `rating` (pu of the system base).
inline SystemCase with_condenser(const SystemCase& c, int bus, double V_set, double rating = 2.0) {
  if (!(rating > 0.0)) throw ValidationError("condenser.rating", "must be positive");
  if (c.find_generator(bus)) throw ValidationError("condenser.bus", "bus " + std::to_string(bus) + " already has a machine");
  SystemCase out = c;
  Bus& b = out.buses[out.bus_index(bus)];
  if (b.kind == BusKind::pq) b.kind = BusKind::pv;
  b.V_set = V_set;
  GeneratorParams g;
  g.bus = bus;
  g.is_condenser = true;
  g.x_d = 1.8 / rating;
  g.x_d_prime = 0.3 / rating;
  g.x_q = 1.15 / rating;
  g.x_ad = g.x_d - 0.15 / rating;
  g.x_f = g.x_ad * g.x_ad / (g.x_d - g.x_d_prime);
  g.T_d0_prime = 6.0;
  g.K_A = 5.0;
  g.T_e = 0.2;
  g.Q_max = rating;
  g.H = 1.5 * rating;
  out.generators.push_back(g);
  validate(out);
  return out;
}

// ---------------------------------------------------------------------------
// Fault scenarios

inline void validate(const FaultScenario& s, const SystemCase& c) {
  const std::string p = "scenario[" + s.id + "]";
  if (!(s.t_fault >= 0.0)) throw ValidationError(p + ".t_fault", "must be non-negative");
  if (!(s.T_clr > s.t_fault)) throw ValidationError(p + ".T_clr", "must be later than t_fault");
  if (!(s.delta_T > 0.0)) throw ValidationError(p + ".delta_T", "must be positive");
  if (!(s.checkpoint >= 0.0)) throw ValidationError(p + ".checkpoint", "must be non-negative");
  if (!(s.fault_admittance >= 0.0)) throw ValidationError(p + ".fault_admittance", "must be non-negative");
  try {
    c.bus_index(s.faulted_bus);
  } catch (const ValidationError&) {
    throw ValidationError(p + ".faulted_bus", "unknown bus " + std::to_string(s.faulted_bus));
  }
  try {
    c.bus_index(s.monitor_bus);
  } catch (const ValidationError&) {
    throw ValidationError(p + ".monitor_bus", "unknown bus " + std::to_string(s.monitor_bus));
  }
  if (!s.tripped_branch.empty() && !c.find_branch(s.tripped_branch))
    throw ValidationError(p + ".tripped_branch", "unknown branch " + s.tripped_branch);
}

inline FaultScenario scenario_from_json(const json& j, const std::string& path = "scenario") {
  using namespace detail;
  FaultScenario s;
  s.id = get_required<std::string>(j, path, "id");
  s.faulted_bus = get_required<int>(j, path, "faulted_bus");
  s.tripped_branch = get_or<std::string>(j, path, "tripped_branch", "");
  s.monitor_bus = get_or<int>(j, path, "monitor_bus", s.faulted_bus);
  s.t_fault = get_or<double>(j, path, "t_fault", s.t_fault);
  s.T_clr = get_or<double>(j, path, "T_clr", s.T_clr);
  s.fault_admittance = get_or<double>(j, path, "fault_admittance", s.fault_admittance);
  s.V_th1 = get_or<double>(j, path, "V_th1", s.V_th1);
  s.V_th2 = get_or<double>(j, path, "V_th2", s.V_th2);
  s.delta_T = get_or<double>(j, path, "delta_T", s.delta_T);
  s.checkpoint = get_or<double>(j, path, "checkpoint", s.checkpoint);
  return s;
}

inline json scenario_to_json(const FaultScenario& s) {
  return {{"id", s.id},           {"faulted_bus", s.faulted_bus},
          {"tripped_branch", s.tripped_branch}, {"monitor_bus", s.monitor_bus},
          {"t_fault", s.t_fault}, {"T_clr", s.T_clr},
          {"fault_admittance", s.fault_admittance}, {"V_th1", s.V_th1},
          {"V_th2", s.V_th2},     {"delta_T", s.delta_T},
          {"checkpoint", s.checkpoint}};
}

// Accepts a single scenario object, an array, or {"scenarios": [...]}.
inline std::vector<FaultScenario> load_scenarios(const std::string& path) {
  const json j = detail::read_json_file(path);
  std::vector<FaultScenario> out;
  const json* list = &j;
  if (j.is_object() && j.contains("scenarios")) list = &j.at("scenarios");
  if (list->is_array()) {
    for (std::size_t k = 0; k < list->size(); ++k) out.push_back(scenario_from_json((*list)[k], detail::idx("scenarios", k)));
  } else {
    out.push_back(scenario_from_json(*list));
  }
  return out;
}

}  // namespace stvs
