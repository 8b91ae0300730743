#pragma once

// Topology stages of a fault sequence and the flux-to-voltage coefficient
// matrix R (bus voltage produced by one unit of device flux linkage).

#include "stvs/admittance.hpp"
#include "stvs/case.hpp"
#include "stvs/error.hpp"
#include "stvs/linalg.hpp"
#include "stvs/models.hpp"
#include "stvs/powerflow.hpp"

#include <fstream>
#include <iomanip>
#include <queue>
#include <string>
#include <vector>

namespace stvs {

enum class StageTag { pre, flt, clr };

inline const char* stage_name(StageTag t) {
  switch (t) {
    case StageTag::pre: return "pre";
    case StageTag::flt: return "flt";
    case StageTag::clr: return "clr";
  }
  return "pre";
}

struct TopologyStage {
  StageTag tag = StageTag::pre;
  CMatrix Y;  // branches, shunts, static loads, fault shunt
};

// Throws ValidationError when the in-service branches (minus `open_branch`)
// do not connect every bus.
inline void check_connected(const SystemCase& c, const std::string& open_branch = {}) {
  const std::size_t n = c.buses.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const Branch& br : c.branches) {
    if (!br.status || br.id == open_branch) continue;
    const auto f = c.bus_index(br.from);
    const auto t = c.bus_index(br.to);
    adj[f].push_back(t);
    adj[t].push_back(f);
  }
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> todo;
  todo.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!todo.empty()) {
    const auto k = todo.front();
    todo.pop();
    for (auto m : adj[k])
      if (!seen[m]) {
        seen[m] = true;
        ++count;
        todo.push(m);
      }
  }
  if (count != n) {
    for (std::size_t k = 0; k < n; ++k)
      if (!seen[k])
        throw ValidationError("scenario.tripped_branch",
                              "opening branch " + open_branch + " islands bus " + std::to_string(c.buses[k].id));
  }
}

inline TopologyStage build_stage(const SystemCase& c, const std::vector<cplx>& load_admittance,
                                 const FaultScenario& s, StageTag tag) {
  TopologyStage st;
  st.tag = tag;
  const std::string open = tag == StageTag::clr ? s.tripped_branch : std::string{};
  if (tag == StageTag::clr && !open.empty()) check_connected(c, open);
  st.Y = bus_admittance(c, open);
  for (std::size_t k = 0; k < load_admittance.size(); ++k) st.Y(k, k) += load_admittance[k];
  if (tag == StageTag::flt) {
    const auto f = static_cast<Eigen::Index>(c.bus_index(s.faulted_bus));
    st.Y(f, f) += cplx(0.0, -s.fault_admittance);
  }
  return st;
}

// ---------------------------------------------------------------------------
// Devices seen by the network

enum class DeviceKind { generator, motor };

struct Device {
  DeviceKind kind = DeviceKind::generator;
  std::string name;      // "gen_<bus>" / "motor_<bus>"
  int bus_id = 0;
  std::size_t bus = 0;   // bus position
  std::size_t source = 0;  // index into DynamicInit::generators / motors
  double x_d_prime = 0.0;  // motors: X'
  double x_q = 0.0;        // motors: X'
  double angle = 0.0;      // rotor angle delta, or the pre-fault angle of E'
  double flux0 = 0.0;      // psi'_d,0, or |E'_0|
};

// Generators first, then motors, in initialization order.
inline std::vector<Device> collect_devices(const SystemCase& c, const DynamicInit& init) {
  std::vector<Device> out;
  for (std::size_t k = 0; k < init.generators.size(); ++k) {
    const auto& gi = init.generators[k];
    const GeneratorParams& g = c.generators[gi.index];
    Device d;
    d.kind = DeviceKind::generator;
    d.name = "gen_" + std::to_string(g.bus);
    d.bus_id = g.bus;
    d.bus = c.bus_index(g.bus);
    d.source = k;
    d.x_d_prime = g.x_d_prime;
    d.x_q = g.x_q;
    d.angle = gi.delta;
    d.flux0 = gi.psi_d0_prime;
    out.push_back(d);
  }
  for (std::size_t k = 0; k < init.motors.size(); ++k) {
    const auto& mi = init.motors[k];
    Device d;
    d.kind = DeviceKind::motor;
    d.name = "motor_" + std::to_string(mi.params.bus);
    d.bus_id = mi.params.bus;
    d.bus = c.bus_index(mi.params.bus);
    d.source = k;
    d.x_d_prime = mi.coeffs.X_prime;
    d.x_q = mi.coeffs.X_prime;
    d.angle = std::arg(mi.E_prime0);
    d.flux0 = std::abs(mi.E_prime0);
    out.push_back(d);
  }
  return out;
}

inline XyAdmittance device_xy_admittance(const Device& d, double angle) {
  GeneratorParams p;
  p.x_d_prime = d.x_d_prime;
  p.x_q = d.x_q;
  return generator_xy_admittance(p, angle);
}

// ---------------------------------------------------------------------------
// R matrix

enum class Projection {
  along_prefault,  // component along the pre-fault bus voltage phasor
  strict_x,        // raw network x component
};

struct ROptions {
  Projection projection = Projection::along_prefault;
};

struct RMatrix {
  StageTag tag = StageTag::pre;
  RMat R;          // [N_bus x N_dyn]
  RMat Z;          // inverse of the extended real 2N x 2N matrix (x/y interleaved)
  RMat response;   // [2 N_bus x N_dyn]: xy bus voltage per unit flux of each device
  std::vector<double> w;

  // Complex bus voltage per unit flux of device j.
  cplx response_at(Eigen::Index bus, Eigen::Index j) const { return {response(2 * bus, j), response(2 * bus + 1, j)}; }
};

// R_ij = (Z'_xx,ij C_x,j + Z'_xy,ij C_y,j) w_j, projected per `opt`.
// `angles` are the device angles to use (pre-fault values by default).
inline RMatrix compute_R(const TopologyStage& stage, const std::vector<Device>& devices,
                         const std::vector<cplx>& prefault_V, const std::vector<double>& angles,
                         const std::vector<double>& w, const ROptions& opt = {}) {
  const Eigen::Index n = stage.Y.rows();
  const auto nd = static_cast<Eigen::Index>(devices.size());
  RMat A = RMat::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      const cplx y = stage.Y(i, k);
      A(2 * i, 2 * k) = y.real();
      A(2 * i, 2 * k + 1) = -y.imag();
      A(2 * i + 1, 2 * k) = y.imag();
      A(2 * i + 1, 2 * k + 1) = y.real();
    }
  std::vector<XyAdmittance> blocks;
  for (Eigen::Index j = 0; j < nd; ++j) {
    const Device& d = devices[j];
    const auto xy = device_xy_admittance(d, angles[j]);
    const auto b = static_cast<Eigen::Index>(d.bus);
    A(2 * b, 2 * b) += xy.G_x;
    A(2 * b, 2 * b + 1) += xy.B_x;
    A(2 * b + 1, 2 * b) += xy.B_y;
    A(2 * b + 1, 2 * b + 1) += xy.G_y;
    blocks.push_back(xy);
  }
  Eigen::PartialPivLU<RMat> lu(A);
  if (!(lu.rcond() > 1e-14)) {
    const auto piv = weakest_pivot(lu);
    throw NumericalError(std::string("singular extended network matrix in stage ") + stage_name(stage.tag) +
                         " near bus position " + std::to_string(piv / 2));
  }
  RMatrix out;
  out.tag = stage.tag;
  out.w = w;
  out.Z = lu.inverse();
  out.response.resize(2 * n, nd);
  for (Eigen::Index j = 0; j < nd; ++j) {
    const auto b = static_cast<Eigen::Index>(devices[j].bus);
    out.response.col(j) = out.Z.col(2 * b) * blocks[j].C_x + out.Z.col(2 * b + 1) * blocks[j].C_y;
  }
  out.R.resize(n, nd);
  for (Eigen::Index i = 0; i < n; ++i) {
    double ux = 1.0, uy = 0.0;
    if (opt.projection == Projection::along_prefault) {
      const cplx v = prefault_V[i];
      const double m = std::abs(v);
      if (m > 0.0) {
        ux = v.real() / m;
        uy = v.imag() / m;
      }
    }
    for (Eigen::Index j = 0; j < nd; ++j)
      out.R(i, j) = w[j] * (ux * out.response(2 * i, j) + uy * out.response(2 * i + 1, j));
  }
  return out;
}

// Convenience: pre-fault angles and unit speeds.
inline RMatrix compute_R(const TopologyStage& stage, const std::vector<Device>& devices,
                         const std::vector<cplx>& prefault_V, const ROptions& opt = {}) {
  std::vector<double> angles, w(devices.size(), 1.0);
  for (const Device& d : devices) angles.push_back(d.angle);
  return compute_R(stage, devices, prefault_V, angles, w, opt);
}

// Thevenin-style electrical distance |Z_ii + Z_kk - 2 Z_ik| between buses,
// computed on the pre-fault network with device transient reactances.
inline RMat electrical_distance(const TopologyStage& pre, const std::vector<Device>& devices) {
  CMatrix Y = pre.Y;
  for (const Device& d : devices) Y(d.bus, d.bus) += 1.0 / cplx(0.0, d.x_d_prime);
  const CMatrix Z = Y.inverse();
  const Eigen::Index n = Y.rows();
  RMat D(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) D(i, k) = std::abs(Z(i, i) + Z(k, k) - 2.0 * Z(i, k));
  return D;
}

// Labeled CSV dump of a real matrix (debug output).
inline void write_matrix_csv(const std::string& path, const RMat& M, const std::vector<std::string>& rows,
                             const std::vector<std::string>& cols) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "row";
  for (const auto& c : cols) out << ',' << c;
  out << '\n' << std::setprecision(15);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    out << rows[i];
    for (Eigen::Index j = 0; j < M.cols(); ++j) out << ',' << M(i, j);
    out << '\n';
  }
}

}  // namespace stvs
