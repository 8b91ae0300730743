#pragma once

#include "stvs/case.hpp"
#include "stvs/linalg.hpp"

#include <optional>
#include <string>

namespace stvs {

// Bus admittance matrix of in-service branches and switched-on shunts, in
// case bus order. Loads and devices are not included. `open_branch` removes
// one branch by id (post-clearing topology).
inline CMatrix bus_admittance(const SystemCase& c, const std::string& open_branch = {}) {
  const auto n = static_cast<Eigen::Index>(c.buses.size());
  CMatrix Y = CMatrix::Zero(n, n);
  for (const Branch& br : c.branches) {
    if (!br.status || (!open_branch.empty() && br.id == open_branch)) continue;
    const auto f = static_cast<Eigen::Index>(c.bus_index(br.from));
    const auto t = static_cast<Eigen::Index>(c.bus_index(br.to));
    const cplx y = 1.0 / cplx(br.r, br.x);
    const cplx half_b(0.0, br.b / 2.0);
    Y(f, f) += (y + half_b) / (br.tap * br.tap);
    Y(t, t) += y + half_b;
    Y(f, t) -= y / br.tap;
    Y(t, f) -= y / br.tap;
  }
  for (const Shunt& s : c.shunts) {
    if (!s.status) continue;
    const auto k = static_cast<Eigen::Index>(c.bus_index(s.bus));
    Y(k, k) += cplx(0.0, s.b);
  }
  return Y;
}

}  // namespace stvs
