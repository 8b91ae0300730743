#include "support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <random>

using namespace stvs;
using Catch::Approx;

namespace {

GeneratorParams params_from(const json& p) {
  GeneratorParams g = test::machine(1);
  g.x_d = p["x_d"];
  g.x_d_prime = p["x_d_prime"];
  g.T_d0_prime = p["T_d0_prime"];
  g.T_e = p["T_e"];
  g.K_A = p["K_A"];
  return g;
}

struct Stage {
  double t0, V, V_q;
};

struct TwoStage {
  GeneratorParams p;
  double V_ref, E_fd0, psi0;
  Stage flt, clr;
};

// Closed-form flux through both stages.
double closed_form(const TwoStage& d, double t) {
  const StageInput in1{d.E_fd0, d.V_ref, d.flt.V, d.flt.V_q, d.psi0, d.psi0, d.E_fd0};
  const FluxCoefficients c1 = flux_coefficients(d.p, in1);
  if (t < d.clr.t0) return analytic_flux(c1, t - d.flt.t0);
  const double len = d.clr.t0 - d.flt.t0;
  const StageInput in2{d.E_fd0,
                       d.V_ref,
                       d.clr.V,
                       d.clr.V_q,
                       analytic_flux(c1, len),
                       analytic_spontaneous_flux(c1, len),
                       analytic_exciter(c1, len)};
  return analytic_flux(flux_coefficients(d.p, in2), t - d.clr.t0);
}

// Classical RK4 on the flux/exciter pair, unclamped.
std::vector<double> integrate(const TwoStage& d, const std::vector<double>& times, double h) {
  double psi = d.psi0, efd = d.E_fd0, t = d.flt.t0;
  std::vector<double> out;
  const auto rates = [&](double x, double e, const Stage& s) {
    const auto r = generator_derivatives(x, e, Dq{std::sqrt(s.V * s.V - s.V_q * s.V_q), s.V_q}, d.p,
                                         {d.E_fd0, d.V_ref, 1e9, false});
    return std::pair{r.dpsi_d_prime, r.dE_fd};
  };
  const auto advance = [&](double until, const Stage& s) {
    while (t < until - 1e-12) {
      const double step = std::min(h, until - t);
      const auto [a1, b1] = rates(psi, efd, s);
      const auto [a2, b2] = rates(psi + step / 2 * a1, efd + step / 2 * b1, s);
      const auto [a3, b3] = rates(psi + step / 2 * a2, efd + step / 2 * b2, s);
      const auto [a4, b4] = rates(psi + step * a3, efd + step * b3, s);
      psi += step / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
      efd += step / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
      t += step;
    }
    t = until;
  };
  for (double at : times) {
    if (at <= d.clr.t0)
      advance(at, d.flt);
    else {
      if (t < d.clr.t0) advance(d.clr.t0, d.flt);
      advance(at, d.clr);
    }
    out.push_back(psi);
  }
  return out;
}

TwoStage random_draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto in = [&](double a, double b) { return a + (b - a) * u(rng); };
  TwoStage d;
  d.p = test::machine(1);
  d.p.x_d = in(0.8, 2.2);
  d.p.x_d_prime = in(0.15, 0.4) * d.p.x_d / 2.0 + 0.05;
  d.p.T_d0_prime = in(4.0, 9.0);
  d.p.T_e = in(0.02, 0.6);
  d.p.K_A = in(5.0, 200.0);
  d.V_ref = in(0.98, 1.05);
  d.E_fd0 = in(1.5, 2.6);
  d.psi0 = in(0.95, 1.15);
  const double V_flt = in(0.1, 0.8), V_clr = in(0.75, 0.99);
  d.flt = {0.1, V_flt, V_flt * in(0.85, 1.0)};
  d.clr = {0.1 + in(0.05, 0.25), V_clr, V_clr * in(0.85, 1.0)};
  return d;
}

const PreparedCase& ieee39_prepared() {
  static const PreparedCase p = prepare(test::ieee39());
  return p;
}

}  // namespace

TEST_CASE("representative coefficients match the eigen solution", "[analytic]") {
  const json o = test::oracle("flux_oracle.json")["representative"];
  const GeneratorParams p = params_from(o["params"]);
  const StageInput in{o["params"]["E_fd0"], o["params"]["V_ref"], o["V_stage"],   o["V_q"],
                      o["psi_start"],       o["psi_start"],       o["E_fd_start"]};
  const auto c = flux_coefficients(p, in);
  CHECK_FALSE(c.repeated_root);
  CHECK(c.A1 == Approx(o["A1"].get<double>()).epsilon(1e-10));
  CHECK(c.A2 == Approx(o["A2"].get<double>()).epsilon(1e-10));
  CHECK(c.A3 == Approx(o["A3"].get<double>()).epsilon(1e-10));
  CHECK(c.A1 < 0.0);
  CHECK(c.A2 > 0.0);
}

TEST_CASE("undisturbed stage keeps the flux constant", "[analytic]") {
  const GeneratorParams p = test::machine(1);
  const double psi0 = 1.08, V_q = 0.97;
  const double E_q0 = psi0 + (p.x_d - p.x_d_prime) * (psi0 - V_q) / p.x_d_prime;
  const auto c = flux_coefficients(p, E_q0, 1.0, 1.0, V_q, psi0);
  CHECK(std::abs(c.A1) < 1e-12);
  CHECK(c.A2 == 0.0);
  CHECK(c.A3 == Approx(psi0).epsilon(1e-12));
  CHECK(analytic_flux(c, 3.7) == Approx(psi0).epsilon(1e-12));
}

TEST_CASE("stage boundary conservation and asymptote", "[analytic]") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const TwoStage d = random_draw(rng);
    const auto c = flux_coefficients(d.p, {d.E_fd0, d.V_ref, d.flt.V, d.flt.V_q, d.psi0, d.psi0, d.E_fd0});
    CHECK(std::abs(c.A1 + c.A2 + c.A3 - d.psi0) <= 1e-12);
    CHECK(analytic_flux(c, 0.0) == d.psi0);
  }
  GeneratorParams p = test::machine(1);
  p.K_A = 20.0;
  const auto c = flux_coefficients(p, 1.6, 1.0, 0.8, 0.78, 1.1);
  REQUIRE(std::abs(c.A1) + std::abs(c.A2) < 2.0);
  const double horizon = 10.0 * std::max(c.T_d_prime, c.T_e);
  CHECK(std::abs(analytic_flux(c, horizon) - c.A3) <= 1e-4);
  CHECK(std::abs(analytic_flux(c, 4.0 * horizon) - c.A3) <= 1e-12);
}

TEST_CASE("two-stage flux equals the stiff reference integration", "[analytic]") {
  const json oracle = test::oracle("flux_oracle.json");
  REQUIRE(oracle["two_stage"].size() == 8);
  for (const auto& o : oracle["two_stage"]) {
    TwoStage d;
    d.p = params_from(o["params"]);
    d.V_ref = o["params"]["V_ref"];
    d.E_fd0 = o["params"]["E_fd0"];
    d.psi0 = o["psi0"];
    d.flt = {o["t_fault"], o["V_flt"], o["V_q_flt"]};
    d.clr = {o["T_clr"], o["V_clr"], o["V_q_clr"]};
    const auto times = o["times"].get<std::vector<double>>();
    for (std::size_t k = 0; k < times.size(); ++k)
      CHECK(std::abs(closed_form(d, times[k]) - o["psi"][k].get<double>()) <= 1e-6);
  }
}

TEST_CASE("two-stage flux on randomized draws", "[analytic]") {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const TwoStage d = random_draw(rng);
    std::vector<double> times;
    for (int i = 0; i <= 40; ++i) times.push_back(d.flt.t0 + (d.clr.t0 + 1.0 - d.flt.t0) * i / 40.0);
    const auto ref = integrate(d, times, 1e-4);
    for (std::size_t i = 0; i < times.size(); ++i) worst = std::max(worst, std::abs(closed_form(d, times[i]) - ref[i]));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("repeated time constants use the limiting form", "[analytic]") {
  GeneratorParams p = test::machine(1);
  p.T_e = p.T_d0_prime * p.x_d_prime / p.x_d;
  TwoStage d{p, 1.0, 1.9, 1.1, {0.0, 0.5, 0.48}, {0.15, 0.9, 0.88}};
  const auto c = flux_coefficients(p, {d.E_fd0, d.V_ref, 0.5, 0.48, 1.1, 1.1, 1.9});
  CHECK(c.repeated_root);
  CHECK(c.A1 + c.A3 == Approx(1.1).epsilon(1e-12));
  std::vector<double> times{0.05, 0.1, 0.15, 0.4, 1.0, 3.0};
  const auto ref = integrate(d, times, 1e-4);
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(std::abs(closed_form(d, times[i]) - ref[i]) <= 1e-8);

  GeneratorParams near = p;
  near.T_e *= 1.0 + 1e-6;
  const auto c_near = flux_coefficients(near, {d.E_fd0, d.V_ref, 0.5, 0.48, 1.1, 1.1, 1.9});
  CHECK_FALSE(c_near.repeated_root);
  for (double t : times) CHECK(analytic_flux(c_near, t) == Approx(analytic_flux(c, t)).margin(1e-5));
}

TEST_CASE("demagnetizing and magnetizing terms carry the expected signs", "[analytic]") {
  std::mt19937_64 rng(17);
  int total = 0, ok = 0;
  for (int k = 0; k < 1000; ++k) {
    TwoStage d = random_draw(rng);
    d.p.T_e = 0.02 + 0.08 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    // Start from a steady state so only the voltage dip drives the stage.
    const double V_q0 = d.V_ref * 0.95;
    d.E_fd0 = d.psi0 + (d.p.x_d - d.p.x_d_prime) * (d.psi0 - V_q0) / d.p.x_d_prime;
    const auto c = flux_coefficients(d.p, d.E_fd0, d.V_ref, d.flt.V, d.flt.V_q, d.psi0);
    ++total;
    ok += c.A1 < 0.0 && c.A2 > 0.0;
  }
  CHECK(static_cast<double>(ok) / total >= 0.95);
}

TEST_CASE("closed-form reactive power decomposition", "[analytic]") {
  const json o = test::oracle("flux_oracle.json")["representative"];
  GeneratorParams p = params_from(o["params"]);
  const Dq V{0.12, 0.5};
  const double psi0 = 1.05, E_fd0 = 1.2;
  SECTION("sum identity and zero control part at inception") {
    const auto c = flux_coefficients(p, E_fd0, 1.0, std::hypot(V.d, V.q), V.q, psi0);
    CHECK(analytic_Q(c, V, p, 0.0).Q_exc == 0.0);
    for (double t : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0}) {
      const auto q = analytic_Q(c, V, p, t);
      CHECK(std::abs(q.Q_spon + q.Q_exc - q.Q_g) <= 1e-12);
    }
  }
  SECTION("spontaneous part decays while the control part builds") {
    const auto c = flux_coefficients(p, E_fd0, 1.0, std::hypot(V.d, V.q), V.q, psi0);
    double last_spon = analytic_Q(c, V, p, 0.0).Q_spon, last_exc = 0.0;
    bool crossed = false;
    for (int k = 1; k <= 100; ++k) {
      const auto q = analytic_Q(c, V, p, 0.05 * k);
      CHECK(q.Q_spon < last_spon);
      CHECK(q.Q_exc > last_exc);
      crossed |= q.Q_exc > q.Q_spon;
      last_spon = q.Q_spon;
      last_exc = q.Q_exc;
    }
    CHECK(crossed);
    CHECK(analytic_Q(c, V, p, 0.0).Q_spon > 0.0);
  }
  SECTION("no exciter gain, no control part") {
    p.K_A = 0.0;
    const auto c = flux_coefficients(p, E_fd0, 1.0, std::hypot(V.d, V.q), V.q, psi0);
    for (double t : {0.0, 0.1, 1.0, 10.0}) CHECK(std::abs(analytic_Q(c, V, p, t).Q_exc) <= 1e-14);
  }
}

TEST_CASE("closed-form window mean", "[analytic]") {
  const json o = test::oracle("flux_oracle.json")["representative"];
  const GeneratorParams p = params_from(o["params"]);
  const auto c = flux_coefficients(p, 1.2, 1.0, 0.85, 0.82, 1.02);
  const double R = 0.37;
  SECTION("vanishing window") {
    CHECK(analytic_vrc_term(c, R, 1e-9) == Approx(R * c.psi_start).epsilon(1e-8));
  }
  SECTION("constant flux") {
    FluxCoefficients flat = c;
    flat.A1 = flat.A2 = 0.0;
    flat.B = 0.0;
    for (double dT : {0.1, 0.4, 3.0}) CHECK(analytic_vrc_term(flat, R, dT) == Approx(R * flat.A3).epsilon(1e-14));
  }
  SECTION("quadrature") {
    const double dT = 0.4;
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return R * analytic_flux(c, t); }, 0.0, dT, 0, 1e-14);
    CHECK(analytic_vrc_term(c, R, dT) == Approx(q / dT).epsilon(1e-10));
  }
  SECTION("repeated-root quadrature") {
    GeneratorParams r = p;
    r.T_e = r.T_d0_prime * r.x_d_prime / r.x_d;
    const auto cr = flux_coefficients(r, {1.2, 1.0, 0.85, 0.82, 1.02, 1.02, 1.4});
    REQUIRE(cr.repeated_root);
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return R * analytic_flux(cr, t); }, 0.0, 0.4, 0, 1e-14);
    CHECK(analytic_vrc_term(cr, R, 0.4) == Approx(q / 0.4).epsilon(1e-10));
  }
  CHECK_THROWS_AS(analytic_vrc_term(c, R, 0.0), ValidationError);
}

TEST_CASE("stepped profile limits", "[analytic]") {
  const PreparedCase& p = ieee39_prepared();
  SECTION("null fault leaves the profile flat") {
    FaultScenario s = test::flt_1727();
    s.fault_admittance = 0.0;
    s.tripped_branch.clear();
    const ScenarioModel m = scenario_model(p, s);
    const auto prof = stepped_profile(p.sys, p.init, s, m.R_flt, m.R_clr);
    for (std::size_t k = 0; k < prof.V_0.size(); ++k) {
      CHECK(prof.V_flt[k] == Approx(prof.V_0[k]).epsilon(1e-9));
      CHECK(profile_flux(prof, k, 0.6) == Approx(prof.psi_0[k]).epsilon(1e-8));
    }
  }
  SECTION("bolted fault at a lone machine") {
    SystemCase c;
    Bus b;
    b.id = 1;
    b.kind = BusKind::slack;
    b.V_set = 1.0;
    c.buses = {b};
    c.generators = {test::machine(1)};
    const PreparedCase lone = prepare(c);
    FaultScenario s;
    s.id = "bolted";
    s.faulted_bus = s.monitor_bus = 1;
    s.fault_admittance = 1e8;
    const ScenarioModel m = scenario_model(lone, s);
    const auto prof = stepped_profile(lone.sys, lone.init, s, m.R_flt, m.R_clr);
    CHECK(prof.V_flt[0] < 1e-6);
    CHECK(prof.V_clr[0] == Approx(profile_flux(prof, 0, s.T_clr)).epsilon(1e-9));
  }
  SECTION("stage voltages are consistent with their components") {
    const FaultScenario s = test::flt_1727();
    const ScenarioModel m = scenario_model(p, s);
    const auto prof = stepped_profile(p.sys, p.init, s, m.R_flt, m.R_clr);
    for (std::size_t k = 0; k < prof.V_0.size(); ++k) {
      CHECK(std::hypot(prof.V_dq_flt[k].d, prof.V_dq_flt[k].q) == Approx(prof.V_flt[k]).epsilon(1e-12));
      CHECK(prof.V_flt[k] <= prof.V_0[k]);
    }
  }
}

TEST_CASE("stepped profile against the reference simulation", "[analytic]") {
  const PreparedCase& p = ieee39_prepared();
  const FaultScenario s = test::flt_1727();
  const ScenarioModel m = scenario_model(p, s);
  const auto prof = stepped_profile(p.sys, p.init, s, m.R_flt, m.R_clr);
  SimOptions opt;
  opt.t_end = s.T_clr + 0.6;
  const Trajectory tr = simulate(p.sys, p.init, s, opt);
  std::size_t row = 0;
  while (!(tr.t[row] == tr.t[row + 1] && tr.stage[row + 1] == StageTag::flt)) ++row;
  ++row;
  for (std::size_t k = 0; k < prof.V_flt.size(); ++k) {
    const auto bus = tr.bus_position(prof.generator_buses[k]);
    const double sim = std::abs(tr.V[row][bus]);
    CHECK(std::abs(prof.V_flt[k] - sim) / sim <= 0.05);
  }
  const FluxComparison cmp = compare_flux(prof, tr, s.id, 0.4);
  CHECK(cmp.max_fault <= 0.02);
  CHECK(cmp.max_post <= 0.03);
}

TEST_CASE("finer profiles remain consistent", "[analytic]") {
  const PreparedCase& p = ieee39_prepared();
  const FaultScenario s = test::flt_1727();
  const ScenarioModel m = scenario_model(p, s);
  ProfileOptions opt;
  opt.pieces_per_stage = 4;
  const auto prof = stepped_profile(p.sys, p.init, s, m.R_flt, m.R_clr, opt);
  CHECK(prof.pieces.size() == 8);
  for (std::size_t i = 1; i < prof.pieces.size(); ++i) {
    const auto& a = prof.pieces[i - 1];
    const auto& b = prof.pieces[i];
    CHECK(b.t_start == Approx(a.t_end).margin(1e-12));
    for (std::size_t k = 0; k < a.coeffs.size(); ++k)
      CHECK(analytic_flux(a.coeffs[k], a.t_end - a.t_start) == Approx(b.coeffs[k].psi_start).epsilon(1e-14));
  }
  opt.pieces_per_stage = 0;
  CHECK_THROWS_AS(stepped_profile(p.sys, p.init, s, m.R_flt, m.R_clr, opt), ValidationError);
}
