// Copyright 2026 The uavplan Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     https://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UAVPLAN_COMMANDS_HPP
#define UAVPLAN_COMMANDS_HPP

#include <atomic>
#include <filesystem>
#include <iostream>
#include <thread>

#include "uavplan/io.hpp"

namespace uavplan {
namespace io {

struct RunConfig {
  std::string command;
  std::string scenario_path;
  std::string out_dir;
  std::string plan_csv;
  std::string powers_csv;
  int max_iters = 50;
  double tol = 1e-4;            // SCA relative objective tolerance
  double subsolver_tol = 1e-6;
  double plim_w = -1.0;         // <= 0: use the scenario's value
  int samples = 10000;          // verify-surrogates
  std::uint64_t seed = 7;
  int jobs = 1;
};

enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitNotConverged = 2,
  kExitInfeasible = 3,
};

namespace detail {

inline planners::ScaConfig sca_config(const RunConfig& rc) {
  planners::ScaConfig cfg;
  cfg.max_outer_iters = rc.max_iters;
  cfg.rel_obj_tol = rc.tol;
  cfg.subsolver_tol = rc.subsolver_tol;
  cfg.seed = rc.seed;
  return cfg;
}

inline int run_single_scenario(const RunConfig& rc, const std::string& scenario_file,
                               const std::string& outdir) {
  Scenario sc = load_scenario(scenario_file);
  if (rc.plim_w > 0) sc.prop_limit = rc.plim_w;
  const auto cfg = sca_config(rc);

  planners::PlanResult result;
  try {
    if (rc.command == "plan-minrate") {
      const auto init = circular::init_plan(sc, circular::InitMode::kMinRate);
      result = planners::solve_min_rate(sc, {init.traj, init.plan}, cfg);
    } else if (rc.command == "plan-ee") {
      const auto init = circular::init_plan(sc, circular::InitMode::kEnergyEfficiency);
      result = planners::solve_ee(sc, {init.traj, init.plan}, cfg);
    } else if (rc.command == "baseline-circular-minrate") {
      result = circular::solve_p3(sc, cfg);
    } else if (rc.command == "baseline-circular-ee") {
      result = circular::solve_p4(sc, cfg);
    } else {
      std::cerr << "unknown command: " << rc.command << "\n";
      return kExitUsage;
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  }

  dump_results(sc, result, outdir);
  std::cout << scenario_file << ": " << model::to_string(result.report.status)
            << ", objective ";
  if (rc.command == "plan-minrate" || rc.command == "baseline-circular-minrate")
    std::cout << result.report.min_avg_rate << " bits/s/Hz";
  else
    std::cout << result.report.ee << " bits/J";
  std::cout << ", " << result.report.iterations << " iterations, "
            << result.report.wall_time_s << " s\n";
  return result.report.status == model::PlanStatus::kConverged ? kExitOk
                                                               : kExitNotConverged;
}

}  // namespace detail

/// plan-* and baseline-* entry point. A scenario directory is sharded across
/// --jobs worker threads, each scenario writing to <out>/<stem>/.
inline int run_planner_command(const RunConfig& rc) {
  namespace fs = std::filesystem;
  if (rc.scenario_path.empty() || rc.out_dir.empty()) {
    std::cerr << "usage: " << rc.command << " --scenario FILE|DIR --out DIR\n";
    return kExitUsage;
  }
  try {
    if (fs::is_directory(rc.scenario_path)) {
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(rc.scenario_path))
        if (e.path().extension() == ".json") files.push_back(e.path().string());
      std::sort(files.begin(), files.end());
      std::atomic<size_t> next{0};
      std::atomic<int> worst{kExitOk};
      const int jobs = std::max(1, rc.jobs);
      std::vector<std::thread> workers;
      for (int w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
          for (size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
            const auto stem = fs::path(files[i]).stem().string();
            const int code = detail::run_single_scenario(
                rc, files[i], (fs::path(rc.out_dir) / stem).string());
            int cur = worst.load();
            while (code > cur && !worst.compare_exchange_weak(cur, code)) {
            }
          }
        });
      for (auto& t : workers) t.join();
      return worst.load();
    }
    return detail::run_single_scenario(rc, rc.scenario_path, rc.out_dir);
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

/// eval: recompute metrics for an emitted plan with the independent oracle.
inline int run_eval(const RunConfig& rc) {
  try {
    const Scenario sc = load_scenario(rc.scenario_path);
    const auto tr = io::load_plan_csv(rc.plan_csv);
    const auto p = io::load_powers_csv(rc.powers_csv, sc.num_gn());
    const auto m = oracle::recompute_metrics(sc, tr, p);
    const auto audit = oracle::audit_plan(sc, tr, p);
    json j;
    j["min_avg_rate_bps_hz"] = m.min_avg_rate;
    j["avg_rate_per_gn"] = std::vector<double>(
        m.avg_rate_per_gn.data(), m.avg_rate_per_gn.data() + m.avg_rate_per_gn.size());
    j["avg_speed_mps"] = m.avg_speed;
    j["avg_accel_mps2"] = m.avg_accel;
    j["avg_prop_power_w"] = m.avg_power;
    j["total_prop_energy_j"] = m.energy;
    j["min_bits"] = m.min_bits;
    j["ee_bits_per_joule"] = m.ee;
    j["residuals"] = residuals_json(audit);
    if (!rc.out_dir.empty()) {
      std::filesystem::create_directories(rc.out_dir);
      std::ofstream f(std::filesystem::path(rc.out_dir) / "eval.json");
      f << j.dump(2) << "\n";
    }
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "eval error: " << e.what() << "\n";
    return kExitUsage;
  }
}

// ---------------------------------------------------------------------------
// verify-surrogates: runs the three-condition checker over every surrogate
// family with seeded random expansion points.
// ---------------------------------------------------------------------------
struct FamilyCheck {
  std::string family;
  double value_err = 0.0;
  double gradient_err = 0.0;
  double max_violation = 0.0;
  int nonfinite = 0;
  bool pass = true;

  void absorb(const surrogates::SurrogateCheck& c) {
    value_err = std::max(value_err, c.value_err);
    gradient_err = std::max(gradient_err, c.gradient_err);
    max_violation = std::max(max_violation, c.max_violation);
    nonfinite += c.nonfinite_samples;
    pass = pass && c.pass();
  }
};

inline std::vector<FamilyCheck> verify_all_surrogates(int samples, std::uint64_t seed) {
  using namespace surrogates;
  std::mt19937_64 rng(seed);
  Scenario sc;
  sc.gn_positions = {Vec2(0, 0)};
  const int cfgs = 5;
  const int per = std::max(1, samples / cfgs);
  std::vector<FamilyCheck> out;

  {  // interference upper bound (checked as a lower bound of the negation)
    FamilyCheck fam{"rate_interference_ub"};
    for (int c = 0; c < cfgs; ++c) {
      const int dim = 1 + static_cast<int>(rng() % 4);
      VecX g_prev(dim);
      for (int i = 0; i < dim; ++i) g_prev[i] = uniform_in(rng, 0.0, 100.0);
      const auto ub = RateInterferenceUB::make(g_prev);
      auto f = [&](const VecX& g) { return -std::log2(1.0 + g.cwiseMax(0.0).sum()); };
      auto gsur = [&](const VecX& g) { return -ub.value(g.cwiseMax(0.0)); };
      VecX lo = VecX::Zero(dim), hi = VecX::Constant(dim, 200.0);
      fam.absorb(verify_surrogate(f, gsur, g_prev, lo, hi, per, rng()));
    }
    out.push_back(fam);
  }
  {  // peak received power in position (Lemma 1 instance)
    FamilyCheck fam{"gmax_lb"};
    for (int c = 0; c < cfgs; ++c) {
      sc.gn_positions[0] = Vec2(uniform_in(rng, -500, 500), uniform_in(rng, -500, 500));
      const Vec2 q_l(uniform_in(rng, -1000, 1000), uniform_in(rng, -1000, 1000));
      auto f = [&](const VecX& q) { return gmax_true(sc, 0, Vec2(q[0], q[1])); };
      auto g = [&](const VecX& q) { return gmax_lb(sc, 0, q_l, Vec2(q[0], q[1])); };
      VecX x_l(2), lo, hi;
      x_l << q_l[0], q_l[1];
      default_box(x_l, lo, hi);
      fam.absorb(verify_surrogate(f, g, x_l, lo, hi, per, rng()));
    }
    out.push_back(fam);
  }
  {  // squared speed (Lemma 2)
    FamilyCheck fam{"speed_sq_lb"};
    for (int c = 0; c < cfgs; ++c) {
      const Vec2 v_l(uniform_in(rng, -100, 100), uniform_in(rng, -100, 100));
      auto f = [](const VecX& v) { return v.squaredNorm(); };
      auto g = [&](const VecX& v) { return speed_sq_lb(v_l, Vec2(v[0], v[1])); };
      VecX x_l(2), lo, hi;
      x_l << v_l[0], v_l[1];
      default_box(x_l, lo, hi);
      fam.absorb(verify_surrogate(f, g, x_l, lo, hi, per, rng()));
    }
    out.push_back(fam);
  }
  {  // cosine (Lemma 3)
    FamilyCheck fam{"cos_lb"};
    for (int c = 0; c < cfgs; ++c) {
      const double phi_l = uniform_in(rng, -4 * M_PI, 4 * M_PI);
      auto f = [](const VecX& p) { return std::cos(p[0]); };
      auto g = [&](const VecX& p) { return cos_lb(phi_l, p[0]); };
      VecX x_l(1), lo(1), hi(1);
      x_l << phi_l;
      lo << -4 * M_PI;
      hi << 4 * M_PI;
      fam.absorb(verify_surrogate(f, g, x_l, lo, hi, per, rng()));
    }
    out.push_back(fam);
  }
  {  // peak received power in radius (scalar Lemma 1 instance)
    FamilyCheck fam{"smax_lb1"};
    for (int c = 0; c < cfgs; ++c) {
      const double zeta = uniform_in(rng, 0.0, 800.0);
      const double varphi = uniform_in(rng, -M_PI, M_PI);
      const double theta = uniform_in(rng, 0.0, 2 * M_PI);
      const double r_l = uniform_in(rng, 10.0, 2000.0);
      const auto sur = SmaxRadiusSurrogate::make(sc, zeta, varphi, theta, r_l);
      auto f = [&](const VecX& r) { return sur.true_value(r[0]); };
      auto g = [&](const VecX& r) { return sur.value(r[0]); };
      VecX x_l(1), lo(1), hi(1);
      x_l << r_l;
      lo << 10.0;
      hi << 2000.0;
      fam.absorb(verify_surrogate(f, g, x_l, lo, hi, per, rng()));
    }
    out.push_back(fam);
  }
  {  // peak received power in angle (Lemma 3 composed with Lemma 1)
    FamilyCheck fam{"smax_lb2"};
    for (int c = 0; c < cfgs; ++c) {
      const double zeta = uniform_in(rng, 0.0, 800.0);
      const double varphi = uniform_in(rng, -M_PI, M_PI);
      const double r = uniform_in(rng, 50.0, 1500.0);
      const double theta_l = uniform_in(rng, 0.0, 2 * M_PI);
      const auto sur = SmaxAngleSurrogate::make(sc, zeta, varphi, r, theta_l);
      auto f = [&](const VecX& th) { return sur.true_value(sc, zeta, varphi, r, th[0]); };
      auto g = [&](const VecX& th) { return sur.value(th[0]); };
      VecX x_l(1), lo(1), hi(1);
      x_l << theta_l;
      lo << theta_l - 2 * M_PI;
      hi << theta_l + 2 * M_PI;
      fam.absorb(verify_surrogate(f, g, x_l, lo, hi, per, rng()));
      // two-step chain: surrogate <= intermediate <= true value
      auto mid = [&](const VecX& th) { return sur.intermediate(th[0]); };
      fam.absorb(verify_surrogate(mid, g, x_l, lo, hi, per, rng()));
      fam.absorb(verify_surrogate(f, mid, x_l, lo, hi, per, rng()));
    }
    out.push_back(fam);
  }
  return out;
}

inline int run_verify_surrogates(const RunConfig& rc) {
  const auto checks = verify_all_surrogates(rc.samples, rc.seed);
  bool all_pass = true;
  for (const auto& c : checks) {
    std::printf("%-22s value_err %.3e  grad_err %.3e  max_violation %.3e  %s\n",
                c.family.c_str(), c.value_err, c.gradient_err, c.max_violation,
                c.pass ? "PASS" : "FAIL");
    all_pass = all_pass && c.pass;
  }
  return all_pass ? kExitOk : kExitNotConverged;
}

inline int run(const RunConfig& rc) {
  if (rc.command == "eval") return run_eval(rc);
  if (rc.command == "verify-surrogates") return run_verify_surrogates(rc);
  return run_planner_command(rc);
}

}  // namespace io
}  // namespace uavplan

#endif  // UAVPLAN_COMMANDS_HPP
