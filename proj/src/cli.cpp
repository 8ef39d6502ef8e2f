#include "mfglq/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "mfglq/graphon.hpp"
#include "mfglq/mfc.hpp"
#include "mfglq/parallel.hpp"

namespace mfglq {

namespace {

const char* game_name(GameClass g) {
  switch (g) {
    case GameClass::Mfg: return "mfg";
    case GameClass::Mpmfg: return "mpmfg";
    case GameClass::Gmfg: return "gmfg";
  }
  return "?";
}

EquilibriumSolution solve_configured(const RunConfig& cfg) {
  switch (cfg.game) {
    case GameClass::Mfg: return solve_mfg(cfg.pop, cfg.grid, cfg.solver);
    case GameClass::Mpmfg: return solve_mpmfg(cfg.pop, cfg.grid, cfg.solver);
    case GameClass::Gmfg:
      return solve_gmfg(std::get<GraphonModel>(cfg.model), cfg.grid, cfg.solver);
  }
  throw std::logic_error("unreachable");
}

nlohmann::ordered_json fb_meta_json(const FbMeta& fb) {
  return {{"iterations", fb.iterations},
          {"residual", fb.residual},
          {"converged", fb.converged}};
}

std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  return std::filesystem::path(cfg.out_dir) / name;
}

void write_json(const RunConfig& cfg, const std::string& name,
                const nlohmann::ordered_json& j) {
  write_file_atomic(out_path(cfg, name).string(), j.dump(2) + "\n");
}

struct BlockDiff {
  double z = 0.0, r = 0.0, p = 0.0, value = 0.0;

  double max() const { return std::max(std::max(z, r), std::max(p, value)); }
};

// Sup-norm differences between solutions, mapping component i of `fine` to
// component block_of(i) of `coarse`.
template <typename BlockOf>
BlockDiff compare_solutions(const EquilibriumSolution& fine,
                            const EquilibriumSolution& coarse, BlockOf block_of) {
  BlockDiff d;
  for (int k = 0; k < fine.grid.n_nodes(); ++k) {
    for (int i = 0; i < fine.dim; ++i) {
      const int b = block_of(i);
      d.z = std::max(d.z, std::abs(fine.z.at(k, i) - coarse.z.at(k, b)));
      d.r = std::max(d.r, std::abs(fine.r.at(k, i) - coarse.r.at(k, b)));
      d.p = std::max(d.p, std::abs(fine.p.at(k, i) - coarse.p.at(k, b)));
    }
  }
  for (int i = 0; i < fine.dim; ++i) {
    d.value = std::max(d.value, std::abs(fine.value[i] - coarse.value[block_of(i)]));
  }
  return d;
}

nlohmann::ordered_json diff_json(const BlockDiff& d, double tol) {
  return {{"z_diff", d.z},      {"r_diff", d.r},     {"p_diff", d.p},
          {"value_diff", d.value}, {"tolerance", tol}, {"pass", d.max() <= tol}};
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::filesystem::create_directories(target.parent_path());
  }
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

int cmd_solve(const RunConfig& cfg) {
  const EquilibriumSolution sol = solve_configured(cfg);

  std::string csv = "t,component_id,p,r,s,z,variance\n";
  for (int k = 0; k < cfg.grid.n_nodes(); ++k) {
    const std::string t = format_double(cfg.grid.node(k));
    for (int c = 0; c < sol.dim; ++c) {
      csv += t;
      csv += ',' + std::to_string(c);
      csv += ',' + format_double(sol.p.at(k, c));
      csv += ',' + format_double(sol.r.at(k, c));
      csv += ',' + format_double(sol.s.at(k, c));
      csv += ',' + format_double(sol.z.at(k, c));
      csv += ',' + format_double(sol.variance.at(k, c));
      csv += '\n';
    }
  }
  write_file_atomic(out_path(cfg, "solution.csv").string(), csv);

  nlohmann::ordered_json j;
  j["game_class"] = game_name(cfg.game);
  j["value"] = sol.value;
  j["fb_meta"] = fb_meta_json(sol.fb);
  j["config"] = cfg.echo;
  write_json(cfg, "summary.json", j);

  if (!sol.fb.converged) {
    std::cerr << "solver did not converge (residual " << sol.fb.residual << ")\n";
    return 3;
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  if (cfg.sweep.empty()) {
    throw ConfigError("[simulate] sweep is required for the verify command");
  }
  const EquilibriumSolution sol = solve_configured(cfg);
  if (!sol.fb.converged) {
    std::cerr << "solver did not converge; cannot verify\n";
    return 3;
  }
  const NashGapReport report =
      convergence_sweep(cfg.model, feedback_laws(sol), cfg.sweep, cfg.sim);

  nlohmann::ordered_json j;
  j["game_class"] = game_name(cfg.game);
  j["seed"] = cfg.sim.seed;
  j["n_reps"] = cfg.sim.n_reps;
  j["deviation_knots"] = cfg.sim.deviation_knots;
  j["gap_is_lower_bound"] = true;  // deviation search over a restricted class
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  std::string csv = "N,gap,std_error\n";
  for (const NashGapEntry& e : report.entries) {
    entries.push_back({{"N", e.n_players},
                       {"gap", e.gap},
                       {"std_error", e.std_error},
                       {"j_equilibrium", e.j_equilibrium},
                       {"j_best", e.j_best},
                       {"evaluations", e.evaluations},
                       {"deviation", e.deviation}});
    csv += std::to_string(e.n_players) + ',' + format_double(e.gap) + ',' +
           format_double(e.std_error) + '\n';
  }
  j["entries"] = entries;
  j["monotone"] = report.monotone;
  write_json(cfg, "nash_report.json", j);
  write_file_atomic(out_path(cfg, "nash_report.csv").string(), csv);
  return 0;
}

int cmd_poa(const RunConfig& cfg) {
  if (cfg.game != GameClass::Mfg) {
    throw ConfigError("the poa command supports game_class mfg only");
  }
  const SocialCostReport report = price_of_anarchy(cfg.pop, cfg.grid, cfg.solver);

  nlohmann::ordered_json j;
  j["mfg_social_cost"] = report.mfg_social_cost;
  j["mfc_cost"] = report.mfc_cost;
  j["price_of_anarchy"] = report.price_of_anarchy;
  j["optimizer"] = {{"iterations", report.optimizer.iterations},
                    {"grad_norm", report.optimizer.grad_norm},
                    {"converged", report.optimizer.converged}};
  j["config"] = cfg.echo;
  write_json(cfg, "poa_report.json", j);
  return report.optimizer.converged ? 0 : 3;
}

int cmd_reduce_check(const RunConfig& cfg) {
  if (cfg.game != GameClass::Mpmfg) {
    throw ConfigError("the reduce-check command requires game_class mpmfg");
  }
  const int K = cfg.pop.population_count();
  const int M = cfg.m_points;
  if (M < 1) {
    throw ConfigError("reduce-check requires [graphon] m_points");
  }
  if (M % K != 0) {
    throw ConfigError("m_points (" + std::to_string(M) +
                      ") must be a multiple of the population count (" +
                      std::to_string(K) + ")");
  }

  const EquilibriumSolution mp = solve_mpmfg(cfg.pop, cfg.grid, cfg.solver);

  GraphonModel gm;
  gm.coeffs = cfg.pop.coeffs;
  gm.graphon = step_from_weights(cfg.pop.weights);
  gm.m_points = M;
  const EquilibriumSolution gr = solve_gmfg(gm, cfg.grid, cfg.solver);

  const int per_block = M / K;
  const BlockDiff d =
      compare_solutions(gr, mp, [per_block](int i) { return i / per_block; });
  bool pass = d.max() <= 1e-9;

  nlohmann::ordered_json j;
  j["populations"] = K;
  j["m_points"] = M;
  j["gmfg_vs_mpmfg"] = diff_json(d, 1e-9);

  if (K == 1 && cfg.pop.weights(0, 0) == 1.0) {
    const EquilibriumSolution mf = solve_mfg(cfg.pop, cfg.grid, cfg.solver);
    const BlockDiff dm = compare_solutions(mp, mf, [](int) { return 0; });
    j["mpmfg_vs_mfg"] = diff_json(dm, 1e-12);
    pass = pass && dm.max() <= 1e-12;
  }
  j["pass"] = pass;
  write_json(cfg, "reduce_check.json", j);
  return pass ? 0 : 5;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"linear-quadratic mean field game solver suite"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 0;
  };
  Args args;
  int (*handler)(const RunConfig&) = nullptr;

  const auto add = [&](const std::string& name, const std::string& desc,
                       int (*fn)(const RunConfig&)) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("config", args.config, "path to the run configuration")
        ->required();
    sub->add_option("--out", args.out, "output directory (overrides [output] dir)");
    sub->add_option("--seed", args.seed, "master seed (overrides [simulate] seed)");
    sub->add_option("--threads", args.threads, "worker threads (0 = automatic)");
    sub->callback([&, fn]() { handler = fn; });
  };
  add("solve", "compute the equilibrium and write trajectories", cmd_solve);
  add("verify", "estimate epsilon-Nash gaps over the configured sweep", cmd_verify);
  add("poa", "compare the equilibrium social cost with the optimized one", cmd_poa);
  add("reduce-check", "cross-check the graphon reduction of a multi-population game",
      cmd_reduce_check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (args.threads > 0) set_threads(args.threads);
    RunConfig cfg = load_run_config(args.config);
    if (!args.out.empty()) cfg.out_dir = args.out;
    if (args.seed.has_value()) cfg.sim.seed = *args.seed;
    return handler(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SingularSystemError& e) {
    std::cerr << "solver failed: " << e.what() << "\n";
    return 3;
  } catch (const DivergenceError& e) {
    std::cerr << "simulation diverged: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mfglq
