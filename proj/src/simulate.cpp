#include "mfglq/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mfglq/graphon.hpp"
#include "mfglq/parallel.hpp"
#include "mfglq/rng.hpp"

namespace mfglq {

namespace {

struct GameView {
  TimeGrid grid;
  int n = 0;       // players
  int comps = 0;   // feedback components
  std::vector<const LqCoefficients*> coeffs;  // per component
  std::vector<int> comp_of;                   // per player
  std::vector<int> comp_size;                 // players per component
  bool graphon = false;
  Eigen::MatrixXd wmat;    // comps x comps, population games
  Eigen::MatrixXd kernel;  // n x n, graphon games
};

GameView build_view(const GameModel& model, const std::vector<FeedbackLaw>& laws,
                    const TimeGrid& grid, int n_players,
                    const std::vector<double>& proportions) {
  if (n_players < 1) throw std::invalid_argument("simulation needs players");
  GameView view;
  view.grid = grid;
  view.n = n_players;
  view.comps = static_cast<int>(laws.size());
  if (view.comps < 1) throw std::invalid_argument("no feedback laws given");
  view.comp_of.resize(n_players);
  view.comp_size.assign(view.comps, 0);

  if (const auto* pop = std::get_if<PopulationModel>(&model)) {
    if (pop->population_count() != view.comps) {
      throw std::invalid_argument("law count does not match population count");
    }
    for (int c = 0; c < view.comps; ++c) view.coeffs.push_back(&pop->coeffs[c]);
    std::vector<double> shares = proportions;
    if (shares.empty()) shares.assign(view.comps, 1.0);
    if (static_cast<int>(shares.size()) != view.comps) {
      throw std::invalid_argument("proportions length does not match populations");
    }
    const std::vector<int> sizes = allocate_players(n_players, shares);
    int next = 0;
    for (int c = 0; c < view.comps; ++c) {
      if (sizes[c] < 1) {
        throw std::invalid_argument("population " + std::to_string(c) +
                                    " received no players");
      }
      for (int j = 0; j < sizes[c]; ++j) view.comp_of[next++] = c;
    }
    view.comp_size = sizes;
    view.wmat = pop->weights;
  } else {
    const auto& gm = std::get<GraphonModel>(model);
    view.graphon = true;
    const int m = view.comps;
    for (int c = 0; c < m; ++c) view.coeffs.push_back(&gm.coeff_at((c + 0.5) / m));
    for (int i = 0; i < n_players; ++i) {
      const double u = (i + 0.5) / n_players;
      view.comp_of[i] = std::min(static_cast<int>(u * m), m - 1);
      view.comp_size[view.comp_of[i]]++;
    }
    view.kernel.resize(n_players, n_players);
    auto_for(n_players, [&](int i) {
      const double ui = (i + 0.5) / n_players;
      for (int j = 0; j < n_players; ++j) {
        view.kernel(i, j) = gm.graphon.eval(ui, (j + 0.5) / n_players);
      }
    });
  }
  return view;
}

struct RepOutput {
  std::vector<double> sum_x, sum_x2;  // (n_nodes * comps), filled if want_stats
  std::vector<double> cost_sum;       // per component
  double deviator_cost = 0.0;
};

// One replication. The noise slab, when given, holds n_players * (n_steps+1)
// precomputed standard normals (draw 0 = initial state, draw 1+k = increment
// of step k); otherwise draws come straight from the per-player streams.
void run_rep(const GameView& view, const std::vector<FeedbackLaw>& laws,
             const double* deviation, int knots, std::uint64_t seed,
             std::uint64_t rep, const double* noise, bool want_stats,
             RepOutput& out) {
  const int N = view.n;
  const int C = view.comps;
  const int n = view.grid.n_steps;
  const double dt = view.grid.dt();
  const double sqdt = std::sqrt(dt);

  std::vector<RandomStream> streams;
  if (noise == nullptr) {
    streams.reserve(N);
    for (int i = 0; i < N; ++i) streams.push_back(player_stream(seed, 0, rep, i));
  }
  auto draw = [&](int player, int index) {
    return noise != nullptr ? noise[player * (n + 1) + index]
                            : streams[player].normal(index);
  };

  std::vector<double> x(N), cost(N, 0.0), agg(C), means(C);
  Eigen::VectorXd gagg;
  for (int i = 0; i < N; ++i) {
    const LqCoefficients& co = *view.coeffs[view.comp_of[i]];
    x[i] = co.x0_mean + co.x0_std * draw(i, 0);
  }
  out.cost_sum.assign(C, 0.0);
  if (want_stats) {
    out.sum_x.assign((n + 1) * C, 0.0);
    out.sum_x2.assign((n + 1) * C, 0.0);
  }

  auto record = [&](int node) {
    if (!want_stats) return;
    for (int i = 0; i < N; ++i) {
      const int c = view.comp_of[i];
      out.sum_x[node * C + c] += x[i];
      out.sum_x2[node * C + c] += x[i] * x[i];
    }
  };
  auto aggregates = [&]() {
    if (view.graphon) {
      gagg = view.kernel * Eigen::Map<const Eigen::VectorXd>(x.data(), N) /
             static_cast<double>(N);
      return;
    }
    std::fill(means.begin(), means.end(), 0.0);
    for (int i = 0; i < N; ++i) means[view.comp_of[i]] += x[i];
    for (int c = 0; c < C; ++c) means[c] /= view.comp_size[c];
    for (int c = 0; c < C; ++c) {
      double s = 0.0;
      for (int l = 0; l < C; ++l) s += view.wmat(c, l) * means[l];
      agg[c] = s;
    }
  };
  auto agg_of = [&](int i) { return view.graphon ? gagg[i] : agg[view.comp_of[i]]; };

  record(0);
  for (int k = 0; k < n; ++k) {
    aggregates();
    for (int i = 0; i < N; ++i) {
      const int c = view.comp_of[i];
      const LqCoefficients& co = *view.coeffs[c];
      double pk = laws[c].p[k];
      double rk = laws[c].r[k];
      if (i == 0 && deviation != nullptr) {
        const int j = std::min(knots - 1, k * knots / n);
        pk += deviation[j];
        rk += deviation[knots + j];
      }
      const double a = view.graphon ? gagg[i] : agg[c];
      const double alpha = -(co.B / co.C) * (pk * x[i] + rk);
      const double track = x[i] - co.S * a;
      cost[i] += dt * 0.5 *
                 (co.Q * x[i] * x[i] + co.Qbar * track * track + co.C * alpha * alpha);
      x[i] += dt * (co.A * x[i] + co.Abar * a + co.B * alpha) +
              co.sigma * sqdt * draw(i, 1 + k);
      if (!std::isfinite(x[i]) || std::abs(x[i]) > kBlowupLimit) {
        throw DivergenceError("player state exceeded blow-up limit at step " +
                              std::to_string(k));
      }
    }
    record(k + 1);
  }
  aggregates();
  for (int i = 0; i < N; ++i) {
    const LqCoefficients& co = *view.coeffs[view.comp_of[i]];
    const double track = x[i] - co.S_T * agg_of(i);
    cost[i] += 0.5 * (co.Q_T * x[i] * x[i] + co.Qbar_T * track * track);
  }
  for (int i = 0; i < N; ++i) out.cost_sum[view.comp_of[i]] += cost[i];
  out.deviator_cost = cost[0];
}

std::vector<double> make_noise_slab(const GameView& view, std::uint64_t seed,
                                    std::uint64_t rep) {
  const int per_player = view.grid.n_steps + 1;
  std::vector<double> slab(static_cast<size_t>(view.n) * per_player);
  for (int i = 0; i < view.n; ++i) {
    const RandomStream s = player_stream(seed, 0, rep, i);
    for (int j = 0; j < per_player; ++j) slab[i * per_player + j] = s.normal(j);
  }
  return slab;
}

double sample_sd(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  if (n < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1));
}

}  // namespace

std::vector<int> allocate_players(int n_players, const std::vector<double>& proportions) {
  const int k = static_cast<int>(proportions.size());
  if (k < 1) throw std::invalid_argument("empty proportions");
  double total = 0.0;
  for (double p : proportions) {
    if (p < 0.0 || !std::isfinite(p)) {
      throw std::invalid_argument("proportions must be nonnegative");
    }
    total += p;
  }
  if (!(total > 0.0)) throw std::invalid_argument("proportions sum to zero");

  std::vector<int> sizes(k);
  std::vector<std::pair<double, int>> rema(k);
  int assigned = 0;
  for (int i = 0; i < k; ++i) {
    const double quota = proportions[i] / total * n_players;
    sizes[i] = static_cast<int>(quota);
    rema[i] = {quota - sizes[i], i};
    assigned += sizes[i];
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  for (int j = 0; j < n_players - assigned; ++j) sizes[rema[j % k].second]++;
  return sizes;
}

EnsembleStats simulate_population(const GameModel& model,
                                  const std::vector<FeedbackLaw>& laws,
                                  const SimConfig& config) {
  if (config.n_reps < 1) throw std::invalid_argument("n_reps must be >= 1");
  const TimeGrid grid = laws.front().grid;
  const GameView view =
      build_view(model, laws, grid, config.n_players, config.proportions);
  const int C = view.comps;
  const int nodes = grid.n_nodes();
  const int reps = config.n_reps;
  for (int c = 0; c < C; ++c) {
    if (view.comp_size[c] < 1) {
      throw std::invalid_argument(
          "component " + std::to_string(c) +
          " has no players; per-component statistics need n_players >= components");
    }
  }

  std::vector<RepOutput> outs(reps);
  parallel_for(reps, [&](int rep) {
    run_rep(view, laws, nullptr, 0, config.seed, rep, nullptr, true, outs[rep]);
  });

  EnsembleStats st;
  st.grid = grid;
  st.dim = C;
  st.n_players = config.n_players;
  st.n_reps = reps;
  st.mean = GridFunction(grid, C);
  st.variance = st.mean;
  st.mean_se = st.mean;
  st.variance_se = st.mean;
  st.avg_cost.assign(C, 0.0);
  st.avg_cost_se.assign(C, 0.0);

  for (int c = 0; c < C; ++c) {
    const int cnt = view.comp_size[c];
    for (int k = 0; k < nodes; ++k) {
      double tsum = 0.0, tsum2 = 0.0;
      std::vector<double> rep_mean(reps), rep_var(reps);
      for (int rep = 0; rep < reps; ++rep) {
        const double s = outs[rep].sum_x[k * C + c];
        const double s2 = outs[rep].sum_x2[k * C + c];
        tsum += s;
        tsum2 += s2;
        rep_mean[rep] = s / cnt;
        rep_var[rep] = cnt > 1 ? (s2 - s * s / cnt) / (cnt - 1) : 0.0;
      }
      const double total = static_cast<double>(cnt) * reps;
      st.mean.values[k * C + c] = tsum / total;
      st.variance.values[k * C + c] =
          total > 1.5 ? (tsum2 - tsum * tsum / total) / (total - 1.0) : 0.0;
      st.mean_se.values[k * C + c] = sample_sd(rep_mean) / std::sqrt(double(reps));
      st.variance_se.values[k * C + c] = sample_sd(rep_var) / std::sqrt(double(reps));
    }
    std::vector<double> rep_cost(reps);
    for (int rep = 0; rep < reps; ++rep) rep_cost[rep] = outs[rep].cost_sum[c] / cnt;
    st.avg_cost[c] = std::accumulate(rep_cost.begin(), rep_cost.end(), 0.0) / reps;
    st.avg_cost_se[c] = sample_sd(rep_cost) / std::sqrt(double(reps));
  }
  return st;
}

namespace {

// Nelder-Mead with reflection 1, expansion 2, contraction 0.5, shrink 0.5.
// The objective is deterministic under common random numbers, so the search
// itself is deterministic.
struct SimplexSearch {
  int dim;
  int budget;
  std::function<double(const std::vector<double>&)> f;
  int evals = 0;

  double eval(const std::vector<double>& x) {
    ++evals;
    return f(x);
  }

  std::vector<double> run(double radius) {
    const int m = dim + 1;
    std::vector<std::vector<double>> xs(m, std::vector<double>(dim, 0.0));
    std::vector<double> fs(m);
    for (int i = 1; i < m; ++i) xs[i][i - 1] = radius;
    for (int i = 0; i < m && evals < budget; ++i) fs[i] = eval(xs[i]);

    std::vector<int> order(m);
    while (evals < budget) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return fs[a] < fs[b]; });
      const int best = order[0], second = order[m - 2], worst = order[m - 1];
      if (std::abs(fs[worst] - fs[best]) <= 1e-13 * (1.0 + std::abs(fs[best]))) break;

      std::vector<double> centroid(dim, 0.0);
      for (int i = 0; i < m; ++i) {
        if (i == worst) continue;
        for (int d = 0; d < dim; ++d) centroid[d] += xs[i][d];
      }
      for (int d = 0; d < dim; ++d) centroid[d] /= dim;

      auto blend = [&](double coef) {
        std::vector<double> x(dim);
        for (int d = 0; d < dim; ++d) {
          x[d] = centroid[d] + coef * (centroid[d] - xs[worst][d]);
        }
        return x;
      };

      const std::vector<double> xr = blend(1.0);
      const double fr = eval(xr);
      if (fr < fs[best]) {
        if (evals >= budget) {
          xs[worst] = xr;
          fs[worst] = fr;
          break;
        }
        const std::vector<double> xe = blend(2.0);
        const double fe = eval(xe);
        if (fe < fr) {
          xs[worst] = xe;
          fs[worst] = fe;
        } else {
          xs[worst] = xr;
          fs[worst] = fr;
        }
        continue;
      }
      if (fr < fs[second]) {
        xs[worst] = xr;
        fs[worst] = fr;
        continue;
      }
      if (evals >= budget) break;
      const std::vector<double> xc = blend(fr < fs[worst] ? 0.5 : -0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = xc;
        fs[worst] = fc;
        continue;
      }
      for (int i = 0; i < m; ++i) {  // shrink toward the best vertex
        if (i == best || evals >= budget) continue;
        for (int d = 0; d < dim; ++d) {
          xs[i][d] = xs[best][d] + 0.5 * (xs[i][d] - xs[best][d]);
        }
        fs[i] = eval(xs[i]);
      }
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fs[a] < fs[b]; });
    return xs[order[0]];
  }
};

}  // namespace

NashGapEntry estimate_nash_gap(const GameModel& model,
                               const std::vector<FeedbackLaw>& laws,
                               const SimConfig& config) {
  if (config.n_players < 2) {
    throw std::invalid_argument("gap estimation needs at least two players");
  }
  if (config.deviation_knots < 1) {
    throw std::invalid_argument("deviation_knots must be >= 1");
  }
  const TimeGrid grid = laws.front().grid;
  const GameView view =
      build_view(model, laws, grid, config.n_players, config.proportions);
  const int reps = config.n_reps;
  const int knots = config.deviation_knots;

  // Common random numbers: one noise slab per replication, shared by every
  // deviation candidate.
  std::vector<std::vector<double>> noise(reps);
  parallel_for(reps, [&](int rep) { noise[rep] = make_noise_slab(view, config.seed, rep); });

  std::vector<double> best_costs, costs0;
  std::vector<double> best_params(2 * knots, 0.0);
  double best_mean = 0.0;
  bool have_best = false;

  auto objective = [&](const std::vector<double>& params) {
    std::vector<double> costs(reps);
    parallel_for(reps, [&](int rep) {
      RepOutput out;
      run_rep(view, laws, params.data(), knots, config.seed, rep,
              noise[rep].data(), false, out);
      costs[rep] = out.deviator_cost;
    });
    const double mean = std::accumulate(costs.begin(), costs.end(), 0.0) / reps;
    if (!have_best || mean < best_mean) {
      have_best = true;
      best_mean = mean;
      best_costs = costs;
      best_params = params;
    }
    if (params == std::vector<double>(params.size(), 0.0)) costs0 = std::move(costs);
    return mean;
  };

  SimplexSearch search{2 * knots, config.max_search_evals, objective};
  search.run(0.1);
  if (costs0.empty()) objective(std::vector<double>(2 * knots, 0.0));

  const double j_eq = std::accumulate(costs0.begin(), costs0.end(), 0.0) / reps;
  std::vector<double> diffs(reps);
  for (int rep = 0; rep < reps; ++rep) diffs[rep] = costs0[rep] - best_costs[rep];

  NashGapEntry entry;
  entry.n_players = config.n_players;
  entry.j_equilibrium = j_eq;
  entry.j_best = best_mean;
  entry.gap = std::max(0.0, j_eq - best_mean);
  entry.std_error = sample_sd(diffs) / std::sqrt(double(reps));
  entry.deviation = best_params;
  entry.evaluations = search.evals;
  return entry;
}

NashGapReport convergence_sweep(const GameModel& model,
                                const std::vector<FeedbackLaw>& laws,
                                const std::vector<int>& n_players_list,
                                const SimConfig& config) {
  if (n_players_list.empty()) throw std::invalid_argument("empty sweep list");
  NashGapReport report;
  for (int n : n_players_list) {
    SimConfig per = config;
    per.n_players = n;
    per.seed = prf(config.seed, static_cast<std::uint64_t>(n));
    report.entries.push_back(estimate_nash_gap(model, laws, per));
  }
  for (size_t i = 0; i + 1 < report.entries.size(); ++i) {
    const auto& a = report.entries[i];
    const auto& b = report.entries[i + 1];
    const double slack =
        2.0 * std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    if (b.gap > a.gap + slack) report.monotone = false;
  }
  return report;
}

}  // namespace mfglq
