#include "stogreed/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace stogreed {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim_ws(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim_ws(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

ExperimentKind parse_kind(const std::string& v) {
  if (v == "error_vs_epoch") return ExperimentKind::ErrorVsEpoch;
  if (v == "phase_transition") return ExperimentKind::PhaseTransition;
  if (v == "block_sweep") return ExperimentKind::BlockSweep;
  if (v == "stepsize_sweep") return ExperimentKind::StepsizeSweep;
  if (v == "noise_robustness") return ExperimentKind::NoiseRobustness;
  if (v == "svd_oversampling") return ExperimentKind::SvdOversampling;
  throw SpecError("unknown experiment kind: " + v);
}

}  // namespace

ExperimentSpec parse_spec_text(const std::string& text) {
  ExperimentSpec spec;
  bool saw_schema = false, saw_kind = false, saw_threshold = false;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim_ws(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw SpecError("line " + std::to_string(lineno) +
                      ": expected key = value");
    const std::string key = trim_ws(t.substr(0, eq));
    const std::string val = trim_ws(t.substr(eq + 1));
    try {
      if (key == "schema_version") {
        if (std::stoi(val) != 1) throw SpecError("unsupported schema version");
        saw_schema = true;
      } else if (key == "kind") {
        spec.kind = parse_kind(val);
        saw_kind = true;
      } else if (key == "solver") {
        if (val == "stoiht") spec.solver = SolverChoice::StoIHT;
        else if (val == "stogradmp") spec.solver = SolverChoice::StoGradMP;
        else if (val == "both") spec.solver = SolverChoice::Both;
        else throw SpecError("unknown solver: " + val);
      } else if (key == "n") spec.n = std::stoi(val);
      else if (key == "rows") spec.mat_rows = std::stoi(val);
      else if (key == "cols") spec.mat_cols = std::stoi(val);
      else if (key == "k0") spec.k0 = std::stoi(val);
      else if (key == "k") spec.k = std::stoi(val);
      else if (key == "m") spec.m_list = {std::stoi(val)};
      else if (key == "m_list") {
        spec.m_list.clear();
        for (const auto& s : split_csv(val)) spec.m_list.push_back(std::stoi(s));
      } else if (key == "b") spec.b_list = {std::stoi(val)};
      else if (key == "b_list") {
        spec.b_list.clear();
        for (const auto& s : split_csv(val)) spec.b_list.push_back(std::stoi(s));
      } else if (key == "gamma") spec.gamma = std::stod(val);
      else if (key == "gamma_list") {
        spec.gamma_list.clear();
        for (const auto& s : split_csv(val))
          spec.gamma_list.push_back(std::stod(s));
      } else if (key == "oversampling_list") {
        spec.oversampling_list.clear();
        for (const auto& s : split_csv(val))
          spec.oversampling_list.push_back(std::stoi(s));
      } else if (key == "power_iters") spec.power_iters = std::stoi(val);
      else if (key == "ensemble") {
        if (val == "gaussian") spec.ensemble = Ensemble::Gaussian;
        else if (val == "subsampled_fourier")
          spec.ensemble = Ensemble::SubsampledFourier;
        else if (val == "identity") spec.ensemble = Ensemble::Identity;
        else throw SpecError("unknown ensemble: " + val);
      } else if (key == "noise_norm") spec.noise_norm = std::stod(val);
      else if (key == "gradient_noise") {
        if (val == "none") spec.gradient_noise.kind = NoiseSchedule::Kind::None;
        else if (val == "constant")
          spec.gradient_noise.kind = NoiseSchedule::Kind::ConstantNorm;
        else if (val == "decaying")
          spec.gradient_noise.kind = NoiseSchedule::Kind::Decaying;
        else throw SpecError("unknown gradient_noise: " + val);
      } else if (key == "gradient_noise_nu")
        spec.gradient_noise.nu = std::stod(val);
      else if (key == "max_epochs") spec.max_epochs = std::stoi(val);
      else if (key == "halt_error") spec.halt_error = std::stod(val);
      else if (key == "trials") spec.trials = std::stoi(val);
      else if (key == "svd_subtrials") spec.svd_subtrials = std::stoi(val);
      else if (key == "seed") spec.seed = std::stoull(val);
      else if (key == "success_threshold") {
        spec.success_threshold = std::stod(val);
        saw_threshold = true;
      } else if (key == "trim_fraction") spec.trim_fraction = std::stod(val);
      else if (key == "timing") spec.timing = (val == "true" || val == "1");
      else throw SpecError("unknown key: " + key);
    } catch (const SpecError&) {
      throw;
    } catch (const std::exception& e) {
      throw SpecError("line " + std::to_string(lineno) + ": bad value for " +
                      key + " (" + e.what() + ")");
    }
  }
  if (!saw_schema) throw SpecError("missing schema_version");
  if (!saw_kind) throw SpecError("missing kind");
  if (spec.kind == ExperimentKind::NoiseRobustness && !saw_threshold)
    spec.success_threshold = spec.noise_norm;
  validate_spec(spec);
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SpecError("cannot open spec file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_spec_text(ss.str());
}

void validate_spec(const ExperimentSpec& spec) {
  const bool matrix = spec.mat_rows > 0 || spec.mat_cols > 0;
  const int ambient = matrix ? spec.mat_rows * spec.mat_cols : spec.n;
  const int max_sparsity =
      matrix ? std::min(spec.mat_rows, spec.mat_cols) : spec.n;

  if (matrix && (spec.mat_rows < 1 || spec.mat_cols < 1))
    throw SpecError("matrix problems need rows and cols >= 1");
  if (!matrix && spec.n < 1) throw SpecError("need n >= 1");
  if (spec.k0 < 1 || spec.k0 > max_sparsity)
    throw SpecError("k0 out of range for the problem dimensions");
  if (spec.k < 0 || spec.k > max_sparsity) throw SpecError("k out of range");
  if (spec.trials < 1) throw SpecError("need trials >= 1");
  if (spec.trim_fraction < 0.0 || spec.trim_fraction >= 0.5)
    throw SpecError("trim_fraction must lie in [0, 0.5)");
  if (spec.max_epochs < 1) throw SpecError("need max_epochs >= 1");
  if (spec.m_list.empty()) throw SpecError("no measurement count given");
  for (int m : spec.m_list)
    if (m < 1) throw SpecError("measurement counts must be positive");
  for (int b : spec.b_list)
    if (b < 1) throw SpecError("block sizes must be positive");
  // Block sizes larger than some grid m are clamped to one block per run,
  // matching the sweep protocol; no error here.

  if (spec.ensemble != Ensemble::Gaussian) {
    // Row-subsampled operators cannot produce more rows than the transform
    // has; the structured operator is also kept at desk scale.
    for (int m : spec.m_list)
      if (m > ambient) throw SpecError("m exceeds available transform rows");
    if (spec.ensemble == Ensemble::SubsampledFourier && ambient > 4096)
      throw SpecError("subsampled transform capped at ambient dimension 4096");
    if (spec.ensemble == Ensemble::Identity)
      for (int m : spec.m_list)
        if (m != ambient)
          throw SpecError("identity ensemble needs m equal to the dimension");
  }

  switch (spec.kind) {
    case ExperimentKind::PhaseTransition:
      if (!std::is_sorted(spec.m_list.begin(), spec.m_list.end()))
        throw SpecError("phase transitions need an ascending m grid");
      break;
    case ExperimentKind::StepsizeSweep:
      if (spec.gamma_list.empty())
        throw SpecError("stepsize sweep needs gamma_list");
      if (spec.solver == SolverChoice::StoGradMP)
        throw SpecError("stepsize sweep applies to the hard thresholding "
                        "solver only");
      break;
    case ExperimentKind::SvdOversampling:
      if (!matrix)
        throw SpecError("svd_oversampling needs a matrix problem");
      if (spec.oversampling_list.empty())
        throw SpecError("svd_oversampling needs oversampling_list");
      for (int d : spec.oversampling_list)
        if (d < 0 || (spec.k0 + d) > max_sparsity)
          throw SpecError("oversampling out of range");
      if (spec.svd_subtrials < 1) throw SpecError("need svd_subtrials >= 1");
      break;
    case ExperimentKind::NoiseRobustness:
      if (spec.noise_norm <= 0.0 &&
          spec.gradient_noise.kind == NoiseSchedule::Kind::None)
        throw SpecError("noise_robustness needs noise_norm or gradient noise");
      break;
    default:
      break;
  }
}

double trimmed_mean(const std::vector<double>& values, double fraction) {
  if (values.empty())
    throw std::invalid_argument("trimmed_mean: empty input");
  if (fraction < 0.0 || fraction >= 0.5)
    throw std::invalid_argument("trimmed_mean: fraction out of [0, 0.5)");
  const int n = static_cast<int>(values.size());
  const int cut = static_cast<int>(std::round(fraction / 2.0 * n));
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (int i = cut; i < n - cut; ++i) sum += sorted[i];
  return sum / (n - 2 * cut);
}

std::pair<double, double> trimmed_mean_with_time(
    const std::vector<double>& values, const std::vector<double>& times,
    double fraction) {
  if (values.empty() || values.size() != times.size())
    throw std::invalid_argument("trimmed_mean_with_time: bad input sizes");
  if (fraction < 0.0 || fraction >= 0.5)
    throw std::invalid_argument("trimmed_mean_with_time: bad fraction");
  const int n = static_cast<int>(values.size());
  const int cut = static_cast<int>(std::round(fraction / 2.0 * n));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });
  double vsum = 0.0, tsum = 0.0;
  for (int i = cut; i < n - cut; ++i) {
    vsum += values[order[i]];
    tsum += times[order[i]];
  }
  const int kept = n - 2 * cut;
  return {vsum / kept, tsum / kept};
}

namespace {

Eigen::MatrixXd dct_rows(int dim, const std::vector<int>& picked) {
  Eigen::MatrixXd rows(picked.size(), dim);
  const double pi = std::acos(-1.0);
  for (std::size_t r = 0; r < picked.size(); ++r) {
    const int i = picked[r];
    const double scale =
        (i == 0 ? std::sqrt(1.0 / dim) : std::sqrt(2.0 / dim));
    for (int j = 0; j < dim; ++j)
      rows(r, j) = scale * std::cos(pi * (2 * j + 1) * i / (2.0 * dim));
  }
  return rows;
}

std::vector<int> sample_rows(int dim, int m, Rng& rng) {
  std::vector<int> pool(dim);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < m; ++i)
    std::swap(pool[i], pool[i + rng.uniform_int(dim - i)]);
  pool.resize(m);
  return pool;
}

// Random designs are scaled so each size-b block operator is an approximate
// isometry in expectation: E (1/b)|A_{b_i} w|^2 = |w|^2 / b ... i.e. entries
// N(0, 1/b). Under this scale a unit step against the (1/b)-normalized
// block gradient moves the iterate by an O(1) fraction of the residual
// while the per-block curvature stays below the stability threshold at
// small block sizes; rawer scalings either blow the stochastic iteration
// up (variance ~ n/b per block at unit entries) or attenuate the proxy so
// much that hard thresholding locks onto wrong supports and stalls.
Eigen::MatrixXd draw_design(int m, int dim, int block, Ensemble ensemble,
                            Rng& rng) {
  switch (ensemble) {
    case Ensemble::Gaussian: {
      Eigen::MatrixXd A(m, dim);
      const double scale = 1.0 / std::sqrt(static_cast<double>(block));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < dim; ++j) A(i, j) = scale * rng.gaussian();
      return A;
    }
    case Ensemble::SubsampledFourier: {
      // Real orthogonal stand-in for permuted DFT rows, scaled to match the
      // Gaussian block normalization.
      const auto picked = sample_rows(dim, m, rng);
      return std::sqrt(static_cast<double>(dim) / block) *
             dct_rows(dim, picked);
    }
    case Ensemble::Identity:
      return Eigen::MatrixXd::Identity(m, dim);
  }
  throw std::logic_error("unknown ensemble");
}

Eigen::VectorXd measurement_noise(int m, double norm, Rng& rng) {
  if (norm <= 0.0) return Eigen::VectorXd::Zero(m);
  Eigen::VectorXd e(m);
  for (int i = 0; i < m; ++i) e[i] = rng.gaussian();
  return e * (norm / e.norm());
}

}  // namespace

GeneratedProblem make_vector_instance(int n, int k0, int m, int b,
                                      Ensemble ensemble, double noise_norm,
                                      Rng& rng) {
  Eigen::MatrixXd A = draw_design(m, n, b, ensemble, rng);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  const auto support = sample_rows(n, k0, rng);
  for (int idx : support) w[idx] = rng.gaussian();
  Eigen::VectorXd y = A * w + measurement_noise(m, noise_norm, rng);
  return {BlockObjective::sparse_regression(std::move(A), std::move(y), b),
          std::move(w)};
}

GeneratedProblem make_matrix_instance(int n1, int n2, int rank, int m, int b,
                                      Ensemble ensemble, double noise_norm,
                                      Rng& rng) {
  const int dim = n1 * n2;
  Eigen::MatrixXd A = draw_design(m, dim, b, ensemble, rng);
  Eigen::MatrixXd L(n1, rank), R(n2, rank);
  for (int j = 0; j < rank; ++j) {
    for (int i = 0; i < n1; ++i) L(i, j) = rng.gaussian();
    for (int i = 0; i < n2; ++i) R(i, j) = rng.gaussian();
  }
  Eigen::MatrixXd W = L * R.transpose();
  Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(W.data(), W.size());
  Eigen::VectorXd y = A * w + measurement_noise(m, noise_norm, rng);

  std::vector<Eigen::MatrixXd> ops;
  ops.reserve(m);
  for (int j = 0; j < m; ++j) {
    const Eigen::VectorXd row = A.row(j).transpose();
    ops.push_back(Eigen::Map<const Eigen::MatrixXd>(row.data(), n1, n2));
  }
  return {BlockObjective::matrix_recovery(ops, std::move(y), b), std::move(w)};
}

namespace {

struct Variant {
  std::string name;
  int b = 0;           // 0 -> use m (deterministic limit)
  double gamma = 0.0;  // 0 -> spec default
  ProjectionConfig proj{};
  int subtrials = 1;
};

std::vector<Variant> build_variants(const ExperimentSpec& spec) {
  std::vector<Variant> out;
  const auto default_b = [&](int m) { return std::min(spec.k0, m); };

  switch (spec.kind) {
    case ExperimentKind::ErrorVsEpoch:
    case ExperimentKind::NoiseRobustness: {
      const auto bs = spec.b_list.empty()
                          ? std::vector<int>{default_b(spec.m_list.front())}
                          : spec.b_list;
      for (int b : bs) out.push_back({"b=" + std::to_string(b), b});
      break;
    }
    case ExperimentKind::PhaseTransition:
    case ExperimentKind::BlockSweep: {
      const auto bs = spec.b_list.empty()
                          ? std::vector<int>{default_b(spec.m_list.front())}
                          : spec.b_list;
      for (int b : bs) out.push_back({"b=" + std::to_string(b), b});
      out.push_back({"deterministic", 0});
      break;
    }
    case ExperimentKind::StepsizeSweep: {
      const int b = spec.b_list.empty() ? default_b(spec.m_list.front())
                                        : spec.b_list.front();
      for (double g : spec.gamma_list) {
        Variant v{"gamma=" + fmt_double(g), b, g};
        out.push_back(std::move(v));
      }
      break;
    }
    case ExperimentKind::SvdOversampling: {
      const int b = spec.b_list.empty() ? default_b(spec.m_list.front())
                                        : spec.b_list.front();
      out.push_back({"exact", b, 0.0, ProjectionConfig::exact(), 1});
      for (int d : spec.oversampling_list)
        out.push_back({"d=" + std::to_string(d), b, 0.0,
                       ProjectionConfig::randomized(d, spec.power_iters),
                       spec.svd_subtrials});
      break;
    }
  }
  return out;
}

std::vector<std::string> solver_names(SolverChoice choice) {
  switch (choice) {
    case SolverChoice::StoIHT: return {"stoiht"};
    case SolverChoice::StoGradMP: return {"stogradmp"};
    case SolverChoice::Both: return {"stoiht", "stogradmp"};
  }
  return {};
}

TrialSummary summarize(const RunTrace& trace, const std::string& variant,
                       const std::string& solver, int m, int b, int trial,
                       int max_epochs) {
  TrialSummary s;
  s.variant = variant;
  s.solver = solver;
  s.m = m;
  s.b = b;
  s.trial = trial;
  s.status = trace.status;
  s.epoch_error.assign(max_epochs, std::numeric_limits<double>::quiet_NaN());
  s.epoch_objective.assign(max_epochs, 0.0);
  s.epoch_time.assign(max_epochs, 0.0);
  s.epoch_iteration.assign(max_epochs, 0);
  for (const auto& rec : trace.records) {
    if (rec.epoch >= max_epochs) break;
    s.epoch_error[rec.epoch] = rec.error;
    s.epoch_objective[rec.epoch] = rec.objective;
    s.epoch_time[rec.epoch] = rec.wall_time_s;
    s.epoch_iteration[rec.epoch] = rec.iteration;
  }
  for (int e = 1; e < max_epochs; ++e) {
    if (std::isnan(s.epoch_error[e]) && !std::isnan(s.epoch_error[e - 1])) {
      s.epoch_error[e] = s.epoch_error[e - 1];
      s.epoch_objective[e] = s.epoch_objective[e - 1];
      s.epoch_time[e] = s.epoch_time[e - 1];
      s.epoch_iteration[e] = s.epoch_iteration[e - 1];
    }
  }
  s.final_error = trace.records.empty()
                      ? std::numeric_limits<double>::quiet_NaN()
                      : trace.records.back().error;
  return s;
}

}  // namespace

TrialSet run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);
  TrialSet ts;
  ts.spec = spec;
  const bool matrix = spec.mat_rows > 0;
  const AtomModel model =
      matrix ? AtomModel::rank_one(spec.mat_rows, spec.mat_cols)
             : AtomModel::coordinate(spec.n);
  const int k = spec.k > 0 ? spec.k : spec.k0;
  const auto variants = build_variants(spec);
  const auto solvers = solver_names(spec.solver);

  int variant_index = 0;
  for (const auto& variant : variants) {
    for (int m : spec.m_list) {
      const int b = variant.b > 0 ? std::min(variant.b, m) : m;
      for (int trial = 0; trial < spec.trials; ++trial) {
        // One instance per (m, trial): variants face matched problems.
        Rng problem_rng = Rng::derive(
            spec.seed, (static_cast<std::uint64_t>(m) << 32) |
                           static_cast<std::uint32_t>(trial));
        const GeneratedProblem problem =
            matrix ? make_matrix_instance(spec.mat_rows, spec.mat_cols,
                                          spec.k0, m, b, spec.ensemble,
                                          spec.noise_norm, problem_rng)
                   : make_vector_instance(spec.n, spec.k0, m, b,
                                          spec.ensemble, spec.noise_norm,
                                          problem_rng);
        for (std::size_t si = 0; si < solvers.size(); ++si) {
          for (int sub = 0; sub < variant.subtrials; ++sub) {
            SolverConfig cfg;
            cfg.k = k;
            cfg.gamma = variant.gamma > 0.0 ? variant.gamma : spec.gamma;
            cfg.identify_proj = variant.proj;
            cfg.prune_proj = variant.proj;
            cfg.noise = spec.gradient_noise;
            cfg.halting.max_epochs = spec.max_epochs;
            cfg.halting.error_tolerance = spec.halt_error;
            cfg.seed = Rng::derive_seed(
                spec.seed ^ 0x517e5eedULL,
                (static_cast<std::uint64_t>(variant_index) << 48) |
                    (static_cast<std::uint64_t>(si) << 40) |
                    (static_cast<std::uint64_t>(sub) << 32) |
                    (static_cast<std::uint64_t>(m) << 16) |
                    static_cast<std::uint32_t>(trial));
            const Eigen::VectorXd w0 =
                Eigen::VectorXd::Zero(model.ambient_dim());
            const RunTrace trace =
                solvers[si] == "stoiht"
                    ? stoiht(problem.objective, model, cfg, w0,
                             &problem.w_star)
                    : stogradmp(problem.objective, model, cfg, w0,
                                &problem.w_star);
            ts.trials.push_back(summarize(
                trace, variant.name, solvers[si], m, b,
                trial * variant.subtrials + sub, spec.max_epochs));
          }
        }
      }
    }
    ++variant_index;
  }

  // Aggregates: trimmed-mean error curves, or recovery fractions plus the
  // minimum-measurement table for phase grids.
  if (spec.kind == ExperimentKind::PhaseTransition) {
    for (const auto& variant : variants) {
      for (const auto& solver : solvers) {
        for (int m : spec.m_list) {
          int hits = 0, total = 0;
          for (const auto& t : ts.trials) {
            if (t.variant != variant.name || t.solver != solver || t.m != m)
              continue;
            ++total;
            if (t.final_error < spec.success_threshold) ++hits;
          }
          AggregateRow row;
          row.metric = "recovery_fraction";
          row.variant = variant.name;
          row.solver = solver;
          row.m = m;
          row.b = variant.b > 0 ? std::min(variant.b, m) : m;
          row.value = total > 0 ? static_cast<double>(hits) / total : 0.0;
          ts.aggregates.push_back(std::move(row));
        }
      }
    }
    const auto table = min_measurements_table(ts);
    ts.aggregates.insert(ts.aggregates.end(), table.begin(), table.end());
  } else {
    for (const auto& variant : variants) {
      for (const auto& solver : solvers) {
        for (int m : spec.m_list) {
          std::vector<const TrialSummary*> rows;
          for (const auto& t : ts.trials)
            if (t.variant == variant.name && t.solver == solver && t.m == m)
              rows.push_back(&t);
          if (rows.empty()) continue;
          for (int e = 0; e < spec.max_epochs; ++e) {
            std::vector<double> errs, times;
            errs.reserve(rows.size());
            for (const auto* t : rows) {
              errs.push_back(t->epoch_error[e]);
              times.push_back(t->epoch_time[e]);
            }
            const auto [val, tm] =
                trimmed_mean_with_time(errs, times, spec.trim_fraction);
            AggregateRow row;
            row.metric = "trimmed_error";
            row.variant = variant.name;
            row.solver = solver;
            row.m = m;
            row.b = rows.front()->b;
            row.epoch = e;
            row.value = val;
            row.time_s = tm;
            ts.aggregates.push_back(std::move(row));
          }
        }
      }
    }
  }
  return ts;
}

std::vector<AggregateRow> min_measurements_table(const TrialSet& ts) {
  std::vector<AggregateRow> out;
  const auto& spec = ts.spec;
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& t : ts.trials) {
    const auto key = std::make_pair(t.variant, t.solver);
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      keys.push_back(key);
  }
  for (const auto& [variant, solver] : keys) {
    double found = std::numeric_limits<double>::quiet_NaN();
    for (int m : spec.m_list) {  // ascending grid
      std::vector<double> finals;
      for (const auto& t : ts.trials)
        if (t.variant == variant && t.solver == solver && t.m == m)
          finals.push_back(t.epoch_error.back());
      if (finals.empty()) continue;
      if (trimmed_mean(finals, spec.trim_fraction) < spec.success_threshold) {
        found = m;
        break;
      }
    }
    AggregateRow row;
    row.metric = "min_measurements";
    row.variant = variant;
    row.solver = solver;
    row.value = found;  // NaN -> no grid point recovered
    out.push_back(std::move(row));
  }
  return out;
}

void export_csv(const TrialSet& ts, const std::string& path_prefix) {
  {
    std::ofstream raw(path_prefix + "_raw.csv");
    if (!raw)
      throw std::runtime_error("export_csv: cannot open " + path_prefix +
                               "_raw.csv");
    raw << "variant,solver,m,b,trial,epoch,iteration,error,objective,"
           "wall_time_s\n";
    for (const auto& t : ts.trials) {
      for (int e = 0; e < static_cast<int>(t.epoch_error.size()); ++e) {
        // Skip carried rows: only epochs the run actually reached.
        if (e > 0 && t.epoch_iteration[e] == t.epoch_iteration[e - 1]) break;
        if (std::isnan(t.epoch_error[e]) && e > 0) break;
        raw << t.variant << ',' << t.solver << ',' << t.m << ',' << t.b << ','
            << t.trial << ',' << e << ',' << t.epoch_iteration[e] << ','
            << fmt_double(t.epoch_error[e]) << ','
            << fmt_double(t.epoch_objective[e]) << ','
            << fmt_double(t.epoch_time[e]) << '\n';
      }
    }
  }
  {
    std::ofstream agg(path_prefix + "_agg.csv");
    if (!agg)
      throw std::runtime_error("export_csv: cannot open " + path_prefix +
                               "_agg.csv");
    agg << "metric,variant,solver,m,b,epoch,value";
    if (ts.spec.timing) agg << ",time_s";
    agg << '\n';
    for (const auto& row : ts.aggregates) {
      agg << row.metric << ',' << row.variant << ',' << row.solver << ','
          << row.m << ',' << row.b << ',' << row.epoch << ','
          << fmt_double(row.value);
      if (ts.spec.timing) agg << ',' << fmt_double(row.time_s);
      agg << '\n';
    }
  }
}

}  // namespace stogreed
