#include "stogreed/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace stogreed {

namespace {

using Clock = std::chrono::steady_clock;

void validate_config(const BlockObjective& obj, const SolverConfig& cfg) {
  if (cfg.k < 1) throw std::invalid_argument("solvers: need k >= 1");
  if (cfg.gamma <= 0.0) throw std::invalid_argument("solvers: need gamma > 0");
  if (cfg.estimation_tolerance < 0.0)
    throw std::invalid_argument("solvers: need epsilon >= 0");
  if (cfg.halting.max_epochs < 1)
    throw std::invalid_argument("solvers: need max_epochs >= 1");
  if (cfg.p.size() > 0 && cfg.p.size() != obj.block_count())
    throw std::invalid_argument("solvers: sampling distribution length");
}

const Eigen::VectorXd& sampling(const BlockObjective& obj,
                                const SolverConfig& cfg) {
  return cfg.p.size() > 0 ? cfg.p : obj.weights();
}

Eigen::VectorXd gradient_noise(const NoiseSchedule& noise, int t, int dim,
                               Rng& rng) {
  double target = 0.0;
  switch (noise.kind) {
    case NoiseSchedule::Kind::None:
      return Eigen::VectorXd::Zero(dim);
    case NoiseSchedule::Kind::ConstantNorm:
      target = noise.nu;
      break;
    case NoiseSchedule::Kind::Decaying:
      target = noise.nu / (t + 1);
      break;
  }
  Eigen::VectorXd e(dim);
  for (int i = 0; i < dim; ++i) e[i] = rng.gaussian();
  const double n = e.norm();
  return n > 0 ? Eigen::VectorXd(e * (target / n))
               : Eigen::VectorXd::Zero(dim);
}

// Maps a per-iteration eta target onto the projection config. Only the
// randomized mode has a knob to turn: the oversampling width that certifies
// eta = 1 + sqrt(s/(s+d)).
ProjectionConfig apply_eta_target(ProjectionConfig cfg, double eta, int s,
                                  int min_dim) {
  if (cfg.mode != ProjectionConfig::Mode::Randomized || eta <= 1.0)
    return cfg;
  const double ratio = (eta - 1.0) * (eta - 1.0);
  const int wanted = static_cast<int>(std::ceil(s / ratio - s));
  cfg.oversampling = std::clamp(wanted, 0, std::max(0, min_dim - s));
  return cfg;
}

double schedule_value(const std::vector<double>& schedule, int t,
                      double fallback) {
  if (schedule.empty()) return fallback;
  return schedule[std::min<std::size_t>(t, schedule.size() - 1)];
}

void snapshot_support(IterationRecord& rec, const SupportSet& support) {
  rec.support = support.indices;
  rec.support_rank = support.rank();
}

struct LoopState {
  Eigen::VectorXd prev;
  double guard_scale = 1.0;
  std::vector<int> last_visit;  // per block, iteration of most recent sample
  int quiet_since = 0;          // start of the current small-step stretch
  double best_objective = std::numeric_limits<double>::infinity();
  int best_objective_epoch = 0;
  Clock::time_point start = Clock::now();

  explicit LoopState(const Eigen::VectorXd& w0, int blocks)
      : prev(w0), last_visit(blocks, -1) {}
};

enum class StepOutcome { Continue, Converged, Diverged };

// Step-size convergence needs every block to have been sampled during the
// current stretch of tiny steps: blocks are drawn with replacement, so
// no-op iterations on already-fit blocks say nothing about the rest. With
// one block this is the plain per-iteration rule.
StepOutcome check_halting(const SolverConfig& cfg, const Eigen::VectorXd& w,
                          const IterationRecord& rec, LoopState& state) {
  if (w.norm() > 1e12 * state.guard_scale) return StepOutcome::Diverged;
  if (cfg.halting.error_tolerance > 0.0 && !std::isnan(rec.error) &&
      rec.error < cfg.halting.error_tolerance)
    return StepOutcome::Converged;

  state.last_visit[rec.block] = rec.iteration;
  const double step = (w - state.prev).norm() / std::max(1.0, w.norm());
  if (step >= cfg.halting.step_tolerance) {
    state.quiet_since = rec.iteration + 1;
  } else {
    bool all_blocks_quiet = true;
    for (int v : state.last_visit)
      if (v < state.quiet_since) {
        all_blocks_quiet = false;
        break;
      }
    if (all_blocks_quiet) return StepOutcome::Converged;
  }

  if (cfg.halting.stall_window_epochs > 0) {
    if (rec.objective < state.best_objective * (1.0 - 1e-12)) {
      state.best_objective = rec.objective;
      state.best_objective_epoch = rec.epoch;
    } else if (rec.epoch - state.best_objective_epoch >=
               cfg.halting.stall_window_epochs) {
      return StepOutcome::Converged;
    }
  }
  return StepOutcome::Continue;
}

}  // namespace

int sample_index(const Eigen::VectorXd& p, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    cum += p[i];
    if (u < cum) return i;
  }
  return static_cast<int>(p.size()) - 1;
}

RunTrace stoiht(const BlockObjective& obj, const AtomModel& model,
                const SolverConfig& cfg, const Eigen::VectorXd& w0,
                const Eigen::VectorXd* w_star) {
  validate_config(obj, cfg);
  if (w0.size() != model.ambient_dim())
    throw std::invalid_argument("solvers: w0 dimension mismatch");
  const Eigen::VectorXd& p = sampling(obj, cfg);
  const int M = obj.block_count();
  const int min_dim = model.kind() == AtomKind::RankOne
                          ? std::min(model.mat_rows(), model.mat_cols())
                          : model.atom_count();

  Rng rng(cfg.seed);
  RunTrace trace;
  trace.iterations_per_epoch = M;
  Eigen::VectorXd w = w0;
  LoopState state(w0, M);

  const int total_iters = cfg.halting.max_epochs * M;
  for (int t = 0; t < total_iters; ++t) {
    const int i = sample_index(p, rng);
    Eigen::VectorXd g = obj.block_gradient(i, w);
    if (cfg.noise.kind != NoiseSchedule::Kind::None)
      g += gradient_noise(cfg.noise, t, model.ambient_dim(), rng);
    const Eigen::VectorXd b = w - (cfg.gamma / (M * p[i])) * g;
    if (t == 0) state.guard_scale = std::max(1.0, (w - b).norm());

    const double eta_t = schedule_value(cfg.eta_schedule, t, 0.0);
    const ProjectionConfig proj =
        apply_eta_target(cfg.identify_proj, eta_t, cfg.k, min_dim);
    const IdentifyOutcome id = identify(model, b, cfg.k, proj, rng);
    w = project(model, b, id.support);

    IterationRecord rec;
    rec.iteration = t;
    rec.epoch = t / M;
    rec.block = i;
    rec.objective = obj.full_value(w);
    if (w_star) rec.error = (w - *w_star).norm();
    snapshot_support(rec, id.support);
    rec.wall_time_s =
        std::chrono::duration<double>(Clock::now() - state.start).count();
    trace.records.push_back(std::move(rec));

    const StepOutcome out =
        check_halting(cfg, w, trace.records.back(), state);
    if (out == StepOutcome::Diverged) {
      trace.status = TerminalStatus::Diverged;
      trace.final_iterate = w;
      return trace;
    }
    if (out == StepOutcome::Converged) {
      trace.status = TerminalStatus::Converged;
      trace.final_iterate = w;
      return trace;
    }
    state.prev = w;
  }
  trace.status = TerminalStatus::MaxEpochs;
  trace.final_iterate = w;
  return trace;
}

RunTrace stogradmp(const BlockObjective& obj, const AtomModel& model,
                   const SolverConfig& cfg, const Eigen::VectorXd& w0,
                   const Eigen::VectorXd* w_star) {
  validate_config(obj, cfg);
  if (w0.size() != model.ambient_dim())
    throw std::invalid_argument("solvers: w0 dimension mismatch");
  const Eigen::VectorXd& p = sampling(obj, cfg);
  const int M = obj.block_count();
  const int atom_cap = model.atom_count() > 0 ? model.atom_count()
                                              : std::min(model.mat_rows(),
                                                         model.mat_cols());
  const int identify_k = std::min(2 * cfg.k, atom_cap);
  const int min_dim = model.kind() == AtomKind::RankOne
                          ? std::min(model.mat_rows(), model.mat_cols())
                          : model.atom_count();

  Rng rng(cfg.seed);
  RunTrace trace;
  trace.iterations_per_epoch = M;
  Eigen::VectorXd w = w0;
  SupportSet pruned;
  pruned.kind = model.kind();
  LoopState state(w0, M);

  const int total_iters = cfg.halting.max_epochs * M;
  for (int t = 0; t < total_iters; ++t) {
    const int i = sample_index(p, rng);
    Eigen::VectorXd r = obj.block_gradient(i, w);
    if (cfg.noise.kind != NoiseSchedule::Kind::None)
      r += gradient_noise(cfg.noise, t, model.ambient_dim(), rng);

    const double eta_t = schedule_value(cfg.eta_schedule, t, 0.0);
    const ProjectionConfig id_proj =
        apply_eta_target(cfg.identify_proj, eta_t, identify_k, min_dim);
    const SupportSet gamma_set =
        identify(model, r, identify_k, id_proj, rng).support;
    const SupportSet merged = merge(model, gamma_set, pruned);

    Eigen::VectorXd b;
    bool estimate_ok = true;
    if (merged.empty()) {
      b = w;  // zero gradient and no carried support: already stationary
    } else {
      const double eps_t =
          schedule_value(cfg.epsilon_schedule, t, cfg.estimation_tolerance);
      const double grad_tol = eps_t > 0.0
                                  ? cfg.estimation_rho_minus * eps_t
                                  : 0.0;  // 0 -> solver's exact default
      const RestrictedSolveResult sol =
          restricted_minimize(obj, model, merged, grad_tol);
      b = sol.point;
      estimate_ok = sol.converged;
    }
    if (t == 0) state.guard_scale = std::max(1.0, (w - b).norm());

    pruned = identify(model, b, cfg.k, cfg.prune_proj, rng).support;
    w = project(model, b, pruned);

    IterationRecord rec;
    rec.iteration = t;
    rec.epoch = t / M;
    rec.block = i;
    rec.objective = obj.full_value(w);
    if (w_star) rec.error = (w - *w_star).norm();
    snapshot_support(rec, pruned);
    rec.estimate_converged = estimate_ok;
    rec.wall_time_s =
        std::chrono::duration<double>(Clock::now() - state.start).count();
    trace.records.push_back(std::move(rec));

    const StepOutcome out =
        check_halting(cfg, w, trace.records.back(), state);
    if (out == StepOutcome::Diverged) {
      trace.status = TerminalStatus::Diverged;
      trace.final_iterate = w;
      return trace;
    }
    if (out == StepOutcome::Converged) {
      trace.status = TerminalStatus::Converged;
      trace.final_iterate = w;
      return trace;
    }
    state.prev = w;
  }
  trace.status = TerminalStatus::MaxEpochs;
  trace.final_iterate = w;
  return trace;
}

RestrictedSolveResult restricted_minimize(const BlockObjective& obj,
                                          const AtomModel& model,
                                          const SupportSet& support,
                                          double grad_tolerance) {
  validate_support(model, support);
  if (support.empty())
    throw std::invalid_argument("solvers: restricted support is empty");

  // Orthonormal basis Q of span(D_support) in the ambient space; the
  // restricted gradient norm then equals the coordinate gradient norm.
  const int n = model.ambient_dim();
  Eigen::MatrixXd Q;
  switch (model.kind()) {
    case AtomKind::Coordinate: {
      Q = Eigen::MatrixXd::Zero(n, support.indices.size());
      for (std::size_t j = 0; j < support.indices.size(); ++j)
        Q(support.indices[j], j) = 1.0;
      break;
    }
    case AtomKind::FiniteDictionary: {
      Eigen::MatrixXd sub(n, support.indices.size());
      for (std::size_t j = 0; j < support.indices.size(); ++j)
        sub.col(j) = model.dictionary().col(support.indices[j]);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
      Q = qr.householderQ() *
          Eigen::MatrixXd::Identity(n, qr.rank());
      break;
    }
    case AtomKind::RankOne: {
      const auto& U = support.col_basis;
      const auto& V = support.row_basis;
      Q.resize(n, U.cols() * V.cols());
      const int n1 = model.mat_rows();
      for (int jv = 0; jv < V.cols(); ++jv)
        for (int ju = 0; ju < U.cols(); ++ju) {
          Eigen::MatrixXd atom = U.col(ju) * V.col(jv).transpose();
          Q.col(jv * U.cols() + ju) =
              Eigen::Map<Eigen::VectorXd>(atom.data(), atom.size());
        }
      (void)n1;
      break;
    }
  }

  const int r = static_cast<int>(Q.cols());
  const int M = obj.block_count();
  // Scale rows so the normal equations match grad F exactly.
  Eigen::MatrixXd AQ = obj.design() * Q;
  Eigen::VectorXd ys = obj.observations();
  for (int i = 0; i < M; ++i) {
    const double s = 1.0 / std::sqrt(static_cast<double>(M) *
                                     obj.block_rows(i));
    AQ.middleRows(obj.block_begin(i), obj.block_rows(i)) *= s;
    ys.segment(obj.block_begin(i), obj.block_rows(i)) *= s;
  }
  const Eigen::MatrixXd G = AQ.transpose() * AQ;
  const Eigen::VectorXd rhs = AQ.transpose() * ys;

  const double tol = grad_tolerance > 0.0
                         ? grad_tolerance
                         : 1e-12 * std::max(1.0, rhs.norm());
  const int max_iters = 10 * r;

  auto run_cg = [&](const Eigen::MatrixXd& mat, int budget,
                    Eigen::VectorXd& c) {
    c = Eigen::VectorXd::Zero(r);
    Eigen::VectorXd res = rhs;
    Eigen::VectorXd dir = res;
    double rho = res.squaredNorm();
    int it = 0;
    while (std::sqrt(rho) > tol && it < budget) {
      const Eigen::VectorXd md = mat * dir;
      const double denom = dir.dot(md);
      if (denom <= 0.0) break;  // lost positive definiteness
      const double step = rho / denom;
      c += step * dir;
      res -= step * md;
      const double rho_next = res.squaredNorm();
      dir = res + (rho_next / rho) * dir;
      rho = rho_next;
      ++it;
    }
    return std::pair<int, double>{it, std::sqrt(rho)};
  };

  Eigen::VectorXd c;
  auto [iters, res_norm] = run_cg(G, max_iters, c);
  if (res_norm > tol) {
    // Singular or near-singular restricted system: ridge and retry, keeping
    // whichever solution lands closer.
    const Eigen::VectorXd plain = c;
    const double plain_res = res_norm;
    const Eigen::MatrixXd ridged =
        G + 1e-10 * Eigen::MatrixXd::Identity(r, r);
    auto [it2, res2] = run_cg(ridged, max_iters, c);
    iters += it2;
    res_norm = (G * c - rhs).norm();
    if (res_norm > plain_res) {
      c = plain;
      res_norm = plain_res;
    }
    (void)res2;
  }

  RestrictedSolveResult out;
  out.point = Q * c;
  out.converged = res_norm <= tol;
  out.iterations = iters;
  return out;
}

}  // namespace stogreed
