#include "sdig/engine.hpp"

#include "sdig/metrics.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace sdig {

namespace {

void check_shapes(const NetworkState& s, const MixingMatrix& w, const ProblemInstance& problem) {
  require(w.size() == problem.agents(), "mixing matrix size does not match agent count");
  require(s.x.rows() == problem.agents() && s.x.cols() == problem.dim,
          "network state does not match problem dimensions");
}

void check_tables(const std::vector<GradientTable>& tables, const ProblemInstance& problem) {
  require(static_cast<int>(tables.size()) == problem.agents(), "need one gradient table per agent");
  for (int i = 0; i < problem.agents(); ++i) {
    require(tables[i].q() == problem.locals[i].q() && tables[i].dim() == problem.dim,
            "gradient table does not match agent objective");
  }
}

AgentMatrix stacked_full_gradients(const ProblemInstance& problem, const AgentMatrix& x) {
  AgentMatrix g(x.rows(), x.cols());
  for (int i = 0; i < problem.agents(); ++i)
    g.row(i) = full_local_gradient(problem.locals[i], x.row(i).transpose()).transpose();
  return g;
}

// Each agent draws its index and evaluates its SAGA estimate at its own row.
AgentMatrix stacked_saga_gradients(const ProblemInstance& problem,
                                   std::vector<GradientTable>& tables, const AgentMatrix& x) {
  AgentMatrix g(x.rows(), x.cols());
  Vec gi(x.cols());
  for (int i = 0; i < problem.agents(); ++i) {
    const int idx = tables[i].draw_index();
    tables[i].stochastic_avg_gradient(problem.locals[i], x.row(i).transpose(), idx, gi);
    g.row(i) = gi.transpose();
  }
  return g;
}

}  // namespace

Algorithm parse_algorithm(const std::string& name) {
  if (name == "diging") return Algorithm::diging;
  if (name == "sdiging") return Algorithm::sdiging;
  if (name == "primal_dual") return Algorithm::primal_dual;
  fail(ErrorCode::invalid_argument, "unknown algorithm '" + name + "'");
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::diging: return "diging";
    case Algorithm::sdiging: return "sdiging";
    case Algorithm::primal_dual: return "primal_dual";
  }
  return "?";
}

NetworkState init_diging(const ProblemInstance& problem) {
  NetworkState s;
  s.x = AgentMatrix::Zero(problem.agents(), problem.dim);
  s.g = stacked_full_gradients(problem, s.x);
  s.y = s.g;
  s.grad_evals = problem.total_components();
  return s;
}

std::vector<GradientTable> init_tables(const ProblemInstance& problem, std::uint64_t seed,
                                       bool keep_points) {
  std::vector<GradientTable> tables;
  tables.reserve(problem.agents());
  const Vec x0 = Vec::Zero(problem.dim);
  for (int i = 0; i < problem.agents(); ++i)
    tables.push_back(GradientTable::init(problem.locals[i], x0, seed, i, keep_points));
  return tables;
}

NetworkState init_sdiging(const ProblemInstance& problem, const std::vector<GradientTable>& tables) {
  check_tables(tables, problem);
  NetworkState s;
  s.x = AgentMatrix::Zero(problem.agents(), problem.dim);
  s.g.resize(problem.agents(), problem.dim);
  for (int i = 0; i < problem.agents(); ++i) s.g.row(i) = tables[i].table_average().transpose();
  s.y = s.g;
  s.grad_evals = problem.total_components();
  return s;
}

NetworkState init_primal_dual(const ProblemInstance& problem,
                              const std::vector<GradientTable>& tables) {
  NetworkState s = init_sdiging(problem, tables);
  s.lambda = AgentMatrix::Zero(problem.agents(), problem.dim);
  s.y.resize(0, 0);
  return s;
}

NetworkState diging_step(const NetworkState& s, const MixingMatrix& w,
                         const ProblemInstance& problem, double alpha) {
  check_shapes(s, w, problem);
  require(s.y.rows() == s.x.rows() && s.y.cols() == s.x.cols(), "diging_step: state has no tracker");
  NetworkState next;
  next.x = w.w() * s.x - alpha * s.y;
  next.g = stacked_full_gradients(problem, next.x);
  next.y = w.w() * s.y + next.g - s.g;
  next.k = s.k + 1;
  next.grad_evals = s.grad_evals + problem.total_components();
  return next;
}

NetworkState sdiging_step(const NetworkState& s, const MixingMatrix& w,
                          std::vector<GradientTable>& tables, const ProblemInstance& problem,
                          double alpha) {
  check_shapes(s, w, problem);
  check_tables(tables, problem);
  require(s.y.rows() == s.x.rows() && s.y.cols() == s.x.cols(), "sdiging_step: state has no tracker");
  NetworkState next;
  next.x = w.w() * s.x - alpha * s.y;
  next.g = stacked_saga_gradients(problem, tables, next.x);
  next.y = w.w() * s.y + next.g - s.g;
  next.k = s.k + 1;
  next.grad_evals = s.grad_evals + problem.agents();
  return next;
}

NetworkState primal_dual_step(const NetworkState& s, const MixingMatrix& w,
                              std::vector<GradientTable>& tables, const ProblemInstance& problem,
                              double alpha) {
  check_shapes(s, w, problem);
  check_tables(tables, problem);
  require(s.lambda.rows() == s.x.rows() && s.lambda.cols() == s.x.cols(),
          "primal_dual_step: state has no dual variable");
  const auto& wm = w.w();
  NetworkState next;
  // L = I - W
  const AgentMatrix l_lambda = s.lambda - wm * s.lambda;
  next.x = wm * (wm * s.x) - alpha * s.g - l_lambda;
  next.lambda = s.lambda + (next.x - wm * next.x);
  next.g = stacked_saga_gradients(problem, tables, next.x);
  next.k = s.k + 1;
  next.grad_evals = s.grad_evals + problem.agents();
  return next;
}

double tracking_defect(const NetworkState& s) {
  require(s.y.rows() == s.g.rows() && s.y.cols() == s.g.cols(), "tracking_defect: state has no tracker");
  return (s.y.colwise().sum() - s.g.colwise().sum()).cwiseAbs().maxCoeff();
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "round," << (trace.has_residual ? "residual_log10" : "objective")
      << ",consensus_gap,grad_evals,wall_ms\n";
  const auto old = out.precision(17);
  for (const auto& r : trace.rows) {
    out << r.round << ',' << (trace.has_residual ? r.residual_log10 : r.objective) << ','
        << r.consensus_gap << ',' << r.grad_evals << ',' << r.wall_ms << '\n';
  }
  out.precision(old);
}

RunTrace run(const ProblemInstance& problem, const MixingMatrix& w, const RunOptions& options) {
  require(options.rounds >= 1, "run: rounds must be >= 1");
  require(options.alpha > 0.0 && std::isfinite(options.alpha), "run: step-size must be positive");
  require(w.size() == problem.agents(), "run: mixing matrix size does not match agent count");

  std::optional<Vec> reference = options.reference ? options.reference : problem.known_optimum;
  if (reference) require(reference->size() == problem.dim, "run: reference has wrong dimension");
  if (!reference && (options.require_residual || options.stop_at_residual)) {
    fail(ErrorCode::configuration_error, "residual requested but no reference optimum is available");
  }

  const long record_every = options.record_every > 0
                                ? options.record_every
                                : std::max(1L, options.rounds / 2000);
  const bool track = options.algorithm != Algorithm::primal_dual;

  std::vector<GradientTable> tables;
  NetworkState state;
  switch (options.algorithm) {
    case Algorithm::diging:
      state = init_diging(problem);
      break;
    case Algorithm::sdiging:
      tables = init_tables(problem, options.seed, options.keep_points);
      state = init_sdiging(problem, tables);
      break;
    case Algorithm::primal_dual:
      tables = init_tables(problem, options.seed, options.keep_points);
      state = init_primal_dual(problem, tables);
      break;
  }

  RunTrace trace;
  trace.has_residual = reference.has_value();
  const auto start = std::chrono::steady_clock::now();

  auto record = [&](const NetworkState& s) -> double {
    TraceRow row;
    row.round = s.k;
    row.residual_log10 = reference ? residual(s.x, *reference)
                                   : std::numeric_limits<double>::quiet_NaN();
    row.objective = aggregate_objective(problem, network_mean(s.x));
    row.consensus_gap = consensus_gap(s.x);
    row.grad_evals = s.grad_evals;
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    trace.rows.push_back(row);
    return row.residual_log10;
  };

  auto check_tracking = [&](const NetworkState& s) {
    if (!options.check_tracking || !track) return;
    const double defect = tracking_defect(s);
    trace.max_tracking_defect = std::max(trace.max_tracking_defect, defect);
    const double scale = 1.0 + s.g.cwiseAbs().colwise().sum().maxCoeff();
    if (defect > 1e-10 * problem.agents() * scale) {
      std::ostringstream msg;
      msg << "tracking identity violated at round " << s.k << " (defect " << defect << ")";
      fail(ErrorCode::invalid_argument, msg.str());
    }
  };

  record(state);
  check_tracking(state);
  for (long round = 1; round <= options.rounds; ++round) {
    switch (options.algorithm) {
      case Algorithm::diging: state = diging_step(state, w, problem, options.alpha); break;
      case Algorithm::sdiging: state = sdiging_step(state, w, tables, problem, options.alpha); break;
      case Algorithm::primal_dual:
        state = primal_dual_step(state, w, tables, problem, options.alpha);
        break;
    }
    check_tracking(state);
    trace.rounds_completed = round;

    const double norm = state.x.norm();
    if (!std::isfinite(norm) || norm > options.divergence_threshold) {
      record(state);
      trace.final_x = state.x;
      std::ostringstream msg;
      msg << "iterates diverged at round " << round << " (||x|| = " << norm
          << "); step-size too large";
      throw DivergenceError(msg.str(), std::move(trace));
    }

    const bool at_cadence = round % record_every == 0 || round == options.rounds;
    if (options.stop_at_residual) {
      const double res = residual(state.x, *reference);
      if (res <= *options.stop_at_residual) {
        record(state);
        trace.reached_target = true;
        break;
      }
    }
    if (at_cadence) record(state);
  }
  trace.final_x = state.x;
  return trace;
}

}  // namespace sdig
