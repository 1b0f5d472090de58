#pragma once

#include "sdig/error.hpp"
#include "sdig/graph.hpp"
#include "sdig/objectives.hpp"
#include "sdig/saga.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sdig {

enum class Algorithm { diging, sdiging, primal_dual };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm algorithm);

/// Stacked network state after k synchronous rounds.
///
/// `y` is the gradient tracker (DIGing, S-DIGing); `lambda` is the dual
/// variable (primal-dual form). `g` holds the gradients of round k: full
/// local gradients for DIGing, SAGA estimates otherwise.
struct NetworkState {
  AgentMatrix x;
  AgentMatrix y;
  AgentMatrix lambda;
  AgentMatrix g;
  long k = 0;
  /// Cumulative instantaneous-gradient evaluations, initialization included.
  long long grad_evals = 0;
};

/// x0 = 0, y0 = grad F(x0). Charges sum_i q_i evaluations.
NetworkState init_diging(const ProblemInstance& problem);

/// One SAGA table per agent, seeded at x0 = 0 with streams keyed by (seed, agent).
std::vector<GradientTable> init_tables(const ProblemInstance& problem, std::uint64_t seed,
                                       bool keep_points = true);

/// x0 = 0, g0 = y0 = table averages (the full local gradients at 0).
NetworkState init_sdiging(const ProblemInstance& problem, const std::vector<GradientTable>& tables);

/// x0 = 0, lambda0 = 0, g0 as for S-DIGing.
NetworkState init_primal_dual(const ProblemInstance& problem,
                              const std::vector<GradientTable>& tables);

/// x+ = Wx - alpha y;  y+ = Wy + grad F(x+) - grad F(x).
NetworkState diging_step(const NetworkState& s, const MixingMatrix& w,
                         const ProblemInstance& problem, double alpha);

/// x+ = Wx - alpha y;  g+ from SAGA at x+;  y+ = Wy + g+ - g.
NetworkState sdiging_step(const NetworkState& s, const MixingMatrix& w,
                          std::vector<GradientTable>& tables, const ProblemInstance& problem,
                          double alpha);

/// x+ = W^2 x - alpha g - L lambda;  lambda+ = lambda + L x+;  g+ from SAGA at x+.
NetworkState primal_dual_step(const NetworkState& s, const MixingMatrix& w,
                              std::vector<GradientTable>& tables, const ProblemInstance& problem,
                              double alpha);

/// ||1'y - 1'g||_inf; zero up to rounding for DIGing and S-DIGing states.
double tracking_defect(const NetworkState& s);

struct TraceRow {
  long round = 0;
  double residual_log10 = 0.0;  // NaN when no reference is available
  double objective = 0.0;       // aggregate objective at the network mean
  double consensus_gap = 0.0;
  long long grad_evals = 0;
  double wall_ms = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  bool has_residual = false;
  bool reached_target = false;
  long rounds_completed = 0;
  AgentMatrix final_x;
  /// Largest tracking defect seen when tracking checks are enabled.
  double max_tracking_defect = 0.0;
};

/// Trace CSV. With a reference the header is
/// `round,residual_log10,consensus_gap,grad_evals,wall_ms`; without one the
/// residual column is replaced by `objective`.
void write_trace_csv(std::ostream& out, const RunTrace& trace);

struct RunOptions {
  Algorithm algorithm = Algorithm::sdiging;
  double alpha = 0.0;
  long rounds = 0;
  std::uint64_t seed = 0;
  long record_every = 0;  // 0: max(1, rounds / 2000)
  std::optional<Vec> reference;  // falls back to problem.known_optimum
  bool require_residual = true;
  bool check_tracking = false;
  bool keep_points = false;
  double divergence_threshold = 1e12;
  /// Stop as soon as the residual reaches this value (recorded every round).
  std::optional<double> stop_at_residual;
};

/// Thrown when ||x_k|| exceeds the divergence threshold or turns non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, RunTrace partial)
      : Error(ErrorCode::divergence, message), partial_(std::move(partial)) {}
  const RunTrace& partial() const { return partial_; }

 private:
  RunTrace partial_;
};

RunTrace run(const ProblemInstance& problem, const MixingMatrix& w, const RunOptions& options);

}  // namespace sdig
