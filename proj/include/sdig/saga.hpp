#pragma once

#include "sdig/objectives.hpp"
#include "sdig/rng.hpp"

#include <cstdint>
#include <iosfwd>

namespace sdig {

/// Per-agent SAGA memory: the last gradient evaluated for every component,
/// their running sum, and the agent's index stream.
///
/// Indices are 0-based. A table is single-owner; it must not be mutated from
/// two threads at once, but distinct tables are independent.
class GradientTable {
 public:
  /// Every slot holds grad f^h(x0); points are kept unless `keep_points` is false.
  static GradientTable init(const LocalObjective& lo, const ConstVecRef& x0,
                            std::uint64_t seed, int agent_id = 0, bool keep_points = true);

  /// Uniform draw from {0, ..., q-1}; advances the stream by one draw.
  int draw_index();

  /// g = grad f^idx(x) - stored[idx] + sum/q, then overwrites slot idx with
  /// grad f^idx(x) and folds the change into the running sum.
  void stochastic_avg_gradient(const LocalObjective& lo, const ConstVecRef& x, int idx,
                               VecRef g);
  Vec stochastic_avg_gradient(const LocalObjective& lo, const ConstVecRef& x, int idx);

  int agent_id() const { return agent_id_; }
  int q() const { return static_cast<int>(grads_.rows()); }
  int dim() const { return static_cast<int>(grads_.cols()); }
  const AgentMatrix& stored_grads() const { return grads_; }
  const Vec& grad_sum() const { return sum_; }
  bool keeps_points() const { return points_.size() > 0; }
  /// Empty in memory-lean mode.
  const AgentMatrix& stored_points() const { return points_; }
  const CounterStream& stream() const { return stream_; }

  /// Sum of stored gradients recomputed from scratch (for integrity checks).
  Vec direct_sum() const { return grads_.colwise().sum().transpose(); }
  /// Mean of the stored gradients, i.e. the table's full-gradient estimate.
  Vec table_average() const { return sum_ / q(); }

  /// Versioned CSV checkpoint: agent id, q, n, stream key and counter,
  /// stored gradients, running sum, and (optionally) stored points.
  void dump(std::ostream& out) const;
  static GradientTable restore(std::istream& in);

 private:
  GradientTable() = default;

  int agent_id_ = 0;
  AgentMatrix grads_;
  AgentMatrix points_;
  Vec sum_;
  Vec fresh_;
  CounterStream stream_;
};

}  // namespace sdig
