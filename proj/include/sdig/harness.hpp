#pragma once

#include "sdig/metrics.hpp"
#include "sdig/objectives.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace sdig {

/// Two Gaussian classes, q/2 samples each per agent: label +1 around
/// (2,...,2,-2,...,-2), label -1 around the negation, covariance 2I.
ProblemInstance gaussian_logistic_instance(int m, int q, int n, std::uint64_t seed,
                                           double lambda = 1.0);

/// Splits labeled samples into contiguous blocks: agent i gets rows [i*q, (i+1)*q).
ProblemInstance logistic_from_samples(const std::vector<LabeledSample>& samples, int m,
                                      double lambda, const std::string& fingerprint);

struct LocalizationSpec {
  int m = 50;
  int q = 100;
  double field = 100.0;  // side of the square the sensors and source live in
  double strength = 100.0;
  double sigma = 5.0;
  double theta = 2.0;
  std::uint64_t seed = 0;
};

struct LocalizationInstance {
  ProblemInstance problem;
  Eigen::Vector2d source;
  std::vector<Eigen::Vector2d> sensors;
  int clamp_events = 0;
};

/// Sensors are resampled until each is farther than 1 from the source.
/// `sensors` overrides the random placement when non-empty.
LocalizationInstance localization_instance(const LocalizationSpec& spec,
                                           const std::vector<Eigen::Vector2d>& sensors = {});

/// Isotropic Gaussian blobs, `per_cluster` points around each mean,
/// emitted cluster by cluster and then shuffled.
std::vector<Vec> gaussian_blobs(const std::vector<Vec>& means, int per_cluster, double stddev,
                                std::uint64_t seed);

/// Agent i receives points [i*q, (i+1)*q); decision variable is K stacked centers.
ProblemInstance kmeans_instance(const std::vector<Vec>& points, int m, int q, int clusters);

struct ReferenceOptions {
  double tolerance = 1e-10;
  long long max_oracle_calls = 1'000'000;
  int restarts = 5;  // K-means only
  std::uint64_t seed = 0;
  std::optional<Vec> start;  // convex families; defaults to the origin
};

struct ReferenceResult {
  Vec x;
  double grad_norm = 0.0;  // of (1/m) sum_i grad f_i
  double objective = 0.0;  // sum_i f_i
  long long oracle_calls = 0;
  /// False for K-means, whose landscape is non-convex.
  bool certified = true;
};

/// Centralized minimizer of sum_i f_i. Convex families use accelerated
/// gradient descent with backtracking and adaptive restart; K-means uses
/// best-of multi-restart Lloyd iterations. Throws reference_failure when the
/// oracle budget runs out before the gradient tolerance is met.
ReferenceResult reference_solution(const ProblemInstance& problem, const ReferenceOptions& options = {});

/// Memoizes reference solutions by problem fingerprint.
class ReferenceCache {
 public:
  const ReferenceResult& get(const ProblemInstance& problem, const ReferenceOptions& options = {});
  bool contains(const std::string& fingerprint) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, ReferenceResult> entries_;
};

}  // namespace sdig
