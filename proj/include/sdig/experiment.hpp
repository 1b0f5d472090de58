#pragma once

#include "sdig/certificate.hpp"
#include "sdig/engine.hpp"
#include "sdig/graph.hpp"
#include "sdig/harness.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace sdig {

/// Fully resolved experiment description. Every field has a default; see
/// write_config for the key names of the text format.
struct ExperimentConfig {
  struct ProblemSection {
    ProblemFamily family = ProblemFamily::logistic;
    int q = 30;
    int n = 4;
    std::uint64_t seed = 1;
    double lambda = 1.0;         // logistic
    double mu = 1.0;             // quadratic spectrum floor
    double lip = 10.0;           // quadratic spectrum ceiling
    double strength = 100.0;     // localization source strength a
    std::optional<double> sigma; // localization noise; defaults to 0.05 a
    double theta = 2.0;          // localization attenuation exponent
    double field = 100.0;        // localization square side
    int clusters = 3;            // kmeans K
    std::string data_csv;        // logistic samples or kmeans points
    std::string sensors_csv;     // localization sensor positions
  } problem;

  struct TopologySection {
    TopologyKind kind = TopologyKind::random_gnp;
    int m = 20;
    double p = 0.4;
    std::uint64_t seed = 1;
    double laziness = 0.1;
    std::string edge_list;  // overrides kind/p when set
  } topology;

  struct AlgorithmSection {
    Algorithm name = Algorithm::sdiging;
    std::optional<double> alpha;  // empty = from the certificate
    long rounds = 10000;
    std::uint64_t seed = 1;
    long record_every = 0;
    std::optional<double> phi;
    double gamma = 0.5;
    double d = 2.0;
    double e = 2.0;
    double delta_fraction = 0.5;
    double epsilon = 1e-6;
    bool check_tracking = false;
  } algorithm;

  struct OutputSection {
    std::string dir = ".";
    std::string name = "trace";
  } output;

  double sigma() const { return problem.sigma.value_or(0.05 * problem.strength); }
};

/// Parses the sectioned key-value format. Unknown sections or keys, bad
/// values and duplicate keys raise configuration_error. Relative data paths
/// resolve against `base_dir`.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const ExperimentConfig& config);

/// Instance plus whatever the generator knows beyond the objective.
struct BuiltProblem {
  ProblemInstance problem;
  std::optional<Eigen::Vector2d> true_source;  // localization
  int clamp_events = 0;
};

BuiltProblem build_problem(const ExperimentConfig& config);
Topology build_topology(const ExperimentConfig& config);
MixingMatrix build_mixing(const ExperimentConfig& config, const Topology& topology);
RateCertificate certify(const ExperimentConfig& config, const ProblemInstance& problem,
                        const MixingMatrix& w);

}  // namespace sdig
