#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace sdig {

enum class TopologyKind { ring, complete, random_gnp };

TopologyKind parse_topology_kind(const std::string& name);
std::string to_string(TopologyKind kind);

/// Undirected connected graph over agents 0..m-1. Edges are stored once with
/// first < second, sorted. Self-loops are never stored.
struct Topology {
  int m = 0;
  std::vector<std::pair<int, int>> edges;
  int retries = 0;  // rejected G(m,p) draws before a connected one

  std::vector<int> degrees() const;
  bool connected() const;
};

Topology build_topology(TopologyKind kind, int m, double p, std::uint64_t seed);

/// Builds a topology from an explicit edge list (0-based). Duplicates and
/// orientation are normalized; self-loops and out-of-range ids are rejected.
Topology topology_from_edges(int m, std::vector<std::pair<int, int>> edges);

/// Edge-list text format: first line `m`, then one `i j` line per edge (1-based).
void write_edge_list(std::ostream& out, const Topology& t);
Topology read_edge_list(std::istream& in);

/// Symmetric doubly stochastic weight matrix with positive self-weights.
/// Eigenvalues are computed once and cached in ascending order.
class MixingMatrix {
 public:
  /// Validates symmetry, double stochasticity and positive diagonal.
  static MixingMatrix from_dense(const Eigen::MatrixXd& w, double laziness = 0.0);

  const Eigen::MatrixXd& w() const { return w_; }
  int size() const { return static_cast<int>(w_.rows()); }
  const Eigen::VectorXd& eigenvalues() const { return eig_; }
  double rho_min() const { return eig_(0); }
  double rho_max() const { return eig_(eig_.size() - 1); }
  /// Laziness actually applied (may exceed the requested value).
  double laziness() const { return laziness_; }

 private:
  MixingMatrix(Eigen::MatrixXd w, Eigen::VectorXd eig, double laziness)
      : w_(std::move(w)), eig_(std::move(eig)), laziness_(laziness) {}

  Eigen::MatrixXd w_;
  Eigen::VectorXd eig_;
  double laziness_ = 0.0;
};

/// Raw Metropolis-Hastings weights w_ij = 1/(1+max(deg_i,deg_j)), no blending.
Eigen::MatrixXd metropolis_raw(const Topology& t);

/// Metropolis weights blended with the identity: W = laziness*I + (1-laziness)*W_raw.
/// With auto_lazify, laziness is raised to the smallest of {0.1,...,0.5} that
/// makes every eigenvalue strictly positive.
MixingMatrix metropolis_weights(const Topology& t, double laziness = 0.1,
                                bool auto_lazify = true);

void write_matrix_csv(std::ostream& out, const MixingMatrix& w);

/// L = I - W and the smallest nonzero eigenvalue of L^2.
struct LaplacianLike {
  Eigen::MatrixXd l;
  Eigen::VectorXd eig_l;  // ascending
  double rho2_l2 = 0.0;
};

LaplacianLike spectral_quantities(const MixingMatrix& w);

}  // namespace sdig
