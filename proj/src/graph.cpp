#include "sdig/graph.hpp"

#include "sdig/error.hpp"
#include "sdig/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace sdig {

namespace {

constexpr int kMaxConnectivityRetries = 1000;
constexpr double kStochasticTol = 1e-12;

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<int> parent_;
};

double unit_double(CounterStream& s) {
  return static_cast<double>(s.next() >> 11) * 0x1.0p-53;
}

Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::construction_failure, "eigenvalue computation did not converge");
  }
  return solver.eigenvalues();  // ascending
}

}  // namespace

TopologyKind parse_topology_kind(const std::string& name) {
  if (name == "ring") return TopologyKind::ring;
  if (name == "complete") return TopologyKind::complete;
  if (name == "random_gnp" || name == "gnp") return TopologyKind::random_gnp;
  fail(ErrorCode::invalid_argument, "unknown topology kind '" + name + "'");
}

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::ring: return "ring";
    case TopologyKind::complete: return "complete";
    case TopologyKind::random_gnp: return "random_gnp";
  }
  return "?";
}

std::vector<int> Topology::degrees() const {
  std::vector<int> deg(m, 0);
  for (auto [i, j] : edges) {
    ++deg[i];
    ++deg[j];
  }
  return deg;
}

bool Topology::connected() const {
  if (m <= 0) return false;
  UnionFind uf(m);
  int components = m;
  for (auto [i, j] : edges) {
    if (uf.unite(i, j)) --components;
  }
  return components == 1;
}

Topology topology_from_edges(int m, std::vector<std::pair<int, int>> edges) {
  require(m >= 1, "agent count must be positive");
  for (auto& [i, j] : edges) {
    require(i >= 0 && i < m && j >= 0 && j < m, "edge endpoint out of range");
    require(i != j, "self-loops are not allowed in a topology");
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Topology t;
  t.m = m;
  t.edges = std::move(edges);
  return t;
}

Topology build_topology(TopologyKind kind, int m, double p, std::uint64_t seed) {
  require(m >= 2, "topology needs at least 2 agents");
  std::vector<std::pair<int, int>> edges;
  switch (kind) {
    case TopologyKind::ring:
      for (int i = 0; i < m; ++i) edges.emplace_back(i, (i + 1) % m);
      return topology_from_edges(m, std::move(edges));
    case TopologyKind::complete:
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) edges.emplace_back(i, j);
      return topology_from_edges(m, std::move(edges));
    case TopologyKind::random_gnp:
      break;
  }

  require(p > 0.0 && p <= 1.0, "edge probability must lie in (0, 1]");
  for (int attempt = 0; attempt < kMaxConnectivityRetries; ++attempt) {
    CounterStream stream(seed, static_cast<std::uint64_t>(attempt));
    edges.clear();
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (unit_double(stream) < p) edges.emplace_back(i, j);
    Topology t = topology_from_edges(m, edges);
    if (t.connected()) {
      t.retries = attempt;
      return t;
    }
  }
  std::ostringstream msg;
  msg << "G(" << m << ", " << p << ") produced no connected graph in "
      << kMaxConnectivityRetries << " attempts";
  fail(ErrorCode::construction_failure, msg.str());
}

void write_edge_list(std::ostream& out, const Topology& t) {
  out << t.m << '\n';
  for (auto [i, j] : t.edges) out << (i + 1) << ' ' << (j + 1) << '\n';
}

Topology read_edge_list(std::istream& in) {
  int m = 0;
  if (!(in >> m)) fail(ErrorCode::invalid_argument, "edge list: missing agent count");
  std::vector<std::pair<int, int>> edges;
  int i = 0, j = 0;
  while (in >> i >> j) edges.emplace_back(i - 1, j - 1);
  if (!in.eof()) fail(ErrorCode::invalid_argument, "edge list: malformed edge line");
  return topology_from_edges(m, std::move(edges));
}

MixingMatrix MixingMatrix::from_dense(const Eigen::MatrixXd& w, double laziness) {
  require(w.rows() == w.cols() && w.rows() >= 1, "mixing matrix must be square");
  const Eigen::Index m = w.rows();
  require((w - w.transpose()).cwiseAbs().maxCoeff() <= kStochasticTol,
          "mixing matrix must be symmetric");
  const Eigen::VectorXd row_defect = w.rowwise().sum().array() - 1.0;
  const Eigen::VectorXd col_defect = w.colwise().sum().transpose().array() - 1.0;
  require(row_defect.cwiseAbs().maxCoeff() < kStochasticTol &&
              col_defect.cwiseAbs().maxCoeff() < kStochasticTol,
          "mixing matrix must be doubly stochastic");
  for (Eigen::Index i = 0; i < m; ++i) {
    require(w(i, i) > 0.0, "mixing matrix needs positive self-weights");
    for (Eigen::Index j = 0; j < m; ++j) require(w(i, j) >= 0.0, "mixing weights must be nonnegative");
  }
  return MixingMatrix(w, sorted_eigenvalues(w), laziness);
}

Eigen::MatrixXd metropolis_raw(const Topology& t) {
  require(t.connected(), "metropolis weights need a connected topology");
  const auto deg = t.degrees();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(t.m, t.m);
  for (auto [i, j] : t.edges) {
    const double wij = 1.0 / (1.0 + std::max(deg[i], deg[j]));
    w(i, j) = wij;
    w(j, i) = wij;
  }
  for (int i = 0; i < t.m; ++i) w(i, i) = 1.0 - w.row(i).sum();
  return w;
}

MixingMatrix metropolis_weights(const Topology& t, double laziness, bool auto_lazify) {
  require(laziness >= 0.0 && laziness < 1.0, "laziness must lie in [0, 1)");
  const Eigen::MatrixXd raw = metropolis_raw(t);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(t.m, t.m);
  auto blend = [&](double lz) -> Eigen::MatrixXd { return lz * id + (1.0 - lz) * raw; };

  Eigen::MatrixXd w = blend(laziness);
  Eigen::VectorXd eig = sorted_eigenvalues(w);
  if (auto_lazify && eig(0) <= 0.0) {
    bool fixed = false;
    for (int step = 1; step <= 5 && !fixed; ++step) {
      const double lz = 0.1 * step;
      if (lz <= laziness) continue;
      w = blend(lz);
      eig = sorted_eigenvalues(w);
      if (eig(0) > 0.0) {
        laziness = lz;
        fixed = true;
      }
    }
    if (!fixed) fail(ErrorCode::construction_failure, "could not make mixing spectrum positive");
  }
  // Symmetrize exactly and rebalance the diagonal so rows sum to one to rounding.
  w = 0.5 * (w + w.transpose());
  for (int i = 0; i < t.m; ++i) w(i, i) = 1.0 - (w.row(i).sum() - w(i, i));
  return MixingMatrix::from_dense(w, laziness);
}

void write_matrix_csv(std::ostream& out, const MixingMatrix& w) {
  const auto& mat = w.w();
  const auto old = out.precision(17);
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      if (j) out << ',';
      out << mat(i, j);
    }
    out << '\n';
  }
  out.precision(old);
}

LaplacianLike spectral_quantities(const MixingMatrix& w) {
  const int m = w.size();
  LaplacianLike out;
  out.l = Eigen::MatrixXd::Identity(m, m) - w.w();
  // eig(I - W) = 1 - eig(W), reversed to stay ascending.
  out.eig_l = (1.0 - w.eigenvalues().array()).reverse();
  if (m == 1) {
    out.rho2_l2 = 0.0;
    return out;
  }
  const double scale = std::max(1.0, out.eig_l.cwiseAbs().maxCoeff());
  const double zero_tol = 1e-9 * scale;
  int zeros = 0;
  for (Eigen::Index i = 0; i < out.eig_l.size(); ++i)
    if (std::abs(out.eig_l(i)) <= zero_tol) ++zeros;
  require(zeros == 1, "mixing matrix must come from a connected graph (one zero Laplacian eigenvalue)");
  out.rho2_l2 = out.eig_l(1) * out.eig_l(1);
  return out;
}

}  // namespace sdig
