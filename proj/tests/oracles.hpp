#pragma once

// Test-only reference computations. Nothing here calls into the library's
// numerical paths, so agreement with the library is an independent check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

/// Cyclic Jacobi rotations on a symmetric matrix; returns ascending eigenvalues.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a, int sweeps = 100) {
  const Eigen::Index n = a.rows();
  for (int s = 0; s < sweeps; ++s) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (Eigen::Index i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

/// Central-difference gradient with step h = rel_step * (1 + ||x||).
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double rel_step = 1e-6) {
  const double h = rel_step * (1.0 + x.norm());
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    g(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// BFS connectivity of an undirected edge list over m nodes.
inline bool connected(int m, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(m);
  for (auto [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<char> seen(m, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : adj[v])
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        stack.push_back(u);
      }
  }
  return count == m;
}

/// Mean and standard error of the edge count of G(m,p) conditioned on
/// connectivity, by plain rejection sampling with its own generator.
inline std::pair<double, double> conditional_gnp_edge_mean(int m, double p, int accepted,
                                                            std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution coin(p);
  double sum = 0.0, sum_sq = 0.0;
  int got = 0;
  while (got < accepted) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (coin(gen)) edges.emplace_back(i, j);
    if (!connected(m, edges)) continue;
    const double e = static_cast<double>(edges.size());
    sum += e;
    sum_sq += e * e;
    ++got;
  }
  const double mean = sum / got;
  const double var = sum_sq / got - mean * mean;
  return {mean, std::sqrt(var / got)};
}

inline Eigen::VectorXd random_vector(std::mt19937_64& gen, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index j = 0; j < n; ++j) v(j) = normal(gen);
  return v;
}

}  // namespace oracle
