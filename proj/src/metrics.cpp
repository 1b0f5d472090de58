#include "sdig/metrics.hpp"

#include "sdig/error.hpp"

#include <algorithm>
#include <cmath>

namespace sdig {

double residual(const AgentMatrix& x, const ConstVecRef& reference) {
  require(x.cols() == reference.size(), "residual: dimension mismatch");
  require(x.rows() >= 1, "residual: no agents");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) sum += (x.row(i).transpose() - reference).norm();
  const double mean = sum / static_cast<double>(x.rows());
  if (!(mean > 0.0)) return std::isnan(mean) ? mean : kResidualFloor;
  return std::max(std::log10(mean), kResidualFloor);
}

Vec network_mean(const AgentMatrix& x) { return x.colwise().mean().transpose(); }

double consensus_gap(const AgentMatrix& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  double gap = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) gap = std::max(gap, (x.row(i) - mean).norm());
  return gap;
}

}  // namespace sdig
