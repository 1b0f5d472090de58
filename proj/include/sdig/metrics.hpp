#pragma once

#include "sdig/objectives.hpp"

namespace sdig {

/// Value reported when every agent sits exactly on the reference.
inline constexpr double kResidualFloor = -16.0;

/// log10((1/m) sum_i ||x_i - x*||), floored at kResidualFloor.
double residual(const AgentMatrix& x, const ConstVecRef& reference);

/// max_i ||x_i - mean_j x_j||.
double consensus_gap(const AgentMatrix& x);

/// Row average of the stacked iterates.
Vec network_mean(const AgentMatrix& x);

}  // namespace sdig
