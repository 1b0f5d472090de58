#pragma once

#include "sdig/graph.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace sdig {

/// Problem constants the linear-rate certificate depends on.
struct ProblemConstants {
  double mu = 0.0;   // strong convexity of every component
  double lip = 0.0;  // gradient Lipschitz constant of every component
  int q_min = 1;
  int q_max = 1;
};

/// Free parameters of the certificate. Defaults: phi = mu, gamma = 1/2, d = e = 2.
struct CertificateChoices {
  std::optional<double> phi;  // in (0, 2 mu)
  double gamma = 0.5;         // in (0, 1)
  double d = 2.0;             // > 1
  double e = 2.0;             // > 1
  /// Chosen rate as a fraction of Theta, in (0, 1).
  double delta_fraction = 0.5;
};

struct RateCertificate {
  ProblemConstants constants;
  double phi = 0.0;
  double gamma = 0.0;
  double d = 0.0;
  double e = 0.0;
  double rho_min_w = 0.0;
  double rho2_l2 = 0.0;
  double lambda_max_q = 0.0;

  double eta_lower = 0.0;  // eta must exceed this
  double eta = 0.0;
  double alpha_max = 0.0;
  double alpha = 0.0;
  double c_lower = 0.0;
  double c_upper = 0.0;
  double c = 0.0;
  double theta_consensus = 0.0;  // first term of the minimum
  double theta_descent = 0.0;    // second term
  double theta_variance = 0.0;   // third term
  double theta = 0.0;
  double delta = 0.0;

  bool valid = false;
  std::string reason;
};

/// Right endpoint of the admissible step-size interval (0, alpha_max):
/// rho_min(W)^2 / (eta + lip^2 / phi).
/// Throws certification_refused when mu <= 0.
double step_size_upper_bound(const MixingMatrix& w, double mu, double lip, double phi, double eta);

/// Builds the full certificate. eta is 1.05x its lower endpoint, c the
/// geometric mean of its interval, alpha defaults to alpha_max / 2 and
/// delta to delta_fraction * Theta. Interval emptiness and out-of-range
/// inputs yield valid == false with a reason; nothing here throws for them.
RateCertificate rate_certificate(const MixingMatrix& w, const ProblemConstants& constants,
                                 const CertificateChoices& choices = {},
                                 std::optional<double> alpha = std::nullopt);

/// Rounds needed for ||x_k - x*||^2 <= epsilon from ||x_0 - x*||^2 = kappa at
/// rate delta: ceil((1 + 1/delta) ln(kappa / epsilon)), and 0 when kappa <= epsilon.
long long iterations_to_accuracy(double delta, double kappa, double epsilon);
long long iterations_to_accuracy(const RateCertificate& cert, double kappa, double epsilon);

/// Uncertified comparison figure for DIGing: (1 + 1/Xi) ln(kappa/epsilon) with
/// Xi = alpha mu / (1.5 - alpha mu). Reported for reference only.
double diging_iteration_estimate(double alpha, double mu, double kappa, double epsilon);

/// Key-value text, one `key = value` line per field.
void write_certificate(std::ostream& out, const RateCertificate& cert);

}  // namespace sdig
