#include "sdig/certificate.hpp"

#include "sdig/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace sdig {

namespace {

RateCertificate refuse(RateCertificate cert, std::string reason) {
  cert.valid = false;
  cert.reason = std::move(reason);
  return cert;
}

}  // namespace

double step_size_upper_bound(const MixingMatrix& w, double mu, double lip, double phi, double eta) {
  if (!(mu > 0.0)) {
    fail(ErrorCode::certification_refused, "strong convexity assumption violated (mu <= 0)");
  }
  require(phi > 0.0 && phi < 2.0 * mu, "phi must lie in (0, 2 mu)");
  require(eta > 0.0, "eta must be positive");
  require(lip > 0.0, "lip must be positive");
  const double rho = w.rho_min();
  return rho * rho / (eta + lip * lip / phi);
}

RateCertificate rate_certificate(const MixingMatrix& w, const ProblemConstants& k,
                                 const CertificateChoices& choices, std::optional<double> alpha) {
  RateCertificate cert;
  cert.constants = k;
  cert.gamma = choices.gamma;
  cert.d = choices.d;
  cert.e = choices.e;
  cert.rho_min_w = w.rho_min();

  const double mu = k.mu;
  const double lip = k.lip;
  if (!(mu > 0.0)) return refuse(cert, "strong convexity assumption violated (mu <= 0)");
  if (!(lip >= mu)) return refuse(cert, "Lipschitz constant must be >= mu");
  if (k.q_min < 1 || k.q_max < k.q_min) return refuse(cert, "need 1 <= q_min <= q_max");

  const double phi = choices.phi.value_or(mu);
  cert.phi = phi;
  if (!(phi > 0.0 && phi < 2.0 * mu)) return refuse(cert, "phi outside (0, 2 mu)");
  if (!(cert.gamma > 0.0 && cert.gamma < 1.0)) return refuse(cert, "gamma outside (0, 1)");
  if (!(cert.d > 1.0 && cert.e > 1.0)) return refuse(cert, "d and e must exceed 1");
  if (!(choices.delta_fraction > 0.0 && choices.delta_fraction < 1.0))
    return refuse(cert, "delta fraction outside (0, 1)");
  if (w.size() < 2) return refuse(cert, "need at least two agents");
  if (!(cert.rho_min_w > 0.0)) return refuse(cert, "mixing matrix has a non-positive eigenvalue");

  const LaplacianLike lap = spectral_quantities(w);
  cert.rho2_l2 = lap.rho2_l2;
  const double inv_rho2 = 1.0 / cert.rho2_l2;

  const double qmin = k.q_min;
  const double qmax = k.q_max;
  const double margin = 2.0 * mu - phi;
  const double curv = (2.0 * lip - mu) * lip;

  cert.eta_lower = (2.0 * (lip / qmin) * qmax * lip + curv) / (cert.gamma * margin);
  cert.eta = 1.05 * cert.eta_lower;
  cert.alpha_max = step_size_upper_bound(w, mu, lip, phi, cert.eta);
  cert.alpha = alpha.value_or(0.5 * cert.alpha_max);
  const double a = cert.alpha;

  cert.c_lower = 4.0 * a / cert.eta * qmax * lip;
  cert.c_upper = (cert.gamma * a * margin - a * curv / cert.eta) / (lip / (2.0 * qmin));
  cert.c = std::sqrt(std::max(0.0, cert.c_lower * cert.c_upper));

  const auto& eig = w.eigenvalues();
  double q_spread = -std::numeric_limits<double>::infinity();
  double rho_gap = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    const double r = eig(i);
    q_spread = std::max(q_spread, (1.0 + 3.0 * r) * (1.0 - r));
    rho_gap = std::max(rho_gap, r * (r - 1.0));
  }
  cert.lambda_max_q = q_spread + a * margin;

  const double rho_sq = cert.rho_min_w * cert.rho_min_w;
  const double dd = cert.d / (cert.d - 1.0);
  const double ee = cert.e / (cert.e - 1.0);
  const double c_term = cert.c * lip / (2.0 * qmin);

  cert.theta_consensus = (rho_sq - a * (cert.eta + lip * lip / phi)) / (inv_rho2 * dd * cert.e);
  cert.theta_descent = (1.0 - cert.gamma) * a * margin /
                       (1.0 + cert.gamma * cert.lambda_max_q + 4.0 * inv_rho2 * cert.d * rho_gap * rho_gap);
  cert.theta_variance = (cert.gamma * a * margin - a * curv / cert.eta - c_term) /
                        (c_term + inv_rho2 * dd * ee * a * a * curv);
  cert.theta = std::min({cert.theta_consensus, cert.theta_descent, cert.theta_variance});
  cert.delta = choices.delta_fraction * cert.theta;

  if (!(a > 0.0)) return refuse(cert, "step-size must be positive");
  if (!(a < cert.alpha_max)) return refuse(cert, "step-size exceeds alpha_max bound");
  if (!(cert.c_lower < cert.c_upper)) return refuse(cert, "empty admissible interval for c");
  if (!(cert.theta > 0.0)) return refuse(cert, "rate constant Theta is not positive");
  cert.valid = true;
  cert.reason = "ok";
  return cert;
}

long long iterations_to_accuracy(double delta, double kappa, double epsilon) {
  require(epsilon > 0.0, "epsilon must be positive");
  require(kappa >= 0.0, "kappa must be nonnegative");
  require(delta > 0.0, "rate must be positive");
  if (kappa <= epsilon) return 0;
  const double factor = std::isinf(delta) ? 1.0 : 1.0 + 1.0 / delta;
  return static_cast<long long>(std::ceil(factor * std::log(kappa / epsilon)));
}

long long iterations_to_accuracy(const RateCertificate& cert, double kappa, double epsilon) {
  if (!cert.valid) fail(ErrorCode::certification_refused, "invalid certificate: " + cert.reason);
  return iterations_to_accuracy(cert.delta, kappa, epsilon);
}

double diging_iteration_estimate(double alpha, double mu, double kappa, double epsilon) {
  require(alpha > 0.0 && mu > 0.0 && alpha * mu < 1.5, "need 0 < alpha mu < 1.5");
  require(epsilon > 0.0 && kappa > 0.0, "kappa and epsilon must be positive");
  const double xi = alpha * mu / (1.5 - alpha * mu);
  return (1.0 + 1.0 / xi) * std::log(kappa / epsilon);
}

void write_certificate(std::ostream& out, const RateCertificate& c) {
  const auto old = out.precision(17);
  out << "valid = " << (c.valid ? "true" : "false") << '\n'
      << "reason = " << c.reason << '\n'
      << "mu = " << c.constants.mu << '\n'
      << "lip = " << c.constants.lip << '\n'
      << "q_min = " << c.constants.q_min << '\n'
      << "q_max = " << c.constants.q_max << '\n'
      << "phi = " << c.phi << '\n'
      << "gamma = " << c.gamma << '\n'
      << "d = " << c.d << '\n'
      << "e = " << c.e << '\n'
      << "rho_min_w = " << c.rho_min_w << '\n'
      << "rho2_l2 = " << c.rho2_l2 << '\n'
      << "lambda_max_q = " << c.lambda_max_q << '\n'
      << "eta_lower = " << c.eta_lower << '\n'
      << "eta = " << c.eta << '\n'
      << "alpha_max = " << c.alpha_max << '\n'
      << "alpha = " << c.alpha << '\n'
      << "c_lower = " << c.c_lower << '\n'
      << "c_upper = " << c.c_upper << '\n'
      << "c = " << c.c << '\n'
      << "theta_consensus = " << c.theta_consensus << '\n'
      << "theta_descent = " << c.theta_descent << '\n'
      << "theta_variance = " << c.theta_variance << '\n'
      << "theta = " << c.theta << '\n'
      << "delta = " << c.delta << '\n';
  out.precision(old);
}

}  // namespace sdig
