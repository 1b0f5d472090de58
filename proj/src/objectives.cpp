#include "sdig/objectives.hpp"

#include "sdig/error.hpp"
#include "sdig/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <random>
#include <sstream>

namespace sdig {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

double parse_double(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::invalid_argument,
         "csv line " + std::to_string(line_no) + ": not a number '" + s + "'");
  }
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char ch) { return std::isspace(ch); });
}

}  // namespace

QuadraticComponent::QuadraticComponent(Eigen::MatrixXd a, Vec b, double mu, double lip)
    : a_(std::move(a)), b_(std::move(b)), mu_(mu), lip_(lip) {
  require(a_.rows() == a_.cols() && a_.rows() == b_.size(), "quadratic: shape mismatch");
}

double QuadraticComponent::value(const ConstVecRef& x) const {
  return 0.5 * x.dot(a_ * x) + b_.dot(x);
}

void QuadraticComponent::gradient(const ConstVecRef& x, VecRef out) const {
  out.noalias() = a_ * x;
  out += b_;
}

LogisticComponent::LogisticComponent(Vec feature, int label, double lambda, int agents, int q)
    : c_(std::move(feature)), label_(label), reg_(lambda / agents), q_(q) {
  require(lambda > 0.0, "logistic: regularizer must be positive");
  require(label == 1 || label == -1, "logistic: label must be -1 or +1");
  require(agents >= 1 && q >= 1, "logistic: agent count and q must be positive");
}

double LogisticComponent::value(const ConstVecRef& x) const {
  const double margin = label_ * c_.dot(x);
  return 0.5 * reg_ * x.squaredNorm() + q_ * softplus(-margin);
}

void LogisticComponent::gradient(const ConstVecRef& x, VecRef out) const {
  const double margin = label_ * c_.dot(x);
  out = reg_ * x - (q_ * label_ * sigmoid(-margin)) * c_;
}

LocalizationComponent::LocalizationComponent(Eigen::Vector2d sensor, double measurement,
                                             double strength, double theta)
    : r_(std::move(sensor)) {
  require(strength > 0.0, "localization: source strength must be positive");
  require(theta >= 1.0, "localization: attenuation exponent must be >= 1");
  const double floor = 1e-6 * strength;
  clamped_ = measurement < floor;
  const double c = clamped_ ? floor : measurement;
  radius_ = std::pow(strength / c, 1.0 / theta);
}

Eigen::Vector2d LocalizationComponent::project(const ConstVecRef& x) const {
  const Eigen::Vector2d d = x - r_;
  const double dist = d.norm();
  if (dist <= radius_) return x;
  return r_ + (radius_ / dist) * d;
}

double LocalizationComponent::value(const ConstVecRef& x) const {
  return (x - project(x)).squaredNorm();
}

void LocalizationComponent::gradient(const ConstVecRef& x, VecRef out) const {
  out = 2.0 * (x - project(x));
}

KMeansComponent::KMeansComponent(Vec point, int clusters) : p_(std::move(point)), k_(clusters) {
  require(clusters >= 1, "kmeans: need at least one cluster");
}

int KMeansComponent::assign(const ConstVecRef& x) const {
  const auto n = p_.size();
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int l = 0; l < k_; ++l) {
    const double d = (x.segment(l * n, n) - p_).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = l;
    }
  }
  return best;
}

double KMeansComponent::value(const ConstVecRef& x) const {
  const auto n = p_.size();
  return (x.segment(assign(x) * n, n) - p_).squaredNorm();
}

void KMeansComponent::gradient(const ConstVecRef& x, VecRef out) const {
  const auto n = p_.size();
  const int l = assign(x);
  out.setZero();
  out.segment(l * n, n) = 2.0 * (x.segment(l * n, n) - p_);
}

LocalObjective::LocalObjective(std::vector<ComponentPtr> components)
    : components_(std::move(components)) {
  require(!components_.empty(), "local objective needs at least one component");
  dim_ = components_.front()->dim();
  for (const auto& c : components_) require(c && c->dim() == dim_, "component dimensions differ");
}

double LocalObjective::value(const ConstVecRef& x) const {
  require(x.size() == dim_, "local objective: dimension mismatch");
  double sum = 0.0;
  for (const auto& c : components_) sum += c->value(x);
  return sum / q();
}

Vec full_local_gradient(const LocalObjective& lo, const ConstVecRef& x) {
  require(x.size() == lo.dim(), "full_local_gradient: dimension mismatch");
  Vec sum = Vec::Zero(lo.dim());
  Vec g(lo.dim());
  for (const auto& c : lo.components()) {
    c->gradient(x, g);
    sum += g;
  }
  return sum / lo.q();
}

ProblemFamily parse_problem_family(const std::string& name) {
  if (name == "quadratic") return ProblemFamily::quadratic;
  if (name == "logistic") return ProblemFamily::logistic;
  if (name == "localization") return ProblemFamily::localization;
  if (name == "kmeans") return ProblemFamily::kmeans;
  fail(ErrorCode::invalid_argument, "unknown problem family '" + name + "'");
}

std::string to_string(ProblemFamily family) {
  switch (family) {
    case ProblemFamily::quadratic: return "quadratic";
    case ProblemFamily::logistic: return "logistic";
    case ProblemFamily::localization: return "localization";
    case ProblemFamily::kmeans: return "kmeans";
  }
  return "?";
}

int ProblemInstance::total_components() const {
  int total = 0;
  for (const auto& lo : locals) total += lo.q();
  return total;
}

ProblemInstance assemble_problem(ProblemFamily family, std::vector<LocalObjective> locals,
                                 std::string fingerprint) {
  require(!locals.empty(), "problem needs at least one agent");
  ProblemInstance p;
  p.family = family;
  p.dim = locals.front().dim();
  p.q_min = std::numeric_limits<int>::max();
  p.q_max = 0;
  p.mu = std::numeric_limits<double>::infinity();
  p.lip = 0.0;
  for (const auto& lo : locals) {
    require(lo.dim() == p.dim, "all agents must share the decision dimension");
    p.q_min = std::min(p.q_min, lo.q());
    p.q_max = std::max(p.q_max, lo.q());
    for (const auto& c : lo.components()) {
      p.mu = std::min(p.mu, c->mu());
      p.lip = std::max(p.lip, c->lip());
    }
  }
  p.locals = std::move(locals);
  p.fingerprint = std::move(fingerprint);
  return p;
}

double aggregate_objective(const ProblemInstance& problem, const ConstVecRef& x) {
  double sum = 0.0;
  for (const auto& lo : problem.locals) sum += lo.value(x);
  return sum;
}

Vec average_gradient(const ProblemInstance& problem, const ConstVecRef& x) {
  Vec g = Vec::Zero(problem.dim);
  for (const auto& lo : problem.locals) g += full_local_gradient(lo, x);
  return g / problem.agents();
}

ProblemInstance quadratic_family(int m, int q, int n, double mu_target, double lip_target,
                                 std::uint64_t seed) {
  require(m >= 1 && q >= 1 && n >= 1, "quadratic_family: sizes must be positive");
  require(mu_target > 0.0 && mu_target <= lip_target,
          "quadratic_family: need 0 < mu_target <= lip_target");
  std::mt19937_64 gen(derive_seed(seed, 0x9a0d));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> spread(mu_target, lip_target);

  Eigen::MatrixXd hess_sum = Eigen::MatrixXd::Zero(n, n);
  Vec lin_sum = Vec::Zero(n);
  std::vector<LocalObjective> locals;
  locals.reserve(m);
  for (int i = 0; i < m; ++i) {
    std::vector<ComponentPtr> comps;
    for (int h = 0; h < q; ++h) {
      Eigen::MatrixXd g(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) g(r, c) = normal(gen);
      const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
      Vec spectrum(n);
      for (int r = 0; r < n; ++r) spectrum(r) = spread(gen);
      Eigen::MatrixXd a = basis * spectrum.asDiagonal() * basis.transpose();
      a = 0.5 * (a + a.transpose());
      Vec b(n);
      for (int r = 0; r < n; ++r) b(r) = normal(gen);
      hess_sum += a / q;
      lin_sum += b / q;
      comps.push_back(std::make_shared<QuadraticComponent>(a, b, mu_target, lip_target));
    }
    locals.emplace_back(std::move(comps));
  }
  std::ostringstream fp;
  fp << "quadratic:m=" << m << ",q=" << q << ",n=" << n << ",mu=" << mu_target
     << ",L=" << lip_target << ",seed=" << seed;
  ProblemInstance p = assemble_problem(ProblemFamily::quadratic, std::move(locals), fp.str());
  p.known_optimum = hess_sum.ldlt().solve(-lin_sum);
  return p;
}

std::vector<LabeledSample> read_logistic_csv(std::istream& in) {
  std::vector<LabeledSample> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 2) fail(ErrorCode::invalid_argument, "csv line " + std::to_string(line_no) + ": need label and features");
    const double label = parse_double(fields[0], line_no);
    if (label != 1.0 && label != -1.0)
      fail(ErrorCode::invalid_argument, "csv line " + std::to_string(line_no) + ": label must be -1 or +1");
    Vec feature(static_cast<Eigen::Index>(fields.size() - 1));
    for (std::size_t j = 1; j < fields.size(); ++j) feature(j - 1) = parse_double(fields[j], line_no);
    if (!rows.empty() && rows.front().feature.size() != feature.size())
      fail(ErrorCode::invalid_argument, "csv line " + std::to_string(line_no) + ": inconsistent feature count");
    rows.push_back({static_cast<int>(label), std::move(feature)});
  }
  return rows;
}

std::vector<Vec> read_points_csv(std::istream& in) {
  std::vector<Vec> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_csv_line(line);
    Vec p(static_cast<Eigen::Index>(fields.size()));
    for (std::size_t j = 0; j < fields.size(); ++j) p(j) = parse_double(fields[j], line_no);
    if (!rows.empty() && rows.front().size() != p.size())
      fail(ErrorCode::invalid_argument, "csv line " + std::to_string(line_no) + ": inconsistent dimension");
    rows.push_back(std::move(p));
  }
  return rows;
}

}  // namespace sdig
