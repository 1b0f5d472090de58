#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sdig {

using Vec = Eigen::VectorXd;
using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;
using VecRef = Eigen::Ref<Eigen::VectorXd>;
/// Stacked per-agent iterates; row i belongs to agent i.
using AgentMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One component function f_i^h of an agent's finite-sum objective.
/// Implementations are immutable and safe to evaluate concurrently.
class InstantaneousFunction {
 public:
  virtual ~InstantaneousFunction() = default;

  virtual int dim() const = 0;
  virtual double value(const ConstVecRef& x) const = 0;
  virtual void gradient(const ConstVecRef& x, VecRef out) const = 0;
  /// Strong-convexity modulus (0 when only convex).
  virtual double mu() const = 0;
  /// Lipschitz constant of the gradient.
  virtual double lip() const = 0;

  Vec gradient(const ConstVecRef& x) const {
    Vec g(dim());
    gradient(x, g);
    return g;
  }
};

using ComponentPtr = std::shared_ptr<const InstantaneousFunction>;

/// f(x) = 1/2 x'Ax + b'x.
class QuadraticComponent final : public InstantaneousFunction {
 public:
  QuadraticComponent(Eigen::MatrixXd a, Vec b, double mu, double lip);

  int dim() const override { return static_cast<int>(b_.size()); }
  double value(const ConstVecRef& x) const override;
  void gradient(const ConstVecRef& x, VecRef out) const override;
  using InstantaneousFunction::gradient;
  double mu() const override { return mu_; }
  double lip() const override { return lip_; }

  const Eigen::MatrixXd& a() const { return a_; }
  const Vec& b() const { return b_; }

 private:
  Eigen::MatrixXd a_;
  Vec b_;
  double mu_;
  double lip_;
};

/// f(x) = (lambda/2m)||x||^2 + q log(1 + exp(-l c'x)).
class LogisticComponent final : public InstantaneousFunction {
 public:
  LogisticComponent(Vec feature, int label, double lambda, int agents, int q);

  int dim() const override { return static_cast<int>(c_.size()); }
  double value(const ConstVecRef& x) const override;
  void gradient(const ConstVecRef& x, VecRef out) const override;
  using InstantaneousFunction::gradient;
  double mu() const override { return reg_; }
  double lip() const override { return reg_ + q_ * c_.squaredNorm() / 4.0; }

  const Vec& feature() const { return c_; }
  int label() const { return label_; }

 private:
  Vec c_;
  int label_;
  double reg_;  // lambda / m
  double q_;
};

/// Squared distance to the disk {x : ||x - r|| <= (a/c)^(1/theta)}.
class LocalizationComponent final : public InstantaneousFunction {
 public:
  LocalizationComponent(Eigen::Vector2d sensor, double measurement, double strength,
                        double theta = 2.0);

  int dim() const override { return 2; }
  double value(const ConstVecRef& x) const override;
  void gradient(const ConstVecRef& x, VecRef out) const override;
  using InstantaneousFunction::gradient;
  double mu() const override { return 0.0; }
  double lip() const override { return 2.0; }

  Eigen::Vector2d project(const ConstVecRef& x) const;
  double radius() const { return radius_; }
  const Eigen::Vector2d& sensor() const { return r_; }
  /// True when the raw measurement fell below the positivity floor.
  bool clamped() const { return clamped_; }

 private:
  Eigen::Vector2d r_;
  double radius_;
  bool clamped_;
};

/// Clustering error of one point over stacked centers x = [m_1; ...; m_K].
/// Nonsmooth at assignment boundaries; mu = 0 and lip = 2 hold per block only.
class KMeansComponent final : public InstantaneousFunction {
 public:
  KMeansComponent(Vec point, int clusters);

  int dim() const override { return static_cast<int>(p_.size()) * k_; }
  double value(const ConstVecRef& x) const override;
  void gradient(const ConstVecRef& x, VecRef out) const override;
  using InstantaneousFunction::gradient;
  double mu() const override { return 0.0; }
  double lip() const override { return 2.0; }

  /// Nearest center, lowest index on ties.
  int assign(const ConstVecRef& x) const;
  const Vec& point() const { return p_; }
  int clusters() const { return k_; }

 private:
  Vec p_;
  int k_;
};

/// f_i(x) = (1/q_i) sum_h f_i^h(x).
class LocalObjective {
 public:
  explicit LocalObjective(std::vector<ComponentPtr> components);

  int dim() const { return dim_; }
  int q() const { return static_cast<int>(components_.size()); }
  const InstantaneousFunction& component(int h) const { return *components_[h]; }
  const std::vector<ComponentPtr>& components() const { return components_; }

  double value(const ConstVecRef& x) const;

 private:
  std::vector<ComponentPtr> components_;
  int dim_;
};

Vec full_local_gradient(const LocalObjective& lo, const ConstVecRef& x);

enum class ProblemFamily { quadratic, logistic, localization, kmeans };

ProblemFamily parse_problem_family(const std::string& name);
std::string to_string(ProblemFamily family);

struct ProblemInstance {
  ProblemFamily family = ProblemFamily::quadratic;
  std::vector<LocalObjective> locals;
  int dim = 0;
  int q_min = 0;
  int q_max = 0;
  double mu = 0.0;   // min over components
  double lip = 0.0;  // max over components
  std::optional<Vec> known_optimum;
  /// Stable identifier of the generator inputs; keys the reference cache.
  std::string fingerprint;

  int agents() const { return static_cast<int>(locals.size()); }
  bool convex() const { return family != ProblemFamily::kmeans; }
  int total_components() const;
};

/// Fills q_min/q_max/mu/lip/dim from the locals and checks consistency.
ProblemInstance assemble_problem(ProblemFamily family, std::vector<LocalObjective> locals,
                                 std::string fingerprint);

/// Sum over agents of f_i(x).
double aggregate_objective(const ProblemInstance& problem, const ConstVecRef& x);
/// Gradient of (1/m) sum_i f_i(x).
Vec average_gradient(const ProblemInstance& problem, const ConstVecRef& x);

/// Random quadratic components with Hessian spectra inside [mu_target, lip_target].
ProblemInstance quadratic_family(int m, int q, int n, double mu_target, double lip_target,
                                 std::uint64_t seed);

// Small CSV dataset loaders.
struct LabeledSample {
  int label;
  Vec feature;
};
/// Rows `label,feat1,...,featn`; labels must be -1 or +1.
std::vector<LabeledSample> read_logistic_csv(std::istream& in);
/// Rows of comma-separated coordinates with a common dimension.
std::vector<Vec> read_points_csv(std::istream& in);

}  // namespace sdig
