#include "doctest.h"
#include "oracles.hpp"

#include "sdig/error.hpp"
#include "sdig/harness.hpp"
#include "sdig/objectives.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

using namespace sdig;

namespace {

double fd_relative_error(const InstantaneousFunction& f, const Vec& x) {
  const Vec fd = oracle::fd_gradient([&](const Eigen::VectorXd& z) { return f.value(z); }, x);
  const Vec g = f.gradient(x);
  return (fd - g).norm() / std::max(1.0, g.norm());
}

std::vector<ComponentPtr> all_components(const ProblemInstance& p) {
  std::vector<ComponentPtr> out;
  for (const auto& lo : p.locals)
    for (const auto& c : lo.components()) out.push_back(c);
  return out;
}

void check_monotone_probes(const ProblemInstance& p, double scale, int pairs, bool strong) {
  std::mt19937_64 gen(77);
  const auto comps = all_components(p);
  std::uniform_int_distribution<std::size_t> pick(0, comps.size() - 1);
  for (int k = 0; k < pairs; ++k) {
    const auto& f = *comps[pick(gen)];
    const Vec a = oracle::random_vector(gen, p.dim, scale);
    const Vec b = oracle::random_vector(gen, p.dim, scale);
    const Vec ga = f.gradient(a), gb = f.gradient(b);
    const double d2 = (a - b).squaredNorm();
    const double inner = (ga - gb).dot(a - b);
    const double mu = strong ? f.mu() : 0.0;
    CHECK(inner >= mu * d2 - 1e-9 * (1.0 + d2));
    CHECK((ga - gb).norm() <= f.lip() * std::sqrt(d2) * (1.0 + 1e-12) + 1e-12);
  }
}

}  // namespace

TEST_CASE("scalar quadratic family has optimum -b") {
  const ProblemInstance p = quadratic_family(1, 1, 1, 1.0, 1.0, 3);
  const auto& comp = dynamic_cast<const QuadraticComponent&>(p.locals[0].component(0));
  CHECK(comp.a()(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  REQUIRE(p.known_optimum);
  CHECK((*p.known_optimum)(0) == doctest::Approx(-comp.b()(0)).epsilon(1e-14));
  Vec x(1);
  x << 0.7;
  CHECK(comp.value(x) == doctest::Approx(0.5 * 0.49 + comp.b()(0) * 0.7));
}

TEST_CASE("quadratic family optimum matches a direct dense solve") {
  const ProblemInstance p = quadratic_family(2, 2, 2, 1.0, 2.0, 17);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  Vec b = Vec::Zero(2);
  for (const auto& lo : p.locals)
    for (int h = 0; h < lo.q(); ++h) {
      const auto& c = dynamic_cast<const QuadraticComponent&>(lo.component(h));
      a += c.a() / lo.q();
      b += c.b() / lo.q();
    }
  const Vec oracle_opt = -a.fullPivLu().solve(b);
  REQUIRE(p.known_optimum);
  CHECK((*p.known_optimum - oracle_opt).norm() < 1e-12);
  CHECK(average_gradient(p, *p.known_optimum).norm() < 1e-10);
}

TEST_CASE("quadratic constants bracket every component Hessian spectrum") {
  const ProblemInstance p = quadratic_family(4, 5, 6, 0.5, 7.0, 2);
  CHECK(p.mu == doctest::Approx(0.5));
  CHECK(p.lip == doctest::Approx(7.0));
  for (const auto& comp : all_components(p)) {
    const auto& q = dynamic_cast<const QuadraticComponent&>(*comp);
    const auto eig = oracle::jacobi_eigenvalues(q.a());
    CHECK(eig.front() >= q.mu() - 1e-10);
    CHECK(eig.back() <= q.lip() + 1e-10);
    CHECK((q.a() - q.a().transpose()).norm() < 1e-12);
  }
  const ProblemInstance again = quadratic_family(4, 5, 6, 0.5, 7.0, 2);
  CHECK(again.fingerprint == p.fingerprint);
  CHECK(*again.known_optimum == *p.known_optimum);
}

TEST_CASE("logistic component closed forms") {
  Vec c(3);
  c << 1.0, -2.0, 0.5;
  const int q = 7;
  const LogisticComponent f(c, -1, 2.0, 4, q);
  const Vec zero = Vec::Zero(3);
  CHECK(f.value(zero) == doctest::Approx(q * std::log(2.0)).epsilon(1e-14));
  CHECK((f.gradient(zero) - (-(q * -1.0 / 2.0) * c)).norm() < 1e-14);
  CHECK(f.mu() == doctest::Approx(0.5));
  CHECK(f.lip() == doctest::Approx(0.5 + q * c.squaredNorm() / 4.0));

  Vec e1 = Vec::Zero(2);
  e1(0) = 1.0;
  const LogisticComponent sep(e1, 1, 1e-20, 1, 1);
  const Vec far = 60.0 * e1;
  CHECK(sep.value(far) < 1e-15);
  CHECK(sep.gradient(far).norm() < 1e-15);
  CHECK(std::isfinite(sep.value(-1e4 * e1)));
  CHECK(sep.value(-1e4 * e1) == doctest::Approx(1e4));

  CHECK_THROWS_AS(LogisticComponent(c, 0, 1.0, 1, 1), Error);
  CHECK_THROWS_AS(LogisticComponent(c, 1, 0.0, 1, 1), Error);
}

TEST_CASE("localization component closed forms and clamping") {
  const LocalizationComponent unit(Eigen::Vector2d::Zero(), 1.0, 1.0);
  CHECK(unit.radius() == doctest::Approx(1.0));
  CHECK_FALSE(unit.clamped());
  Vec x(2);
  x << 2.0, 0.0;
  CHECK(unit.project(x).isApprox(Eigen::Vector2d(1.0, 0.0)));
  CHECK(unit.value(x) == doctest::Approx(1.0));
  CHECK(unit.gradient(x).isApprox(Vec::Unit(2, 0) * 2.0));

  Vec inside(2);
  inside << 0.3, -0.4;
  CHECK(unit.value(inside) == 0.0);
  CHECK(unit.gradient(inside).norm() == 0.0);

  const LocalizationComponent noisy(Eigen::Vector2d(1.0, 1.0), -5.0, 100.0);
  CHECK(noisy.clamped());
  CHECK(noisy.radius() == doctest::Approx(std::sqrt(100.0 / 1e-4)));

  const LocalizationComponent cubic(Eigen::Vector2d::Zero(), 8.0, 64.0, 3.0);
  CHECK(cubic.radius() == doctest::Approx(2.0));
}

TEST_CASE("kmeans component closed forms") {
  Vec p = Vec::Zero(2);
  const KMeansComponent two(p, 2);
  Vec centers(4);
  centers << 1.0, 0.0, 3.0, 0.0;
  CHECK(two.value(centers) == doctest::Approx(1.0));
  Vec expected(4);
  expected << 2.0, 0.0, 0.0, 0.0;
  CHECK((two.gradient(centers) - expected).norm() == 0.0);
  CHECK(two.assign(centers) == 0);

  Vec tie(4);
  tie << 1.0, 0.0, -1.0, 0.0;
  CHECK(two.assign(tie) == 0);

  Vec q(2);
  q << 1.0, 2.0;
  const KMeansComponent one(q, 1);
  Vec m1(2);
  m1 << -1.0, 0.5;
  CHECK(one.value(m1) == doctest::Approx((q - m1).squaredNorm()));
  CHECK((one.gradient(m1) - 2.0 * (m1 - q)).norm() < 1e-15);
}

TEST_CASE("finite differences agree with gradients for every family") {
  std::mt19937_64 gen(1234);
  const int probes = 1000;

  SUBCASE("quadratic") {
    const ProblemInstance p = quadratic_family(3, 4, 5, 1.0, 10.0, 8);
    const auto comps = all_components(p);
    double worst = 0.0;
    for (int k = 0; k < probes; ++k) {
      const Vec x = oracle::random_vector(gen, p.dim, 3.0);
      worst = std::max(worst, fd_relative_error(*comps[k % comps.size()], x));
    }
    CHECK(worst < 1e-5);
  }
  SUBCASE("logistic") {
    const ProblemInstance p = gaussian_logistic_instance(4, 10, 4, 5);
    const auto comps = all_components(p);
    double worst = 0.0;
    for (int k = 0; k < probes; ++k) {
      const Vec x = oracle::random_vector(gen, p.dim, 1.0);
      worst = std::max(worst, fd_relative_error(*comps[k % comps.size()], x));
    }
    CHECK(worst < 1e-6);
  }
  SUBCASE("localization") {
    LocalizationSpec spec;
    spec.m = 5;
    spec.q = 10;
    spec.seed = 4;
    const LocalizationInstance inst = localization_instance(spec);
    const auto comps = all_components(inst.problem);
    std::uniform_real_distribution<double> coord(-20.0, 120.0);
    double worst = 0.0;
    int checked = 0;
    for (int k = 0; checked < probes; ++k) {
      const auto& f = dynamic_cast<const LocalizationComponent&>(*comps[k % comps.size()]);
      Vec x(2);
      x << coord(gen), coord(gen);
      if (std::abs((x - f.sensor()).norm() - f.radius()) < 1e-4) continue;
      worst = std::max(worst, fd_relative_error(f, x));
      ++checked;
    }
    CHECK(worst < 1e-5);
  }
  SUBCASE("kmeans") {
    const int dim = 3, clusters = 4;
    std::vector<Vec> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(oracle::random_vector(gen, dim, 5.0));
    const ProblemInstance p = kmeans_instance(pts, 4, 10, clusters);
    const auto comps = all_components(p);
    double worst = 0.0;
    int checked = 0;
    for (int k = 0; checked < probes; ++k) {
      const auto& f = dynamic_cast<const KMeansComponent&>(*comps[k % comps.size()]);
      const Vec x = oracle::random_vector(gen, p.dim, 5.0);
      std::vector<double> dist;
      for (int j = 0; j < clusters; ++j) dist.push_back((x.segment(j * dim, dim) - f.point()).norm());
      std::sort(dist.begin(), dist.end());
      if (dist[1] - dist[0] < 1e-4) continue;
      worst = std::max(worst, fd_relative_error(f, x));
      ++checked;
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("strong convexity and smoothness probes") {
  check_monotone_probes(quadratic_family(3, 4, 5, 1.0, 10.0, 8), 3.0, 1000, true);
  check_monotone_probes(gaussian_logistic_instance(4, 10, 4, 5), 2.0, 1000, true);
  LocalizationSpec spec;
  spec.m = 4;
  spec.q = 10;
  spec.seed = 2;
  check_monotone_probes(localization_instance(spec).problem, 60.0, 1000, false);
}

TEST_CASE("full local gradient is the component average") {
  std::mt19937_64 gen(9);
  const ProblemInstance p = quadratic_family(2, 6, 4, 1.0, 4.0, 21);
  for (const auto& lo : p.locals) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
    Vec b = Vec::Zero(4);
    for (int h = 0; h < lo.q(); ++h) {
      const auto& c = dynamic_cast<const QuadraticComponent&>(lo.component(h));
      a += c.a();
      b += c.b();
    }
    a /= lo.q();
    b /= lo.q();
    for (int k = 0; k < 20; ++k) {
      const Vec x = oracle::random_vector(gen, 4, 2.0);
      const Vec g = full_local_gradient(lo, x);
      Vec avg = Vec::Zero(4);
      for (int h = 0; h < lo.q(); ++h) avg += lo.component(h).gradient(x);
      avg /= lo.q();
      CHECK((g - avg).norm() <= 1e-14 * (1.0 + avg.norm()));
      CHECK((g - (a * x + b)).norm() <= 1e-12 * (1.0 + g.norm()));
    }
  }

  const ProblemInstance single = quadratic_family(1, 1, 3, 1.0, 2.0, 4);
  const Vec x = oracle::random_vector(gen, 3);
  CHECK((full_local_gradient(single.locals[0], x) - single.locals[0].component(0).gradient(x)).norm() == 0.0);

  const ProblemInstance lg = gaussian_logistic_instance(2, 8, 3, 6);
  for (const auto& lo : lg.locals) {
    Vec expected = Vec::Zero(3);
    for (int h = 0; h < lo.q(); ++h) {
      const auto& c = dynamic_cast<const LogisticComponent&>(lo.component(h));
      expected -= c.label() * c.feature() / 2.0;
    }
    CHECK((full_local_gradient(lo, Vec::Zero(3)) - expected).norm() < 1e-12);
  }

  CHECK_THROWS_AS(full_local_gradient(lg.locals[0], Vec::Zero(4)), Error);
}

TEST_CASE("problem assembly and aggregates") {
  const ProblemInstance p = quadratic_family(3, 2, 2, 1.0, 3.0, 1);
  CHECK(p.agents() == 3);
  CHECK(p.total_components() == 6);
  CHECK(p.q_min == 2);
  CHECK(p.q_max == 2);
  CHECK(p.convex());
  const Vec x = Vec::Ones(2);
  double sum = 0.0;
  for (const auto& lo : p.locals) sum += lo.value(x);
  CHECK(aggregate_objective(p, x) == doctest::Approx(sum));
  CHECK(parse_problem_family("kmeans") == ProblemFamily::kmeans);
  CHECK(to_string(ProblemFamily::localization) == "localization");
  CHECK_THROWS_AS(parse_problem_family("svm"), Error);
}

TEST_CASE("csv loaders") {
  std::istringstream good("1,0.5,2\n-1,-1,3.25\n\n");
  const auto samples = read_logistic_csv(good);
  REQUIRE(samples.size() == 2);
  CHECK(samples[1].label == -1);
  CHECK(samples[1].feature(1) == 3.25);

  std::istringstream bad_label("2,1,1\n");
  CHECK_THROWS_AS(read_logistic_csv(bad_label), Error);
  std::istringstream ragged("1,1,1\n1,2\n");
  CHECK_THROWS_AS(read_logistic_csv(ragged), Error);

  std::istringstream pts("0,1\n2,3\n");
  const auto points = read_points_csv(pts);
  REQUIRE(points.size() == 2);
  CHECK(points[1](0) == 2.0);
  std::istringstream bad_pts("0,1\n2\n");
  CHECK_THROWS_AS(read_points_csv(bad_pts), Error);
}
