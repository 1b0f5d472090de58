#include "sdig/harness.hpp"

#include "sdig/error.hpp"
#include "sdig/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace sdig {

ProblemInstance gaussian_logistic_instance(int m, int q, int n, std::uint64_t seed, double lambda) {
  require(m >= 1 && n >= 1, "gaussian_logistic_instance: sizes must be positive");
  require(q >= 2 && q % 2 == 0, "gaussian_logistic_instance: q must be even (half per class)");
  require(lambda > 0.0, "gaussian_logistic_instance: lambda must be positive");
  std::mt19937_64 gen(derive_seed(seed, 0x10a15));
  std::normal_distribution<double> noise(0.0, std::sqrt(2.0));

  Vec mean_pos(n);
  for (int j = 0; j < n; ++j) mean_pos(j) = j < (n + 1) / 2 ? 2.0 : -2.0;

  std::vector<LocalObjective> locals;
  locals.reserve(m);
  for (int i = 0; i < m; ++i) {
    std::vector<ComponentPtr> comps;
    comps.reserve(q);
    for (int h = 0; h < q; ++h) {
      const int label = h < q / 2 ? 1 : -1;
      Vec c(n);
      for (int j = 0; j < n; ++j) c(j) = label * mean_pos(j) + noise(gen);
      comps.push_back(std::make_shared<LogisticComponent>(std::move(c), label, lambda, m, q));
    }
    locals.emplace_back(std::move(comps));
  }
  std::ostringstream fp;
  fp << "logistic:m=" << m << ",q=" << q << ",n=" << n << ",lambda=" << lambda << ",seed=" << seed;
  return assemble_problem(ProblemFamily::logistic, std::move(locals), fp.str());
}

ProblemInstance logistic_from_samples(const std::vector<LabeledSample>& samples, int m,
                                      double lambda, const std::string& fingerprint) {
  require(m >= 1, "logistic_from_samples: need at least one agent");
  require(!samples.empty() && samples.size() % static_cast<std::size_t>(m) == 0,
          "logistic_from_samples: sample count must be divisible by the agent count");
  const int q = static_cast<int>(samples.size()) / m;
  std::vector<LocalObjective> locals;
  for (int i = 0; i < m; ++i) {
    std::vector<ComponentPtr> comps;
    for (int h = 0; h < q; ++h) {
      const auto& s = samples[static_cast<std::size_t>(i * q + h)];
      comps.push_back(std::make_shared<LogisticComponent>(s.feature, s.label, lambda, m, q));
    }
    locals.emplace_back(std::move(comps));
  }
  return assemble_problem(ProblemFamily::logistic, std::move(locals), fingerprint);
}

LocalizationInstance localization_instance(const LocalizationSpec& spec,
                                           const std::vector<Eigen::Vector2d>& sensors) {
  require(spec.m >= 1 && spec.q >= 1, "localization_instance: sizes must be positive");
  require(spec.strength > 0.0, "localization_instance: strength must be positive");
  require(spec.field > 2.0, "localization_instance: field too small");
  require(spec.sigma >= 0.0, "localization_instance: sigma must be nonnegative");
  require(sensors.empty() || static_cast<int>(sensors.size()) == spec.m,
          "localization_instance: need one sensor location per agent");
  std::mt19937_64 gen(derive_seed(spec.seed, 0x10c));
  std::uniform_real_distribution<double> coord(0.0, spec.field);
  std::normal_distribution<double> noise(0.0, 1.0);

  LocalizationInstance out;
  out.source = Eigen::Vector2d(coord(gen), coord(gen));
  for (int i = 0; i < spec.m; ++i) {
    Eigen::Vector2d r;
    if (!sensors.empty()) {
      r = sensors[i];
      require((out.source - r).norm() > 1.0, "localization_instance: sensor within unit distance of source");
    } else {
      do {
        r = Eigen::Vector2d(coord(gen), coord(gen));
      } while ((out.source - r).norm() <= 1.0);
    }
    out.sensors.push_back(r);
  }

  std::vector<LocalObjective> locals;
  for (int i = 0; i < spec.m; ++i) {
    const double clean = spec.strength / std::pow((out.source - out.sensors[i]).norm(), spec.theta);
    std::vector<ComponentPtr> comps;
    for (int h = 0; h < spec.q; ++h) {
      const double meas = clean + spec.sigma * noise(gen);
      auto comp = std::make_shared<LocalizationComponent>(out.sensors[i], meas, spec.strength, spec.theta);
      if (comp->clamped()) ++out.clamp_events;
      comps.push_back(std::move(comp));
    }
    locals.emplace_back(std::move(comps));
  }
  std::ostringstream fp;
  fp << "localization:m=" << spec.m << ",q=" << spec.q << ",field=" << spec.field
     << ",a=" << spec.strength << ",sigma=" << spec.sigma << ",theta=" << spec.theta
     << ",seed=" << spec.seed << ",custom_sensors=" << !sensors.empty();
  out.problem = assemble_problem(ProblemFamily::localization, std::move(locals), fp.str());
  return out;
}

std::vector<Vec> gaussian_blobs(const std::vector<Vec>& means, int per_cluster, double stddev,
                                std::uint64_t seed) {
  require(!means.empty() && per_cluster >= 1, "gaussian_blobs: need means and points");
  std::mt19937_64 gen(derive_seed(seed, 0xb10b));
  std::normal_distribution<double> noise(0.0, stddev);
  std::vector<Vec> points;
  for (const auto& mean : means) {
    for (int k = 0; k < per_cluster; ++k) {
      Vec p = mean;
      for (Eigen::Index j = 0; j < p.size(); ++j) p(j) += noise(gen);
      points.push_back(std::move(p));
    }
  }
  std::shuffle(points.begin(), points.end(), gen);
  return points;
}

ProblemInstance kmeans_instance(const std::vector<Vec>& points, int m, int q, int clusters) {
  require(m >= 1 && q >= 1 && clusters >= 1, "kmeans_instance: sizes must be positive");
  if (points.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(q)) {
    fail(ErrorCode::invalid_argument, "kmeans_instance: point count must equal m * q");
  }
  std::vector<LocalObjective> locals;
  for (int i = 0; i < m; ++i) {
    std::vector<ComponentPtr> comps;
    for (int h = 0; h < q; ++h)
      comps.push_back(std::make_shared<KMeansComponent>(points[static_cast<std::size_t>(i * q + h)], clusters));
    locals.emplace_back(std::move(comps));
  }
  // Content hash keeps the cache honest for caller-supplied data.
  std::uint64_t h = 0;
  for (const auto& p : points)
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      std::uint64_t bits;
      const double v = p(j);
      std::memcpy(&bits, &v, sizeof bits);
      h = mix64(h ^ bits);
    }
  std::ostringstream fp;
  fp << "kmeans:m=" << m << ",q=" << q << ",K=" << clusters << ",data=" << std::hex << h;
  return assemble_problem(ProblemFamily::kmeans, std::move(locals), fp.str());
}

namespace {

ReferenceResult solve_convex(const ProblemInstance& problem, const ReferenceOptions& opt,
                             const Vec& start) {
  ReferenceResult out;
  long long calls = 0;
  auto grad = [&](const Vec& x) {
    ++calls;
    return average_gradient(problem, x);
  };

  Vec x = start;
  Vec gx = grad(x);
  if (gx.norm() <= opt.tolerance) {
    out.x = x;
    out.grad_norm = gx.norm();
    out.oracle_calls = calls;
    out.objective = aggregate_objective(problem, x);
    return out;
  }
  Vec y = x;
  Vec gy = gx;
  double t = 1.0;
  double lip = std::max(problem.lip, 1e-12);

  while (calls < opt.max_oracle_calls) {
    lip *= 0.9;
    Vec x_new;
    Vec g_new;
    for (;;) {
      x_new = y - gy / lip;
      g_new = grad(x_new);
      const double step = (x_new - y).norm();
      if ((g_new - gy).norm() <= lip * step * (1.0 + 1e-12) || step == 0.0) break;
      lip *= 2.0;
      if (calls >= opt.max_oracle_calls) break;
    }
    const double gnorm = g_new.norm();
    if (gnorm <= opt.tolerance) {
      out.x = x_new;
      out.grad_norm = gnorm;
      out.oracle_calls = calls;
      out.objective = aggregate_objective(problem, out.x);
      return out;
    }
    // Adaptive restart: drop momentum when it points uphill.
    if (gy.dot(x_new - x) > 0.0) {
      t = 1.0;
      y = x_new;
      gy = g_new;
    } else {
      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_new + ((t - 1.0) / t_new) * (x_new - x);
      t = t_new;
      gy = grad(y);
    }
    x = std::move(x_new);
  }
  std::ostringstream msg;
  msg << "reference solver exhausted " << opt.max_oracle_calls
      << " oracle calls before reaching gradient norm " << opt.tolerance;
  fail(ErrorCode::reference_failure, msg.str());
}

ReferenceResult solve_kmeans(const ProblemInstance& problem, const ReferenceOptions& opt) {
  // Flatten the data with per-point weights 1/q_i.
  std::vector<Vec> pts;
  std::vector<double> wts;
  int clusters = 0;
  for (const auto& lo : problem.locals) {
    for (const auto& c : lo.components()) {
      const auto* km = dynamic_cast<const KMeansComponent*>(c.get());
      if (!km) fail(ErrorCode::invalid_argument, "kmeans reference needs KMeansComponent data");
      pts.push_back(km->point());
      wts.push_back(1.0 / lo.q());
      clusters = km->clusters();
    }
  }
  const Eigen::Index n = pts.front().size();
  const int total = static_cast<int>(pts.size());
  std::mt19937_64 gen(derive_seed(opt.seed, 0x4ea5));

  ReferenceResult best;
  best.objective = std::numeric_limits<double>::infinity();
  best.certified = false;
  long long calls = 0;

  for (int restart = 0; restart < std::max(1, opt.restarts); ++restart) {
    // k-means++ seeding.
    std::vector<Vec> centers;
    std::uniform_int_distribution<int> pick(0, total - 1);
    centers.push_back(pts[pick(gen)]);
    std::vector<double> d2(total);
    while (static_cast<int>(centers.size()) < clusters) {
      for (int p = 0; p < total; ++p) {
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) best_d = std::min(best_d, (pts[p] - c).squaredNorm());
        d2[p] = best_d * wts[p];
      }
      const double sum = std::accumulate(d2.begin(), d2.end(), 0.0);
      if (sum <= 0.0) {
        centers.push_back(pts[pick(gen)]);
        continue;
      }
      std::discrete_distribution<int> weighted(d2.begin(), d2.end());
      centers.push_back(pts[weighted(gen)]);
    }

    std::vector<int> assign(total, -1);
    for (int iter = 0; iter < 1000 && calls < opt.max_oracle_calls; ++iter) {
      ++calls;
      bool changed = false;
      for (int p = 0; p < total; ++p) {
        int arg = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int l = 0; l < clusters; ++l) {
          const double d = (pts[p] - centers[l]).squaredNorm();
          if (d < best_d) {
            best_d = d;
            arg = l;
          }
        }
        if (assign[p] != arg) {
          assign[p] = arg;
          changed = true;
        }
      }
      std::vector<Vec> sums(clusters, Vec::Zero(n));
      std::vector<double> mass(clusters, 0.0);
      for (int p = 0; p < total; ++p) {
        sums[assign[p]] += wts[p] * pts[p];
        mass[assign[p]] += wts[p];
      }
      for (int l = 0; l < clusters; ++l)
        if (mass[l] > 0.0) centers[l] = sums[l] / mass[l];
      if (!changed && iter > 0) break;
    }

    Vec x(clusters * n);
    for (int l = 0; l < clusters; ++l) x.segment(l * n, n) = centers[l];
    const double obj = aggregate_objective(problem, x);
    if (obj < best.objective) {
      best.objective = obj;
      best.x = x;
    }
  }
  best.grad_norm = average_gradient(problem, best.x).norm();
  best.oracle_calls = calls;
  return best;
}

}  // namespace

ReferenceResult reference_solution(const ProblemInstance& problem, const ReferenceOptions& options) {
  require(problem.agents() >= 1, "reference_solution: empty problem");
  if (problem.family == ProblemFamily::kmeans) return solve_kmeans(problem, options);
  const Vec start = options.start.value_or(Vec::Zero(problem.dim));
  require(start.size() == problem.dim, "reference_solution: start has wrong dimension");
  return solve_convex(problem, options, start);
}

const ReferenceResult& ReferenceCache::get(const ProblemInstance& problem,
                                           const ReferenceOptions& options) {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(problem.fingerprint);
  if (it != entries_.end()) return it->second;
  return entries_.emplace(problem.fingerprint, reference_solution(problem, options)).first->second;
}

bool ReferenceCache::contains(const std::string& fingerprint) const {
  std::lock_guard lock(mutex_);
  return entries_.count(fingerprint) > 0;
}

}  // namespace sdig
