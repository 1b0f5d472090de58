#include "sdig/experiment.hpp"

#include "sdig/error.hpp"
#include "sdig/rng.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

namespace sdig {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void config_error(const std::string& message) {
  fail(ErrorCode::configuration_error, message);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) config_error("key '" + key + "': invalid value '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  config_error("key '" + key + "': expected a boolean, got '" + text + "'");
}

template <typename F>
auto translate(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    config_error("key '" + key + "': " + e.what());
  }
}

std::string resolve_path(const std::filesystem::path& base, const std::string& value) {
  if (value.empty()) return value;
  std::filesystem::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.string();
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::filesystem::path&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> table = [] {
    std::map<std::string, std::map<std::string, Setter>> s;
    auto& prob = s["problem"];
    prob["family"] = [](auto& c, auto& v, auto&) {
      c.problem.family = translate("family", [&] { return parse_problem_family(v); });
    };
    prob["q"] = [](auto& c, auto& v, auto&) { c.problem.q = parse_number<int>("q", v); };
    prob["n"] = [](auto& c, auto& v, auto&) { c.problem.n = parse_number<int>("n", v); };
    prob["seed"] = [](auto& c, auto& v, auto&) { c.problem.seed = parse_number<std::uint64_t>("seed", v); };
    prob["lambda"] = [](auto& c, auto& v, auto&) { c.problem.lambda = parse_number<double>("lambda", v); };
    prob["mu"] = [](auto& c, auto& v, auto&) { c.problem.mu = parse_number<double>("mu", v); };
    prob["L"] = [](auto& c, auto& v, auto&) { c.problem.lip = parse_number<double>("L", v); };
    prob["a"] = [](auto& c, auto& v, auto&) { c.problem.strength = parse_number<double>("a", v); };
    prob["sigma"] = [](auto& c, auto& v, auto&) { c.problem.sigma = parse_number<double>("sigma", v); };
    prob["theta"] = [](auto& c, auto& v, auto&) { c.problem.theta = parse_number<double>("theta", v); };
    prob["field"] = [](auto& c, auto& v, auto&) { c.problem.field = parse_number<double>("field", v); };
    prob["K"] = [](auto& c, auto& v, auto&) { c.problem.clusters = parse_number<int>("K", v); };
    prob["data_csv"] = [](auto& c, auto& v, auto& base) { c.problem.data_csv = resolve_path(base, v); };
    prob["sensors_csv"] = [](auto& c, auto& v, auto& base) { c.problem.sensors_csv = resolve_path(base, v); };

    auto& topo = s["topology"];
    topo["kind"] = [](auto& c, auto& v, auto&) {
      c.topology.kind = translate("kind", [&] { return parse_topology_kind(v); });
    };
    topo["m"] = [](auto& c, auto& v, auto&) { c.topology.m = parse_number<int>("m", v); };
    topo["p"] = [](auto& c, auto& v, auto&) { c.topology.p = parse_number<double>("p", v); };
    topo["seed"] = [](auto& c, auto& v, auto&) { c.topology.seed = parse_number<std::uint64_t>("seed", v); };
    topo["laziness"] = [](auto& c, auto& v, auto&) { c.topology.laziness = parse_number<double>("laziness", v); };
    topo["edge_list"] = [](auto& c, auto& v, auto& base) { c.topology.edge_list = resolve_path(base, v); };

    auto& algo = s["algorithm"];
    algo["name"] = [](auto& c, auto& v, auto&) {
      c.algorithm.name = translate("name", [&] { return parse_algorithm(v); });
    };
    algo["alpha"] = [](auto& c, auto& v, auto&) {
      if (v == "auto") c.algorithm.alpha.reset();
      else c.algorithm.alpha = parse_number<double>("alpha", v);
    };
    algo["rounds"] = [](auto& c, auto& v, auto&) { c.algorithm.rounds = parse_number<long>("rounds", v); };
    algo["seed"] = [](auto& c, auto& v, auto&) { c.algorithm.seed = parse_number<std::uint64_t>("seed", v); };
    algo["record_every"] = [](auto& c, auto& v, auto&) { c.algorithm.record_every = parse_number<long>("record_every", v); };
    algo["phi"] = [](auto& c, auto& v, auto&) {
      if (v == "auto") c.algorithm.phi.reset();
      else c.algorithm.phi = parse_number<double>("phi", v);
    };
    algo["gamma"] = [](auto& c, auto& v, auto&) { c.algorithm.gamma = parse_number<double>("gamma", v); };
    algo["d"] = [](auto& c, auto& v, auto&) { c.algorithm.d = parse_number<double>("d", v); };
    algo["e"] = [](auto& c, auto& v, auto&) { c.algorithm.e = parse_number<double>("e", v); };
    algo["delta_fraction"] = [](auto& c, auto& v, auto&) { c.algorithm.delta_fraction = parse_number<double>("delta_fraction", v); };
    algo["epsilon"] = [](auto& c, auto& v, auto&) { c.algorithm.epsilon = parse_number<double>("epsilon", v); };
    algo["check_tracking"] = [](auto& c, auto& v, auto&) { c.algorithm.check_tracking = parse_bool("check_tracking", v); };

    auto& out = s["output"];
    out["dir"] = [](auto& c, auto& v, auto& base) { c.output.dir = resolve_path(base, v); };
    out["name"] = [](auto& c, auto& v, auto&) { c.output.name = v; };
    return s;
  }();
  return table;
}

void validate(const ExperimentConfig& c) {
  const auto& p = c.problem;
  if (p.q < 1) config_error("problem.q must be >= 1");
  if (p.n < 1) config_error("problem.n must be >= 1");
  if (c.topology.m < 2) config_error("topology.m must be >= 2");
  if (c.algorithm.rounds < 1) config_error("algorithm.rounds must be >= 1");
  if (c.algorithm.record_every < 0) config_error("algorithm.record_every must be >= 0");
  if (c.algorithm.alpha && !(*c.algorithm.alpha > 0.0)) config_error("algorithm.alpha must be positive");
  if (!(c.algorithm.epsilon > 0.0)) config_error("algorithm.epsilon must be positive");
  if (c.output.name.empty() || c.output.name.find('/') != std::string::npos ||
      c.output.name.find("..") != std::string::npos) {
    config_error("output.name must be a plain file stem");
  }
  if (p.family == ProblemFamily::logistic && p.data_csv.empty() && p.q % 2 != 0)
    config_error("problem.q must be even for the synthetic logistic family");
  if (p.family == ProblemFamily::quadratic && !(p.mu > 0.0 && p.mu <= p.lip))
    config_error("quadratic family needs 0 < mu <= L");
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  // Allow '#' comments on top of the ';' comments the ini reader understands.
  std::ostringstream cleaned;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') continue;
    cleaned << line << '\n';
  }
  pt::ptree tree;
  try {
    std::istringstream src(cleaned.str());
    pt::ini_parser::read_ini(src, tree);
  } catch (const pt::ini_parser_error& e) {
    config_error(std::string("malformed config: ") + e.what());
  }

  ExperimentConfig config;
  const auto& sections = schema();
  for (const auto& [section, body] : tree) {
    auto sit = sections.find(section);
    if (sit == sections.end()) config_error("unknown section '" + section + "'");
    if (!body.data().empty() && body.empty()) config_error("key '" + section + "' outside any section");
    for (const auto& [key, node] : body) {
      auto kit = sit->second.find(key);
      if (kit == sit->second.end()) config_error("unknown key '" + section + "." + key + "'");
      kit->second(config, node.data(), base_dir);
    }
  }
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::configuration_error, "cannot open config '" + path.string() + "'");
  return parse_config(in, path.parent_path());
}

void write_config(std::ostream& out, const ExperimentConfig& c) {
  const auto old = out.precision(17);
  out << "[problem]\n"
      << "family = " << to_string(c.problem.family) << '\n'
      << "q = " << c.problem.q << '\n'
      << "n = " << c.problem.n << '\n'
      << "seed = " << c.problem.seed << '\n'
      << "lambda = " << c.problem.lambda << '\n'
      << "mu = " << c.problem.mu << '\n'
      << "L = " << c.problem.lip << '\n'
      << "a = " << c.problem.strength << '\n'
      << "sigma = " << c.sigma() << '\n'
      << "theta = " << c.problem.theta << '\n'
      << "field = " << c.problem.field << '\n'
      << "K = " << c.problem.clusters << '\n';
  if (!c.problem.data_csv.empty()) out << "data_csv = " << c.problem.data_csv << '\n';
  if (!c.problem.sensors_csv.empty()) out << "sensors_csv = " << c.problem.sensors_csv << '\n';
  out << "\n[topology]\n"
      << "kind = " << to_string(c.topology.kind) << '\n'
      << "m = " << c.topology.m << '\n'
      << "p = " << c.topology.p << '\n'
      << "seed = " << c.topology.seed << '\n'
      << "laziness = " << c.topology.laziness << '\n';
  if (!c.topology.edge_list.empty()) out << "edge_list = " << c.topology.edge_list << '\n';
  out << "\n[algorithm]\n"
      << "name = " << to_string(c.algorithm.name) << '\n';
  if (c.algorithm.alpha) out << "alpha = " << *c.algorithm.alpha << '\n';
  else out << "alpha = auto\n";
  out << "rounds = " << c.algorithm.rounds << '\n'
      << "seed = " << c.algorithm.seed << '\n'
      << "record_every = " << c.algorithm.record_every << '\n';
  if (c.algorithm.phi) out << "phi = " << *c.algorithm.phi << '\n';
  else out << "phi = auto\n";
  out << "gamma = " << c.algorithm.gamma << '\n'
      << "d = " << c.algorithm.d << '\n'
      << "e = " << c.algorithm.e << '\n'
      << "delta_fraction = " << c.algorithm.delta_fraction << '\n'
      << "epsilon = " << c.algorithm.epsilon << '\n'
      << "check_tracking = " << (c.algorithm.check_tracking ? "true" : "false") << '\n'
      << "\n[output]\n"
      << "dir = " << c.output.dir << '\n'
      << "name = " << c.output.name << '\n';
  out.precision(old);
}

BuiltProblem build_problem(const ExperimentConfig& c) {
  const auto& p = c.problem;
  const int m = c.topology.m;
  BuiltProblem out;
  auto open = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::configuration_error, "cannot open data file '" + path + "'");
    return in;
  };

  switch (p.family) {
    case ProblemFamily::quadratic:
      out.problem = quadratic_family(m, p.q, p.n, p.mu, p.lip, p.seed);
      break;
    case ProblemFamily::logistic:
      if (!p.data_csv.empty()) {
        auto in = open(p.data_csv);
        const auto samples = read_logistic_csv(in);
        out.problem = logistic_from_samples(samples, m, p.lambda, "logistic-csv:" + p.data_csv);
      } else {
        out.problem = gaussian_logistic_instance(m, p.q, p.n, p.seed, p.lambda);
      }
      break;
    case ProblemFamily::localization: {
      LocalizationSpec spec;
      spec.m = m;
      spec.q = p.q;
      spec.field = p.field;
      spec.strength = p.strength;
      spec.sigma = c.sigma();
      spec.theta = p.theta;
      spec.seed = p.seed;
      std::vector<Eigen::Vector2d> sensors;
      if (!p.sensors_csv.empty()) {
        auto in = open(p.sensors_csv);
        for (const auto& row : read_points_csv(in)) {
          if (row.size() != 2) fail(ErrorCode::configuration_error, "sensor rows must be `x,y`");
          sensors.emplace_back(row(0), row(1));
        }
      }
      auto inst = localization_instance(spec, sensors);
      out.problem = std::move(inst.problem);
      out.true_source = inst.source;
      out.clamp_events = inst.clamp_events;
      break;
    }
    case ProblemFamily::kmeans: {
      std::vector<Vec> points;
      int q = p.q;
      if (!p.data_csv.empty()) {
        auto in = open(p.data_csv);
        points = read_points_csv(in);
        if (points.size() % static_cast<std::size_t>(m) != 0)
          fail(ErrorCode::invalid_argument, "kmeans: point count not divisible by agent count");
        q = static_cast<int>(points.size()) / m;
      } else {
        std::mt19937_64 gen(derive_seed(p.seed, 0x3ea5));
        std::uniform_real_distribution<double> coord(-10.0, 10.0);
        std::vector<Vec> means(p.clusters, Vec(p.n));
        for (auto& mean : means)
          for (int j = 0; j < p.n; ++j) mean(j) = coord(gen);
        const int total = m * p.q;
        const int per = (total + p.clusters - 1) / p.clusters;
        points = gaussian_blobs(means, per, 0.5, p.seed);
        points.resize(total);
      }
      out.problem = kmeans_instance(points, m, q, p.clusters);
      break;
    }
  }
  return out;
}

Topology build_topology(const ExperimentConfig& c) {
  if (!c.topology.edge_list.empty()) {
    std::ifstream in(c.topology.edge_list);
    if (!in) fail(ErrorCode::configuration_error, "cannot open edge list '" + c.topology.edge_list + "'");
    Topology t = read_edge_list(in);
    if (t.m != c.topology.m) fail(ErrorCode::configuration_error, "edge list agent count differs from topology.m");
    if (!t.connected()) fail(ErrorCode::configuration_error, "edge list graph is not connected");
    return t;
  }
  return build_topology(c.topology.kind, c.topology.m, c.topology.p, c.topology.seed);
}

MixingMatrix build_mixing(const ExperimentConfig& c, const Topology& topology) {
  return metropolis_weights(topology, c.topology.laziness);
}

RateCertificate certify(const ExperimentConfig& c, const ProblemInstance& problem,
                        const MixingMatrix& w) {
  CertificateChoices choices;
  choices.phi = c.algorithm.phi;
  choices.gamma = c.algorithm.gamma;
  choices.d = c.algorithm.d;
  choices.e = c.algorithm.e;
  choices.delta_fraction = c.algorithm.delta_fraction;
  ProblemConstants constants{problem.mu, problem.lip, problem.q_min, problem.q_max};
  return rate_certificate(w, constants, choices, c.algorithm.alpha);
}

}  // namespace sdig
