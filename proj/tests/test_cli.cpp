#include "doctest.h"

#include "sdig/cli.hpp"
#include "sdig/error.hpp"
#include "sdig/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace sdig;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path root;
  explicit Sandbox(const std::string& name) {
    root = fs::temp_directory_path() / ("sdig_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Sandbox() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  fs::path write(const std::string& file, const std::string& text) const {
    const fs::path p = root / file;
    std::ofstream(p) << text;
    return p;
  }
  fs::path out() const { return root / "out"; }
};

const char* kQuadratic = R"(
[problem]
family = quadratic
q = 3
n = 2
seed = 4
mu = 1
L = 1.5

[topology]
kind = complete
m = 4

[algorithm]
name = sdiging
alpha = 0.05
rounds = 400
seed = 2

[output]
dir = out
name = quad
)";

const char* kLocalization = R"(
[problem]
family = localization
q = 5
sigma = 0
seed = 3

[topology]
kind = ring
m = 4

[algorithm]
alpha = 0.05
rounds = 50

[output]
dir = out
name = loc
)";

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string with_replacement(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in("# comment\n[problem]\nfamily = quadratic\nq = 2\n; other comment\n"
                        "[topology]\nkind = ring\nm = 3\nedge_list = edges.txt\n"
                        "[algorithm]\nalpha = auto\ncheck_tracking = true\n");
  const ExperimentConfig c = parse_config(in, "/data");
  CHECK(c.problem.family == ProblemFamily::quadratic);
  CHECK(c.problem.q == 2);
  CHECK(c.topology.kind == TopologyKind::ring);
  CHECK(c.topology.edge_list == "/data/edges.txt");
  CHECK_FALSE(c.algorithm.alpha);
  CHECK(c.algorithm.check_tracking);
  CHECK(c.sigma() == doctest::Approx(5.0));

  std::ostringstream round_trip;
  write_config(round_trip, c);
  std::istringstream again(round_trip.str());
  const ExperimentConfig d = parse_config(again);
  CHECK(d.topology.edge_list == c.topology.edge_list);
  CHECK(d.problem.q == 2);

  auto code_of = [](const std::string& text) {
    std::istringstream s(text);
    try {
      parse_config(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io_error;
  };
  CHECK(code_of("[problem]\nbogus = 1\n") == ErrorCode::configuration_error);
  CHECK(code_of("[extras]\nq = 1\n") == ErrorCode::configuration_error);
  CHECK(code_of("[problem]\nq = three\n") == ErrorCode::configuration_error);
  CHECK(code_of("[problem]\nq = 2\nq = 4\n") == ErrorCode::configuration_error);
  CHECK(code_of("[problem]\nfamily = svm\n") == ErrorCode::configuration_error);
  CHECK(code_of("[topology]\nm = 1\n") == ErrorCode::configuration_error);
  CHECK(code_of("[output]\nname = ../escape\n") == ErrorCode::configuration_error);
  CHECK(code_of("[problem]\nfamily = logistic\nq = 3\n") == ErrorCode::configuration_error);
}

TEST_CASE("shipped configs load") {
  const fs::path dir = fs::path(SDIG_SOURCE_DIR) / "configs";
  int count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".ini") continue;
    CHECK_NOTHROW(load_config(entry.path()));
    ++count;
  }
  CHECK(count >= 4);
}

TEST_CASE("run writes a trace and metadata") {
  Sandbox box("run");
  const fs::path cfg = box.write("quad.ini", kQuadratic);
  std::ostringstream out, err;
  CHECK(cli::cmd_run(cfg, {}, out, err) == 0);
  CHECK(first_line(box.out() / "quad.csv") == "round,residual_log10,consensus_gap,grad_evals,wall_ms");
  CHECK(fs::exists(box.out() / "quad.meta"));
  CHECK(out.str().find("final residual_log10") != std::string::npos);

  cli::GlobalOptions quiet;
  quiet.quiet = true;
  quiet.output_dir = (box.root / "elsewhere").string();
  quiet.seed_override = 99;
  std::ostringstream qout;
  CHECK(cli::cmd_run(cfg, quiet, qout, err) == 0);
  CHECK(qout.str().empty());
  std::ifstream meta(box.root / "elsewhere" / "quad.meta");
  std::stringstream text;
  text << meta.rdbuf();
  CHECK(text.str().find("run_seed = 99") != std::string::npos);
}

TEST_CASE("unknown config key fails closed") {
  Sandbox box("badkey");
  const fs::path cfg = box.write("bad.ini", with_replacement(kQuadratic, "rounds = 400", "roundz = 400"));
  std::ostringstream out, err;
  CHECK(cli::cmd_run(cfg, {}, out, err) == exit_code_for(ErrorCode::configuration_error));
  CHECK(exit_code_for(ErrorCode::configuration_error) == 3);
  CHECK(err.str().rfind("configuration_error: ", 0) == 0);
  CHECK_FALSE(fs::exists(box.out()));
}

TEST_CASE("divergent run keeps a partial trace") {
  Sandbox box("diverge");
  const fs::path cfg = box.write("div.ini", with_replacement(kQuadratic, "alpha = 0.05", "alpha = 40"));
  std::ostringstream out, err;
  const int code = cli::cmd_run(cfg, {}, out, err);
  CHECK(code == exit_code_for(ErrorCode::divergence));
  CHECK(code != 0);
  CHECK(fs::exists(box.out() / "quad.csv.partial"));
  CHECK_FALSE(fs::exists(box.out() / "quad.csv"));
  CHECK(first_line(box.out() / "quad.csv.partial").rfind("round,residual_log10", 0) == 0);
}

TEST_CASE("runs without a certified reference report the objective") {
  Sandbox box("kmeans");
  const fs::path cfg = box.write("km.ini",
                                 "[problem]\nfamily = kmeans\nq = 6\nn = 2\nK = 2\n"
                                 "[topology]\nkind = complete\nm = 3\n"
                                 "[algorithm]\nalpha = 0.01\nrounds = 30\n"
                                 "[output]\ndir = out\nname = km\n");
  std::ostringstream out, err;
  CHECK(cli::cmd_run(cfg, {}, out, err) == 0);
  CHECK(first_line(box.out() / "km.csv") == "round,objective,consensus_gap,grad_evals,wall_ms");
}

TEST_CASE("certify") {
  Sandbox box("certify");
  std::ostringstream out, err;

  const fs::path quad = box.write("quad.ini", with_replacement(kQuadratic, "alpha = 0.05", "alpha = auto"));
  CHECK(cli::cmd_certify(quad, {}, out, err) == 0);
  CHECK(out.str().find("valid = true") != std::string::npos);
  CHECK(out.str().find("iterations_to_accuracy = ") != std::string::npos);

  std::ostringstream lout, lerr;
  const fs::path loc = box.write("loc.ini", kLocalization);
  CHECK(cli::cmd_certify(loc, {}, lout, lerr) == exit_code_for(ErrorCode::certification_refused));
  CHECK(lerr.str().find("strong convexity") != std::string::npos);

  std::ostringstream bout, berr;
  const fs::path big = box.write("big.ini", with_replacement(kQuadratic, "alpha = 0.05", "alpha = 0.5"));
  CHECK(cli::cmd_certify(big, {}, bout, berr) == exit_code_for(ErrorCode::certification_refused));
  CHECK(bout.str().find("valid = false") != std::string::npos);
  CHECK(berr.str().find("alpha_max") != std::string::npos);

  std::ostringstream rout, rerr;
  CHECK(cli::cmd_run(loc, {}, rout, rerr) == 0);
  CHECK(cli::cmd_run(box.write("auto_loc.ini", with_replacement(kLocalization, "alpha = 0.05", "alpha = auto")),
                     {}, rout, rerr) == exit_code_for(ErrorCode::certification_refused));
}

TEST_CASE("compare") {
  Sandbox box("compare");
  const fs::path cfg = box.write("quad.ini", with_replacement(kQuadratic, "rounds = 400", "rounds = 4000"));

  std::ostringstream one, err;
  CHECK(cli::cmd_compare(cfg, {Algorithm::sdiging}, -3.0, {}, one, err) == 0);
  std::ifstream csv(box.out() / "quad.compare.csv");
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 2);

  std::ostringstream pair;
  CHECK(cli::cmd_compare(cfg, cli::parse_algorithm_list("sdiging,primal_dual"), -3.0, {}, pair, err) == 0);
  std::ifstream csv2(box.out() / "quad.compare.csv");
  std::getline(csv2, line);
  std::string a, b;
  std::getline(csv2, a);
  std::getline(csv2, b);
  auto field = [](const std::string& row, int k) {
    std::stringstream ss(row);
    std::string cell;
    for (int i = 0; i <= k; ++i) std::getline(ss, cell, ',');
    return cell;
  };
  CHECK(field(a, 1) == "reached");
  CHECK(field(a, 2) == field(b, 2));
  CHECK(field(a, 3) == field(b, 3));

  std::ostringstream unreached;
  CHECK(cli::cmd_compare(cfg, {Algorithm::diging}, -40.0, {}, unreached, err) == 0);
  CHECK(unreached.str().find("not reached") != std::string::npos);

  CHECK_THROWS_AS(cli::parse_algorithm_list(""), Error);
  CHECK_THROWS_AS(cli::parse_algorithm_list("diging,sgd"), Error);
}
