#include "sdig/cli.hpp"

#include "sdig/certificate.hpp"
#include "sdig/error.hpp"
#include "sdig/experiment.hpp"
#include "sdig/harness.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace sdig::cli {

namespace fs = std::filesystem;

namespace {

ExperimentConfig load_with_overrides(const fs::path& path, const GlobalOptions& options) {
  ExperimentConfig config = load_config(path);
  if (options.seed_override) config.algorithm.seed = *options.seed_override;
  if (options.output_dir) config.output.dir = *options.output_dir;
  return config;
}

int report(const Error& e, std::ostream& err) {
  err << error_code_name(e.code()) << ": " << e.what() << '\n';
  return exit_code_for(e.code());
}

// Runs `body`, mapping every failure to an `error_code: message` line.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return report(e, err);
  } catch (const std::exception& e) {
    err << "internal_error: " << e.what() << '\n';
    return kExitInternal;
  }
}

fs::path prepare_output_dir(const ExperimentConfig& config) {
  fs::path dir(config.output.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write '" + path.string() + "'");
  return out;
}

struct PreparedRun {
  BuiltProblem built;
  Topology topology;
  std::optional<MixingMatrix> w;
  std::optional<ReferenceResult> reference;
  RateCertificate certificate;
};

PreparedRun prepare(const ExperimentConfig& config, bool need_reference) {
  PreparedRun p;
  p.built = build_problem(config);
  p.topology = build_topology(config);
  p.w = build_mixing(config, p.topology);
  p.certificate = certify(config, p.built.problem, *p.w);
  if (need_reference) {
    ReferenceOptions ro;
    ro.seed = config.problem.seed;
    p.reference = reference_solution(p.built.problem, ro);
  }
  return p;
}

double resolve_alpha(const ExperimentConfig& config, const RateCertificate& cert) {
  if (config.algorithm.alpha) return *config.algorithm.alpha;
  if (!cert.valid) {
    fail(ErrorCode::certification_refused,
         "alpha = auto needs a valid certificate: " + cert.reason);
  }
  return cert.alpha;
}

void write_metadata(std::ostream& out, const ExperimentConfig& config, const PreparedRun& p,
                    double alpha, const RunTrace* trace) {
  const auto old = out.precision(17);
  out << "# resolved configuration\n";
  write_config(out, config);
  out << "\n[instance]\n"
      << "fingerprint = " << p.built.problem.fingerprint << '\n'
      << "agents = " << p.built.problem.agents() << '\n'
      << "dim = " << p.built.problem.dim << '\n'
      << "q_min = " << p.built.problem.q_min << '\n'
      << "q_max = " << p.built.problem.q_max << '\n'
      << "mu = " << p.built.problem.mu << '\n'
      << "lip = " << p.built.problem.lip << '\n'
      << "edges = " << p.topology.edges.size() << '\n'
      << "topology_retries = " << p.topology.retries << '\n'
      << "laziness_applied = " << p.w->laziness() << '\n'
      << "clamp_events = " << p.built.clamp_events << '\n';
  if (p.built.true_source)
    out << "true_source = " << (*p.built.true_source)(0) << ',' << (*p.built.true_source)(1) << '\n';
  if (p.reference) {
    out << "\n[reference]\n"
        << "certified = " << (p.reference->certified ? "true" : "false") << '\n'
        << "grad_norm = " << p.reference->grad_norm << '\n'
        << "objective = " << p.reference->objective << '\n'
        << "oracle_calls = " << p.reference->oracle_calls << '\n';
  }
  out << "\n[certificate]\n";
  write_certificate(out, p.certificate);
  if (p.certificate.valid && p.reference) {
    const double kappa = p.reference->x.squaredNorm();
    out << "iterations_to_accuracy = "
        << iterations_to_accuracy(p.certificate, kappa, config.algorithm.epsilon) << '\n';
  }
  out << "\n[run]\n"
      << "alpha_used = " << alpha << '\n'
      << "run_seed = " << config.algorithm.seed << '\n'
      << "problem_seed = " << config.problem.seed << '\n'
      << "topology_seed = " << config.topology.seed << '\n';
  if (trace) {
    out << "rounds_completed = " << trace->rounds_completed << '\n';
    if (!trace->rows.empty()) {
      const auto& last = trace->rows.back();
      out << "final_grad_evals = " << last.grad_evals << '\n'
          << "final_consensus_gap = " << last.consensus_gap << '\n'
          << "final_objective = " << last.objective << '\n';
      if (trace->has_residual) out << "final_residual_log10 = " << last.residual_log10 << '\n';
    }
  }
  out.precision(old);
}

RunOptions run_options(const ExperimentConfig& config, const PreparedRun& p, double alpha) {
  RunOptions o;
  o.algorithm = config.algorithm.name;
  o.alpha = alpha;
  o.rounds = config.algorithm.rounds;
  o.seed = config.algorithm.seed;
  o.record_every = config.algorithm.record_every;
  o.check_tracking = config.algorithm.check_tracking;
  const bool reliable = p.reference && p.reference->certified;
  if (reliable) o.reference = p.reference->x;
  o.require_residual = reliable;
  return o;
}

}  // namespace

std::vector<Algorithm> parse_algorithm_list(const std::string& csv) {
  std::vector<Algorithm> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(parse_algorithm(item));
  }
  require(!out.empty(), "algorithm list is empty");
  return out;
}

int cmd_run(const fs::path& config_path, const GlobalOptions& options, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig config = load_with_overrides(config_path, options);
    const PreparedRun p = prepare(config, /*need_reference=*/true);
    const double alpha = resolve_alpha(config, p.certificate);
    const RunOptions ro = run_options(config, p, alpha);

    const fs::path dir = prepare_output_dir(config);
    const fs::path csv = dir / (config.output.name + ".csv");
    const fs::path meta = dir / (config.output.name + ".meta");
    try {
      const RunTrace trace = run(p.built.problem, *p.w, ro);
      {
        auto f = open_for_write(csv);
        write_trace_csv(f, trace);
      }
      {
        auto f = open_for_write(meta);
        write_metadata(f, config, p, alpha, &trace);
      }
      if (!options.quiet) {
        const auto& last = trace.rows.back();
        out << "algorithm " << to_string(ro.algorithm) << ", alpha " << alpha << ", "
            << trace.rounds_completed << " rounds, " << last.grad_evals << " gradient evaluations\n";
        if (trace.has_residual) out << "final residual_log10 " << last.residual_log10 << '\n';
        else out << "final objective " << last.objective << '\n';
        out << "final consensus_gap " << last.consensus_gap << '\n'
            << "trace written to " << csv.string() << '\n';
      }
      return kExitOk;
    } catch (const DivergenceError& e) {
      fs::path partial = csv;
      partial += ".partial";
      auto f = open_for_write(partial);
      write_trace_csv(f, e.partial());
      err << "partial trace written to " << partial.string() << '\n';
      throw;
    }
  });
}

int cmd_certify(const fs::path& config_path, const GlobalOptions& options, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig config = load_with_overrides(config_path, options);
    PreparedRun p = prepare(config, /*need_reference=*/false);
    write_certificate(out, p.certificate);
    if (!p.certificate.valid) {
      err << error_code_name(ErrorCode::certification_refused) << ": " << p.certificate.reason << '\n';
      return exit_code_for(ErrorCode::certification_refused);
    }
    // The iteration estimate needs ||x0 - x*||^2 with x0 = 0.
    try {
      ReferenceOptions ro;
      ro.seed = config.problem.seed;
      const Vec xstar = p.built.problem.known_optimum
                            ? *p.built.problem.known_optimum
                            : reference_solution(p.built.problem, ro).x;
      const double kappa = xstar.squaredNorm();
      out << "kappa = " << std::setprecision(17) << kappa << '\n'
          << "epsilon = " << config.algorithm.epsilon << '\n'
          << "iterations_to_accuracy = "
          << iterations_to_accuracy(p.certificate, kappa, config.algorithm.epsilon) << '\n';
    } catch (const Error& e) {
      if (e.code() != ErrorCode::reference_failure) throw;
      if (!options.quiet) out << "# iterations_to_accuracy unavailable: " << e.what() << '\n';
    }
    return kExitOk;
  });
}

int cmd_compare(const fs::path& config_path, const std::vector<Algorithm>& algorithms, double target,
                const GlobalOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(!algorithms.empty(), "compare needs at least one algorithm");
    const ExperimentConfig config = load_with_overrides(config_path, options);
    const PreparedRun p = prepare(config, /*need_reference=*/true);
    if (!p.reference->certified) {
      fail(ErrorCode::configuration_error, "compare needs a reliable reference optimum (convex family)");
    }
    const double alpha = resolve_alpha(config, p.certificate);
    const fs::path dir = prepare_output_dir(config);

    struct Row {
      Algorithm algorithm;
      std::string status;
      long rounds = 0;
      long long evals = 0;
      double wall_ms = 0.0;
    };
    std::vector<Row> rows;
    for (Algorithm a : algorithms) {
      ExperimentConfig c = config;
      c.algorithm.name = a;
      RunOptions ro = run_options(c, p, alpha);
      ro.stop_at_residual = target;
      Row row{a, "not reached"};
      try {
        const RunTrace trace = run(p.built.problem, *p.w, ro);
        const auto& last = trace.rows.back();
        if (trace.reached_target) row.status = "reached";
        row.rounds = trace.rounds_completed;
        row.evals = last.grad_evals;
        row.wall_ms = last.wall_ms;
      } catch (const DivergenceError& e) {
        row.status = "diverged";
        row.rounds = e.partial().rounds_completed;
        if (!e.partial().rows.empty()) {
          row.evals = e.partial().rows.back().grad_evals;
          row.wall_ms = e.partial().rows.back().wall_ms;
        }
      }
      rows.push_back(row);
    }

    auto f = open_for_write(dir / (config.output.name + ".compare.csv"));
    f << "algorithm,status,rounds_to_target,grad_evals_to_target,wall_ms_to_target\n";
    for (const auto& r : rows)
      f << to_string(r.algorithm) << ',' << r.status << ',' << r.rounds << ',' << r.evals << ','
        << r.wall_ms << '\n';

    out << "target residual_log10 " << target << ", alpha " << alpha << '\n';
    out << std::left << std::setw(12) << "algorithm" << std::setw(13) << "status" << std::right
        << std::setw(12) << "rounds" << std::setw(16) << "grad_evals" << std::setw(14) << "wall_ms"
        << '\n';
    for (const auto& r : rows) {
      out << std::left << std::setw(12) << to_string(r.algorithm) << std::setw(13) << r.status
          << std::right << std::setw(12) << r.rounds << std::setw(16) << r.evals << std::setw(14)
          << std::fixed << std::setprecision(2) << r.wall_ms << '\n';
      out.unsetf(std::ios::fixed);
    }
    return kExitOk;
  });
}

}  // namespace sdig::cli
