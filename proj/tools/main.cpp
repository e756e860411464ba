// cvbenson: approximate the upper image of a convex vector optimization problem.

#include "benson/certify.hpp"
#include "benson/duality.hpp"
#include "benson/engine.hpp"
#include "benson/io.hpp"

#include "CLI11.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

enum Exit { kOk = 0, kUsage = 2, kModel = 3, kEngine = 4, kMaxIter = 5 };

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("cvbenson");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("BENSON_LOG");
  const std::string level = env ? env : "warn";
  spdlog::set_level(spdlog::level::from_str(level));
}

int report(const benson::Error& e, int code) {
  std::cerr << benson::error_json(e.kind(), e.what()) << "\n";
  return code;
}

bool is_model_error(const std::string& kind) {
  return kind == "ParseError" || kind == "ConvexityError" || kind == "ConeError" || kind == "DomainError";
}

struct RunArgs {
  std::string problem;
  double epsilon = 0.05;
  std::string algorithm = "primal";
  std::string brk = "on";
  std::string variant = "fine";
  std::string out = "out";
  std::uint64_t seed = 1;
  int max_iter = 500;
  std::string format = "csv";
  bool cache = true;
  bool certify = true;
  int threads = 1;
};

int run_command(const RunArgs& a) {
  using namespace benson;
  try {
    const CvopProblem prob = load_problem(a.problem);
    const DualFrame frame = DualFrame::for_problem(prob);
    RunConfig cfg;
    cfg.epsilon = a.epsilon;
    cfg.algorithm = a.algorithm == "dual" ? Algorithm::Dual : Algorithm::Primal;
    cfg.break_mode = a.brk == "off" ? BreakMode::NoBreak : BreakMode::Break;
    cfg.granularity = a.variant == "alt" ? Granularity::Alternative : Granularity::Fine;
    cfg.max_iterations = a.max_iter;
    cfg.cache = a.cache;
    cfg.threads = a.threads;
    const OutputFormat fmt = a.format == "json" ? OutputFormat::Json : OutputFormat::Csv;
    CertifyOptions copts;
    copts.seed = a.seed;

    auto finish = [&](const EpsilonSolution& sol) {
      std::optional<CertificationReport> rep;
      if (a.certify) rep = certify(sol, prob, frame, a.epsilon, copts);
      write_outputs(a.out, prob.name, sol, rep ? &*rep : nullptr, fmt);
      std::cout << stats_csv(sol);
      if (rep && !rep->all_pass()) spdlog::warn("certification failed; see solution.json");
    };
    try {
      finish(run(prob, frame, cfg));
    } catch (const MaxIterationsError& e) {
      finish(e.partial());
      return report(e, kMaxIter);
    }
    return kOk;
  } catch (const Error& e) {
    return report(e, is_model_error(e.kind()) ? kModel : kEngine);
  } catch (const std::exception& e) {
    std::cerr << error_json("InternalError", e.what()) << "\n";
    return kEngine;
  }
}

int certify_command(const std::string& bundle, const std::string& problem, double tol, std::uint64_t seed) {
  using namespace benson;
  try {
    const ResultBundle b = load_bundle(bundle);
    CertificationReport rep;
    if (problem.empty()) {
      rep = certify_geometry(b.solution, b.solution.epsilon, tol);
    } else {
      const CvopProblem prob = load_problem(problem);
      CertifyOptions opts;
      opts.tol = tol;
      opts.seed = seed;
      rep = certify(b.solution, prob, DualFrame::for_problem(prob), b.solution.epsilon, opts);
    }
    std::cout << report_to_json(rep) << "\n";
    return rep.all_pass() ? kOk : kEngine;
  } catch (const Error& e) {
    return report(e, is_model_error(e.kind()) ? kModel : kEngine);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Inner and outer polyhedral approximations for convex vector optimization"};
  app.require_subcommand(0, 1);

  RunArgs a;
  app.add_option("--problem", a.problem, "Problem file (JSON)")->check(CLI::ExistingFile);
  app.add_option("--epsilon", a.epsilon, "Approximation error")->check(CLI::PositiveNumber);
  app.add_option("--algorithm", a.algorithm)->check(CLI::IsMember({"primal", "dual"}));
  app.add_option("--break", a.brk, "Leave the vertex loop at the first cut")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--variant", a.variant)->check(CLI::IsMember({"fine", "alt"}));
  app.add_option("--out", a.out, "Output directory");
  app.add_option("--seed", a.seed, "Seed of the certification sampler");
  app.add_option("--max-iter", a.max_iter)->check(CLI::PositiveNumber);
  app.add_option("--format", a.format)->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", a.threads, "Workers for --break off")->check(CLI::PositiveNumber);
  app.add_flag("--cache,!--no-cache", a.cache, "Reuse accepted vertices between iterations");
  app.add_flag("--certify,!--no-certify", a.certify, "Certify the result");

  auto* cert = app.add_subcommand("certify", "Check a saved solution.json");
  std::string bundle;
  std::string cert_problem;
  double tol = 1e-6;
  cert->add_option("bundle", bundle, "solution.json")->required()->check(CLI::ExistingFile);
  cert->add_option("--problem", cert_problem, "Problem file; enables the solver-based checks")
      ->check(CLI::ExistingFile);
  cert->add_option("--tol", tol)->check(CLI::PositiveNumber);
  cert->add_option("--seed", a.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    std::cerr << benson::error_json("UsageError", e.what()) << "\n";
    return kUsage;
  }
  if (cert->parsed()) return certify_command(bundle, cert_problem, tol, a.seed);
  if (a.problem.empty()) {
    std::cerr << benson::error_json("UsageError", "--problem is required") << "\n";
    return kUsage;
  }
  return run_command(a);
}
