#pragma once

// Problem files, result bundles and CSV exports.

#include "benson/certify.hpp"
#include "benson/engine.hpp"
#include "benson/problem.hpp"

#include <optional>
#include <string>

namespace benson {

/// Parses a problem document (JSON text), applies the D-cone reduction and
/// finds a strictly feasible witness. `source` names the document in error
/// messages. Throws ParseError, ConvexityError or ConeError.
CvopProblem parse_problem(const std::string& text, const std::string& source = "<string>",
                          const SolverOptions& opts = {});
CvopProblem load_problem(const std::string& path, const SolverOptions& opts = {});

struct ResultBundle {
  std::string problem;
  EpsilonSolution solution;
  std::optional<CertificationReport> report;
};

std::string bundle_to_json(const std::string& problem, const EpsilonSolution& sol, const CertificationReport* report);
ResultBundle bundle_from_json(const std::string& text);
void save_bundle(const std::string& path, const std::string& problem, const EpsilonSolution& sol,
                 const CertificationReport* report);
ResultBundle load_bundle(const std::string& path);

std::string report_to_json(const CertificationReport& report);

enum class OutputFormat { Csv, Json };

/// Writes solution.json and, for Csv, the H/V files of the four polyhedra,
/// stats.csv and the plot files into `dir` (created if missing).
void write_outputs(const std::string& dir, const std::string& problem, const EpsilonSolution& sol,
                   const CertificationReport* report, OutputFormat format);

std::string stats_csv(const EpsilonSolution& sol);

/// {"error": {"kind": ..., "message": ...}}
std::string error_json(const std::string& kind, const std::string& message);

}  // namespace benson
