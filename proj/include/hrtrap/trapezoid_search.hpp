#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hrtrap/certificate.hpp"
#include "hrtrap/embedding.hpp"
#include "hrtrap/hurwitz_radon.hpp"
#include "hrtrap/test_function.hpp"

namespace hrtrap {

struct SearchOptions {
  std::size_t starts = 64;
  int max_iterations = 200;
  /// Accept a zero when |phi| <= residual_tolerance * (1 + max |f| over the box).
  double residual_tolerance = 1e-9;
  double validation_tolerance = 1e-6;
  std::uint64_t seed = 0;
  Variant variant = Variant::Thm1;
  /// Multipliers on the barrier weight 1e3 * max(|phi(start)|^2, 1).
  double separation_weight = 1.0;
  double pair_weight = 1.0;
  /// Initial x, y are sampled uniformly from [-box, box]^d.
  double box = 1.0;
  /// Weights t are kept above this floor by a barrier.
  double t_floor = 1e-3;
  /// Worker threads; 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Throws std::invalid_argument for starts == 0, non-positive tolerances or box.
void validate_options(const SearchOptions& opts);

struct FailureReport {
  std::size_t starts = 0;
  double best_residual = 0.0;
  std::size_t converged_but_rejected = 0;
  std::size_t nonfinite_starts = 0;
  std::vector<std::string> rejection_reasons;
};

struct SearchResult {
  std::optional<Certificate> certificate;
  FailureReport failure;
  std::vector<std::string> warnings;
  bool found() const { return certificate.has_value(); }
};

/// Largest n for which the chosen variant guarantees a zero:
/// 2d + rho - 1 (thm1) or 2d + 2^gamma - 1 (thm2).
std::int64_t guaranteed_dimension(std::int64_t d, Variant variant);

/// Multistart search for a zero of phi. Deterministic for a fixed seed,
/// independent of the number of threads.
SearchResult search(const Embedding& f, const HRFamily& fam, const SearchOptions& opts);

struct RefineResult {
  PhiPoint point;
  double residual = 0.0;
  int iterations = 0;
  bool diverged = false;
  /// Penalized objective after each accepted step.
  std::vector<double> objective_history;
};

/// Local damped least-squares descent on |phi|^2 plus barriers from `start`.
/// The returned point never has a larger |phi| than the start.
RefineResult refine(const Embedding& f, const HRFamily& fam, const PhiPoint& start, const SearchOptions& opts);

nlohmann::json failure_report_to_json(const FailureReport& report, const std::vector<std::string>& warnings,
                                      const std::string& embedding_digest);

}  // namespace hrtrap
