#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace hrtrap {

using BigInt = boost::multiprecision::cpp_int;

/// Lower-bound rules for n(d, k), the least n admitting a k-regular map R^d -> R^n.
enum class BoundRule {
  /// 2d + rho(d) - 1: largest n where every embedding inscribes a trapezoid (k = 4 only)
  PaperThm1,
  /// 2d + 2^gamma(d) - 1: same, improved exponent (k = 4 only)
  PaperThm2,
  /// n(d,4) >= 2d + 2^gamma(d) + 1
  PaperCorN4,
  /// n(d,k) >= (d+1) k/2 for even k
  Boltyansky,
  /// n(2,k) >= 2k - alpha(k)
  CohenHandel,
  /// n(2^l,k) >= 2^l (k - alpha(k)) + alpha(k)
  Chisholm,
  /// n(d,k) >= (d-e-1)(k-alpha(k)) + e(alpha(k)-eps(k)) + k with d = 2^t + e
  Bcclz,
};

const char* to_string(BoundRule rule);
BoundRule bound_rule_from_string(const std::string& s);
std::string citation(BoundRule rule);

/// Exact value of `rule` at (d, k); std::nullopt when the rule does not apply.
/// Throws std::invalid_argument for d < 1 or k < 2.
std::optional<BigInt> compute_bound(BoundRule rule, std::int64_t d, std::int64_t k);

struct BoundEntry {
  BoundRule rule;
  std::optional<BigInt> value;
  std::string citation;
};

/// Known exact values and affine obstruction thresholds, reported alongside
/// the rules but never counted toward `best`.
struct ContextRow {
  std::string label;
  BigInt value;
  std::string note;
};

struct BoundReport {
  std::int64_t d = 1;
  std::int64_t k = 2;
  std::vector<BoundEntry> entries;
  std::vector<ContextRow> context;
  BigInt best;
};

/// Evaluates every lower-bound rule (PaperCorN4, Boltyansky, CohenHandel,
/// Chisholm, Bcclz, in that order) and collects context rows.
BoundReport compare_table(std::int64_t d, std::int64_t k);

std::string format_report_text(const BoundReport& report);
/// Header row "d,k,rule,value,citation"; not-applicable values print as "n/a".
std::string format_report_csv(const BoundReport& report);

}  // namespace hrtrap
