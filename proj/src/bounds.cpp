#include "hrtrap/bounds.hpp"

#include <bit>
#include <sstream>
#include <stdexcept>

#include "hrtrap/hurwitz_radon.hpp"

namespace hrtrap {

namespace {

constexpr BoundRule kLowerBoundRules[] = {BoundRule::PaperCorN4, BoundRule::Boltyansky, BoundRule::CohenHandel,
                                          BoundRule::Chisholm, BoundRule::Bcclz};

bool is_power_of_two(std::int64_t d) { return d > 0 && std::has_single_bit(static_cast<std::uint64_t>(d)); }

}  // namespace

const char* to_string(BoundRule rule) {
  switch (rule) {
    case BoundRule::PaperThm1: return "paper_thm1";
    case BoundRule::PaperThm2: return "paper_thm2";
    case BoundRule::PaperCorN4: return "paper_cor_n4";
    case BoundRule::Boltyansky: return "boltyansky";
    case BoundRule::CohenHandel: return "cohen_handel";
    case BoundRule::Chisholm: return "chisholm";
    case BoundRule::Bcclz: return "bcclz";
  }
  return "?";
}

BoundRule bound_rule_from_string(const std::string& s) {
  for (auto r : {BoundRule::PaperThm1, BoundRule::PaperThm2, BoundRule::PaperCorN4, BoundRule::Boltyansky,
                 BoundRule::CohenHandel, BoundRule::Chisholm, BoundRule::Bcclz}) {
    if (s == to_string(r)) return r;
  }
  throw std::invalid_argument("unknown bound rule '" + s + "'");
}

std::string citation(BoundRule rule) {
  switch (rule) {
    case BoundRule::PaperThm1: return "trapezoid theorem: embeddings into R^n with n <= 2d+rho(d)-1 are degenerate";
    case BoundRule::PaperThm2: return "trapezoid theorem: embeddings into R^n with n <= 2d+2^gamma(d)-1 are degenerate";
    case BoundRule::PaperCorN4: return "n(d;4) >= 2d+2^gamma(d)+1";
    case BoundRule::Boltyansky: return "Boltyansky-Ryzhkov-Shashkin 1960: n(d;2k) >= (d+1)k";
    case BoundRule::CohenHandel: return "Cohen-Handel 1978: n(2;k) >= 2k-alpha(k)";
    case BoundRule::Chisholm: return "Chisholm: n(2^l;k) >= 2^l(k-alpha(k))+alpha(k)";
    case BoundRule::Bcclz: return "Blagojevic-Cohen-Crabb-Lueck-Ziegler: (d-e-1)(k-alpha(k))+e(alpha(k)-eps(k))+k";
  }
  return "";
}

std::optional<BigInt> compute_bound(BoundRule rule, std::int64_t d, std::int64_t k) {
  if (d < 1) throw std::invalid_argument("compute_bound: d must be at least 1");
  if (k < 2) throw std::invalid_argument("compute_bound: k must be at least 2");
  const BigInt D = d;
  const BigInt K = k;
  switch (rule) {
    case BoundRule::PaperThm1:
      if (k != 4) return std::nullopt;
      return 2 * D + decompose(d).rho - 1;
    case BoundRule::PaperThm2:
      if (k != 4) return std::nullopt;
      return 2 * D + (BigInt(1) << decompose(d).gamma) - 1;
    case BoundRule::PaperCorN4:
      if (k != 4) return std::nullopt;
      return 2 * D + (BigInt(1) << decompose(d).gamma) + 1;
    case BoundRule::Boltyansky:
      if (k % 2 != 0) return std::nullopt;
      return (D + 1) * (K / 2);
    case BoundRule::CohenHandel:
      if (d != 2) return std::nullopt;
      return 2 * K - alpha_ones(k);
    case BoundRule::Chisholm: {
      if (!is_power_of_two(d)) return std::nullopt;
      const int a = alpha_ones(k);
      return D * (K - a) + a;
    }
    case BoundRule::Bcclz: {
      if (d < 2) return std::nullopt;
      const int t = std::bit_width(static_cast<std::uint64_t>(d)) - 1;
      const BigInt e = D - (BigInt(1) << t);
      const int a = alpha_ones(k);
      const int eps = static_cast<int>(k % 2);
      return (D - e - 1) * (K - a) + e * (a - eps) + K;
    }
  }
  return std::nullopt;
}

BoundReport compare_table(std::int64_t d, std::int64_t k) {
  BoundReport report;
  report.d = d;
  report.k = k;
  report.best = k;
  for (auto rule : kLowerBoundRules) {
    auto value = compute_bound(rule, d, k);
    if (value && *value > report.best) report.best = *value;
    report.entries.push_back({rule, std::move(value), citation(rule)});
  }
  if (d == 1) report.context.push_back({"exact_n(1;k)", BigInt(k), "moment curve t -> (1,t,...,t^(k-1)) is k-regular"});
  if (k == 2) report.context.push_back({"exact_n(d;2)", BigInt(d) + 1, "x -> (x,1) is 2-regular"});
  if (k == 3) report.context.push_back({"exact_n(d;3)", BigInt(d) + 2, "x -> (h(x),1), h: R^d -> S^d, is 3-regular"});
  if (k == 4) {
    for (auto rule : {BoundRule::PaperThm1, BoundRule::PaperThm2}) {
      report.context.push_back({std::string(to_string(rule)) + "_threshold", *compute_bound(rule, d, k),
                                "affine target dimension obstructed: " + citation(rule)});
    }
  }
  report.context.push_back({"trivial_floor", BigInt(k), "k linearly independent vectors need n >= k"});
  return report;
}

std::string format_report_text(const BoundReport& report) {
  std::ostringstream os;
  os << "lower bounds for n(d=" << report.d << ", k=" << report.k << ")\n";
  for (const auto& e : report.entries) {
    os << "  " << to_string(e.rule) << ": " << (e.value ? e.value->str() : std::string("n/a")) << "   ["
       << e.citation << "]\n";
  }
  os << "context\n";
  for (const auto& c : report.context) os << "  " << c.label << ": " << c.value.str() << "   [" << c.note << "]\n";
  os << "best: " << report.best.str() << "\n";
  return os.str();
}

std::string format_report_csv(const BoundReport& report) {
  std::ostringstream os;
  auto quoted = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
  };
  os << "d,k,rule,value,citation\n";
  for (const auto& e : report.entries) {
    os << report.d << "," << report.k << "," << to_string(e.rule) << ","
       << (e.value ? e.value->str() : std::string("n/a")) << "," << quoted(e.citation) << "\n";
  }
  for (const auto& c : report.context) {
    os << report.d << "," << report.k << "," << c.label << "," << c.value.str() << "," << quoted(c.note) << "\n";
  }
  os << report.d << "," << report.k << ",best," << report.best.str() << "," << quoted("max over applicable rules")
     << "\n";
  return os.str();
}

}  // namespace hrtrap
