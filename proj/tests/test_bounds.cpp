#include <doctest.h>

#include "hrtrap/bounds.hpp"
#include "hrtrap/hurwitz_radon.hpp"

using namespace hrtrap;

namespace {

BigInt value(BoundRule rule, std::int64_t d, std::int64_t k) {
  const auto v = compute_bound(rule, d, k);
  REQUIRE(v.has_value());
  return *v;
}

// Integer transcriptions with plain 64-bit arithmetic.
std::int64_t popcount(std::int64_t k) { return __builtin_popcountll(static_cast<unsigned long long>(k)); }

std::int64_t bcclz_ref(std::int64_t d, std::int64_t k) {
  std::int64_t t = 0;
  while ((std::int64_t{2} << t) <= d) ++t;
  const std::int64_t e = d - (std::int64_t{1} << t);
  const std::int64_t a = popcount(k);
  const std::int64_t eps = (k % 2 == 0) ? 0 : 1;
  return (d - e - 1) * (k - a) + e * (a - eps) + k;
}

}  // namespace

TEST_CASE("rule names round trip") {
  for (auto r : {BoundRule::PaperThm1, BoundRule::PaperThm2, BoundRule::PaperCorN4, BoundRule::Boltyansky,
                 BoundRule::CohenHandel, BoundRule::Chisholm, BoundRule::Bcclz}) {
    CHECK(bound_rule_from_string(to_string(r)) == r);
    CHECK_FALSE(citation(r).empty());
  }
  CHECK_THROWS_AS(bound_rule_from_string("nope"), std::invalid_argument);
}

TEST_CASE("bound examples") {
  CHECK(value(BoundRule::PaperCorN4, 16, 4) == 49);
  CHECK(value(BoundRule::Chisholm, 16, 4) == 49);
  CHECK(value(BoundRule::PaperCorN4, 6, 4) == 15);
  CHECK(value(BoundRule::Bcclz, 6, 4) == 15);
  for (std::int64_t d = 1; d <= 20; ++d) CHECK(value(BoundRule::Boltyansky, d, 2) == d + 1);
  CHECK(value(BoundRule::Chisholm, 32, 4) == 97);
  CHECK(value(BoundRule::PaperCorN4, 32, 4) == 81);
  CHECK(value(BoundRule::PaperThm1, 2, 4) == 5);
  CHECK(value(BoundRule::PaperThm2, 16, 4) == 47);
}

TEST_CASE("not applicable outside preconditions") {
  CHECK_FALSE(compute_bound(BoundRule::PaperCorN4, 4, 6).has_value());
  CHECK_FALSE(compute_bound(BoundRule::PaperThm1, 4, 3).has_value());
  CHECK_FALSE(compute_bound(BoundRule::Boltyansky, 4, 5).has_value());
  CHECK_FALSE(compute_bound(BoundRule::CohenHandel, 3, 4).has_value());
  CHECK_FALSE(compute_bound(BoundRule::Chisholm, 6, 4).has_value());
  CHECK_FALSE(compute_bound(BoundRule::Bcclz, 1, 4).has_value());
  CHECK_THROWS_AS(compute_bound(BoundRule::Boltyansky, 0, 4), std::invalid_argument);
  CHECK_THROWS_AS(compute_bound(BoundRule::Boltyansky, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(compare_table(0, 4), std::invalid_argument);
}

TEST_CASE("compare table examples") {
  const auto r = compare_table(2, 4);
  auto entry = [&](BoundRule rule) {
    for (const auto& e : r.entries) {
      if (e.rule == rule) return e.value;
    }
    return std::optional<BigInt>{};
  };
  CHECK(entry(BoundRule::CohenHandel) == BigInt(7));
  CHECK(entry(BoundRule::Bcclz) == BigInt(7));
  CHECK(entry(BoundRule::PaperCorN4) == BigInt(7));
  CHECK(entry(BoundRule::Boltyansky) == BigInt(6));
  CHECK(r.best == 7);

  const auto one = compare_table(1, 5);
  bool found = false;
  for (const auto& row : one.context) found = found || (row.label.find("n(1") != std::string::npos && row.value == 5);
  CHECK(found);
  for (const auto& e : one.entries) {
    if (e.rule == BoundRule::Bcclz || e.rule == BoundRule::CohenHandel || e.rule == BoundRule::PaperCorN4) {
      CHECK_FALSE(e.value.has_value());
    }
  }

  const auto fourteen = compare_table(14, 4);
  CHECK(*compute_bound(BoundRule::PaperCorN4, 14, 4) == 31);
  CHECK(*compute_bound(BoundRule::Bcclz, 14, 4) == 31);
  CHECK(fourteen.best >= 31);
}

TEST_CASE("report invariants: best is the max and every value clears the floor") {
  for (std::int64_t d = 1; d <= 40; ++d) {
    for (std::int64_t k = 2; k <= 9; ++k) {
      const auto r = compare_table(d, k);
      BigInt best = k;
      for (const auto& e : r.entries) {
        if (!e.value) continue;
        CHECK(*e.value >= k);
        best = std::max(best, *e.value);
      }
      CHECK(r.best == best);
      CHECK(compare_table(d, k).entries.size() == r.entries.size());
    }
  }
}

TEST_CASE("agreement family d = 2^l - 2") {
  for (int l = 2; l <= 8; ++l) {
    const std::int64_t d = (std::int64_t{1} << l) - 2;
    const BigInt expect = (BigInt(1) << (l + 1)) - 1;
    CHECK(value(BoundRule::PaperCorN4, d, 4) == expect);
    CHECK(value(BoundRule::Bcclz, d, 4) == expect);
  }
}

TEST_CASE("dominance over Boltyansky for 2 <= d <= 64") {
  for (std::int64_t d = 2; d <= 64; ++d) CHECK(value(BoundRule::PaperCorN4, d, 4) >= value(BoundRule::Boltyansky, d, 4));
}

TEST_CASE("Chisholm crossover") {
  CHECK(value(BoundRule::Chisholm, 16, 4) == value(BoundRule::PaperCorN4, 16, 4));
  for (int l = 5; l <= 20; ++l) {
    const std::int64_t d = std::int64_t{1} << l;
    CHECK(value(BoundRule::Chisholm, d, 4) > value(BoundRule::PaperCorN4, d, 4));
  }
  for (int l = 0; l <= 3; ++l) {
    const std::int64_t d = std::int64_t{1} << l;
    CHECK(value(BoundRule::Chisholm, d, 4) <= value(BoundRule::PaperCorN4, d, 4));
  }
}

TEST_CASE("n(d,4) bound is the extended bound plus two") {
  for (std::int64_t d = 1; d <= 512; ++d) {
    const auto hr = decompose(d);
    CHECK(value(BoundRule::PaperCorN4, d, 4) == value(BoundRule::PaperThm2, d, 4) + 2);
    CHECK(value(BoundRule::PaperThm2, d, 4) == 2 * d + (std::int64_t{1} << hr.gamma) - 1);
  }
}

TEST_CASE("formulas match plain integer transcriptions") {
  for (std::int64_t d = 2; d <= 100; ++d) {
    for (std::int64_t k = 2; k <= 12; ++k) CHECK(value(BoundRule::Bcclz, d, k) == bcclz_ref(d, k));
  }
  for (std::int64_t k = 2; k <= 30; ++k) CHECK(value(BoundRule::CohenHandel, 2, k) == 2 * k - popcount(k));
  for (std::int64_t k = 2; k <= 30; ++k) {
    for (int l = 0; l <= 6; ++l) {
      const std::int64_t d = std::int64_t{1} << l;
      CHECK(value(BoundRule::Chisholm, d, k) == d * (k - popcount(k)) + popcount(k));
    }
  }
}

TEST_CASE("exact arithmetic for huge d") {
  const std::int64_t d = std::int64_t{1} << 60;
  const BigInt expect = BigInt(d) * 3 + 1;
  CHECK(value(BoundRule::Chisholm, d, 4) == expect);
}

TEST_CASE("formatting") {
  const auto r = compare_table(6, 4);
  const auto csv = format_report_csv(r);
  CHECK(csv.rfind("d,k,rule,value,citation\n", 0) == 0);
  CHECK(csv.find("6,4,paper_cor_n4,15,") != std::string::npos);
  CHECK(csv.find("6,4,bcclz,15,") != std::string::npos);
  CHECK(csv.find("n/a") != std::string::npos);
  const auto text = format_report_text(r);
  CHECK(text.find("15") != std::string::npos);
}
