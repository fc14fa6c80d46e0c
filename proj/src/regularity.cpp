#include <limits>
#include <random>

#include "hrtrap/embedding.hpp"

namespace hrtrap {

namespace {

void require_distinct(const Tuple& tuple, std::size_t index) {
  for (std::size_t a = 0; a < tuple.size(); ++a) {
    for (std::size_t b = a + 1; b < tuple.size(); ++b) {
      if (tuple[a] == tuple[b]) {
        throw std::invalid_argument("regularity check: tuple " + std::to_string(index) +
                                    " contains coincident points");
      }
    }
  }
}

// Columns of `m` are independent iff sigma_min > tol * sigma_max.
void record(RegularityReport& report, std::size_t index, const Mat& m) {
  const Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double smin = s.size() ? s(s.size() - 1) : 0.0;
  report.min_singular_value = std::min(report.min_singular_value, smin);
  const double ratio = smax > 0.0 ? smin / smax : 0.0;
  if (!(smin > kRegularityTolerance * smax) || smax == 0.0) report.failures.push_back({index, ratio});
}

RegularityReport all_failed(int k, std::span<const Tuple> tuples) {
  RegularityReport r;
  r.k = k;
  r.tuples_checked = tuples.size();
  r.min_singular_value = 0.0;
  for (std::size_t i = 0; i < tuples.size(); ++i) r.failures.push_back({i, 0.0});
  return r;
}

}  // namespace

RegularityReport check_k_regular_on_tuples(const Embedding& f, int k, std::span<const Tuple> tuples) {
  if (k < 1) throw std::invalid_argument("check_k_regular_on_tuples: k must be positive");
  if (k > f.n()) return all_failed(k, tuples);
  RegularityReport report;
  report.k = k;
  report.min_singular_value = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const auto& tuple = tuples[t];
    if (static_cast<int>(tuple.size()) != k) {
      throw std::invalid_argument("check_k_regular_on_tuples: tuple " + std::to_string(t) + " does not have k points");
    }
    require_distinct(tuple, t);
    Mat images(f.n(), k);
    for (int i = 0; i < k; ++i) images.col(i) = f.eval(tuple[static_cast<std::size_t>(i)]);
    record(report, t, images);
    ++report.tuples_checked;
  }
  return report;
}

RegularityReport check_affine_regular_on_tuples(const Embedding& f, int j, std::span<const Tuple> tuples) {
  if (j < 1) throw std::invalid_argument("check_affine_regular_on_tuples: j must be positive");
  if (j > f.n()) return all_failed(j, tuples);
  RegularityReport report;
  report.k = j;
  report.min_singular_value = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const auto& tuple = tuples[t];
    if (static_cast<int>(tuple.size()) != j + 1) {
      throw std::invalid_argument("check_affine_regular_on_tuples: tuple " + std::to_string(t) +
                                  " does not have j+1 points");
    }
    require_distinct(tuple, t);
    const Vec base = f.eval(tuple[0]);
    Mat diffs(f.n(), j);
    for (int i = 1; i <= j; ++i) diffs.col(i - 1) = f.eval(tuple[static_cast<std::size_t>(i)]) - base;
    record(report, t, diffs);
    ++report.tuples_checked;
  }
  return report;
}

InjectivityReport injectivity_spot_check(const Embedding& f, double box, std::size_t pairs, double delta,
                                         double eps, std::uint64_t seed) {
  InjectivityReport report;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-box, box);
  for (std::size_t p = 0; p < pairs; ++p) {
    Vec a(f.d());
    Vec b(f.d());
    for (int i = 0; i < f.d(); ++i) a(i) = u(rng);
    for (int i = 0; i < f.d(); ++i) b(i) = u(rng);
    ++report.pairs_checked;
    if ((a - b).norm() > delta && (f.eval(a) - f.eval(b)).norm() < eps) report.suspects.emplace_back(a, b);
  }
  return report;
}

}  // namespace hrtrap
