#include "hrtrap/trapezoid_search.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "hrtrap/levenberg_marquardt.hpp"

namespace hrtrap {

using nlohmann::json;

void validate_options(const SearchOptions& opts) {
  if (opts.starts < 1) throw std::invalid_argument("search: starts must be at least 1");
  if (opts.max_iterations < 1) throw std::invalid_argument("search: max_iterations must be at least 1");
  if (!(opts.residual_tolerance > 0.0)) throw std::invalid_argument("search: residual_tolerance must be positive");
  if (!(opts.validation_tolerance > 0.0)) throw std::invalid_argument("search: validation_tolerance must be positive");
  if (!(opts.box > 0.0)) throw std::invalid_argument("search: box must be positive");
  if (!(opts.t_floor >= 0.0 && opts.t_floor < 0.5)) throw std::invalid_argument("search: t_floor must lie in [0, 0.5)");
  if (opts.separation_weight < 0.0 || opts.pair_weight < 0.0) {
    throw std::invalid_argument("search: penalty weights must be non-negative");
  }
}

std::int64_t guaranteed_dimension(std::int64_t d, Variant variant) {
  const auto hr = decompose(d);
  return variant == Variant::Thm1 ? 2 * d + hr.rho - 1 : 2 * d + (std::int64_t{1} << hr.gamma) - 1;
}

namespace {

double logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }
double logit(double t) { return std::log(t / (1.0 - t)); }

// Unknowns (s1, x1, y1, s2, x2, y2, z[, w]) with t_i = logistic(s_i).
// Residual: phi followed by hinge barriers on |x_i - y_i|, dist(p1, p2) and t_i.
class PhiProblem final : public LeastSquaresProblem {
 public:
  PhiProblem(const Embedding& f, const HRFamily& fam, bool with_w, double sep_margin, double pair_margin,
             double t_floor, double sep_weight, double pair_weight)
      : f_(f),
        fam_(fam),
        with_w_(with_w),
        d_(static_cast<int>(fam.dim())),
        rho_(fam.rho()),
        wd_(with_w ? w_dimension(fam) : 0),
        sep_margin_(sep_margin),
        pair_margin_(pair_margin),
        t_floor_(t_floor),
        sep_root_(std::sqrt(sep_weight)),
        pair_root_(std::sqrt(pair_weight)) {}

  static constexpr int kBarriers = 5;

  int size() const { return 2 * (2 * d_ + 1) + rho_ + wd_; }

  Vec pack(const PhiPoint& p) const {
    Vec x(size());
    x(0) = logit(p.p1.t);
    x.segment(1, d_) = p.p1.x;
    x.segment(1 + d_, d_) = p.p1.y;
    const int o = 2 * d_ + 1;
    x(o) = logit(p.p2.t);
    x.segment(o + 1, d_) = p.p2.x;
    x.segment(o + 1 + d_, d_) = p.p2.y;
    x.segment(2 * o, rho_) = p.z;
    if (with_w_) x.segment(2 * o + rho_, wd_) = *p.w;
    return x;
  }

  PhiPoint unpack(const Vec& x) const {
    PhiPoint p;
    const int o = 2 * d_ + 1;
    p.p1 = {logistic(x(0)), x.segment(1, d_), x.segment(1 + d_, d_)};
    p.p2 = {logistic(x(o)), x.segment(o + 1, d_), x.segment(o + 1 + d_, d_)};
    p.z = x.segment(2 * o, rho_);
    if (with_w_) p.w = x.segment(2 * o + rho_, wd_);
    return p;
  }

  Vec residual(const Vec& x) const override {
    const PhiPoint p = unpack(x);
    const Vec value = detail::phi_raw(f_, fam_, p);
    Vec r(value.size() + kBarriers);
    r.head(value.size()) = value;
    r.tail(kBarriers) = barriers(p);
    return r;
  }

  Mat jacobian(const Vec& x) const override {
    const PhiPoint p = unpack(x);
    const int o = 2 * d_ + 1;
    const int n = f_.n();
    Mat jac = Mat::Zero(n + kBarriers, size());
    Mat core = detail::phi_jacobian_raw(f_, fam_, p);
    core.col(0) *= p.p1.t * (1.0 - p.p1.t);
    core.col(o) *= p.p2.t * (1.0 - p.p2.t);
    // Tangent projection for sphere coordinates.
    core.middleCols(2 * o, rho_) *= Mat::Identity(rho_, rho_) - p.z * p.z.transpose();
    if (with_w_) core.middleCols(2 * o + rho_, wd_) *= Mat::Identity(wd_, wd_) - *p.w * p.w->transpose();
    jac.topRows(n) = core;

    // Barrier rows: r = root * max(0, margin^2 - |v|^2) etc.
    const auto sep_row = [&](int row, const ConfigTriple& c, int x_off) {
      const Vec v = c.x - c.y;
      if (sep_margin_ * sep_margin_ - v.squaredNorm() <= 0.0) return;
      jac.block(n + row, x_off, 1, d_) = -2.0 * sep_root_ * v.transpose();
      jac.block(n + row, x_off + d_, 1, d_) = 2.0 * sep_root_ * v.transpose();
    };
    sep_row(0, p.p1, 1);
    sep_row(1, p.p2, o + 1);
    const double dt = p.p1.t - p.p2.t;
    const Vec dx = p.p1.x - p.p2.x;
    const Vec dy = p.p1.y - p.p2.y;
    const double dist_sq = dt * dt + dx.squaredNorm() + dy.squaredNorm();
    if (pair_margin_ * pair_margin_ - dist_sq > 0.0) {
      const int row = n + 2;
      jac(row, 0) = -2.0 * pair_root_ * dt * p.p1.t * (1.0 - p.p1.t);
      jac(row, o) = 2.0 * pair_root_ * dt * p.p2.t * (1.0 - p.p2.t);
      jac.block(row, 1, 1, d_) = -2.0 * pair_root_ * dx.transpose();
      jac.block(row, 1 + d_, 1, d_) = -2.0 * pair_root_ * dy.transpose();
      jac.block(row, o + 1, 1, d_) = 2.0 * pair_root_ * dx.transpose();
      jac.block(row, o + 1 + d_, 1, d_) = 2.0 * pair_root_ * dy.transpose();
    }
    const double t_root = sep_root_;
    if (p.p1.t < t_floor_) jac(n + 3, 0) = -t_root * p.p1.t * (1.0 - p.p1.t);
    if (p.p2.t < t_floor_) jac(n + 4, o) = -t_root * p.p2.t * (1.0 - p.p2.t);
    return jac;
  }

  Vec retract(const Vec& x, const Vec& step) const override {
    Vec out = x + step;
    const int o = 2 * (2 * d_ + 1);
    const double zn = out.segment(o, rho_).norm();
    if (zn > 0.0) out.segment(o, rho_) /= zn;
    if (with_w_) {
      const double wn = out.segment(o + rho_, wd_).norm();
      if (wn > 0.0) out.segment(o + rho_, wd_) /= wn;
    }
    return out;
  }

 private:
  Vec barriers(const PhiPoint& p) const {
    Vec b(kBarriers);
    b(0) = sep_root_ * std::max(0.0, sep_margin_ * sep_margin_ - (p.p1.x - p.p1.y).squaredNorm());
    b(1) = sep_root_ * std::max(0.0, sep_margin_ * sep_margin_ - (p.p2.x - p.p2.y).squaredNorm());
    const double dist = pair_distance(p.p1, p.p2);
    b(2) = pair_root_ * std::max(0.0, pair_margin_ * pair_margin_ - dist * dist);
    b(3) = sep_root_ * std::max(0.0, t_floor_ - p.p1.t);
    b(4) = sep_root_ * std::max(0.0, t_floor_ - p.p2.t);
    return b;
  }

  const Embedding& f_;
  const HRFamily& fam_;
  bool with_w_;
  int d_;
  int rho_;
  int wd_;
  double sep_margin_;
  double pair_margin_;
  double t_floor_;
  double sep_root_;
  double pair_root_;
};

RefineResult refine_impl(const Embedding& f, const HRFamily& fam, const PhiPoint& start, const SearchOptions& opts,
                         double target_norm) {
  const double scale = configuration_scale(start);
  const Vec phi0 = detail::phi_raw(f, fam, start);
  const double start_residual = phi0.norm();
  RefineResult out{start, start_residual, 0, false, {}};
  if (!std::isfinite(start_residual)) {
    out.diverged = true;
    return out;
  }
  const double weight = 1e3 * std::max(phi0.squaredNorm(), 1.0);
  const PhiProblem problem(f, fam, start.w.has_value(), 2.0 * kSeparationTol * scale, 2.0 * kPairTol * scale,
                           opts.t_floor, weight * opts.separation_weight, weight * opts.pair_weight);
  LmOptions lm;
  lm.max_iterations = opts.max_iterations;
  lm.target_norm = target_norm;
  const auto res = levenberg_marquardt(problem, problem.pack(start), lm);
  out.iterations = res.iterations;
  out.objective_history = res.cost_history;
  if (res.diverged) {
    out.diverged = true;
    return out;
  }
  PhiPoint found = problem.unpack(res.x);
  const double residual = detail::phi_raw(f, fam, found).norm();
  if (std::isfinite(residual) && residual <= start_residual) {
    out.point = std::move(found);
    out.residual = residual;
  }
  return out;
}

std::uint64_t start_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 of the (seed, index) pair
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(index) + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vec random_sphere_point(int dim, std::mt19937_64& rng, int sign_choice) {
  if (dim == 1) return Vec::Constant(1, sign_choice % 2 == 0 ? 1.0 : -1.0);
  std::normal_distribution<double> gauss;
  Vec v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
  } while (v.norm() < 1e-8);
  return v.normalized();
}

ConfigTriple random_triple(int d, double box, double min_sep, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-box, box);
  std::uniform_real_distribution<double> weight(0.05, 0.95);
  ConfigTriple c;
  c.t = weight(rng);
  c.x.resize(d);
  c.y.resize(d);
  do {
    for (int i = 0; i < d; ++i) c.x(i) = coord(rng);
    for (int i = 0; i < d; ++i) c.y(i) = coord(rng);
  } while ((c.x - c.y).norm() < min_sep);
  return c;
}

struct StartOutcome {
  std::optional<Certificate> certificate;
  double residual = std::numeric_limits<double>::infinity();
  bool nonfinite = false;
  std::string rejection;
};

}  // namespace

RefineResult refine(const Embedding& f, const HRFamily& fam, const PhiPoint& start, const SearchOptions& opts) {
  validate_options(opts);
  if (f.d() != fam.dim()) throw std::invalid_argument("refine: embedding and family dimensions differ");
  const auto check = check_phi_point(fam, start);
  if (!check.ok()) throw InvariantError("refine: " + check.describe());
  return refine_impl(f, fam, start, opts, 0.0);
}

SearchResult search(const Embedding& f, const HRFamily& fam, const SearchOptions& opts) {
  validate_options(opts);
  if (f.d() != fam.dim()) {
    throw std::invalid_argument("search: embedding domain " + std::to_string(f.d()) + " does not match family d = " +
                                std::to_string(fam.dim()));
  }
  SearchResult result;
  const auto bound = guaranteed_dimension(f.d(), opts.variant);
  if (f.n() > bound) {
    result.warnings.push_back("n = " + std::to_string(f.n()) + " exceeds " + std::to_string(bound) +
                              ", the largest target dimension for which " + to_string(opts.variant) +
                              " guarantees a zero; search is best effort");
  }

  const int d = f.d();
  const bool with_w = opts.variant == Variant::Thm2;
  const int wd = w_dimension(fam);

  // Scale of f over the sampling box, for the acceptance threshold.
  double f_scale = 0.0;
  {
    std::mt19937_64 rng(start_seed(opts.seed, static_cast<std::size_t>(-1)));
    std::uniform_real_distribution<double> coord(-2.0 * opts.box, 2.0 * opts.box);
    for (int i = 0; i < 64; ++i) {
      Vec x(d);
      for (int k = 0; k < d; ++k) x(k) = coord(rng);
      try {
        const double v = f.eval(x).cwiseAbs().maxCoeff();
        if (std::isfinite(v)) f_scale = std::max(f_scale, v);
      } catch (const std::exception&) {
      }
    }
  }
  const double accept = opts.residual_tolerance * (1.0 + f_scale);

  auto run_start = [&](std::size_t index) {
    StartOutcome out;
    std::mt19937_64 rng(start_seed(opts.seed, index));
    PhiPoint start;
    start.p1 = random_triple(d, opts.box, 2.0 * kSeparationTol * std::max(1.0, opts.box), rng);
    start.p2 = random_triple(d, opts.box, 2.0 * kSeparationTol * std::max(1.0, opts.box), rng);
    start.z = random_sphere_point(fam.rho(), rng, static_cast<int>(index));
    if (with_w) start.w = random_sphere_point(wd, rng, static_cast<int>(index / 2));
    try {
      const auto refined = refine_impl(f, fam, start, opts, 1e-4 * accept);
      out.residual = refined.residual;
      if (refined.diverged || !std::isfinite(refined.residual)) {
        out.nonfinite = true;
        out.rejection = "non-finite values";
        return out;
      }
      if (refined.residual > accept) {
        out.rejection = "residual above tolerance";
        return out;
      }
      const auto check = check_phi_point(fam, refined.point);
      if (!check.ok()) {
        out.rejection = "domain invariant: " + check.describe();
        return out;
      }
      auto cert = extract_certificate(f, fam, refined.point, accept);
      cert.start_index = index;
      cert.iterations = refined.iterations;
      const auto report = validate_certificate(f, cert, opts.validation_tolerance);
      if (!report.passed()) {
        out.rejection = "certificate failed validation";
        return out;
      }
      out.certificate = std::move(cert);
    } catch (const InvalidCertificate& e) {
      out.rejection = std::string("invalid certificate: ") + e.what();
    } catch (const std::exception& e) {
      out.nonfinite = true;
      out.rejection = e.what();
    }
    return out;
  };

  std::vector<StartOutcome> outcomes(opts.starts);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> first_success{opts.starts};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= opts.starts || i > first_success.load()) return;
      outcomes[i] = run_start(i);
      if (outcomes[i].certificate) {
        std::size_t cur = first_success.load();
        while (i < cur && !first_success.compare_exchange_weak(cur, i)) {
        }
      }
    }
  };
  unsigned threads = opts.threads ? opts.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, opts.starts));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const std::size_t winner = first_success.load();
  if (winner < opts.starts) {
    result.certificate = std::move(outcomes[winner].certificate);
    return result;
  }
  auto& fail = result.failure;
  fail.starts = opts.starts;
  fail.best_residual = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < opts.starts; ++i) {
    const auto& o = outcomes[i];
    fail.best_residual = std::min(fail.best_residual, o.residual);
    if (o.nonfinite) ++fail.nonfinite_starts;
    if (o.rejection != "residual above tolerance" && !o.nonfinite) ++fail.converged_but_rejected;
    fail.rejection_reasons.push_back(o.rejection);
  }
  return result;
}

json failure_report_to_json(const FailureReport& report, const std::vector<std::string>& warnings,
                            const std::string& embedding_digest) {
  json j;
  j["format"] = "hrtrap-failure";
  j["version"] = 1;
  j["embedding_digest"] = embedding_digest;
  j["starts"] = report.starts;
  j["best_residual"] = report.best_residual;
  j["converged_but_rejected"] = report.converged_but_rejected;
  j["nonfinite_starts"] = report.nonfinite_starts;
  j["rejection_reasons"] = report.rejection_reasons;
  j["warnings"] = warnings;
  return j;
}

}  // namespace hrtrap
