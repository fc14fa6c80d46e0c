#include <doctest.h>

#include <random>

#include "hrtrap/test_function.hpp"
#include "oracles.hpp"

using namespace hrtrap;

namespace {

Vec scalar(double x) { return Vec::Constant(1, x); }

Embedding parabola() { return Embedding::polynomial(1, {{Monomial{{1}, 1.0}}, {Monomial{{2}, 1.0}}}); }

PhiPoint parabola_zero() {
  return make_phi_point(build_hr_family(1), {0.5, scalar(-0.5), scalar(0.5)}, {0.25, scalar(-1.0), scalar(1.0)},
                        scalar(1.0));
}

PhiPoint swapped(const PhiPoint& p) {
  PhiPoint q = p;
  std::swap(q.p1, q.p2);
  return q;
}

}  // namespace

TEST_CASE("parabola zero point") {
  const auto fam = build_hr_family(1);
  const auto p = parabola_zero();
  CHECK(check_phi_point(fam, p).ok());
  CHECK(phi(parabola(), fam, p).norm() == 0.0);
  CHECK(oracle::phi_direct(parabola(), fam, p).norm() == 0.0);
}

TEST_CASE("linear f with translated pair and equal weights vanishes") {
  std::mt19937_64 rng(1);
  for (std::int64_t d : {1, 2, 4}) {
    const auto fam = build_hr_family(d);
    const auto f = Embedding::affine(oracle::gaussian(rng, 3 * d * d).reshaped(3 * d, d), Vec::Zero(3 * d));
    const Vec x = oracle::uniform(rng, d), y = oracle::uniform(rng, d), c = Vec::Constant(d, 0.75);
    const auto p = make_phi_point(fam, {0.4, x, y}, {0.4, x + c, y + c}, oracle::gaussian(rng, fam.rho()));
    CHECK(phi(f, fam, p).norm() <= 1e-14);
  }
}

TEST_CASE("domain invariants are enforced") {
  const auto fam = build_hr_family(2);
  const Vec a = Vec::Zero(2), b = Vec::Ones(2);
  Vec z = Vec::Zero(2);
  z(0) = 1.0;
  CHECK_THROWS_AS(make_phi_point(fam, {0.5, a, a}, {0.5, a, b}, z), InvariantError);
  CHECK_THROWS_AS(make_phi_point(fam, {1.0, a, b}, {0.5, b, a}, z), InvariantError);
  CHECK_THROWS_AS(make_phi_point(fam, {0.5, a, b}, {0.5, a, b}, z), InvariantError);
  CHECK_THROWS_AS(make_phi_point(fam, {0.5, a, b}, {0.5, b, a}, Vec::Zero(2)), InvariantError);
  CHECK_THROWS_AS(make_phi_point(fam, {0.5, a, b}, {0.5, b, a}, Vec::Ones(3)), InvariantError);
  const auto ok = make_phi_point(fam, {0.5, a, b}, {0.5, b, a}, Vec::Constant(2, 3.0));
  CHECK(ok.z.norm() == doctest::Approx(1.0));
  PhiPoint bad = ok;
  bad.z *= 2.0;
  CHECK_FALSE(check_phi_point(fam, bad).spheres);
  CHECK_THROWS_AS(phi(parabola(), fam, ok), std::invalid_argument);
}

TEST_CASE("phi and phi_extended require matching variants") {
  const auto fam = build_hr_family(2);
  std::mt19937_64 rng(2);
  const auto f = oracle::random_polynomial(rng, 2, 5);
  const auto with_w = oracle::random_point(fam, rng, true);
  const auto without = oracle::random_point(fam, rng, false);
  CHECK_THROWS_AS(phi(f, fam, with_w), std::invalid_argument);
  CHECK_THROWS_AS(phi_extended(f, fam, without), std::invalid_argument);
  CHECK(evaluate_phi(f, fam, with_w) == phi_extended(f, fam, with_w));
}

TEST_CASE("w = e1 reduces the extended function") {
  std::mt19937_64 rng(3);
  for (std::int64_t d : {1, 2, 6, 16}) {
    const auto fam = build_hr_family(d);
    const auto f = oracle::random_polynomial(rng, static_cast<int>(d), 3, 3, 2);
    auto p = oracle::random_point(fam, rng, false);
    const Vec base = phi(f, fam, p);
    p.w = Vec::Zero(w_dimension(fam));
    (*p.w)(0) = 1.0;
    CHECK((phi_extended(f, fam, p) - base).norm() <= 1e-12 * (1.0 + base.norm()));
  }
}

TEST_CASE("independent transcription matches") {
  std::mt19937_64 rng(4);
  for (std::int64_t d : {1, 2, 3, 4, 8, 16}) {
    const auto fam = build_hr_family(d);
    const auto f = oracle::random_polynomial(rng, static_cast<int>(d), 4, 3, 2);
    for (int i = 0; i < 50; ++i) {
      const bool ext = i % 2;
      const auto p = oracle::random_point(fam, rng, ext);
      const Vec ours = evaluate_phi(f, fam, p);
      const Vec theirs = oracle::phi_direct(f, fam, p);
      CHECK((ours - theirs).norm() <= 1e-12 * (1.0 + theirs.norm()));
    }
  }
}

TEST_CASE("equivariance suite") {
  std::mt19937_64 rng(5);
  double worst_swap = 0.0, worst_z = 0.0, worst_w = 0.0, worst_psi = 0.0, worst_dec = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::int64_t d = std::vector<std::int64_t>{1, 2, 3, 4}[static_cast<std::size_t>(i % 4)];
    const auto fam = build_hr_family(d);
    const auto f = oracle::random_polynomial(rng, static_cast<int>(d), 3, 3, 3);
    const auto p = oracle::random_point(fam, rng, true);
    const Vec base = phi_extended(f, fam, p);
    const double scale = 1.0 + base.norm();
    worst_swap = std::max(worst_swap, (phi_extended(f, fam, swapped(p)) + base).norm() / scale);
    PhiPoint neg_z = p;
    neg_z.z = -p.z;
    worst_z = std::max(worst_z, (phi_extended(f, fam, neg_z) + base).norm() / scale);
    PhiPoint neg_w = p;
    neg_w.w = -*p.w;
    worst_w = std::max(worst_w, (phi_extended(f, fam, neg_w) + base).norm() / scale);

    PhiPoint plain = p;
    plain.w.reset();
    const Vec ph = phi(f, fam, plain);
    const Vec s1 = psi(f, fam, p.z, p.p1);
    worst_psi = std::max(worst_psi, (psi(f, fam, -p.z, p.p1) + s1).norm() / (1.0 + s1.norm()));
    worst_dec = std::max(worst_dec, (ph - (s1 - psi(f, fam, p.z, p.p2))).norm() / (1.0 + ph.norm()));
    worst_dec = std::max(
        worst_dec, (base - (psi_extended(f, fam, *p.w, p.z, p.p1) - psi_extended(f, fam, *p.w, p.z, p.p2))).norm() /
                       scale);
  }
  CHECK(worst_swap <= 1e-12);
  CHECK(worst_z <= 1e-12);
  CHECK(worst_w <= 1e-12);
  CHECK(worst_psi <= 1e-12);
  CHECK(worst_dec <= 1e-12);
}

TEST_CASE("psi of the identity is 2t B(z, x - y)") {
  std::mt19937_64 rng(6);
  const auto fam = build_hr_family(4);
  const auto id = Embedding::identity(4);
  const auto p = oracle::random_point(fam, rng, false);
  const Vec expect = 2.0 * p.p1.t * oracle::b_direct(fam, p.z, p.p1.x - p.p1.y);
  CHECK((psi(id, fam, p.z, p.p1) - expect).norm() <= 1e-13);
}

TEST_CASE("degenerate guard: psi shrinks as x approaches y") {
  std::mt19937_64 rng(7);
  const auto fam = build_hr_family(2);
  const auto f = oracle::random_polynomial(rng, 2, 5);
  const Vec x = oracle::uniform(rng, 2), dir = oracle::gaussian(rng, 2).normalized();
  const Vec z = oracle::gaussian(rng, 2).normalized();
  double prev = 1e300;
  const double first = psi(f, fam, z, {0.5, x + 1e-1 * dir, x}).norm();
  for (double h : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double norm = psi(f, fam, z, {0.5, x + h * dir, x}).norm();
    CHECK(norm < prev);
    prev = norm;
  }
  // linear decay in |x - y|
  CHECK(prev <= 2e-3 * first);
}

TEST_CASE("jacobian agrees with central differences") {
  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::int64_t d = std::vector<std::int64_t>{1, 2, 3, 4, 16}[static_cast<std::size_t>(i % 5)];
    const bool ext = (i / 5) % 2;
    const auto fam = build_hr_family(d);
    const auto f = oracle::random_polynomial(rng, static_cast<int>(d), 3, 3, 3);
    const auto p = oracle::random_point(fam, rng, ext);
    const int rho = fam.rho();
    const int wd = w_dimension(fam);
    auto unpack = [&](const Vec& v) {
      PhiPoint q;
      Eigen::Index o = 0;
      q.p1.t = v(o++);
      q.p1.x = v.segment(o, d), o += d;
      q.p1.y = v.segment(o, d), o += d;
      q.p2.t = v(o++);
      q.p2.x = v.segment(o, d), o += d;
      q.p2.y = v.segment(o, d), o += d;
      q.z = v.segment(o, rho), o += rho;
      if (ext) q.w = v.segment(o, wd);
      return q;
    };
    Vec v(parameter_count(fam, ext));
    v << p.p1.t, p.p1.x, p.p1.y, p.p2.t, p.p2.x, p.p2.y, p.z, (ext ? *p.w : Vec(0));
    const Mat fd =
        oracle::central_differences([&](const Vec& u) { return oracle::phi_direct(f, fam, unpack(u)); }, v);
    const Mat an = phi_jacobian(f, fam, p);
    REQUIRE(an.cols() == v.size());
    worst = std::max(worst, (an - fd).norm() / std::max(1.0, an.norm()));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("jacobian structural examples") {
  std::mt19937_64 rng(9);
  const auto fam = build_hr_family(2);
  const auto f = oracle::random_polynomial(rng, 2, 5);
  const auto p = oracle::random_point(fam, rng, false);
  const Mat jac = phi_jacobian(f, fam, p);
  CHECK((jac.col(0) - psi(f, fam, p.z, p.p1) / p.p1.t).norm() <= 1e-12);

  Mat a(3, 2);
  a << 1, -2, 0.5, 3, 2, 2;
  const auto aff = Embedding::affine(a, Vec::Ones(3));
  const Mat ja = phi_jacobian(aff, fam, p);
  const Mat expect = 2.0 * p.p1.t * a * fam.left_multiplication(p.z);
  CHECK((ja.middleCols(1, 2) - expect).norm() <= 1e-12);
  CHECK((ja.middleCols(3, 2) + expect).norm() <= 1e-12);
}

TEST_CASE("phi point json round trip at full precision") {
  std::mt19937_64 rng(10);
  const auto fam = build_hr_family(6);
  for (bool ext : {false, true}) {
    const auto p = oracle::random_point(fam, rng, ext);
    const auto q = phi_point_from_json(nlohmann::json::parse(phi_point_to_json(p).dump()));
    CHECK(q.p1.t == p.p1.t);
    CHECK(q.p2.y == p.p2.y);
    CHECK(q.z == p.z);
    CHECK(q.w.has_value() == ext);
    if (ext) CHECK(*q.w == *p.w);
  }
}
