#include "hrtrap/certificate.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace hrtrap {

using nlohmann::json;

const char* to_string(Classification c) {
  return c == Classification::Trapezoid ? "Trapezoid" : "CollinearTriple";
}

Classification classification_from_string(const std::string& s) {
  if (s == "Trapezoid") return Classification::Trapezoid;
  if (s == "CollinearTriple") return Classification::CollinearTriple;
  throw std::invalid_argument("unknown classification '" + s + "'");
}

namespace {

double diameter(std::span<const Vec> pts) {
  double diam = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) diam = std::max(diam, (pts[i] - pts[j]).norm());
  }
  return diam;
}

}  // namespace

Classification classify_quad(const Vec& u1, const Vec& v1, const Vec& u2, const Vec& v2, double t1, double t2,
                             double tol) {
  const std::array<Vec, 4> pts{u1, v1, u2, v2};
  const double diam = diameter(pts);
  if (!(diam > 0.0)) throw InvalidCertificate("all four points coincide");
  auto same = [&](const Vec& a, const Vec& b) { return (a - b).norm() <= tol * diam; };

  if (same(u1, v1) || same(u2, v2)) throw InvalidCertificate("u_i coincides with v_i");
  if (same(u1, u2) && same(v1, v2)) throw InvalidCertificate("u1 = u2 and v1 = v2");
  if (same(u1, v2) && same(u2, v1)) throw InvalidCertificate("u1 = v2 and u2 = v1");

  std::vector<Vec> reps;
  for (const auto& p : pts) {
    bool seen = false;
    for (const auto& r : reps) seen = seen || same(p, r);
    if (!seen) reps.push_back(p);
  }
  if (reps.size() < 3) throw InvalidCertificate("fewer than three distinct points");

  if (reps.size() == 3) {
    const Vec imbalance = t1 * u1 + t2 * v2 - t1 * v1 - t2 * u2;
    if (imbalance.norm() > tol * (t1 + t2) * diam) {
      throw InvalidCertificate("three distinct points but the diagonal relation does not balance");
    }
  }

  Mat diffs(u1.size(), static_cast<Eigen::Index>(reps.size() - 1));
  for (std::size_t i = 1; i < reps.size(); ++i) diffs.col(static_cast<Eigen::Index>(i - 1)) = reps[i] - reps[0];
  const Eigen::JacobiSVD<Mat> svd(diffs);
  const auto& s = svd.singularValues();
  const bool collinear = s.size() < 2 || s(1) <= tol * s(0);
  if (collinear) return Classification::CollinearTriple;
  if (reps.size() == 3) throw InvalidCertificate("three distinct points that are not collinear");
  return Classification::Trapezoid;
}

Certificate extract_certificate(const Embedding& f, const HRFamily& fam, const PhiPoint& p,
                                double residual_tolerance) {
  const Vec value = evaluate_phi(f, fam, p);
  const double residual = value.norm();
  if (!(residual <= residual_tolerance)) {
    throw InvalidCertificate("extract_certificate: |phi| = " + std::to_string(residual) + " exceeds tolerance " +
                             std::to_string(residual_tolerance));
  }
  Certificate c;
  c.variant = p.w ? Variant::Thm2 : Variant::Thm1;
  c.t1 = p.p1.t;
  c.t2 = p.p2.t;
  const Vec mid1 = p.p1.x + p.p1.y;
  const Vec off1 = chord_offset(fam, p.z, p.w, p.p1.x - p.p1.y);
  const Vec mid2 = p.p2.x + p.p2.y;
  const Vec off2 = chord_offset(fam, p.z, p.w, p.p2.x - p.p2.y);
  c.qu1 = mid1 + off1;
  c.qv1 = mid1 - off1;
  c.qu2 = mid2 + off2;
  c.qv2 = mid2 - off2;
  c.u1 = f.eval(c.qu1);
  c.v1 = f.eval(c.qv1);
  c.u2 = f.eval(c.qu2);
  c.v2 = f.eval(c.qv2);
  c.residual = residual;
  c.classification = classify_quad(c.u1, c.v1, c.u2, c.v2, c.t1, c.t2);
  c.point = p;
  c.embedding_digest = f.digest();
  return c;
}

ValidationReport validate_certificate(const Embedding& f, const Certificate& cert, double tol) {
  ValidationReport r;
  const double inf = std::numeric_limits<double>::infinity();
  r.weights_in_range = cert.t1 > 0.0 && cert.t1 < 1.0 && cert.t2 > 0.0 && cert.t2 < 1.0;

  // (i) images are f of the preimages
  r.preimage_error = 0.0;
  try {
    const std::array<std::pair<const Vec*, const Vec*>, 4> pairs{
        {{&cert.qu1, &cert.u1}, {&cert.qv1, &cert.v1}, {&cert.qu2, &cert.u2}, {&cert.qv2, &cert.v2}}};
    for (const auto& [q, img] : pairs) {
      const Vec fq = f.eval(*q);
      if (fq.size() != img->size()) {
        r.preimage_error = inf;
        break;
      }
      r.preimage_error = std::max(r.preimage_error, (fq - *img).norm() / (1.0 + img->norm()));
    }
  } catch (const std::exception&) {
    r.preimage_error = inf;
  }
  r.preimage_consistency = r.preimage_error <= tol;

  const bool shapes_ok = cert.u1.size() == cert.v1.size() && cert.u1.size() == cert.u2.size() &&
                         cert.u1.size() == cert.v2.size() && cert.u1.size() > 0;
  if (!shapes_ok) {
    r.parallel_error = r.affine_error = inf;
    r.distinctness_detail = "image points have inconsistent dimensions";
    r.derived_classification = "invalid";
    return r;
  }

  // (ii) t1 (u1 - v1) = t2 (u2 - v2), relative to the chord lengths
  const Vec side1 = cert.t1 * (cert.u1 - cert.v1);
  const Vec side2 = cert.t2 * (cert.u2 - cert.v2);
  const double chord_scale = std::max(side1.norm(), side2.norm());
  r.parallel_error = chord_scale > 0.0 ? (side1 - side2).norm() / chord_scale : inf;
  r.parallel_relation = r.parallel_error <= tol;

  // (iii) the diagonals u1 -> v2 and v1 -> u2 meet at the same weighted point
  const double tsum = cert.t1 + cert.t2;
  if (tsum > 0.0 && chord_scale > 0.0) {
    const Vec on_first = (cert.t1 * cert.u1 + cert.t2 * cert.v2) / tsum;
    const Vec on_second = (cert.t1 * cert.v1 + cert.t2 * cert.u2) / tsum;
    r.affine_error = (on_first - on_second).norm() / (chord_scale / tsum);
  } else {
    r.affine_error = inf;
  }
  r.affine_combination = r.affine_error <= tol;

  // (iv) distinctness structure
  const std::array<Vec, 4> pts{cert.u1, cert.v1, cert.u2, cert.v2};
  const double diam = diameter(pts);
  auto same = [&](const Vec& a, const Vec& b) { return (a - b).norm() <= kDistinctnessTol * diam; };
  if (!(diam > 0.0)) {
    r.distinctness_detail = "all points coincide";
  } else if (same(cert.u1, cert.v1)) {
    r.distinctness_detail = "u1 = v1";
  } else if (same(cert.u2, cert.v2)) {
    r.distinctness_detail = "u2 = v2";
  } else if (same(cert.u1, cert.u2) && same(cert.v1, cert.v2)) {
    r.distinctness_detail = "u1 = u2 and v1 = v2";
  } else if (same(cert.u1, cert.v2) && same(cert.u2, cert.v1)) {
    r.distinctness_detail = "u1 = v2 and u2 = v1";
  } else {
    r.distinctness = true;
    r.distinctness_detail = "ok";
  }

  // (v) classification
  try {
    const auto c = classify_quad(cert.u1, cert.v1, cert.u2, cert.v2, cert.t1, cert.t2);
    r.derived_classification = to_string(c);
    r.classification_matches = c == cert.classification;
  } catch (const InvalidCertificate& e) {
    r.derived_classification = std::string("invalid: ") + e.what();
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCertificateFormat = "hrtrap-certificate";

json vec_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vec vec_from(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("certificate: expected an array of numbers");
  Vec out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) out(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return out;
}

}  // namespace

json certificate_to_json(const Certificate& c) {
  json j;
  j["format"] = kCertificateFormat;
  j["version"] = 1;
  j["embedding_digest"] = c.embedding_digest;
  j["variant"] = to_string(c.variant);
  j["classification"] = to_string(c.classification);
  j["t1"] = c.t1;
  j["t2"] = c.t2;
  j["preimages"] = {{"u1", vec_json(c.qu1)}, {"v1", vec_json(c.qv1)}, {"u2", vec_json(c.qu2)}, {"v2", vec_json(c.qv2)}};
  j["images"] = {{"u1", vec_json(c.u1)}, {"v1", vec_json(c.v1)}, {"u2", vec_json(c.u2)}, {"v2", vec_json(c.v2)}};
  j["residual"] = c.residual;
  j["solver"] = {{"start_index", c.start_index}, {"iterations", c.iterations}};
  j["point"] = phi_point_to_json(c.point);
  return j;
}

Certificate certificate_from_json(const json& j) {
  try {
    if (j.at("format") != kCertificateFormat) throw std::invalid_argument("certificate: wrong format tag");
    if (j.at("version") != 1) throw std::invalid_argument("certificate: unsupported version");
    Certificate c;
    c.embedding_digest = j.at("embedding_digest").get<std::string>();
    c.variant = variant_from_string(j.at("variant").get<std::string>());
    c.classification = classification_from_string(j.at("classification").get<std::string>());
    c.t1 = j.at("t1").get<double>();
    c.t2 = j.at("t2").get<double>();
    const auto& pre = j.at("preimages");
    c.qu1 = vec_from(pre.at("u1"));
    c.qv1 = vec_from(pre.at("v1"));
    c.qu2 = vec_from(pre.at("u2"));
    c.qv2 = vec_from(pre.at("v2"));
    const auto& img = j.at("images");
    c.u1 = vec_from(img.at("u1"));
    c.v1 = vec_from(img.at("v1"));
    c.u2 = vec_from(img.at("u2"));
    c.v2 = vec_from(img.at("v2"));
    c.residual = j.at("residual").get<double>();
    c.start_index = j.at("solver").at("start_index").get<std::size_t>();
    c.iterations = j.at("solver").at("iterations").get<int>();
    c.point = phi_point_from_json(j.at("point"));
    return c;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("certificate: ") + e.what());
  }
}

json validation_report_to_json(const ValidationReport& r, double tol) {
  json j;
  j["format"] = "hrtrap-validation";
  j["version"] = 1;
  j["tolerance"] = tol;
  j["passed"] = r.passed();
  j["checks"] = {
      {"weights_in_range", {{"passed", r.weights_in_range}}},
      {"preimage_consistency", {{"passed", r.preimage_consistency}, {"error", r.preimage_error}}},
      {"parallel_relation", {{"passed", r.parallel_relation}, {"error", r.parallel_error}}},
      {"affine_combination", {{"passed", r.affine_combination}, {"error", r.affine_error}}},
      {"distinctness", {{"passed", r.distinctness}, {"detail", r.distinctness_detail}}},
      {"classification", {{"passed", r.classification_matches}, {"derived", r.derived_classification}}},
  };
  return j;
}

}  // namespace hrtrap
