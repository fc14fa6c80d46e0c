#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hrtrap/embedding.hpp"
#include "hrtrap/hurwitz_radon.hpp"
#include "hrtrap/test_function.hpp"

namespace hrtrap {

enum class Classification { Trapezoid, CollinearTriple };

const char* to_string(Classification c);
Classification classification_from_string(const std::string& s);

/// Fewer than three distinct points, or a degenerate identification that the
/// zero-of-phi argument rules out. Signals a false zero.
class InvalidCertificate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two points closer than this fraction of the configuration diameter count as equal.
inline constexpr double kDistinctnessTol = 1e-5;

/// Witness of a zero of phi: four image points with t1(u1 - v1) = t2(u2 - v2).
struct Certificate {
  Variant variant = Variant::Thm1;
  double t1 = 0.0;
  double t2 = 0.0;
  Vec qu1, qv1, qu2, qv2;
  Vec u1, v1, u2, v2;
  double residual = 0.0;
  Classification classification = Classification::Trapezoid;
  std::size_t start_index = 0;
  int iterations = 0;
  PhiPoint point;
  std::string embedding_digest;
};

/// Classifies four points satisfying t1(u1 - v1) = t2(u2 - v2).
/// Throws InvalidCertificate when fewer than three points are distinct at `tol`,
/// when u_i = v_i, when (u1, v1) = (u2, v2), or when (u1, u2) = (v2, v1).
/// With exactly three distinct points the balance t1 u1 + t2 v2 = t1 v1 + t2 u2
/// is re-checked, which forces the points onto a line.
Classification classify_quad(const Vec& u1, const Vec& v1, const Vec& u2, const Vec& v2, double t1, double t2,
                             double tol = kDistinctnessTol);

/// Builds the certificate at a zero of phi (phi_extended when P carries w).
/// Throws std::runtime_error if |phi(P)| > residual_tolerance.
Certificate extract_certificate(const Embedding& f, const HRFamily& fam, const PhiPoint& p,
                                double residual_tolerance);

struct ValidationReport {
  bool weights_in_range = false;
  bool preimage_consistency = false;
  double preimage_error = 0.0;
  bool parallel_relation = false;
  double parallel_error = 0.0;
  bool affine_combination = false;
  double affine_error = 0.0;
  bool distinctness = false;
  std::string distinctness_detail;
  bool classification_matches = false;
  std::string derived_classification;

  bool passed() const {
    return weights_in_range && preimage_consistency && parallel_relation && affine_combination && distinctness &&
           classification_matches;
  }
};

/// Re-checks a certificate from its stored fields and f alone.
ValidationReport validate_certificate(const Embedding& f, const Certificate& cert, double tol);

nlohmann::json certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const nlohmann::json& j);
nlohmann::json validation_report_to_json(const ValidationReport& report, double tol);

}  // namespace hrtrap
