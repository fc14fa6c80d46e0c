#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace hrtrap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class EmbeddingKind { Polynomial, MomentCurve, Graph, Affine, Lift, CentralProjection, Composed };

const char* to_string(EmbeddingKind kind);

/// Malformed embedding spec: schema violation, inconsistent dimensions, bad exponents.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation of a central projection too close to the hyperplane it divides by.
class ProjectionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Monomial {
  std::vector<int> exponents;
  double coeff = 0.0;
};
using PolynomialComponent = std::vector<Monomial>;

class Embedding;
using EmbeddingPtr = std::shared_ptr<const Embedding>;

/// Below this magnitude a central projection refuses to divide.
inline constexpr double kProjectionThreshold = 1e-9;

/// Declarative map R^d -> R^n. Immutable; copies share their children.
class Embedding {
 public:
  struct Polynomial {
    std::vector<PolynomialComponent> components;
  };
  struct MomentCurve {
    int k = 1;
  };
  /// x -> (x, g(x))
  struct Graph {
    EmbeddingPtr inner;
  };
  /// x -> A x + b
  struct Affine {
    Mat matrix;
    Vec offset;
  };
  /// x -> (f(x), 1)
  struct Lift {
    EmbeddingPtr inner;
  };
  /// x -> f(x) / f_c(x) with coordinate c removed
  struct CentralProjection {
    EmbeddingPtr inner;
    int divide_by = 0;
  };
  /// x -> outer(inner(x))
  struct Composed {
    EmbeddingPtr outer;
    EmbeddingPtr inner;
  };
  using Payload = std::variant<Polynomial, MomentCurve, Graph, Affine, Lift, CentralProjection, Composed>;

  static Embedding polynomial(int d, std::vector<PolynomialComponent> components);
  static Embedding moment_curve(int k);
  static Embedding graph(Embedding inner);
  static Embedding affine(Mat matrix, Vec offset);
  static Embedding identity(int d);
  static Embedding lift(Embedding inner);
  /// divide_by < 0 selects the last coordinate.
  static Embedding central_projection(Embedding inner, int divide_by = -1);
  static Embedding composed(Embedding outer, Embedding inner);

  EmbeddingKind kind() const;
  int d() const { return d_; }
  int n() const { return n_; }
  const Payload& payload() const { return payload_; }

  Vec eval(const Vec& x) const;
  /// n x d; analytic for every kind except composed and central_projection.
  Mat jacobian(const Vec& x) const;
  bool has_analytic_jacobian() const;

  nlohmann::json to_json() const;
  static Embedding from_json(const nlohmann::json& j);
  /// 16 hex digits of FNV-1a over the canonical serialization.
  std::string digest() const;

 private:
  Embedding(int d, int n, Payload payload) : d_(d), n_(n), payload_(std::move(payload)) {}
  static Embedding from_json_node(const nlohmann::json& j, bool top_level);

  int d_;
  int n_;
  Payload payload_;
};

Embedding parse_embedding(const std::string& text);

Vec eval_embedding(const Embedding& f, const Vec& x);
Mat jacobian_embedding(const Embedding& f, const Vec& x);

/// Central differences with step 1e-6 * (1 + |x_i|).
Mat finite_difference_jacobian(const Embedding& f, const Vec& x);

Embedding lift_affine_to_linear(const Embedding& f);

/// Deterministic probe set: the origin plus `count` uniform samples of [-1, 1]^d.
std::vector<Vec> default_probes(int d, int count = 64);

/// g(x) = (f_i(x) / f_c(x))_{i != c}, c = divide_by (last coordinate when < 0).
/// Throws ProjectionError if some probe has |f_c| below kProjectionThreshold.
Embedding project_linear_to_affine(const Embedding& f, int divide_by = -1,
                                   std::optional<std::vector<Vec>> probes = std::nullopt);

/// Inverse stereographic projection R^d -> S^d in R^(d+1), expressed as the
/// central projection of x -> (2x, |x|^2 - 1, |x|^2 + 1).
Embedding inverse_stereographic(int d);

/// prod_{i<j} (t_j - t_i)
double vandermonde_det(std::span<const double> t);

using Tuple = std::vector<Vec>;

struct RegularityFailure {
  std::size_t tuple_index = 0;
  double singular_ratio = 0.0;
};

struct RegularityReport {
  int k = 0;
  std::size_t tuples_checked = 0;
  /// Smallest singular value seen over all checked tuples.
  double min_singular_value = 0.0;
  std::vector<RegularityFailure> failures;
  bool passed() const { return failures.empty(); }
};

/// Relative singular-value tolerance: a tuple passes iff sigma_min > 1e-8 sigma_max.
inline constexpr double kRegularityTolerance = 1e-8;

RegularityReport check_k_regular_on_tuples(const Embedding& f, int k, std::span<const Tuple> tuples);

/// Affine independence of (j+1)-tuples: rank j of the differences to the first image.
RegularityReport check_affine_regular_on_tuples(const Embedding& f, int j, std::span<const Tuple> tuples);

struct InjectivityReport {
  std::size_t pairs_checked = 0;
  std::vector<std::pair<Vec, Vec>> suspects;
  bool passed() const { return suspects.empty(); }
};

/// Randomized spot check: flags pairs farther than delta apart whose images are within eps.
InjectivityReport injectivity_spot_check(const Embedding& f, double box, std::size_t pairs,
                                         double delta, double eps, std::uint64_t seed);

}  // namespace hrtrap
