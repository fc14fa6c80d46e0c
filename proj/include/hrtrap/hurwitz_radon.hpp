#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hrtrap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IntMat = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// d = odd_part * 2^(4a+b) with 0 <= b <= 3, rho = 2^b + 8a and
/// 2^gamma the least power of two that is >= rho.
struct HurwitzRadonDecomposition {
  std::int64_t d = 1;
  std::int64_t odd_part = 1;
  int a = 0;
  int b = 0;
  int rho = 1;
  int gamma = 0;

  /// Exponent of the power of two dividing d.
  int two_adic_valuation() const { return 4 * a + b; }
  /// Ambient dimension of the w-sphere used by the trilinear map, 2^gamma - rho + 1.
  int w_dimension() const { return (1 << gamma) - rho + 1; }
};

HurwitzRadonDecomposition decompose(std::int64_t d);

int hurwitz_radon(std::int64_t d);

/// Number of ones in the binary expansion of k (k >= 1).
int alpha_ones(std::int64_t k);

/// True iff some binary digit is one in both m and q.
bool shares_one(std::uint64_t m, std::uint64_t q);

enum class Parity { Even, Odd };

/// Parity of the binomial coefficient C(n, m), digit by digit (Lucas).
Parity binomial_parity(std::uint64_t n, std::uint64_t m);

enum class Variant { Thm1, Thm2 };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// Raised when the sphere exponents produced for a dimension are not
/// pairwise digit-disjoint. Never expected; signals a bug.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Sphere dimensions fed to the Hopf criterion:
///   Thm1: (2d, rho-1)
///   Thm2: (2^gamma - rho, rho-1, 2d)
/// with zero entries dropped.
std::vector<std::int64_t> theorem_exponents(std::int64_t d, Variant variant);

class FamilyConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// rho(d)-1 pairwise anticommuting, skew-symmetric, orthogonal d x d integer
/// matrices. Together with the identity they define the nonsingular bilinear
/// map B(z, x) = z_1 x + sum_i z_{i+1} J_i x with |B(z,x)| = |z||x|.
class HRFamily {
 public:
  HRFamily(std::int64_t d, std::vector<IntMat> matrices);

  std::int64_t dim() const { return d_; }
  int rho() const { return static_cast<int>(matrices_.size()) + 1; }
  const std::vector<IntMat>& matrices() const { return matrices_; }
  const Mat& real_matrix(std::size_t i) const { return real_[i]; }

  /// d x d matrix of x -> B(z, x).
  Mat left_multiplication(const Vec& z) const;
  /// d x rho matrix of z -> B(z, x), i.e. columns (x, J_1 x, ..., J_{rho-1} x).
  Mat right_multiplication(const Vec& x) const;

  std::string to_text() const;
  static HRFamily from_text(const std::string& text);

  bool operator==(const HRFamily& other) const;

 private:
  std::int64_t d_;
  std::vector<IntMat> matrices_;
  std::vector<Mat> real_;
};

HRFamily build_hr_family(std::int64_t d);

/// 2x2 building blocks of the tensor words.
enum class Block : std::uint8_t { I, J, X, Z };
using TensorWord = std::vector<Block>;

/// Backtracking search for `count` pairwise anticommuting skew words of the
/// given length. Throws FamilyConstructionError when the search is exhausted.
std::vector<TensorWord> find_anticommuting_words(int length, int count);
IntMat word_matrix(const TensorWord& word);

Vec bilinear_b(const HRFamily& fam, const Vec& z, const Vec& x);

/// C(w, z, x) = B(pad(w), B(z, x)), with w padded by trailing zeros to length rho.
Vec trilinear_c(const HRFamily& fam, const Vec& w, const Vec& z, const Vec& x);

Vec pad_w(const HRFamily& fam, const Vec& w);

struct FamilyCheck {
  bool sizes_ok = false;
  bool orthogonal = false;
  bool skew = false;
  bool anticommuting = false;
  bool ok() const { return sizes_ok && orthogonal && skew && anticommuting; }
};

/// Exact integer checks of the family invariants.
FamilyCheck check_family(const HRFamily& fam);

}  // namespace hrtrap
