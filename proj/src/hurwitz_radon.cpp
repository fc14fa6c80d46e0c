#include "hrtrap/hurwitz_radon.hpp"

#include <bit>
#include <sstream>

namespace hrtrap {

HurwitzRadonDecomposition decompose(std::int64_t d) {
  if (d <= 0) {
    throw std::invalid_argument("decompose: d must be positive, got " + std::to_string(d));
  }
  HurwitzRadonDecomposition r;
  r.d = d;
  const int ell = std::countr_zero(static_cast<std::uint64_t>(d));
  r.odd_part = d >> ell;
  r.a = ell / 4;
  r.b = ell % 4;
  r.rho = (1 << r.b) + 8 * r.a;
  r.gamma = std::bit_width(static_cast<unsigned>(r.rho - 1));
  return r;
}

int hurwitz_radon(std::int64_t d) { return decompose(d).rho; }

int alpha_ones(std::int64_t k) {
  if (k <= 0) {
    throw std::invalid_argument("alpha_ones: k must be positive, got " + std::to_string(k));
  }
  return std::popcount(static_cast<std::uint64_t>(k));
}

bool shares_one(std::uint64_t m, std::uint64_t q) { return (m & q) != 0; }

Parity binomial_parity(std::uint64_t n, std::uint64_t m) {
  if (m > n) {
    throw std::invalid_argument("binomial_parity: m exceeds n");
  }
  // C(n, m) is odd iff C(n_i, m_i) is odd for every binary digit, i.e. no
  // digit has m_i = 1 and n_i = 0.
  for (; m != 0; n >>= 1, m >>= 1) {
    if ((m & 1U) && !(n & 1U)) return Parity::Even;
  }
  return Parity::Odd;
}

const char* to_string(Variant v) { return v == Variant::Thm1 ? "thm1" : "thm2"; }

Variant variant_from_string(const std::string& s) {
  if (s == "thm1") return Variant::Thm1;
  if (s == "thm2") return Variant::Thm2;
  throw std::invalid_argument("unknown variant '" + s + "' (expected thm1 or thm2)");
}

std::vector<std::int64_t> theorem_exponents(std::int64_t d, Variant variant) {
  const auto hr = decompose(d);
  std::vector<std::int64_t> raw;
  if (variant == Variant::Thm1) {
    raw = {2 * d, hr.rho - 1};
  } else {
    raw = {(std::int64_t{1} << hr.gamma) - hr.rho, hr.rho - 1, 2 * d};
  }
  std::vector<std::int64_t> out;
  for (auto m : raw) {
    if (m != 0) out.push_back(m);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      if (shares_one(static_cast<std::uint64_t>(out[i]), static_cast<std::uint64_t>(out[j]))) {
        throw ConsistencyError("theorem_exponents: exponents " + std::to_string(out[i]) + " and " +
                               std::to_string(out[j]) + " share a binary digit for d = " +
                               std::to_string(d));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tensor words

namespace {

bool is_skew(const TensorWord& w) {
  int js = 0;
  for (auto b : w) js += (b == Block::J);
  return js % 2 == 1;
}

// J, X and Z pairwise anticommute and each commutes with itself and I.
bool anticommute(const TensorWord& u, const TensorWord& v) {
  int clashes = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] != Block::I && v[i] != Block::I && u[i] != v[i]) ++clashes;
  }
  return clashes % 2 == 1;
}

IntMat block_matrix(Block b) {
  IntMat m(2, 2);
  switch (b) {
    case Block::I: m << 1, 0, 0, 1; break;
    case Block::J: m << 0, -1, 1, 0; break;
    case Block::X: m << 0, 1, 1, 0; break;
    case Block::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

IntMat kron(const IntMat& a, const IntMat& b) {
  IntMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Blockwise product of two words, dropping the sign.
TensorWord product_word(const TensorWord& u, const TensorWord& v) {
  TensorWord out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == Block::I) {
      out[i] = v[i];
    } else if (v[i] == Block::I) {
      out[i] = u[i];
    } else if (u[i] == v[i]) {
      out[i] = Block::I;
    } else {
      // the third non-identity block
      const int mask = (1 << static_cast<int>(Block::J)) | (1 << static_cast<int>(Block::X)) |
                       (1 << static_cast<int>(Block::Z));
      const int rest = mask & ~(1 << static_cast<int>(u[i])) & ~(1 << static_cast<int>(v[i]));
      out[i] = static_cast<Block>(std::countr_zero(static_cast<unsigned>(rest)));
    }
  }
  return out;
}

bool backtrack(const std::vector<TensorWord>& candidates, std::vector<std::size_t>& compatible,
               std::vector<TensorWord>& chosen, int count) {
  if (static_cast<int>(chosen.size()) == count) return true;
  if (static_cast<int>(chosen.size() + compatible.size()) < count) return false;
  for (std::size_t k = 0; k < compatible.size(); ++k) {
    const auto& cand = candidates[compatible[k]];
    std::vector<std::size_t> next;
    for (std::size_t j = k + 1; j < compatible.size(); ++j) {
      if (anticommute(cand, candidates[compatible[j]])) next.push_back(compatible[j]);
    }
    chosen.push_back(cand);
    if (backtrack(candidates, next, chosen, count)) return true;
    chosen.pop_back();
  }
  return false;
}

constexpr int kMaxSearchLength = 6;

}  // namespace

std::vector<TensorWord> find_anticommuting_words(int length, int count) {
  if (count == 0) return {};
  if (length > kMaxSearchLength) {
    // rho(16 * 2^m) = rho(2^m) + 8: eight skew words Q_i of length 4 and their
    // product S (symmetric, anticommuting with every Q_i) give
    // {Q_i (x) I} u {S (x) A_j} from a family A_j of the shorter length.
    const auto head = find_anticommuting_words(4, 8);
    TensorWord s(4, Block::I);
    for (const auto& q : head) s = product_word(s, q);
    const auto tail = find_anticommuting_words(length - 4, count - 8);
    std::vector<TensorWord> out;
    for (const auto& q : head) {
      TensorWord w = q;
      w.resize(static_cast<std::size_t>(length), Block::I);
      out.push_back(std::move(w));
    }
    for (const auto& a : tail) {
      TensorWord w = s;
      w.insert(w.end(), a.begin(), a.end());
      out.push_back(std::move(w));
    }
    return out;
  }

  std::vector<TensorWord> candidates;
  const std::size_t total = std::size_t{1} << (2 * length);
  for (std::size_t code = 0; code < total; ++code) {
    TensorWord w(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) {
      w[static_cast<std::size_t>(i)] = static_cast<Block>((code >> (2 * (length - 1 - i))) & 3U);
    }
    if (is_skew(w)) candidates.push_back(std::move(w));
  }
  std::vector<std::size_t> compatible(candidates.size());
  for (std::size_t i = 0; i < compatible.size(); ++i) compatible[i] = i;
  std::vector<TensorWord> chosen;
  if (!backtrack(candidates, compatible, chosen, count)) {
    throw FamilyConstructionError("no " + std::to_string(count) +
                                  " anticommuting skew tensor words of length " +
                                  std::to_string(length));
  }
  return chosen;
}

IntMat word_matrix(const TensorWord& word) {
  IntMat m = IntMat::Identity(1, 1);
  for (auto b : word) m = kron(m, block_matrix(b));
  return m;
}

// ---------------------------------------------------------------------------
// HRFamily

HRFamily::HRFamily(std::int64_t d, std::vector<IntMat> matrices)
    : d_(d), matrices_(std::move(matrices)) {
  if (d <= 0) throw std::invalid_argument("HRFamily: dimension must be positive");
  for (const auto& m : matrices_) {
    if (m.rows() != d || m.cols() != d) {
      throw std::invalid_argument("HRFamily: matrix shape does not match dimension");
    }
    real_.push_back(m.cast<double>());
  }
}

Mat HRFamily::left_multiplication(const Vec& z) const {
  if (z.size() != rho()) throw std::invalid_argument("B: z has wrong dimension");
  Mat out = z(0) * Mat::Identity(d_, d_);
  for (std::size_t i = 0; i < real_.size(); ++i) out += z(static_cast<Eigen::Index>(i) + 1) * real_[i];
  return out;
}

Mat HRFamily::right_multiplication(const Vec& x) const {
  if (x.size() != d_) throw std::invalid_argument("B: x has wrong dimension");
  Mat out(d_, rho());
  out.col(0) = x;
  for (std::size_t i = 0; i < real_.size(); ++i) out.col(static_cast<Eigen::Index>(i) + 1) = real_[i] * x;
  return out;
}

std::string HRFamily::to_text() const {
  const auto hr = decompose(d_);
  std::ostringstream os;
  os << "hurwitz-radon-family 1\n";
  os << "d " << d_ << "\nrho " << rho() << "\ngamma " << hr.gamma << "\n";
  for (std::size_t k = 0; k < matrices_.size(); ++k) {
    os << "matrix " << (k + 1) << "\n";
    const auto& m = matrices_[k];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
      os << "\n";
    }
  }
  return os.str();
}

HRFamily HRFamily::from_text(const std::string& text) {
  std::istringstream is(text);
  auto expect = [&](const std::string& key) {
    std::string got;
    if (!(is >> got) || got != key) {
      throw std::invalid_argument("HR family file: expected '" + key + "', got '" + got + "'");
    }
  };
  int version = 0;
  expect("hurwitz-radon-family");
  if (!(is >> version) || version != 1) throw std::invalid_argument("HR family file: unsupported version");
  std::int64_t d = 0;
  int rho = 0;
  int gamma = 0;
  expect("d");
  is >> d;
  expect("rho");
  is >> rho;
  expect("gamma");
  is >> gamma;
  if (!is || d <= 0) throw std::invalid_argument("HR family file: bad header");
  const auto hr = decompose(d);
  if (rho != hr.rho || gamma != hr.gamma) {
    throw std::invalid_argument("HR family file: header rho/gamma inconsistent with d");
  }
  std::vector<IntMat> mats;
  for (int k = 1; k < rho; ++k) {
    expect("matrix");
    int index = 0;
    if (!(is >> index) || index != k) throw std::invalid_argument("HR family file: bad matrix index");
    IntMat m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        if (!(is >> m(i, j))) throw std::invalid_argument("HR family file: truncated matrix");
      }
    }
    mats.push_back(std::move(m));
  }
  std::string trailing;
  if (is >> trailing) throw std::invalid_argument("HR family file: trailing content");
  return HRFamily(d, std::move(mats));
}

bool HRFamily::operator==(const HRFamily& other) const {
  if (d_ != other.d_ || matrices_.size() != other.matrices_.size()) return false;
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    if (matrices_[i] != other.matrices_[i]) return false;
  }
  return true;
}

HRFamily build_hr_family(std::int64_t d) {
  const auto hr = decompose(d);
  const int m = hr.two_adic_valuation();
  const auto words = find_anticommuting_words(m, hr.rho - 1);
  const IntMat identity_odd = IntMat::Identity(hr.odd_part, hr.odd_part);
  std::vector<IntMat> mats;
  mats.reserve(words.size());
  for (const auto& w : words) mats.push_back(kron(identity_odd, word_matrix(w)));
  HRFamily fam(d, std::move(mats));
  if (!check_family(fam).ok()) {
    throw FamilyConstructionError("constructed family for d = " + std::to_string(d) +
                                  " violates its invariants");
  }
  return fam;
}

Vec bilinear_b(const HRFamily& fam, const Vec& z, const Vec& x) {
  if (z.size() != fam.rho() || x.size() != fam.dim()) {
    throw std::invalid_argument("bilinear_b: dimension mismatch");
  }
  Vec out = z(0) * x;
  for (int i = 1; i < fam.rho(); ++i) out += z(i) * (fam.real_matrix(static_cast<std::size_t>(i - 1)) * x);
  return out;
}

Vec pad_w(const HRFamily& fam, const Vec& w) {
  const int rho = fam.rho();
  const int wdim = (1 << std::bit_width(static_cast<unsigned>(rho - 1))) - rho + 1;
  if (w.size() != wdim) throw std::invalid_argument("trilinear_c: w has wrong dimension");
  Vec padded = Vec::Zero(rho);
  padded.head(wdim) = w;
  return padded;
}

Vec trilinear_c(const HRFamily& fam, const Vec& w, const Vec& z, const Vec& x) {
  return bilinear_b(fam, pad_w(fam, w), bilinear_b(fam, z, x));
}

FamilyCheck check_family(const HRFamily& fam) {
  FamilyCheck c;
  const auto hr = decompose(fam.dim());
  c.sizes_ok = fam.rho() == hr.rho;
  c.orthogonal = c.skew = c.anticommuting = true;
  const auto& ms = fam.matrices();
  const IntMat id = IntMat::Identity(fam.dim(), fam.dim());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (ms[i].transpose() * ms[i] != id) c.orthogonal = false;
    if (IntMat(ms[i].transpose()) != IntMat(-ms[i])) c.skew = false;
    for (std::size_t j = i + 1; j < ms.size(); ++j) {
      if (IntMat(ms[i] * ms[j]) != IntMat(-(ms[j] * ms[i]))) c.anticommuting = false;
    }
  }
  return c;
}

}  // namespace hrtrap
