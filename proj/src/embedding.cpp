#include "hrtrap/embedding.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <set>

namespace hrtrap {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double ipow(double x, int e) {
  double r = 1.0;
  for (; e > 0; --e) r *= x;
  return r;
}

double eval_monomial(const Monomial& m, const Vec& x) {
  double v = m.coeff;
  for (std::size_t i = 0; i < m.exponents.size(); ++i) v *= ipow(x(static_cast<Eigen::Index>(i)), m.exponents[i]);
  return v;
}

void require_dim(const Embedding& f, const Vec& x) {
  if (x.size() != f.d()) {
    throw std::invalid_argument("embedding expects input of length " + std::to_string(f.d()) + ", got " +
                                std::to_string(x.size()));
  }
}

int projected_index(const Embedding& inner, int divide_by) {
  const int idx = divide_by < 0 ? inner.n() - 1 : divide_by;
  if (idx >= inner.n()) throw SpecError("central_projection: divide_by out of range");
  return idx;
}

}  // namespace

const char* to_string(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::Polynomial: return "polynomial";
    case EmbeddingKind::MomentCurve: return "moment_curve";
    case EmbeddingKind::Graph: return "graph";
    case EmbeddingKind::Affine: return "affine";
    case EmbeddingKind::Lift: return "lift";
    case EmbeddingKind::CentralProjection: return "central_projection";
    case EmbeddingKind::Composed: return "composed";
  }
  return "?";
}

Embedding Embedding::polynomial(int d, std::vector<PolynomialComponent> components) {
  if (d < 1) throw SpecError("polynomial: d must be positive");
  if (components.empty()) throw SpecError("polynomial: at least one output component required");
  for (const auto& comp : components) {
    for (const auto& m : comp) {
      if (static_cast<int>(m.exponents.size()) != d) {
        throw SpecError("polynomial: exponent multi-index length must equal d = " + std::to_string(d));
      }
      for (int e : m.exponents) {
        if (e < 0) throw SpecError("polynomial: negative exponent");
      }
      if (!std::isfinite(m.coeff)) throw SpecError("polynomial: non-finite coefficient");
    }
  }
  const int n = static_cast<int>(components.size());
  return Embedding(d, n, Polynomial{std::move(components)});
}

Embedding Embedding::moment_curve(int k) {
  if (k < 1) throw SpecError("moment_curve: k must be positive");
  return Embedding(1, k, MomentCurve{k});
}

Embedding Embedding::graph(Embedding inner) {
  const int d = inner.d();
  const int n = d + inner.n();
  return Embedding(d, n, Graph{std::make_shared<const Embedding>(std::move(inner))});
}

Embedding Embedding::affine(Mat matrix, Vec offset) {
  if (matrix.rows() < 1 || matrix.cols() < 1) throw SpecError("affine: empty matrix");
  if (offset.size() != matrix.rows()) throw SpecError("affine: offset length must equal matrix rows");
  if (!matrix.allFinite() || !offset.allFinite()) throw SpecError("affine: non-finite entries");
  const int d = static_cast<int>(matrix.cols());
  const int n = static_cast<int>(matrix.rows());
  return Embedding(d, n, Affine{std::move(matrix), std::move(offset)});
}

Embedding Embedding::identity(int d) { return affine(Mat::Identity(d, d), Vec::Zero(d)); }

Embedding Embedding::lift(Embedding inner) {
  const int d = inner.d();
  const int n = inner.n() + 1;
  return Embedding(d, n, Lift{std::make_shared<const Embedding>(std::move(inner))});
}

Embedding Embedding::central_projection(Embedding inner, int divide_by) {
  if (inner.n() < 2) throw SpecError("central_projection: inner map needs at least two outputs");
  const int idx = projected_index(inner, divide_by);
  const int d = inner.d();
  const int n = inner.n() - 1;
  return Embedding(d, n, CentralProjection{std::make_shared<const Embedding>(std::move(inner)), idx});
}

Embedding Embedding::composed(Embedding outer, Embedding inner) {
  if (outer.d() != inner.n()) {
    throw SpecError("composed: outer domain " + std::to_string(outer.d()) + " != inner target " +
                    std::to_string(inner.n()));
  }
  const int d = inner.d();
  const int n = outer.n();
  return Embedding(d, n,
                   Composed{std::make_shared<const Embedding>(std::move(outer)),
                            std::make_shared<const Embedding>(std::move(inner))});
}

EmbeddingKind Embedding::kind() const { return static_cast<EmbeddingKind>(payload_.index()); }

bool Embedding::has_analytic_jacobian() const {
  return std::visit(overloaded{
                        [](const Graph& g) { return g.inner->has_analytic_jacobian(); },
                        [](const Lift& l) { return l.inner->has_analytic_jacobian(); },
                        [](const CentralProjection&) { return false; },
                        [](const Composed&) { return false; },
                        [](const auto&) { return true; },
                    },
                    payload_);
}

Vec Embedding::eval(const Vec& x) const {
  require_dim(*this, x);
  return std::visit(
      overloaded{
          [&](const Polynomial& p) {
            Vec out(n_);
            for (int i = 0; i < n_; ++i) {
              double s = 0.0;
              for (const auto& m : p.components[static_cast<std::size_t>(i)]) s += eval_monomial(m, x);
              out(i) = s;
            }
            return out;
          },
          [&](const MomentCurve& m) {
            Vec out(m.k);
            double p = 1.0;
            for (int i = 0; i < m.k; ++i, p *= x(0)) out(i) = p;
            return out;
          },
          [&](const Graph& g) {
            Vec out(n_);
            out << x, g.inner->eval(x);
            return out;
          },
          [&](const Affine& a) -> Vec { return a.matrix * x + a.offset; },
          [&](const Lift& l) {
            Vec out(n_);
            out << l.inner->eval(x), 1.0;
            return out;
          },
          [&](const CentralProjection& c) {
            const Vec v = c.inner->eval(x);
            const double denom = v(c.divide_by);
            if (!(std::abs(denom) >= kProjectionThreshold)) {
              throw ProjectionError("central_projection: coordinate " + std::to_string(c.divide_by) +
                                    " vanishes (|f_c| < 1e-9)");
            }
            Vec out(n_);
            for (int i = 0, o = 0; i < v.size(); ++i) {
              if (i != c.divide_by) out(o++) = v(i) / denom;
            }
            return out;
          },
          [&](const Composed& c) { return c.outer->eval(c.inner->eval(x)); },
      },
      payload_);
}

Mat Embedding::jacobian(const Vec& x) const {
  require_dim(*this, x);
  return std::visit(overloaded{
                        [&](const Polynomial& p) {
                          Mat jac = Mat::Zero(n_, d_);
                          for (int i = 0; i < n_; ++i) {
                            for (const auto& m : p.components[static_cast<std::size_t>(i)]) {
                              for (int j = 0; j < d_; ++j) {
                                const int e = m.exponents[static_cast<std::size_t>(j)];
                                if (e == 0) continue;
                                double v = m.coeff * e;
                                for (int l = 0; l < d_; ++l) {
                                  const int el = m.exponents[static_cast<std::size_t>(l)];
                                  v *= ipow(x(l), l == j ? el - 1 : el);
                                }
                                jac(i, j) += v;
                              }
                            }
                          }
                          return jac;
                        },
                        [&](const MomentCurve& m) {
                          Mat jac = Mat::Zero(m.k, 1);
                          double p = 1.0;
                          for (int i = 1; i < m.k; ++i, p *= x(0)) jac(i, 0) = i * p;
                          return jac;
                        },
                        [&](const Graph& g) {
                          Mat jac(n_, d_);
                          jac << Mat::Identity(d_, d_), g.inner->jacobian(x);
                          return jac;
                        },
                        [&](const Affine& a) -> Mat { return a.matrix; },
                        [&](const Lift& l) {
                          Mat jac(n_, d_);
                          jac << l.inner->jacobian(x), Mat::Zero(1, d_);
                          return jac;
                        },
                        [&](const auto&) { return finite_difference_jacobian(*this, x); },
                    },
                    payload_);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr int kSpecVersion = 1;
constexpr const char* kSpecFormat = "hrtrap-embedding";

void reject_unknown(const json& j, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.contains(key)) throw SpecError("embedding spec: unknown field '" + key + "'");
  }
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw SpecError(std::string("embedding spec: missing field '") + key + "'");
  return *it;
}

int int_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) throw SpecError(std::string("embedding spec: '") + key + "' must be an integer");
  return v.get<int>();
}

double number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    char* end = nullptr;
    const double out = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw SpecError("embedding spec: bad decimal '" + s + "'");
    return out;
  }
  throw SpecError("embedding spec: expected a number");
}

Vec vector_from(const json& v) {
  if (!v.is_array()) throw SpecError("embedding spec: expected an array of numbers");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i]);
  return out;
}

json vector_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void check_declared_dims(const json& j, const Embedding& e) {
  if (j.contains("d") && int_field(j, "d") != e.d()) {
    throw SpecError("embedding spec: declared d = " + std::to_string(int_field(j, "d")) +
                    " but the payload has d = " + std::to_string(e.d()));
  }
  if (j.contains("n") && int_field(j, "n") != e.n()) {
    throw SpecError("embedding spec: declared n = " + std::to_string(int_field(j, "n")) +
                    " but the payload has n = " + std::to_string(e.n()));
  }
}

}  // namespace

json Embedding::to_json() const {
  json j;
  j["format"] = "hrtrap-embedding";
  j["version"] = 1;
  j["kind"] = to_string(kind());
  j["d"] = d_;
  j["n"] = n_;
  std::visit(overloaded{
                 [&](const Polynomial& p) {
                   json comps = json::array();
                   for (const auto& comp : p.components) {
                     json terms = json::array();
                     for (const auto& m : comp) terms.push_back(json::array({m.exponents, m.coeff}));
                     comps.push_back(std::move(terms));
                   }
                   j["components"] = std::move(comps);
                 },
                 [&](const MomentCurve& m) { j["k"] = m.k; },
                 [&](const Graph& g) { j["inner"] = g.inner->to_json(); },
                 [&](const Affine& a) {
                   json rows = json::array();
                   for (Eigen::Index i = 0; i < a.matrix.rows(); ++i) rows.push_back(vector_json(a.matrix.row(i).transpose()));
                   j["matrix"] = std::move(rows);
                   j["offset"] = vector_json(a.offset);
                 },
                 [&](const Lift& l) { j["inner"] = l.inner->to_json(); },
                 [&](const CentralProjection& c) {
                   j["inner"] = c.inner->to_json();
                   j["divide_by"] = c.divide_by;
                 },
                 [&](const Composed& c) {
                   j["outer"] = c.outer->to_json();
                   j["inner"] = c.inner->to_json();
                 },
             },
             payload_);
  return j;
}

Embedding Embedding::from_json(const json& j) { return from_json_node(j, true); }

Embedding Embedding::from_json_node(const json& j, bool top_level) {
  if (!j.is_object()) throw SpecError("embedding spec: expected an object");
  if (top_level) {
    if (j.contains("format") && j["format"] != kSpecFormat) {
      throw SpecError("embedding spec: unexpected format tag");
    }
    if (j.contains("version") && int_field(j, "version") != kSpecVersion) {
      throw SpecError("embedding spec: unsupported version " + field(j, "version").dump());
    }
  }
  const auto& kind_v = field(j, "kind");
  if (!kind_v.is_string()) throw SpecError("embedding spec: 'kind' must be a string");
  const auto kind = kind_v.get<std::string>();

  auto child = [&](const char* key) { return from_json_node(field(j, key), false); };
  std::optional<Embedding> out;
  if (kind == "polynomial") {
    reject_unknown(j, {"format", "version", "kind", "d", "n", "components"});
    const int d = int_field(j, "d");
    const auto& comps = field(j, "components");
    if (!comps.is_array()) throw SpecError("polynomial: 'components' must be an array");
    std::vector<PolynomialComponent> parsed;
    for (const auto& comp : comps) {
      if (!comp.is_array()) throw SpecError("polynomial: each component must be a list of terms");
      PolynomialComponent terms;
      for (const auto& term : comp) {
        if (!term.is_array() || term.size() != 2 || !term[0].is_array()) {
          throw SpecError("polynomial: each term must be [multi-index, coefficient]");
        }
        Monomial m;
        for (const auto& e : term[0]) {
          if (!e.is_number_integer()) throw SpecError("polynomial: exponents must be integers");
          m.exponents.push_back(e.get<int>());
        }
        m.coeff = number(term[1]);
        terms.push_back(std::move(m));
      }
      parsed.push_back(std::move(terms));
    }
    out = polynomial(d, std::move(parsed));
  } else if (kind == "moment_curve") {
    reject_unknown(j, {"format", "version", "kind", "d", "n", "k"});
    out = moment_curve(int_field(j, "k"));
  } else if (kind == "graph") {
    reject_unknown(j, {"format", "version", "kind", "d", "n", "inner"});
    out = graph(child("inner"));
  } else if (kind == "affine") {
    reject_unknown(j, {"format", "version", "kind", "d", "n", "matrix", "offset"});
    const auto& rows = field(j, "matrix");
    if (!rows.is_array() || rows.empty()) throw SpecError("affine: 'matrix' must be a non-empty array of rows");
    const auto cols = rows[0].is_array() ? rows[0].size() : 0;
    Mat a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Vec r = vector_from(rows[i]);
      if (static_cast<std::size_t>(r.size()) != cols) throw SpecError("affine: ragged matrix");
      a.row(static_cast<Eigen::Index>(i)) = r.transpose();
    }
    Vec b = j.contains("offset") ? vector_from(j["offset"]) : Vec::Zero(a.rows());
    out = affine(std::move(a), std::move(b));
  } else if (kind == "lift") {
    reject_unknown(j, {"format", "version", "kind", "d", "n", "inner"});
    out = lift(child("inner"));
  } else if (kind == "central_projection") {
    reject_unknown(j, {"format", "version", "kind", "d", "n", "inner", "divide_by"});
    const int idx = j.contains("divide_by") ? int_field(j, "divide_by") : -1;
    out = project_linear_to_affine(child("inner"), idx);
  } else if (kind == "composed") {
    reject_unknown(j, {"format", "version", "kind", "d", "n", "outer", "inner"});
    out = composed(child("outer"), child("inner"));
  } else {
    throw SpecError("embedding spec: unknown kind '" + kind + "'");
  }
  check_declared_dims(j, *out);
  return *out;
}

std::string Embedding::digest() const {
  const std::string canonical = to_json().dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Embedding parse_embedding(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("embedding spec: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("version")) throw SpecError("embedding spec: missing field 'version'");
  return Embedding::from_json(j);
}

Vec eval_embedding(const Embedding& f, const Vec& x) { return f.eval(x); }

Mat jacobian_embedding(const Embedding& f, const Vec& x) { return f.jacobian(x); }

Mat finite_difference_jacobian(const Embedding& f, const Vec& x) {
  Mat jac(f.n(), f.d());
  Vec probe = x;
  for (int j = 0; j < f.d(); ++j) {
    const double h = 1e-6 * (1.0 + std::abs(x(j)));
    probe(j) = x(j) + h;
    const Vec plus = f.eval(probe);
    probe(j) = x(j) - h;
    const Vec minus = f.eval(probe);
    probe(j) = x(j);
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

Embedding lift_affine_to_linear(const Embedding& f) { return Embedding::lift(f); }

std::vector<Vec> default_probes(int d, int count) {
  std::vector<Vec> out;
  out.push_back(Vec::Zero(d));
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < count; ++i) {
    Vec p(d);
    for (int k = 0; k < d; ++k) p(k) = u(rng);
    out.push_back(std::move(p));
  }
  return out;
}

Embedding project_linear_to_affine(const Embedding& f, int divide_by, std::optional<std::vector<Vec>> probes) {
  const int idx = projected_index(f, divide_by);
  const auto pts = probes ? *probes : default_probes(f.d());
  for (const auto& p : pts) {
    const double v = f.eval(p)(idx);
    if (!(std::abs(v) >= kProjectionThreshold)) {
      std::string where;
      for (Eigen::Index i = 0; i < p.size(); ++i) where += (i ? ", " : "") + std::to_string(p(i));
      throw ProjectionError("project_linear_to_affine: coordinate " + std::to_string(idx) +
                            " vanishes at probe (" + where + ")");
    }
  }
  return Embedding::central_projection(f, idx);
}

Embedding inverse_stereographic(int d) {
  std::vector<PolynomialComponent> comps;
  auto unit = [d](int i, int power) {
    std::vector<int> e(static_cast<std::size_t>(d), 0);
    e[static_cast<std::size_t>(i)] = power;
    return e;
  };
  for (int i = 0; i < d; ++i) comps.push_back({Monomial{unit(i, 1), 2.0}});
  PolynomialComponent norm_sq;
  for (int i = 0; i < d; ++i) norm_sq.push_back(Monomial{unit(i, 2), 1.0});
  PolynomialComponent minus = norm_sq;
  minus.push_back(Monomial{std::vector<int>(static_cast<std::size_t>(d), 0), -1.0});
  PolynomialComponent plus = norm_sq;
  plus.push_back(Monomial{std::vector<int>(static_cast<std::size_t>(d), 0), 1.0});
  comps.push_back(std::move(minus));
  comps.push_back(std::move(plus));
  return Embedding::central_projection(Embedding::polynomial(d, std::move(comps)));
}

double vandermonde_det(std::span<const double> t) {
  double p = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) p *= t[j] - t[i];
  }
  return p;
}

}  // namespace hrtrap
