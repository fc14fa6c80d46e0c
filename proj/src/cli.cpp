#include "hrtrap/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "hrtrap/bounds.hpp"
#include "hrtrap/certificate.hpp"
#include "hrtrap/embedding.hpp"
#include "hrtrap/hurwitz_radon.hpp"
#include "hrtrap/test_function.hpp"
#include "hrtrap/trapezoid_search.hpp"

namespace hrtrap {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw UsageError("'" + path + "' is not valid JSON: " + e.what());
  }
}

// --------------------------------------------------------------------------

struct BoundsArgs {
  std::int64_t d = 0;
  std::int64_t k = 0;
  std::string format = "text";
};

int run_bounds(const BoundsArgs& a, std::ostream& out, std::ostream& err) {
  if (a.d < 1 || a.k < 2) {
    err << "bounds: need d >= 1 and k >= 2\n";
    return kExitUsage;
  }
  const auto report = compare_table(a.d, a.k);
  out << (a.format == "csv" ? format_report_csv(report) : format_report_text(report));
  return kExitOk;
}

struct HrArgs {
  std::int64_t d = 0;
  bool verify = false;
  int trials = 1000;
  std::uint64_t seed = 0;
  std::string out_path;
};

int run_hr(const HrArgs& a, std::ostream& out, std::ostream& err) {
  if (a.d < 1) {
    err << "hr: d must be at least 1\n";
    return kExitUsage;
  }
  const auto fam = build_hr_family(a.d);
  write_output(a.out_path, fam.to_text(), out);
  if (!a.verify) return kExitOk;

  const auto check = check_family(fam);
  std::mt19937_64 rng(a.seed);
  std::normal_distribution<double> gauss;
  auto random_vec = [&](Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = gauss(rng);
    return v;
  };
  double worst_b = 0.0;
  double worst_c = 0.0;
  const int wd = w_dimension(fam);
  for (int t = 0; t < a.trials; ++t) {
    const Vec z = random_vec(fam.rho());
    const Vec x = random_vec(fam.dim());
    const Vec w = random_vec(wd);
    const double nb = bilinear_b(fam, z, x).norm();
    worst_b = std::max(worst_b, std::abs(nb - z.norm() * x.norm()) / (z.norm() * x.norm()));
    const double nc = trilinear_c(fam, w, z, x).norm();
    worst_c = std::max(worst_c, std::abs(nc - w.norm() * z.norm() * x.norm()) / (w.norm() * z.norm() * x.norm()));
  }
  const bool norms_ok = worst_b <= 1e-10 && worst_c <= 1e-10;
  std::ostream& report = a.out_path.empty() ? err : out;
  auto line = [&](const char* name, bool ok) { report << "check " << name << ": " << (ok ? "pass" : "FAIL") << "\n"; };
  report << "d " << fam.dim() << " rho " << fam.rho() << " matrices " << fam.matrices().size() << "\n";
  line("family_size", check.sizes_ok);
  line("orthogonal", check.orthogonal);
  line("skew_symmetric", check.skew);
  line("anticommuting", check.anticommuting);
  report << std::setprecision(3) << "check norm_multiplicative (" << a.trials << " trials, worst B " << worst_b
         << ", worst C " << worst_c << "): " << (norms_ok ? "pass" : "FAIL") << "\n";
  return check.ok() && norms_ok ? kExitOk : kExitCheckFailed;
}

struct FindArgs {
  std::string embedding;
  std::string variant = "thm1";
  std::size_t starts = 64;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  int max_iterations = 200;
  double box = 1.0;
  unsigned threads = 0;
  std::string out_path;
};

int run_find(const FindArgs& a, std::ostream& out, std::ostream& err) {
  Embedding f = [&] {
    try {
      return parse_embedding(read_file(a.embedding));
    } catch (const SpecError& e) {
      throw UsageError(e.what());
    }
  }();
  SearchOptions opts;
  opts.variant = variant_from_string(a.variant);
  opts.starts = a.starts;
  opts.residual_tolerance = a.tol;
  opts.seed = a.seed;
  opts.max_iterations = a.max_iterations;
  opts.box = a.box;
  opts.threads = a.threads;
  validate_options(opts);
  const auto fam = build_hr_family(f.d());
  const auto result = search(f, fam, opts);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  if (!result.found()) {
    write_output(a.out_path, failure_report_to_json(result.failure, result.warnings, f.digest()).dump(2) + "\n", out);
    err << "search exhausted " << result.failure.starts << " starts; best residual " << result.failure.best_residual
        << "\n";
    return kExitSearchExhausted;
  }
  write_output(a.out_path, certificate_to_json(*result.certificate).dump(2) + "\n", out);
  (a.out_path.empty() ? err : out) << "classification: " << to_string(result.certificate->classification) << "\n";
  return kExitOk;
}

struct CertifyArgs {
  std::string certificate;
  std::string embedding;
  double tol = 1e-6;
  std::string out_path;
};

int run_certify(const CertifyArgs& a, std::ostream& out, std::ostream&) {
  Certificate cert;
  Embedding f = Embedding::identity(1);
  try {
    cert = certificate_from_json(parse_json_file(a.certificate));
    f = parse_embedding(read_file(a.embedding));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto report = validate_certificate(f, cert, a.tol);
  auto j = validation_report_to_json(report, a.tol);
  j["embedding_digest_matches"] = cert.embedding_digest == f.digest();
  write_output(a.out_path, j.dump(2) + "\n", out);
  return report.passed() ? kExitOk : kExitCheckFailed;
}

struct PhiEvalArgs {
  std::string embedding;
  std::string point;
  std::string variant = "thm1";
};

int run_phi_eval(const PhiEvalArgs& a, std::ostream& out, std::ostream& err) {
  try {
    const auto f = parse_embedding(read_file(a.embedding));
    const auto raw = phi_point_from_json(parse_json_file(a.point));
    const auto variant = variant_from_string(a.variant);
    if ((variant == Variant::Thm2) != raw.w.has_value()) {
      err << "phi-eval: variant " << a.variant << (raw.w ? " takes no w" : " requires w") << "\n";
      return kExitUsage;
    }
    const auto fam = build_hr_family(f.d());
    const auto p = make_phi_point(fam, raw.p1, raw.p2, raw.z, raw.w);
    const Vec value = evaluate_phi(f, fam, p);
    json j;
    j["phi"] = json::array();
    for (Eigen::Index i = 0; i < value.size(); ++i) j["phi"].push_back(value(i));
    j["norm"] = value.norm();
    out << j.dump() << "\n";
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    err << "phi-eval: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hurwitz-Radon test functions, inscribed trapezoid search and k-regular bounds", "hrtrap"};
  app.require_subcommand(1);

  BoundsArgs bounds;
  auto* sub_bounds = app.add_subcommand("bounds", "Lower bounds on n(d,k)");
  sub_bounds->add_option("--d", bounds.d, "domain dimension")->required();
  sub_bounds->add_option("--k", bounds.k, "regularity order")->required();
  sub_bounds->add_option("--format", bounds.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

  HrArgs hr;
  auto* sub_hr = app.add_subcommand("hr", "Build a Hurwitz-Radon matrix family");
  sub_hr->add_option("--d", hr.d, "dimension")->required();
  sub_hr->add_flag("--verify", hr.verify, "run the invariant suite");
  sub_hr->add_option("--trials", hr.trials, "random norm checks (default 1000)")->check(CLI::NonNegativeNumber);
  sub_hr->add_option("--seed", hr.seed, "seed for the norm checks (default 0)");
  sub_hr->add_option("--out", hr.out_path, "family file (default stdout)");

  FindArgs find;
  auto* sub_find = app.add_subcommand("find", "Search for an inscribed trapezoid or collinear triple");
  sub_find->add_option("--embedding", find.embedding, "embedding spec file")->required();
  sub_find->add_option("--variant", find.variant, "thm1 or thm2")->check(CLI::IsMember({"thm1", "thm2"}));
  sub_find->add_option("--starts", find.starts, "multistart count (default 64)");
  sub_find->add_option("--tol", find.tol, "residual tolerance (default 1e-9)");
  sub_find->add_option("--seed", find.seed, "seed (default 0)");
  sub_find->add_option("--max-iterations", find.max_iterations, "iterations per start (default 200)");
  sub_find->add_option("--box", find.box, "half-width of the sampling box (default 1)");
  sub_find->add_option("--threads", find.threads, "worker threads (default: hardware concurrency)");
  sub_find->add_option("--out", find.out_path, "certificate file (default stdout)");

  CertifyArgs certify;
  auto* sub_certify = app.add_subcommand("certify", "Validate a certificate against an embedding");
  sub_certify->add_option("--certificate", certify.certificate, "certificate file")->required();
  sub_certify->add_option("--embedding", certify.embedding, "embedding spec file")->required();
  sub_certify->add_option("--tol", certify.tol, "validation tolerance (default 1e-6)");
  sub_certify->add_option("--out", certify.out_path, "report file (default stdout)");

  PhiEvalArgs phi_eval;
  auto* sub_phi = app.add_subcommand("phi-eval", "Evaluate the test function at a point");
  sub_phi->add_option("--embedding", phi_eval.embedding, "embedding spec file")->required();
  sub_phi->add_option("--point", phi_eval.point, "point file")->required();
  sub_phi->add_option("--variant", phi_eval.variant, "thm1 or thm2")->check(CLI::IsMember({"thm1", "thm2"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*sub_bounds) return run_bounds(bounds, out, err);
    if (*sub_hr) return run_hr(hr, out, err);
    if (*sub_find) return run_find(find, out, err);
    if (*sub_certify) return run_certify(certify, out, err);
    if (*sub_phi) return run_phi_eval(phi_eval, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace hrtrap
