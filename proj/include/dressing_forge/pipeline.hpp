#ifndef DRESSING_FORGE_PIPELINE_HPP
#define DRESSING_FORGE_PIPELINE_HPP

// Scenario files (JSON) and the stages run by the command-line driver:
// build seed, apply a dressing chain, verify, export.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dressing_forge/dressing.hpp"
#include "dressing_forge/geometry.hpp"
#include "dressing_forge/oracle.hpp"

namespace dressing_forge {

inline constexpr int kSchemaVersion = 1;

struct ChainStep {
  std::string type;  // real | spherical | complex | two_pole | translation
  double alpha = 0.0;
  cd z;
  CMatrix span;
  RVector b;
};

struct ExportSpec {
  std::string format = "csv";  // csv | obj
  std::vector<int> slice_axes;
  std::vector<double> fixed;
  std::string path;
  std::size_t lambda_index = 0;
  int embed_a = 0;
  int embed_b = 1;
};

struct PermuteSpec {
  cd z1;
  CMatrix span1;
  cd z2;
  CMatrix span2;
};

/// Documented defaults; every entry can be overridden by the scenario.
inline std::map<std::string, double> default_tolerances() {
  return {{"reality", 1e-10},          {"lagrangian", 1e-10},     {"position", 1e-3},
          {"darboux_egoroff", 1e-3},   {"beta_symmetry", 1e-10},  {"sphere", 1e-9},
          {"norm_spread", 1e-10},      {"partial_invariance", 1e-3}, {"potential", 1e-3},
          {"limit_net_real", 1e-10},   {"limit_net_derivative", 1e-7}, {"oracle", 1e-6},
          {"realness", 1e-9},          {"residue", 1e-9},          {"permutability", 1e-9},
          {"base_point", 1e-12}};
}

inline std::vector<std::string> verification_names() {
  return {"reality", "base_point", "lagrangian", "position", "darboux_egoroff", "sphere", "partial_invariance",
          "potential", "limit_net", "oracle", "realness", "residue", "positivity"};
}

struct Scenario {
  int schema_version = kSchemaVersion;
  int n = 0;
  SeedProfile seed;
  Grid grid;
  std::vector<cd> lambdas;
  std::vector<ChainStep> chain;
  std::map<std::string, bool> verify;
  std::map<std::string, double> tolerances = default_tolerances();
  std::optional<ExportSpec> exports;
  std::optional<PermuteSpec> permute;

  double tol(const std::string& name) const { return tolerances.at(name); }
  bool enabled(const std::string& name) const {
    auto it = verify.find(name);
    return it == verify.end() ? true : it->second;
  }
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void parse_error(const std::string& what) { fail(ErrorKind::ParseError, what); }
[[noreturn]] inline void validation_error(const std::string& what) { fail(ErrorKind::ValidationError, what); }

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) parse_error(what + " must be a number");
  return j.get<double>();
}

inline cd complex_number(const json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return {j[0].get<double>(), j[1].get<double>()};
  parse_error(what + " must be a number or an [re, im] pair");
}

inline const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) parse_error(where + ": missing \"" + key + "\"");
  return j.at(key);
}

/// Row-major n x k matrix of numbers or [re, im] pairs.
inline CMatrix parse_span(const json& j, int n, const std::string& where) {
  const json& rows = j.is_object() ? field(j, "span", where) : j;
  if (!rows.is_array() || rows.empty()) parse_error(where + ": span must be a non-empty array of rows");
  if (static_cast<int>(rows.size()) != n) validation_error(where + ": span needs " + std::to_string(n) + " rows");
  const auto k = rows[0].is_array() ? rows[0].size() : 0;
  if (k == 0) parse_error(where + ": span rows must be non-empty arrays");
  CMatrix m(n, static_cast<Eigen::Index>(k));
  for (int r = 0; r < n; ++r) {
    if (!rows[static_cast<std::size_t>(r)].is_array() || rows[static_cast<std::size_t>(r)].size() != k) {
      parse_error(where + ": span rows must all have the same length");
    }
    for (std::size_t c = 0; c < k; ++c) m(r, static_cast<Eigen::Index>(c)) = complex_number(rows[static_cast<std::size_t>(r)][c], where + " entry");
  }
  return m;
}

inline RVector parse_real_vector(const json& j, int n, const std::string& where) {
  if (!j.is_array()) parse_error(where + " must be an array");
  if (static_cast<int>(j.size()) != n) validation_error(where + " needs " + std::to_string(n) + " entries");
  RVector v(n);
  for (int i = 0; i < n; ++i) v(i) = number(j[static_cast<std::size_t>(i)], where);
  return v;
}

inline AxisProfile parse_profile(const json& j, const std::string& where) {
  const std::string type = field(j, "type", where).get<std::string>();
  if (type == "constant") {
    const double r = number(field(j, "r", where), where + ".r");
    if (!(r > 0.0)) validation_error(where + ": constant profile needs r > 0");
    return ConstantProfile{r};
  }
  if (type == "polynomial") {
    PolynomialProfile p;
    for (const auto& c : field(j, "coeffs", where)) p.coeffs.push_back(number(c, where + ".coeffs"));
    if (j.contains("domain")) {
      const auto& d = j.at("domain");
      if (!d.is_array() || d.size() != 2) parse_error(where + ".domain must be [lo, hi]");
      p.lo = number(d[0], where + ".domain");
      p.hi = number(d[1], where + ".domain");
    }
    return p;
  }
  if (type == "sampled") {
    std::vector<double> knots, values;
    for (const auto& c : field(j, "knots", where)) knots.push_back(number(c, where + ".knots"));
    for (const auto& c : field(j, "values", where)) values.push_back(number(c, where + ".values"));
    return make_sampled_profile(std::move(knots), std::move(values));
  }
  parse_error(where + ": unknown profile type \"" + type + "\"");
}

}  // namespace detail

/// Parses and validates a scenario. Malformed input raises ParseError,
/// semantic violations raise ValidationError naming the rule.
inline Scenario parse_scenario(const nlohmann::json& j) {
  using detail::field;
  using detail::number;
  Scenario s;
  try {
    if (!j.is_object()) detail::parse_error("scenario must be a JSON object");
    s.schema_version = field(j, "schema_version", "scenario").get<int>();
    if (s.schema_version != kSchemaVersion) {
      detail::validation_error("unsupported schema_version " + std::to_string(s.schema_version));
    }
    s.n = field(j, "n", "scenario").get<int>();
    if (s.n < 1) detail::validation_error("n must be positive");

    const auto& seed = field(j, "seed", "scenario");
    const auto& profiles = field(seed, "profiles", "seed");
    if (!profiles.is_array()) detail::parse_error("seed.profiles must be an array");
    if (static_cast<int>(profiles.size()) != s.n) detail::validation_error("seed.profiles needs n entries");
    std::vector<AxisProfile> axes;
    for (std::size_t i = 0; i < profiles.size(); ++i) axes.push_back(detail::parse_profile(profiles[i], "seed.profiles[" + std::to_string(i) + "]"));
    s.seed = SeedProfile(std::move(axes));

    const auto& grid = field(j, "grid", "scenario");
    if (!grid.is_array() || static_cast<int>(grid.size()) != s.n) detail::validation_error("grid needs one [min, max, points] per axis");
    std::vector<GridAxis> gaxes;
    for (const auto& a : grid) {
      if (!a.is_array() || a.size() != 3) detail::parse_error("grid axes must be [min, max, points]");
      gaxes.push_back({number(a[0], "grid min"), number(a[1], "grid max"), a[2].get<int>()});
    }
    s.grid = Grid(std::move(gaxes));
    for (std::size_t p = 0; p < s.grid.size(); p += std::max<std::size_t>(1, s.grid.size() - 1)) s.seed.check_domain(s.grid.point(p));

    if (j.contains("lambdas")) {
      for (const auto& l : j.at("lambdas")) s.lambdas.push_back(detail::complex_number(l, "lambdas entry"));
    }
    if (s.lambdas.empty()) s.lambdas.push_back({1.0, 0.0});

    if (j.contains("chain")) {
      std::size_t idx = 0;
      for (const auto& c : j.at("chain")) {
        const std::string where = "chain[" + std::to_string(idx++) + "]";
        ChainStep step;
        step.type = field(c, "type", where).get<std::string>();
        if (step.type == "real" || step.type == "spherical" || step.type == "translation") {
          step.alpha = number(field(c, "alpha", where), where + ".alpha");
          if (step.alpha == 0.0) detail::validation_error(where + ": alpha must be nonzero");
        } else if (step.type == "complex" || step.type == "two_pole") {
          step.z = detail::complex_number(field(c, "z", where), where + ".z");
          if (step.z.imag() == 0.0) detail::validation_error(where + ": z must be off the real axis");
          if (step.type == "two_pole" && step.z.real() == 0.0) detail::validation_error(where + ": two_pole needs Re z != 0");
        } else {
          detail::parse_error(where + ": unknown chain type \"" + step.type + "\"");
        }
        if (step.type == "translation") {
          step.b = detail::parse_real_vector(field(c, "b", where), s.n, where + ".b");
        } else {
          step.span = detail::parse_span(field(c, "projection", where), s.n, where + ".projection");
        }
        s.chain.push_back(std::move(step));
      }
    }

    if (j.contains("verify")) {
      for (const auto& [k, v] : j.at("verify").items()) {
        const auto names = verification_names();
        if (std::find(names.begin(), names.end(), k) == names.end()) detail::validation_error("unknown verify toggle \"" + k + "\"");
        s.verify[k] = v.get<bool>();
      }
    }
    if (j.contains("tolerances")) {
      for (const auto& [k, v] : j.at("tolerances").items()) {
        if (!s.tolerances.count(k)) detail::validation_error("unknown tolerance \"" + k + "\"");
        s.tolerances[k] = number(v, "tolerances." + k);
      }
    }

    if (j.contains("export")) {
      const auto& e = j.at("export");
      ExportSpec x;
      if (e.contains("format")) x.format = e.at("format").get<std::string>();
      if (x.format != "csv" && x.format != "obj") detail::validation_error("export.format must be csv or obj");
      for (const auto& a : field(e, "slice_axes", "export")) x.slice_axes.push_back(a.get<int>());
      for (int a : x.slice_axes)
        if (a < 0 || a >= s.n) detail::validation_error("export.slice_axes entries must be < n");
      if (x.slice_axes.empty()) detail::validation_error("export.slice_axes must not be empty");
      if (x.format == "obj" && x.slice_axes.size() != 2) detail::validation_error("obj export needs exactly two slice axes");
      x.fixed.assign(static_cast<std::size_t>(s.n), 0.0);
      if (e.contains("fixed")) {
        const RVector f = detail::parse_real_vector(e.at("fixed"), s.n, "export.fixed");
        for (int i = 0; i < s.n; ++i) x.fixed[static_cast<std::size_t>(i)] = f(i);
      }
      x.path = e.contains("path") ? e.at("path").get<std::string>() : std::string("immersion.") + x.format;
      if (e.contains("lambda_index")) x.lambda_index = e.at("lambda_index").get<std::size_t>();
      if (x.lambda_index >= s.lambdas.size()) detail::validation_error("export.lambda_index out of range");
      if (e.contains("embedding")) {
        const auto& em = e.at("embedding");
        if (!em.is_array() || em.size() != 2) detail::parse_error("export.embedding must be [a, b]");
        x.embed_a = em[0].get<int>();
        x.embed_b = em[1].get<int>();
        if (x.embed_a < 0 || x.embed_a >= s.n || x.embed_b < 0 || x.embed_b >= s.n) {
          detail::validation_error("export.embedding components must be < n");
        }
      }
      s.exports = x;
    }

    if (j.contains("permute")) {
      const auto& p = j.at("permute");
      PermuteSpec ps;
      ps.z1 = detail::complex_number(field(p, "z1", "permute"), "permute.z1");
      ps.z2 = detail::complex_number(field(p, "z2", "permute"), "permute.z2");
      ps.span1 = detail::parse_span(field(p, "pi1", "permute"), s.n, "permute.pi1");
      ps.span2 = detail::parse_span(field(p, "pi2", "permute"), s.n, "permute.pi2");
      s.permute = ps;
    }
  } catch (const nlohmann::json::exception& e) {
    detail::parse_error(std::string("malformed scenario: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::ValidationError) throw;
    detail::validation_error(e.what());
  }
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open scenario file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("malformed JSON: ") + e.what());
  }
  return parse_scenario(j);
}

/// Applies the dressing chain. Library precondition failures become ValidationError.
inline ExtendedFrame build_frame(const Scenario& s) {
  ExtendedFrame frame(s.seed);
  std::size_t idx = 0;
  for (const auto& step : s.chain) {
    const std::string where = "chain[" + std::to_string(idx++) + "] (" + step.type + ")";
    try {
      if (step.type == "translation") {
        frame = dress_translation(frame, step.alpha, step.b);
        continue;
      }
      const HermitianProjection pi = project_onto_span(step.span);
      if (step.type == "real") {
        frame = dress_real(frame, step.alpha, pi);
      } else if (step.type == "spherical") {
        frame = dress_spherical(frame, step.alpha, pi);
      } else if (step.type == "complex") {
        frame = dress_extended(frame, step.z, pi);
      } else {
        frame = dress_two_pole(frame, step.z, pi);
      }
    } catch (const Error& e) {
      std::string rule = e.what();
      if (e.kind() == ErrorKind::SphericalViolation) rule += " [rule: Im(pi) must be orthogonal to h(0)]";
      fail(ErrorKind::ValidationError, where + ": " + rule);
    }
  }
  for (const cd l : s.lambdas)
    for (const cd p : frame.apparent_poles())
      if (std::abs(l - p) <= pole_tolerance(p)) {
        fail(ErrorKind::ValidationError, "lambda value coincides with a dressing pole");
      }
  return frame;
}

struct VerifyOptions {
  double step = 1e-2;
  double tol_scale = 1.0;
};

/// The verification suite; every tolerance is read from the scenario.
inline VerificationReport run_verification(const Scenario& s, const ExtendedFrame& frame, const VerifyOptions& opt = {}) {
  auto tol = [&](const std::string& k) { return s.tol(k) * opt.tol_scale; };
  VerificationReport report;
  const Grid& grid = s.grid;
  const int n = s.n;
  const bool sigma = frame.sigma_compatible();
  std::vector<RVector> corners;
  {
    RVector lo(n), hi(n);
    for (int k = 0; k < n; ++k) {
      lo(k) = grid.axis(k).min;
      hi(k) = grid.axis(k).max;
    }
    corners = {lo, hi};
  }

  if (s.enabled("reality")) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double tau = 0.0;
    double sig = 0.0;
    const auto poles = frame.apparent_poles();
    for (int sample = 0; sample < 200; ++sample) {
      RVector u(n);
      for (int k = 0; k < n; ++k) u(k) = grid.axis(k).min + unit(rng) * (grid.axis(k).max - grid.axis(k).min);
      cd l{4.0 * unit(rng) - 2.0, 4.0 * unit(rng) - 2.0};
      const CMatrix e = frame.E(u, l);
      tau = std::max(tau, max_norm(CMatrix(frame.E(u, std::conj(l)).adjoint() * e - identity(n))));
      sig = std::max(sig, max_norm(CMatrix(e.transpose() * frame.E(u, -l) - identity(n))));
    }
    report.add("reality_tau", tau, tol("reality")).metadata["samples"] = "200";
    if (sigma) {
      report.add("reality_sigma", sig, tol("reality")).metadata["samples"] = "200";
    } else {
      report.skip("reality_sigma", "history contains tau-only factors");
    }
  }

  if (s.enabled("base_point")) {
    double worst = 0.0;
    const RVector zero = RVector::Zero(n);
    for (const cd l : s.lambdas) {
      const FrameValue f = frame.eval(zero, l);
      worst = std::max({worst, max_norm(CMatrix(f.E - identity(n))), max_norm(CMatrix(f.X))});
    }
    report.add("base_point", worst, tol("base_point"));
  }

  const EgoroffMetric metric = metric_from_frame(frame, grid);

  if (s.enabled("positivity")) {
    report.add("h_positive", double(metric.nonpositive_points), 0.5).status =
        metric.nonpositive_points ? "h left the positive chart" : "";
  }

  if (s.enabled("realness") && sigma) {
    double worst = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p)
      worst = std::max({worst, max_imag(CMatrix(metric.h[p])), max_imag(metric.beta[p])});
    report.add("metric_real", worst, tol("realness"));
  }

  for (const cd l : s.lambdas) {
    std::ostringstream tag;
    tag << "(" << l.real() << "," << l.imag() << ")";
    if (s.enabled("lagrangian")) {
      const VerificationReport lag = check_lagrangian(frame, grid, l, tol("lagrangian"));
      for (auto rec : lag.records()) {
        rec.name += "@" + tag.str();
        report.append(std::move(rec));
      }
    }
    if (s.enabled("position")) {
      report.add("position_equation@" + tag.str(), position_equation_residual(frame, grid, l), tol("position"))
          .metadata["grid_points"] = std::to_string(grid.size());
    }
    if (s.enabled("sphere") && frame.spherical() && l.imag() == 0.0 && l.real() != 0.0) {
      const RVector c = s.seed.h(RVector::Zero(n));
      const auto r = check_sphere(sample_immersion(frame, grid, l), c, tol("sphere"));
      report.add("sphere@" + tag.str(), r.records().front().residual, tol("sphere"));
    }
  }

  if (s.enabled("darboux_egoroff")) {
    const auto r = check_darboux_egoroff(metric, tol("darboux_egoroff"));
    for (const auto& rec : r.records()) {
      if (rec.skipped) {
        report.skip(rec.name, rec.status);
      } else {
        const double t = rec.name == "beta_symmetric_zero_diagonal" ? tol("beta_symmetry") : rec.tolerance;
        report.add(rec.name, rec.residual, t).metadata["grid_points"] = std::to_string(grid.size());
      }
    }
  }

  if (s.enabled("partial_invariance") && frame.spherical()) {
    const auto r = check_partial_invariance(metric, tol("partial_invariance"), tol("norm_spread"));
    report.merge(r);
  }

  if (s.enabled("potential")) {
    std::vector<cd> closed(grid.size());
    bool available = true;
    for (std::size_t p = 0; p < grid.size() && available; ++p) {
      const auto phi = frame.closed_form_phi(grid.point(p));
      if (phi) {
        closed[p] = *phi;
      } else {
        available = false;
      }
    }
    if (available) {
      report.add("potential_closed_vs_path", potential_residual(metric, closed), tol("potential"));
    } else {
      report.skip("potential_closed_vs_path", "no closed-form potential for this history");
    }
  }

  if (s.enabled("limit_net") && sigma) {
    const auto r = check_limit_net(frame, grid, tol("limit_net_derivative"), tol("limit_net_real"));
    report.merge(r);
  }

  if (s.enabled("residue")) {
    double worst = 0.0;
    bool any = false;
    for (const auto& rec : frame.history()) {
      if (rec->kind() != RecordKind::Real && rec->kind() != RecordKind::Spherical) continue;
      any = true;
      const ExtendedFrame top = rec->parent().with_record(rec);
      for (std::size_t p = 0; p < grid.size(); ++p)
        worst = std::max(worst, max_norm(CMatrix(real_dressing_residue(top, grid.point(p)))));
    }
    if (any) report.add("residue_real_dressing", worst, tol("residue"));
  }

  if (s.enabled("oracle") && !frame.history().empty()) {
    double worst = 0.0;
    const MetricField field = exact_field(frame);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    double path_gap = 0.0;
    for (const auto& u : corners)
      for (const cd l : s.lambdas) {
        const FrameValue ref = frame.eval(u, l);
        const FrameValue a = integrate_frame(field, n, l, PathSpec::staircase(u, order), opt.step);
        std::vector<int> rev(order.rbegin(), order.rend());
        const FrameValue b = integrate_frame(field, n, l, PathSpec::staircase(u, rev), opt.step);
        worst = std::max({worst, max_norm(CMatrix(a.E - ref.E)), max_norm(CMatrix(a.X - ref.X))});
        path_gap = std::max({path_gap, max_norm(CMatrix(a.E - b.E)), max_norm(CMatrix(a.X - b.X))});
      }
    auto& r1 = report.add("oracle_rk4_vs_closed_form", worst, tol("oracle"));
    r1.metadata["step"] = std::to_string(opt.step);
    report.add("oracle_path_independence", path_gap, tol("oracle")).metadata["step"] = std::to_string(opt.step);
  }
  return report;
}

inline nlohmann::json report_to_json(const VerificationReport& r) {
  nlohmann::json out;
  out["all_pass"] = r.all_pass();
  out["checks"] = nlohmann::json::array();
  for (const auto& rec : r.records()) {
    nlohmann::json j;
    j["name"] = rec.name;
    j["residual"] = rec.residual;
    j["tolerance"] = rec.tolerance;
    j["pass"] = rec.pass;
    j["skipped"] = rec.skipped;
    if (!rec.status.empty()) j["status"] = rec.status;
    if (!rec.metadata.empty()) j["metadata"] = rec.metadata;
    out["checks"].push_back(j);
  }
  return out;
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Grid over the slice axes with the remaining coordinates fixed.
inline std::vector<RVector> slice_points(const Scenario& s, const ExportSpec& e, std::vector<int>& dims) {
  std::vector<GridAxis> axes;
  for (int a : e.slice_axes) axes.push_back(s.grid.axis(a));
  const Grid slice(axes);
  dims.clear();
  for (const auto& a : axes) dims.push_back(a.points);
  std::vector<RVector> out;
  out.reserve(slice.size());
  for (std::size_t p = 0; p < slice.size(); ++p) {
    RVector u(s.n);
    for (int k = 0; k < s.n; ++k) u(k) = e.fixed[static_cast<std::size_t>(k)];
    const RVector v = slice.point(p);
    for (std::size_t i = 0; i < e.slice_axes.size(); ++i) u(e.slice_axes[i]) = v(static_cast<Eigen::Index>(i));
    out.push_back(u);
  }
  return out;
}

}  // namespace detail

/// CSV: u1..un, Re X1, Im X1, ... (17 significant digits, header row).
inline std::string export_csv(const Scenario& s, const ExtendedFrame& frame, const ExportSpec& e, cd lambda) {
  std::vector<int> dims;
  const auto pts = detail::slice_points(s, e, dims);
  std::ostringstream out;
  for (int k = 0; k < s.n; ++k) out << "u" << k + 1 << ",";
  for (int k = 0; k < s.n; ++k) out << "re_X" << k + 1 << ",im_X" << k + 1 << (k + 1 < s.n ? "," : "\n");
  for (const auto& u : pts) {
    const CVector x = frame.X(u, lambda);
    for (int k = 0; k < s.n; ++k) out << detail::fmt17(u(k)) << ",";
    for (int k = 0; k < s.n; ++k) out << detail::fmt17(x(k).real()) << "," << detail::fmt17(x(k).imag()) << (k + 1 < s.n ? "," : "\n");
  }
  return out.str();
}

/// OBJ mesh of a 2D slice, vertices (Re X_a, Im X_a, Re X_b), two triangles per cell.
inline std::string export_obj(const Scenario& s, const ExtendedFrame& frame, const ExportSpec& e, cd lambda) {
  std::vector<int> dims;
  const auto pts = detail::slice_points(s, e, dims);
  std::ostringstream out;
  out << "# immersion slice, lambda = " << detail::fmt17(lambda.real()) << " + " << detail::fmt17(lambda.imag()) << "i\n";
  for (const auto& u : pts) {
    const CVector x = frame.X(u, lambda);
    out << "v " << detail::fmt17(x(e.embed_a).real()) << " " << detail::fmt17(x(e.embed_a).imag()) << " "
        << detail::fmt17(x(e.embed_b).real()) << "\n";
  }
  const int rows = dims[0];
  const int cols = dims[1];
  for (int i = 0; i + 1 < rows; ++i)
    for (int j = 0; j + 1 < cols; ++j) {
      const int a = i * cols + j + 1;
      const int b = a + 1;
      const int c = a + cols;
      const int d = c + 1;
      out << "f " << a << " " << b << " " << d << "\nf " << a << " " << d << " " << c << "\n";
    }
  return out.str();
}

/// Metric table on the scenario grid: u, h_i, phi, upper-triangle beta_ij (real parts).
inline std::string metric_table_csv(const EgoroffMetric& m) {
  const int n = m.grid.n();
  std::ostringstream out;
  for (int k = 0; k < n; ++k) out << "u" << k + 1 << ",";
  for (int k = 0; k < n; ++k) out << "h" << k + 1 << ",";
  out << "phi";
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out << ",beta" << i + 1 << j + 1;
  out << "\n";
  for (std::size_t p = 0; p < m.grid.size(); ++p) {
    const RVector u = m.grid.point(p);
    for (int k = 0; k < n; ++k) out << detail::fmt17(u(k)) << ",";
    for (int k = 0; k < n; ++k) out << detail::fmt17(m.h[p](k).real()) << ",";
    out << detail::fmt17(m.phi[p].real());
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out << "," << detail::fmt17(m.beta[p](i, j).real());
    out << "\n";
  }
  return out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

}  // namespace dressing_forge

#endif  // DRESSING_FORGE_PIPELINE_HPP
