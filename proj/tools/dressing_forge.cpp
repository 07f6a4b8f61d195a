// dressing-forge: scenario-driven construction and verification of dressed
// frames, Egoroff metrics and flat Lagrangian immersions.
//
// Exit status: 0 success, 1 parse error, 2 validation error, 3 check failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"

#include "dressing_forge/pipeline.hpp"

namespace df = dressing_forge;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCheck = 3;

struct Options {
  std::string scenario;
  std::string out = ".";
  double step = 1e-2;
  double tol_scale = 1.0;
};

int print_report(const df::VerificationReport& report) {
  for (const auto& r : report.records()) {
    if (r.skipped) {
      std::printf("SKIP  %-44s %s\n", r.name.c_str(), r.status.c_str());
    } else {
      std::printf("%s  %-44s residual=%.3e tol=%.1e\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.residual, r.tolerance);
    }
  }
  std::printf("%s\n", report.all_pass() ? "all checks passed" : "some checks FAILED");
  return report.all_pass() ? kExitOk : kExitCheck;
}

int cmd_seed(const Options& o) {
  const auto s = df::load_scenario(o.scenario);
  const df::ExtendedFrame frame(s.seed);
  const auto metric = df::metric_from_frame(frame, s.grid);
  const fs::path path = fs::path(o.out) / "seed_metric.csv";
  df::write_text(path, df::metric_table_csv(metric));
  std::printf("seed: n=%d, %s, %zu grid points -> %s\n", s.n, s.seed.is_spherical() ? "constant (spherical)" : "non-constant",
              s.grid.size(), path.string().c_str());
  return kExitOk;
}

int cmd_dress(const Options& o) {
  const auto s = df::load_scenario(o.scenario);
  const auto frame = df::build_frame(s);
  const auto metric = df::metric_from_frame(frame, s.grid);
  const fs::path path = fs::path(o.out) / "metric.csv";
  df::write_text(path, df::metric_table_csv(metric));
  std::printf("dress: %zu records, sigma-compatible=%s, spherical=%s -> %s\n", frame.history().size(),
              frame.sigma_compatible() ? "yes" : "no", frame.spherical() ? "yes" : "no", path.string().c_str());
  if (metric.nonpositive_points > 0) {
    std::printf("warning: %zu grid points have a non-positive h_i\n", metric.nonpositive_points);
  }
  return kExitOk;
}

int cmd_verify(const Options& o) {
  const auto s = df::load_scenario(o.scenario);
  const auto frame = df::build_frame(s);
  const auto report = df::run_verification(s, frame, {o.step, o.tol_scale});
  df::write_text(fs::path(o.out) / "report.json", df::report_to_json(report).dump(2) + "\n");
  return print_report(report);
}

int write_export(const df::Scenario& s, const df::ExtendedFrame& frame, const Options& o) {
  if (!s.exports) df::fail(df::ErrorKind::ValidationError, "scenario has no export section");
  const auto& e = *s.exports;
  const df::cd lambda = s.lambdas[e.lambda_index];
  const std::string text = e.format == "csv" ? df::export_csv(s, frame, e, lambda) : df::export_obj(s, frame, e, lambda);
  const fs::path path = fs::path(o.out) / e.path;
  df::write_text(path, text);
  std::printf("export: %s -> %s\n", e.format.c_str(), path.string().c_str());
  return kExitOk;
}

int cmd_export(const Options& o) {
  const auto s = df::load_scenario(o.scenario);
  return write_export(s, df::build_frame(s), o);
}

int cmd_sweep(const Options& o) {
  const auto s = df::load_scenario(o.scenario);
  const auto frame = df::build_frame(s);
  df::ExportSpec e;
  if (s.exports) {
    e = *s.exports;
  } else {
    for (int k = 0; k < s.n; ++k) e.slice_axes.push_back(k);
    e.fixed.assign(static_cast<std::size_t>(s.n), 0.0);
  }
  std::string table;
  bool header = true;
  double zero_imag = -1.0;
  for (const df::cd l : s.lambdas) {
    const std::string csv = df::export_csv(s, frame, e, l);
    std::size_t pos = 0;
    std::size_t line = 0;
    while (pos < csv.size()) {
      const std::size_t end = csv.find('\n', pos);
      const std::string row = csv.substr(pos, end - pos);
      pos = end + 1;
      if (line++ == 0) {
        if (header) table += "lambda_re,lambda_im," + row + "\n";
        header = false;
        continue;
      }
      table += df::detail::fmt17(l.real()) + "," + df::detail::fmt17(l.imag()) + "," + row + "\n";
    }
    double imag = 0.0;
    std::vector<int> dims;
    for (const auto& u : df::detail::slice_points(s, e, dims)) imag = std::max(imag, frame.X(u, l).imag().cwiseAbs().maxCoeff());
    std::printf("lambda = %+.6g %+.6gi   max |Im X| = %.3e\n", l.real(), l.imag(), imag);
    if (l == df::cd{0.0, 0.0}) zero_imag = imag;
  }
  const fs::path path = fs::path(o.out) / "sweep.csv";
  df::write_text(path, table);
  std::printf("sweep -> %s\n", path.string().c_str());
  if (zero_imag >= 0.0) {
    const double tol = s.tol("limit_net_real") * o.tol_scale;
    const bool ok = zero_imag < tol;
    std::printf("%s  lambda=0 slice real: %.3e < %.1e\n", ok ? "PASS" : "FAIL", zero_imag, tol);
    if (!ok) return kExitCheck;
  }
  return kExitOk;
}

int cmd_permute(const Options& o) {
  const auto s = df::load_scenario(o.scenario);
  if (!s.permute) df::fail(df::ErrorKind::ValidationError, "scenario has no permute section");
  const auto frame = df::build_frame(s);
  const auto& p = *s.permute;
  df::HermitianProjection pi1, pi2;
  try {
    pi1 = df::project_onto_span(p.span1);
    pi2 = df::project_onto_span(p.span2);
  } catch (const df::Error& e) {
    df::fail(df::ErrorKind::ValidationError, std::string("permute projections: ") + e.what());
  }
  const double tol = s.tol("permutability") * o.tol_scale;
  df::PermutedDressing result;
  try {
    result = df::dress_permuted(frame, p.z1, pi1, p.z2, pi2, {s.grid, s.lambdas, tol});
  } catch (const df::Error& e) {
    df::fail(df::ErrorKind::ValidationError, e.what());
  }
  // Loop-element identity at random spectral parameters.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  double loop_gap = 0.0;
  for (int i = 0; i < 20; ++i) {
    const df::cd l{unit(rng), unit(rng)};
    const df::CMatrix a = df::eval_two_point(p.z2, std::conj(p.z2), result.rho2.matrix(), l) *
                          df::eval_two_point(p.z1, std::conj(p.z1), pi1.matrix(), l);
    const df::CMatrix b = df::eval_two_point(p.z1, std::conj(p.z1), result.rho1.matrix(), l) *
                          df::eval_two_point(p.z2, std::conj(p.z2), pi2.matrix(), l);
    loop_gap = std::max(loop_gap, df::max_norm(df::CMatrix(a - b)));
  }
  result.report.add("loop_element_identity", loop_gap, 1e-10 * o.tol_scale);
  std::printf("permutability over %zu grid points x %zu lambdas\n", s.grid.size(), s.lambdas.size());
  df::write_text(fs::path(o.out) / "permute_report.json", df::report_to_json(result.report).dump(2) + "\n");
  return print_report(result.report);
}

int cmd_run(const Options& o) {
  const auto s = df::load_scenario(o.scenario);
  const auto frame = df::build_frame(s);
  df::write_text(fs::path(o.out) / "metric.csv", df::metric_table_csv(df::metric_from_frame(frame, s.grid)));
  if (s.exports) write_export(s, frame, o);
  const auto report = df::run_verification(s, frame, {o.step, o.tol_scale});
  df::write_text(fs::path(o.out) / "report.json", df::report_to_json(report).dump(2) + "\n");
  return print_report(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dressing of vacuum Egoroff frames: construction, verification and export"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", opt.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--step", opt.step, "RK4 step for the oracle checks")->check(CLI::PositiveNumber);
    sub->add_option("--tol-scale", opt.tol_scale, "multiplier applied to every tolerance")->check(CLI::PositiveNumber);
  };
  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const Options&);
  };
  const Sub subs[] = {
      {"seed", "vacuum metric table", cmd_seed},
      {"dress", "apply the dressing chain and write the metric table", cmd_dress},
      {"verify", "run the verification suite and write report.json", cmd_verify},
      {"export", "write the immersion slice (csv or obj)", cmd_export},
      {"sweep", "evaluate X over the lambda list", cmd_sweep},
      {"permute-check", "compare both orderings of a two-factor dressing", cmd_permute},
      {"run", "dress, export and verify", cmd_run},
  };
  for (const auto& s : subs) add_common(app.add_subcommand(s.name, s.help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }
  try {
    for (const auto& s : subs)
      if (app.got_subcommand(s.name)) return s.fn(opt);
  } catch (const df::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return e.kind() == df::ErrorKind::ParseError ? kExitParse : kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitOk;
}
