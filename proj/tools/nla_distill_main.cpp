// nla-distill: figure sweeps, single operating points and the oracle suite.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nla/analytic.hpp"
#include "nla/errors.hpp"
#include "nla/figures.hpp"
#include "nla/format.hpp"
#include "nla/optimize.hpp"
#include "nla/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitIo = 2;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string out = ".";
  int cutoff = 20;
  double tolerance = 1e-10;
  double db_min = 0.0;
  double db_max = 40.0;
  double db_step = 1.0;
  std::vector<double> pis;
  std::optional<double> eps;
  int stages = 1;
  int n_max = 20;
  bool svg = false;
  unsigned threads = 0;
  std::string method = "closed_form";
  std::optional<double> lambda;
  std::optional<double> lambda_db;
};

nla::Method parse_method(const std::string& m) { return m == "simulate" ? nla::Method::Simulate : nla::Method::ClosedForm; }

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + nla::format_number(v[i]);
  return s;
}

std::vector<std::string> provenance(const std::string& command, const Options& o) {
  std::vector<std::string> lines{fmt::format("nla-distill {}", nla::kToolVersion), "command: " + command};
  std::string cfg = fmt::format("db_min={} db_max={} db_step={} method={}", nla::format_number(o.db_min),
                                nla::format_number(o.db_max), nla::format_number(o.db_step), o.method);
  if (!o.pis.empty()) cfg += " pi=" + join(o.pis);
  if (o.eps) cfg += " eps=" + nla::format_number(*o.eps);
  if (command == "fig11") cfg = fmt::format("n_max={}", o.n_max);
  if (command == "fig3" || command == "fig4") cfg = "lambda=0:0.01:0.99";
  lines.push_back("config: " + cfg);
  lines.push_back("loss convention: lambda = 1 - 10^(-lambda_db/10)");
  return lines;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  body(f);
  f.flush();
  if (!f) throw IoError("failed writing " + path.string());
}

int run_figure(const std::string& command, const Options& o) {
  nla::FigureConfig cfg;
  cfg.db_min = o.db_min;
  cfg.db_max = o.db_max;
  cfg.db_step = o.db_step;
  cfg.pis = o.pis;
  if (o.eps) cfg.eps_target = *o.eps;
  cfg.n_max = o.n_max;
  cfg.method = parse_method(o.method);
  cfg.threads = o.threads;
  const auto panels = nla::make_figure(command, cfg);

  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  if (ec) throw IoError("cannot create output directory " + o.out + ": " + ec.message());
  const auto prov = provenance(command, o);
  for (const auto& p : panels) {
    const auto csv = std::filesystem::path(o.out) / (p.name + ".csv");
    write_file(csv, [&](std::ostream& s) { nla::write_csv(s, p, prov); });
    std::cout << csv.string() << '\n';
    if (o.svg) {
      const auto svg = std::filesystem::path(o.out) / (p.name + ".svg");
      write_file(svg, [&](std::ostream& s) { nla::write_svg(s, p); });
      std::cout << svg.string() << '\n';
    }
  }
  return kExitOk;
}

void print_result(const nla::DistillationResult& r, double lambda) {
  using nla::format_number;
  std::cout << fmt::format(
      "n_stages={} lambda={} lambda_db={} pi={} eps_b_given_a={} eps_a_given_b={} purity={} r_opt={} eta_opt={}\n",
      r.n_stages, format_number(lambda), format_number(nla::db_from_loss(lambda)), format_number(r.success_prob),
      format_number(r.eps_b_given_a), format_number(r.eps_a_given_b), format_number(r.purity), format_number(r.r_opt),
      format_number(r.eta_opt));
}

int run_point(const Options& o) {
  if (o.lambda.has_value() == o.lambda_db.has_value()) throw CLI::ValidationError("point needs exactly one of --lambda, --lambda-db");
  if (o.pis.size() != 1) throw CLI::ValidationError("point needs exactly one --pi value");
  const double lambda = o.lambda ? *o.lambda : nla::loss_from_db(*o.lambda_db);
  nla::OptimizeOptions opt;
  opt.method = parse_method(o.method);
  opt.validation_cutoff_1stage = o.cutoff;
  opt.validation_cutoff_2stage = std::min(o.cutoff, 10);
  if (o.eps) {
    const auto t = nla::purity_for_target_entanglement(*o.eps, lambda, o.pis[0], o.stages, opt);
    print_result(t.best, lambda);
    for (const auto& root : t.roots) {
      std::cout << "# root ";
      print_result(root, lambda);
    }
  } else {
    print_result(nla::optimize_entanglement(lambda, o.pis[0], o.stages, opt), lambda);
  }
  return kExitOk;
}

int run_verify(const Options& o) {
  nla::VerifyOptions v;
  v.max_tail_mass = o.tolerance;
  v.threads = o.threads;
  const auto results = nla::run_verification(v);
  std::size_t passed = 0;
  for (const auto& r : results) {
    passed += r.passed ? 1 : 0;
    std::cout << fmt::format("{} {} error={} tolerance={}{}\n", r.passed ? "PASS" : "FAIL", r.name,
                             nla::format_number(r.error), nla::format_number(r.tolerance),
                             r.detail.empty() ? "" : "  (" + r.detail + ")");
  }
  std::cout << fmt::format("{}/{} checks passed\n", passed, results.size());
  return passed == results.size() ? kExitOk : kExitInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement distillation with noiseless linear amplifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nla::kToolVersion));
  Options o;

  auto add_sweep = [&](CLI::App* c) {
    c->add_option("--out", o.out, "Output directory")->capture_default_str();
    c->add_option("--db-min", o.db_min, "Smallest channel loss in dB")->capture_default_str();
    c->add_option("--db-max", o.db_max, "Largest channel loss in dB")->capture_default_str();
    c->add_option("--db-step", o.db_step, "Loss step in dB")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--pi", o.pis, "Success probabilities")->check(CLI::Range(0.0, 1.0));
    c->add_option("--method", o.method, "closed_form or simulate")
        ->capture_default_str()
        ->check(CLI::IsMember({"closed_form", "simulate"}));
    c->add_flag("--svg", o.svg, "Also write an SVG chart per panel");
    c->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
  };

  std::vector<std::pair<std::string, CLI::App*>> figs;
  const std::map<std::string, std::string> descriptions{
      {"fig3", "Lossy EPR entanglement and purity versus loss"},
      {"fig4", "Purity-entanglement trade-off without amplification"},
      {"fig6", "Single-stage optimised entanglement and purity"},
      {"fig7", "Single-stage purity at fixed entanglement"},
      {"fig8", "Two-stage optimised entanglement and purity"},
      {"fig9", "Two-stage purity at fixed entanglement"},
      {"fig10", "One- versus two-stage comparison"},
      {"fig11", "Best entanglement versus number of stages"},
  };
  for (const auto& [name, desc] : descriptions) {
    auto* c = app.add_subcommand(name, desc);
    add_sweep(c);
    if (name == "fig7" || name == "fig9" || name == "fig10") c->add_option("--eps", o.eps, "Target entanglement");
    if (name == "fig11") c->add_option("--n-max", o.n_max, "Largest stage count")->capture_default_str()->check(CLI::PositiveNumber);
    figs.emplace_back(name, c);
  }

  auto* point = app.add_subcommand("point", "Optimise one operating point");
  point->add_option("--lambda", o.lambda, "Channel loss reflectivity")->check(CLI::Range(0.0, 1.0));
  point->add_option("--lambda-db", o.lambda_db, "Channel loss in dB")->check(CLI::NonNegativeNumber);
  point->add_option("--pi", o.pis, "Success probability")->required()->check(CLI::Range(0.0, 1.0));
  point->add_option("--stages", o.stages, "Number of stages")->capture_default_str()->check(CLI::PositiveNumber);
  point->add_option("--eps", o.eps, "Target entanglement (purity search)");
  point->add_option("--method", o.method, "closed_form or simulate")
      ->capture_default_str()
      ->check(CLI::IsMember({"closed_form", "simulate"}));
  point->add_option("--cutoff", o.cutoff, "Largest Fock cutoff for the circuit check")->capture_default_str()->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run the oracle suite");
  verify->add_option("--tolerance", o.tolerance, "Largest truncated population accepted")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  verify->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInfeasible;
  }

  try {
    for (const auto& [name, c] : figs)
      if (c->parsed()) return run_figure(name, o);
    if (point->parsed()) return run_point(o);
    if (verify->parsed()) return run_verify(o);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfeasible;
  }
  return kExitInfeasible;
}
