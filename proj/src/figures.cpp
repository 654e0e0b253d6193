#include "nla/figures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "nla/analytic.hpp"
#include "nla/errors.hpp"
#include "nla/format.hpp"
#include "nla/parallel.hpp"

namespace nla {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<double> kDefaultPis{1e-1, 1e-2, 1e-3, 1e-4};

std::vector<double> lambda_axis() {
  std::vector<double> out;
  for (int i = 0; i < 100; ++i) out.push_back(i / 100.0);
  return out;
}

std::vector<double> pis_or(const FigureConfig& c, const std::vector<double>& fallback) {
  return c.pis.empty() ? fallback : c.pis;
}

double eps_or(const FigureConfig& c, double fallback) { return std::isnan(c.eps_target) ? fallback : c.eps_target; }

struct Point {
  double pi;
  double db;
  int n;
};

std::vector<Point> points(const std::vector<double>& pis, const std::vector<double>& dbs, const std::vector<int>& stages) {
  std::vector<Point> out;
  for (int n : stages)
    for (double pi : pis)
      for (double db : dbs) out.push_back({pi, db, n});
  return out;
}

struct OptRow {
  bool ok;
  DistillationResult r;
};

std::vector<OptRow> optimize_points(const std::vector<Point>& pts, const FigureConfig& c) {
  OptimizeOptions o;
  o.method = c.method;
  return parallel_map(
      pts.size(),
      [&](std::size_t i) {
        try {
          return OptRow{true, optimize_entanglement(loss_from_db(pts[i].db), pts[i].pi, pts[i].n, o)};
        } catch (const InfeasibleError&) {
          return OptRow{false, {}};
        }
      },
      c.threads);
}

struct TargetRow {
  bool ok;
  DistillationResult r;
  std::size_t roots;
};

std::vector<TargetRow> target_points(const std::vector<Point>& pts, double eps, const FigureConfig& c) {
  OptimizeOptions o;
  o.method = c.method;
  return parallel_map(
      pts.size(),
      [&](std::size_t i) {
        try {
          const auto t = purity_for_target_entanglement(eps, loss_from_db(pts[i].db), pts[i].pi, pts[i].n, o);
          return TargetRow{true, t.best, t.roots.size()};
        } catch (const InfeasibleError&) {
          return TargetRow{false, {}, 0};
        } catch (const UnachievableError&) {
          return TargetRow{false, {}, 0};
        }
      },
      c.threads);
}

double tradeoff_or_nan(double eps, double lambda) {
  try {
    return purity_tradeoff(eps, lambda);
  } catch (const UnachievableError&) {
    return kNaN;
  }
}

std::pair<Panel, Panel> optimized_panels(const std::string& a, const std::string& b, const std::vector<int>& stages,
                                         const std::vector<double>& pis, const FigureConfig& c) {
  const auto pts = points(pis, db_axis(c), stages);
  const auto res = optimize_points(pts, c);
  const bool multi = stages.size() > 1;
  Panel pa{a, {"lambda_db", "lambda", "pi"}, {}, "lambda_db", "eps_opt", {"pi"}};
  Panel pb{b, {"lambda_db", "lambda", "pi"}, {}, "lambda_db", "purity", {"pi"}};
  if (multi) {
    pa.columns.push_back("n_stages");
    pb.columns.push_back("n_stages");
    pa.curve_keys.push_back("n_stages");
    pb.curve_keys.push_back("n_stages");
  }
  for (auto col : {"eps_opt", "eps_a_given_b", "r_opt", "eta_opt", "eps_infinity", "feasible"}) pa.columns.push_back(col);
  for (auto col : {"purity", "r_opt", "eta_opt", "feasible"}) pb.columns.push_back(col);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double l = loss_from_db(pts[i].db);
    std::vector<double> head{pts[i].db, l, pts[i].pi};
    if (multi) head.push_back(pts[i].n);
    const auto& r = res[i];
    auto ra = head;
    auto rb = head;
    if (r.ok) {
      ra.insert(ra.end(), {r.r.eps_b_given_a, r.r.eps_a_given_b, r.r.r_opt, r.r.eta_opt, l * l, 1.0});
      rb.insert(rb.end(), {r.r.purity, r.r.r_opt, r.r.eta_opt, 1.0});
    } else {
      ra.insert(ra.end(), {kNaN, kNaN, kNaN, kNaN, l * l, 0.0});
      rb.insert(rb.end(), {kNaN, kNaN, kNaN, 0.0});
    }
    pa.rows.push_back(std::move(ra));
    pb.rows.push_back(std::move(rb));
  }
  return {std::move(pa), std::move(pb)};
}

Panel target_panel(const std::string& name, const std::vector<int>& stages, const std::vector<double>& pis, double eps,
                   const FigureConfig& c) {
  const auto pts = points(pis, db_axis(c), stages);
  const auto res = target_points(pts, eps, c);
  const bool multi = stages.size() > 1;
  Panel p{name, {"lambda_db", "lambda", "pi"}, {}, "lambda_db", "purity", {"pi"}};
  if (multi) {
    p.columns.push_back("n_stages");
    p.curve_keys.push_back("n_stages");
  }
  for (auto col : {"eps_target", "purity", "r", "eta", "purity_no_nla", "n_roots", "achievable"}) p.columns.push_back(col);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double l = loss_from_db(pts[i].db);
    std::vector<double> row{pts[i].db, l, pts[i].pi};
    if (multi) row.push_back(pts[i].n);
    const auto& r = res[i];
    const double bench = tradeoff_or_nan(eps, l);
    if (r.ok) {
      row.insert(row.end(), {eps, r.r.purity, r.r.r_opt, r.r.eta_opt, bench, static_cast<double>(r.roots), 1.0});
    } else {
      row.insert(row.end(), {eps, kNaN, kNaN, kNaN, bench, 0.0, 0.0});
    }
    p.rows.push_back(std::move(row));
  }
  return p;
}

}  // namespace

std::size_t Panel::column(const std::string& col) const {
  const auto it = std::find(columns.begin(), columns.end(), col);
  if (it == columns.end()) throw std::out_of_range("panel " + name + " has no column " + col);
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> db_axis(const FigureConfig& c) {
  if (!(c.db_step > 0.0)) throw std::invalid_argument("dB step must be positive");
  if (!(c.db_max >= c.db_min) || c.db_min < 0.0) throw std::invalid_argument("dB range must satisfy 0 <= min <= max");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((c.db_max - c.db_min) / c.db_step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(c.db_min + static_cast<double>(i) * c.db_step);
  return out;
}

std::vector<Panel> fig3(const FigureConfig&) {
  Panel a{"fig3a", {"squeezing_db", "r", "lambda", "lambda_db", "eps_b_given_a", "eps_a_given_b"}, {}, "lambda",
          "eps_b_given_a", {"squeezing_db"}};
  Panel b{"fig3b", {"squeezing_db", "r", "lambda", "lambda_db", "purity"}, {}, "lambda", "purity", {"squeezing_db"}};
  std::vector<double> levels{0, 2, 4, 6, 8, 10, kRecordSqueezingDb, kInf};
  for (double s : levels) {
    for (double l : lambda_axis()) {
      const double ldb = db_from_loss(l);
      if (std::isinf(s)) {
        const double e = eps_infinity(l);
        a.rows.push_back({s, kInf, l, ldb, e, e / ((1.0 - l) * (1.0 - l))});
        b.rows.push_back({s, kInf, l, ldb, l == 0.0 ? 1.0 : 0.0});
        continue;
      }
      const ChannelParams ch(r_from_squeezing_db(s), l);
      const auto e = eps_no_nla(ch);
      a.rows.push_back({s, ch.r(), l, ldb, e.eps_b_given_a, e.eps_a_given_b});
      b.rows.push_back({s, ch.r(), l, ldb, purity_no_nla(ch)});
    }
  }
  return {a, b};
}

std::vector<Panel> fig4(const FigureConfig&) {
  Panel p{"fig4", {"eps", "lambda", "lambda_db", "purity", "achievable"}, {}, "lambda", "purity", {"eps"}};
  for (int k = 0; k < 10; ++k) {
    const double eps = std::round((1.0 - 0.11 * k) * 100.0) / 100.0;
    for (double l : lambda_axis()) {
      const double v = tradeoff_or_nan(eps, l);
      p.rows.push_back({eps, l, db_from_loss(l), v, std::isnan(v) ? 0.0 : 1.0});
    }
  }
  return {p};
}

std::vector<Panel> fig6(const FigureConfig& c) {
  auto [a, b] = optimized_panels("fig6a", "fig6b", {1}, pis_or(c, kDefaultPis), c);
  return {a, b};
}

std::vector<Panel> fig7(const FigureConfig& c) { return {target_panel("fig7", {1}, pis_or(c, kDefaultPis), eps_or(c, 0.85), c)}; }

std::vector<Panel> fig8(const FigureConfig& c) {
  auto [a, b] = optimized_panels("fig8a", "fig8b", {2}, pis_or(c, kDefaultPis), c);
  return {a, b};
}

std::vector<Panel> fig9(const FigureConfig& c) { return {target_panel("fig9", {2}, pis_or(c, kDefaultPis), eps_or(c, 0.6), c)}; }

std::vector<Panel> fig10(const FigureConfig& c) {
  const auto pis = pis_or(c, {1e-1, 1e-4});
  Panel a = optimized_panels("fig10a", "fig10a_purity", {1, 2}, pis, c).first;
  Panel b = target_panel("fig10b", {1, 2}, pis, eps_or(c, 0.85), c);
  return {a, b};
}

std::vector<Panel> fig11(const FigureConfig& c) {
  if (c.n_max < 1) throw std::invalid_argument("stage count must be >= 1");
  Panel p{"fig11", {"n_stages", "eps_best", "kappa_best"}, {}, "n_stages", "eps_best", {}};
  const auto res = parallel_map(
      static_cast<std::size_t>(c.n_max), [](std::size_t i) { return best_entanglement_for_stages(static_cast<int>(i) + 1); },
      c.threads);
  for (const auto& r : res) p.rows.push_back({static_cast<double>(r.n_stages), r.eps_best, r.kappa_best});
  return {p};
}

std::vector<Panel> make_figure(const std::string& name, const FigureConfig& config) {
  if (name == "fig3") return fig3(config);
  if (name == "fig4") return fig4(config);
  if (name == "fig6") return fig6(config);
  if (name == "fig7") return fig7(config);
  if (name == "fig8") return fig8(config);
  if (name == "fig9") return fig9(config);
  if (name == "fig10") return fig10(config);
  if (name == "fig11") return fig11(config);
  throw std::invalid_argument("unknown figure '" + name + "'");
}

void write_csv(std::ostream& out, const Panel& panel, const std::vector<std::string>& provenance) {
  for (const auto& line : provenance) out << "# " << line << '\n';
  for (std::size_t i = 0; i < panel.columns.size(); ++i) out << (i ? "," : "") << panel.columns[i];
  out << '\n';
  for (const auto& row : panel.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

void write_svg(std::ostream& out, const Panel& panel) {
  constexpr double kW = 640, kH = 420, kL = 70, kR = 20, kT = 30, kB = 50;
  const std::size_t xi = panel.column(panel.x);
  const std::size_t yi = panel.column(panel.y);
  std::vector<std::size_t> keys;
  for (const auto& k : panel.curve_keys) keys.push_back(panel.column(k));

  std::map<std::vector<double>, std::vector<std::pair<double, double>>> curves;
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const auto& row : panel.rows) {
    const double x = row[xi], y = row[yi];
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    std::vector<double> key;
    for (auto k : keys) key.push_back(row[k]);
    curves[key].emplace_back(x, y);
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); };

  static const char* palette[] = {"#e6550d", "#31a354", "#3182bd", "#d6a600", "#756bb1", "#de2d26", "#636363", "#e377c2"};
  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)", kW, kH, kW, kH)
      << '\n';
  out << fmt::format(R"(<rect x="0" y="0" width="{}" height="{}" fill="white"/>)", kW, kH) << '\n';
  out << fmt::format(R"(<text x="{}" y="18" font-family="sans-serif" font-size="14">{}</text>)", kL, panel.name) << '\n';
  out << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>)", kL, kH - kB, kW - kR, kH - kB) << '\n';
  out << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>)", kL, kT, kL, kH - kB) << '\n';
  out << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>)",
                     (kL + kW - kR) / 2, kH - 12, panel.x)
      << '\n';
  out << fmt::format(
             R"svg(<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>)svg",
             (kT + kH - kB) / 2, (kT + kH - kB) / 2, panel.y)
      << '\n';
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0;
    const double yv = y0 + (y1 - y0) * t / 4.0;
    out << fmt::format(R"(<text x="{:.1f}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>)",
                       px(xv), kH - kB + 14, format_number(xv))
        << '\n';
    out << fmt::format(R"(<text x="{}" y="{:.1f}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>)",
                       kL - 4, py(yv) + 3, format_number(yv))
        << '\n';
  }
  std::size_t idx = 0;
  for (const auto& [key, pts] : curves) {
    std::string coords;
    for (const auto& [x, y] : pts) coords += fmt::format("{:.2f},{:.2f} ", px(x), py(y));
    out << fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>)",
                       palette[idx % std::size(palette)], coords)
        << '\n';
    ++idx;
  }
  out << "</svg>\n";
}

}  // namespace nla
