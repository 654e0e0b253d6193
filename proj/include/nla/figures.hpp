#pragma once

// Sweep data behind each published figure, as tables with stable column names.

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "nla/optimize.hpp"

namespace nla {

inline constexpr const char* kToolVersion = "1.0.0";

/// One figure panel: a table plus the columns an SVG chart should plot.
struct Panel {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string x;
  std::string y;
  /// Columns whose value combination identifies one curve.
  std::vector<std::string> curve_keys;

  std::size_t column(const std::string& name) const;
};

struct FigureConfig {
  double db_min = 0.0;
  double db_max = 40.0;
  double db_step = 1.0;
  /// Empty means the figure's default list.
  std::vector<double> pis;
  /// Target entanglement for fig7 / fig9 / fig10b; NaN means the default.
  double eps_target = std::numeric_limits<double>::quiet_NaN();
  int n_max = 20;
  Method method = Method::ClosedForm;
  unsigned threads = 0;
};

std::vector<double> db_axis(const FigureConfig& config);

/// Dispatches on "fig3" … "fig11". Throws std::invalid_argument for other names.
std::vector<Panel> make_figure(const std::string& name, const FigureConfig& config);

std::vector<Panel> fig3(const FigureConfig& config);
std::vector<Panel> fig4(const FigureConfig& config);
std::vector<Panel> fig6(const FigureConfig& config);
std::vector<Panel> fig7(const FigureConfig& config);
std::vector<Panel> fig8(const FigureConfig& config);
std::vector<Panel> fig9(const FigureConfig& config);
std::vector<Panel> fig10(const FigureConfig& config);
std::vector<Panel> fig11(const FigureConfig& config);

/// `#`-prefixed provenance lines, header row, then one line per row.
void write_csv(std::ostream& out, const Panel& panel, const std::vector<std::string>& provenance);

/// Polyline chart of panel.y against panel.x, one line per curve.
void write_svg(std::ostream& out, const Panel& panel);

}  // namespace nla
