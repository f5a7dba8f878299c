#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "iphs/error.hpp"
#include "iphs/run.hpp"

namespace iphs {

namespace fs = std::filesystem;

namespace {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> y;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    out.push_back(cell);
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

void write_line_plot(const fs::path& path, const std::string& title, const std::vector<double>& x,
                     const std::vector<Series>& series) {
  constexpr double W = 640.0;
  constexpr double H = 400.0;
  constexpr double left = 90.0;
  constexpr double right = 20.0;
  constexpr double top = 40.0;
  constexpr double bottom = 50.0;
  double xmin = x.empty() ? 0.0 : x.front();
  double xmax = x.empty() ? 1.0 : x.back();
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (double v : s.y) {
      if (std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
  }
  if (!std::isfinite(ymin)) {
    ymin = 0.0;
    ymax = 1.0;
  }
  if (ymax - ymin <= 1e-300 + 1e-12 * std::abs(ymax)) {
    ymin -= 0.5 * std::max(1e-12, std::abs(ymin));
    ymax += 0.5 * std::max(1e-12, std::abs(ymax));
  }
  if (xmax <= xmin) {
    xmax = xmin + 1.0;
  }
  auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (W - left - right); };
  auto py = [&](double v) { return H - bottom - (v - ymin) / (ymax - ymin) * (H - top - bottom); };

  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right
      << "\" height=\"" << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << fmt(yv) << "</text>\n";
    out << "<text x=\"" << px(xv) << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\">"
        << fmt(xv) << "</text>\n";
  }
  out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\">t</text>\n";
  double legend_y = top + 16;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.y.size() && k < x.size(); ++k) {
      if (std::isfinite(s.y[k])) {
        out << px(x[k]) << "," << py(s.y[k]) << " ";
      }
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - right - 8 << "\" y=\"" << legend_y << "\" text-anchor=\"end\" fill=\""
        << s.color << "\">" << s.label << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
}

/// Blue-white-red map of v in [lo, hi].
std::array<std::uint8_t, 3> colormap(double v, double lo, double hi) {
  const double t = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.5;
  double r;
  double g;
  double b;
  if (t < 0.5) {
    const double u = t / 0.5;
    r = 0.23 + 0.77 * u;
    g = 0.30 + 0.70 * u;
    b = 0.75 + 0.25 * u;
  } else {
    const double u = (t - 0.5) / 0.5;
    r = 1.0 - 0.3 * u;
    g = 1.0 - 0.98 * u;
    b = 1.0 - 0.85 * u;
  }
  return {static_cast<std::uint8_t>(std::lround(255 * r)), static_cast<std::uint8_t>(std::lround(255 * g)),
          static_cast<std::uint8_t>(std::lround(255 * b))};
}

void write_heatmap(const fs::path& path, const MimeticGrid& grid, const CellField& field) {
  const std::size_t nx = grid.extent(0);
  const std::size_t ny = grid.dim() == 2 ? grid.extent(1) : 1;
  const std::size_t sx = std::max<std::size_t>(1, 256 / nx);
  const std::size_t sy = grid.dim() == 2 ? std::max<std::size_t>(1, 256 / ny) : 32;
  const auto [lo_it, hi_it] = std::minmax_element(field.begin(), field.end());
  const std::size_t width = nx * sx;
  const std::size_t height = ny * sy;
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << "P6\n" << width << " " << height << "\n255\n";
  for (std::size_t row = 0; row < height; ++row) {
    const std::size_t j = ny - 1 - row / sy;  // axis 1 upwards
    for (std::size_t col = 0; col < width; ++col) {
      const std::size_t i = col / sx;
      const auto rgb = colormap(field[grid.cell_index(i, j)], *lo_it, *hi_it);
      out.write(reinterpret_cast<const char*>(rgb.data()), 3);
    }
  }
}

}  // namespace

std::vector<fs::path> plot_run(const fs::path& directory, std::ostream& log) {
  const fs::path traj_path = directory / "trajectory.csv";
  if (!fs::exists(traj_path)) {
    throw Error("missing trajectory file " + traj_path.string());
  }
  std::ifstream in(traj_path);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error("empty trajectory file " + traj_path.string());
  }
  const auto header = split_csv(line);
  std::vector<std::vector<double>> cols(header.size());
  while (std::getline(in, line)) {
    const auto cells = split_csv(line);
    for (std::size_t c = 0; c < cells.size() && c < cols.size(); ++c) {
      cols[c].push_back(std::strtod(cells[c].c_str(), nullptr));
    }
  }
  auto col = [&](const std::string& name) -> const std::vector<double>& {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error("trajectory.csv lacks column " + name);
    }
    return cols[static_cast<std::size_t>(it - header.begin())];
  };

  const fs::path plots = directory / "plots";
  fs::create_directories(plots);
  std::vector<fs::path> files;
  const auto& t = col("time");
  write_line_plot(plots / "energy.svg", "Total energy H(t)", t, {{"H", "#1f77b4", col("H")}});
  files.push_back(plots / "energy.svg");
  write_line_plot(plots / "entropy.svg", "Total entropy S(t)", t, {{"S", "#d62728", col("S")}});
  files.push_back(plots / "entropy.svg");
  write_line_plot(plots / "residuals.svg", "Balance residuals", t,
                  {{"first law", "#1f77b4", col("first_law_residual")},
                   {"second law", "#d62728", col("second_law_residual")}});
  files.push_back(plots / "residuals.svg");
  write_line_plot(plots / "power.svg", "Boundary power and entropy production", t,
                  {{"boundary power", "#2ca02c", col("boundary_power")},
                   {"entropy production", "#9467bd", col("entropy_production")}});
  files.push_back(plots / "power.svg");

  const auto& S = col("S");
  double min_increment = 0.0;
  for (std::size_t k = 1; k < S.size(); ++k) {
    min_increment = k == 1 ? S[k] - S[k - 1] : std::min(min_increment, S[k] - S[k - 1]);
  }
  log << "S(t) smallest increment " << min_increment
      << (min_increment >= 0.0 ? " (nondecreasing)" : " (decreases)") << "\n";

  // Heat maps of the last snapshot, when one exists.
  const fs::path index_path = directory / "snapshots" / "index.csv";
  const fs::path scenario_path = directory / "scenario.json";
  if (fs::exists(index_path) && fs::exists(scenario_path)) {
    const Scenario sc = load_scenario(scenario_path);
    const MimeticGrid grid = sc.grid.build();
    std::ifstream idx(index_path);
    std::getline(idx, line);
    std::string last;
    while (std::getline(idx, line)) {
      if (!line.empty()) {
        last = line;
      }
    }
    if (!last.empty()) {
      const auto step = static_cast<std::size_t>(std::stoull(split_csv(last).front()));
      std::ostringstream prefix;
      prefix << "step_" << std::setw(6) << std::setfill('0') << step << "_";
      std::vector<std::string> fields{"T"};
      for (std::size_t i = 0; i < sc.model.n_species(); ++i) {
        fields.push_back("mu" + std::to_string(i));
      }
      for (const auto& f : fields) {
        const fs::path src = directory / "snapshots" / (prefix.str() + f + ".csv");
        if (!fs::exists(src)) {
          continue;
        }
        const fs::path dst = plots / ("final_" + f + ".ppm");
        write_heatmap(dst, grid, read_snapshot_csv(grid, src));
        files.push_back(dst);
      }
    }
  }
  for (const auto& f : files) {
    log << "wrote " << f.string() << "\n";
  }
  return files;
}

}  // namespace iphs
