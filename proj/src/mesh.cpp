#include "iphs/mesh.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "iphs/error.hpp"
#include "iphs/summation.hpp"

namespace iphs {

namespace {

template <class F>
void require_size(const F& f, std::size_t n, const char* what) {
  if (f.size() != n) {
    std::ostringstream os;
    os << what << ": expected " << n << " values, got " << f.size();
    throw DimensionError(os.str());
  }
}

}  // namespace

MimeticGrid::MimeticGrid(int dim, std::array<std::size_t, 2> extents, std::array<double, 2> lower,
                         std::array<double, 2> upper)
    : dim_(dim), extents_(extents), lower_(lower), upper_(upper) {
  for (int a = 0; a < dim_; ++a) {
    if (extents_[a] < 2) {
      throw ValidationError("grid needs at least 2 cells per axis");
    }
    if (!(upper_[a] > lower_[a]) || !std::isfinite(upper_[a] - lower_[a])) {
      throw ValidationError("grid bounds must satisfy lower < upper");
    }
    spacing_[a] = (upper_[a] - lower_[a]) / static_cast<double>(extents_[a]);
  }
  if (dim_ == 1) {
    extents_[1] = 1;
    spacing_[1] = 1.0;
    lower_[1] = 0.0;
    upper_[1] = 1.0;
  }

  num_cells_ = extents_[0] * extents_[1];
  cell_volume_ = dim_ == 1 ? spacing_[0] : spacing_[0] * spacing_[1];
  face_offset_[0] = 0;
  face_offset_[1] = (extents_[0] + 1) * extents_[1];
  num_faces_ = face_offset_[1] + (dim_ == 2 ? extents_[0] * (extents_[1] + 1) : 0);

  for (int a = 0; a < dim_; ++a) {
    const std::size_t tangential = a == 0 ? extents_[1] : extents_[0];
    for (Side side : {Side::Low, Side::High}) {
      const std::size_t group = static_cast<std::size_t>(2 * a + (side == Side::High ? 1 : 0));
      for (std::size_t t = 0; t < tangential; ++t) {
        BoundaryFace bf{};
        bf.axis = a;
        bf.side = side;
        bf.normal = side == Side::Low ? -1.0 : 1.0;
        bf.measure = face_measure(a);
        bf.group = group;
        const std::size_t normal_index = side == Side::Low ? 0 : extents_[a];
        bf.face = face_index(a, normal_index, t);
        const std::size_t ci = side == Side::Low ? 0 : extents_[a] - 1;
        bf.cell = a == 0 ? cell_index(ci, t) : cell_index(t, ci);
        boundary_.push_back(bf);
      }
    }
  }
}

MimeticGrid MimeticGrid::line(std::size_t cells, double lower, double upper) {
  return MimeticGrid(1, {cells, 1}, {lower, 0.0}, {upper, 1.0});
}

MimeticGrid MimeticGrid::rectangle(std::array<std::size_t, 2> cells, std::array<double, 2> lower,
                                   std::array<double, 2> upper) {
  return MimeticGrid(2, cells, lower, upper);
}

std::size_t MimeticGrid::num_faces(int axis) const {
  if (axis == 0) {
    return face_offset_[1];
  }
  return num_faces_ - face_offset_[1];
}

double MimeticGrid::face_measure(int axis) const {
  if (dim_ == 1) {
    return 1.0;
  }
  return spacing_[1 - axis];
}

double MimeticGrid::face_weight(std::size_t f) const {
  return is_boundary_face(f) ? 0.5 * cell_volume_ : cell_volume_;
}

bool MimeticGrid::is_boundary_face(std::size_t f) const {
  const FaceLocation loc = locate_face(f);
  return loc.normal_index == 0 || loc.normal_index == extents_[loc.axis];
}

std::array<std::size_t, 2> MimeticGrid::cell_coords(std::size_t c) const {
  return {c % extents_[0], c / extents_[0]};
}

std::array<double, 2> MimeticGrid::cell_center(std::size_t c) const {
  const auto [i, j] = cell_coords(c);
  return {lower_[0] + (static_cast<double>(i) + 0.5) * spacing_[0],
          dim_ == 1 ? 0.0 : lower_[1] + (static_cast<double>(j) + 0.5) * spacing_[1]};
}

MimeticGrid::FaceLocation MimeticGrid::locate_face(std::size_t f) const {
  if (f < face_offset_[1]) {
    const std::size_t row = extents_[0] + 1;
    return {0, f % row, f / row};
  }
  const std::size_t g = f - face_offset_[1];
  return {1, g / extents_[0], g % extents_[0]};
}

std::array<double, 2> MimeticGrid::face_center(std::size_t f) const {
  const FaceLocation loc = locate_face(f);
  if (loc.axis == 0) {
    return {lower_[0] + static_cast<double>(loc.normal_index) * spacing_[0],
            dim_ == 1 ? 0.0
                      : lower_[1] + (static_cast<double>(loc.tangential_index) + 0.5) * spacing_[1]};
  }
  return {lower_[0] + (static_cast<double>(loc.tangential_index) + 0.5) * spacing_[0],
          lower_[1] + static_cast<double>(loc.normal_index) * spacing_[1]};
}

std::size_t MimeticGrid::face_index(int axis, std::size_t normal_index,
                                    std::size_t tangential_index) const {
  if (axis == 0) {
    return tangential_index * (extents_[0] + 1) + normal_index;
  }
  return face_offset_[1] + normal_index * extents_[0] + tangential_index;
}

std::size_t MimeticGrid::low_cell(std::size_t f) const {
  const FaceLocation loc = locate_face(f);
  return loc.axis == 0 ? cell_index(loc.normal_index - 1, loc.tangential_index)
                       : cell_index(loc.tangential_index, loc.normal_index - 1);
}

std::size_t MimeticGrid::high_cell(std::size_t f) const {
  const FaceLocation loc = locate_face(f);
  return loc.axis == 0 ? cell_index(loc.normal_index, loc.tangential_index)
                       : cell_index(loc.tangential_index, loc.normal_index);
}

std::string_view MimeticGrid::group_name(std::size_t group) {
  static constexpr std::array<std::string_view, 4> names{"left", "right", "bottom", "top"};
  return names.at(group);
}

// ---------------------------------------------------------------------------

FaceField grad(const MimeticGrid& grid, const CellField& phi, const BoundaryField& trace) {
  require_size(phi, grid.num_cells(), "grad: cell field");
  require_size(trace, grid.num_boundary_faces(), "grad: boundary trace");
  FaceField out(grid.num_faces());
  for (int a = 0; a < grid.dim(); ++a) {
    const double inv_h = 1.0 / grid.spacing(a);
    const std::size_t n = grid.extent(a);
    const std::size_t tangential = a == 0 ? grid.extent(1) : grid.extent(0);
    for (std::size_t t = 0; t < tangential; ++t) {
      for (std::size_t k = 1; k < n; ++k) {
        const std::size_t f = grid.face_index(a, k, t);
        out[f] = (phi[grid.high_cell(f)] - phi[grid.low_cell(f)]) * inv_h;
      }
    }
  }
  const auto& bnd = grid.boundary_faces();
  for (std::size_t b = 0; b < bnd.size(); ++b) {
    const BoundaryFace& bf = bnd[b];
    const double two_over_h = 2.0 / grid.spacing(bf.axis);
    out[bf.face] = bf.side == Side::Low ? (phi[bf.cell] - trace[b]) * two_over_h
                                        : (trace[b] - phi[bf.cell]) * two_over_h;
  }
  return out;
}

CellField div(const MimeticGrid& grid, const FaceField& f) {
  require_size(f, grid.num_faces(), "div: face field");
  CellField out(grid.num_cells());
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    const auto [i, j] = grid.cell_coords(c);
    double acc = (f[grid.face_index(0, i + 1, j)] - f[grid.face_index(0, i, j)]) / grid.spacing(0);
    if (grid.dim() == 2) {
      acc += (f[grid.face_index(1, j + 1, i)] - f[grid.face_index(1, j, i)]) / grid.spacing(1);
    }
    out[c] = acc;
  }
  return out;
}

double boundary_integral(const MimeticGrid& grid, const BoundaryField& a, const BoundaryField& b) {
  require_size(a, grid.num_boundary_faces(), "boundary_integral: first trace");
  require_size(b, grid.num_boundary_faces(), "boundary_integral: second trace");
  CompensatedSum sum;
  const auto& bnd = grid.boundary_faces();
  for (std::size_t k = 0; k < bnd.size(); ++k) {
    sum += a[k] * b[k] * bnd[k].measure;
  }
  return sum.value();
}

BoundaryField normal_trace(const MimeticGrid& grid, const FaceField& f) {
  require_size(f, grid.num_faces(), "normal_trace: face field");
  BoundaryField out(grid.num_boundary_faces());
  const auto& bnd = grid.boundary_faces();
  for (std::size_t k = 0; k < bnd.size(); ++k) {
    out[k] = f[bnd[k].face] * bnd[k].normal;
  }
  return out;
}

BoundaryField adjacent_values(const MimeticGrid& grid, const CellField& phi) {
  require_size(phi, grid.num_cells(), "adjacent_values: cell field");
  BoundaryField out(grid.num_boundary_faces());
  const auto& bnd = grid.boundary_faces();
  for (std::size_t k = 0; k < bnd.size(); ++k) {
    out[k] = phi[bnd[k].cell];
  }
  return out;
}

namespace {

template <class Interp>
FaceField interpolate(const MimeticGrid& grid, const CellField& phi, const BoundaryField& trace,
                      Interp interp) {
  require_size(phi, grid.num_cells(), "face interpolation: cell field");
  require_size(trace, grid.num_boundary_faces(), "face interpolation: boundary trace");
  FaceField out(grid.num_faces());
  for (std::size_t f = 0; f < grid.num_faces(); ++f) {
    if (!grid.is_boundary_face(f)) {
      out[f] = interp(phi[grid.low_cell(f)], phi[grid.high_cell(f)]);
    }
  }
  const auto& bnd = grid.boundary_faces();
  for (std::size_t k = 0; k < bnd.size(); ++k) {
    out[bnd[k].face] = trace[k];
  }
  return out;
}

}  // namespace

FaceField face_mean(const MimeticGrid& grid, const CellField& phi, const BoundaryField& trace) {
  return interpolate(grid, phi, trace, [](double a, double b) { return 0.5 * (a + b); });
}

FaceField face_harmonic_mean(const MimeticGrid& grid, const CellField& phi,
                             const BoundaryField& trace) {
  return interpolate(grid, phi, trace, [](double a, double b) { return 2.0 * a * b / (a + b); });
}

CellField interior_face_average(const MimeticGrid& grid, const FaceField& f) {
  require_size(f, grid.num_faces(), "interior_face_average: face field");
  CellField out(grid.num_cells());
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    const auto [i, j] = grid.cell_coords(c);
    double acc = 0.0;
    if (i > 0) acc += f[grid.face_index(0, i, j)];
    if (i + 1 < grid.extent(0)) acc += f[grid.face_index(0, i + 1, j)];
    if (grid.dim() == 2) {
      if (j > 0) acc += f[grid.face_index(1, j, i)];
      if (j + 1 < grid.extent(1)) acc += f[grid.face_index(1, j + 1, i)];
    }
    out[c] = 0.5 * acc;
  }
  return out;
}

double cell_inner(const MimeticGrid& grid, const CellField& a, const CellField& b) {
  require_size(a, grid.num_cells(), "cell_inner");
  require_size(b, grid.num_cells(), "cell_inner");
  CompensatedSum sum;
  for (std::size_t c = 0; c < a.size(); ++c) {
    sum += a[c] * b[c];
  }
  return sum.value() * grid.cell_volume();
}

double face_inner(const MimeticGrid& grid, const FaceField& a, const FaceField& b) {
  require_size(a, grid.num_faces(), "face_inner");
  require_size(b, grid.num_faces(), "face_inner");
  CompensatedSum sum;
  for (std::size_t f = 0; f < a.size(); ++f) {
    sum += grid.face_weight(f) * a[f] * b[f];
  }
  return sum.value();
}

double cell_integral(const MimeticGrid& grid, const CellField& a) {
  require_size(a, grid.num_cells(), "cell_integral");
  CompensatedSum sum;
  for (double v : a) {
    sum += v;
  }
  return sum.value() * grid.cell_volume();
}

IbpResidual ibp_residual(const MimeticGrid& grid, const CellField& phi, const FaceField& f,
                         const BoundaryField& phi_bc) {
  const CellField div_f = div(grid, f);
  const FaceField grad_phi = grad(grid, phi, phi_bc);
  const BoundaryField fn = normal_trace(grid, f);

  CompensatedSum residual;
  double scale = 0.0;
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    const double term = grid.cell_volume() * phi[c] * div_f[c];
    residual += term;
    scale += std::abs(term);
  }
  for (std::size_t k = 0; k < grid.num_faces(); ++k) {
    const double term = grid.face_weight(k) * grad_phi[k] * f[k];
    residual += term;
    scale += std::abs(term);
  }
  const auto& bnd = grid.boundary_faces();
  for (std::size_t k = 0; k < bnd.size(); ++k) {
    const double term = phi_bc[k] * fn[k] * bnd[k].measure;
    residual += -term;
    scale += std::abs(term);
  }
  return {residual.value(), scale};
}

void write_snapshot_csv(const MimeticGrid& grid, const CellField& field,
                        const std::filesystem::path& path) {
  require_size(field, grid.num_cells(), "write_snapshot_csv");
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  out << (grid.dim() == 1 ? "axis0_index,value\n" : "axis0_index,axis1_index,value\n");
  out << std::setprecision(17);
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    const auto [i, j] = grid.cell_coords(c);
    out << i << ',';
    if (grid.dim() == 2) {
      out << j << ',';
    }
    out << field[c] << '\n';
  }
}

CellField read_snapshot_csv(const MimeticGrid& grid, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  std::string line;
  std::getline(in, line);
  CellField field(grid.num_cells());
  std::vector<bool> seen(grid.num_cells(), false);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::size_t i = 0;
    std::size_t j = 0;
    double v = 0.0;
    char comma = 0;
    row >> i >> comma;
    if (grid.dim() == 2) {
      row >> j >> comma;
    }
    row >> v;
    if (!row || i >= grid.extent(0) || j >= grid.extent(1)) {
      throw ParseError(path.string() + ": malformed snapshot row", lineno);
    }
    const std::size_t c = grid.cell_index(i, j);
    field[c] = v;
    seen[c] = true;
  }
  for (bool s : seen) {
    if (!s) {
      throw ParseError(path.string() + ": snapshot does not cover every cell", 0);
    }
  }
  return field;
}

}  // namespace iphs
