#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace iphs {

/// Values attached to one kind of grid entity. The tag keeps cell-centred,
/// face-normal and boundary data from being mixed up at compile time.
template <class Tag>
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(std::size_t n, double value = 0.0) : values_(n, value) {}
  explicit GridFunction(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  bool operator==(const GridFunction&) const = default;

 private:
  std::vector<double> values_;
};

struct CellTag {};
struct FaceTag {};
struct BoundaryTag {};

/// One value per cell centre.
using CellField = GridFunction<CellTag>;
/// Normal component (along the face's axis) at every face, interior and
/// boundary; axis-0 faces first, then axis-1 faces.
using FaceField = GridFunction<FaceTag>;
/// One value per boundary face, in MimeticGrid::boundary_faces() order.
using BoundaryField = GridFunction<BoundaryTag>;

enum class Side { Low, High };

struct BoundaryFace {
  int axis;
  Side side;
  std::size_t face;   // index into a FaceField
  std::size_t cell;   // adjacent cell
  double normal;      // outward normal component along `axis`: -1 or +1
  double measure;     // face measure (1 in 1D)
  std::size_t group;  // 0 left, 1 right, 2 bottom, 3 top
};

/// Uniform structured grid in one or two dimensions with cell-centred
/// scalars and face-normal vector components.
///
/// Face weights for the discrete L2 product on faces are the dual volumes:
/// the cell volume for interior faces and half of it for boundary faces.
/// With those weights grad/div satisfy the integration-by-parts identity
///   <phi, div f>_cells + <grad phi, f>_faces = sum_bnd phi_bc (f.n) |face|
/// exactly.
class MimeticGrid {
 public:
  static MimeticGrid line(std::size_t cells, double lower, double upper);
  static MimeticGrid rectangle(std::array<std::size_t, 2> cells,
                               std::array<double, 2> lower,
                               std::array<double, 2> upper);

  int dim() const noexcept { return dim_; }
  std::size_t extent(int axis) const { return extents_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return upper_[axis]; }

  std::size_t num_cells() const noexcept { return num_cells_; }
  std::size_t num_faces() const noexcept { return num_faces_; }
  std::size_t num_faces(int axis) const;
  std::size_t face_offset(int axis) const { return face_offset_[axis]; }
  std::size_t num_boundary_faces() const noexcept { return boundary_.size(); }
  const std::vector<BoundaryFace>& boundary_faces() const noexcept { return boundary_; }

  double cell_volume() const noexcept { return cell_volume_; }
  double domain_measure() const noexcept { return cell_volume_ * static_cast<double>(num_cells_); }
  /// Measure of a face normal to `axis` (product of tangential spacings).
  double face_measure(int axis) const;
  /// Dual-volume weight of face f in the face inner product.
  double face_weight(std::size_t f) const;
  bool is_boundary_face(std::size_t f) const;

  std::size_t cell_index(std::size_t i, std::size_t j = 0) const { return j * extents_[0] + i; }
  std::array<std::size_t, 2> cell_coords(std::size_t c) const;
  std::array<double, 2> cell_center(std::size_t c) const;

  /// Axis of face f and its index along that axis (0..extent) plus the
  /// tangential index.
  struct FaceLocation {
    int axis;
    std::size_t normal_index;
    std::size_t tangential_index;
  };
  FaceLocation locate_face(std::size_t f) const;
  std::array<double, 2> face_center(std::size_t f) const;
  /// Cells on the low/high side of an interior face.
  std::size_t low_cell(std::size_t f) const;
  std::size_t high_cell(std::size_t f) const;
  std::size_t face_index(int axis, std::size_t normal_index, std::size_t tangential_index) const;

  std::size_t num_boundary_groups() const noexcept { return static_cast<std::size_t>(2 * dim_); }
  static std::string_view group_name(std::size_t group);

  bool operator==(const MimeticGrid&) const = default;

 private:
  MimeticGrid(int dim, std::array<std::size_t, 2> extents, std::array<double, 2> lower,
              std::array<double, 2> upper);

  int dim_ = 1;
  std::array<std::size_t, 2> extents_{1, 1};
  std::array<double, 2> spacing_{1.0, 1.0};
  std::array<double, 2> lower_{0.0, 0.0};
  std::array<double, 2> upper_{1.0, 1.0};
  std::array<std::size_t, 2> face_offset_{0, 0};
  std::size_t num_cells_ = 0;
  std::size_t num_faces_ = 0;
  double cell_volume_ = 1.0;
  std::vector<BoundaryFace> boundary_;
};

// Discrete operators ------------------------------------------------------

/// Face gradient. Interior faces: centred difference. Boundary faces:
/// one-sided difference to the trace over the half-cell distance.
FaceField grad(const MimeticGrid& grid, const CellField& phi, const BoundaryField& trace);

/// Cell divergence of a face-normal field.
CellField div(const MimeticGrid& grid, const FaceField& f);

/// sum over boundary faces of a * b * |face|.
double boundary_integral(const MimeticGrid& grid, const BoundaryField& a, const BoundaryField& b);

/// Outward normal component f.n at each boundary face.
BoundaryField normal_trace(const MimeticGrid& grid, const FaceField& f);

/// Values of the cells adjacent to each boundary face.
BoundaryField adjacent_values(const MimeticGrid& grid, const CellField& phi);

/// Arithmetic face interpolation; boundary faces take the trace.
FaceField face_mean(const MimeticGrid& grid, const CellField& phi, const BoundaryField& trace);

/// Harmonic face interpolation of a positive field; boundary faces take the trace.
FaceField face_harmonic_mean(const MimeticGrid& grid, const CellField& phi, const BoundaryField& trace);

/// Equal-weight (1/2 per face and axis) average of a face field onto the
/// cells, over interior faces only.
CellField interior_face_average(const MimeticGrid& grid, const FaceField& f);

double cell_inner(const MimeticGrid& grid, const CellField& a, const CellField& b);
double face_inner(const MimeticGrid& grid, const FaceField& a, const FaceField& b);
double cell_integral(const MimeticGrid& grid, const CellField& a);

struct IbpResidual {
  double residual;  // signed
  double scale;     // sum of magnitudes of all contributing products
};

/// <phi, div f> + <grad phi, f> - boundary_integral(phi_bc, f.n).
IbpResidual ibp_residual(const MimeticGrid& grid, const CellField& phi, const FaceField& f,
                         const BoundaryField& phi_bc);

// Snapshot I/O: header axis0_index,axis1_index,value (axis1 omitted in 1D).
void write_snapshot_csv(const MimeticGrid& grid, const CellField& field,
                        const std::filesystem::path& path);
CellField read_snapshot_csv(const MimeticGrid& grid, const std::filesystem::path& path);

}  // namespace iphs
