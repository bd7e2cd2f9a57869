#pragma once

#include <string>
#include <vector>

#include "chlat/equilibria.hpp"
#include "chlat/field.hpp"

namespace chlat {

// Pair amplitudes r with phases theta give a = r cos(theta), a' = r sin(theta)
// and contribute 2(a cos(k x) - a' sin(k x)); resonant shells use the cosine
// convention u = sum y_p cos(k_p x).
SpectralField synthesize_stationary(const Equilibrium& eq, const CriticalSet& cs,
                                    const std::vector<double>& phases = {});

enum class RasterGeometry {
  Fractional,  // pixels on the lattice-commensurate grid of the tiled cell
  Physical,    // axis-aligned window in physical coordinates
};

struct RasterSpec {
  int width = 512;
  int height = 512;
  int tiles1 = 1;
  int tiles2 = 1;
  RasterGeometry geometry = RasterGeometry::Fractional;
};

struct FieldRaster {
  int width = 0;
  int height = 0;
  int tiles1 = 1;
  int tiles2 = 1;
  RasterGeometry geometry = RasterGeometry::Fractional;
  Vec2 origin;   // physical position of pixel (0,0)
  Vec2 step_x;   // physical offset between horizontal neighbours
  Vec2 step_y;   // physical offset between vertical neighbours
  std::vector<double> values;  // row-major, height rows
  double min = 0.0;
  double max = 0.0;

  double at(int col, int row) const { return values[static_cast<std::size_t>(row) * width + col]; }
  Vec2 position(double col, double row) const { return origin + step_x * col + step_y * row; }
};

FieldRaster rasterize(const SpectralField& field, const DualLattice& dual, const RasterSpec& spec);

// Pointwise evaluation of the truncated sum with gradient and Hessian.
struct PointValue {
  double u = 0.0;
  Vec2 grad;
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;
};
PointValue evaluate_field(const SpectralField& field, const DualLattice& dual, const Vec2& x);

enum class ExportFormat { CSV, PGM, PNG };

void export_raster(const FieldRaster& raster, const std::string& path, ExportFormat format);
std::vector<unsigned char> grayscale_bytes(const FieldRaster& raster);
FieldRaster read_raster_csv(const std::string& path);

struct PatternAnalysis {
  Pattern pattern = Pattern::Trivial;
  std::vector<Vec2> peaks;           // refined spot centres (physical)
  std::vector<double> neighbor_angles;  // angles between neighbour directions (deg)
  double ridge_ratio = 0.0;            // smaller/larger Hessian eigenvalue at peaks
};

// Spot-lattice classification: peaks of the dominant-sign extrema, their
// nearest-neighbour directions and the local Hessian anisotropy.
PatternAnalysis classify_pattern(const FieldRaster& raster, const SpectralField& field,
                                 const DualLattice& dual);

}  // namespace chlat
