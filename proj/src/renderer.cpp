#include "chlat/renderer.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace chlat {

SpectralField synthesize_stationary(const Equilibrium& eq, const CriticalSet& cs,
                                    const std::vector<double>& phases) {
  SpectralField f(std::max(1, cs.max_index()));
  if (eq.coordinates.empty()) return f;
  if (eq.coordinates.size() != cs.representatives.size()) {
    throw Error(ErrorCode::InvalidParameter, "equilibrium does not match the critical set");
  }
  bool cosine = cs.resonance == Resonance::Mult6Resonant;
  for (std::size_t p = 0; p < cs.representatives.size(); ++p) {
    const auto& k = cs.representatives[p];
    double c = eq.coordinates[p];
    std::complex<double> z;
    if (cosine) {
      z = 0.5 * c;
    } else {
      double th = p < phases.size() ? phases[p] : 0.0;
      z = std::polar(c, th);
    }
    f.at(k) = z;
    f.at(-k) = std::conj(z);
  }
  return f;
}

namespace {

// Largest |n1| and |n2| carrying a non-negligible amplitude.
std::pair<int, int> populated_extent(const SpectralField& f) {
  double peak = f.max_abs();
  int e1 = 0, e2 = 0;
  const int N = f.truncation();
  for (int n1 = -N; n1 <= N; ++n1) {
    for (int n2 = -N; n2 <= N; ++n2) {
      if (std::abs(f.at(n1, n2)) > 1e-12 * peak) {
        e1 = std::max(e1, std::abs(n1));
        e2 = std::max(e2, std::abs(n2));
      }
    }
  }
  return {e1, e2};
}

struct Mode {
  std::complex<double> z;
  Vec2 k;
};

std::vector<Mode> modes_of(const SpectralField& f, const DualLattice& dual) {
  std::vector<Mode> out;
  const int N = f.truncation();
  for (int n1 = -N; n1 <= N; ++n1) {
    for (int n2 = -N; n2 <= N; ++n2) {
      auto z = f.at(n1, n2);
      if (z != 0.0) out.push_back({z, cartesian({n1, n2}, dual)});
    }
  }
  return out;
}

void finish_range(FieldRaster& r) {
  r.min = std::numeric_limits<double>::infinity();
  r.max = -r.min;
  for (double v : r.values) {
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  }
  if (r.values.empty()) r.min = r.max = 0.0;
}

}  // namespace

FieldRaster rasterize(const SpectralField& field, const DualLattice& dual, const RasterSpec& spec) {
  if (spec.width < 1 || spec.height < 1 || spec.tiles1 < 1 || spec.tiles2 < 1) {
    throw Error(ErrorCode::InvalidParameter, "raster size and tiling must be positive");
  }
  LatticeSpec cell = physical_lattice(dual);
  FieldRaster r;
  r.width = spec.width;
  r.height = spec.height;
  r.tiles1 = spec.tiles1;
  r.tiles2 = spec.tiles2;
  r.geometry = spec.geometry;
  r.values.assign(static_cast<std::size_t>(r.width) * r.height, 0.0);
  const int N = field.truncation();
  auto [e1, e2] = populated_extent(field);

  if (spec.geometry == RasterGeometry::Fractional) {
    if (r.width < 4 * e1 * r.tiles1 || r.height < 4 * e2 * r.tiles2) {
      throw Error(ErrorCode::UnderResolved, "raster below twice the Nyquist rate of the field");
    }
    r.step_x = cell.l1 * (static_cast<double>(r.tiles1) / r.width);
    r.step_y = cell.l2 * (static_cast<double>(r.tiles2) / r.height);
    // Phases reduced exactly in integers before the angle is formed.
    auto table = [](int pixels, int tiles, int extent) {
      std::vector<std::complex<double>> t(static_cast<std::size_t>(pixels) * (2 * extent + 1));
      for (int p = 0; p < pixels; ++p) {
        for (int n = -extent; n <= extent; ++n) {
          long long m = (static_cast<long long>(n) * p * tiles) % pixels;
          t[static_cast<std::size_t>(p) * (2 * extent + 1) + (n + extent)] =
              std::polar(1.0, 2.0 * kPi * static_cast<double>(m) / pixels);
        }
      }
      return t;
    };
    auto E1 = table(r.width, r.tiles1, e1);
    auto E2 = table(r.height, r.tiles2, e2);
    const int w1 = 2 * e1 + 1, w2 = 2 * e2 + 1;
    std::vector<std::complex<double>> B(w1);
    for (int row = 0; row < r.height; ++row) {
      for (int n1 = -e1; n1 <= e1; ++n1) {
        std::complex<double> s = 0.0;
        for (int n2 = -e2; n2 <= e2; ++n2) {
          if (std::abs(n1) <= N && std::abs(n2) <= N) {
            s += field.at(n1, n2) * E2[static_cast<std::size_t>(row) * w2 + (n2 + e2)];
          }
        }
        B[n1 + e1] = s;
      }
      for (int col = 0; col < r.width; ++col) {
        std::complex<double> s = 0.0;
        const auto* e = &E1[static_cast<std::size_t>(col) * w1];
        for (int j = 0; j < w1; ++j) s += e[j] * B[j];
        r.values[static_cast<std::size_t>(row) * r.width + col] = s.real();
      }
    }
  } else {
    Vec2 a = cell.l1 * static_cast<double>(r.tiles1), b = cell.l2 * static_cast<double>(r.tiles2);
    double xs[] = {0.0, a.x, b.x, a.x + b.x}, ys[] = {0.0, a.y, b.y, a.y + b.y};
    double x0 = *std::min_element(xs, xs + 4), x1 = *std::max_element(xs, xs + 4);
    double y0 = *std::min_element(ys, ys + 4), y1 = *std::max_element(ys, ys + 4);
    r.origin = {x0, y0};
    r.step_x = {(x1 - x0) / r.width, 0.0};
    r.step_y = {0.0, (y1 - y0) / r.height};
    auto modes = modes_of(field, dual);
    double cyc_x = 0.0, cyc_y = 0.0;
    for (const auto& m : modes) {
      if (std::abs(m.z) <= 1e-12 * field.max_abs()) continue;
      cyc_x = std::max(cyc_x, std::abs(m.k.x) * (x1 - x0) / (2.0 * kPi));
      cyc_y = std::max(cyc_y, std::abs(m.k.y) * (y1 - y0) / (2.0 * kPi));
    }
    if (r.width < 4.0 * cyc_x || r.height < 4.0 * cyc_y) {
      throw Error(ErrorCode::UnderResolved, "raster below twice the Nyquist rate of the field");
    }
    for (int row = 0; row < r.height; ++row) {
      for (int col = 0; col < r.width; ++col) {
        Vec2 x = r.position(col, row);
        double s = 0.0;
        for (const auto& m : modes) {
          double ph = m.k.dot(x);
          s += m.z.real() * std::cos(ph) - m.z.imag() * std::sin(ph);
        }
        r.values[static_cast<std::size_t>(row) * r.width + col] = s;
      }
    }
  }
  finish_range(r);
  return r;
}

PointValue evaluate_field(const SpectralField& field, const DualLattice& dual, const Vec2& x) {
  PointValue p;
  const int N = field.truncation();
  for (int n1 = -N; n1 <= N; ++n1) {
    for (int n2 = -N; n2 <= N; ++n2) {
      auto z = field.at(n1, n2);
      if (z == 0.0) continue;
      Vec2 k = cartesian({n1, n2}, dual);
      auto e = z * std::polar(1.0, k.dot(x));
      // d/dx of z e^{ikx} is i k z e^{ikx}
      p.u += e.real();
      p.grad = p.grad + k * (-e.imag());
      p.hxx -= k.x * k.x * e.real();
      p.hxy -= k.x * k.y * e.real();
      p.hyy -= k.y * k.y * e.real();
    }
  }
  return p;
}

std::vector<unsigned char> grayscale_bytes(const FieldRaster& raster) {
  std::vector<unsigned char> out(raster.values.size());
  double range = raster.max - raster.min;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(range > 0.0)) {
      out[i] = 128;
    } else {
      double t = (raster.values[i] - raster.min) / range;
      out[i] = static_cast<unsigned char>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
    }
  }
  return out;
}

namespace {

void write_png(const std::string& path, int width, int height, const std::vector<unsigned char>& px) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(ErrorCode::IoFailure, "PNG encoding failed for " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int row = 0; row < height; ++row) {
    png_write_row(png, const_cast<png_bytep>(&px[static_cast<std::size_t>(row) * width]));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw Error(ErrorCode::IoFailure, "cannot close " + path);
}

}  // namespace

void export_raster(const FieldRaster& raster, const std::string& path, ExportFormat format) {
  if (format == ExportFormat::PNG) {
    write_png(path, raster.width, raster.height, grayscale_bytes(raster));
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  if (format == ExportFormat::PGM) {
    auto px = grayscale_bytes(raster);
    os << "P5\n" << raster.width << " " << raster.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  } else {
    char buf[40];
    for (int row = 0; row < raster.height; ++row) {
      for (int col = 0; col < raster.width; ++col) {
        std::snprintf(buf, sizeof buf, "%.17g", raster.at(col, row));
        if (col) os << ',';
        os << buf;
      }
      os << '\n';
    }
  }
  if (!os) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

FieldRaster read_raster_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  FieldRaster r;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int cols = 0;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw Error(ErrorCode::IoFailure, "bad number in " + path);
      r.values.push_back(v);
      ++cols;
    }
    if (r.height == 0) r.width = cols;
    else if (cols != r.width) throw Error(ErrorCode::IoFailure, "ragged rows in " + path);
    ++r.height;
  }
  finish_range(r);
  return r;
}

namespace {

double hessian_ratio(const PointValue& p) {
  double tr = p.hxx + p.hyy;
  double d = std::hypot(0.5 * (p.hxx - p.hyy), p.hxy);
  double a = std::abs(0.5 * tr + d), b = std::abs(0.5 * tr - d);
  double hi = std::max(a, b);
  return hi > 0.0 ? std::min(a, b) / hi : 0.0;
}

// Newton on the gradient; keeps the pixel position if the step wanders.
Vec2 refine_peak(const SpectralField& f, const DualLattice& dual, Vec2 x, double pixel) {
  Vec2 start = x;
  for (int it = 0; it < 30; ++it) {
    auto p = evaluate_field(f, dual, x);
    double det = p.hxx * p.hyy - p.hxy * p.hxy;
    if (!(std::abs(det) > 0.0)) return start;
    Vec2 step{(p.hyy * p.grad.x - p.hxy * p.grad.y) / det, (p.hxx * p.grad.y - p.hxy * p.grad.x) / det};
    x = x - step;
    if ((x - start).norm() > 2.0 * pixel) return start;
    if (step.norm() < 1e-13 * pixel) break;
  }
  return x;
}

}  // namespace

PatternAnalysis classify_pattern(const FieldRaster& raster, const SpectralField& field,
                                 const DualLattice& dual) {
  PatternAnalysis out;
  if (raster.values.empty()) return out;
  double amp = std::max(std::abs(raster.min), std::abs(raster.max));
  if (!(amp > 1e-14)) return out;
  const double sign = std::abs(raster.min) > std::abs(raster.max) ? -1.0 : 1.0;
  const bool periodic = raster.geometry == RasterGeometry::Fractional;
  const int W = raster.width, H = raster.height;
  auto value = [&](int c, int r) {
    if (periodic) {
      c = (c % W + W) % W;
      r = (r % H + H) % H;
    } else if (c < 0 || r < 0 || c >= W || r >= H) {
      return -std::numeric_limits<double>::infinity();
    }
    return sign * raster.at(c, r);
  };
  double pixel = std::max(raster.step_x.norm(), raster.step_y.norm());

  // Dominant-sign local maxima; ties broken toward the lower-left pixel.
  struct Cand {
    double v;
    int c, r;
  };
  std::vector<Cand> cands;
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      double v = value(c, r);
      if (v < 0.5 * amp) continue;
      bool is_max = true;
      for (int dr = -1; dr <= 1 && is_max; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (!dr && !dc) continue;
          double w = value(c + dc, r + dr);
          bool earlier = dr < 0 || (dr == 0 && dc < 0);
          if (w > v || (w == v && earlier)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) cands.push_back({v, c, r});
    }
  }
  if (cands.empty()) {
    // Ridges: every pixel ties with a neighbour, so take the global maximum.
    std::size_t i = std::max_element(raster.values.begin(), raster.values.end(),
                                     [&](double a, double b) { return sign * a < sign * b; }) -
                    raster.values.begin();
    cands.push_back({amp, static_cast<int>(i % W), static_cast<int>(i / W)});
  }
  auto best = *std::max_element(cands.begin(), cands.end(),
                                [](const Cand& a, const Cand& b) { return a.v < b.v; });
  auto at_best = evaluate_field(field, dual, raster.position(best.c, best.r));
  out.ridge_ratio = hessian_ratio(at_best);
  if (out.ridge_ratio < 0.1) {
    out.pattern = Pattern::Roll;
    return out;
  }
  for (const auto& c : cands) {
    out.peaks.push_back(refine_peak(field, dual, raster.position(c.c, c.r), pixel));
  }

  // Neighbours of the strongest peak, including periodic images of the tiled cell.
  // Without periodic images, take the strong peak closest to the window centre.
  Cand centre = best;
  if (!periodic) {
    double dbest = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) {
      if (c.v < 0.9 * best.v) continue;
      double d = std::hypot(c.c - 0.5 * W, c.r - 0.5 * H);
      if (d < dbest) dbest = d, centre = c;
    }
  }
  Vec2 ref = refine_peak(field, dual, raster.position(centre.c, centre.r), pixel);
  std::vector<Vec2> shifts{{0.0, 0.0}};
  if (periodic) {
    Vec2 a = raster.step_x * static_cast<double>(W), b = raster.step_y * static_cast<double>(H);
    shifts.clear();
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j) shifts.push_back(a * static_cast<double>(i) + b * static_cast<double>(j));
  }
  std::vector<Vec2> diffs;
  for (const auto& p : out.peaks) {
    for (const auto& s : shifts) {
      Vec2 d = p + s - ref;
      if (d.norm() > 0.5 * pixel) diffs.push_back(d);
    }
  }
  if (diffs.empty()) {
    out.pattern = Pattern::MixedTorus;
    return out;
  }
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& d : diffs) dmin = std::min(dmin, d.norm());
  std::vector<double> dirs;
  for (const auto& d : diffs) {
    if (d.norm() <= dmin * 1.05) dirs.push_back(std::atan2(d.y, d.x) * 180.0 / kPi);
  }
  std::sort(dirs.begin(), dirs.end());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    double next = i + 1 < dirs.size() ? dirs[i + 1] : dirs[0] + 360.0;
    out.neighbor_angles.push_back(next - dirs[i]);
  }
  auto all_near = [&](double target) {
    for (double a : out.neighbor_angles)
      if (std::abs(a - target) > 5.0) return false;
    return true;
  };
  // Same spot lattice for unequal amplitudes; the peak curvature tells them apart.
  bool isotropic = out.ridge_ratio > 0.9;
  if (dirs.size() == 6 && all_near(60.0)) out.pattern = isotropic ? Pattern::Hexagon : Pattern::Rectangle;
  else if (dirs.size() == 4 && all_near(90.0)) out.pattern = isotropic ? Pattern::SquareTorus : Pattern::MixedTorus;
  else out.pattern = Pattern::MixedTorus;
  return out;
}

}  // namespace chlat
