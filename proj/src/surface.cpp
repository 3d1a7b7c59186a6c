#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pothole/kernels.hpp"
#include "pothole/surface.hpp"
#include "pothole/text_io.hpp"
#include "surface_internal.hpp"

namespace pothole {

std::string_view to_string(SurfaceFrame frame) noexcept {
  return frame == SurfaceFrame::metric_xz ? "metric-xz" : "image-uv";
}

std::string_view to_string(Polarity p) noexcept {
  switch (p) {
    case Polarity::below: return "below";
    case Polarity::above: return "above";
    case Polarity::both: return "both";
  }
  return "below";
}

Polarity parse_polarity(std::string_view text) {
  if (text == "below") return Polarity::below;
  if (text == "above") return Polarity::above;
  if (text == "both") return Polarity::both;
  throw Error(Errc::invalid_argument, "polarity must be below, above or both");
}

PointCloud3D disparity_to_pointcloud(const DisparityImage& disp, const CameraModel& cam, double min_disparity) {
  cam.validate();
  if (!(min_disparity > 0.0)) throw Error(Errc::invalid_argument, "min_disparity must be positive");
  PointCloud3D cloud;
  cloud.width = disp.width();
  cloud.height = disp.height();
  const double fb = cam.focal_length * cam.baseline;
  for (int v = 0; v < disp.height(); ++v) {
    for (int u = 0; u < disp.width(); ++u) {
      if (!disp.is_valid(u, v)) continue;
      const double g = disp.at(u, v);
      if (g < min_disparity) continue;
      const double Z = fb / g;
      cloud.points.push_back({(u - cam.cx) * Z / cam.focal_length, (v - cam.cy) * Z / cam.focal_length, Z});
      cloud.source_pixel.push_back({u, v});
    }
  }
  if (cloud.points.empty()) throw Error(Errc::empty_cloud, "no pixel reaches the minimum disparity");
  return cloud;
}

SurfacePoints surface_points(const PointCloud3D& cloud) {
  SurfacePoints out;
  out.x.reserve(cloud.points.size());
  out.z.reserve(cloud.points.size());
  out.y.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.push_back(p.X, p.Z, p.Y);
  return out;
}

SurfacePoints surface_points(const DisparityImage& disp, const BinaryMask* select) {
  if (select != nullptr && !select->same_shape(disp.width(), disp.height())) {
    throw Error(Errc::dimension_mismatch, "selection mask differs in shape from the disparity image");
  }
  SurfacePoints out;
  for (int v = 0; v < disp.height(); ++v) {
    for (int u = 0; u < disp.width(); ++u) {
      if (!disp.is_valid(u, v)) continue;
      if (select != nullptr && (*select)(u, v) == 0) continue;
      out.push_back(u, v, disp.at(u, v));
    }
  }
  return out;
}

double QuadraticSurface::operator()(double x, double z) const noexcept { return evaluate_surface(*this, x, z); }

double evaluate_surface(const QuadraticSurface& s, double x, double z) noexcept {
  const auto& a = s.a;
  return ((((a[0] + a[1] * x) + a[2] * z) + a[3] * (x * x)) + a[4] * (z * z)) + a[5] * (x * z);
}

namespace detail {

kernels::Quadratic as_kernel(const QuadraticSurface& s) noexcept {
  kernels::Quadratic q;
  std::copy(s.a.begin(), s.a.end(), q.c);
  return q;
}

bool solve_normal_equations(const kernels::NormalSums& sums, std::array<double, 6>& solution) {
  // Cholesky factorisation L L' of the symmetric 6x6 system.
  double m[6][6];
  for (int r = 0; r < 6; ++r) {
    for (int c = r; c < 6; ++c) m[r][c] = m[c][r] = sums.wtw[kernels::upper_index(r, c)];
  }
  double max_diag = 0.0;
  for (int i = 0; i < 6; ++i) max_diag = std::max(max_diag, std::fabs(m[i][i]));
  if (!(max_diag > 0.0)) return false;

  double l[6][6] = {};
  for (int j = 0; j < 6; ++j) {
    double d = m[j][j];
    for (int k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    if (!(d > 1e-12 * max_diag)) return false;
    l[j][j] = std::sqrt(d);
    for (int i = j + 1; i < 6; ++i) {
      double s = m[i][j];
      for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = s / l[j][j];
    }
  }
  double y[6];
  for (int i = 0; i < 6; ++i) {
    double s = sums.wty[i];
    for (int k = 0; k < i; ++k) s -= l[i][k] * y[k];
    y[i] = s / l[i][i];
  }
  for (int i = 5; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < 6; ++k) s -= l[k][i] * solution[k];
    solution[i] = s / l[i][i];
  }
  return std::all_of(solution.begin(), solution.end(), [](double v) { return std::isfinite(v); });
}

std::array<double, 6> decondition(const std::array<double, 6>& b, const Conditioning& c) {
  // x' = p x + q, z' = r z + t
  const double p = 1.0 / c.scale_x;
  const double q = -c.center_x / c.scale_x;
  const double r = 1.0 / c.scale_z;
  const double t = -c.center_z / c.scale_z;
  return {
      b[0] + b[1] * q + b[2] * t + b[3] * q * q + b[4] * t * t + b[5] * q * t,
      b[1] * p + 2.0 * b[3] * p * q + b[5] * p * t,
      b[2] * r + 2.0 * b[4] * r * t + b[5] * q * r,
      b[3] * p * p,
      b[4] * r * r,
      b[5] * p * r,
  };
}

std::optional<QuadraticSurface> try_fit(const double* x, const double* z, const double* y, const std::uint8_t* select,
                                        std::size_t n, SurfaceFrame frame, ConditionedBuffers& buf) {
  std::size_t count = 0;
  double sx = 0.0, sz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (select != nullptr && select[i] == 0) continue;
    sx += x[i];
    sz += z[i];
    ++count;
  }
  if (count < 6) return std::nullopt;
  Conditioning cond;
  cond.center_x = sx / static_cast<double>(count);
  cond.center_z = sz / static_cast<double>(count);
  double vx = 0.0, vz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (select != nullptr && select[i] == 0) continue;
    vx += (x[i] - cond.center_x) * (x[i] - cond.center_x);
    vz += (z[i] - cond.center_z) * (z[i] - cond.center_z);
  }
  cond.scale_x = std::sqrt(vx / static_cast<double>(count));
  cond.scale_z = std::sqrt(vz / static_cast<double>(count));
  if (!(cond.scale_x > 0.0) || !(cond.scale_z > 0.0)) return std::nullopt;

  buf.x.resize(n);
  buf.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    buf.x[i] = (x[i] - cond.center_x) / cond.scale_x;
    buf.z[i] = (z[i] - cond.center_z) / cond.scale_z;
  }
  kernels::NormalSums sums;
  kernels::active().normal_sums(buf.x.data(), buf.z.data(), y, select, n, sums);
  std::array<double, 6> b{};
  if (!solve_normal_equations(sums, b)) return std::nullopt;

  QuadraticSurface s;
  s.a = decondition(b, cond);
  s.frame = frame;
  s.conditioning = cond;
  return s;
}

}  // namespace detail

QuadraticSurface fit_quadratic_surface(const SurfacePoints& points, SurfaceFrame frame, const std::uint8_t* select) {
  const std::size_t n = points.size();
  if (points.x.size() != n || points.z.size() != n) {
    throw Error(Errc::dimension_mismatch, "surface point coordinate arrays differ in length");
  }
  std::size_t count = n;
  if (select != nullptr) count = static_cast<std::size_t>(std::count_if(select, select + n, [](std::uint8_t b) { return b != 0; }));
  if (count < 6) throw Error(Errc::insufficient_points, "a quadratic surface needs at least 6 points");
  detail::ConditionedBuffers buf;
  auto s = detail::try_fit(points.x.data(), points.z.data(), points.y.data(), select, n, frame, buf);
  if (!s) throw Error(Errc::degenerate_configuration, "normal equations are singular for these points");
  return *s;
}

NormalEquations assemble_normal_equations(const SurfacePoints& points) {
  const std::size_t n = points.size();
  if (points.x.size() != n || points.z.size() != n) {
    throw Error(Errc::dimension_mismatch, "surface point coordinate arrays differ in length");
  }
  kernels::NormalSums sums;
  kernels::active().normal_sums(points.x.data(), points.z.data(), points.y.data(), nullptr, n, sums);
  NormalEquations eq;
  for (int r = 0; r < 6; ++r) {
    for (int c = r; c < 6; ++c) eq.m[r][c] = eq.m[c][r] = sums.wtw[kernels::upper_index(r, c)];
    eq.q[r] = sums.wty[r];
  }
  return eq;
}

std::array<double, 6> solve_normal_equations(const NormalEquations& eq) {
  kernels::NormalSums sums;
  for (int r = 0; r < 6; ++r) {
    for (int c = r; c < 6; ++c) sums.wtw[kernels::upper_index(r, c)] = eq.m[r][c];
    sums.wty[r] = eq.q[r];
  }
  std::array<double, 6> a{};
  if (!detail::solve_normal_equations(sums, a)) {
    throw Error(Errc::degenerate_configuration, "normal matrix is not positive definite");
  }
  return a;
}

namespace {

DamageMask finish_mask(BinaryMask raw, const DamageCriteria& criteria) {
  if (criteria.open_radius > 0) raw = morphological_open(raw, criteria.open_radius);
  return label_damage(raw, criteria.connectivity, criteria.min_region_area);
}

bool flagged(double r, const DamageCriteria& c) {
  switch (c.polarity) {
    case Polarity::below: return r >= c.tau;
    case Polarity::above: return -r >= c.tau;
    case Polarity::both: return std::fabs(r) >= c.tau;
  }
  return false;
}

void check_criteria(const DamageCriteria& c) {
  if (!(c.tau >= 0.0)) throw Error(Errc::invalid_argument, "damage threshold tau must be >= 0");
  if (c.open_radius < 0) throw Error(Errc::invalid_argument, "opening radius must be >= 0");
}

}  // namespace

DamageMask extract_damage(const PointCloud3D& cloud, const QuadraticSurface& s, const DamageCriteria& criteria) {
  if (s.frame != SurfaceFrame::metric_xz) {
    throw Error(Errc::frame_mismatch, "point clouds need a surface fitted in the metric frame");
  }
  check_criteria(criteria);
  if (cloud.width <= 0 || cloud.height <= 0 || cloud.source_pixel.size() != cloud.points.size()) {
    throw Error(Errc::invalid_argument, "point cloud carries no source raster geometry");
  }
  const SurfacePoints pts = surface_points(cloud);
  std::vector<double> r(pts.size());
  kernels::active().quadratic_residuals(pts.x.data(), pts.z.data(), pts.y.data(), pts.size(), detail::as_kernel(s),
                                        r.data());
  BinaryMask raw(cloud.width, cloud.height, 0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const PixelCoord px = cloud.source_pixel[i];
    if (!raw.contains(px.u, px.v)) throw Error(Errc::invalid_argument, "point cloud pixel lies outside its raster");
    if (flagged(r[i], criteria)) raw(px.u, px.v) = 1;
  }
  return finish_mask(std::move(raw), criteria);
}

DamageMask extract_damage(const DisparityImage& disp, const QuadraticSurface& s, const DamageCriteria& criteria) {
  if (s.frame != SurfaceFrame::image_uv) {
    throw Error(Errc::frame_mismatch, "disparity rasters need a surface fitted in the image frame");
  }
  check_criteria(criteria);
  const int w = disp.width();
  std::vector<double> us(static_cast<std::size_t>(w));
  std::vector<double> vs(static_cast<std::size_t>(w));
  std::vector<double> r(static_cast<std::size_t>(w));
  for (int u = 0; u < w; ++u) us[u] = u;
  const auto q = detail::as_kernel(s);
  const auto& k = kernels::active();
  BinaryMask raw(w, disp.height(), 0);
  for (int v = 0; v < disp.height(); ++v) {
    std::fill(vs.begin(), vs.end(), static_cast<double>(v));
    k.quadratic_residuals(us.data(), vs.data(), disp.values().row(v).data(), r.size(), q, r.data());
    const auto valid = disp.validity().row(v);
    for (int u = 0; u < w; ++u) {
      if (valid[u] != 0 && flagged(-r[u], criteria)) raw(u, v) = 1;
    }
  }
  return finish_mask(std::move(raw), criteria);
}

void write_ply(const std::filesystem::path& path, const PointCloud3D& cloud) {
  const bool with_pixels = cloud.source_pixel.size() == cloud.points.size() && !cloud.points.empty();
  std::ostringstream os;
  os << "ply\nformat ascii 1.0\n";
  if (cloud.width > 0 && cloud.height > 0) os << "comment raster " << cloud.width << ' ' << cloud.height << '\n';
  os << "element vertex " << cloud.points.size() << "\nproperty double x\nproperty double y\nproperty double z\n";
  if (with_pixels) os << "property int u\nproperty int v\n";
  os << "end_header\n";
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    os << format_double(p.X) << ' ' << format_double(p.Y) << ' ' << format_double(p.Z);
    if (with_pixels) os << ' ' << cloud.source_pixel[i].u << ' ' << cloud.source_pixel[i].v;
    os << '\n';
  }
  write_file_atomic(path, os.str());
}

PointCloud3D read_ply(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw Error(Errc::unsupported_format, "not a PLY file");
  PointCloud3D cloud;
  std::size_t vertices = 0;
  std::vector<std::string> names;
  bool in_vertex = false;
  bool ascii = false;
  bool header_done = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "comment") {
      std::string tag;
      if (ls >> tag && tag == "raster") ls >> cloud.width >> cloud.height;
    } else if (word == "element") {
      std::string name;
      ls >> name;
      in_vertex = name == "vertex";
      if (in_vertex) ls >> vertices;
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ls >> type >> name;
      names.push_back(name);
    } else if (word == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw Error(Errc::unsupported_format, "PLY header is not terminated");
  if (!ascii) throw Error(Errc::unsupported_format, "only ASCII PLY is supported");
  auto column = [&](const char* name) {
    const auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
  };
  const int cx = column("x"), cy = column("y"), cz = column("z"), cu = column("u"), cv = column("v");
  if (cx < 0 || cy < 0 || cz < 0) throw Error(Errc::unsupported_format, "PLY vertices need x, y and z");
  const bool with_pixels = cu >= 0 && cv >= 0;
  cloud.points.reserve(vertices);
  std::vector<double> row(names.size());
  for (std::size_t i = 0; i < vertices; ++i) {
    if (!std::getline(in, line)) throw Error(Errc::unsupported_format, "PLY vertex list is truncated");
    std::istringstream ls(line);
    for (auto& value : row) {
      if (!(ls >> value)) throw Error(Errc::unsupported_format, "malformed PLY vertex");
    }
    cloud.points.push_back({row[cx], row[cy], row[cz]});
    if (with_pixels) cloud.source_pixel.push_back({static_cast<int>(row[cu]), static_cast<int>(row[cv])});
  }
  return cloud;
}

std::string format_fit_report(const FitReport& report) {
  std::ostringstream os;
  os << "frame = " << to_string(report.surface.frame) << '\n';
  for (int i = 0; i < 6; ++i) os << 'a' << i << " = " << format_double(report.surface.a[i]) << '\n';
  const auto& c = report.surface.conditioning;
  os << "center_x = " << format_double(c.center_x) << '\n';
  os << "center_z = " << format_double(c.center_z) << '\n';
  os << "scale_x = " << format_double(c.scale_x) << '\n';
  os << "scale_z = " << format_double(c.scale_z) << '\n';
  os << "points = " << report.point_count << '\n';
  os << "inliers = " << report.inlier_count << '\n';
  os << "rms = " << format_double(report.rms_residual) << '\n';
  os << "iterations = " << report.iterations_used << '\n';
  return os.str();
}

void write_fit_report(const std::filesystem::path& path, const FitReport& report) {
  write_file_atomic(path, format_fit_report(report));
}

}  // namespace pothole
