#pragma once

// Fixed points of smooth self-maps of the closed disk, the round 2-sphere and
// the flat 2-torus; their indices sgn det(Df - I); the Lefschetz number as a
// sum of indices and the cohomological Lefschetz number from trace tables.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "indexforge/errors.hpp"

namespace indexforge::lefschetz {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using std::numbers::pi;

enum class Space { disk, sphere, torus };

inline std::string to_string(Space s) {
  switch (s) {
    case Space::disk: return "disk";
    case Space::sphere: return "sphere";
    case Space::torus: return "torus";
  }
  return "?";
}

/// A smooth self-map in its natural coordinates:
///   disk   - points of R^n with |x| <= 1;
///   sphere - unit vectors in R^3;
///   torus  - points of R^2, with the map commuting with 2 pi Z^2 translations
///            up to a lattice vector.
struct SmoothSelfMap {
  Space space = Space::disk;
  int dim = 2;  // disk dimension; 2 for sphere and torus
  std::function<VectorXd(const VectorXd&)> map;
  /// Optional Df in the natural coordinates (disk and torus only).
  std::function<MatrixXd(const VectorXd&)> jacobian;
};

struct FixedPointRecord {
  VectorXd location;  // natural coordinates
  MatrixXd jacobian;  // Df in the chart used for refinement
  int index = 0;
  double residual = 0.0;
  double det_df_minus_i = 0.0;
};

struct FixedPointSearch {
  std::vector<FixedPointRecord> points;
  std::vector<std::string> warnings;
};

struct SearchOptions {
  int grid_res = 0;  // 0 picks a per-space default
  double newton_tol = 1e-12;
  double accept_residual = 1e-10;
  double dedup_radius = 1e-6;
  double degeneracy_tol = 1e-8;
  double fd_step = 1e-6;
  double self_map_tol = 1e-9;
};

namespace detail {

/// Coordinates in which Newton iterates: the disk and torus use their own
/// coordinates; the sphere uses two stereographic charts.
struct Chart {
  int dim = 2;
  std::function<VectorXd(const VectorXd&)> residual;  // F(y) = f(y) - y in chart terms
  std::function<VectorXd(const VectorXd&)> to_natural;
  std::function<MatrixXd(const VectorXd&)> df;        // Df in chart terms
  VectorXd lo, hi;                                    // seed box
  std::function<bool(const VectorXd&)> admissible;
};

inline double wrap_pm_pi(double a) { return a - 2.0 * pi * std::round(a / (2.0 * pi)); }

inline double wrap_0_2pi(double a) {
  const double w = std::fmod(a, 2.0 * pi);
  return w < 0.0 ? w + 2.0 * pi : w;
}

inline MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& g, const VectorXd& y, double h) {
  const int n = static_cast<int>(y.size());
  MatrixXd J(n, n);
  for (int k = 0; k < n; ++k) {
    VectorXd yp = y, ym = y;
    yp(k) += h;
    ym(k) -= h;
    J.col(k) = (g(yp) - g(ym)) / (2.0 * h);
  }
  return J;
}

// Stereographic projection from the pole s * e_z (s = +1 or -1) onto the
// equatorial plane, and its inverse.
inline VectorXd stereo(const VectorXd& p, double s) {
  VectorXd w(2);
  const double d = 1.0 - s * p(2);
  w << p(0) / d, p(1) / d;
  return w;
}

inline VectorXd stereo_inv(const VectorXd& w, double s) {
  const double r2 = w.squaredNorm();
  VectorXd p(3);
  p << 2.0 * w(0) / (1.0 + r2), 2.0 * w(1) / (1.0 + r2), s * (r2 - 1.0) / (r2 + 1.0);
  return p;
}

inline std::vector<Chart> charts_for(const SmoothSelfMap& m, const SearchOptions& opt) {
  std::vector<Chart> out;
  const double h = opt.fd_step;
  switch (m.space) {
    case Space::disk: {
      Chart c;
      c.dim = m.dim;
      c.residual = [&m](const VectorXd& x) { return VectorXd(m.map(x) - x); };
      c.to_natural = [](const VectorXd& x) { return x; };
      if (m.jacobian) {
        c.df = m.jacobian;
      } else {
        c.df = [&m, h](const VectorXd& x) { return fd_jacobian(m.map, x, h); };
      }
      c.lo = VectorXd::Constant(m.dim, -1.0);
      c.hi = VectorXd::Constant(m.dim, 1.0);
      c.admissible = [tol = opt.self_map_tol](const VectorXd& x) { return x.norm() <= 1.0 + tol; };
      out.push_back(std::move(c));
      break;
    }
    case Space::torus: {
      Chart c;
      c.dim = 2;
      c.residual = [&m](const VectorXd& x) {
        VectorXd d = m.map(x) - x;
        for (int k = 0; k < 2; ++k) d(k) = wrap_pm_pi(d(k));
        return d;
      };
      c.to_natural = [](const VectorXd& x) {
        VectorXd y = x;
        for (int k = 0; k < 2; ++k) y(k) = wrap_0_2pi(y(k));
        return y;
      };
      if (m.jacobian) {
        c.df = m.jacobian;
      } else {
        c.df = [&m, h](const VectorXd& x) { return fd_jacobian(m.map, x, h); };
      }
      c.lo = VectorXd::Zero(2);
      c.hi = VectorXd::Constant(2, 2.0 * pi);
      c.admissible = [](const VectorXd&) { return true; };
      out.push_back(std::move(c));
      break;
    }
    case Space::sphere: {
      for (double s : {1.0, -1.0}) {
        Chart c;
        c.dim = 2;
        auto in_chart = [&m, s](const VectorXd& w) { return stereo(m.map(stereo_inv(w, s)), s); };
        c.residual = [in_chart](const VectorXd& w) { return VectorXd(in_chart(w) - w); };
        c.to_natural = [s](const VectorXd& w) { return stereo_inv(w, s); };
        c.df = [in_chart, h](const VectorXd& w) { return fd_jacobian(in_chart, w, h); };
        c.lo = VectorXd::Constant(2, -1.2);
        c.hi = VectorXd::Constant(2, 1.2);
        c.admissible = [](const VectorXd& w) { return w.norm() <= 1.2; };
        out.push_back(std::move(c));
      }
      break;
    }
  }
  return out;
}

inline double natural_distance(Space s, const VectorXd& a, const VectorXd& b) {
  if (s != Space::torus) return (a - b).norm();
  double d2 = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double d = wrap_pm_pi(a(k) - b(k));
    d2 += d * d;
  }
  return std::sqrt(d2);
}

/// Verifies on a grid that the map sends the space into itself.
inline void check_self_map(const SmoothSelfMap& m, const SearchOptions& opt) {
  auto fail = [&](const VectorXd& x, const std::string& why) {
    std::ostringstream os;
    os << "map is not a self-map of the " << to_string(m.space) << ": at (" << x.transpose() << ") " << why;
    throw DomainError(os.str());
  };
  constexpr int kRes = 24;
  if (m.space == Space::disk) {
    const int n = m.dim;
    std::vector<int> idx(n, 0);
    VectorXd x(n);
    while (true) {
      for (int k = 0; k < n; ++k) x(k) = -1.0 + 2.0 * idx[k] / kRes;
      if (x.norm() > 1.0) x /= x.norm();
      const VectorXd fx = m.map(x);
      if (fx.size() != n) fail(x, "image has the wrong dimension");
      if (fx.norm() > 1.0 + opt.self_map_tol) fail(x, "|f(x)| = " + std::to_string(fx.norm()));
      int k = 0;
      while (k < n && ++idx[k] > kRes) idx[k++] = 0;
      if (k == n) break;
    }
  } else if (m.space == Space::sphere) {
    for (int i = 0; i <= kRes; ++i) {
      for (int j = 0; j < 2 * kRes; ++j) {
        const double th = pi * i / kRes, ph = pi * j / kRes;
        VectorXd p(3);
        p << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
        const VectorXd fp = m.map(p);
        if (fp.size() != 3) fail(p, "image is not a point of R^3");
        if (std::abs(fp.norm() - 1.0) > opt.self_map_tol) fail(p, "|f(p)| = " + std::to_string(fp.norm()));
      }
    }
  } else {
    for (int i = 0; i < kRes; ++i) {
      for (int j = 0; j < kRes; ++j) {
        VectorXd x(2);
        x << 2.0 * pi * i / kRes, 2.0 * pi * j / kRes;
        const VectorXd fx = m.map(x);
        if (fx.size() != 2) fail(x, "image has the wrong dimension");
        for (int k = 0; k < 2; ++k) {
          VectorXd xs = x;
          xs(k) += 2.0 * pi;
          const VectorXd shift = m.map(xs) - fx;
          for (int l = 0; l < 2; ++l) {
            if (std::abs(wrap_pm_pi(shift(l))) > opt.self_map_tol) {
              fail(x, "map does not descend to the torus (period shift not in 2 pi Z^2)");
            }
          }
        }
      }
    }
  }
}

}  // namespace detail

/// Grid scan for local minima of |f(x) - x| followed by Newton refinement.
inline FixedPointSearch find_fixed_points(const SmoothSelfMap& m, SearchOptions opt = {}) {
  if (!m.map) throw ArgumentError("self-map has no map callback");
  if (m.space == Space::disk && (m.dim < 1 || m.dim > 3)) {
    throw CapacityError("disk fixed-point search supports dimension 1..3");
  }
  if (opt.grid_res <= 0) opt.grid_res = m.space == Space::disk ? (m.dim == 3 ? 24 : 48) : 48;
  detail::check_self_map(m, opt);

  FixedPointSearch out;
  int newton_failures = 0;
  for (const auto& chart : detail::charts_for(m, opt)) {
    const int n = chart.dim;
    const int res = opt.grid_res;
    // Residual on the seed grid.
    std::size_t total = 1;
    for (int k = 0; k < n; ++k) total *= static_cast<std::size_t>(res + 1);
    std::vector<double> r(total);
    std::vector<VectorXd> nodes(total);
    std::vector<VectorXd> values(total);
    std::vector<bool> ok(total);
    auto unflatten = [&](std::size_t f) {
      std::vector<int> idx(n);
      for (int k = n - 1; k >= 0; --k) {
        idx[k] = static_cast<int>(f % (res + 1));
        f /= (res + 1);
      }
      return idx;
    };
    for (std::size_t f = 0; f < total; ++f) {
      const auto idx = unflatten(f);
      VectorXd y(n);
      for (int k = 0; k < n; ++k) y(k) = chart.lo(k) + (chart.hi(k) - chart.lo(k)) * idx[k] / res;
      nodes[f] = y;
      ok[f] = chart.admissible(y);
      if (!ok[f]) continue;
      values[f] = chart.residual(y);
      r[f] = values[f].norm();
      if (!std::isfinite(r[f])) ok[f] = false;
    }
    // Largest change of F between grid neighbours: a fixed point inside a
    // cell is within that distance of the residual at the cell's nodes.
    double max_step = 0.0;
    for (std::size_t f = 0; f < total; ++f) {
      if (!ok[f]) continue;
      const auto idx = unflatten(f);
      std::size_t stride = 1;
      for (int k = n - 1; k >= 0; --k) {
        if (idx[k] < res && ok[f + stride]) max_step = std::max(max_step, (values[f + stride] - values[f]).norm());
        stride *= static_cast<std::size_t>(res + 1);
      }
    }
    const double seed_cut = std::sqrt(static_cast<double>(n)) * max_step + opt.accept_residual;

    for (std::size_t f = 0; f < total; ++f) {
      if (!ok[f] || r[f] > seed_cut) continue;
      // Local minimum over the 3^n neighbourhood.
      const auto idx = unflatten(f);
      bool is_min = true;
      std::vector<int> off(n, -1);
      while (is_min) {
        std::size_t g = 0;
        bool inside = true, centre = true;
        for (int k = 0; k < n; ++k) {
          const int v = idx[k] + off[k];
          if (v < 0 || v > res) inside = false;
          if (off[k] != 0) centre = false;
          g = g * (res + 1) + static_cast<std::size_t>(std::clamp(v, 0, res));
        }
        if (inside && !centre && ok[g] && r[g] < r[f]) is_min = false;
        int k = 0;
        while (k < n && ++off[k] > 1) off[k++] = -1;
        if (k == n) break;
      }
      if (!is_min) continue;

      // Damped Newton on F(y) = 0 with Jacobian Df - I.
      VectorXd y = nodes[f];
      VectorXd F = values[f];
      double rn = r[f];
      for (int it = 0; it < 60 && rn > opt.newton_tol; ++it) {
        const MatrixXd J = chart.df(y) - MatrixXd::Identity(n, n);
        Eigen::FullPivLU<MatrixXd> lu(J);
        if (!lu.isInvertible()) break;
        const VectorXd step = lu.solve(F);
        double lambda = 1.0;
        bool improved = false;
        for (int b = 0; b < 40; ++b) {
          const VectorXd y2 = y - lambda * step;
          const VectorXd F2 = chart.residual(y2);
          if (std::isfinite(F2.norm()) && F2.norm() < rn) {
            y = y2;
            F = F2;
            rn = F2.norm();
            improved = true;
            break;
          }
          lambda *= 0.5;
        }
        if (!improved) break;
      }
      if (rn >= opt.accept_residual) {
        ++newton_failures;
        continue;
      }
      if (!chart.admissible(y)) continue;

      const VectorXd loc = chart.to_natural(y);
      bool duplicate = false;
      for (const auto& p : out.points) {
        if (detail::natural_distance(m.space, p.location, loc) < opt.dedup_radius) duplicate = true;
      }
      if (duplicate) continue;

      FixedPointRecord rec;
      rec.location = loc;
      rec.jacobian = chart.df(y);
      rec.residual = rn;
      rec.det_df_minus_i = (rec.jacobian - MatrixXd::Identity(n, n)).determinant();
      if (std::abs(rec.det_df_minus_i) < opt.degeneracy_tol) {
        std::ostringstream os;
        os << "degenerate fixed point at (" << loc.transpose() << "): det(Df - I) = " << rec.det_df_minus_i;
        throw DegeneracyError(os.str());
      }
      rec.index = rec.det_df_minus_i > 0.0 ? 1 : -1;
      out.points.push_back(std::move(rec));
    }
  }
  if (newton_failures > 0) {
    out.warnings.push_back(std::to_string(newton_failures) +
                           " seed(s) did not converge to a fixed point and were discarded");
  }
  return out;
}

/// sgn det(Df - I) for a record.
inline int fixed_point_index(const FixedPointRecord& rec, double degeneracy_tol = 1e-8) {
  const int n = static_cast<int>(rec.jacobian.rows());
  const double d = (rec.jacobian - MatrixXd::Identity(n, n)).determinant();
  if (std::abs(d) < degeneracy_tol) {
    throw DegeneracyError("degenerate fixed point: det(Df - I) = " + std::to_string(d));
  }
  return d > 0.0 ? 1 : -1;
}

inline int lefschetz_number(const FixedPointSearch& s) {
  int total = 0;
  for (const auto& p : s.points) total += fixed_point_index(p);
  return total;
}

inline int lefschetz_number(const SmoothSelfMap& m, const SearchOptions& opt = {}) {
  return lefschetz_number(find_fixed_points(m, opt));
}

// ---------------------------------------------------------------------------
// Cohomology fixtures

/// Betti numbers of the supported spaces: "R^n", "D^n", "S^n", "S^1", "T^2".
inline std::vector<int> betti_numbers(const std::string& space) {
  auto dim_of = [&](std::size_t prefix) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(space.substr(prefix), &used);
      if (used != space.size() - prefix || n < 0) throw std::invalid_argument(space);
      return n;
    } catch (const std::exception&) {
      throw UnsupportedSpaceError("unsupported space '" + space + "'");
    }
  };
  if (space == "T^2") return {1, 2, 1};
  if (space.rfind("R^", 0) == 0 || space.rfind("D^", 0) == 0) {
    dim_of(2);
    return {1};
  }
  if (space.rfind("S^", 0) == 0) {
    const int n = dim_of(2);
    if (n == 0) return {2};
    std::vector<int> b(n + 1, 0);
    b.front() = 1;
    b.back() = 1;
    return b;
  }
  throw UnsupportedSpaceError("unsupported space '" + space + "'; fixtures cover R^n, D^n, S^n, T^2");
}

/// sum_q (-1)^q Tr(f*_q). `traces[q]` is the trace on H^q; degrees with
/// vanishing cohomology must carry a zero trace.
inline int cohomological_lefschetz(const std::string& space, const std::vector<double>& traces) {
  const auto betti = betti_numbers(space);
  if (traces.size() != betti.size()) {
    throw ArgumentError("trace data for " + space + " needs " + std::to_string(betti.size()) + " entries");
  }
  double total = 0.0;
  for (std::size_t q = 0; q < traces.size(); ++q) {
    if (betti[q] == 0 && traces[q] != 0.0) {
      throw ArgumentError("nonzero trace in degree " + std::to_string(q) + " where H^q = 0");
    }
    if (std::abs(traces[q] - std::round(traces[q])) > 1e-9) {
      throw ArgumentError("trace in degree " + std::to_string(q) + " is not an integer");
    }
    total += (q % 2 ? -1.0 : 1.0) * traces[q];
  }
  return static_cast<int>(std::lround(total));
}

/// Traces of the identity: the Betti numbers, so Lambda = chi.
inline std::vector<double> identity_traces(const std::string& space) {
  const auto b = betti_numbers(space);
  return {b.begin(), b.end()};
}

// ---------------------------------------------------------------------------
// Named maps

struct NamedMap {
  SmoothSelfMap map;
  std::string space;            // fixture name for the cohomology table
  std::vector<double> traces;   // traces of f* on cohomology
};

inline MatrixXd rotation2(double theta) {
  MatrixXd r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

inline NamedMap disk_rotation(double theta) {
  NamedMap nm;
  nm.map.space = Space::disk;
  nm.map.dim = 2;
  const MatrixXd r = rotation2(theta);
  nm.map.map = [r](const VectorXd& x) { return VectorXd(r * x); };
  nm.map.jacobian = [r](const VectorXd&) { return r; };
  nm.space = "D^2";
  nm.traces = {1.0};
  return nm;
}

/// Rotation of the unit sphere by alpha about the z axis.
inline NamedMap sphere_rotation(double alpha) {
  NamedMap nm;
  nm.map.space = Space::sphere;
  nm.map.dim = 2;
  MatrixXd r = MatrixXd::Identity(3, 3);
  r.topLeftCorner(2, 2) = rotation2(alpha);
  nm.map.map = [r](const VectorXd& p) { return VectorXd(r * p); };
  nm.space = "S^2";
  nm.traces = {1.0, 0.0, 1.0};  // degree-one map, homotopic to the identity
  return nm;
}

inline NamedMap torus_translation(double a, double b) {
  NamedMap nm;
  nm.map.space = Space::torus;
  nm.map.dim = 2;
  VectorXd shift(2);
  shift << a, b;
  nm.map.map = [shift](const VectorXd& x) { return VectorXd(x + shift); };
  nm.map.jacobian = [](const VectorXd&) { return MatrixXd(MatrixXd::Identity(2, 2)); };
  nm.space = "T^2";
  nm.traces = {1.0, 2.0, 1.0};
  return nm;
}

/// Linear torus map x -> A x + shift for an integer matrix A.
inline NamedMap torus_linear(const Eigen::Matrix2i& a, double sx = 0.0, double sy = 0.0) {
  NamedMap nm;
  nm.map.space = Space::torus;
  nm.map.dim = 2;
  const MatrixXd ad = a.cast<double>();
  VectorXd shift(2);
  shift << sx, sy;
  nm.map.map = [ad, shift](const VectorXd& x) { return VectorXd(ad * x + shift); };
  nm.map.jacobian = [ad](const VectorXd&) { return ad; };
  nm.space = "T^2";
  nm.traces = {1.0, ad.trace(), ad.determinant()};
  return nm;
}

/// Radial scaling x -> s x of the disk, 0 <= s <= 1.
inline NamedMap disk_scaling(double s, int dim = 2) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("disk scaling factor must lie in [0, 1]");
  NamedMap nm;
  nm.map.space = Space::disk;
  nm.map.dim = dim;
  nm.map.map = [s](const VectorXd& x) { return VectorXd(s * x); };
  nm.map.jacobian = [s, dim](const VectorXd&) { return MatrixXd(s * MatrixXd::Identity(dim, dim)); };
  nm.space = "D^" + std::to_string(dim);
  nm.traces = {1.0};
  return nm;
}

/// Brouwer: every self-map of the disk has a fixed point.
inline bool brouwer_check(const SmoothSelfMap& m, const SearchOptions& opt = {}) {
  if (m.space != Space::disk) throw ArgumentError("brouwer_check applies to disk self-maps");
  return !find_fixed_points(m, opt).points.empty();
}

}  // namespace indexforge::lefschetz
