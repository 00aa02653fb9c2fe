#pragma once

// Levi-Civita connection and Riemann curvature of a metric given on a single
// coordinate chart. Only the metric is differentiated numerically; the
// connection and its derivatives are assembled from g, dg and ddg.
//
// Index conventions:
//   christoffel(r, m, n)      = Gamma^r_{mn}
//   riemann_up(r, s, m, n)    = R^r_{smn}
//                             = d_m Gamma^r_{ns} - d_n Gamma^r_{ms}
//                               + Gamma^r_{ml} Gamma^l_{ns} - Gamma^r_{nl} Gamma^l_{ms}
//   riemann_down(a, s, m, n)  = g_{ar} R^r_{smn}

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "indexforge/errors.hpp"

namespace indexforge::geometry {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using std::numbers::pi;

/// Dense rank-3 array with dimension n in every slot.
class Array3 {
 public:
  Array3() = default;
  explicit Array3(int n) : n_(n), d_(static_cast<std::size_t>(n * n * n), 0.0) {}
  double& operator()(int a, int b, int c) { return d_[(a * n_ + b) * n_ + c]; }
  double operator()(int a, int b, int c) const { return d_[(a * n_ + b) * n_ + c]; }
  int dim() const { return n_; }
  double max_abs() const {
    double m = 0.0;
    for (double v : d_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  int n_ = 0;
  std::vector<double> d_;
};

class Array4 {
 public:
  Array4() = default;
  explicit Array4(int n) : n_(n), d_(static_cast<std::size_t>(n * n * n * n), 0.0) {}
  double& operator()(int a, int b, int c, int d) { return d_[((a * n_ + b) * n_ + c) * n_ + d]; }
  double operator()(int a, int b, int c, int d) const { return d_[((a * n_ + b) * n_ + c) * n_ + d]; }
  int dim() const { return n_; }
  double max_abs() const {
    double m = 0.0;
    for (double v : d_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  int n_ = 0;
  std::vector<double> d_;
};

struct ParametricChart {
  std::string name;
  int dim = 0;
  VectorXd lo, hi;
  std::vector<bool> periodic;
  std::function<MatrixXd(const VectorXd&)> metric;
  /// Optional: returns the n matrices d_l g for l = 0..n-1.
  std::function<std::vector<MatrixXd>(const VectorXd&)> metric_derivative;
  /// Finite-difference step as a fraction of each coordinate's span.
  double fd_fraction = 1e-3;

  double span(int k) const { return hi(k) - lo(k); }

  VectorXd wrap(VectorXd x) const {
    for (int k = 0; k < dim; ++k) {
      if (!periodic[k]) continue;
      const double s = span(k);
      x(k) = lo(k) + (x(k) - lo(k)) - s * std::floor((x(k) - lo(k)) / s);
    }
    return x;
  }

  MatrixXd g(const VectorXd& x) const { return metric(wrap(x)); }

  void check_point(const VectorXd& x) const {
    if (x.size() != dim) {
      throw DimensionError("point has " + std::to_string(x.size()) + " coordinates, chart " + name +
                           " has " + std::to_string(dim));
    }
    for (int k = 0; k < dim; ++k) {
      if (periodic[k]) continue;
      if (x(k) < lo(k) || x(k) > hi(k)) {
        std::ostringstream os;
        os << "coordinate " << k << " = " << x(k) << " outside chart " << name << " range [" << lo(k)
           << ", " << hi(k) << "]";
        throw DomainError(os.str());
      }
    }
  }
};

/// Metric with its first and second coordinate derivatives at a point.
struct MetricJet {
  MatrixXd g, ginv;
  std::vector<MatrixXd> dg;                // dg[l] = d_l g
  std::vector<std::vector<MatrixXd>> ddg;  // ddg[l][k] = d_l d_k g
  double det = 0.0;
};

namespace detail {

inline VectorXd shifted(const VectorXd& x, int k, double h) {
  VectorXd y = x;
  y(k) += h;
  return y;
}

inline VectorXd shifted(const VectorXd& x, int k, double hk, int l, double hl) {
  VectorXd y = x;
  y(k) += hk;
  y(l) += hl;
  return y;
}

/// One Richardson step for a second-order central stencil.
inline MatrixXd richardson(const MatrixXd& coarse, const MatrixXd& fine) { return (4.0 * fine - coarse) / 3.0; }

}  // namespace detail

inline MetricJet metric_jet(const ParametricChart& c, const VectorXd& x) {
  const int n = c.dim;
  MetricJet j;
  j.g = c.g(x);
  if (j.g.rows() != n || j.g.cols() != n) throw DimensionError("metric callback returned wrong shape");
  Eigen::LLT<MatrixXd> llt(j.g);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "metric is not positive definite at (" << x.transpose() << ")";
    throw DomainError(os.str());
  }
  j.det = j.g.determinant();
  const double scale = j.g.cwiseAbs().maxCoeff();
  if (!(j.det > 1e-14 * std::pow(scale, n))) {
    std::ostringstream os;
    os << "metric is singular at (" << x.transpose() << "), det g = " << j.det;
    throw DomainError(os.str());
  }
  j.ginv = llt.solve(MatrixXd::Identity(n, n));

  std::vector<double> h(n);
  for (int k = 0; k < n; ++k) h[k] = c.fd_fraction * c.span(k);

  j.dg.assign(n, MatrixXd::Zero(n, n));
  j.ddg.assign(n, std::vector<MatrixXd>(n, MatrixXd::Zero(n, n)));

  if (c.metric_derivative) {
    j.dg = c.metric_derivative(c.wrap(x));
    auto d_of_dg = [&](int l, int k, double s) {
      return (c.metric_derivative(c.wrap(detail::shifted(x, l, s)))[k] -
              c.metric_derivative(c.wrap(detail::shifted(x, l, -s)))[k]) /
             (2.0 * s);
    };
    for (int l = 0; l < n; ++l) {
      for (int k = 0; k < n; ++k) {
        j.ddg[l][k] = detail::richardson(d_of_dg(l, k, h[l]), d_of_dg(l, k, 0.5 * h[l]));
      }
    }
    for (int l = 0; l < n; ++l) {
      for (int k = l + 1; k < n; ++k) {
        const MatrixXd sym = 0.5 * (j.ddg[l][k] + j.ddg[k][l]);
        j.ddg[l][k] = sym;
        j.ddg[k][l] = sym;
      }
    }
    return j;
  }

  auto first = [&](int k, double s) {
    return MatrixXd((c.g(detail::shifted(x, k, s)) - c.g(detail::shifted(x, k, -s))) / (2.0 * s));
  };
  auto pure = [&](int k, double s) {
    return MatrixXd((c.g(detail::shifted(x, k, s)) - 2.0 * j.g + c.g(detail::shifted(x, k, -s))) / (s * s));
  };
  auto mixed = [&](int k, double sk, int l, double sl) {
    return MatrixXd((c.g(detail::shifted(x, k, sk, l, sl)) - c.g(detail::shifted(x, k, sk, l, -sl)) -
                     c.g(detail::shifted(x, k, -sk, l, sl)) + c.g(detail::shifted(x, k, -sk, l, -sl))) /
                    (4.0 * sk * sl));
  };
  for (int k = 0; k < n; ++k) {
    j.dg[k] = detail::richardson(first(k, h[k]), first(k, 0.5 * h[k]));
    j.ddg[k][k] = detail::richardson(pure(k, h[k]), pure(k, 0.5 * h[k]));
    for (int l = k + 1; l < n; ++l) {
      j.ddg[k][l] = detail::richardson(mixed(k, h[k], l, h[l]), mixed(k, 0.5 * h[k], l, 0.5 * h[l]));
      j.ddg[l][k] = j.ddg[k][l];
    }
  }
  return j;
}

inline Array3 christoffel_from_jet(const MetricJet& j) {
  const int n = static_cast<int>(j.g.rows());
  Array3 gam(n);
  for (int r = 0; r < n; ++r) {
    for (int m = 0; m < n; ++m) {
      for (int nu = m; nu < n; ++nu) {
        double s = 0.0;
        for (int sg = 0; sg < n; ++sg) {
          s += j.ginv(r, sg) * (j.dg[m](nu, sg) + j.dg[nu](m, sg) - j.dg[sg](m, nu));
        }
        gam(r, m, nu) = 0.5 * s;
        gam(r, nu, m) = 0.5 * s;
      }
    }
  }
  return gam;
}

/// Gamma^r_{mn} at x.
inline Array3 christoffel(const ParametricChart& c, const VectorXd& x) {
  c.check_point(x);
  return christoffel_from_jet(metric_jet(c, x));
}

struct SymmetryResiduals {
  double torsion = 0.0;              // |Gamma^r_{mn} - Gamma^r_{nm}|
  double first_pair = 0.0;           // |R_{abmn} + R_{bamn}|
  double second_pair = 0.0;          // |R_{abmn} + R_{abnm}|
  double bianchi = 0.0;              // |R_{abmn} + R_{amnb} + R_{anbm}|
  double pair_exchange = 0.0;        // |R_{abmn} - R_{mnab}|
  double metric_compatibility = 0.0; // |nabla_l g_{mn}|

  double max_identity() const { return std::max({torsion, first_pair, second_pair, bianchi, pair_exchange}); }
};

struct CurvatureSample {
  VectorXd point;
  MatrixXd metric;
  double metric_det = 0.0;
  Array3 christoffel;
  Array4 riemann_up;
  Array4 riemann_down;
  double scalar = 0.0;
  std::optional<double> gaussian;
  SymmetryResiduals residuals;
};

inline constexpr double kSymmetryFailTol = 1e-4;

inline CurvatureSample curvature_from_jet(const MetricJet& j, const VectorXd& x, bool enforce = true) {
  const int n = static_cast<int>(j.g.rows());
  CurvatureSample cs;
  cs.point = x;
  cs.metric = j.g;
  cs.metric_det = j.det;
  cs.christoffel = christoffel_from_jet(j);
  const Array3& G = cs.christoffel;

  // dG(l, r, m, nu) = d_l Gamma^r_{m nu}
  std::vector<MatrixXd> dginv(n);
  for (int l = 0; l < n; ++l) dginv[l] = -j.ginv * j.dg[l] * j.ginv;
  Array4 dG(n);
  for (int l = 0; l < n; ++l) {
    for (int r = 0; r < n; ++r) {
      for (int m = 0; m < n; ++m) {
        for (int nu = 0; nu < n; ++nu) {
          double s = 0.0;
          for (int sg = 0; sg < n; ++sg) {
            s += dginv[l](r, sg) * (j.dg[m](nu, sg) + j.dg[nu](m, sg) - j.dg[sg](m, nu));
            s += j.ginv(r, sg) * (j.ddg[l][m](nu, sg) + j.ddg[l][nu](m, sg) - j.ddg[l][sg](m, nu));
          }
          dG(l, r, m, nu) = 0.5 * s;
        }
      }
    }
  }

  cs.riemann_up = Array4(n);
  for (int r = 0; r < n; ++r) {
    for (int s = 0; s < n; ++s) {
      for (int m = 0; m < n; ++m) {
        for (int nu = 0; nu < n; ++nu) {
          double v = dG(m, r, nu, s) - dG(nu, r, m, s);
          for (int l = 0; l < n; ++l) v += G(r, m, l) * G(l, nu, s) - G(r, nu, l) * G(l, m, s);
          cs.riemann_up(r, s, m, nu) = v;
        }
      }
    }
  }
  cs.riemann_down = Array4(n);
  for (int a = 0; a < n; ++a) {
    for (int s = 0; s < n; ++s) {
      for (int m = 0; m < n; ++m) {
        for (int nu = 0; nu < n; ++nu) {
          double v = 0.0;
          for (int r = 0; r < n; ++r) v += j.g(a, r) * cs.riemann_up(r, s, m, nu);
          cs.riemann_down(a, s, m, nu) = v;
        }
      }
    }
  }

  double scalar = 0.0;
  for (int s = 0; s < n; ++s) {
    for (int nu = 0; nu < n; ++nu) {
      double ric = 0.0;
      for (int m = 0; m < n; ++m) ric += cs.riemann_up(m, s, m, nu);
      scalar += j.ginv(s, nu) * ric;
    }
  }
  cs.scalar = scalar;
  if (n == 2) {
    double k = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int jj = 0; jj < 2; ++jj)
        for (int kk = 0; kk < 2; ++kk)
          for (int l = 0; l < 2; ++l) k += j.ginv(i, kk) * j.ginv(jj, l) * cs.riemann_down(i, jj, kk, l);
    cs.gaussian = 0.5 * k;
  }

  SymmetryResiduals& res = cs.residuals;
  const Array4& R = cs.riemann_down;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int m = 0; m < n; ++m) {
        res.torsion = std::max(res.torsion, std::abs(G(a, b, m) - G(a, m, b)));
        double nabla = j.dg[a](b, m);
        for (int al = 0; al < n; ++al) nabla -= G(al, a, b) * j.g(al, m) + G(al, a, m) * j.g(b, al);
        res.metric_compatibility = std::max(res.metric_compatibility, std::abs(nabla));
        for (int nu = 0; nu < n; ++nu) {
          const double v = R(a, b, m, nu);
          res.first_pair = std::max(res.first_pair, std::abs(v + R(b, a, m, nu)));
          res.second_pair = std::max(res.second_pair, std::abs(v + R(a, b, nu, m)));
          res.bianchi = std::max(res.bianchi, std::abs(v + R(a, m, nu, b) + R(a, nu, b, m)));
          res.pair_exchange = std::max(res.pair_exchange, std::abs(v - R(m, nu, a, b)));
        }
      }
    }
  }
  if (enforce && res.max_identity() > kSymmetryFailTol * std::max(1.0, R.max_abs())) {
    std::ostringstream os;
    os << "curvature symmetry residual " << res.max_identity() << " at (" << x.transpose()
       << ") exceeds " << kSymmetryFailTol << "; reduce the finite-difference step";
    throw NumericalError(os.str());
  }
  return cs;
}

inline CurvatureSample riemann_tensor(const ParametricChart& c, const VectorXd& x) {
  c.check_point(x);
  return curvature_from_jet(metric_jet(c, x), x);
}

inline double gaussian_curvature(const ParametricChart& c, const VectorXd& x) {
  if (c.dim != 2) {
    throw DimensionError("Gaussian curvature needs a 2-dimensional chart; " + c.name + " has dimension " +
                         std::to_string(c.dim));
  }
  return *riemann_tensor(c, x).gaussian;
}

// ---------------------------------------------------------------------------
// Chart presets

namespace detail {

inline ParametricChart make_chart(std::string name, std::vector<double> lo, std::vector<double> hi,
                                  std::vector<bool> periodic) {
  ParametricChart c;
  c.name = std::move(name);
  c.dim = static_cast<int>(lo.size());
  c.lo = Eigen::Map<VectorXd>(lo.data(), c.dim);
  c.hi = Eigen::Map<VectorXd>(hi.data(), c.dim);
  c.periodic = std::move(periodic);
  return c;
}

}  // namespace detail

inline ParametricChart plane_cartesian() {
  auto c = detail::make_chart("plane", {-1.0, -1.0}, {1.0, 1.0}, {false, false});
  c.metric = [](const VectorXd&) { return MatrixXd::Identity(2, 2); };
  return c;
}

/// (r, theta) on r in [0.1, 2].
inline ParametricChart plane_polar() {
  auto c = detail::make_chart("plane_polar", {0.1, 0.0}, {2.0, 2.0 * pi}, {false, true});
  c.metric = [](const VectorXd& x) {
    MatrixXd g = MatrixXd::Zero(2, 2);
    g(0, 0) = 1.0;
    g(1, 1) = x(0) * x(0);
    return g;
  };
  return c;
}

/// Polar band width kept away from the coordinate singularities of the sphere.
inline constexpr double kPoleBand = 1e-3;

/// (theta, phi), theta in [delta, pi - delta], phi periodic.
inline ParametricChart sphere(double radius = 1.0) {
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  auto c = detail::make_chart("sphere:" + std::to_string(radius), {kPoleBand, 0.0}, {pi - kPoleBand, 2.0 * pi},
                              {false, true});
  const double r2 = radius * radius;
  c.metric = [r2](const VectorXd& x) {
    MatrixXd g = MatrixXd::Zero(2, 2);
    const double s = std::sin(x(0));
    g(0, 0) = r2;
    g(1, 1) = r2 * s * s;
    return g;
  };
  return c;
}

/// Embedded torus, u around the central axis and v around the tube:
/// g = diag((R0 + r0 cos v)^2, r0^2).
inline ParametricChart torus(double major, double minor) {
  if (!(minor > 0.0) || !(major > minor)) throw DomainError("torus needs 0 < r0 < R0");
  auto c = detail::make_chart("torus:" + std::to_string(major) + "," + std::to_string(minor), {0.0, 0.0},
                              {2.0 * pi, 2.0 * pi}, {true, true});
  c.metric = [major, minor](const VectorXd& x) {
    MatrixXd g = MatrixXd::Zero(2, 2);
    const double w = major + minor * std::cos(x(1));
    g(0, 0) = w * w;
    g(1, 1) = minor * minor;
    return g;
  };
  return c;
}

inline double torus_gaussian_curvature(double major, double minor, double v) {
  return std::cos(v) / (minor * (major + minor * std::cos(v)));
}

inline ParametricChart flat_torus() {
  auto c = detail::make_chart("flat_torus", {0.0, 0.0}, {1.0, 1.0}, {true, true});
  c.metric = [](const VectorXd&) { return MatrixXd::Identity(2, 2); };
  return c;
}

/// Geodesic normal coordinates around a point of the unit sphere, on the
/// square |x_i| <= 1:
///   g = s(r) I + (1 - s(r)) x x^T / r^2,  s(r) = sin^2 r / r^2.
/// The metric is Euclidean to second order at the origin, so Gamma(0) = 0.
inline ParametricChart sphere_normal() {
  auto c = detail::make_chart("sphere_normal", {-1.0, -1.0}, {1.0, 1.0}, {false, false});
  c.metric = [](const VectorXd& x) {
    const double r2 = x.squaredNorm();
    double s, q;  // s = sin^2 r / r^2, q = (1 - s) / r^2
    if (r2 < 1e-4) {
      s = 1.0 - r2 / 3.0 + 2.0 * r2 * r2 / 45.0 - r2 * r2 * r2 / 315.0;
      q = 1.0 / 3.0 - 2.0 * r2 / 45.0 + r2 * r2 / 315.0;
    } else {
      const double r = std::sqrt(r2);
      const double sr = std::sin(r);
      s = sr * sr / r2;
      q = (1.0 - s) / r2;
    }
    return MatrixXd(s * MatrixXd::Identity(2, 2) + q * x * x.transpose());
  };
  return c;
}

/// Riemannian product: block-diagonal metric on the concatenated coordinates.
inline ParametricChart product(const ParametricChart& a, const ParametricChart& b) {
  ParametricChart c;
  c.name = a.name + "x" + b.name;
  c.dim = a.dim + b.dim;
  c.lo.resize(c.dim);
  c.hi.resize(c.dim);
  c.lo << a.lo, b.lo;
  c.hi << a.hi, b.hi;
  c.periodic = a.periodic;
  c.periodic.insert(c.periodic.end(), b.periodic.begin(), b.periodic.end());
  c.fd_fraction = std::min(a.fd_fraction, b.fd_fraction);
  const int na = a.dim, nb = b.dim;
  c.metric = [a, b, na, nb](const VectorXd& x) {
    MatrixXd g = MatrixXd::Zero(na + nb, na + nb);
    g.topLeftCorner(na, na) = a.metric(x.head(na));
    g.bottomRightCorner(nb, nb) = b.metric(x.tail(nb));
    return g;
  };
  return c;
}

/// g -> factor * g.
inline ParametricChart scaled(const ParametricChart& a, double factor) {
  if (!(factor > 0.0)) throw DomainError("metric scale factor must be positive");
  ParametricChart c = a;
  c.name = a.name + "*" + std::to_string(factor);
  c.metric = [m = a.metric, factor](const VectorXd& x) { return MatrixXd(factor * m(x)); };
  if (a.metric_derivative) {
    c.metric_derivative = [d = a.metric_derivative, factor](const VectorXd& x) {
      auto v = d(x);
      for (auto& m : v) m *= factor;
      return v;
    };
  }
  return c;
}

namespace detail {

inline std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("bad chart parameter '" + item + "'");
    }
  }
  return out;
}

}  // namespace detail

/// Parses "plane", "plane_polar", "sphere[:r]", "torus[:R0,r0]", "flat_torus",
/// "sphere_normal" and "sphere_x_sphere[:r1,r2]".
inline ParametricChart chart_preset(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::vector<double> args =
      colon == std::string::npos ? std::vector<double>{} : detail::parse_numbers(spec.substr(colon + 1));
  auto want = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) {
      throw ArgumentError("chart '" + name + "' takes " + std::to_string(lo) + ".." + std::to_string(hi) +
                          " parameters");
    }
  };
  if (name == "plane") {
    want(0, 0);
    return plane_cartesian();
  }
  if (name == "plane_polar") {
    want(0, 0);
    return plane_polar();
  }
  if (name == "sphere") {
    want(0, 1);
    return sphere(args.empty() ? 1.0 : args[0]);
  }
  if (name == "torus") {
    want(0, 2);
    if (args.size() == 1) throw ArgumentError("torus takes R0,r0");
    return args.empty() ? torus(2.0, 1.0) : torus(args[0], args[1]);
  }
  if (name == "flat_torus") {
    want(0, 0);
    return flat_torus();
  }
  if (name == "sphere_normal") {
    want(0, 0);
    return sphere_normal();
  }
  if (name == "sphere_x_sphere") {
    want(0, 2);
    if (args.size() == 1) throw ArgumentError("sphere_x_sphere takes r1,r2");
    return args.empty() ? product(sphere(1.0), sphere(1.0)) : product(sphere(args[0]), sphere(args[1]));
  }
  throw ArgumentError("unknown chart '" + name + "'");
}

}  // namespace indexforge::geometry
