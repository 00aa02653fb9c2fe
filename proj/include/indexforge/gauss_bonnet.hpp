#pragma once

// Euler density from the Riemann tensor by full Levi-Civita contraction, and
// its integral over a chart.
//
// For n = 2m,
//   e(x) = 1 / (2^{3m} m! pi^m) * eps^{I1 J1 ... Im Jm} eps^{K1 L1 ... Km Lm}
//          R_{I1 J1 K1 L1} ... R_{Im Jm Km Lm},
// with eps the Levi-Civita tensor, so each eps carries 1/sqrt(det g) in
// coordinates. chi = int e dV with dV = sqrt(det g) d^n x.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <thread>
#include <vector>

#include "indexforge/errors.hpp"
#include "indexforge/quadrature.hpp"
#include "indexforge/riemann_geometry.hpp"

namespace indexforge::gauss_bonnet {

using geometry::ParametricChart;
using Eigen::VectorXd;
using std::numbers::pi;

inline constexpr int kMaxEulerDim = 4;

struct Permutation {
  std::vector<int> p;
  int sign = 1;
};

inline std::vector<Permutation> signed_permutations(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  std::vector<Permutation> out;
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) inversions += p[i] > p[j];
    out.push_back({p, (inversions & 1) ? -1 : 1});
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

/// 2^{3m} m! pi^m.
inline double euler_normalization(int m) {
  double fact = 1.0;
  for (int k = 2; k <= m; ++k) fact *= k;
  return std::pow(8.0, m) * fact * std::pow(pi, m);
}

inline int odd_dimension_chi(int n) {
  if (n < 1 || n % 2 == 0) throw ArgumentError("odd_dimension_chi needs an odd dimension, got " + std::to_string(n));
  return 0;
}

/// Euler density from a computed curvature sample. `prefactor_scale`
/// multiplies the normalization; it exists only so tests can confirm that a
/// wrong constant is detected.
inline double euler_density_from_sample(const geometry::CurvatureSample& cs, double prefactor_scale = 1.0) {
  const int n = cs.riemann_down.dim();
  if (n % 2 != 0) throw DimensionError("Euler density is defined in even dimension; use odd_dimension_chi");
  if (n > kMaxEulerDim) {
    throw CapacityError("Euler density supports dimension <= " + std::to_string(kMaxEulerDim));
  }
  static thread_local std::vector<Permutation> perms;
  static thread_local int perms_n = -1;
  if (perms_n != n) {
    perms = signed_permutations(n);
    perms_n = n;
  }
  const int m = n / 2;
  const auto& R = cs.riemann_down;
  double total = 0.0;
  for (const auto& s : perms) {
    for (const auto& t : perms) {
      double prod = static_cast<double>(s.sign * t.sign);
      for (int k = 0; k < m && prod != 0.0; ++k) {
        prod *= R(s.p[2 * k], s.p[2 * k + 1], t.p[2 * k], t.p[2 * k + 1]);
      }
      total += prod;
    }
  }
  return total / (cs.metric_det * euler_normalization(m) * prefactor_scale);
}

inline double euler_density(const ParametricChart& c, const VectorXd& x) {
  if (c.dim % 2 != 0) throw DimensionError("Euler density is defined in even dimension; use odd_dimension_chi");
  return euler_density_from_sample(geometry::riemann_tensor(c, x));
}

struct EulerOptions {
  /// Nodes per coordinate. One entry applies to every coordinate. Periodic
  /// coordinates use a trapezoid rule with that many nodes; the others use
  /// composite Simpson with that many intervals (rounded up to even).
  std::vector<int> resolution{200};
  double prefactor_scale = 1.0;
  double fail_residual = 0.1;
  /// 0 means: INDEXFORGE_THREADS if set, else hardware concurrency.
  unsigned threads = 0;
};

struct EulerResult {
  double chi_raw = 0.0;
  long chi_rounded = 0;
  double residual = 0.0;
  std::size_t evaluations = 0;
};

inline unsigned worker_count(unsigned requested) {
  unsigned n = requested;
  if (n == 0) {
    n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("INDEXFORGE_THREADS")) {
      const long cap = std::strtol(env, nullptr, 10);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
  }
  return std::max(1u, n);
}

namespace detail {

struct Axis {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline Axis make_axis(double lo, double hi, bool periodic, int res) {
  Axis a;
  if (periodic) {
    const double h = (hi - lo) / res;
    for (int i = 0; i < res; ++i) {
      a.nodes.push_back(lo + i * h);
      a.weights.push_back(h);
    }
    return a;
  }
  const int n = res + (res % 2);
  const double h = (hi - lo) / n;
  for (int i = 0; i <= n; ++i) {
    a.nodes.push_back(lo + i * h);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    a.weights.push_back(w * h / 3.0);
  }
  return a;
}

}  // namespace detail

/// chi = int e(x) sqrt(det g) d^n x by tensor-product quadrature. Odd
/// dimensions return 0 without integrating.
///
/// The point set is cut into fixed blocks that are summed independently and
/// then combined in block order, so the result does not depend on the number
/// of worker threads.
inline EulerResult integrate_euler_characteristic(const ParametricChart& c, const EulerOptions& opt = {}) {
  EulerResult out;
  if (c.dim % 2 != 0) {
    out.chi_raw = odd_dimension_chi(c.dim);
    return out;
  }
  if (c.dim > kMaxEulerDim) {
    throw CapacityError("Euler integration supports dimension <= " + std::to_string(kMaxEulerDim));
  }
  if (opt.resolution.empty() || (opt.resolution.size() != 1 && static_cast<int>(opt.resolution.size()) != c.dim)) {
    throw ArgumentError("resolution needs 1 or " + std::to_string(c.dim) + " entries");
  }
  std::vector<detail::Axis> axes;
  std::size_t total = 1;
  for (int k = 0; k < c.dim; ++k) {
    const int res = opt.resolution.size() == 1 ? opt.resolution[0] : opt.resolution[k];
    if (res < 2) throw ArgumentError("resolution must be at least 2 per coordinate");
    axes.push_back(detail::make_axis(c.lo(k), c.hi(k), c.periodic[k], res));
    total *= axes.back().nodes.size();
  }

  constexpr std::size_t kBlock = 2048;
  const std::size_t blocks = (total + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto work = [&] {
    VectorXd x(c.dim);
    while (!failed.load()) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        quad::CompensatedSum sum;
        const std::size_t end = std::min(total, (b + 1) * kBlock);
        for (std::size_t flat = b * kBlock; flat < end; ++flat) {
          std::size_t rem = flat;
          double w = 1.0;
          for (int k = c.dim - 1; k >= 0; --k) {
            const std::size_t sz = axes[k].nodes.size();
            const std::size_t idx = rem % sz;
            rem /= sz;
            x(k) = axes[k].nodes[idx];
            w *= axes[k].weights[idx];
          }
          const auto cs = geometry::curvature_from_jet(geometry::metric_jet(c, x), x, false);
          sum.add(w * euler_density_from_sample(cs, opt.prefactor_scale) * std::sqrt(cs.metric_det));
        }
        partial[b] = sum.value();
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };

  const unsigned nthreads = std::min<std::size_t>(worker_count(opt.threads), blocks);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  quad::CompensatedSum chi;
  for (double p : partial) chi.add(p);
  out.chi_raw = chi.value();
  out.chi_rounded = std::lround(out.chi_raw);
  out.residual = std::abs(out.chi_raw - static_cast<double>(out.chi_rounded));
  out.evaluations = total;
  if (out.residual > opt.fail_residual) {
    std::ostringstream os;
    os << "Euler integral " << out.chi_raw << " is " << out.residual
       << " away from an integer; increase the quadrature resolution";
    throw IntegrationError(os.str());
  }
  return out;
}

}  // namespace indexforge::gauss_bonnet
