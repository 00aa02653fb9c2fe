#pragma once

// Command-line front end. `run_cli` takes the argument list without the
// program name and writes the artifact to `out` (or --output) and logs to
// `err`, so tests can drive it in-process.
//
// Exit codes: 0 success, 1 usage or config-schema error, 2 domain error,
// 3 numerical failure (including a failed reproduce-all check).

#include <algorithm>
#include <chrono>
#include <complex>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "indexforge/asymptotics.hpp"
#include "indexforge/errors.hpp"
#include "indexforge/gauss_bonnet.hpp"
#include "indexforge/lattice_path_integral.hpp"
#include "indexforge/lefschetz.hpp"
#include "indexforge/quadratic_integrals.hpp"
#include "indexforge/riemann_geometry.hpp"
#include "indexforge/spectral_zeta.hpp"
#include "indexforge/susy_witten.hpp"
#include "indexforge/testing/acceptance.hpp"

namespace indexforge::cli {

using json = nlohmann::ordered_json;
using cplx = std::complex<double>;

enum ExitCode { kOk = 0, kSchema = 1, kDomain = 2, kNumerical = 3 };

/// Malformed input that is not a mathematical domain violation: unknown
/// preset names, bad list syntax, config-file problems.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueKind { number, integer, string, number_list, integer_list, flag };

inline const char* kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::number: return "a number";
    case ValueKind::integer: return "an integer";
    case ValueKind::string: return "a string";
    case ValueKind::number_list: return "an array of numbers";
    case ValueKind::integer_list: return "an array of integers";
    case ValueKind::flag: return "a boolean";
  }
  return "";
}

/// Keys accepted per subcommand, mirrored from the registered options.
using Schema = std::map<std::string, std::map<std::string, ValueKind>>;

namespace detail {

template <class T>
constexpr ValueKind kind_of() {
  if constexpr (std::is_same_v<T, double>) return ValueKind::number;
  else if constexpr (std::is_same_v<T, int>) return ValueKind::integer;
  else if constexpr (std::is_same_v<T, std::string>) return ValueKind::string;
  else if constexpr (std::is_same_v<T, std::vector<double>>) return ValueKind::number_list;
  else if constexpr (std::is_same_v<T, std::vector<int>>) return ValueKind::integer_list;
  else static_assert(sizeof(T) == 0, "unsupported option type");
}

struct Command {
  CLI::App* app;
  std::map<std::string, ValueKind>* keys;

  template <class T>
  CLI::Option* option(const std::string& name, T& var, const std::string& desc) {
    (*keys)[name] = kind_of<T>();
    auto* o = app->add_option("--" + name, var, desc);
    if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<int>>) o->delimiter(',');
    return o;
  }
  CLI::Option* flag(const std::string& name, bool& var, const std::string& desc) {
    (*keys)[name] = ValueKind::flag;
    return app->add_flag("--" + name, var, desc);
  }
};

inline int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

inline int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 1 : line_of_offset(text, pos);
}

inline bool matches_kind(const json& v, ValueKind k) {
  auto all = [&](auto pred) { return v.is_array() && std::all_of(v.begin(), v.end(), pred); };
  switch (k) {
    case ValueKind::number: return v.is_number();
    case ValueKind::integer: return v.is_number_integer();
    case ValueKind::string: return v.is_string();
    case ValueKind::number_list: return all([](const json& e) { return e.is_number(); });
    case ValueKind::integer_list: return all([](const json& e) { return e.is_number_integer(); });
    case ValueKind::flag: return v.is_boolean();
  }
  return false;
}

/// Command-line tokens equivalent to one config entry.
inline std::vector<std::string> tokens_for(const std::string& key, const json& v, ValueKind k) {
  if (k == ValueKind::flag) return v.get<bool>() ? std::vector<std::string>{"--" + key} : std::vector<std::string>{};
  std::string value;
  if (v.is_string()) {
    value = v.get<std::string>();
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) value += (i ? "," : "") + v[i].dump();
  } else {
    value = v.dump();
  }
  return {"--" + key + "=" + value};
}

inline bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

inline std::vector<double> parse_list(const std::string& s, const char* what) {
  try {
    return geometry::detail::parse_numbers(s);
  } catch (const std::exception&) {
    throw SchemaError(std::string("cannot parse ") + what + " '" + s + "'");
  }
}

inline geometry::ParametricChart chart_from(const std::string& spec) {
  try {
    return geometry::chart_preset(spec);
  } catch (const ArgumentError& e) {
    throw SchemaError(e.what());
  }
}

inline std::string strip_preset(const std::string& s) { return s.rfind("preset:", 0) == 0 ? s.substr(7) : s; }

inline json complex_pair(const std::string& prefix, cplx z) {
  json j;
  j[prefix + "_re"] = z.real();
  j[prefix + "_im"] = z.imag();
  return j;
}

inline json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(r);
  }
  return rows;
}

inline json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

inline std::string csv_cell(const json& v) {
  std::string s;
  if (v.is_string()) {
    s = v.get<std::string>();
  } else if (v.is_null()) {
    return "";
  } else {
    s = v.dump();
  }
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

/// Tables come from a "rows" array when present, otherwise from the
/// top-level fields as a single row.
inline std::string to_csv(const json& result) {
  std::ostringstream os;
  auto emit_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  if (result.contains("rows") && result["rows"].is_array() && !result["rows"].empty()) {
    std::vector<std::string> header;
    for (const auto& [k, _] : result["rows"][0].items()) header.push_back(k);
    emit_row(header);
    for (const auto& row : result["rows"]) {
      std::vector<std::string> cells;
      for (const auto& k : header) cells.push_back(csv_cell(row.value(k, json())));
      emit_row(cells);
    }
    return os.str();
  }
  std::vector<std::string> header, cells;
  for (const auto& [k, v] : result.items()) {
    if (k == "inputs" && v.is_object()) {
      for (const auto& [ik, iv] : v.items()) {
        header.push_back("input." + ik);
        cells.push_back(csv_cell(iv));
      }
      continue;
    }
    header.push_back(k);
    cells.push_back(csv_cell(v));
  }
  emit_row(header);
  emit_row(cells);
  return os.str();
}

}  // namespace detail

struct GlobalOptions {
  std::string output;
  std::string format;  // empty: the subcommand's natural format
  std::uint64_t seed = acceptance::Options{}.seed;
  std::string config;
};

/// Everything the subcommands read, bound to CLI11 options.
struct Params {
  // propagator
  std::string kind = "free";
  double mass = 1.0, hbar = 1.0, omega = 1.0, time = 1.0, x_i = 0.0, x_f = 1.0;
  bool euclidean = false;
  int slices = 256, points = 400;
  double x_min = -10.0, x_max = 10.0;
  std::string potential = "zero";
  // fresnel
  double a = 1.0;
  std::vector<double> matrix;
  std::optional<double> b_im;
  // zeta-det
  double dtau = 1.0;
  std::int64_t trunc = 100000;
  // stationary-phase
  std::string phase = "quartic";
  std::vector<double> hbars{1e-2, 1e-3, 1e-4};
  // curvature, euler
  std::string chart = "sphere:1";
  std::vector<double> at;
  std::vector<int> res{200};
  double prefactor_scale = 1.0;
  // lefschetz
  std::string space = "disk";
  std::string map = "rotate:0.7";
  // witten, localize
  std::string h = "preset:harmonic";
  std::string grid;
  std::vector<double> betas{0.5, 1.0, 2.0, 4.0};
  std::string hp = "preset:cubic";
  double lo = -8.0, hi = 8.0;
};

struct Outcome {
  json result;
  std::string formula;
  std::string default_format = "json";
  bool timed = true;
  int exit_code = kOk;
};

// ---------------------------------------------------------------------------
// Subcommands

inline Outcome run_propagator(const Params& p) {
  Outcome o;
  json& r = o.result;
  r["inputs"] = {{"kind", p.kind}, {"mass", p.mass}, {"hbar", p.hbar}, {"x_i", p.x_i}, {"x_f", p.x_f}};
  if (p.kind == "free" || p.kind == "ho") {
    const bool ho = p.kind == "ho";
    r["inputs"]["omega"] = ho ? json(p.omega) : json();
    r["inputs"]["time"] = p.time;
    r["inputs"]["euclidean"] = p.euclidean;
    if (p.euclidean) {
      o.formula = ho ? "K_E = sqrt(m w / (2 pi hbar sinh(w tau))) exp(-m w [(x_f^2 + x_i^2) cosh(w tau) - 2 x_f x_i] "
                       "/ (2 hbar sinh(w tau)))"
                     : "K_E = sqrt(m / (2 pi hbar tau)) exp(-m (x_f - x_i)^2 / (2 hbar tau))";
      const double value = ho ? lattice::ho_propagator_euclidean(p.mass, p.hbar, p.omega, p.time, p.x_i, p.x_f)
                              : lattice::free_propagator_euclidean(p.mass, p.hbar, p.time, p.x_i, p.x_f);
      lattice::SliceConfig cfg;
      cfg.mass = p.mass;
      cfg.hbar = p.hbar;
      cfg.tau = p.time;
      if (ho) {
        const double k = p.mass * p.omega * p.omega;
        cfg.potential = [k](double x) { return 0.5 * k * x * x; };
      }
      const double ref = lattice::lattice_propagator(cfg, p.x_i, p.x_f);
      r["value_re"] = value;
      r["value_im"] = 0.0;
      r["reference"] = ref;
      r["reference_kind"] = "time-sliced lattice, 256 slices, 400 points on [-10, 10]";
      r["abs_err"] = std::abs(value - ref);
      return o;
    }
    o.formula = ho ? "K = sqrt(m w / (2 pi i hbar sin(w t))) exp(i m w [(x_f^2 + x_i^2) cos(w t) - 2 x_f x_i] "
                     "/ (2 hbar sin(w t)))"
                   : "K = sqrt(m / (2 pi i hbar t)) exp(i m (x_f - x_i)^2 / (2 hbar t))";
    const cplx value = ho ? lattice::ho_propagator(p.mass, p.hbar, p.omega, p.time, p.x_i, p.x_f)
                          : lattice::free_propagator(p.mass, p.hbar, p.time, p.x_i, p.x_f);
    r["value_re"] = value.real();
    r["value_im"] = value.imag();
    r["reference"] = json();
    r["reference_kind"] = "none in real time; see schrodinger_residual";
    r["abs_err"] = json();
    r["schrodinger_residual"] = lattice::schrodinger_residual(
        ho ? lattice::PropagatorKind::harmonic : lattice::PropagatorKind::free,
        lattice::SpacetimePoint{p.x_f, p.time, p.x_i, 0.0}, 1e-3 * p.time, {p.mass, p.hbar, p.omega});
    return o;
  }
  if (p.kind != "lattice") throw SchemaError("unknown propagator kind '" + p.kind + "'");
  if (p.potential != "zero" && p.potential != "harmonic") {
    throw SchemaError("potential must be 'zero' or 'harmonic', got '" + p.potential + "'");
  }
  o.formula = "K_E = (W_eps)^N, W_eps(x, x') = sqrt(m / (2 pi hbar eps)) exp(-[m (x - x')^2 / (2 eps) + eps V(x)] / hbar)";
  lattice::SliceConfig cfg;
  cfg.mass = p.mass;
  cfg.hbar = p.hbar;
  cfg.tau = p.time;
  cfg.slices = p.slices;
  cfg.grid = {p.x_min, p.x_max, p.points};
  const bool ho = p.potential == "harmonic";
  if (ho) {
    const double k = p.mass * p.omega * p.omega;
    cfg.potential = [k](double x) { return 0.5 * k * x * x; };
  }
  r["inputs"]["tau"] = p.time;
  r["inputs"]["slices"] = p.slices;
  r["inputs"]["grid"] = {{"x_min", p.x_min}, {"x_max", p.x_max}, {"points", p.points}};
  r["inputs"]["potential"] = p.potential;
  if (ho) r["inputs"]["omega"] = p.omega;
  const auto warnings = cfg.validate();
  const double value = lattice::lattice_propagator(cfg, p.x_i, p.x_f);
  const double ref = ho ? lattice::ho_propagator_euclidean(p.mass, p.hbar, p.omega, p.time, p.x_i, p.x_f)
                        : lattice::free_propagator_euclidean(p.mass, p.hbar, p.time, p.x_i, p.x_f);
  r["value_re"] = value;
  r["value_im"] = 0.0;
  r["reference"] = ref;
  r["reference_kind"] = "closed-form Euclidean kernel";
  r["abs_err"] = std::abs(value - ref);
  r["rel_err"] = std::abs(value - ref) / std::abs(ref);
  r["warnings"] = warnings;
  return o;
}

inline Outcome run_fresnel(const Params& p) {
  Outcome o;
  json& r = o.result;
  cplx closed, oracle;
  if (!p.matrix.empty()) {
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(p.matrix.size()))));
    if (n * n != static_cast<Eigen::Index>(p.matrix.size())) throw SchemaError("--matrix needs n*n entries");
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k) a(i, k) = p.matrix[static_cast<std::size_t>(i * n + k)];
    o.formula = "int d^n x exp(i x^T A x) = (i pi)^{n/2} / sqrt(det A)";
    r["inputs"] = {{"matrix", detail::matrix_json(a)}};
    closed = quadratic::fresnel_nd(quadratic::QuadraticForm(a));
    oracle = quadratic::fresnel_nd_quadrature(a);
  } else if (p.b_im) {
    const cplx b(0.0, *p.b_im);
    o.formula = "int dx exp(-(i/2) a x^2 + b x) = sqrt(2 pi / (i a)) exp(-i b^2 / (2 a))";
    r["inputs"] = {{"a", p.a}, {"b_re", 0.0}, {"b_im", *p.b_im}};
    closed = quadratic::fresnel_linear(p.a, b);
    oracle = quadratic::fresnel_linear_quadrature(p.a, b);
  } else {
    Eigen::MatrixXd a(1, 1);
    a(0, 0) = p.a;
    o.formula = "int dx exp(i a x^2) = sqrt(i pi / a)";
    r["inputs"] = {{"a", p.a}};
    closed = quadratic::fresnel_nd(quadratic::QuadraticForm(a));
    oracle = quadratic::fresnel_1d_quadrature(p.a);
  }
  r.update(detail::complex_pair("closed", closed));
  r.update(detail::complex_pair("oracle", oracle));
  r["oracle_kind"] = "Gaussian-damped quadrature extrapolated to zero damping";
  r["abs_err"] = std::abs(closed - oracle);
  return o;
}

inline Outcome run_zeta_det(const Params& p) {
  Outcome o;
  o.formula = "det(-d^2/dtau^2 + w^2) = 2 sinh(w dtau) / w; det(-d^2/dtau^2) = 2 dtau";
  json& r = o.result;
  if (p.trunc < 1) throw DomainError("truncation must be at least 1");
  r["inputs"] = {{"dtau", p.dtau}, {"omega", p.omega}, {"trunc", p.trunc}};
  const zeta::SpectralProblem prob(p.dtau, p.omega);
  const auto ratio = zeta::det_ratio(p.dtau, p.omega, p.trunc);
  r["closed"] = zeta::zeta_det(prob);
  r["free_closed"] = zeta::zeta_det(zeta::SpectralProblem(p.dtau, 0.0));
  r["ratio_closed"] = ratio.closed;
  r["truncated"] = ratio.truncated;
  r["abs_err"] = std::abs(ratio.truncated - ratio.closed);
  return o;
}

inline Outcome run_stationary_phase(const Params& p) {
  Outcome o;
  o.default_format = "csv";
  o.formula = "I(hbar) ~ sum_p exp(i f(p)/hbar) sqrt(2 pi hbar / |f''(p)|) exp(i (pi/4) sgn f''(p))";
  const auto pf = asymptotics::phase_preset(detail::strip_preset(p.phase));
  if (!pf) throw SchemaError("unknown phase preset '" + p.phase + "'");
  json rows = json::array();
  for (double h : p.hbars) {
    const auto est = asymptotics::stationary_phase_estimate(*pf, h);
    const cplx ref = asymptotics::oscillatory_integral(*pf, h);
    json row;
    row["hbar"] = h;
    row["estimate_re"] = est.value.real();
    row["estimate_im"] = est.value.imag();
    row["oracle_re"] = ref.real();
    row["oracle_im"] = ref.imag();
    row["abs_err"] = std::abs(ref - est.value);
    rows.push_back(row);
  }
  o.result["inputs"] = {{"phase", detail::strip_preset(p.phase)}};
  o.result["rows"] = rows;
  return o;
}

inline Outcome run_curvature(const Params& p) {
  Outcome o;
  o.formula = "R^r_{smn} = d_m G^r_{ns} - d_n G^r_{ms} + G^r_{ml} G^l_{ns} - G^r_{nl} G^l_{ms}";
  const auto chart = detail::chart_from(p.chart);
  if (p.at.empty()) throw SchemaError("--at is required");
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(p.at.data(), static_cast<Eigen::Index>(p.at.size()));
  const auto cs = geometry::riemann_tensor(chart, x);
  const int n = chart.dim;
  json gamma = json::array(), riem = json::array();
  for (int a = 0; a < n; ++a) {
    json ga = json::array(), ra = json::array();
    for (int b = 0; b < n; ++b) {
      json gb = json::array(), rb = json::array();
      for (int c = 0; c < n; ++c) {
        gb.push_back(cs.christoffel(a, b, c));
        json rc = json::array();
        for (int d = 0; d < n; ++d) rc.push_back(cs.riemann_down(a, b, c, d));
        rb.push_back(rc);
      }
      ga.push_back(gb);
      ra.push_back(rb);
    }
    gamma.push_back(ga);
    riem.push_back(ra);
  }
  json& r = o.result;
  r["inputs"] = {{"chart", chart.name}, {"at", p.at}};
  r["point"] = detail::vector_json(cs.point);
  r["metric"] = detail::matrix_json(cs.metric);
  r["metric_det"] = cs.metric_det;
  r["christoffel"] = gamma;
  r["riemann_down"] = riem;
  r["scalar_curvature"] = cs.scalar;
  r["gaussian_curvature"] = cs.gaussian ? json(*cs.gaussian) : json();
  r["symmetry_residuals"] = {{"torsion", cs.residuals.torsion},
                             {"first_pair", cs.residuals.first_pair},
                             {"second_pair", cs.residuals.second_pair},
                             {"bianchi", cs.residuals.bianchi},
                             {"pair_exchange", cs.residuals.pair_exchange},
                             {"metric_compatibility", cs.residuals.metric_compatibility}};
  return o;
}

inline Outcome run_euler(const Params& p) {
  Outcome o;
  o.formula = "chi(M) = int eps^{I..} eps^{K..} R_{I1 J1 K1 L1} ... R_{Im Jm Km Lm} / (2^{3m} m! pi^m) dV";
  const auto chart = detail::chart_from(p.chart);
  gauss_bonnet::EulerOptions eo;
  eo.resolution = p.res;
  eo.prefactor_scale = p.prefactor_scale;
  const auto er = gauss_bonnet::integrate_euler_characteristic(chart, eo);
  json& r = o.result;
  r["inputs"] = {{"chart", chart.name}, {"res", p.res}};
  r["chi_raw"] = er.chi_raw;
  r["chi_rounded"] = er.chi_rounded;
  r["residual"] = er.residual;
  r["evaluations"] = er.evaluations;
  return o;
}

inline lefschetz::NamedMap parse_self_map(const std::string& space, const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::vector<double> args =
      colon == std::string::npos ? std::vector<double>{} : detail::parse_list(spec.substr(colon + 1), "map arguments");
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) {
      throw SchemaError("map '" + name + "' takes " + std::to_string(lo) + (lo == hi ? "" : ".." + std::to_string(hi)) +
                        " arguments");
    }
  };
  if (space == "disk") {
    if (name == "rotate") { need(1, 1); return lefschetz::disk_rotation(args[0]); }
    if (name == "scale") { need(1, 1); return lefschetz::disk_scaling(args[0]); }
    if (name == "identity") { need(0, 0); return lefschetz::disk_scaling(1.0); }
  } else if (space == "sphere") {
    if (name == "rotate") { need(1, 1); return lefschetz::sphere_rotation(args[0]); }
    if (name == "identity") { need(0, 0); return lefschetz::sphere_rotation(0.0); }
  } else if (space == "torus") {
    if (name == "translate") { need(2, 2); return lefschetz::torus_translation(args[0], args[1]); }
    if (name == "linear") {
      need(4, 6);
      Eigen::Matrix2i a;
      for (int k = 0; k < 4; ++k) {
        if (args[k] != std::round(args[k])) throw DomainError("torus linear map needs an integer matrix");
      }
      a << static_cast<int>(args[0]), static_cast<int>(args[1]), static_cast<int>(args[2]), static_cast<int>(args[3]);
      return lefschetz::torus_linear(a, args.size() > 4 ? args[4] : 0.0, args.size() > 5 ? args[5] : 0.0);
    }
    if (name == "identity") { need(0, 0); return lefschetz::torus_translation(0.0, 0.0); }
  } else {
    throw SchemaError("unknown space '" + space + "' (disk, sphere, torus)");
  }
  throw SchemaError("unknown map '" + name + "' for space '" + space + "'");
}

inline Outcome run_lefschetz(const Params& p) {
  Outcome o;
  o.formula = "Lambda_f = sum_p sgn det(Df(p) - I) = sum_q (-1)^q tr(f* | H^q)";
  const auto nm = parse_self_map(p.space, p.map);
  const auto search = lefschetz::find_fixed_points(nm.map);
  json pts = json::array();
  for (const auto& fp : search.points) {
    pts.push_back({{"x", detail::vector_json(fp.location)}, {"index", fp.index}, {"residual", fp.residual}});
  }
  const int lam = lefschetz::lefschetz_number(search);
  const int coh = lefschetz::cohomological_lefschetz(nm.space, nm.traces);
  json& r = o.result;
  r["inputs"] = {{"space", p.space}, {"map", p.map}};
  r["fixed_points"] = pts;
  r["lambda"] = lam;
  r["cohomological_lambda"] = coh;
  r["match"] = lam == coh;
  r["warnings"] = search.warnings;
  return o;
}

inline susy::Superpotential superpotential_from(const std::string& spec,
                                                std::optional<susy::Superpotential> (*lookup)(const std::string&)) {
  const auto w = lookup(detail::strip_preset(spec));
  if (!w) throw SchemaError("unknown superpotential preset '" + spec + "'");
  return *w;
}

inline Outcome run_witten(const Params& p) {
  Outcome o;
  o.formula = "Delta = dim ker H_B - dim ker H_F = Tr (-1)^F exp(-beta H)";
  const auto w = superpotential_from(p.h, susy::superpotential_preset);
  susy::Grid grid = susy::default_grid(w);
  if (!p.grid.empty()) {
    std::vector<double> parts;
    std::stringstream ss(p.grid);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(detail::parse_list(item, "grid")[0]);
    if (parts.size() != 3 || parts[2] != std::round(parts[2])) throw SchemaError("--grid must be x_min:x_max:points");
    grid = {parts[0], parts[1], static_cast<int>(parts[2])};
  }
  const auto spec = susy::build_susy_hamiltonians(w, grid);
  const auto wi = susy::witten_index(spec);
  const auto trace = susy::witten_trace(spec, p.betas);
  json by_beta = json::array();
  for (std::size_t k = 0; k < trace.size(); ++k) by_beta.push_back({{"beta", p.betas[k]}, {"trace", trace[k]}});
  json& r = o.result;
  r["inputs"] = {{"h", w.name}, {"grid", {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"points", grid.points}}},
                 {"betas", p.betas}};
  r["index"] = wi.index;
  r["bosonic_zero_modes"] = wi.bosonic_zero_modes;
  r["fermionic_zero_modes"] = wi.fermionic_zero_modes;
  r["trace_by_beta"] = by_beta;
  r["pairing_max_gap"] = susy::pairing_max_gap(spec);
  r["warnings"] = spec.warnings;
  return o;
}

inline Outcome run_localize(const Params& p) {
  Outcome o;
  o.formula = "Z = (2 pi)^{-1/2} int dx dpsi1 dpsi2 exp(-h'(x)^2/2 + h''(x) psi1 psi2) = sum_{h'(p)=0} sgn h''(p)";
  const auto w = superpotential_from(p.hp, susy::localization_preset);
  const auto loc = susy::localization_partition(w, p.lo, p.hi);
  json crit = json::array();
  for (const auto& c : loc.critical_points) {
    crit.push_back({{"x", c.x}, {"h2", c.second}, {"sign", c.second > 0 ? 1 : -1}});
  }
  json& r = o.result;
  r["inputs"] = {{"hp", detail::strip_preset(p.hp)}, {"a", p.lo}, {"b", p.hi}};
  r["quadrature"] = loc.quadrature;
  r["critical_sum"] = loc.critical_sum;
  r["critical_points"] = crit;
  r["abs_err"] = std::abs(loc.quadrature - loc.critical_sum);
  return o;
}

inline Outcome run_reproduce_all(const GlobalOptions& g, const Params& p, std::ostream& err) {
  Outcome o;
  o.timed = false;
  o.formula = "acceptance suite, criteria 1-11";
  acceptance::Options opt;
  opt.seed = g.seed;
  opt.gbc_prefactor_scale = p.prefactor_scale;
  json crit = json::array(), rows = json::array();
  int passed = 0;
  for (const auto& run : acceptance::criteria()) {
    const auto c = run(opt);
    err << acceptance::summary_line(c) << '\n';
    json checks = json::array();
    for (const auto& k : c.checks) {
      checks.push_back({{"label", k.label}, {"observed", k.observed}, {"limit", k.limit}, {"ok", k.ok}});
      rows.push_back({{"criterion", c.id}, {"title", c.title}, {"check", k.label}, {"observed", k.observed},
                      {"limit", k.limit}, {"ok", k.ok}});
    }
    json entry = {{"id", c.id}, {"title", c.title}, {"passed", c.passed()}, {"checks", checks}};
    if (!c.error.empty()) entry["error"] = c.error;
    crit.push_back(entry);
    passed += c.passed() ? 1 : 0;
  }
  const int total = static_cast<int>(crit.size());
  o.result["seed"] = g.seed;
  o.result["criteria"] = crit;
  o.result["passed"] = passed;
  o.result["total"] = total;
  o.result["all_passed"] = passed == total;
  o.result["rows"] = rows;  // the CSV view
  if (passed != total) o.exit_code = kNumerical;
  return o;
}

// ---------------------------------------------------------------------------
// Driver

inline int run_cli(const std::vector<std::string>& input_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Path-integral and index-theorem numerics with independent cross-checks", "indexforge"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  Params p;
  Schema schema;
  app.add_option("--output", g.output, "Write the result to this file instead of stdout");
  app.add_option("--format", g.format, "Result format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", g.seed, "Seed for randomized checks");
  app.add_option("--config", g.config, "JSON file with option values (strict schema)");

  auto command = [&](const std::string& name, const std::string& desc) {
    return detail::Command{app.add_subcommand(name, desc), &schema[name]};
  };

  auto prop = command("propagator", "Closed-form and lattice propagators");
  prop.option("kind", p.kind, "free | ho | lattice")->check(CLI::IsMember({"free", "ho", "lattice"}));
  prop.option("mass", p.mass, "Particle mass");
  prop.option("hbar", p.hbar, "Planck constant");
  prop.option("omega", p.omega, "Oscillator frequency");
  prop.option("time", p.time, "Elapsed time (Euclidean span with --euclidean or --kind lattice)");
  prop.option("x-i", p.x_i, "Initial position");
  prop.option("x-f", p.x_f, "Final position");
  prop.flag("euclidean", p.euclidean, "Evaluate in imaginary time");
  prop.option("slices", p.slices, "Lattice time slices");
  prop.option("points", p.points, "Lattice grid points");
  prop.option("x-min", p.x_min, "Lattice grid lower end");
  prop.option("x-max", p.x_max, "Lattice grid upper end");
  prop.option("potential", p.potential, "Lattice potential: zero | harmonic");

  auto fres = command("fresnel", "Gaussian and Fresnel integrals against damped quadrature");
  fres.option("a", p.a, "Coefficient of x^2 in one dimension");
  fres.option("matrix", p.matrix, "Row-major symmetric matrix, comma separated");
  fres.app->add_option("--b-im", p.b_im, "Imaginary linear coefficient (one dimension)");
  schema["fresnel"]["b-im"] = ValueKind::number;

  auto zd = command("zeta-det", "Zeta-regularized determinants and the oscillator ratio");
  zd.option("dtau", p.dtau, "Interval length");
  zd.option("omega", p.omega, "Frequency");
  zd.app->add_option("--trunc", p.trunc, "Eigenvalues in the truncated product");
  schema["zeta-det"]["trunc"] = ValueKind::integer;

  auto sp = command("stationary-phase", "Stationary-phase estimate against the reference integral");
  sp.option("f", p.phase, "Phase preset: quadratic | quartic | double_well | linear | ramp");
  sp.option("hbar", p.hbars, "Comma-separated hbar values");

  auto cv = command("curvature", "Christoffel symbols and Riemann tensor at a point");
  cv.option("chart", p.chart, "Chart preset, e.g. sphere:1 or torus:2,1");
  cv.option("at", p.at, "Coordinates, comma separated")->required();

  auto eu = command("euler", "Euler characteristic by integrating the Euler density");
  eu.option("chart", p.chart, "Chart preset");
  eu.option("res", p.res, "Nodes per coordinate (one value or one per coordinate)");
  eu.app->add_option("--prefactor-scale", p.prefactor_scale)->group("");

  auto lf = command("lefschetz", "Fixed points, indices and the Lefschetz number");
  lf.option("space", p.space, "disk | sphere | torus");
  lf.option("map", p.map, "rotate:a | scale:s | translate:a,b | linear:a,b,c,d[,sx,sy] | identity");

  auto wt = command("witten", "Witten index of supersymmetric quantum mechanics");
  wt.app->set_help_flag("--help", "Print this help message and exit");  // frees --h for the superpotential
  wt.option("h", p.h, "Superpotential preset, e.g. preset:quartic");
  wt.option("grid", p.grid, "x_min:x_max:points (interior points)");
  wt.option("betas", p.betas, "Inverse temperatures for the graded trace");

  auto lc = command("localize", "Zero-dimensional supersymmetric integral");
  lc.option("hp", p.hp, "Preset for h': linear | no_critical | cubic");
  lc.option("a", p.lo, "Lower integration limit");
  lc.option("b", p.hi, "Upper integration limit");

  auto ra = command("reproduce-all", "Run the acceptance suite");
  ra.app->add_option("--prefactor-scale", p.prefactor_scale)->group("");

  // Expand --config into ordinary tokens. Values given on the command line win.
  std::vector<std::string> args = input_args;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      err << "error: cannot open config file " << config_path << '\n';
      return kSchema;
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    json cfg;
    try {
      cfg = json::parse(text, nullptr, true, false);
    } catch (const json::parse_error& e) {
      err << config_path << ":" << detail::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0)
          << ": malformed JSON: " << e.what() << '\n';
      return kSchema;
    }
    if (!cfg.is_object()) {
      err << config_path << ":1: config must be a JSON object\n";
      return kSchema;
    }
    auto cmd_pos = std::find_if(args.begin(), args.end(), [&](const std::string& a) { return schema.count(a) > 0; });
    std::string cmd = cmd_pos == args.end() ? "" : *cmd_pos;
    if (cfg.contains("command")) {
      if (!cfg["command"].is_string() || !schema.count(cfg["command"].get<std::string>())) {
        err << config_path << ":" << detail::line_of_key(text, "command") << ": 'command' must name a subcommand\n";
        return kSchema;
      }
      const std::string from_file = cfg["command"].get<std::string>();
      if (!cmd.empty() && cmd != from_file) {
        err << config_path << ":" << detail::line_of_key(text, "command") << ": config is for '" << from_file
            << "' but the command line runs '" << cmd << "'\n";
        return kSchema;
      }
      if (cmd.empty()) {
        args.push_back(from_file);
        cmd = from_file;
      }
    }
    if (cmd.empty()) {
      err << "error: no subcommand given on the command line or in " << config_path << '\n';
      return kSchema;
    }
    const std::map<std::string, ValueKind> globals{
        {"output", ValueKind::string}, {"format", ValueKind::string}, {"seed", ValueKind::integer}};
    std::vector<std::string> head, tail;
    for (const auto& [key, value] : cfg.items()) {
      if (key == "command") continue;
      const bool global = globals.count(key) > 0;
      const auto& keys = schema[cmd];
      if (!global && !keys.count(key)) {
        err << config_path << ":" << detail::line_of_key(text, key) << ": unknown key '" << key << "' for '" << cmd
            << "'\n";
        return kSchema;
      }
      const ValueKind kind = global ? globals.at(key) : keys.at(key);
      if (!detail::matches_kind(value, kind)) {
        err << config_path << ":" << detail::line_of_key(text, key) << ": '" << key << "' must be " << kind_name(kind)
            << '\n';
        return kSchema;
      }
      if (detail::given_on_command_line(args, key)) continue;
      auto toks = detail::tokens_for(key, value, kind);
      (global ? head : tail).insert((global ? head : tail).end(), toks.begin(), toks.end());
    }
    args.insert(args.begin(), head.begin(), head.end());
    args.insert(args.end(), tail.begin(), tail.end());
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kSchema;
  }

  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "propagator") o = run_propagator(p);
    else if (name == "fresnel") o = run_fresnel(p);
    else if (name == "zeta-det") o = run_zeta_det(p);
    else if (name == "stationary-phase") o = run_stationary_phase(p);
    else if (name == "curvature") o = run_curvature(p);
    else if (name == "euler") o = run_euler(p);
    else if (name == "lefschetz") o = run_lefschetz(p);
    else if (name == "witten") o = run_witten(p);
    else if (name == "localize") o = run_localize(p);
    else o = run_reproduce_all(g, p, err);
    json front;
    front["command"] = name;
    front.update(o.result);
    o.result = std::move(front);
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kSchema;
  } catch (const Error& e) {
    err << (e.error_class() == ErrorClass::domain ? "domain error: " : "numerical error: ") << e.what() << '\n';
    return e.error_class() == ErrorClass::domain ? kDomain : kNumerical;
  }
  if (o.timed) {
    o.result["runtime_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  err << "formula: " << o.formula << '\n';

  const std::string format = g.format.empty() ? o.default_format : g.format;
  if (format == "json" && o.result.contains("criteria")) o.result.erase("rows");
  const std::string text = format == "csv" ? detail::to_csv(o.result) : o.result.dump(2) + "\n";
  if (g.output.empty()) {
    out << text;
  } else {
    std::ofstream f(g.output, std::ios::binary);
    if (!f || !(f << text)) {
      err << "error: cannot write " << g.output << '\n';
      return kSchema;
    }
  }
  return o.exit_code;
}

}  // namespace indexforge::cli
