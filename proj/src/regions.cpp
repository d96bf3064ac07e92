// SPDX-License-Identifier: Apache-2.0

#include "etp/regions.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "etp/marginals.hpp"
#include "etp/states.hpp"

namespace etp {

std::string to_string(RegionLabel l) {
  switch (l) {
    case RegionLabel::Incompatible: return "Incompatible";
    case RegionLabel::Transitivity: return "Transitivity";
    case RegionLabel::Metatransitivity: return "Metatransitivity";
    case RegionLabel::NoTransitivityCertifiable: return "NoTransitivityCertifiable";
  }
  return "?";
}

namespace {

void check_args(int d, double x, double y, const char* who) {
  if (d < 2) throw std::invalid_argument(std::string(who) + ": d < 2");
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
    throw std::invalid_argument(std::string(who) + ": parameters must lie in [0, 1]");
}

// Quadratic form q(x, y) <= 0 describing a filled ellipse.
struct Ellipse {
  double cu, cw, r2;  // (x + y - 1)^2 / cu + (x - y)^2 / cw <= r2
  double operator()(double x, double y) const {
    const double u = x + y - 1.0, w = x - y;
    return u * u / cu + w * w / cw - r2;
  }
};

// x in conv({apex} u E): x in E, or the ray from the apex through x meets E
// at or beyond x.
bool in_apex_hull(const Ellipse& e, double px, double py, double x, double y, double tol) {
  if (e(x, y) <= tol) return true;
  const double dx = x - px, dy = y - py;
  if (std::hypot(dx, dy) <= tol) return true;
  // q(s) = e(p + s (x - p)) = A s^2 + B s + C, via three samples.
  const double q0 = e(px, py), q1 = e(x, y), q2 = e(px + 2 * dx, py + 2 * dy);
  const double a = (q2 - 2 * q1 + q0) / 2.0, b = q1 - q0 - a, c = q0;
  const double disc = b * b - 4 * a * c;
  if (a <= 0.0 || disc < -tol) return false;
  const double s_hi = (-b + std::sqrt(std::max(disc, 0.0))) / (2 * a);
  return s_hi >= 1.0 - tol;
}

const Ellipse kWernerEllipse{1.0, 3.0, 0.25};

Ellipse isotropic_ellipse(int d) { return {1.0, d * d - 1.0, 1.0 / (d * d)}; }

// Compatible v_BC interval from the two cone inequalities (and, for qubits,
// the base plane), before checking non-emptiness.
std::pair<double, double> werner_interval(int d, double a, double b) {
  const double s = a + b;
  const double r1 = 2.0 * std::sqrt(a * b);
  const double r2 = 2.0 * std::sqrt((1.0 - a) * (1.0 - b));
  double lo = std::max(s - 1.0 - r2, 0.0);
  double hi = std::min(s - 1.0 + r2, 1.0);
  if (d >= 3) {
    lo = std::max(lo, s - r1);
    hi = std::min(hi, s + r1);
  } else {
    lo = std::max(lo, 1.5 - s);
  }
  return {lo, hi};
}

constexpr double kIntervalTol = 1e-12;

}  // namespace

double werner_f(double v_ab, double v_ac, double v_bc) { return v_ab + v_ac + v_bc; }

double werner_g(double v_ab, double v_ac, double v_bc) {
  const double x = v_ac - v_ab, y = 2 * v_bc - v_ab - v_ac;
  return std::sqrt(3 * x * x + y * y);
}

bool werner_triple_compatible(int d, double v_ab, double v_ac, double v_bc, double tol) {
  if (d < 2) throw std::invalid_argument("werner_triple_compatible: d < 2");
  for (double v : {v_ab, v_ac, v_bc})
    if (v < -tol || v > 1.0 + tol) return false;
  const double f = werner_f(v_ab, v_ac, v_bc), g = werner_g(v_ab, v_ac, v_bc);
  if (3.0 - f < g - tol) return false;
  if (d == 2) return f >= 1.5 - tol;
  return f >= g - tol;
}

bool werner_pair_compatible(int d, double v_ab, double v_ac, double tol) {
  check_args(d, v_ab, v_ac, "werner_pair_compatible");
  if (in_apex_hull(kWernerEllipse, 1.0, 1.0, v_ab, v_ac, tol)) return true;
  return d >= 3 && in_apex_hull(kWernerEllipse, 0.0, 0.0, v_ab, v_ac, tol);
}

std::optional<double> werner_max_vbc(int d, double v_ab, double v_ac) {
  check_args(d, v_ab, v_ac, "werner_max_vbc");
  const auto [lo, hi] = werner_interval(d, v_ab, v_ac);
  if (lo > hi + kIntervalTol) return std::nullopt;
  return hi;
}

std::optional<double> werner_min_vbc(int d, double v_ab, double v_ac) {
  check_args(d, v_ab, v_ac, "werner_min_vbc");
  const auto [lo, hi] = werner_interval(d, v_ab, v_ac);
  if (lo > hi + kIntervalTol) return std::nullopt;
  return lo;
}

namespace {

RegionVerdict classify(std::optional<double> max_v, bool ab_ent, bool ac_ent) {
  RegionVerdict r;
  r.max_v_bc = max_v;
  r.ab_entangled = ab_ent;
  r.ac_entangled = ac_ent;
  if (!max_v) r.label = RegionLabel::Incompatible;
  else if (*max_v >= 0.5) r.label = RegionLabel::NoTransitivityCertifiable;
  else r.label = (ab_ent && ac_ent) ? RegionLabel::Transitivity : RegionLabel::Metatransitivity;
  return r;
}

}  // namespace

RegionVerdict werner_classify(int d, double v_ab, double v_ac) {
  return classify(werner_pair_compatible(d, v_ab, v_ac) ? werner_max_vbc(d, v_ab, v_ac) : std::nullopt,
                  v_ab < 0.5, v_ac < 0.5);
}

bool isotropic_pair_compatible(int d, double p_ab, double p_ac, double tol) {
  check_args(d, p_ab, p_ac, "isotropic_pair_compatible");
  return in_apex_hull(isotropic_ellipse(d), 0.0, 0.0, p_ab, p_ac, tol);
}

std::optional<double> isotropic_max_vbc(int d, double p_ab, double p_ac) {
  if (!isotropic_pair_compatible(d, p_ab, p_ac)) return std::nullopt;
  const double gap = std::sqrt(p_ab) - std::sqrt(p_ac);
  return std::clamp(1.0 - d * gap * gap / (2.0 * (d - 1)), 0.0, 1.0);
}

RegionVerdict isotropic_classify(int d, double p_ab, double p_ac) {
  return classify(isotropic_max_vbc(d, p_ab, p_ac), p_ab > 1.0 / d, p_ac > 1.0 / d);
}

double werner_parameter(const DensityMatrix& rho) {
  const auto& dims = rho.dims();
  if (dims.size() != 2 || dims[0] != dims[1])
    throw std::invalid_argument("werner_parameter: need a two-qudit state");
  return (symmetric_projector(dims[0]) * rho.matrix()).trace().real();
}

double isotropic_parameter(const DensityMatrix& rho) {
  const auto& dims = rho.dims();
  if (dims.size() != 2 || dims[0] != dims[1])
    throw std::invalid_argument("isotropic_parameter: need a two-qudit state");
  const CVector phi = max_entangled(dims[0]);
  return (phi.adjoint() * rho.matrix() * phi)(0, 0).real();
}

namespace {

Certificate max_vbc_sdp(int d, const DensityMatrix& ab, const DensityMatrix& ac, const CertifyOptions& opts) {
  MarginalSpec spec;
  spec.dims = {d, d, d};
  spec.add(SubsystemSet{0, 1}, ab);
  spec.add(SubsystemSet{0, 2}, ac);
  return witness_opt(spec, SubsystemSet{1, 2}, symmetric_projector(d), opts);
}

}  // namespace

Certificate werner_max_vbc_sdp(int d, double v_ab, double v_ac, const CertifyOptions& opts) {
  return max_vbc_sdp(d, werner_state({d, v_ab}), werner_state({d, v_ac}), opts);
}

Certificate isotropic_max_vbc_sdp(int d, double p_ab, double p_ac, const CertifyOptions& opts) {
  return max_vbc_sdp(d, isotropic_state({d, p_ab}), isotropic_state({d, p_ac}), opts);
}

void write_region_csv(std::ostream& out, RegionFamily family, int d, int resolution) {
  if (resolution < 1) throw std::invalid_argument("write_region_csv: resolution < 1");
  if (d < 2) throw std::invalid_argument("write_region_csv: d < 2");
  const bool werner = family == RegionFamily::Werner;
  out << (werner ? "vAB,vAC,label,max_vBC\n" : "pAB,pAC,label,max_vBC\n");
  out.precision(10);
  for (int i = 0; i < resolution; ++i) {
    const double x = (i + 0.5) / resolution;
    for (int j = 0; j < resolution; ++j) {
      const double y = (j + 0.5) / resolution;
      const RegionVerdict r = werner ? werner_classify(d, x, y) : isotropic_classify(d, x, y);
      out << x << ',' << y << ',' << static_cast<int>(r.label) << ',';
      if (r.max_v_bc) out << *r.max_v_bc;
      out << '\n';
    }
  }
}

}  // namespace etp
