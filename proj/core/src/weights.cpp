#include "qdl/weights.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qdl {

namespace {

constexpr double kPi = std::numbers::pi;

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; mirror).
constexpr double kGlx[8] = {0.0950125098376374, 0.2816035507792589,
                            0.4580167776572274, 0.6178762444026438,
                            0.7554044083550030, 0.8656312023878318,
                            0.9445750230732326, 0.9894009349916499};
constexpr double kGlw[8] = {0.1894506104550685, 0.1826034150449236,
                            0.1691565193950025, 0.1495959888165767,
                            0.1246289712555339, 0.0951585116824928,
                            0.0622535239386479, 0.0271524594117541};

// Fills xs/ws with an m-panel composite 16-point rule over [a, b].
void gl_nodes(double a, double b, int m, std::vector<double>& xs,
              std::vector<double>& ws) {
  xs.clear();
  ws.clear();
  xs.reserve(16 * m);
  ws.reserve(16 * m);
  double h = (b - a) / m;
  for (int p = 0; p < m; ++p) {
    double c = a + (p + 0.5) * h, r = 0.5 * h;
    for (int i = 0; i < 8; ++i) {
      xs.push_back(c - r * kGlx[i]);
      ws.push_back(r * kGlw[i]);
      xs.push_back(c + r * kGlx[i]);
      ws.push_back(r * kGlw[i]);
    }
  }
}

cplx mellin_fixed(const SmoothWeight& w, cplx s, int m) {
  std::vector<double> xs, ws;
  gl_nodes(w.x0, w.x1, m, xs, ws);
  cplx acc = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double f = w(xs[i]);
    if (f != 0.0) acc += ws[i] * f * std::exp((s - 1.0) * std::log(xs[i]));
  }
  return acc;
}

// Per-node x-independent prefactor G(s)/s * g_alpha(s) on a vertical line;
// shared between v_alpha and the cache builder so each V evaluation is a
// single x^{-s} recurrence sweep.
struct VLine {
  double abscissa, step;
  int half;
  bool add_residue;
  std::vector<cplx> pref;  // index j + half, j = -half..half

  VLine(cplx alpha, const GSpec& gspec, double abscissa_, double step_,
        double height)
      : abscissa(abscissa_), step(step_) {
    half = static_cast<int>(std::ceil(height / step));
    add_residue = abscissa < 0.0;
    pref.resize(2 * half + 1);
    for (int j = -half; j <= half; ++j) {
      cplx s(abscissa, j * step);
      pref[j + half] = big_g(s, gspec) / s * g_alpha(s, alpha);
    }
  }

  cplx integrate(double x) const {
    // (1/2pi) * step * sum_j pref[j] * x^{-s_j}, stepping x^{-i t} by
    // recurrence; residue 1 added when the line sits left of s = 0.
    double lx = std::log(x);
    cplx rot = std::exp(cplx(0.0, -step * lx));
    cplx cur = std::exp(cplx(0.0, half * step * lx));  // x^{-i t_{-half}}
    double mag = std::exp(-abscissa * lx);
    cplx acc = 0.0;
    for (int idx = 0; idx < 2 * half + 1; ++idx) {
      acc += pref[idx] * cur;
      cur *= rot;
    }
    cplx val = acc * (mag * step / (2.0 * kPi));
    return add_residue ? val + 1.0 : val;
  }
};

}  // namespace

double SmoothWeight::operator()(double x) const {
  if (x <= x0 || x >= x1) return 0.0;
  return std::exp(-1.0 / ((x - x0) * (x1 - x)));
}

std::string SmoothWeight::name() const {
  if (x0 == 1.0 && x1 == 2.0) return "bump12";
  return "bump[" + std::to_string(x0) + "," + std::to_string(x1) + "]";
}

void SmoothWeight::validate() const {
  if (!(0.0 < x0 && x0 < x1))
    throw std::invalid_argument("SmoothWeight: requires 0 < x0 < x1");
}

void ContourSpec::validate() const {
  if (!(height > 0.0) || !(step > 0.0) || step > height / 50.0)
    throw std::invalid_argument(
        "ContourSpec: requires height > 0 and 0 < step <= height/50");
}

int ContourSpec::half_count() const {
  return static_cast<int>(std::ceil(height / step));
}

cplx mellin_phi(const SmoothWeight& w, cplx s) {
  w.validate();
  cplx prev = mellin_fixed(w, s, 32);
  for (int m = 64; m <= 1024; m *= 2) {
    cplx cur = mellin_fixed(w, s, m);
    if (std::abs(cur - prev) <= 0.5e-12 * std::max(1.0, std::abs(cur)))
      return cur;
    prev = cur;
  }
  return prev;
}

std::vector<cplx> mellin_phi_line(const SmoothWeight& w, cplx base, double dt,
                                  int jmin, int jmax) {
  w.validate();
  if (jmax < jmin) throw std::invalid_argument("mellin_phi_line: empty range");
  const int m = 256;  // fixed high-order rule; integrand entire in s
  std::vector<double> xs, ws;
  gl_nodes(w.x0, w.x1, m, xs, ws);
  std::vector<cplx> out(jmax - jmin + 1, cplx(0.0, 0.0));
  for (size_t i = 0; i < xs.size(); ++i) {
    double f = w(xs[i]);
    if (f == 0.0) continue;
    double lx = std::log(xs[i]);
    cplx cur = ws[i] * f * std::exp((base - 1.0 + cplx(0.0, jmin * dt)) * lx);
    cplx rot = std::exp(cplx(0.0, dt * lx));
    for (size_t j = 0; j < out.size(); ++j) {
      out[j] += cur;
      cur *= rot;
    }
  }
  return out;
}

cplx v_alpha(double x, cplx alpha, const GSpec& gspec,
             const ContourSpec& contour) {
  if (!(x > 0.0)) throw std::invalid_argument("v_alpha: requires x > 0");
  contour.validate();
  if (x >= 0.5) {
    if (!(contour.abscissa > 0.0))
      throw std::invalid_argument("v_alpha: abscissa must be positive");
    VLine line(alpha, gspec, contour.abscissa, contour.step, contour.height);
    return line.integrate(x);
  }
  // Left-shifted branch: residue 1 at s = 0 plus the integral on Re s = -0.1
  // (still right of the gamma-factor pole at s = -1/2 - alpha).
  VLine line(alpha, gspec, -0.1, std::min(contour.step, 0.02), contour.height);
  return line.integrate(x);
}

cplx VCache::eval(double x) const {
  if (!(x > 0.0)) throw std::invalid_argument("VCache::eval: requires x > 0");
  if (x > xmax_) return cplx(0.0, 0.0);
  if (x < xmin_) return v_alpha(x, alpha_, gspec_, contour_);
  double u = (std::log(x) - log_xmin_) * inv_dlog_;
  long long i0 = static_cast<long long>(std::floor(u)) - 1;
  long long last = static_cast<long long>(values_.size()) - 1;
  if (i0 < 0) i0 = 0;
  if (i0 > last - 3) i0 = last - 3;
  double t = u - (i0 + 1);  // in [-1, 2] around the central pair
  // 4-point Lagrange weights on equally spaced nodes -1, 0, 1, 2
  double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return w0 * values_[i0] + w1 * values_[i0 + 1] + w2 * values_[i0 + 2] +
         w3 * values_[i0 + 3];
}

double VCache::tail_envelope(double x) const {
  if (x > xmax_) return envelope_.back();
  if (x < xmin_) return envelope_.front();
  double u = (std::log(x) - log_xmin_) * inv_dlog_;
  long long i = static_cast<long long>(std::floor(u));
  if (i < 0) i = 0;
  if (i >= static_cast<long long>(envelope_.size()))
    i = static_cast<long long>(envelope_.size()) - 1;
  return envelope_[i];
}

VCache build_v_cache(cplx alpha, const GSpec& gspec, double xmax,
                     int per_decade, const ContourSpec& contour) {
  if (!(xmax >= 1.0)) throw std::invalid_argument("build_v_cache: xmax must be >= 1");
  if (per_decade < 16)
    throw std::invalid_argument("build_v_cache: per_decade too small");
  contour.validate();
  if (contour.abscissa <= 0.0)
    throw std::invalid_argument("build_v_cache: abscissa must be positive");
  VCache c;
  c.alpha_ = alpha;
  c.gspec_ = gspec;
  c.contour_ = contour;
  c.xmin_ = 1e-6;
  c.xmax_ = xmax;
  double dlog = std::numbers::ln10 / per_decade;
  long long n = static_cast<long long>(
                    std::ceil((std::log(xmax) - std::log(c.xmin_)) / dlog)) +
                2;
  c.log_xmin_ = std::log(c.xmin_);
  c.inv_dlog_ = 1.0 / dlog;
  c.values_.resize(n);
  const ContourSpec& cs = c.contour_;
  VLine right(alpha, gspec, cs.abscissa, cs.step, cs.height);
  VLine left(alpha, gspec, -0.1, std::min(cs.step, 0.02), cs.height);
  for (long long i = 0; i < n; ++i) {
    double x = std::exp(c.log_xmin_ + i * dlog);
    c.values_[i] = (x >= 0.5 ? right : left).integrate(x);
  }
  c.envelope_.resize(n);
  double m = 0.0;
  for (long long i = n - 1; i >= 0; --i) {
    m = std::max(m, std::abs(c.values_[i]));
    c.envelope_[i] = m;
  }
  return c;
}

}  // namespace qdl
