#include "rfc/rational_tf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rfc/errors.hpp"

namespace rfc {

namespace {

constexpr double kUnderflowGuard = 1e-300;

void require_same_ts(const RationalTF& a, const RationalTF& b) {
  if (a.sample_time() != b.sample_time()) {
    std::ostringstream os;
    os << "sample times differ: " << a.sample_time() << " vs " << b.sample_time();
    throw IncompatibleSystems(os.str());
  }
}

}  // namespace

RationalTF::RationalTF(Poly num, Poly den, double sample_time) : ts_(sample_time) {
  if (!(sample_time > 0.0) || !std::isfinite(sample_time)) {
    throw InvalidInput("sample time must be positive and finite");
  }
  if (den.is_zero()) throw InvalidInput("denominator is the zero polynomial");
  const double lead = den.leading();
  den_ = den.scaled(1.0 / lead);
  num_ = num.scaled(1.0 / lead);
}

Complex RationalTF::evaluate(Complex z) const {
  const Complex d = den_(z);
  if (std::abs(d) < kUnderflowGuard) {
    std::ostringstream os;
    os << "evaluation at a pole z = " << z;
    throw PoleEvaluation(os.str(), z);
  }
  return num_(z) / d;
}

std::vector<Complex> RationalTF::zeros() const {
  if (num_.is_zero()) return {};
  return poly_roots(num_);
}

RationalTF tf_series(const RationalTF& a, const RationalTF& b) {
  require_same_ts(a, b);
  return RationalTF(a.num() * b.num(), a.den() * b.den(), a.sample_time());
}

RationalTF tf_add(const RationalTF& a, const RationalTF& b) {
  require_same_ts(a, b);
  return RationalTF(a.num() * b.den() + b.num() * a.den(), a.den() * b.den(), a.sample_time());
}

RationalTF tf_negate(const RationalTF& a) { return RationalTF(-a.num(), a.den(), a.sample_time()); }

RationalTF tf_scale(const RationalTF& a, double k) {
  return RationalTF(a.num().scaled(k), a.den(), a.sample_time());
}

RationalTF tf_feedback(const RationalTF& loop) {
  return RationalTF(loop.num(), loop.den() + loop.num(), loop.sample_time());
}

RationalTF tf_sensitivity(const RationalTF& loop) {
  return RationalTF(loop.den(), loop.den() + loop.num(), loop.sample_time());
}

RationalTF cancel(const RationalTF& tf, double tol) {
  if (tf.num().is_zero() || tf.num().degree() == 0 || tf.den().degree() == 0) return tf;
  std::vector<Complex> zs = poly_roots(tf.num());
  std::vector<Complex> ps = poly_roots(tf.den());

  struct Pair {
    double dist;
    std::size_t zi;
    std::size_t pi;
  };
  std::vector<Pair> candidates;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const double d = std::abs(zs[i] - ps[j]);
      if (d <= tol * std::max(1.0, std::abs(zs[i]))) candidates.push_back({d, i, j});
    }
  }
  if (candidates.empty()) return tf;
  std::sort(candidates.begin(), candidates.end(), [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
  std::vector<bool> z_used(zs.size(), false);
  std::vector<bool> p_used(ps.size(), false);
  for (const Pair& c : candidates) {
    if (z_used[c.zi] || p_used[c.pi]) continue;
    z_used[c.zi] = true;
    p_used[c.pi] = true;
  }
  std::vector<Complex> z_keep;
  std::vector<Complex> p_keep;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (!z_used[i]) z_keep.push_back(zs[i]);
  }
  for (std::size_t j = 0; j < ps.size(); ++j) {
    if (!p_used[j]) p_keep.push_back(ps[j]);
  }
  return RationalTF(Poly::from_roots(z_keep, tf.num().leading()), Poly::from_roots(p_keep, 1.0), tf.sample_time());
}

std::vector<double> simulate_response(const RationalTF& tf, const std::vector<double>& input) {
  if (!tf.is_proper()) throw ImproperSystem("difference equation of an improper transfer function");
  const auto& a = tf.den().coeffs();
  const std::size_t n = a.size() - 1;
  std::vector<double> b(n + 1, 0.0);
  const auto& nc = tf.num().coeffs();
  std::copy(nc.begin(), nc.end(), b.begin() + static_cast<std::ptrdiff_t>(n + 1 - nc.size()));

  std::vector<double> y(input.size(), 0.0);
  for (std::size_t k = 0; k < input.size(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i <= n && i <= k; ++i) acc += b[i] * input[k - i];
    for (std::size_t i = 1; i <= n && i <= k; ++i) acc -= a[i] * y[k - i];
    y[k] = acc;
  }
  return y;
}

std::vector<double> step_response(const RationalTF& tf, std::size_t n_steps) {
  return simulate_response(tf, std::vector<double>(n_steps, 1.0));
}

const char* to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::AsymptoticallyStable:
      return "asymptotically-stable";
    case StabilityClass::MarginallyStable:
      return "marginally-stable";
    case StabilityClass::Unstable:
      return "unstable";
  }
  return "unknown";
}

double spectral_radius(const std::vector<Complex>& roots) {
  double r = 0.0;
  for (const Complex& z : roots) r = std::max(r, std::abs(z));
  return r;
}

StabilityReport classify_polynomial(const Poly& characteristic, double eps) {
  StabilityReport rep;
  rep.tolerance_band = eps;
  rep.poles = characteristic.degree() >= 1 ? poly_roots(characteristic) : std::vector<Complex>{};
  rep.spectral_radius = spectral_radius(rep.poles);
  if (rep.spectral_radius < 1.0 - eps) {
    rep.stability = StabilityClass::AsymptoticallyStable;
  } else if (rep.spectral_radius > 1.0 + eps) {
    rep.stability = StabilityClass::Unstable;
  } else {
    rep.stability = StabilityClass::MarginallyStable;
  }
  return rep;
}

StabilityReport classify_stability(const RationalTF& tf, double eps) { return classify_polynomial(tf.den(), eps); }

}  // namespace rfc
