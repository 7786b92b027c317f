#pragma once

#include <vector>

#include "rfc/poly.hpp"

namespace rfc {

/// Discrete-time SISO transfer function num(z)/den(z) with sample time.
///
/// The stored form is canonical: den is monic, with num scaled by the same
/// factor. Pole-zero cancellation never happens implicitly; call cancel().
class RationalTF {
 public:
  RationalTF(Poly num, Poly den, double sample_time);

  static RationalTF gain(double k, double sample_time) {
    return RationalTF(Poly::constant(k), Poly::constant(1.0), sample_time);
  }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  double sample_time() const { return ts_; }

  bool is_proper() const { return num_.is_zero() || num_.degree() <= den_.degree(); }

  /// num(z)/den(z) by Horner evaluation. Throws PoleEvaluation when |den(z)|
  /// is below the underflow guard.
  Complex evaluate(Complex z) const;

  std::vector<Complex> poles() const { return poly_roots(den_); }
  std::vector<Complex> zeros() const;

 private:
  Poly num_;
  Poly den_;
  double ts_;
};

RationalTF tf_series(const RationalTF& a, const RationalTF& b);
RationalTF tf_add(const RationalTF& a, const RationalTF& b);
RationalTF tf_negate(const RationalTF& a);
RationalTF tf_scale(const RationalTF& a, double k);
/// Unity negative feedback around L: L / (1 + L).
RationalTF tf_feedback(const RationalTF& loop);
/// 1 / (1 + L).
RationalTF tf_sensitivity(const RationalTF& loop);

inline constexpr double kDefaultCancelTol = 1e-9;

/// Removes pole-zero pairs closer than tol * max(1, |z|).
RationalTF cancel(const RationalTF& tf, double tol = kDefaultCancelTol);

/// Output of the difference equation driven by `input` from rest.
std::vector<double> simulate_response(const RationalTF& tf, const std::vector<double>& input);
/// Unit step response over n_steps samples. Throws ImproperSystem when
/// deg(num) > deg(den).
std::vector<double> step_response(const RationalTF& tf, std::size_t n_steps);

enum class StabilityClass { AsymptoticallyStable, MarginallyStable, Unstable };

const char* to_string(StabilityClass c);

inline constexpr double kDefaultStabilityBand = 1e-9;

struct StabilityReport {
  std::vector<Complex> poles;
  double spectral_radius = 0.0;
  StabilityClass stability = StabilityClass::AsymptoticallyStable;
  double tolerance_band = kDefaultStabilityBand;

  bool stable() const { return stability == StabilityClass::AsymptoticallyStable; }
};

StabilityReport classify_stability(const RationalTF& tf, double eps = kDefaultStabilityBand);
/// Same classification applied to a bare characteristic polynomial.
StabilityReport classify_polynomial(const Poly& characteristic, double eps = kDefaultStabilityBand);

double spectral_radius(const std::vector<Complex>& roots);

}  // namespace rfc
