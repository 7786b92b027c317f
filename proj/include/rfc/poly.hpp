#pragma once

#include <complex>
#include <span>
#include <vector>

namespace rfc {

using Complex = std::complex<double>;

/// Real polynomial in z, coefficients in descending powers (coeffs()[0] is
/// the leading coefficient). The zero polynomial is the single coefficient 0.
class Poly {
 public:
  Poly() : coeffs_{0.0} {}
  explicit Poly(std::vector<double> coeffs);
  Poly(std::initializer_list<double> coeffs) : Poly(std::vector<double>(coeffs)) {}

  static Poly constant(double c) { return Poly({c}); }
  /// lead * prod(z - r). Complex roots must come in conjugate pairs; the
  /// imaginary residue of the expansion is discarded.
  static Poly from_roots(std::span<const Complex> roots, double lead = 1.0);

  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double leading() const { return coeffs_.front(); }
  bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }
  double max_abs_coeff() const;

  Complex operator()(Complex z) const;
  double operator()(double z) const;

  Poly operator-() const;
  Poly scaled(double s) const;

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  friend bool operator==(const Poly& a, const Poly& b) = default;

 private:
  std::vector<double> coeffs_;
};

// Residual tolerance used by the root-finder post-condition.
inline constexpr double kRootResidualTol = 1e-8;

/// All deg(p) roots with multiplicity, from the eigenvalues of the balanced
/// companion matrix. Clusters that numerically represent one multiple root
/// are replaced by their centroid. Throws InvalidInput for the zero
/// polynomial; returns an empty list for nonzero constants.
std::vector<Complex> poly_roots(const Poly& p);

/// Relative residual |p(z)| / sum_i |c_i| |z|^(n-i).
double relative_residual(const Poly& p, Complex z);

}  // namespace rfc
