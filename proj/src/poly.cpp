#include "rfc/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "rfc/errors.hpp"

namespace rfc {

Poly::Poly(std::vector<double> coeffs) {
  for (double c : coeffs) {
    if (!std::isfinite(c)) {
      throw InvalidInput("polynomial coefficient is not finite");
    }
  }
  auto first = std::find_if(coeffs.begin(), coeffs.end(), [](double c) { return c != 0.0; });
  if (first == coeffs.end()) {
    coeffs_ = {0.0};
  } else {
    coeffs_.assign(first, coeffs.end());
  }
}

Poly Poly::from_roots(std::span<const Complex> roots, double lead) {
  std::vector<Complex> acc{Complex(1.0)};
  for (const Complex& r : roots) {
    std::vector<Complex> next(acc.size() + 1, Complex(0.0));
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i] += acc[i];
      next[i + 1] -= acc[i] * r;
    }
    acc = std::move(next);
  }
  std::vector<double> out(acc.size());
  std::transform(acc.begin(), acc.end(), out.begin(), [lead](Complex c) { return lead * c.real(); });
  return Poly(std::move(out));
}

double Poly::max_abs_coeff() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

Complex Poly::operator()(Complex z) const {
  Complex acc(0.0);
  for (double c : coeffs_) acc = acc * z + c;
  return acc;
}

double Poly::operator()(double z) const {
  double acc = 0.0;
  for (double c : coeffs_) acc = acc * z + c;
  return acc;
}

Poly Poly::operator-() const { return scaled(-1.0); }

Poly Poly::scaled(double s) const {
  std::vector<double> out(coeffs_);
  for (double& c : out) c *= s;
  return Poly(std::move(out));
}

namespace {

std::vector<double> aligned_sum(const std::vector<double>& a, const std::vector<double>& b, double sign) {
  const std::size_t n = std::max(a.size(), b.size());
  std::vector<double> out(n, 0.0);
  const std::size_t oa = n - a.size();
  const std::size_t ob = n - b.size();
  for (std::size_t i = 0; i < a.size(); ++i) out[oa + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[ob + i] += sign * b[i];
  return out;
}

}  // namespace

Poly operator+(const Poly& a, const Poly& b) { return Poly(aligned_sum(a.coeffs_, b.coeffs_, 1.0)); }

Poly operator-(const Poly& a, const Poly& b) { return Poly(aligned_sum(a.coeffs_, b.coeffs_, -1.0)); }

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly();
  std::vector<double> out(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
      out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
  }
  return Poly(std::move(out));
}

double relative_residual(const Poly& p, Complex z) {
  const double az = std::abs(z);
  double scale = 0.0;
  for (double c : p.coeffs()) scale = scale * az + std::abs(c);
  if (scale == 0.0) return 0.0;
  return std::abs(p(z)) / scale;
}

namespace {

// Radix-2 row/column balancing of the off-diagonal part (Parlett & Reinsch).
// Powers of two keep the similarity transform exact.
void balance(Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd off = m;
  off.diagonal().setZero();
  constexpr double kGamma = 0.9;
  bool changed = true;
  int sweeps = 0;
  while (changed && sweeps++ < 100) {
    changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double row = off.row(i).lpNorm<1>();
      const double col = off.col(i).lpNorm<1>();
      if (row == 0.0 || col == 0.0) continue;
      int exponent = 0;
      std::frexp(row / col, &exponent);
      exponent /= 2;
      if (exponent == 0) continue;
      const double new_col = std::ldexp(col, exponent);
      const double new_row = std::ldexp(row, -exponent);
      if (new_col + new_row < kGamma * (col + row)) {
        changed = true;
        off.row(i) *= std::ldexp(1.0, -exponent);
        off.col(i) *= std::ldexp(1.0, exponent);
      }
    }
  }
  off.diagonal() = m.diagonal();
  m = off;
}

std::vector<Complex> companion_eigenvalues(const std::vector<double>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) comp(0, j) = -c[j + 1] / c[0];
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  balance(comp);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(comp, false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("companion-matrix eigenvalue iteration did not converge (degree " +
                         std::to_string(n) + ")");
  }
  std::vector<Complex> out(n);
  for (int i = 0; i < n; ++i) out[i] = solver.eigenvalues()[i];
  return out;
}

// Taylor coefficients of p about c up to order `count - 1`, by repeated
// synthetic division.
std::vector<Complex> taylor_coefficients(const Poly& p, Complex c, int count) {
  std::vector<Complex> work(p.coeffs().begin(), p.coeffs().end());
  std::vector<Complex> out;
  for (int k = 0; k < count && !work.empty(); ++k) {
    for (std::size_t i = 1; i < work.size(); ++i) work[i] += work[i - 1] * c;
    out.push_back(work.back());
    work.pop_back();
  }
  return out;
}

// A multiple root perturbed by rounding splits into a small ring around the
// true value; the centroid of the ring is far more accurate than any member.
// Accept a cluster as one multiple root only when its spread is within what
// an m-fold root would show under backward error of size eps * n.
void polish_clusters(const Poly& p, std::vector<Complex>& roots) {
  const std::size_t n = roots.size();
  if (n < 2) return;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double radius = 1e-3 * std::max(1.0, std::abs(roots[i]));
      if (std::abs(roots[i] - roots[j]) <= radius) parent[find(i)] = find(j);
    }
  }
  const double backward = 8.0 * static_cast<double>(p.degree()) * std::numeric_limits<double>::epsilon();
  for (std::size_t r = 0; r < n; ++r) {
    if (find(r) != r) continue;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (find(i) == r) members.push_back(i);
    }
    const int m = static_cast<int>(members.size());
    if (m < 2) continue;
    Complex centroid(0.0);
    for (std::size_t i : members) centroid += roots[i];
    centroid /= static_cast<double>(m);
    double spread = 0.0;
    for (std::size_t i : members) spread = std::max(spread, std::abs(roots[i] - centroid));

    const auto taylor = taylor_coefficients(p, centroid, m + 1);
    if (static_cast<int>(taylor.size()) < m + 1 || std::abs(taylor[m]) == 0.0) continue;
    double scale = 0.0;
    const double ac = std::max(1.0, std::abs(centroid));
    for (double c : p.coeffs()) scale = scale * ac + std::abs(c);
    const double predicted = std::pow(backward * scale / std::abs(taylor[m]), 1.0 / m);
    if (spread > 4.0 * predicted) continue;

    if (std::abs(centroid.imag()) <= 1e-14 * ac) centroid.imag(0.0);
    for (std::size_t i : members) roots[i] = centroid;
  }
}

}  // namespace

std::vector<Complex> poly_roots(const Poly& p) {
  if (p.is_zero()) throw InvalidInput("poly_roots: zero polynomial has no finite root set");
  std::vector<double> c = p.coeffs();
  std::vector<Complex> roots;
  while (c.size() > 1 && c.back() == 0.0) {
    roots.emplace_back(0.0);
    c.pop_back();
  }
  if (c.size() == 2) {
    roots.emplace_back(-c[1] / c[0]);
  } else if (c.size() > 2) {
    auto eig = companion_eigenvalues(c);
    const Poly reduced(c);
    polish_clusters(reduced, eig);
    roots.insert(roots.end(), eig.begin(), eig.end());
  }
  return roots;
}

}  // namespace rfc
