#pragma once

#include <functional>

#include <Eigen/Core>

#include "rfc/observer_models.hpp"
#include "rfc/rational_tf.hpp"

// Brute-force machinery used to cross-check the closed-form builders. Nothing
// in here calls phi_polys or force_open_loop.
namespace rfc::oracle {

using Matrix = Eigen::MatrixXd;

/// e^{A t} by scaling and squaring around a [13/13] Pade approximant.
Matrix mat_exp(const Matrix& A, double t);

struct DiscreteSS {
  Matrix A;
  Matrix B;
};

/// Zero-order-hold discretization of dx/dt = A x + B u over dt, from the
/// exponential of the augmented block [[A, B], [0, 0]].
DiscreteSS zoh_discretize(const Matrix& A, const Matrix& B, double dt);

/// Characteristic polynomial det(zI - A), descending coefficients.
Poly characteristic_polynomial(const Matrix& A);

/// SISO transfer function C (zI - A)^{-1} B + D via Leverrier-Faddeev.
RationalTF ss_to_tf(const Matrix& A, const Matrix& B, const Matrix& C, double D, double Ts);

/// Force-error to estimated-contact-torque open loop, composed from the
/// exact ZOH plant/environment and the Backward-Euler DOb and RTOb update
/// equations as one discrete state-space system. Reduced by cancel().
RationalTF compose_loop_numeric(const ForceLoopConfig& cfg);

/// Desired acceleration (outer-loop output) to true contact torque
/// K_env q + D_env dq at the sample instants, same composition.
RationalTF contact_force_path(const ForceLoopConfig& cfg);

/// Composite midpoint rule on (-pi, pi) at n and 2n points, combined by
/// Richardson extrapolation. Throws SingularSample on a non-finite sample.
double reference_quadrature(const std::function<double(double)>& f, std::size_t n);

}  // namespace rfc::oracle
