#include "rfc/oracle.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "rfc/errors.hpp"

namespace rfc::oracle {

Matrix mat_exp(const Matrix& A, double t) {
  if (A.rows() != A.cols()) throw InvalidInput("mat_exp: matrix must be square");
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  Matrix X = A * t;
  const double norm = X.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm)) throw InvalidInput("mat_exp: non-finite entries");
  if (norm == 0.0) return I;

  // Higham (2005), degree 13.
  constexpr double theta13 = 5.371920351148152;
  constexpr std::array<double, 14> b = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                        1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                        670442572800.0,      33522128640.0,       1323241920.0,
                                        40840800.0,          960960.0,            16380.0,
                                        182.0,               1.0};
  int squarings = 0;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    X /= std::ldexp(1.0, squarings);
  }
  const Matrix X2 = X * X;
  const Matrix X4 = X2 * X2;
  const Matrix X6 = X4 * X2;
  const Matrix U = X * (X6 * (b[13] * X6 + b[11] * X4 + b[9] * X2) + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * I);
  const Matrix V = X6 * (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * I;
  Matrix R = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < squarings; ++i) R = R * R;
  return R;
}

DiscreteSS zoh_discretize(const Matrix& A, const Matrix& B, double dt) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A;
  aug.topRightCorner(n, m) = B;
  const Matrix e = mat_exp(aug, dt);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

namespace {

// Leverrier-Faddeev: returns char-poly coefficients a[0..n] (a[0] = 1) and
// the matrices M_1..M_n with adj(zI - A) = sum_k M_k z^{n-k}.
void faddeev(const Matrix& A, std::vector<double>& a, std::vector<Matrix>& M) {
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  a.assign(static_cast<std::size_t>(n) + 1, 0.0);
  a[0] = 1.0;
  M.clear();
  Matrix Mk = I;
  for (Eigen::Index k = 1; k <= n; ++k) {
    M.push_back(Mk);
    const Matrix AM = A * Mk;
    a[static_cast<std::size_t>(k)] = -AM.trace() / static_cast<double>(k);
    Mk = AM + a[static_cast<std::size_t>(k)] * I;
  }
}

}  // namespace

Poly characteristic_polynomial(const Matrix& A) {
  if (A.rows() != A.cols()) throw InvalidInput("characteristic_polynomial: matrix must be square");
  std::vector<double> a;
  std::vector<Matrix> M;
  faddeev(A, a, M);
  return Poly(std::move(a));
}

RationalTF ss_to_tf(const Matrix& A, const Matrix& B, const Matrix& C, double D, double Ts) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || B.cols() != 1 || C.rows() != 1 || C.cols() != n) {
    throw InvalidInput("ss_to_tf: inconsistent SISO state-space dimensions");
  }
  std::vector<double> a;
  std::vector<Matrix> M;
  faddeev(A, a, M);
  std::vector<double> num(a.size(), 0.0);
  num[0] = D * a[0];
  for (std::size_t k = 1; k < a.size(); ++k) {
    num[k] = (C * M[k - 1] * B)(0, 0) + D * a[k];
  }
  return RationalTF(Poly(std::move(num)), Poly(std::move(a)), Ts);
}

namespace {

// Plant + DOb + RTOb as x_{k+1} = A x_k + B a_k with state
// [q, dq, DOb filter memory, RTOb filter memory] and input the desired
// acceleration a_k. The observers' filter inputs contain the current sample's
// motor current, so each period is an implicit linear system in
// w = [K_tau_n I_k, DOb filter output, RTOb filter output]; it is solved here
// with a dense LU instead of by hand.
struct LoopStateSpace {
  Matrix A;
  Matrix B;
  Matrix C_estimate;  // tau_c_hat
  double D_estimate;
  Matrix C_contact;  // K_env q + D_env dq
  double Ts;
};

LoopStateSpace build_loop(const ForceLoopConfig& cfg) {
  cfg.validate();
  const ServoParams s = cfg.effective_servo();
  const ObserverGains& g = cfg.gains;
  const double K = cfg.env.K_env();
  const double Denv = cfg.env.D_env();

  Matrix Ac(2, 2);
  Ac << 0.0, 1.0, -K / s.J_m, -Denv / s.J_m;
  Matrix Bc(2, 1);
  Bc << 0.0, 1.0 / s.J_m;
  const DiscreteSS plant = zoh_discretize(Ac, Bc, g.Ts);

  const double gd = g.g_dob * g.Ts;
  const double gr = g.g_rtob * g.Ts;
  const double cd = gd / (1.0 + gd);
  const double cr = gr / (1.0 + gr);

  // M w = N s + R a
  Matrix M = Matrix::Zero(3, 3);
  Matrix N = Matrix::Zero(3, 4);
  Matrix R = Matrix::Zero(3, 1);
  // DOb filter: y_d = cd (X + J_mn g_dob dq) + y_d_prev / (1 + gd)
  M(0, 0) = -cd;
  M(0, 1) = 1.0;
  N(0, 1) = cd * s.J_mn * g.g_dob;
  N(0, 2) = 1.0 / (1.0 + gd);
  // Current command: X = J_mn a + (y_d - J_mn g_dob dq)
  M(1, 0) = 1.0;
  M(1, 1) = -1.0;
  N(1, 1) = -s.J_mn * g.g_dob;
  R(1, 0) = s.J_mn;
  // RTOb filter: y_r = cr (K_tau_i I + J_mi g_rtob dq) + y_r_prev / (1 + gr)
  M(2, 0) = -cr * s.K_tau_i / s.K_tau_n;
  M(2, 2) = 1.0;
  N(2, 1) = cr * s.J_mi * g.g_rtob;
  N(2, 3) = 1.0 / (1.0 + gr);

  const auto lu = M.partialPivLu();
  const Matrix Ws = lu.solve(N);
  const Matrix Wa = lu.solve(R);

  const double torque_per_X = s.K_tau / s.K_tau_n;
  LoopStateSpace ss;
  ss.Ts = g.Ts;
  ss.A = Matrix::Zero(4, 4);
  ss.B = Matrix::Zero(4, 1);
  ss.A.topLeftCorner(2, 2) = plant.A;
  ss.A.topRows(2) += plant.B * torque_per_X * Ws.row(0);
  ss.A.row(2) = Ws.row(1);
  ss.A.row(3) = Ws.row(2);
  ss.B.topRows(2) = plant.B * torque_per_X * Wa(0, 0);
  ss.B(2, 0) = Wa(1, 0);
  ss.B(3, 0) = Wa(2, 0);

  ss.C_estimate = Ws.row(2);
  ss.C_estimate(0, 1) -= s.J_mi * g.g_rtob;
  ss.D_estimate = Wa(2, 0);

  ss.C_contact = Matrix::Zero(1, 4);
  ss.C_contact(0, 0) = K;
  ss.C_contact(0, 1) = Denv;
  return ss;
}

}  // namespace

RationalTF compose_loop_numeric(const ForceLoopConfig& cfg) {
  const LoopStateSpace ss = build_loop(cfg);
  const RationalTF raw = ss_to_tf(ss.A, ss.B, ss.C_estimate, ss.D_estimate, ss.Ts);
  return cancel(tf_scale(raw, cfg.C_tau));
}

RationalTF contact_force_path(const ForceLoopConfig& cfg) {
  const LoopStateSpace ss = build_loop(cfg);
  return cancel(ss_to_tf(ss.A, ss.B, ss.C_contact, 0.0, ss.Ts));
}

namespace {

double midpoint_sum(const std::function<double(double)>& f, std::size_t n) {
  const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = -std::numbers::pi + (static_cast<double>(i) + 0.5) * h;
    const double v = f(w);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite integrand sample at omega = " << w;
      throw SingularSample(os.str(), w);
    }
    acc += v;
  }
  return acc * h;
}

}  // namespace

double reference_quadrature(const std::function<double(double)>& f, std::size_t n) {
  if (n < 1 || (n & (n - 1)) != 0) throw InvalidInput("reference_quadrature: n must be a power of two");
  const double coarse = midpoint_sum(f, n);
  const double fine = midpoint_sum(f, 2 * n);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace rfc::oracle
