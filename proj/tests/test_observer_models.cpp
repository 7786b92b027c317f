#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rfc/errors.hpp"
#include "rfc/observer_models.hpp"

using namespace rfc;
namespace to = testing_oracle;

TEST_CASE("derived_ratios examples") {
  const ServoParams matched = ServoParams::matched(0.1, 0.5);
  const DerivedRatios r = derived_ratios(matched);
  CHECK(r.alpha == 1.0);
  CHECK(r.beta == 1.0);
  CHECK(r.delta == 1.0);

  ServoParams s = matched;
  s.J_mi = 2.0 * s.J_m;
  const DerivedRatios r2 = derived_ratios(s);
  CHECK(r2.delta == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(r2.beta == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r2.alpha == doctest::Approx(1.0).epsilon(1e-15));

  s = matched;
  s.K_tau_i = 2.0 * s.K_tau;
  CHECK(derived_ratios(s).delta == doctest::Approx(0.5).epsilon(1e-15));

  s = matched;
  s.J_mn = -1.0;
  CHECK_THROWS_AS(derived_ratios(s), InvalidInput);
}

TEST_CASE("delta * beta = alpha for random servo parameters") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int i = 0; i < 200; ++i) {
    const ServoParams s{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    const DerivedRatios r = derived_ratios(s);
    CHECK(std::abs(r.delta * r.beta - r.alpha) <= 1e-12 * r.alpha);
    // Independent formulas.
    CHECK(r.alpha == doctest::Approx(s.J_mn * s.K_tau / (s.J_m * s.K_tau_n)).epsilon(1e-13));
    CHECK(r.delta == doctest::Approx(s.J_mi * s.K_tau / (s.J_m * s.K_tau_i)).epsilon(1e-13));
  }
}

TEST_CASE("realize_ratios reproduces the requested ratios") {
  const DerivedRatios want = DerivedRatios::from_alpha_delta(0.7, 1.6);
  const ServoParams s = realize_ratios(ServoParams{0.2, 0.4, 1.0, 0.3, 1.0, 0.6}, want);
  const DerivedRatios got = derived_ratios(s);
  CHECK(got.alpha == doctest::Approx(0.7).epsilon(1e-13));
  CHECK(got.delta == doctest::Approx(1.6).epsilon(1e-13));
  CHECK(s.J_m == 0.2);
  CHECK(s.K_tau_i == 0.6);
}

TEST_CASE("inner loop: S and T closed forms") {
  const ObserverGains g{1000.0, 500.0, 1e-3};
  const RationalTF S = inner_sensitivity(1.0, g);
  const RationalTF T = inner_complementary(1.0, g);
  CHECK(S.num().coeffs() == std::vector<double>{1.0, -1.0});
  CHECK(S.den().coeffs() == std::vector<double>{1.0, 0.0});
  CHECK(T.num().coeffs() == std::vector<double>{1.0});
  CHECK(T.den().coeffs() == std::vector<double>{1.0, 0.0});

  const RationalTF S_half = inner_sensitivity(0.5, g);
  CHECK(std::abs(S_half.evaluate(-1.0)) == doctest::Approx(2.0 / 1.5).epsilon(1e-15));

  const ObserverGains tiny{1e-9, 500.0, 1e-3};
  CHECK(std::abs(inner_sensitivity(1.0, tiny).evaluate(Complex(0.0, 1.0)) - 1.0) < 1e-11);
  CHECK(std::abs(inner_complementary(1.0, tiny).evaluate(Complex(0.0, 1.0))) < 1e-11);
}

TEST_CASE("inner open loop and its feedback") {
  const ObserverGains g{500.0, 500.0, 1e-3};
  const RationalTF L = inner_open_loop(2.0, g);  // alpha g Ts = 1
  CHECK(L.num().coeffs() == std::vector<double>{1.0});
  CHECK(L.den().coeffs() == std::vector<double>{1.0, -1.0});

  const RationalTF fb = tf_feedback(inner_open_loop(1.0, g));
  const RationalTF T = inner_complementary(1.0, g);
  CHECK(fb.num().coeffs() == T.num().coeffs());
  REQUIRE(fb.den().coeffs().size() == T.den().coeffs().size());
  for (std::size_t i = 0; i < T.den().coeffs().size(); ++i) {
    CHECK(fb.den().coeffs()[i] == doctest::Approx(T.den().coeffs()[i]).epsilon(1e-15));
  }

  const RationalTF L2 = inner_open_loop(1.0, ObserverGains{500.0, 500.0, 1e-3});
  const Complex j(0.0, 1.0);
  CHECK(std::abs(L2.evaluate(j) - 0.5 / (j - 1.0)) < 1e-15);
}

TEST_CASE("inner acceleration tracking") {
  for (double a : {0.3, 1.0, 2.0}) {
    for (double g : {100.0, 700.0}) {
      CHECK(std::abs(inner_accel_tracking(a, ObserverGains{g, 500.0, 1e-3}).evaluate(1.0) - 1.0) < 1e-12);
    }
  }
  const RationalTF t = inner_accel_tracking(2.0, ObserverGains{100.0, 500.0, 1e-3});
  REQUIRE(t.num().coeffs().size() == 2);
  CHECK(t.num().coeffs()[0] == doctest::Approx(2.2).epsilon(1e-14));
  CHECK(t.num().coeffs()[1] == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(t.den().coeffs()[1] == doctest::Approx(-0.8).epsilon(1e-14));

  // alpha = 1: zero at 1/(1+g Ts) lies between the pole 1 - g Ts and z = 1, a lead section.
  const RationalTF lead = inner_accel_tracking(1.0, ObserverGains{100.0, 500.0, 1e-3});
  const double zero = 1.0 / 1.1;
  const double pole = 0.9;
  CHECK(lead.zeros().at(0).real() == doctest::Approx(zero).epsilon(1e-12));
  CHECK(lead.poles().at(0).real() == doctest::Approx(pole).epsilon(1e-12));
  CHECK(std::arg(lead.evaluate(std::polar(1.0, 0.3))) > 0.0);
}

TEST_CASE("rtob filter") {
  for (double g : {1.0, 100.0, 5000.0}) {
    CHECK(std::abs(rtob_filter(ObserverGains{500.0, g, 1e-3}).evaluate(1.0) - 1.0) < 1e-12);
  }
  const RationalTF Q = rtob_filter(ObserverGains{500.0, 1000.0, 1e-3});
  CHECK(Q.num().coeffs() == std::vector<double>{0.5, 0.0});
  CHECK(Q.den().coeffs() == std::vector<double>{1.0, -0.5});
  const RationalTF fast = rtob_filter(ObserverGains{500.0, 1e12, 1e-3});
  CHECK(std::abs(fast.evaluate(std::polar(1.0, 2.0)) - 1.0) < 1e-8);
}

TEST_CASE("rtob estimation error transfer") {
  const RtobEstimationTF e = rtob_estimation_error_tf(ObserverGains{});
  CHECK(std::abs(e.contact.evaluate(1.0) - 1.0) < 1e-12);
  CHECK(std::abs(e.mismatch.evaluate(1.0) + 1.0) < 1e-12);
  const Complex z = std::polar(1.0, 0.7);
  CHECK(std::abs(e.contact.evaluate(z) + e.mismatch.evaluate(z)) < 1e-15);
}

TEST_CASE("environment model derived quantities") {
  const EnvModel env(1000.0, 10.0, 0.1);
  const double w0 = std::sqrt(1000.0 / 0.1);
  const double xi = 10.0 / (2.0 * w0 * 0.1);
  CHECK(env.omega0() == doctest::Approx(w0).epsilon(1e-12));
  CHECK(env.xi() == doctest::Approx(xi).epsilon(1e-12));
  CHECK(env.omega_n() == doctest::Approx(w0 * std::sqrt(1.0 - xi * xi)).epsilon(1e-12));
  CHECK_THROWS_AS(EnvModel(1000.0, 10.0, 0.01), UnsupportedModel);  // xi > 1
  CHECK_THROWS_AS(EnvModel(0.0, 1.0, 0.1), UnsupportedModel);
  CHECK_THROWS_AS(EnvModel(-1.0, 0.0, 0.1), InvalidInput);
  CHECK(EnvModel::free_space(0.1).is_free_space());
  CHECK(exponent_convention_from_string("xi-omega-n") == ExponentConvention::XiOmegaN);
  CHECK(std::string(to_string(ExponentConvention::XiOmega0)) == "xi-omega0");
}

TEST_CASE("phi polys: free-space factorization") {
  const ObserverGains g{500.0, 500.0, 1e-3};
  for (double alpha : {0.5, 1.0, 1.7}) {
    for (double delta : {0.3, 1.0, 2.0}) {
      const PhiPolys phi = phi_polys(EnvModel::free_space(0.1), DerivedRatios::from_alpha_delta(alpha, delta), g);
      const auto n_ref = to::expand({1.0, 1.0, delta});
      const auto d_ref = to::expand({0.0, 1.0, 1.0 - alpha * g.g_dob * g.Ts});
      REQUIRE(phi.numerator.coeffs().size() == 4);
      for (int i = 0; i < 4; ++i) {
        CHECK(phi.numerator.coeffs()[i] == doctest::Approx(n_ref[i]).epsilon(1e-14));
        CHECK(phi.denominator.coeffs()[i] == doctest::Approx(d_ref[i]).epsilon(1e-14));
      }
      CHECK(to::match_distance(poly_roots(phi.numerator), {1.0, 1.0, delta}) < 1e-8);
      CHECK(to::match_distance(poly_roots(phi.denominator), {0.0, 1.0, 1.0 - alpha * g.g_dob * g.Ts}) < 1e-8);
    }
  }
}

TEST_CASE("phi polys: delta = 0 and alpha g Ts = 0 collapse Phi to 1") {
  const ObserverGains g{500.0, 500.0, 1e-3};
  DerivedRatios r;
  r.alpha = 0.0;
  r.beta = 1.0;
  r.delta = 0.0;
  const PhiPolys phi = phi_polys(EnvModel(1000.0, 10.0, 0.1), r, g);
  CHECK(phi.numerator == phi.denominator);
}

TEST_CASE("phi polys: printed coefficients with the default environment") {
  const EnvModel env(1000.0, 10.0, 0.1);
  const ObserverGains g{500.0, 500.0, 1e-3};
  const DerivedRatios r = DerivedRatios::from_alpha_delta(0.8, 1.3);
  const double E = std::exp(-env.xi() * env.omega0() * g.Ts);
  const double wn = env.omega_n() * g.Ts;
  const double C = std::cos(wn);
  const double Sc = std::sin(wn) / wn;
  const double ag = r.alpha * g.g_dob * g.Ts;
  const std::vector<double> n = {1.0, -(2 * E * C + r.delta * E * Sc), E * E + 2 * r.delta * E * Sc, -r.delta * E * Sc};
  const std::vector<double> d = {1.0, -(2 * E * C - ag * E * Sc), E * E - ag * E * Sc, 0.0};
  const PhiPolys phi = phi_polys(env, r, g);
  for (int i = 0; i < 4; ++i) {
    CHECK(phi.numerator.coeffs()[i] == doctest::Approx(n[i]).epsilon(1e-14));
    if (i < 3) CHECK(phi.denominator.coeffs()[i] == doctest::Approx(d[i]).epsilon(1e-14));
  }
  // Sampling below the environment's Nyquist rate is rejected.
  CHECK_THROWS_AS(phi_polys(EnvModel(1e8, 10.0, 0.1), r, g), UnsupportedModel);
}

TEST_CASE("force open loop structure") {
  ForceLoopConfig cfg;
  const RationalTF L = force_open_loop(cfg);
  bool has_integrator = false;
  for (const Complex& p : L.poles()) has_integrator |= std::abs(p - 1.0) < 1e-8;
  CHECK(has_integrator);
  CHECK(L.den().degree() == 5);

  cfg.C_tau = 0.0;
  CHECK(force_open_loop(cfg).num().is_zero());

  cfg.C_tau = -0.1;
  CHECK_THROWS_AS(force_open_loop(cfg), InvalidInput);
}

TEST_CASE("force open loop: lead/lag section") {
  ForceLoopConfig cfg;
  cfg.gains = {500.0, 500.0, 1e-3};
  // Equal observer bandwidths: the section is identical above and below and
  // the loop equals the same product without it.
  const RationalTF L = force_open_loop(cfg);
  const PhiPolys phi = phi_polys(cfg.env, cfg.ratios(), cfg.gains);
  const double k = cfg.C_tau * force_loop_prefactor(cfg) * cfg.gains.Ts;
  for (double w : {0.1, 0.9, 2.5}) {
    const Complex z = std::polar(1.0, w);
    const Complex ref = k * z / (z - 1.0) * phi.numerator(z) / phi.denominator(z);
    CHECK(std::abs(L.evaluate(z) - ref) <= 1e-10 * std::abs(ref));
  }

  // g_dob < g_rtob: the zero 1/(1+g_dob Ts) sits nearer z = 1 than the pole
  // 1/(1+g_rtob Ts), so the section adds phase.
  const double gd = 100.0 * 1e-3;
  const double gr = 1000.0 * 1e-3;
  const double zero = 1.0 / (1.0 + gd);
  const double pole = 1.0 / (1.0 + gr);
  CHECK(std::abs(1.0 - zero) < std::abs(1.0 - pole));
  const RationalTF section(Poly{1.0 + gd, -1.0}, Poly{1.0 + gr, -1.0}, 1e-3);
  CHECK(std::arg(section.evaluate(std::polar(1.0, 0.2))) > 0.0);
}

TEST_CASE("force loop prefactor uses the identified inertia") {
  ForceLoopConfig cfg;
  cfg.servo.J_mi = 0.2;
  const DerivedRatios r = cfg.ratios();
  CHECK(force_loop_prefactor(cfg) == doctest::Approx(0.2 * cfg.gains.g_rtob * r.beta).epsilon(1e-15));
}
