#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "regulib/ode_core.hpp"
#include "support.hpp"

using namespace regulib;
using regulib::testing::vec;

namespace {

VectorField constant_field(std::size_t dim) {
  return {dim, [dim](double, const Vector&) { return Vector(Vector::Zero(static_cast<Eigen::Index>(dim))); }};
}

VectorField linear_field(double a) {
  return {1, [a](double, const Vector& x) { return Vector(a * x); }};
}

VectorField harmonic_field() {
  return {2, [](double, const Vector& x) { return vec({x[1], -x[0]}); }};
}

}  // namespace

TEST(Rk4Step, ConstantFieldLeavesStateUnchanged) {
  EXPECT_EQ(rk4_step(constant_field(1), 0.0, vec({3.0}), 0.1)[0], 3.0);
}

TEST(Rk4Step, ExponentialMatchesClosedForm) {
  const double x = rk4_step(linear_field(1.0), 0.0, vec({1.0}), 0.01)[0];
  EXPECT_NEAR(x, std::exp(0.01), 1e-12);
  EXPECT_NEAR(x, 1.0100501670, 1e-10);
}

TEST(Rk4Step, HarmonicEnergyDriftIsTiny) {
  Vector x = vec({1.0, 0.0});
  for (int i = 0; i < 628; ++i) x = rk4_step(harmonic_field(), 0.01 * i, x, 0.01);
  EXPECT_LT(std::abs(x.squaredNorm() - 1.0), 1e-8);
}

TEST(Rk4Step, NonFiniteRhsReportsTimeAndComponent) {
  VectorField bad{2, [](double t, const Vector& x) {
                    Vector d = x;
                    if (t > 0.5) d[1] = std::numeric_limits<double>::quiet_NaN();
                    return d;
                  }};
  try {
    rk4_step(bad, 0.75, vec({1.0, 1.0}), 0.1);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_DOUBLE_EQ(e.time(), 0.75);
    EXPECT_EQ(e.component(), 1u);
  }
}

TEST(Rk4Step, RejectsBadStepAndLength) {
  EXPECT_THROW(rk4_step(linear_field(1.0), 0.0, vec({1.0}), 0.0), ArgumentError);
  EXPECT_THROW(rk4_step(linear_field(1.0), 0.0, vec({1.0, 2.0}), 0.1), ArgumentError);
}

TEST(VectorField, WrongOutputLengthIsRejected) {
  VectorField f{2, [](double, const Vector&) { return vec({1.0}); }};
  EXPECT_THROW(f(0.0, vec({0.0, 0.0})), ArgumentError);
}

TEST(Integrate, ConstantFieldKeepsState) {
  const Trajectory tr = integrate(constant_field(2), vec({1.0, 2.0}), 0.0, 1.0, 0.5);
  ASSERT_EQ(tr.size(), 3u);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_EQ(tr.state(i)[0], 1.0);
    EXPECT_EQ(tr.state(i)[1], 2.0);
  }
  EXPECT_DOUBLE_EQ(tr.time(2), 1.0);
}

TEST(Integrate, DecayMatchesExponential) {
  const Trajectory tr = integrate(linear_field(-1.0), vec({1.0}), 0.0, 5.0, 0.001);
  EXPECT_EQ(tr.size(), 5001u);
  EXPECT_NEAR(tr.back()[0], std::exp(-5.0), 1e-9);
}

TEST(Integrate, ExosystemReturnsAfterOnePeriod) {
  const double period = 2.0 * M_PI;
  const std::size_t n = 6284;
  const Trajectory tr = integrate(harmonic_field(), vec({1.0, 0.0}), 0.0, period, period / n);
  EXPECT_NEAR(tr.back()[0], 1.0, 1e-7);
  EXPECT_NEAR(tr.back()[1], 0.0, 1e-7);
}

TEST(Integrate, GridCoversHorizon) {
  const Trajectory tr = integrate(constant_field(1), vec({0.0}), 0.0, 1.05, 0.1);
  EXPECT_EQ(tr.size(), 12u);
  EXPECT_GE(tr.times().back(), 1.05 - 0.1);
  for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_GT(tr.time(i), tr.time(i - 1));
}

TEST(Integrate, RejectsEmptyInterval) {
  EXPECT_THROW(integrate(constant_field(1), vec({0.0}), 1.0, 1.0, 0.1), ArgumentError);
  EXPECT_THROW(integrate(constant_field(1), vec({0.0}), 0.0, 1.0, -0.1), ArgumentError);
}

TEST(Integrate, DivergenceBoundStopsRun) {
  IntegrateOptions opts;
  opts.divergence_bound = 10.0;
  const IntegrationResult r = integrate(linear_field(1.0), vec({1.0}), 0.0, 10.0, 0.01, opts);
  ASSERT_TRUE(r.diverged_at.has_value());
  EXPECT_NEAR(*r.diverged_at, std::log(10.0), 0.02);
  EXPECT_GT(std::abs(r.trajectory.back()[0]), 10.0);
}

TEST(Integrate, IntegrationErrorCarriesTime) {
  VectorField blow{1, [](double t, const Vector& x) {
                     return Vector(t < 0.3 ? x : Vector::Constant(1, std::numeric_limits<double>::infinity()));
                   }};
  try {
    integrate(blow, vec({1.0}), 0.0, 1.0, 0.1);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GT(e.time(), 0.1);
    EXPECT_LT(e.time(), 0.35);
  }
}

TEST(Integrate, IsDeterministic) {
  const Trajectory a = integrate(harmonic_field(), vec({0.3, -0.7}), 0.0, 3.0, 0.01);
  const Trajectory b = integrate(harmonic_field(), vec({0.3, -0.7}), 0.0, 3.0, 0.01);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (Eigen::Index c = 0; c < 2; ++c) EXPECT_EQ(a.state(i)[c], b.state(i)[c]);
}

TEST(Trajectory, RejectsNonIncreasingTimesAndWrongLength) {
  Trajectory tr(2);
  tr.push_back(0.0, vec({1.0, 2.0}));
  EXPECT_THROW(tr.push_back(0.0, vec({1.0, 2.0})), ArgumentError);
  EXPECT_THROW(tr.push_back(1.0, vec({1.0})), ArgumentError);
  tr.push_back(1.0, vec({3.0, 4.0}));
  EXPECT_EQ(tr.component(1), (std::vector<double>{2.0, 4.0}));
}

TEST(SolveLyapunov, ScalarCases) {
  Matrix f(1, 1);
  f << -1.0;
  EXPECT_NEAR(solve_lyapunov(f)(0, 0), 0.5, 1e-15);
  f << -2.0;
  EXPECT_NEAR(solve_lyapunov(f)(0, 0), 0.25, 1e-15);
}

TEST(SolveLyapunov, UpperTriangularAgainstHandSolve) {
  Matrix f(2, 2);
  f << -2.0, 1.0, 0.0, -3.0;
  // Unknowns (p11, p12, p22) of P F + Fᵀ P = -I:
  //   -4 p11 = -1, p11 - 5 p12 = 0, 2 p12 - 6 p22 = -1.
  const double p11 = 0.25, p12 = p11 / 5.0, p22 = (1.0 + 2.0 * p12) / 6.0;
  const Matrix p = solve_lyapunov(f);
  EXPECT_NEAR(p(0, 0), p11, 1e-14);
  EXPECT_NEAR(p(0, 1), p12, 1e-14);
  EXPECT_NEAR(p(1, 0), p12, 1e-14);
  EXPECT_NEAR(p(1, 1), p22, 1e-14);
  EXPECT_LE(max_abs(p * f + f.transpose() * p + Matrix::Identity(2, 2)), 1e-12);
}

TEST(SolveLyapunov, NonHurwitzNamesEigenvalue) {
  Matrix f(2, 2);
  f << 0.5, 0.0, 0.0, -1.0;
  try {
    solve_lyapunov(f);
    FAIL() << "expected SynthesisError";
  } catch (const SynthesisError& e) {
    EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos) << e.what();
  }
  Matrix marginal(1, 1);
  marginal << -1e-11;
  EXPECT_THROW(solve_lyapunov(marginal), SynthesisError);
}

TEST(EigMinSymmetric, Examples) {
  EXPECT_NEAR(eig_min_symmetric(Matrix::Identity(3, 3)), 1.0, 1e-12);
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2.0, 0.5;
  EXPECT_NEAR(eig_min_symmetric(d), 0.5, 1e-12);
  Matrix s(2, 2);
  s << 2.0, 1.0, 1.0, 2.0;
  EXPECT_NEAR(eig_min_symmetric(s), 1.0, 1e-12);
}

TEST(EigMinSymmetric, RejectsAsymmetric) {
  Matrix s(2, 2);
  s << 1.0, 0.0, 1e-6, 1.0;
  EXPECT_THROW(eig_min_symmetric(s), ArgumentError);
}

TEST(EigMinSymmetric, SixteenBySixteenAgainstKnownSpectrum) {
  std::mt19937_64 rng(7);
  const Matrix q = Eigen::HouseholderQR<Matrix>(regulib::testing::random_matrix(rng, 16, 16)).householderQ();
  Vector spectrum(16);
  for (Eigen::Index i = 0; i < 16; ++i) spectrum[i] = 0.25 * static_cast<double>(i) - 1.3;
  Matrix s = q * spectrum.asDiagonal() * q.transpose();
  s = (0.5 * (s + s.transpose())).eval();
  EXPECT_NEAR(eig_min_symmetric(s), -1.3, 1e-10);
}

TEST(IsHurwitz, Tolerance) {
  Matrix m(1, 1);
  m << -1e-9;
  EXPECT_TRUE(is_hurwitz(m));
  m << -1e-11;
  EXPECT_FALSE(is_hurwitz(m));
}
