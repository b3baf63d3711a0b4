#include <gtest/gtest.h>

#include <cmath>

#include "regulib/regulator.hpp"
#include "regulib/scenarios.hpp"
#include "support.hpp"

using namespace regulib;
using regulib::testing::vec;

namespace {

Matrix mat(Eigen::Index rows, Eigen::Index cols, std::initializer_list<double> xs) {
  Matrix m(rows, cols);
  auto it = xs.begin();
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = *it++;
  return m;
}

ImmersionData canonical_immersion() { return build_scenario("harmonic1").immersion; }

ImmersionData d3_immersion() {
  return make_immersion(
      3, 1, [](const Vector&, const Vector& w, const Vector&) { return Vector(Vector::Zero(3)); },
      [](const Vector& rho) { return Vector(Vector::Constant(1, rho[0])); },
      [](double) { return Vector(Vector::Zero(3)); },
      [](double y) { return mat(3, 1, {0.0, 0.0, -y}); });
}

}  // namespace

TEST(BuildFG, TwoDimensional) {
  const FilterMatrices fg = build_fg(vec({1.0, 2.0}));
  EXPECT_EQ(fg.F, mat(1, 1, {-2.0}));
  EXPECT_EQ(fg.G, mat(1, 2, {-2.0, 1.0}));
}

TEST(BuildFG, ThreeDimensional) {
  const FilterMatrices fg = build_fg(vec({1.0, 3.0, 2.0}));
  EXPECT_EQ(fg.F, mat(2, 2, {-3.0, 1.0, -2.0, 0.0}));
  EXPECT_EQ(fg.G, mat(2, 3, {-3.0, 1.0, 0.0, -2.0, 0.0, 1.0}));
  std::vector<double> re;
  for (const auto& ev : eigenvalues(fg.F)) re.push_back(ev.real());
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], -2.0, 1e-12);
  EXPECT_NEAR(re[1], -1.0, 1e-12);
}

TEST(BuildFG, RejectsRepeatedOrUnstableRoots) {
  EXPECT_THROW(build_fg(vec({1.0, 2.0, 1.0})), SynthesisError);  // (λ+1)²
  EXPECT_THROW(build_fg(vec({1.0, -1.0})), SynthesisError);
  EXPECT_THROW(build_fg(vec({1.0, 0.0, 1.0})), SynthesisError);  // ±i
  try {
    build_fg(vec({1.0, -3.0}));
  } catch (const SynthesisError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(build_fg(vec({2.0, 2.0})), ArgumentError);
}

TEST(BFromRoots, MatchesExpansion) {
  EXPECT_EQ(b_from_roots({-1.0, -2.0}), vec({1.0, 3.0, 2.0}));
}

TEST(GainK, Examples) {
  EXPECT_EQ(gain_K(vec({1.0, 2.0}), 5.0, shift_matrix(2)), vec({7.0, 10.0}));
  EXPECT_EQ(gain_K(vec({1.0, 0.0, 0.0}), 3.5, shift_matrix(3)), vec({3.5, 0.0, 0.0}));
  EXPECT_EQ(gain_K(vec({1.0, 3.0, 2.0}), 1.0, shift_matrix(3)), vec({4.0, 5.0, 2.0}));
  EXPECT_THROW(gain_K(vec({1.0, 2.0}), 0.0, shift_matrix(2)), ArgumentError);
}

TEST(Beta, CanonicalEqualsX) {
  EXPECT_DOUBLE_EQ(beta(mat(1, 1, {0.37}), 2.0, canonical_immersion())[0], 0.37);
  EXPECT_EQ(beta(mat(1, 1, {0.0}), -1.0, canonical_immersion())[0], 0.0);
}

TEST(Beta, ThreeDimensionalPicksFirstRow) {
  EXPECT_DOUBLE_EQ(beta(mat(2, 1, {0.4, -0.9}), 1.0, d3_immersion())[0], 0.4);
  EXPECT_THROW(beta(mat(1, 1, {0.4}), 1.0, d3_immersion()), ArgumentError);
}

TEST(BigH, CanonicalExample) {
  const RegulatorParams p = make_regulator_params(vec({1.0, 2.0}), 5.0, 20.0, 1.5, 1);
  const Vector h = bigH(mat(1, 1, {0.4}), 0.0, p, canonical_immersion());
  EXPECT_DOUBLE_EQ(h[0], 7.0);
  EXPECT_NEAR(h[1], 10.16, 1e-14);
  EXPECT_EQ(bigH(mat(1, 1, {0.0}), 0.0, p, canonical_immersion()), p.K);
  const Vector h2 = bigH(mat(1, 1, {0.8}), 0.0, p, canonical_immersion());
  EXPECT_NEAR(h2[1] - p.K[1], 4.0 * (h[1] - p.K[1]), 1e-14);
}

TEST(DeadZone, ScalarExamples) {
  EXPECT_EQ(deadzone_scalar(1.0, 1.5), 0.0);
  EXPECT_EQ(deadzone_scalar(3.0, 1.5), 3.0);
  EXPECT_DOUBLE_EQ(deadzone_scalar(2.0, 1.5), 1.125);
  EXPECT_DOUBLE_EQ(deadzone_scalar(-2.0, 1.5), -1.125);
  EXPECT_EQ(deadzone_scalar(1.5, 1.5), 0.0);
  EXPECT_DOUBLE_EQ(deadzone_scalar(2.5, 1.5), 2.5);
}

TEST(DeadZone, IsC1AtBothKnees) {
  const double ell = 1.5, h = 1e-7;
  for (double x : {ell, ell + 1.0}) {
    const double left = (deadzone_scalar(x, ell) - deadzone_scalar(x - h, ell)) / h;
    const double right = (deadzone_scalar(x + h, ell) - deadzone_scalar(x, ell)) / h;
    EXPECT_NEAR(left, right, 1e-5) << x;
  }
}

TEST(DeadZone, VectorExamples) {
  EXPECT_EQ(deadzone_vec(vec({0.5, -3.0}), 1.5), vec({0.0, -3.0}));
  EXPECT_EQ(deadzone_vec(Vector::Zero(3), 1.5), Vector::Zero(3));
  EXPECT_EQ(deadzone_vec(vec({2.0, 2.0}), 1.5), vec({1.125, 1.125}));
}

TEST(RegulatorRhs, ZeroStateIsEquilibrium) {
  const RegulatorParams p = make_regulator_params(vec({1.0, 2.0}), 5.0, 20.0, 1.5, 1);
  const RegulatorState st{Vector::Zero(2), Vector::Zero(1), Matrix::Zero(1, 1)};
  const RegulatorState d = regulator_rhs(st, 0.0, p, canonical_immersion());
  EXPECT_EQ(d.pack().cwiseAbs().maxCoeff(), 0.0);
}

TEST(RegulatorRhs, CanonicalSubstitution) {
  const RegulatorParams p = make_regulator_params(vec({1.0, 2.0}), 5.0, 20.0, 1.5, 1);
  const RegulatorState st{vec({1.0, 0.0}), vec({1.0}), Matrix::Zero(1, 1)};
  const RegulatorState d = regulator_rhs(st, 0.0, p, canonical_immersion());
  EXPECT_EQ(d.xi, vec({0.0, -1.0}));
  EXPECT_EQ(d.theta_hat[0], 0.0);
  EXPECT_EQ(d.X(0, 0), -1.0);
}

TEST(RegulatorRhs, LeakageOutsideDeadZone) {
  const RegulatorParams p = make_regulator_params(vec({1.0, 2.0}), 5.0, 20.0, 1.5, 1);
  const RegulatorState st{Vector::Zero(2), vec({3.0}), Matrix::Zero(1, 1)};
  EXPECT_EQ(regulator_rhs(st, 0.0, p, canonical_immersion()).theta_hat[0], -3.0);
}

TEST(RegulatorRhs, InjectionThroughH) {
  const RegulatorParams p = make_regulator_params(vec({1.0, 2.0}), 5.0, 20.0, 1.5, 1);
  const RegulatorState st{Vector::Zero(2), Vector::Zero(1), mat(1, 1, {0.4})};
  const RegulatorState d = regulator_rhs(st, 0.5, p, canonical_immersion());
  EXPECT_NEAR(d.xi[0], 0.5 * 7.0, 1e-14);
  EXPECT_NEAR(d.xi[1], 0.5 * 10.16, 1e-14);
  EXPECT_NEAR(d.theta_hat[0], 0.5 * 0.4, 1e-15);
  EXPECT_NEAR(d.X(0, 0), -0.8, 1e-15);
}

TEST(RegulatorState, PackUnpack) {
  const RegulatorState st{vec({1.0, 2.0, 3.0}), vec({4.0, 5.0}), mat(2, 2, {6.0, 7.0, 8.0, 9.0})};
  const Vector v = st.pack();
  EXPECT_EQ(v, vec({1, 2, 3, 4, 5, 6, 7, 8, 9}));
  const RegulatorState back = RegulatorState::unpack(v, 3, 2);
  EXPECT_EQ(back.X, st.X);
  EXPECT_EQ(RegulatorState::packed_size(3, 2), 9u);
  EXPECT_THROW(RegulatorState::unpack(vec({1.0}), 3, 2), ArgumentError);
}

TEST(ControlOutput, Examples) {
  const RegulatorParams p = make_regulator_params(vec({1.0, 2.0}), 5.0, 10.0, 1.5, 1);
  const RegulatorState zero{Vector::Zero(2), Vector::Zero(1), Matrix::Zero(1, 1)};
  const ControlOutput a = control_output(zero, 0.0, p);
  EXPECT_EQ(a.u, 0.0);
  EXPECT_EQ(a.v, 0.0);
  const RegulatorState st{vec({2.0, 0.0}), Vector::Zero(1), Matrix::Zero(1, 1)};
  const ControlOutput b = control_output(st, 0.1, p);
  EXPECT_DOUBLE_EQ(b.v, -1.0);
  EXPECT_DOUBLE_EQ(b.u, 1.0);
  const double slope = (control_output(st, 0.3, p).u - control_output(st, 0.2, p).u) / 0.1;
  EXPECT_NEAR(slope, -10.0, 1e-12);
}

TEST(MakeRegulatorParams, Validation) {
  EXPECT_THROW(make_regulator_params(vec({1.0, 2.0}), 0.0, 1.0, 1.0, 1), ArgumentError);
  EXPECT_THROW(make_regulator_params(vec({1.0, 2.0}), 1.0, -1.0, 1.0, 1), ArgumentError);
  EXPECT_THROW(make_regulator_params(vec({1.0, 2.0}), 1.0, 1.0, 0.0, 1), ArgumentError);
  EXPECT_THROW(make_regulator_params(vec({1.0, -2.0}), 1.0, 1.0, 1.0, 1), SynthesisError);
  const RegulatorParams p = make_regulator_params(vec({1.0, 2.0}), 5.0, 20.0, 1.5, 1);
  EXPECT_EQ(p.K, vec({7.0, 10.0}));
  EXPECT_EQ(p.d, 2u);
}

TEST(DeadZoneRule, CanonicalBoxCorner) {
  const Scenario s = build_scenario("harmonic1");
  EXPECT_DOUBLE_EQ(s.immersion.eval_theta(vec({1.0}))[0], 1.0);
  EXPECT_NEAR(max_theta_norm(s.immersion, s.exo.param_box), 1.44, 1e-14);
  EXPECT_GT(s.regulator.ell, 1.44);
  EXPECT_NEAR(default_dead_zone(s.immersion, s.exo.param_box), 1.05 * 1.44, 1e-14);
  RegulatorParams small = s.regulator;
  small.ell = 1.4;
  EXPECT_THROW(validate_dead_zone(small, s.immersion, s.exo.param_box), SynthesisError);
}

TEST(Mato, CanonicalIdentities) {
  const RegulatorParams p = make_regulator_params(vec({1.0, 2.0}), 5.0, 20.0, 1.5, 1);
  // T (A - K C) T⁻¹ by hand: A - KC = [[-7, 1], [-10, 0]], T = [[1, 0], [-2, 1]].
  const Matrix T = mat(2, 2, {1.0, 0.0, -2.0, 1.0});
  const Matrix Tinv = mat(2, 2, {1.0, 0.0, 2.0, 1.0});
  const Matrix AKC = mat(2, 2, {-7.0, 1.0, -10.0, 0.0});
  EXPECT_EQ(T * AKC * Tinv, mat(2, 2, {-5.0, 1.0, 0.0, -2.0}));
  EXPECT_EQ(T * p.b, vec({1.0, 0.0}));
  const MatoReport r = verify_mato_transform(p);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.similarity_deviation, 1e-12);
  EXPECT_LE(r.tb_deviation, 1e-12);
  EXPECT_LE(r.ct_deviation, 1e-12);
  EXPECT_TRUE(r.failures.empty());
}

TEST(Mato, CorruptedFIsReported) {
  RegulatorParams p = make_regulator_params(vec({1.0, 3.0, 2.0}), 2.0, 1.0, 1.0, 1);
  p.F(0, 0) += 1e-6;
  const MatoReport r = verify_mato_transform(p);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.failures.empty());
}

TEST(FeedbackSign, WrongSignFlipsV) {
  const RegulatorParams p = make_regulator_params(vec({1.0, 2.0}), 5.0, 2.0, 1.5, 1);
  const ImmersionData im = canonical_immersion();
  const OutputFeedback good = make_regulator_feedback(p, im, 1.0);
  const OutputFeedback bad = make_regulator_feedback(p, im, -1.0);
  const Vector zeta = Vector::Zero(static_cast<Eigen::Index>(RegulatorState::packed_size(2, 1)));
  EXPECT_DOUBLE_EQ(good.output(zeta, 0.5), -1.0);
  EXPECT_DOUBLE_EQ(bad.output(zeta, 0.5), 1.0);
}
