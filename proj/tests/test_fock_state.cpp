// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "lnchip/fock_state.hpp"
#include "support/fock_oracle.hpp"
#include "support/random_states.hpp"

using lnchip::fock::apply_mode_transform;
using lnchip::fock::apply_phase;
using lnchip::fock::beamsplitter;
using lnchip::fock::Complex;
using lnchip::fock::FockPattern;
using lnchip::fock::ModeTransform;
using lnchip::fock::pattern;
using lnchip::fock::pattern_probability;
using lnchip::fock::StateVector;
using lnchip::fock::Term;
using lnchip::testing::brute_force_transform;
using lnchip::testing::max_amplitude_deviation;

namespace {
constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

StateVector two_photon_superposition(Complex a20, Complex a02, Complex a11 = {0.0, 0.0}) {
  std::vector<Term> terms{{pattern({2, 0}), a20}, {pattern({0, 2}), a02}};
  if (a11 != Complex{0.0, 0.0}) terms.push_back({pattern({1, 1}), a11});
  return StateVector(2, std::move(terms));
}
}  // namespace

TEST_CASE("identity transform leaves any state untouched") {
  std::mt19937_64 rng(11);
  for (int modes = 2; modes <= 4; ++modes) {
    const StateVector s = lnchip::testing::random_state(modes, 4, rng);
    const StateVector t = apply_mode_transform(s, ModeTransform::identity(modes));
    CHECK(max_amplitude_deviation(s, t) < 1e-14);
    CHECK(t.success_probability() == s.success_probability());
  }
}

TEST_CASE("50:50 coupler bunches |1,1> into (i/sqrt2)(|2,0>+|0,2>)") {
  const StateVector out = apply_mode_transform(StateVector::basis_state(pattern({1, 1})),
                                               beamsplitter(0.5));
  CHECK(std::abs(out.amplitude(pattern({2, 0})) - Complex{0.0, kInvSqrt2}) < 1e-14);
  CHECK(std::abs(out.amplitude(pattern({0, 2})) - Complex{0.0, kInvSqrt2}) < 1e-14);
  CHECK(pattern_probability(out, pattern({1, 1})) < 1e-28);
}

TEST_CASE("50:50 coupler separates (|2,0>+|0,2>)/sqrt2 into |1,1>") {
  const StateVector in = two_photon_superposition({kInvSqrt2, 0.0}, {kInvSqrt2, 0.0});
  const StateVector out = apply_mode_transform(in, beamsplitter(0.5));
  // i|1,1> up to numerical dust; the global phase carries no physics.
  CHECK(pattern_probability(out, pattern({1, 1})) == Catch::Approx(1.0).margin(1e-14));
  CHECK(std::abs(out.amplitude(pattern({1, 1})) - Complex{0.0, 1.0}) < 1e-14);
}

TEST_CASE("phase on one mode multiplies amplitudes by e^{i n phi}") {
  const StateVector s = two_photon_superposition({0.6, 0.0}, {0.0, 0.8});

  SECTION("zero phase is the identity") {
    CHECK(max_amplitude_deviation(s, apply_phase(s, 0, 0.0)) == 0.0);
  }
  SECTION("a two-photon component picks up twice the phase") {
    const double phi = 0.37;
    const StateVector t = apply_phase(s, 0, phi);
    const Complex expected = Complex{0.6, 0.0} * std::exp(Complex{0.0, 2.0 * phi});
    CHECK(std::abs(t.amplitude(pattern({2, 0})) - expected) < 1e-14);
    CHECK(std::abs(t.amplitude(pattern({0, 2})) - s.amplitude(pattern({0, 2}))) < 1e-14);
  }
  SECTION("2 pi is the identity to 1e-12") {
    const StateVector t = apply_phase(s, 1, 2.0 * std::numbers::pi);
    CHECK(max_amplitude_deviation(s, t) < 1e-12);
  }
  SECTION("invalid mode index throws") {
    CHECK_THROWS_AS(apply_phase(s, 2, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(apply_phase(s, -1, 0.1), std::invalid_argument);
  }
}

TEST_CASE("pattern probabilities are Born-rule moduli") {
  CHECK(pattern_probability(StateVector::basis_state(pattern({1, 1})), pattern({1, 1})) == 1.0);
  const StateVector s = two_photon_superposition({kInvSqrt2, 0.0}, {-kInvSqrt2, 0.0});
  CHECK(pattern_probability(s, pattern({2, 0})) == Catch::Approx(0.5).margin(1e-15));
  CHECK(pattern_probability(s, pattern({1, 1})) == 0.0);
  CHECK_THROWS_AS(pattern_probability(s, pattern({1, 1, 0})), std::invalid_argument);
}

TEST_CASE("interferometer output at half phase splits evenly") {
  // (|2,0> + e^{i pi/2}|0,2>)/sqrt2 through the 50:50 coupler.
  const Complex phase = std::exp(Complex{0.0, std::numbers::pi / 2.0});
  const StateVector in = two_photon_superposition({kInvSqrt2, 0.0}, phase * kInvSqrt2);
  const StateVector out = apply_mode_transform(in, beamsplitter(0.5));
  CHECK(pattern_probability(out, pattern({1, 1})) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("unitarity, composition and photon conservation", "[property]") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int modes = 2 + static_cast<int>(rng() % 3);
    const StateVector s = lnchip::testing::random_state(modes, 4, rng);
    const auto u1 = ModeTransform::unitary(lnchip::testing::random_unitary(modes, rng));
    const auto u2 = ModeTransform::unitary(lnchip::testing::random_unitary(modes, rng));

    const StateVector t1 = apply_mode_transform(s, u1);
    double norm_sq = 0.0;
    for (const auto& term : t1.terms()) norm_sq += std::norm(term.amplitude);
    CHECK(std::abs(norm_sq - 1.0) < 1e-12);
    CHECK(t1.success_probability() == s.success_probability());

    const StateVector chained = apply_mode_transform(t1, u2);
    const StateVector composed =
        apply_mode_transform(s, ModeTransform::unitary(u2.matrix * u1.matrix));
    CHECK(max_amplitude_deviation(chained, composed) < 1e-10);

    for (const auto& term : t1.terms()) {
      bool found = false;
      for (const auto& in_term : s.terms()) {
        if (in_term.pattern.total() == term.pattern.total()) found = true;
      }
      CHECK(found);
    }
  }
}

TEST_CASE("global phase never reaches probabilities", "[property]") {
  std::mt19937_64 rng(7);
  const StateVector s = lnchip::testing::random_state(3, 3, rng);
  std::vector<Term> rotated = s.terms();
  const Complex phase = std::exp(Complex{0.0, 1.234});
  for (auto& t : rotated) t.amplitude *= phase;
  const StateVector s2(3, std::move(rotated), s.success_probability());
  const auto u = ModeTransform::unitary(lnchip::testing::random_unitary(3, rng));
  const StateVector t1 = apply_mode_transform(s, u);
  const StateVector t2 = apply_mode_transform(s2, u);
  for (const auto& term : t1.terms()) {
    CHECK(pattern_probability(t2, term.pattern) ==
          Catch::Approx(pattern_probability(t1, term.pattern)).margin(1e-12));
  }
}

TEST_CASE("oracle agreement on randomized instances", "[oracle]") {
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int modes = 2 + static_cast<int>(rng() % 3);
    const StateVector s = lnchip::testing::random_state(modes, 4, rng);
    const auto u = ModeTransform::unitary(lnchip::testing::random_unitary(modes, rng));
    worst = std::max(worst, max_amplitude_deviation(apply_mode_transform(s, u),
                                                    brute_force_transform(s, u)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("oracle sanity: identity and inverse round trip", "[oracle]") {
  std::mt19937_64 rng(5);
  const StateVector s = lnchip::testing::random_state(3, 4, rng);
  CHECK(max_amplitude_deviation(s, brute_force_transform(s, ModeTransform::identity(3))) < 1e-12);

  const Eigen::MatrixXcd u = lnchip::testing::random_unitary(3, rng);
  const StateVector forward = apply_mode_transform(s, ModeTransform::unitary(u));
  const StateVector back = apply_mode_transform(forward, ModeTransform::unitary(u.adjoint()));
  CHECK(max_amplitude_deviation(s, back) < 1e-10);
}

TEST_CASE("diagonal loss equals vacuum-ancilla loss after post-selection") {
  // One lossy mode, checked against a beamsplitter coupling to an empty
  // ancilla followed by projecting the ancilla on vacuum.
  const double eta = 0.37;
  const StateVector in(1, {Term{pattern({1}), {0.8, 0.0}}, Term{pattern({2}), {0.0, 0.6}}});

  const StateVector lossy = apply_mode_transform(in, lnchip::fock::mode_loss({eta}));

  const double t = std::sqrt(eta), r = std::sqrt(1.0 - eta);
  Eigen::MatrixXcd bs(2, 2);
  bs << Complex{t, 0.0}, Complex{-r, 0.0}, Complex{r, 0.0}, Complex{t, 0.0};
  const StateVector embedded(
      2, {Term{pattern({1, 0}), {0.8, 0.0}}, Term{pattern({2, 0}), {0.0, 0.6}}});
  const StateVector coupled = apply_mode_transform(embedded, ModeTransform::unitary(bs));

  // Project on ancilla vacuum by collecting the |n,0> amplitudes.
  double kept_norm_sq = 0.0;
  for (int n = 1; n <= 2; ++n) {
    kept_norm_sq += std::norm(coupled.amplitude(FockPattern{{n, 0}}));
  }
  CHECK(lossy.success_probability() == Catch::Approx(kept_norm_sq).margin(1e-12));
  for (int n = 1; n <= 2; ++n) {
    const Complex projected =
        coupled.amplitude(FockPattern{{n, 0}}) / std::sqrt(kept_norm_sq);
    CHECK(std::abs(lossy.amplitude(FockPattern{{n}}) - projected) < 1e-12);
  }
}

TEST_CASE("loss bookkeeping composes multiplicatively") {
  const StateVector in = StateVector::basis_state(pattern({1, 1}));
  const StateVector once = apply_mode_transform(in, lnchip::fock::uniform_loss(2, 0.9));
  const StateVector twice = apply_mode_transform(once, lnchip::fock::uniform_loss(2, 0.5));
  CHECK(once.success_probability() == Catch::Approx(0.81).margin(1e-12));
  CHECK(twice.success_probability() == Catch::Approx(0.81 * 0.25).margin(1e-12));
  CHECK(pattern_probability(twice, pattern({1, 1})) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("construction and transform guardrails") {
  CHECK_THROWS_AS(StateVector(2, {Term{pattern({3, 2}), {1.0, 0.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(StateVector(2, {Term{pattern({1}), {1.0, 0.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(StateVector(2, {Term{pattern({1, -1}), {1.0, 0.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(StateVector(2, {Term{pattern({1, 0}), {0.0, 0.0}}}), std::invalid_argument);

  const StateVector s = StateVector::basis_state(pattern({1, 1}));
  CHECK_THROWS_AS(apply_mode_transform(s, ModeTransform::identity(3)), std::invalid_argument);
  Eigen::MatrixXcd not_unitary = Eigen::MatrixXcd::Identity(2, 2) * 1.5;
  CHECK_THROWS_AS(ModeTransform::unitary(not_unitary), std::invalid_argument);
  CHECK_THROWS_AS(ModeTransform::subunitary(not_unitary), std::invalid_argument);
  CHECK_THROWS_AS(apply_mode_transform(s, lnchip::fock::uniform_loss(2, 0.0)), std::domain_error);
}

TEST_CASE("duplicate patterns merge on construction") {
  const StateVector s(2, {Term{pattern({1, 0}), {0.5, 0.0}}, Term{pattern({1, 0}), {0.5, 0.0}},
                          Term{pattern({0, 1}), {1.0, 0.0}}});
  CHECK(s.terms().size() == 2);
  CHECK(pattern_probability(s, pattern({1, 0})) == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("serialization round trip and stable term order") {
  const StateVector s = two_photon_superposition({0.6, 0.1}, {-0.2, 0.7}, {0.3, 0.0});
  const nlohmann::json j = lnchip::fock::to_json(s);
  CHECK(j.at("modes") == 2);
  CHECK(j.at("terms").size() == 3);
  // lexicographic basis order: (0,2) < (1,1) < (2,0)
  CHECK(j.at("terms")[0].at("occ") == std::vector<int>{0, 2});
  CHECK(j.at("terms")[2].at("occ") == std::vector<int>{2, 0});
  const StateVector back = lnchip::fock::state_from_json(j);
  CHECK(max_amplitude_deviation(s, back) < 1e-15);
  CHECK(back.success_probability() == s.success_probability());
  CHECK(lnchip::fock::to_json(back).dump() == j.dump());
}
