#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "resonant/level.hpp"
#include "support/signals.hpp"

using namespace resonant;

TEST_CASE("follower window covers one period of the lowest frequency") {
  CHECK(AmplitudeFollower(44100.0).window_len() == 340);
  CHECK(AmplitudeFollower(48000.0).window_len() == 370);
  CHECK(AmplitudeFollower(44100.0, 441.0).window_len() == 100);

  std::mt19937 rng(1);
  std::uniform_real_distribution<double> fs(8000.0, 192000.0), low(20.0, 1000.0);
  for (int i = 0; i < 500; ++i) {
    const double rate = fs(rng), lowest = low(rng);
    const AmplitudeFollower f(rate, lowest);
    CHECK(static_cast<double>(f.window_len()) * lowest >= rate);
  }
}

TEST_CASE("follower reports once per block, above 130 per second") {
  const AmplitudeFollower f(44100.0);
  CHECK(f.reports_per_second(256) >= 130.0);
  CHECK(f.reports_per_second(256) == doctest::Approx(172.265625));
}

TEST_CASE("follower level of silence is zero") {
  AmplitudeFollower f(44100.0);
  const std::vector<double> zeros(2048, 0.0);
  CHECK(f.follow(zeros) == 0.0);
}

TEST_CASE("follower level of a full-scale sinusoid is 1/sqrt(2)") {
  // Window of exactly one period: fs = 130 · 340.
  const double fs = 130.0 * 340.0;
  AmplitudeFollower f(fs);
  REQUIRE(f.window_len() == 340);
  const auto x = testsig::sine(130.0, fs, 4 * 340 + 17);
  CHECK(f.follow(x) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.01));

  AmplitudeFollower g(44100.0);
  const auto y = testsig::sine(130.0, 44100.0, 44100, 0.5);
  CHECK(g.follow(y) == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("follower level never goes negative") {
  AmplitudeFollower f(44100.0);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int block = 0; block < 200; ++block) {
    std::vector<double> x(256);
    const double scale = block % 20 < 10 ? 1e-8 : 1.0;
    for (auto& v : x) v = scale * u(rng);
    CHECK(f.follow(x) >= 0.0);
  }
  const std::vector<double> zeros(340, 0.0);
  CHECK(f.follow(zeros) == 0.0);
}

TEST_CASE("normalizer steady state and floor") {
  const Normalizer n;
  CHECK(n.target_gain(0.3, 0.3) == 1.0);
  CHECK(n.target_gain(0.5, 0.0) == doctest::Approx(0.5 / 1e-6));
  CHECK(std::isfinite(n.target_gain(0.5, 0.0)));

  Normalizer m;
  double g = 0.0;
  for (int i = 0; i < 1000; ++i) g = m.normalize(0.2, 0.2, 256.0 / 44100.0);
  CHECK(g == doctest::Approx(1.0));
}

TEST_CASE("normalizer step settles within 5% after three time constants") {
  const double tau = 0.010, dt = 64.0 / 44100.0;
  Normalizer n(tau);
  for (int i = 0; i < 2000; ++i) n.normalize(0.4, 0.2, dt);
  const double prior = n.gain();
  CHECK(prior == doctest::Approx(2.0));

  double elapsed = 0.0;
  while (elapsed < 3.0 * tau) {
    n.normalize(0.4, 0.4, dt);
    elapsed += dt;
  }
  CHECK(std::abs(n.gain() - 0.5 * prior) <= 0.05 * 0.5 * prior);
  CHECK(n.gain() > 0.5 * prior);
}

TEST_CASE("normalizer gain change per update is bounded by the smoothing") {
  const double tau = 0.010;
  Normalizer n(tau);
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> lvl(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double dt = 256.0 / 44100.0;
    const double before = n.gain();
    const double in = lvl(rng), out = lvl(rng);
    const double target = n.target_gain(in, out);
    const double after = n.normalize(in, out, dt);
    const double alpha = 1.0 - std::exp(-dt / tau);
    CHECK(std::abs(after - before) <= alpha * std::abs(target - before) * (1.0 + 1e-12) + 1e-300);
  }
}

TEST_CASE("normalizer never emits NaN or Inf for finite non-negative levels") {
  Normalizer n;
  const double values[] = {0.0, 1e-300, 1e-12, 1e-6, 0.5, 1.0, 1e6, std::numeric_limits<double>::max() / 1e7};
  for (double in : values) {
    for (double out : values) {
      const double g = n.normalize(in, out, 0.005);
      CHECK(std::isfinite(g));
      CHECK(g >= 0.0);
    }
  }
}

TEST_CASE("noise injection is additive and level-scaled") {
  NoiseSource noise(1);
  std::vector<double> block(512, 0.25);
  inject_noise(block, 0.5, 0.0, noise);
  for (double v : block) CHECK(v == 0.25);
  inject_noise(block, 0.0, 0.1, noise);
  for (double v : block) CHECK(v == 0.25);

  std::vector<double> zeros(1 << 18, 0.0);
  inject_noise(zeros, 0.5, 0.1, noise);
  // 0.1 · 0.5 / sqrt(3), evaluated in Python.
  CHECK(testsig::rms(zeros) == doctest::Approx(0.02886751345948129).epsilon(0.05));
  CHECK(testsig::peak(zeros) <= 0.05);
}

TEST_CASE("noise samples stay strictly inside (-1, 1)") {
  NoiseSource noise(123);
  double lo = 1.0, hi = -1.0, sum = 0.0;
  const int n = 1 << 20;
  for (int i = 0; i < n; ++i) {
    const double u = noise.next();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > -1.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(sum / n) < 0.01);
}

TEST_CASE("identical seed gives bit-identical noise") {
  std::vector<double> a(4096, 0.1), b(4096, 0.1), c(4096, 0.1);
  NoiseSource na(42), nb(42), nc(43);
  inject_noise(a, 0.7, 0.1, na);
  inject_noise(b, 0.7, 0.1, nb);
  inject_noise(c, 0.7, 0.1, nc);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("clamp_bandwidths shortens narrow resonances only") {
  const auto model = parse_model("200 1 10\n400 1 0.1\n800 1 0.5");
  const auto result = clamp_bandwidths(model, 5.0);
  CHECK(result.clamped == 2);
  // ln(1000)/(5·pi), evaluated in Python.
  CHECK(result.model.authored()[0].decay_t60 == doctest::Approx(0.43976135932765664).epsilon(1e-12));
  CHECK(result.model.authored()[1].decay_t60 == 0.1);
  CHECK(result.model.authored()[2].decay_t60 == doctest::Approx(0.43976135932765664).epsilon(1e-12));
  for (const auto& r : result.model.authored()) CHECK(r.bandwidth() >= 5.0 * (1.0 - 1e-12));

  const auto wide = parse_model("200 1 0.1\n400 0.5 0.2");
  const auto same = clamp_bandwidths(wide, 5.0);
  CHECK(same.clamped == 0);
  CHECK(same.model.parameter_vector() == wide.parameter_vector());

  const auto tiny = clamp_bandwidths(model, 1e-9);
  CHECK(tiny.clamped == 0);
  CHECK(tiny.model.parameter_vector() == model.parameter_vector());
  CHECK_THROWS_AS(clamp_bandwidths(model, 0.0), std::invalid_argument);
}

TEST_CASE("in-place clamp on a parameter vector") {
  std::vector<double> params{1.0, 200.0, 10.0, 1.0, 400.0, 0.1};
  CHECK(clamp_bandwidths(params, 5.0) == 1);
  CHECK(params[2] == doctest::Approx(0.43976135932765664).epsilon(1e-12));
  CHECK(params[5] == 0.1);
  std::vector<double> bad(4, 1.0);
  CHECK_THROWS_AS(clamp_bandwidths(bad, 5.0), std::invalid_argument);
}
