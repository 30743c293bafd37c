#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "spectral_mcl/sim.hpp"
#include "spectral_mcl/similarity.hpp"
#include "spectral_mcl/spectral_library.hpp"
#include "spectral_mcl/spectral_matcher.hpp"
#include "spectral_mcl/spectrum.hpp"

using namespace spectral_mcl;
using Catch::Approx;

namespace {

Spectrum spec(std::vector<double> v) { return Spectrum(std::move(v)); }

std::vector<double> values(const Spectrum& s) { return {s.intensities().begin(), s.intensities().end()}; }

using fixture::kind_of;

}  // namespace

TEST_CASE("spectrum construction rejects invalid data") {
  CHECK(kind_of([] { Spectrum({1.0}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { Spectrum({1.0, -0.5}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { Spectrum(0.0, 0.0, {1.0, 2.0}); }) == ErrorKind::InvalidArgument);
  const Spectrum d(std::vector<double>(kDefaultBins, 1.0));
  CHECK(d.grid_start() == 200.0);
  CHECK(d.grid_step() == Approx(2800.0 / 511.0));
  CHECK(d.wavenumber(kDefaultBins - 1) == Approx(3000.0));
}

TEST_CASE("grids must match") {
  const Spectrum a(0.0, 1.0, {1, 2, 3});
  const Spectrum b(0.0, 2.0, {1, 2, 3});
  const Spectrum c(0.0, 1.0, {1, 2});
  CHECK(kind_of([&] { dist_wasserstein(a, b); }) == ErrorKind::GridMismatch);
  CHECK(kind_of([&] { dist_slk(a, c, 1); }) == ErrorKind::GridMismatch);
  CHECK(kind_of([&] { dist_sam(a, c); }) == ErrorKind::GridMismatch);
}

TEST_CASE("unit-sum normalization") {
  CHECK(values(normalize_unit_sum(spec({2, 2, 4}))) == std::vector<double>{0.25, 0.25, 0.5});
  CHECK(values(normalize_unit_sum(spec({1, 0, 0}))) == std::vector<double>{1, 0, 0});
  CHECK(kind_of([] { normalize_unit_sum(spec({0, 0, 0})); }) == ErrorKind::ZeroSpectrum);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(37);
    for (double& x : v) x = u(rng);
    CHECK(normalize_unit_sum(spec(v)).sum() == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("min-max normalization") {
  CHECK(values(normalize_minmax(spec({2, 4, 6}))) == std::vector<double>{0, 0.5, 1});
  CHECK(values(normalize_minmax(spec({0, 1}))) == std::vector<double>{0, 1});
  CHECK(kind_of([] { normalize_minmax(spec({5, 5, 5})); }) == ErrorKind::ZeroSpectrum);
}

TEST_CASE("baseline correction") {
  CHECK(values(baseline_correct(spec({3, 3, 3, 3}), 0)) == std::vector<double>{0, 0, 0, 0});
  CHECK(values(baseline_correct(spec({0, 1, 2, 3}), 1)) == std::vector<double>{0, 0, 0, 0});

  // Closed-form straight-line fit by normal equations over bin index.
  const std::vector<double> y{0, 1, 5, 3};
  double mi = 0, my = 0;
  for (int i = 0; i < 4; ++i) {
    mi += i / 4.0;
    my += y[i] / 4.0;
  }
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (i - mi) * (y[i] - my);
    sxx += (i - mi) * (i - mi);
  }
  const double slope = sxy / sxx, icpt = my - slope * mi;
  const auto got = values(baseline_correct(spec(y), 1));
  for (int i = 0; i < 4; ++i) {
    const double r = y[i] - (icpt + slope * i);
    CHECK(got[i] == Approx(std::max(r, 0.0)).margin(1e-12));
  }
  CHECK(got[2] > 0.0);
  CHECK(got[0] == 0.0);
  CHECK(got[1] == 0.0);
  CHECK(got[3] == 0.0);

  CHECK(kind_of([] { baseline_correct(spec({1, 2, 3}), 2); }) == ErrorKind::InvalidOrder);
  CHECK(kind_of([] { baseline_correct(spec({1, 2, 3}), -1); }) == ErrorKind::InvalidOrder);
}

TEST_CASE("sensor noise") {
  const Spectrum s = spec({0.2, 0.5, 1.0, 0.0, 0.3});
  CHECK(apply_sensor_noise(s, NoiseConfig::none()) == s);

  NoiseConfig cfg;
  cfg.rng_seed = 42;
  CHECK(apply_sensor_noise(s, cfg) == apply_sensor_noise(s, cfg));
  NoiseConfig other = cfg;
  other.rng_seed = 43;
  CHECK_FALSE(apply_sensor_noise(s, cfg) == apply_sensor_noise(s, other));
  const Spectrum noisy = apply_sensor_noise(s, cfg);
  for (double v : noisy.intensities()) CHECK(v >= 0.0);

  // Poisson moments: one draw per bin over 1e5 unit-intensity bins.
  NoiseConfig shot{1e4, 0.0, 0.0, 7};
  const Spectrum ones(std::vector<double>(100000, 1.0));
  const auto m = oracle::moments(values(apply_sensor_noise(ones, shot)));
  CHECK(std::abs(m.mean - 1.0) < 3.0 * (1e-2 / std::sqrt(1e5)));
  CHECK(m.variance == Approx(1.0 / shot.shot_scale).epsilon(0.02));

  CHECK(kind_of([] { NoiseConfig{-1.0, 0.0, 0.0, 0}.validate(); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("SLK distance") {
  const Spectrum a = spec({0, 1, 0}), z = spec({0, 0, 0});
  CHECK(dist_slk(a, a, 1) == 0.0);
  const std::vector<double> av{0, 1, 0}, zv{0, 0, 0};
  CHECK(dist_slk(a, z, 1) == Approx(oracle::slk_kernel(av, av, 1)).margin(1e-12));
  CHECK(dist_slk(a, z, 1) == Approx(5.0).margin(1e-12));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(16), y(16);
    for (double& v : x) v = u(rng);
    for (double& v : y) v = u(rng);
    const Spectrum sx = normalize_minmax(spec(x)), sy = normalize_minmax(spec(y));
    const double expect = oracle::slk_distance(values(sx), values(sy), 2);
    CHECK(dist_slk(sx, sy, 2) == Approx(expect).margin(1e-12));
    CHECK(dist_slk(sx, sy, 2) == Approx(dist_slk(sy, sx, 2)).margin(1e-12));
  }
  CHECK(kind_of([&] { dist_slk(a, a, 0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("modified L2 distance") {
  const Spectrum a = spec({0.6, 0.4, 0.0}), b = spec({0.4, 0.4, 0.2});
  CHECK(dist_mod_l2(a, a) == 0.0);
  // z0 > x0 with x0 != 0: 0.04 / 1.5; z1 = x1: 0; z2 < x2: 0.04.
  CHECK(dist_mod_l2(a, b) == Approx(std::sqrt(0.04 / 1.5 + 0.04)).margin(1e-15));
  CHECK(dist_mod_l2(a, b) == Approx(oracle::mod_l2(values(a), values(b))).margin(1e-15));

  const Spectrum c = spec({0.3, 0.3, 0.4}), d = spec({0.3, 0.4, 0.3});
  CHECK(dist_mod_l2(c, d) == Approx(oracle::mod_l2(values(c), values(d))).margin(1e-15));

  CHECK(kind_of([] { dist_mod_l2(spec({1, 0}), spec({0.5, 0.5})); }) == ErrorKind::DegenerateWeight);
  CHECK(kind_of([] { dist_mod_l2(spec({0, 0}), spec({0.5, 0.5})); }) == ErrorKind::DegenerateWeight);

  // Directional: asymmetry is allowed, so only the oracle is compared.
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto z = oracle::random_unit_sum(9, rng, 0.3);
    const auto x = oracle::random_unit_sum(9, rng, 0.3);
    if (*std::max_element(z.begin(), z.end()) >= 1.0) continue;
    CHECK(dist_mod_l2(spec(z), spec(x)) == Approx(oracle::mod_l2(z, x)).margin(1e-12));
  }
}

TEST_CASE("Wasserstein distance") {
  CHECK(dist_wasserstein(spec({1, 0, 0}), spec({0, 0, 1})) == Approx(2.0));
  const Spectrum a = spec({0.2, 0.3, 0.5});
  CHECK(dist_wasserstein(a, a) == 0.0);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 1000; ++t) {
    const auto p = oracle::random_unit_sum(8, rng, 0.2);
    const auto q = oracle::random_unit_sum(8, rng, 0.2);
    const auto r = oracle::random_unit_sum(8, rng, 0.2);
    const double pq = dist_wasserstein(spec(p), spec(q));
    CHECK(pq == Approx(oracle::transport_plan_emd(p, q)).margin(1e-9));
    CHECK(pq == Approx(dist_wasserstein(spec(q), spec(p))).margin(1e-12));
    CHECK(pq <= dist_wasserstein(spec(p), spec(r)) + dist_wasserstein(spec(r), spec(q)) + 1e-12);
  }
}

TEST_CASE("KL divergence") {
  const Spectrum a = spec({0.5, 0.5});
  CHECK(dist_kl(a, a) == Approx(0.0).margin(1e-6));
  const double expect = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  CHECK(dist_kl(a, spec({0.25, 0.75})) == Approx(expect).margin(1e-6));
  CHECK(dist_kl(a, spec({0.25, 0.75})) == Approx(oracle::kl({0.5, 0.5}, {0.25, 0.75})).margin(1e-9));
  const double far = dist_kl(spec({1, 0}), spec({0, 1}));
  CHECK(std::isfinite(far));
  CHECK(far > 10.0);
  std::mt19937_64 rng(13);
  for (int t = 0; t < 200; ++t) {
    const auto p = oracle::random_unit_sum(12, rng, 0.3);
    const auto q = oracle::random_unit_sum(12, rng, 0.3);
    CHECK(dist_kl(spec(p), spec(q)) == Approx(oracle::kl(p, q)).margin(1e-9));
  }
}

TEST_CASE("spectral angle") {
  const Spectrum a = spec({0.3, 0.7, 0.1});
  CHECK(dist_sam(a, a) == 0.0);
  CHECK(dist_sam(spec({1, 0}), spec({0, 1})) == Approx(std::numbers::pi / 2).margin(1e-12));
  CHECK(dist_sam(spec({1, 1}), spec({1, 0})) == Approx(std::numbers::pi / 4).margin(1e-12));
  CHECK(kind_of([] { dist_sam(spec({0, 0}), spec({0, 1})); }) == ErrorKind::ZeroSpectrum);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0), c(1e-6, 10.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> x(6), y(6);
    for (double& v : x) v = u(rng);
    for (double& v : y) v = u(rng);
    const double k = c(rng);
    std::vector<double> kx = x;
    for (double& v : kx) v *= k;
    CHECK(std::abs(dist_sam(spec(kx), spec(y)) - dist_sam(spec(x), spec(y))) < 1e-9);
    CHECK(dist_sam(spec(x), spec(y)) == Approx(dist_sam(spec(y), spec(x))).margin(1e-12));
  }
}

TEST_CASE("identity and non-negativity over all metrics") {
  const SpectralLibrary lib = synthetic_library(6, 21);
  for (MetricKind k : kAllMetrics) {
    SimilarityMetric m;
    m.kind = k;
    for (std::size_t i = 0; i < lib.size(); ++i) {
      const Spectrum pi = prepare_for_metric(k, lib[i]);
      CHECK(spectral_distance(m, pi, pi) == Approx(0.0).margin(1e-6));
      for (std::size_t j = 0; j < lib.size(); ++j) {
        CHECK(spectral_distance(m, pi, prepare_for_metric(k, lib[j])) >= -1e-9);
      }
    }
  }
}

TEST_CASE("metric names round-trip") {
  for (MetricKind k : kAllMetrics) CHECK(parse_metric(to_string(k)) == k);
  CHECK(kind_of([] { parse_metric("cosine"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("distance to likelihood") {
  CHECK(distance_to_likelihood(0.0, 3.0) == 1.0);
  CHECK(distance_to_likelihood(std::sqrt(2.5), 2.5) == Approx(std::exp(-1.0)).margin(1e-12));
  CHECK(distance_to_likelihood(2.0, 1.0) == Approx(std::exp(-4.0)).margin(1e-15));
  double prev = 2.0;
  for (double d = 0.0; d < 5.0; d += 0.1) {
    const double l = distance_to_likelihood(d, 1.7);
    CHECK(l < prev);
    CHECK(l > 0.0);
    prev = l;
  }
  CHECK(kind_of([] { distance_to_likelihood(1.0, 0.0); }) == ErrorKind::InvalidScale);
  CHECK(kind_of([] { distance_to_likelihood(1.0, -1.0); }) == ErrorKind::InvalidScale);
}

TEST_CASE("scale calibration") {
  SimilarityMetric w;
  w.kind = MetricKind::Wasserstein;
  const std::vector<Spectrum> pair{spec({1, 0, 0}), spec({0, 0, 1})};
  CHECK(calibrate_scale(pair, w) == Approx(4.0 / std::numbers::ln2).margin(1e-12));
  CHECK(kind_of([&] { calibrate_scale(std::vector<Spectrum>{pair[0]}, w); }) == ErrorKind::InsufficientLibrary);
  CHECK(kind_of([&] { calibrate_scale(std::vector<Spectrum>{pair[0], pair[0]}, w); }) ==
        ErrorKind::InsufficientLibrary);

  const SpectralLibrary lib = synthetic_library(5, 4);
  for (MetricKind k : kAllMetrics) {
    const SpectralMatcher matcher(lib, k);
    std::vector<double> ds;
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        if (i != j) ds.push_back(spectral_distance(matcher.metric(), matcher.prepared(i), matcher.prepared(j)));
      }
    }
    std::sort(ds.begin(), ds.end());
    const double median = 0.5 * (ds[9] + ds[10]);
    CHECK(matcher.scale() == Approx(median * median / std::log(2.0)).epsilon(1e-12));
    CHECK(distance_to_likelihood(median, matcher.scale()) == Approx(0.5).margin(1e-12));
    CHECK(matcher.library_distance(1, 3) == spectral_distance(matcher.metric(), matcher.prepared(1), matcher.prepared(3)));
  }
}

TEST_CASE("nearest-spectrum identification under default noise") {
  const SpectralLibrary lib = synthetic_library(5, 1);
  for (MetricKind k : kAllMetrics) {
    const SpectralMatcher matcher(lib, k);
    int correct = 0;
    for (int t = 0; t < 1000; ++t) {
      const std::size_t truth = static_cast<std::size_t>(t % 5);
      NoiseConfig cfg;
      cfg.rng_seed = mix_seed(99, static_cast<std::uint64_t>(t));
      const Spectrum noisy = apply_sensor_noise(lib[truth], cfg);
      correct += matcher.nearest(matcher.prepare(noisy)) == truth;
    }
    INFO(to_string(k) << " correct " << correct);
    CHECK(correct >= 950);
  }
}

TEST_CASE("library file round-trip") {
  const SpectralLibrary lib = synthetic_library(3, 8);
  std::stringstream ss;
  write_library(ss, lib);
  CHECK(read_library(ss) == lib);

  std::istringstream bad_ids("0 1 2\n1,a,0,1\n");
  CHECK(kind_of([&] { read_library(bad_ids); }) == ErrorKind::ParseError);
  std::istringstream short_row("0 1 3\n0,a,0,1\n");
  CHECK(kind_of([&] { read_library(short_row); }) == ErrorKind::ParseError);
  std::istringstream empty("");
  CHECK(kind_of([&] { read_library(empty); }) == ErrorKind::ParseError);

  SpectralLibrary mixed;
  mixed.add("a", Spectrum(0.0, 1.0, {1, 2}));
  CHECK(kind_of([&] { mixed.add("b", Spectrum(0.0, 2.0, {1, 2})); }) == ErrorKind::GridMismatch);
  CHECK(kind_of([&] { mixed.add("c,d", Spectrum(0.0, 1.0, {1, 2})); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("seed mixing is deterministic and spreads") {
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CHECK(mix_seed(0, 0) != mix_seed(0, 1));
}
