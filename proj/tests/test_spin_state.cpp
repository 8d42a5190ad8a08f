#include <doctest.h>

#include <array>
#include <cmath>

#include "spin_state.hpp"

using namespace ddtwa;

namespace {

bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("down-state sampler hits the four configurations with weight 1/4") {
  const RandomStream rng(4242, 0);
  std::array<int, 4> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const BlochVector s = sample_down_configuration(rng, 0, static_cast<std::uint32_t>(i));
    CHECK(s.z == -1.0);
    CHECK(std::abs(s.x) == 1.0);
    CHECK(std::abs(s.y) == 1.0);
    CHECK(s.norm2() == 3.0);
    const int idx = (s.x > 0 ? 1 : 0) + (s.y > 0 ? 2 : 0);
    ++counts[idx];
  }
  // each configuration has probability 1/4; allow 5 sigma of binomial noise
  const double sigma = std::sqrt(0.25 * 0.75 * n);
  for (int c : counts) {
    CHECK(std::abs(c - 0.25 * n) < 5.0 * sigma);
  }
}

TEST_CASE("rotation_to_direction special angles") {
  SUBCASE("target -z is the identity") {
    const Rotation3 r = rotation_to_direction(M_PI, 0.0);
    const BlochVector v = r.apply({0.3, -0.7, 0.9});
    CHECK(close(v.x, 0.3));
    CHECK(close(v.y, -0.7));
    CHECK(close(v.z, 0.9));
  }
  SUBCASE("antipodal target +z rotates by pi about x") {
    const Rotation3 r = rotation_to_direction(0.0, 0.0);
    const BlochVector v = r.apply({0.0, 0.0, -1.0});
    CHECK(close(v.x, 0.0));
    CHECK(close(v.y, 0.0));
    CHECK(close(v.z, 1.0));
    const BlochVector w = r.apply({1.0, 1.0, 0.0});
    CHECK(close(w.x, 1.0));
    CHECK(close(w.y, -1.0));
  }
  SUBCASE("equatorial target +x") {
    const Rotation3 r = rotation_to_direction(M_PI / 2.0, 0.0);
    const BlochVector v = r.apply({0.0, 0.0, -1.0});
    CHECK(close(v.x, 1.0));
    CHECK(close(v.y, 0.0));
    CHECK(close(v.z, 0.0));
  }
}

TEST_CASE("rotations are proper and map -z to the target direction") {
  const RandomStream rng(99, 1);
  for (std::uint32_t k = 0; k < 200; ++k) {
    const auto u = rng.uniform_pair(StreamPurpose::spin_init, 7, k);
    const double theta = u[0] * M_PI;
    const double phi = u[1] * 2.0 * M_PI;
    const Rotation3 r = rotation_to_direction(theta, phi);

    // R (0,0,-1) = n
    const BlochVector n = r.apply({0.0, 0.0, -1.0});
    CHECK(close(n.x, std::sin(theta) * std::cos(phi), 1e-12));
    CHECK(close(n.y, std::sin(theta) * std::sin(phi), 1e-12));
    CHECK(close(n.z, std::cos(theta), 1e-12));

    // orthogonality: columns have unit norm and vanishing dot products
    const BlochVector cx = r.apply({1, 0, 0});
    const BlochVector cy = r.apply({0, 1, 0});
    const BlochVector cz = r.apply({0, 0, 1});
    CHECK(close(cx.norm2(), 1.0, 1e-12));
    CHECK(close(cy.norm2(), 1.0, 1e-12));
    CHECK(close(cz.norm2(), 1.0, 1e-12));
    CHECK(close(cx.x * cy.x + cx.y * cy.y + cx.z * cy.z, 0.0, 1e-12));
    CHECK(close(cx.x * cz.x + cx.y * cz.y + cx.z * cz.z, 0.0, 1e-12));
    // det = +1 (proper rotation)
    const double det = cx.x * (cy.y * cz.z - cy.z * cz.y) - cy.x * (cx.y * cz.z - cx.z * cz.y) +
                       cz.x * (cx.y * cy.z - cx.z * cy.y);
    CHECK(close(det, 1.0, 1e-12));
  }
}

TEST_CASE("sampled ensembles keep |s|^2 = 3 exactly and average to the target") {
  const std::size_t n = 2000;
  const auto spec = ProductStateSpec::uniform(M_PI / 2.0, 0.0, n);  // +x
  double mean_x = 0.0;
  const int n_t = 200;
  for (int t = 0; t < n_t; ++t) {
    const RandomStream rng(31337, static_cast<std::uint32_t>(t));
    const SpinEnsembleState state = sample_initial_ensemble(spec, n, rng);
    REQUIRE(state.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(close(state.spin(i).norm2(), 3.0, 1e-12));
    }
    for (std::size_t i = 0; i < n; ++i) mean_x += state.sx[i];
  }
  mean_x /= static_cast<double>(n) * n_t;
  // transverse components are +-1 per sample; stderr = sqrt(2)/sqrt(samples)
  CHECK(std::abs(mean_x - 1.0) < 5.0 * std::sqrt(2.0 / (n * n_t)));
}

TEST_CASE("all-down ensembles only produce the four discrete configurations") {
  const std::size_t n = 64;
  const auto spec = ProductStateSpec::uniform(M_PI, 0.0, n);
  const RandomStream rng(1, 0);
  const SpinEnsembleState state = sample_initial_ensemble(spec, n, rng);
  for (std::size_t i = 0; i < n; ++i) {
    const BlochVector s = state.spin(i);
    CHECK(close(std::abs(s.x), 1.0));
    CHECK(close(std::abs(s.y), 1.0));
    CHECK(close(s.z, -1.0));
  }
}

TEST_CASE("cavity Wigner sampling has quadrature variance 1/4") {
  const std::complex<double> alpha0{0.0, 0.0};
  const int n = 200000;
  double mean_re = 0, mean_im = 0, var_re = 0, var_im = 0, cov = 0, abs2 = 0;
  for (int t = 0; t < n; ++t) {
    const RandomStream rng(777, static_cast<std::uint32_t>(t));
    const auto a = sample_cavity_initial(alpha0, rng);
    mean_re += a.real();
    mean_im += a.imag();
    var_re += a.real() * a.real();
    var_im += a.imag() * a.imag();
    cov += a.real() * a.imag();
    abs2 += std::norm(a);
  }
  mean_re /= n;
  mean_im /= n;
  var_re /= n;
  var_im /= n;
  cov /= n;
  abs2 /= n;
  const double se_mean = 0.5 / std::sqrt(static_cast<double>(n));
  const double se_var = std::sqrt(2.0) * 0.25 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(mean_re) < 5 * se_mean);
  CHECK(std::abs(mean_im) < 5 * se_mean);
  // second moment of W(alpha) = (2/pi) exp(-2|alpha|^2): each quadrature ~ N(0, 1/4)
  CHECK(std::abs(var_re - 0.25) < 5 * se_var);
  CHECK(std::abs(var_im - 0.25) < 5 * se_var);
  CHECK(std::abs(cov) < 5 * 0.25 / std::sqrt(static_cast<double>(n)));
  // <|alpha|^2> = 1/2, the symmetric-ordered vacuum moment
  CHECK(std::abs(abs2 - 0.5) < 5 * std::sqrt(0.25 / n));
}

TEST_CASE("coherent offset shifts the sampled mean") {
  const std::complex<double> alpha0{1.5, -0.75};
  const int n = 50000;
  std::complex<double> mean{0.0, 0.0};
  for (int t = 0; t < n; ++t) {
    const RandomStream rng(778, static_cast<std::uint32_t>(t));
    mean += sample_cavity_initial(alpha0, rng);
  }
  mean /= static_cast<double>(n);
  CHECK(std::abs(mean - alpha0) < 5 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS(rotation_to_direction(std::nan(""), 0.0));
  const auto spec = ProductStateSpec::uniform(0.0, 0.0, 4);
  const RandomStream rng(0, 0);
  CHECK_THROWS(sample_initial_ensemble(spec, 5, rng));  // size mismatch
}
