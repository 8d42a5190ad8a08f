#include <doctest.h>

#include <cmath>
#include <complex>

#include "errors.hpp"
#include "oracle.hpp"

using namespace ddtwa;

namespace {

NoiseChannelSpec channel(NoiseKind kind, double rate) {
  NoiseChannelSpec spec;
  spec.kind = kind;
  spec.rate = rate;
  return spec;
}

ModelSpec free_spins(std::size_t n) {
  ModelSpec model;
  model.n = n;
  model.finalize();
  return model;
}

const ObservableColumn& column(const ObservableSeries& s, const std::string& name) {
  const ObservableColumn* c = s.find(name);
  REQUIRE(c != nullptr);
  return *c;
}

DenseC random_density(const Liouvillian& li, std::uint64_t seed) {
  const int d = static_cast<int>(li.dim());
  DenseC a(d, d);
  const RandomStream rng(seed, 0);
  std::uint32_t k = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const auto z = rng.normal_pair(StreamPurpose::spin_init, 0, k++);
      a(i, j) = std::complex<double>(z[0], z[1]);
    }
  }
  DenseC rho = a * a.adjoint();
  rho /= rho.trace();
  return rho;
}

}  // namespace

TEST_CASE("liouvillian preserves the trace on random states") {
  ModelSpec model = free_spins(3);
  model.fields.uniform = {0.4, 0.0, 1.1};
  CouplingMatrix cm;
  cm.axis = CouplingAxis::zz;
  cm.all_to_all = true;
  cm.uniform_strength = 0.2;
  model.couplings.push_back(cm);
  model.finalize();

  const auto li = Liouvillian::build(
      model,
      {channel(NoiseKind::dephasing_individual, 0.3), channel(NoiseKind::decay_standard, 0.2)},
      OracleOptions{});
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const DenseC rho = random_density(li, seed);
    const DenseC drho = li.apply(rho);
    CHECK(std::abs(drho.trace()) < 1e-12);
  }
}

TEST_CASE("zero Hamiltonian and no channels is stationary") {
  const ModelSpec model = free_spins(2);
  const auto li = Liouvillian::build(model, {}, OracleOptions{});
  const DenseC rho = random_density(li, 7);
  CHECK(li.apply(rho).norm() < 1e-14);
}

TEST_CASE("single-spin decay rate at the excited state") {
  const ModelSpec model = free_spins(1);
  const double gamma = 0.8;
  const auto li =
      Liouvillian::build(model, {channel(NoiseKind::decay_standard, gamma)}, OracleOptions{});
  const DenseC rho = li.initial_density(ProductStateSpec::uniform(0.0, 0.0, 1));  // |up>
  const DenseC drho = li.apply(rho);
  // d<sigma^z>/dt = 2 tr(S_z drho) = -2 Gamma at <sigma^z> = +1
  const double dsz = 2.0 * (li.collective_mean(drho, 2) - 0.0);
  CHECK(dsz == doctest::Approx(-2.0 * gamma).epsilon(1e-12));
}

TEST_CASE("single-spin analytic solutions within 1e-6") {
  const ModelSpec model = free_spins(1);
  const TimeGrid grid = TimeGrid::resolve(5.0, 0.01, 10);
  ObservableRequest req;

  SUBCASE("dephasing: <sigma^x>(t) = e^{-Gamma_phi t}") {
    const double gp = 1.0;
    const auto series = evolve_master_equation(
        model, {channel(NoiseKind::dephasing_individual, gp)},
        ProductStateSpec::uniform(M_PI / 2, 0.0, 1), grid, req, OracleOptions{});
    const auto& sx = column(series, "Sx_mean");
    double max_err = 0.0;
    for (std::size_t t = 0; t < series.time.size(); ++t) {
      max_err = std::max(max_err,
                         std::abs(2.0 * sx.value[t] - std::exp(-gp * series.time[t])));
    }
    CHECK(max_err < 1e-6);
  }

  SUBCASE("decay: <sigma^z> and <sigma^x> exponentials") {
    const double gamma = 0.8;
    const auto series = evolve_master_equation(
        model, {channel(NoiseKind::decay_standard, gamma)},
        ProductStateSpec::uniform(M_PI / 2, 0.0, 1), grid, req, OracleOptions{});
    const auto& sx = column(series, "Sx_mean");
    const auto& sz = column(series, "Sz_mean");
    double max_err = 0.0;
    for (std::size_t t = 0; t < series.time.size(); ++t) {
      const double time = series.time[t];
      max_err = std::max(max_err,
                         std::abs(2.0 * sx.value[t] - std::exp(-0.5 * gamma * time)));
      max_err = std::max(
          max_err, std::abs(2.0 * sz.value[t] - (-1.0 + std::exp(-gamma * time))));
    }
    CHECK(max_err < 1e-6);
  }
}

TEST_CASE("two-spin unitary evolution conserves purity") {
  ModelSpec model = free_spins(2);
  CouplingMatrix cm;
  cm.axis = CouplingAxis::zz;
  cm.pair_i = {0};
  cm.pair_j = {1};
  cm.pair_val = {1.0};
  model.couplings.push_back(cm);
  model.finalize();

  const auto li = Liouvillian::build(model, {}, OracleOptions{});
  DenseC rho = li.initial_density(ProductStateSpec::uniform(M_PI / 2, 0.0, 2));
  const double h = 0.002;
  for (int s = 0; s < 2000; ++s) {
    const DenseC k1 = li.apply(rho);
    const DenseC k2 = li.apply(rho + (0.5 * h) * k1);
    const DenseC k3 = li.apply(rho + (0.5 * h) * k2);
    const DenseC k4 = li.apply(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  CHECK(std::abs(rho.trace().real() - 1.0) < 1e-8);
  CHECK(std::abs((rho * rho).trace().real() - 1.0) < 1e-8);
}

TEST_CASE("individual dephasing populates the singlet; collective does not") {
  const ModelSpec model = free_spins(2);
  const double gp = 0.5;
  const auto initial = ProductStateSpec::uniform(M_PI / 2, 0.0, 2);

  auto singlet_population = [&](const std::vector<NoiseChannelSpec>& channels) {
    const auto li = Liouvillian::build(model, channels, OracleOptions{});
    DenseC rho = li.initial_density(initial);
    const double h = 0.002;
    for (int s = 0; s < 1000; ++s) {
      const DenseC k1 = li.apply(rho);
      const DenseC k2 = li.apply(rho + (0.5 * h) * k1);
      const DenseC k3 = li.apply(rho + (0.5 * h) * k2);
      const DenseC k4 = li.apply(rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    // |singlet> = (|up down> - |down up>)/sqrt(2), basis index = spin bits
    Eigen::VectorXcd singlet = Eigen::VectorXcd::Zero(4);
    singlet(1) = 1.0 / std::sqrt(2.0);
    singlet(2) = -1.0 / std::sqrt(2.0);
    return (singlet.adjoint() * rho * singlet)(0, 0).real();
  };

  const double p_ind =
      singlet_population({channel(NoiseKind::dephasing_individual, gp)});
  const double p_col =
      singlet_population({channel(NoiseKind::dephasing_collective, gp)});
  CHECK(p_ind > 0.01);
  CHECK(std::abs(p_col) < 1e-10);
}

TEST_CASE("undriven Dicke system is dark from all-down and vacuum") {
  ModelSpec model;
  model.n = 2;
  model.cavity = CavityCoupling{1.0, 0.5, 0.0, {0.0, 0.0}};
  model.finalize();
  OracleOptions options;
  options.n_ph = 4;

  auto initial = ProductStateSpec::uniform(M_PI, 0.0, 2);
  initial.cavity_alpha0 = std::complex<double>{0.0, 0.0};
  const TimeGrid grid = TimeGrid::resolve(2.0, 0.01, 50);
  ObservableRequest req;
  req.photon = true;
  const auto series = evolve_master_equation(model, {}, initial, grid, req, options);
  const auto& sz = column(series, "Sz_mean");
  const auto& pn = column(series, "photon_number");
  for (std::size_t t = 0; t < series.time.size(); ++t) {
    CHECK(std::abs(sz.value[t] + 1.0) < 1e-10);
    CHECK(std::abs(pn.value[t]) < 1e-10);
  }
}

TEST_CASE("refusals: dimension cap, photon truncation, colored noise") {
  CHECK_THROWS_AS(Liouvillian::build(free_spins(13), {}, OracleOptions{}), ConfigError);

  ModelSpec cavity_model;
  cavity_model.n = 1;
  cavity_model.cavity = CavityCoupling{1.0, 0.5, 0.0, {2.0, 0.0}};
  cavity_model.finalize();
  OracleOptions tight;
  tight.n_ph = 3;
  const auto li = Liouvillian::build(cavity_model, {}, tight);
  auto initial = ProductStateSpec::uniform(M_PI, 0.0, 1);
  initial.cavity_alpha0 = std::complex<double>{2.0, 0.0};  // needs many Fock levels
  CHECK_THROWS_AS(li.initial_density(initial), NumericalError);

  NoiseChannelSpec colored;
  colored.kind = NoiseKind::dephasing_colored;
  colored.sigma = 1.0;
  colored.tau_c = 0.5;
  CHECK_THROWS_AS(Liouvillian::build(free_spins(2), {colored}, OracleOptions{}), ConfigError);
}

TEST_CASE("mean-field reference is exact for noninteracting spins") {
  const ModelSpec model = free_spins(1);
  const TimeGrid grid = TimeGrid::resolve(4.0, 0.01, 20);
  const double gp = 0.7;
  const auto series =
      mean_field_reference(model, {channel(NoiseKind::dephasing_individual, gp)},
                           ProductStateSpec::uniform(M_PI / 2, 0.0, 1), grid, ObservableRequest{});
  const auto& sx = column(series, "Sx_mean");
  for (std::size_t t = 0; t < series.time.size(); ++t) {
    CHECK(std::abs(2.0 * sx.value[t] - std::exp(-gp * series.time[t])) < 1e-8);
  }
}

TEST_CASE("mean field cannot distinguish individual from collective dephasing") {
  ModelSpec model;
  model.n = 4;
  model.cavity = CavityCoupling{1.0, 0.5, 1.0, {0.0, 0.0}};
  model.finalize();
  auto initial = ProductStateSpec::uniform(M_PI, 0.0, 4);
  initial.cavity_alpha0 = std::complex<double>{0.0, 0.0};
  const TimeGrid grid = TimeGrid::resolve(5.0, 0.01, 25);
  ObservableRequest req;
  req.photon = true;

  const auto a = mean_field_reference(model, {channel(NoiseKind::dephasing_individual, 0.4)},
                                      initial, grid, req);
  const auto b = mean_field_reference(model, {channel(NoiseKind::dephasing_collective, 0.4)},
                                      initial, grid, req);
  for (std::size_t c = 0; c < a.columns.size(); ++c) {
    for (std::size_t t = 0; t < a.time.size(); ++t) {
      CHECK(a.columns[c].value[t] == doctest::Approx(b.columns[c].value[t]).epsilon(1e-14));
    }
  }
}
