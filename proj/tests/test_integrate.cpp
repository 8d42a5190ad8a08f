#include <doctest.h>

#include <cmath>
#include <cstring>

#include "errors.hpp"
#include "integrate.hpp"

using namespace ddtwa;

namespace {

ModelSpec free_spins(std::size_t n) {
  ModelSpec model;
  model.n = n;
  model.finalize();
  return model;
}

NoiseChannelSpec channel(NoiseKind kind, double rate) {
  NoiseChannelSpec spec;
  spec.kind = kind;
  spec.rate = rate;
  return spec;
}

const ObservableColumn& column(const ObservableSeries& s, const std::string& name) {
  const ObservableColumn* c = s.find(name);
  REQUIRE(c != nullptr);
  return *c;
}

}  // namespace

TEST_CASE("time grid resolution and sample counts") {
  const TimeGrid g = TimeGrid::resolve(1.0, 0.3, 2);
  CHECK(g.n_steps == 4);  // rounded up to a stride multiple
  CHECK(g.dt == doctest::Approx(0.25));
  CHECK(g.n_samples() == 3);
  const auto times = g.times();
  REQUIRE(times.size() == 3);
  CHECK(times.front() == 0.0);
  CHECK(times.back() == doctest::Approx(1.0));

  // floor(steps/k) + 1 recorded samples
  const TimeGrid g2 = TimeGrid::resolve(1.0, 0.01, 7);
  CHECK(g2.n_samples() == g2.n_steps / 7 + 1);

  CHECK_THROWS(TimeGrid::resolve(0.5, -0.1, 1));
  CHECK_THROWS(TimeGrid::resolve(0.0, 0.1, 1));
}

TEST_CASE("one Euler-Maruyama step matches the hand-evaluated update") {
  const double gamma_phi = 0.2;
  const double dt = 0.01;
  const ModelSpec model = free_spins(1);
  const auto channels =
      ChannelRuntime::build({channel(NoiseKind::dephasing_individual, gamma_phi)}, false, 0.0);

  SpinEnsembleState state;
  state.sx = {1.0};
  state.sy = {0.0};
  state.sz = {0.0};

  const RandomStream rng(555, 0);
  StepScratch scratch;
  euler_maruyama_step(state, model, channels, nullptr, nullptr, dt, rng, 0, scratch);

  const double dW = std::sqrt(dt) * rng.normal_pair(StreamPurpose::dephasing, 0, 0)[0];
  CHECK(state.sx[0] == doctest::Approx(1.0 - gamma_phi * dt).epsilon(1e-14));
  CHECK(state.sy[0] == doctest::Approx(std::sqrt(2.0 * gamma_phi) * dW).epsilon(1e-14));
  CHECK(state.sz[0] == 0.0);
}

TEST_CASE("trajectories are bitwise deterministic") {
  ModelSpec model = free_spins(6);
  model.fields.uniform = {0.7, 0.0, 0.4};
  model.finalize();
  const auto channels =
      ChannelRuntime::build({channel(NoiseKind::decay_standard, 0.3)}, false, 0.0);
  const TimeGrid grid = TimeGrid::resolve(2.0, 0.01, 10);
  TrajectorySpec spec;
  spec.master_seed = 999;
  spec.n_t = 8;
  const QuantityLayout layout = QuantityLayout::from_request(ObservableRequest{}, false);
  const auto initial = ProductStateSpec::uniform(M_PI / 2, 0.0, 6);

  TrajectoryWork w1, w2;
  run_trajectory(3, spec, model, channels, initial, grid, layout, w1);
  run_trajectory(3, spec, model, channels, initial, grid, layout, w2);
  REQUIRE(w1.samples.size() == w2.samples.size());
  CHECK(std::memcmp(w1.samples.data(), w2.samples.data(),
                    w1.samples.size() * sizeof(double)) == 0);
}

TEST_CASE("precession about z keeps sz constant along a trajectory") {
  ModelSpec model = free_spins(1);
  model.fields.uniform = {0.0, 0.0, 2.0};
  model.finalize();
  const auto channels = ChannelRuntime::build({}, false, 0.0);
  const TimeGrid grid = TimeGrid::resolve(3.0, 0.01, 5);
  TrajectorySpec spec;
  spec.master_seed = 4;
  spec.n_t = 1;
  const QuantityLayout layout = QuantityLayout::from_request(ObservableRequest{}, false);
  const auto initial = ProductStateSpec::uniform(M_PI, 0.0, 1);

  TrajectoryWork work;
  run_trajectory(0, spec, model, channels, initial, grid, layout, work);
  const std::size_t q = layout.count();
  const double sz0 = work.samples[2];
  for (std::size_t t = 0; t < grid.n_samples(); ++t) {
    CHECK(work.samples[t * q + 2] == doctest::Approx(sz0).epsilon(1e-12));
  }
}

TEST_CASE("ensemble basics: exact columns for static states") {
  const std::size_t n = 12;
  ModelSpec model = free_spins(n);
  const TimeGrid grid = TimeGrid::resolve(1.0, 0.1, 5);
  TrajectorySpec spec;
  spec.n_t = 64;
  spec.master_seed = 77;
  ObservableRequest req;
  req.collective_means = true;
  req.collective_variances = true;
  req.spin_length = true;
  const auto initial = ProductStateSpec::uniform(M_PI, 0.0, n);  // all down, no dynamics

  const RunResult result = run_ensemble(spec, model, {}, initial, grid, req);
  const auto& sz = column(result.series, "Sz_mean");
  const auto& var = column(result.series, "Sz_var");
  const auto& len = column(result.series, "spin_length");
  for (std::size_t t = 0; t < result.times.size(); ++t) {
    CHECK(sz.value[t] == doctest::Approx(-0.5 * n).epsilon(1e-14));
    CHECK(sz.stderr_[t] == doctest::Approx(0.0).epsilon(1e-12));
    // operator identity makes the all-down variance vanish identically
    CHECK(var.value[t] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(len.value[t] == doctest::Approx(3.0).epsilon(1e-13));
  }
}

TEST_CASE("n_t = 1 reports absent standard errors") {
  ModelSpec model = free_spins(2);
  const TimeGrid grid = TimeGrid::resolve(0.5, 0.1, 5);
  TrajectorySpec spec;
  spec.n_t = 1;
  const auto initial = ProductStateSpec::uniform(M_PI / 2, 0.0, 2);
  const RunResult result = run_ensemble(spec, model, {}, initial, grid, ObservableRequest{});
  const auto& sx = column(result.series, "Sx_mean");
  for (double se : sx.stderr_) CHECK(std::isnan(se));
}

TEST_CASE("single-spin dephasing matches the analytic exponential") {
  ModelSpec model = free_spins(1);
  const double gamma_phi = 1.0;
  const TimeGrid grid = TimeGrid::resolve(3.0, 0.005, 60);
  TrajectorySpec spec;
  spec.n_t = 20000;
  spec.master_seed = 2718;
  const auto initial = ProductStateSpec::uniform(M_PI / 2, 0.0, 1);

  const RunResult result = run_ensemble(
      spec, model, {channel(NoiseKind::dephasing_individual, gamma_phi)}, initial, grid,
      ObservableRequest{});
  const auto& sx = column(result.series, "Sx_mean");
  for (std::size_t t = 1; t < result.times.size(); ++t) {
    const double expect = 0.5 * std::exp(-gamma_phi * result.times[t]);
    const double se = sx.stderr_[t];
    REQUIRE(se > 0.0);
    CHECK(std::abs(sx.value[t] - expect) < 5.0 * se + 1e-3);
  }
}

TEST_CASE("doubling the trajectory count shrinks stderr by about 1/sqrt(2)") {
  ModelSpec model = free_spins(1);
  const TimeGrid grid = TimeGrid::resolve(2.0, 0.01, 200);
  const auto initial = ProductStateSpec::uniform(M_PI / 2, 0.0, 1);
  const auto channels = std::vector<NoiseChannelSpec>{
      channel(NoiseKind::dephasing_individual, 1.0)};

  TrajectorySpec spec;
  spec.master_seed = 31;
  spec.n_t = 4000;
  const RunResult a = run_ensemble(spec, model, channels, initial, grid, ObservableRequest{});
  spec.n_t = 8000;
  const RunResult b = run_ensemble(spec, model, channels, initial, grid, ObservableRequest{});

  const double se_a = column(a.series, "Sx_mean").stderr_.back();
  const double se_b = column(b.series, "Sx_mean").stderr_.back();
  CHECK(se_b / se_a == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.20));
}

TEST_CASE("results are bitwise independent of the worker count") {
  ModelSpec model = free_spins(4);
  model.fields.uniform = {1.0, 0.0, 0.0};
  model.finalize();
  const TimeGrid grid = TimeGrid::resolve(2.0, 0.01, 20);
  const auto initial = ProductStateSpec::uniform(M_PI, 0.0, 4);
  const auto channels = std::vector<NoiseChannelSpec>{
      channel(NoiseKind::decay_standard, 0.25)};
  ObservableRequest req;
  req.collective_variances = true;

  TrajectorySpec spec;
  spec.master_seed = 11213;
  spec.n_t = 600;

  spec.worker_count = 1;
  const RunResult serial = run_ensemble(spec, model, channels, initial, grid, req);
  spec.worker_count = 3;
  const RunResult threaded = run_ensemble(spec, model, channels, initial, grid, req);
  spec.worker_count = 7;
  const RunResult threaded7 = run_ensemble(spec, model, channels, initial, grid, req);

  for (std::size_t c = 0; c < serial.series.columns.size(); ++c) {
    const auto& s0 = serial.series.columns[c];
    for (const RunResult* other : {&threaded, &threaded7}) {
      const auto& s1 = other->series.columns[c];
      REQUIRE(s0.value.size() == s1.value.size());
      CHECK(std::memcmp(s0.value.data(), s1.value.data(), s0.value.size() * sizeof(double)) == 0);
      for (std::size_t t = 0; t < s0.stderr_.size(); ++t) {
        const bool both_nan = std::isnan(s0.stderr_[t]) && std::isnan(s1.stderr_[t]);
        CHECK((both_nan || s0.stderr_[t] == s1.stderr_[t]));
      }
    }
  }
}

TEST_CASE("mean bias of the decay channel is first order in dt") {
  const double gamma = 1.0;
  ModelSpec model = free_spins(1);
  const auto initial = ProductStateSpec::uniform(M_PI / 2, 0.0, 1);
  const auto channels = std::vector<NoiseChannelSpec>{
      channel(NoiseKind::decay_standard, gamma)};

  auto bias_at = [&](double dt) {
    const TimeGrid grid = TimeGrid::resolve(2.0, dt, static_cast<int>(2.0 / dt));
    TrajectorySpec spec;
    spec.master_seed = 271828;
    spec.n_t = 1600000;
    spec.worker_count = 1;
    const RunResult r = run_ensemble(spec, model, channels, initial, grid, ObservableRequest{});
    const double sz = 2.0 * column(r.series, "Sz_mean").value.back();
    const double exact = std::exp(-gamma * 2.0) - 1.0;  // <sigma^z>(t) = -1 + e^{-Gamma t}
    return sz - exact;
  };

  const double b1 = bias_at(0.25);
  const double b2 = bias_at(0.125);
  const double b3 = bias_at(0.0625);
  CHECK(b1 / b2 == doctest::Approx(2.0).epsilon(0.25));
  CHECK(b2 / b3 == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("colored dephasing approaches the white-noise limit for short tau_c") {
  const double gamma_phi = 1.0;
  const double tau_c = 0.02;
  NoiseChannelSpec colored;
  colored.kind = NoiseKind::dephasing_colored;
  colored.sigma = std::sqrt(gamma_phi / tau_c);  // Gamma_phi = sigma^2 tau_c
  colored.tau_c = tau_c;

  ModelSpec model = free_spins(1);
  const TimeGrid grid = TimeGrid::resolve(2.0, 0.002, 100);
  TrajectorySpec spec;
  spec.n_t = 20000;
  spec.master_seed = 1618;
  const auto initial = ProductStateSpec::uniform(M_PI / 2, 0.0, 1);

  const RunResult r = run_ensemble(spec, model, {colored}, initial, grid, ObservableRequest{});
  const auto& sx = column(r.series, "Sx_mean");
  for (std::size_t t = 0; t < r.times.size(); ++t) {
    const double expect = 0.5 * std::exp(-gamma_phi * r.times[t]);
    // finite correlation time leaves an O(Gamma_phi tau_c) systematic offset
    CHECK(std::abs(sx.value[t] - expect) <
          5.0 * (std::isnan(sx.stderr_[t]) ? 0.0 : sx.stderr_[t]) + 0.04 * expect + 2e-3);
  }
}

TEST_CASE("collective dephasing applies one shared increment") {
  // two spins prepared identically stay identical under collective noise
  ModelSpec model = free_spins(2);
  const auto channels =
      ChannelRuntime::build({channel(NoiseKind::dephasing_collective, 0.8)}, false, 0.0);
  SpinEnsembleState state;
  state.sx = {1.0, 1.0};
  state.sy = {1.0, 1.0};
  state.sz = {-1.0, -1.0};
  const RandomStream rng(5150, 0);
  StepScratch scratch;
  for (std::uint32_t s = 0; s < 500; ++s) {
    euler_maruyama_step(state, model, channels, nullptr, nullptr, 0.01, rng, s, scratch);
    CHECK(state.sx[0] == state.sx[1]);
    CHECK(state.sy[0] == state.sy[1]);
    CHECK(state.sz[0] == state.sz[1]);
  }
}

TEST_CASE("numerical blowups abort with a trajectory diagnostic") {
  ModelSpec model = free_spins(1);
  const auto initial = ProductStateSpec::uniform(M_PI / 2, 0.0, 1);
  // absurd step size makes the multiplicative noise explode
  const auto channels = std::vector<NoiseChannelSpec>{channel(NoiseKind::decay_qle, 1.0)};
  const TimeGrid grid = TimeGrid::resolve(40000.0, 100.0, 1);
  TrajectorySpec spec;
  spec.n_t = 4;
  spec.master_seed = 3;

  CHECK_THROWS_AS(run_ensemble(spec, model, channels, initial, grid, ObservableRequest{}),
                  NumericalError);

  spec.allow_failures = true;
  CHECK_THROWS_WITH(run_ensemble(spec, model, channels, initial, grid, ObservableRequest{}),
                    "run: all trajectories failed");
}

TEST_CASE("duplicate channel kinds are rejected") {
  CHECK_THROWS(ChannelRuntime::build({channel(NoiseKind::decay_standard, 0.1),
                                      channel(NoiseKind::decay_standard, 0.2)},
                                     false, 0.0));
  CHECK_THROWS(ChannelRuntime::build({channel(NoiseKind::cavity_loss, 0.1)}, false, 0.0));
}
