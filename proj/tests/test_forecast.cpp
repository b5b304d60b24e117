#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hvac/forecast.hpp"
#include "oracles.hpp"

using namespace hvac;

TEST_CASE("fit_ar recovers a noiseless AR(1) exactly") {
    std::vector<double> x{0.0};
    for (int t = 1; t < 50; ++t) x.push_back(0.5 * x.back() + 1.0);
    auto m = fit_ar(x, 1);
    CHECK(std::abs(m.phi[0] - 0.5) < 1e-9);
    CHECK(std::abs(m.intercept - 1.0) < 1e-9);
    CHECK(m.noise_variance < 1e-9);
    CHECK_FALSE(m.ridge);
}

TEST_CASE("fit_ar falls back to ridge on a constant series") {
    std::vector<double> x(40, 5.0);
    auto m = fit_ar(x, 1);
    CHECK(m.ridge);
    const double pred = m.intercept + m.phi[0] * 5.0;
    CHECK(std::abs(pred - 5.0) < 1e-6);
}

TEST_CASE("fit_ar recovers AR(3) coefficients from 10^4 samples") {
    const std::vector<double> phi{0.4, 0.3, 0.1};
    auto x = test::simulate_ar(phi, 2.0, 1.0, 10000, 42);
    auto m = fit_ar(x, 3);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(m.phi[k] - phi[k]) < 0.05);
}

TEST_CASE("fit_ar rejects bad input") {
    CHECK_THROWS_AS(fit_ar(std::vector<double>(4, 1.0), 2), std::invalid_argument);
    std::vector<double> x(20, 1.0);
    x[3] = std::nan("");
    CHECK_THROWS_AS(fit_ar(x, 2), std::invalid_argument);
}

TEST_CASE("forecast variance follows the psi-weight accumulation") {
    ArModel m;
    m.q = 1;
    m.phi = {0.5};
    m.noise_variance = 1.0;
    auto f = forecast(m, {0.0}, 3);
    CHECK(f.cov(0, 0) == doctest::Approx(1.0));
    CHECK(f.cov(1, 1) == doctest::Approx(1.25));
    CHECK(f.cov(2, 2) == doctest::Approx(1.3125));
}

TEST_CASE("forecast covariance matches a state-space propagation oracle") {
    ArModel m;
    m.q = 3;
    m.phi = {0.4, 0.3, 0.1};
    m.noise_variance = 2.5;
    const int n = 30;
    auto f = forecast(m, {1.0, 2.0, 3.0}, n);
    auto oracle = test::ar_forecast_cov_statespace(m.phi, m.noise_variance, n);
    CHECK((f.cov - oracle).cwiseAbs().maxCoeff() < 1e-9);
    for (int i = 1; i < n; ++i) CHECK(f.cov(i, i) >= f.cov(i - 1, i - 1) - 1e-12);
}

TEST_CASE("forecast mean") {
    ArModel m;
    m.q = 1;
    m.phi = {0.5};
    m.intercept = 1.0;
    auto f = forecast(m, {2.0}, 5);
    for (int i = 0; i < 5; ++i) CHECK(f.mean(i) == doctest::Approx(2.0));

    ArModel z = m;
    z.noise_variance = 0.0;
    CHECK(forecast(z, {3.0}, 4).cov.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(forecast(m, {2.0}, 0), std::invalid_argument);
}

TEST_CASE("fitted noiseless AR reproduces the true continuation") {
    const std::vector<double> phi{0.6, -0.2, 0.15};
    auto x = test::simulate_ar(phi, 3.0, 0.0, 200, 1);
    for (int t = 0; t < 3; ++t) x[t] = 1.0 + t;
    for (int t = 3; t < 200; ++t) x[t] = 3.0 + phi[0] * x[t - 1] + phi[1] * x[t - 2] + phi[2] * x[t - 3];
    std::vector<double> hist(x.begin(), x.begin() + 176);
    std::vector<double> fit_part(hist.begin(), hist.begin() + 20);
    auto m = fit_ar(fit_part, 3);
    auto f = forecast(m, hist, 24);
    for (int i = 0; i < 24; ++i) CHECK(std::abs(f.mean(i) - x[176 + i]) < 1e-6);
}

namespace {
ForecastDistribution ar1_dist(int n) {
    ArModel m;
    m.q = 1;
    m.phi = {0.7};
    m.intercept = 30.0;
    m.noise_variance = 4.0;
    ForecastDistribution d;
    for (auto& ch : d.channels) ch = forecast(m, {100.0}, n);
    return d;
}
}  // namespace

TEST_CASE("zero covariance scenarios equal the mean") {
    ForecastDistribution d;
    for (auto& ch : d.channels) {
        ch.mean = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0);
        ch.cov = Eigen::MatrixXd::Zero(6, 6);
    }
    auto s = sample_scenarios(d, 5, 3);
    for (const auto& tr : s.scenarios)
        for (int i = 0; i < 6; ++i) CHECK(tr[i].load_cw == doctest::Approx(i + 1.0));
}

TEST_CASE("scenario sampling is deterministic per seed") {
    auto d = ar1_dist(8);
    auto a = sample_scenarios(d, 20, 77);
    auto b = sample_scenarios(d, 20, 77);
    for (int k = 0; k < 20; ++k)
        for (int i = 0; i < 8; ++i) {
            CHECK(a.scenarios[k][i].load_elec == b.scenarios[k][i].load_elec);
            CHECK(a.scenarios[k][i].price_elec == b.scenarios[k][i].price_elec);
        }
    auto c = sample_scenarios(d, 20, 78);
    CHECK(a.scenarios[0][0].load_elec != c.scenarios[0][0].load_elec);
}

TEST_CASE("scenario moments converge") {
    const int n = 8;
    const int s = 100000;
    auto d = ar1_dist(n);
    auto set = sample_scenarios(d, s, 2024);
    const auto& ch = d.channels[0];
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (const auto& tr : set.scenarios)
        for (int i = 0; i < n; ++i) mean(i) += tr[i].load_elec;
    mean /= s;
    for (int i = 0; i < n; ++i) CHECK(std::abs(mean(i) - ch.mean(i)) < 3.0 * std::sqrt(ch.cov(i, i) / s));
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd v(n);
    for (const auto& tr : set.scenarios) {
        for (int i = 0; i < n; ++i) v(i) = tr[i].load_elec - mean(i);
        cov += v * v.transpose();
    }
    cov /= (s - 1);
    CHECK((cov - ch.cov).norm() / ch.cov.norm() < 0.10);
}

TEST_CASE("clamping only lowers loads") {
    ForecastDistribution d;
    for (auto& ch : d.channels) {
        ch.mean = Eigen::VectorXd::Constant(5, 0.5);
        ch.cov = Eigen::MatrixXd::Identity(5, 5);
    }
    auto s = sample_scenarios(d, 200, 9);
    int clamped = 0;
    for (int k = 0; k < 200; ++k)
        for (int i = 0; i < 5; ++i) {
            CHECK(s.scenarios[k][i].load_hw <= std::max(s.raw[k][i].load_hw, 0.0));
            CHECK(s.scenarios[k][i].load_hw >= 0.0);
            if (s.raw[k][i].load_hw < 0) ++clamped;
            CHECK(s.scenarios[k][i].price_elec == s.raw[k][i].price_elec);
        }
    CHECK(clamped > 0);
}

TEST_CASE("synthetic campus generator") {
    auto p = profile_by_name("noiseless");
    for (auto& c : p.channels) c.annual_amp = 0.0;
    auto t = generate_synthetic_campus(1, 28, p);
    CHECK(t.size() == 28u * 24u);
    for (std::size_t h = 168; h < t.size(); ++h) {
        CHECK(t[h].load_elec == doctest::Approx(t[h - 168].load_elec).epsilon(1e-12));
        CHECK(t[h].load_cw == doctest::Approx(t[h - 168].load_cw).epsilon(1e-12));
    }

    auto w = default_campus_profile();
    w.channels[0].weekend_factor = 0.7;
    auto year = generate_synthetic_campus(11, 365, w);
    double we = 0, wd = 0;
    int nwe = 0, nwd = 0;
    for (std::size_t h = 0; h < year.size(); ++h) {
        if (is_weekend(static_cast<int>(h / 24), w.start_weekday)) {
            we += year[h].load_elec;
            ++nwe;
        } else {
            wd += year[h].load_elec;
            ++nwd;
        }
    }
    CHECK(std::abs((we / nwe) / (wd / nwd) - 0.7) < 0.02);

    auto a = generate_synthetic_campus(5, 10, default_campus_profile());
    auto b = generate_synthetic_campus(5, 10, default_campus_profile());
    for (std::size_t h = 0; h < a.size(); ++h) CHECK(a[h].load_hw == b[h].load_hw);
    CHECK_THROWS_AS(generate_synthetic_campus(1, 0, p), std::invalid_argument);
}

TEST_CASE("zero-order-hold noise") {
    CHECK(zoh_noise(100, 100, 0, 0, 1) == 0.0);
    CHECK(zoh_noise(100, 110, 0, 0, 1) == doctest::Approx(-5.0));
    std::mt19937_64 rng(123);
    const int n = 100000;
    double s = 0, ss = 0;
    for (int i = 0; i < n; ++i) {
        double v = zoh_noise(0, 0, 4.0, 1.0, rng);
        s += v;
        ss += v * v;
    }
    const double mean = s / n;
    const double var = ss / n - mean * mean;
    CHECK(std::abs(var - 2.0) < 0.05 * 2.0);
}

TEST_CASE("zero-order-hold variance estimation") {
    auto c = estimate_zoh_variances(std::vector<double>(50, 7.0), 2);
    CHECK(c.var_err == doctest::Approx(0.0));
    CHECK(c.var_int == doctest::Approx(0.0));

    const double dd = 3.0;
    std::vector<double> saw;
    for (int i = 0; i < 41; ++i) saw.push_back(i % 2 == 0 ? dd : -dd);
    auto z = estimate_zoh_variances(saw, 2);
    std::vector<double> diffs;
    for (std::size_t i = 1; i < saw.size(); ++i) diffs.push_back(saw[i] - saw[i - 1]);
    CHECK(z.var_int == doctest::Approx(test::population_variance(diffs) / 12.0));

    auto x = test::simulate_ar({0.8}, 10.0, 2.0, 5000, 8);
    auto e = estimate_zoh_variances(x, 1);
    CHECK(std::abs(e.var_err - 4.0) < 0.4);
    CHECK_THROWS_AS(estimate_zoh_variances({1.0, 2.0}, 1), std::invalid_argument);
}

TEST_CASE("trajectory csv round trip") {
    auto t = generate_synthetic_campus(3, 2, default_campus_profile());
    std::stringstream ss;
    write_trajectory_csv(ss, t);
    auto r = read_trajectory_csv(ss);
    REQUIRE(r.size() == t.size());
    for (std::size_t h = 0; h < t.size(); ++h) {
        CHECK(r[h].load_elec == t[h].load_elec);
        CHECK(r[h].price_elec == t[h].price_elec);
    }
    std::stringstream bad("hour,a,b\n0,1,2\n");
    CHECK_THROWS(read_trajectory_csv(bad));
    CHECK_THROWS(read_trajectory_csv(std::string("/nonexistent/truth.csv")));
}
