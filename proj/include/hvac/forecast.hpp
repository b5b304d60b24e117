#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hvac/plant_model.hpp"

namespace hvac {

using Trajectory = std::vector<Disturbance>;

inline constexpr int kNumChannels = 4;
enum class Channel { load_elec = 0, load_cw, load_hw, price_elec };
const char* channel_name(Channel ch);
double channel_value(const Disturbance& d, Channel ch);
double& channel_ref(Disturbance& d, Channel ch);
std::vector<double> channel_series(const Trajectory& t, Channel ch, std::size_t begin = 0,
                                   std::size_t end = static_cast<std::size_t>(-1));

struct ArModel {
    int q = 1;
    std::vector<double> phi;  // phi[0] multiplies x_{t-1}
    double intercept = 0.0;
    double noise_variance = 0.0;
    bool ridge = false;  // true when the ridge fallback was used
};

// OLS fit of x_t = sum phi_k x_{t-k} + c on a design centered at the sample mean.
ArModel fit_ar(const std::vector<double>& history, int q);

struct ChannelForecast {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

// Impulse-response weights psi_0..psi_{n-1}.
std::vector<double> psi_weights(const ArModel& m, int n);

// Uses the last q values of recent_history.
ChannelForecast forecast(const ArModel& m, const std::vector<double>& recent_history, int n);

struct ForecastDistribution {
    std::array<ChannelForecast, kNumChannels> channels;
    int horizon() const { return static_cast<int>(channels[0].mean.size()); }
    Trajectory mean_trajectory() const;
};

struct ScenarioSet {
    std::vector<Trajectory> scenarios;  // loads clamped at 0
    std::vector<Trajectory> raw;        // before clamping
    int count() const { return static_cast<int>(scenarios.size()); }
    double probability() const { return scenarios.empty() ? 0.0 : 1.0 / scenarios.size(); }
};

// Lower-triangular factor with jitter up to 1e-8 * max(1, max diag). Throws on failure.
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& cov);

ScenarioSet sample_scenarios(const ForecastDistribution& dist, int s, std::uint64_t seed);

struct ChannelProfile {
    double base = 0.0;
    double annual_amp = 0.0;
    double annual_peak_day = 200.0;  // day of year with the annual maximum
    double daily_amp = 0.0;
    double daily_peak_hour = 15.0;
    double weekend_factor = 1.0;
    double noise_phi = 0.9;
    double noise_std = 0.0;  // innovation std of the AR(1) noise
};

struct SeasonalProfile {
    std::array<ChannelProfile, kNumChannels> channels;
    int start_weekday = 0;  // 0 = Monday
    int start_day_of_year = 0;
};

SeasonalProfile default_campus_profile();
// Named profiles: "campus" (default), "flat", "noiseless", and "daily" (a pure
// daily cycle, exactly representable by an AR(2) with intercept).
SeasonalProfile profile_by_name(const std::string& name);
bool is_weekend(int day_index, int start_weekday);

Trajectory generate_synthetic_campus(std::uint64_t seed, int days, const SeasonalProfile& profile);

double zoh_noise(double load_now, double load_next, double var_err, double var_int,
                 std::mt19937_64& rng);
double zoh_noise(double load_now, double load_next, double var_err, double var_int,
                 std::uint64_t seed);

struct ZohVariances {
    double var_err = 0.0;
    double var_int = 0.0;
};

// Var(first differences) / int_divisor.
double integrated_load_variance(const std::vector<double>& history, double int_divisor = 12.0);
ZohVariances estimate_zoh_variances(const std::vector<double>& history, int q,
                                    double int_divisor = 12.0);

void write_trajectory_csv(std::ostream& os, const Trajectory& t);
void write_trajectory_csv(const std::string& path, const Trajectory& t);
Trajectory read_trajectory_csv(std::istream& is);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace hvac
