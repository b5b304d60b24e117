#include "hvac/forecast.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace hvac {

const char* channel_name(Channel ch) {
    static const char* names[kNumChannels] = {"load_elec", "load_cw", "load_hw", "price_elec"};
    return names[static_cast<int>(ch)];
}

double channel_value(const Disturbance& d, Channel ch) {
    switch (ch) {
        case Channel::load_elec: return d.load_elec;
        case Channel::load_cw: return d.load_cw;
        case Channel::load_hw: return d.load_hw;
        case Channel::price_elec: return d.price_elec;
    }
    return 0.0;
}

double& channel_ref(Disturbance& d, Channel ch) {
    switch (ch) {
        case Channel::load_elec: return d.load_elec;
        case Channel::load_cw: return d.load_cw;
        case Channel::load_hw: return d.load_hw;
        case Channel::price_elec: break;
    }
    return d.price_elec;
}

std::vector<double> channel_series(const Trajectory& t, Channel ch, std::size_t begin,
                                   std::size_t end) {
    end = std::min(end, t.size());
    std::vector<double> out;
    if (begin >= end) return out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) out.push_back(channel_value(t[i], ch));
    return out;
}

ArModel fit_ar(const std::vector<double>& history, int q) {
    if (q < 1) throw std::invalid_argument("fit_ar: order must be >= 1");
    const int h = static_cast<int>(history.size());
    if (h < 2 * q + 1)
        throw std::invalid_argument("fit_ar: history of " + std::to_string(h) +
                                    " points is too short for order " + std::to_string(q));
    double mu = 0.0;
    for (double v : history) {
        if (!std::isfinite(v)) throw std::invalid_argument("fit_ar: non-finite value in history");
        mu += v;
    }
    mu /= h;

    const int m = h - q;
    Eigen::MatrixXd x(m, q + 1);
    Eigen::VectorXd y(m);
    for (int r = 0; r < m; ++r) {
        const int t = r + q;
        y(r) = history[t] - mu;
        for (int k = 0; k < q; ++k) x(r, k) = history[t - 1 - k] - mu;
        x(r, q) = 1.0;
    }
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(q + 1, q + 1);
    xtx.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    xtx = xtx.selfadjointView<Eigen::Lower>();
    Eigen::VectorXd xty = x.transpose() * y;

    ArModel model;
    model.q = q;
    Eigen::VectorXd beta;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
    bool singular = ldlt.info() != Eigen::Success;
    if (!singular) {
        const auto d = ldlt.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        singular = !(dmax > 0.0) || d.minCoeff() <= 1e-11 * dmax;
    }
    if (!singular) {
        beta = ldlt.solve(xty);
    } else {
        const double lambda = 1e-6 * xtx.trace() / q;
        Eigen::MatrixXd reg = xtx;
        reg.diagonal().array() += lambda;
        beta = reg.llt().solve(xty);
        model.ridge = true;
    }
    model.phi.resize(q);
    double sum_phi = 0.0;
    for (int k = 0; k < q; ++k) {
        model.phi[k] = beta(k);
        sum_phi += beta(k);
    }
    model.intercept = beta(q) + mu * (1.0 - sum_phi);
    const Eigen::VectorXd res = y - x * beta;
    model.noise_variance = res.squaredNorm() / m;
    return model;
}

std::vector<double> psi_weights(const ArModel& m, int n) {
    std::vector<double> psi(std::max(n, 1), 0.0);
    psi[0] = 1.0;
    for (int k = 1; k < n; ++k) {
        double s = 0.0;
        const int top = std::min(k, m.q);
        for (int j = 1; j <= top; ++j) s += m.phi[j - 1] * psi[k - j];
        psi[k] = s;
    }
    return psi;
}

ChannelForecast forecast(const ArModel& m, const std::vector<double>& recent_history, int n) {
    if (n < 1) throw std::invalid_argument("forecast: horizon must be >= 1");
    if (static_cast<int>(recent_history.size()) < m.q)
        throw std::invalid_argument("forecast: recent history shorter than model order");
    std::vector<double> buf(recent_history.end() - m.q, recent_history.end());
    ChannelForecast f;
    f.mean.resize(n);
    for (int i = 0; i < n; ++i) {
        double v = m.intercept;
        const int sz = static_cast<int>(buf.size());
        for (int k = 0; k < m.q; ++k) v += m.phi[k] * buf[sz - 1 - k];
        f.mean(i) = v;
        buf.push_back(v);
    }
    const auto psi = psi_weights(m, n);
    f.cov.resize(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const int lag = i - j;
            double s = 0.0;
            for (int k = 0; k <= j; ++k) s += psi[k] * psi[k + lag];
            f.cov(i, j) = f.cov(j, i) = m.noise_variance * s;
        }
    }
    return f;
}

Trajectory ForecastDistribution::mean_trajectory() const {
    const int n = horizon();
    Trajectory t(n);
    for (int c = 0; c < kNumChannels; ++c)
        for (int i = 0; i < n; ++i) channel_ref(t[i], static_cast<Channel>(c)) = channels[c].mean(i);
    return t;
}

Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& cov) {
    const int n = static_cast<int>(cov.rows());
    if (n == 0) return cov;
    const double dmax = cov.diagonal().maxCoeff();
    if (dmax <= 0.0 && cov.cwiseAbs().maxCoeff() == 0.0) return Eigen::MatrixXd::Zero(n, n);
    const double scale = std::max(1.0, dmax);
    for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
        Eigen::MatrixXd a = cov;
        a.diagonal().array() += jitter * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw std::runtime_error("covariance is not positive semidefinite (Cholesky failed after jitter)");
}

ScenarioSet sample_scenarios(const ForecastDistribution& dist, int s, std::uint64_t seed) {
    if (s < 1) throw std::invalid_argument("sample_scenarios: count must be >= 1");
    const int n = dist.horizon();
    std::array<Eigen::MatrixXd, kNumChannels> factors;
    for (int c = 0; c < kNumChannels; ++c) factors[c] = jittered_cholesky(dist.channels[c].cov);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    ScenarioSet set;
    set.scenarios.assign(s, Trajectory(n));
    set.raw.assign(s, Trajectory(n));
    Eigen::VectorXd z(n);
    for (int k = 0; k < s; ++k) {
        for (int c = 0; c < kNumChannels; ++c) {
            for (int i = 0; i < n; ++i) z(i) = normal(rng);
            const Eigen::VectorXd v =
                dist.channels[c].mean + factors[c].triangularView<Eigen::Lower>() * z;
            const auto ch = static_cast<Channel>(c);
            for (int i = 0; i < n; ++i) {
                channel_ref(set.raw[k][i], ch) = v(i);
                const bool load = ch != Channel::price_elec;
                channel_ref(set.scenarios[k][i], ch) = load ? std::max(v(i), 0.0) : v(i);
            }
        }
    }
    return set;
}

bool is_weekend(int day_index, int start_weekday) {
    const int wd = (start_weekday + day_index) % 7;
    return wd >= 5;
}

SeasonalProfile default_campus_profile() {
    SeasonalProfile p;
    p.channels[0] = {9000.0, 1500.0, 200.0, 2500.0, 14.0, 0.75, 0.9, 250.0};
    p.channels[1] = {6000.0, 3000.0, 200.0, 2500.0, 15.0, 0.80, 0.9, 250.0};
    p.channels[2] = {2500.0, 1000.0, 15.0, 600.0, 7.0, 0.85, 0.9, 100.0};
    p.channels[3] = {0.045, 0.005, 200.0, 0.02, 16.0, 0.85, 0.8, 0.003};
    p.start_weekday = 0;
    p.start_day_of_year = 0;
    return p;
}

SeasonalProfile profile_by_name(const std::string& name) {
    SeasonalProfile p = default_campus_profile();
    if (name == "campus") return p;
    if (name == "noiseless") {
        for (auto& c : p.channels) c.noise_std = 0.0;
        return p;
    }
    if (name == "daily") {
        // Peaks off the hour grid so no two hours of a day tie.
        for (auto& c : p.channels) {
            c.annual_amp = c.noise_std = 0.0;
            c.weekend_factor = 1.0;
            c.daily_peak_hour += 0.37;
        }
        return p;
    }
    if (name == "flat") {
        for (auto& c : p.channels) {
            c.annual_amp = c.daily_amp = c.noise_std = 0.0;
            c.weekend_factor = 1.0;
        }
        return p;
    }
    throw std::invalid_argument("unknown profile: " + name);
}

Trajectory generate_synthetic_campus(std::uint64_t seed, int days, const SeasonalProfile& profile) {
    if (days < 1) throw std::invalid_argument("generate_synthetic_campus: days must be >= 1");
    const int hours = 24 * days;
    Trajectory t(hours);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int c = 0; c < kNumChannels; ++c) {
        const ChannelProfile& cp = profile.channels[c];
        const double stat_sd =
            std::abs(cp.noise_phi) < 1.0 ? cp.noise_std / std::sqrt(1.0 - cp.noise_phi * cp.noise_phi)
                                         : cp.noise_std;
        double noise = stat_sd * normal(rng);
        for (int h = 0; h < hours; ++h) {
            if (h > 0) noise = cp.noise_phi * noise + cp.noise_std * normal(rng);
            const int d = h / 24;
            const int hd = h % 24;
            const int doy = (profile.start_day_of_year + d) % 365;
            double v = cp.base + cp.annual_amp * std::cos(two_pi * (doy - cp.annual_peak_day) / 365.0) +
                       cp.daily_amp * std::cos(two_pi * (hd - cp.daily_peak_hour) / 24.0);
            if (is_weekend(d, profile.start_weekday)) v *= cp.weekend_factor;
            v += noise;
            channel_ref(t[h], static_cast<Channel>(c)) = std::max(v, 0.0);
        }
    }
    return t;
}

double zoh_noise(double load_now, double load_next, double var_err, double var_int,
                 std::mt19937_64& rng) {
    const double mean = -0.5 * (load_next - load_now);
    const double var = 0.25 * var_err + var_int;
    if (var <= 0.0) return mean;
    std::normal_distribution<double> normal(mean, std::sqrt(var));
    return normal(rng);
}

double zoh_noise(double load_now, double load_next, double var_err, double var_int,
                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return zoh_noise(load_now, load_next, var_err, var_int, rng);
}

double integrated_load_variance(const std::vector<double>& history, double int_divisor) {
    if (history.size() < 2) throw std::invalid_argument("integrated_load_variance: history too short");
    const std::size_t nd = history.size() - 1;
    double mean = 0.0;
    for (std::size_t i = 0; i < nd; ++i) mean += history[i + 1] - history[i];
    mean /= nd;
    double ss = 0.0;
    for (std::size_t i = 0; i < nd; ++i) {
        const double dv = history[i + 1] - history[i] - mean;
        ss += dv * dv;
    }
    return ss / nd / int_divisor;
}

ZohVariances estimate_zoh_variances(const std::vector<double>& history, int q, double int_divisor) {
    if (static_cast<int>(history.size()) < 2 * q + 1)
        throw std::invalid_argument("estimate_zoh_variances: history too short");
    ZohVariances out;
    out.var_err = fit_ar(history, q).noise_variance;
    out.var_int = integrated_load_variance(history, int_divisor);
    return out;
}

namespace {
const char* kCsvHeader = "hour,load_elec_kw,load_cw_kw,load_hw_kw,price_elec_usd_per_kwh";

double parse_double(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("trajectory csv line " + std::to_string(line) + ": bad number '" + s + "'");
    }
}
}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
    os << kCsvHeader << '\n' << std::setprecision(17);
    for (std::size_t h = 0; h < t.size(); ++h)
        os << h << ',' << t[h].load_elec << ',' << t[h].load_cw << ',' << t[h].load_hw << ','
           << t[h].price_elec << '\n';
}

void write_trajectory_csv(const std::string& path, const Trajectory& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_trajectory_csv(os, t);
}

Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("trajectory csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw std::runtime_error("trajectory csv: unexpected header '" + line + "'");
    Trajectory t;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 5)
            throw std::runtime_error("trajectory csv line " + std::to_string(lineno) + ": expected 5 columns");
        const double hour = parse_double(f[0], lineno);
        if (hour != static_cast<double>(t.size()))
            throw std::runtime_error("trajectory csv line " + std::to_string(lineno) + ": hours must be 0,1,2,...");
        Disturbance d{parse_double(f[1], lineno), parse_double(f[2], lineno),
                      parse_double(f[3], lineno), parse_double(f[4], lineno)};
        t.push_back(d);
    }
    return t;
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open data file: " + path);
    return read_trajectory_csv(is);
}

}  // namespace hvac
