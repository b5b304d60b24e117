#include "hvac/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>

namespace hvac::lp {

const char* status_name(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::IterLimit: return "iteration_limit";
    }
    return "?";
}

const char* backend_name(Backend b) { return b == Backend::Simplex ? "simplex" : "ipm"; }

Backend backend_from_name(const std::string& name) {
    if (name == "simplex") return Backend::Simplex;
    if (name == "ipm") return Backend::InteriorPoint;
    throw std::invalid_argument("unknown LP backend: " + name);
}

LpSolution solve_with(const LinearProgram& lp, Backend backend) {
    return backend == Backend::Simplex ? solve(lp) : solve_ipm(lp);
}

int LinearProgram::add_col(double cost, double lower, double upper) {
    c.push_back(cost);
    lb.push_back(lower);
    ub.push_back(upper);
    return num_cols() - 1;
}

int LinearProgram::add_row(Sense s, double rhs_value) {
    sense.push_back(s);
    rhs.push_back(rhs_value);
    return num_rows() - 1;
}

void LinearProgram::add_coef(int row, int col, double value) { entries.push_back({row, col, value}); }

void LinearProgram::validate() const {
    const int n = num_cols();
    const int m = num_rows();
    if (static_cast<int>(lb.size()) != n || static_cast<int>(ub.size()) != n)
        throw std::invalid_argument("lp: bound vectors do not match column count");
    if (static_cast<int>(sense.size()) != m) throw std::invalid_argument("lp: sense/rhs size mismatch");
    for (int j = 0; j < n; ++j) {
        if (!std::isfinite(c[j])) throw std::invalid_argument("lp: non-finite objective coefficient");
        if (std::isnan(lb[j]) || std::isnan(ub[j]) || lb[j] > ub[j] || lb[j] == kInf || ub[j] == -kInf)
            throw std::invalid_argument("lp: invalid bounds on column " + std::to_string(j));
    }
    for (int i = 0; i < m; ++i)
        if (!std::isfinite(rhs[i])) throw std::invalid_argument("lp: non-finite rhs");
    std::set<std::pair<int, int>> seen;
    for (const auto& e : entries) {
        if (e.row < 0 || e.row >= m || e.col < 0 || e.col >= n)
            throw std::invalid_argument("lp: entry index out of range");
        if (!std::isfinite(e.value)) throw std::invalid_argument("lp: non-finite matrix coefficient");
        if (!seen.insert({e.row, e.col}).second)
            throw std::invalid_argument("lp: duplicate entry at row " + std::to_string(e.row) +
                                        ", col " + std::to_string(e.col));
    }
}

std::pair<int, int> add_free_abs(LinearProgram& lp, int var) {
    const int plus = lp.add_col(1.0, 0.0, kInf);
    const int minus = lp.add_col(1.0, 0.0, kInf);
    const int row = lp.add_row(Sense::EQ, 0.0);
    lp.add_coef(row, var, 1.0);
    lp.add_coef(row, plus, -1.0);
    lp.add_coef(row, minus, 1.0);
    return {plus, minus};
}

double objective_value(const LinearProgram& lp, const std::vector<double>& x) {
    double v = lp.objective_offset;
    for (int j = 0; j < lp.num_cols(); ++j) v += lp.c[j] * x[j];
    return v;
}

double max_row_violation(const LinearProgram& lp, const std::vector<double>& x) {
    std::vector<double> act(lp.num_rows(), 0.0);
    for (const auto& e : lp.entries) act[e.row] += e.value * x[e.col];
    double bnorm = 0.0;
    for (double b : lp.rhs) bnorm = std::max(bnorm, std::abs(b));
    double worst = 0.0;
    for (int i = 0; i < lp.num_rows(); ++i) {
        double v = 0.0;
        switch (lp.sense[i]) {
            case Sense::LE: v = std::max(0.0, act[i] - lp.rhs[i]); break;
            case Sense::GE: v = std::max(0.0, lp.rhs[i] - act[i]); break;
            case Sense::EQ: v = std::abs(act[i] - lp.rhs[i]); break;
        }
        worst = std::max(worst, v);
    }
    return worst / (1.0 + bnorm);
}

double max_bound_violation(const LinearProgram& lp, const std::vector<double>& x) {
    double worst = 0.0;
    for (int j = 0; j < lp.num_cols(); ++j) {
        worst = std::max(worst, lp.lb[j] - x[j]);
        worst = std::max(worst, x[j] - lp.ub[j]);
    }
    return worst;
}

namespace {

// Revised bounded-variable primal simplex with an explicit dense basis inverse.
class PrimalSimplex {
public:
    PrimalSimplex(const LinearProgram& lp, const SolveOptions& opts) : lp_(lp), opts_(opts) {}

    LpSolution run() {
        setup();
        LpSolution sol;
        const long limit = opts_.max_iters > 0 ? opts_.max_iters : 50L * (m_ + n_);
        if (num_art_ > 0) {
            for (int j = 0; j < ntot_; ++j) cost_[j] = j >= art_begin_ ? 1.0 : 0.0;
            auto st = iterate(limit, false);
            if (st == Status::IterLimit) return finish(sol, Status::IterLimit);
            double infeas = 0.0;
            for (int j = art_begin_; j < ntot_; ++j) infeas += x_[j];
            if (infeas > 1e-7 * (1.0 + bnorm_)) return finish(sol, Status::Infeasible);
            for (int j = art_begin_; j < ntot_; ++j) {
                lo_[j] = up_[j] = 0.0;
                x_[j] = 0.0;
            }
            drive_out_artificials();
        }
        for (int j = 0; j < ntot_; ++j) cost_[j] = j < n_ ? lp_.c[j] : 0.0;
        auto st = iterate(limit, true);
        return finish(sol, st);
    }

private:
    const LinearProgram& lp_;
    SolveOptions opts_;
    int m_ = 0, n_ = 0, ntot_ = 0, art_begin_ = 0, num_art_ = 0;
    double bnorm_ = 0.0;
    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> lo_, up_, cost_, x_, b_;
    std::vector<int> basis_, pos_;
    Eigen::MatrixXd binv_;
    long iters_ = 0;
    int since_refactor_ = 0;

    void setup() {
        m_ = lp_.num_rows();
        n_ = lp_.num_cols();
        cols_.assign(n_ + m_, {});
        for (const auto& e : lp_.entries)
            if (e.value != 0.0) cols_[e.col].push_back({e.row, e.value});
        lo_ = lp_.lb;
        up_ = lp_.ub;
        b_ = lp_.rhs;
        for (double v : b_) bnorm_ = std::max(bnorm_, std::abs(v));
        for (int i = 0; i < m_; ++i) {
            cols_[n_ + i].push_back({i, 1.0});
            switch (lp_.sense[i]) {
                case Sense::LE: lo_.push_back(0.0); up_.push_back(kInf); break;
                case Sense::GE: lo_.push_back(-kInf); up_.push_back(0.0); break;
                case Sense::EQ: lo_.push_back(0.0); up_.push_back(0.0); break;
            }
        }
        x_.assign(n_ + m_, 0.0);
        for (int j = 0; j < n_; ++j) {
            if (std::isfinite(lo_[j])) x_[j] = lo_[j];
            else if (std::isfinite(up_[j])) x_[j] = up_[j];
        }
        std::vector<double> resid = b_;
        for (int j = 0; j < n_; ++j)
            for (auto [r, v] : cols_[j]) resid[r] -= v * x_[j];

        basis_.assign(m_, -1);
        art_begin_ = n_ + m_;
        std::vector<double> diag(m_, 1.0);
        for (int i = 0; i < m_; ++i) {
            const int s = n_ + i;
            const double r = resid[i];
            if (r >= lo_[s] - 1e-12 && r <= up_[s] + 1e-12) {
                basis_[i] = s;
                x_[s] = r;
            } else {
                const double clamped = std::clamp(r, lo_[s], up_[s]);
                x_[s] = clamped;
                const double sigma = r > clamped ? 1.0 : -1.0;
                const int a = static_cast<int>(cols_.size());
                cols_.push_back({{i, sigma}});
                lo_.push_back(0.0);
                up_.push_back(kInf);
                x_.push_back(std::abs(r - clamped));
                basis_[i] = a;
                diag[i] = sigma;
                ++num_art_;
            }
        }
        ntot_ = static_cast<int>(cols_.size());
        cost_.assign(ntot_, 0.0);
        pos_.assign(ntot_, -1);
        for (int i = 0; i < m_; ++i) pos_[basis_[i]] = i;
        binv_ = Eigen::MatrixXd::Zero(m_, m_);
        for (int i = 0; i < m_; ++i) binv_(i, i) = 1.0 / diag[i];
    }

    void refactor() {
        since_refactor_ = 0;
        if (m_ == 0) return;
        Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(m_, m_);
        for (int i = 0; i < m_; ++i)
            for (auto [r, v] : cols_[basis_[i]]) bmat(r, i) = v;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(bmat);
        binv_ = lu.inverse();
        Eigen::VectorXd rhs(m_);
        for (int i = 0; i < m_; ++i) rhs(i) = b_[i];
        for (int j = 0; j < ntot_; ++j) {
            if (pos_[j] >= 0 || x_[j] == 0.0) continue;
            for (auto [r, v] : cols_[j]) rhs(r) -= v * x_[j];
        }
        Eigen::VectorXd xb = binv_ * rhs;
        for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb(i);
    }

    Eigen::VectorXd ftran(int j) const {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(m_);
        for (auto [r, v] : cols_[j]) a += v * binv_.col(r);
        return a;
    }

    void pivot(int r, int q, const Eigen::VectorXd& alpha) {
        const double piv = alpha(r);
        binv_.row(r) /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == r || alpha(i) == 0.0) continue;
            binv_.row(i) -= alpha(i) * binv_.row(r);
        }
        pos_[basis_[r]] = -1;
        basis_[r] = q;
        pos_[q] = r;
        if (++since_refactor_ >= 64) refactor();
    }

    void drive_out_artificials() {
        for (int r = 0; r < m_; ++r) {
            if (basis_[r] < art_begin_) continue;
            for (int j = 0; j < art_begin_; ++j) {
                if (pos_[j] >= 0 || lo_[j] == up_[j]) continue;
                Eigen::VectorXd alpha = ftran(j);
                if (std::abs(alpha(r)) > 1e-7) {
                    pivot(r, j, alpha);
                    break;
                }
            }
        }
        refactor();
    }

    Status iterate(long limit, bool phase2) {
        const double dtol = opts_.tol;
        const double ptol = 1e-9;
        long degenerate_run = 0;
        bool bland = false;
        const long bland_after = 2L * (m_ + n_);
        Eigen::VectorXd cb(m_);
        while (true) {
            if (iters_ >= limit) return Status::IterLimit;
            for (int i = 0; i < m_; ++i) cb(i) = cost_[basis_[i]];
            const Eigen::RowVectorXd y = cb.transpose() * binv_;
            int q = -1;
            double best = 0.0;
            double dq = 0.0;
            for (int j = 0; j < ntot_; ++j) {
                if (pos_[j] >= 0) continue;
                const bool can_up = x_[j] < up_[j] - ptol;
                const bool can_down = x_[j] > lo_[j] + ptol;
                if (!can_up && !can_down) continue;
                double d = cost_[j];
                for (auto [r, v] : cols_[j]) d -= y(r) * v;
                const bool eligible = (d < -dtol && can_up) || (d > dtol && can_down);
                if (!eligible) continue;
                if (bland) {
                    q = j;
                    dq = d;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    q = j;
                    dq = d;
                }
            }
            if (q < 0) return Status::Optimal;

            const double dir = dq < 0.0 ? 1.0 : -1.0;
            const Eigen::VectorXd alpha = ftran(q);
            double theta = kInf;
            int leave = -1;
            double leave_bound = 0.0;
            for (int i = 0; i < m_; ++i) {
                const double a = alpha(i);
                if (std::abs(a) <= 1e-11) continue;
                const int bvar = basis_[i];
                const double rate = -dir * a;
                double lim;
                double bound;
                if (rate < 0.0) {
                    if (!std::isfinite(lo_[bvar])) continue;
                    bound = lo_[bvar];
                    lim = std::max(0.0, (x_[bvar] - bound) / -rate);
                } else {
                    if (!std::isfinite(up_[bvar])) continue;
                    bound = up_[bvar];
                    lim = std::max(0.0, (bound - x_[bvar]) / rate);
                }
                bool take = false;
                if (leave < 0 || lim < theta - 1e-12 * (1.0 + theta)) {
                    take = true;
                } else if (lim <= theta + 1e-12 * (1.0 + theta)) {
                    take = bland ? bvar < basis_[leave] : std::abs(a) > std::abs(alpha(leave));
                }
                if (take) {
                    theta = lim;
                    leave = i;
                    leave_bound = bound;
                }
            }
            const double flip = up_[q] - lo_[q];
            const bool do_flip = std::isfinite(flip) && flip <= theta;
            if (do_flip) theta = flip;
            if (!std::isfinite(theta)) return phase2 ? Status::Unbounded : Status::IterLimit;

            ++iters_;
            x_[q] += dir * theta;
            for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * theta * alpha(i);
            if (do_flip) {
                x_[q] = dir > 0 ? up_[q] : lo_[q];
            } else {
                x_[basis_[leave]] = leave_bound;
                pivot(leave, q, alpha);
            }
            if (theta <= 1e-12) {
                if (++degenerate_run >= bland_after) bland = true;
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }

    LpSolution& finish(LpSolution& sol, Status st) {
        if (st == Status::Optimal) refactor();
        sol.status = st;
        sol.iterations = iters_;
        sol.primal.assign(x_.begin(), x_.begin() + n_);
        if (st == Status::Optimal) {
            for (int j = 0; j < n_; ++j) sol.primal[j] = std::clamp(sol.primal[j], lp_.lb[j], lp_.ub[j]);
        }
        sol.objective = objective_value(lp_, sol.primal);
        return sol;
    }
};

std::string mps_number(double v) {
    char buf[64];
    for (int prec = 12; prec >= 1; --prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::string(buf).size() <= 12) return buf;
    }
    return buf;
}

std::string mps_name(char prefix, int idx) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%07d", prefix, idx);
    return buf;
}

void mps_line(std::ostream& os, const std::string& f1, const std::string& f2, const std::string& f3,
              const std::string& f4) {
    char buf[128];
    std::snprintf(buf, sizeof buf, " %-2s %-8s  %-8s  %12s", f1.c_str(), f2.c_str(), f3.c_str(), f4.c_str());
    std::string s(buf);
    while (!s.empty() && s.back() == ' ') s.pop_back();
    os << s << '\n';
}

}  // namespace

LpSolution solve(const LinearProgram& lp, const SolveOptions& opts) {
    lp.validate();
    PrimalSimplex s(lp, opts);
    return s.run();
}

void write_mps(std::ostream& os, const LinearProgram& lp, const std::string& name) {
    lp.validate();
    os << "NAME          " << name << '\n' << "ROWS\n";
    os << " N  COST\n";
    for (int i = 0; i < lp.num_rows(); ++i) {
        const char* t = lp.sense[i] == Sense::LE ? "L" : lp.sense[i] == Sense::GE ? "G" : "E";
        os << ' ' << t << "  " << mps_name('R', i) << '\n';
    }
    std::vector<std::vector<std::pair<int, double>>> cols(lp.num_cols());
    for (const auto& e : lp.entries) cols[e.col].push_back({e.row, e.value});
    os << "COLUMNS\n";
    for (int j = 0; j < lp.num_cols(); ++j) {
        auto& cj = cols[j];
        std::sort(cj.begin(), cj.end());
        const auto cname = mps_name('C', j);
        if (lp.c[j] != 0.0 || cj.empty()) mps_line(os, "", cname, "COST", mps_number(lp.c[j]));
        for (auto [r, v] : cj) mps_line(os, "", cname, mps_name('R', r), mps_number(v));
    }
    os << "RHS\n";
    if (lp.objective_offset != 0.0) mps_line(os, "", "RHS", "COST", mps_number(-lp.objective_offset));
    for (int i = 0; i < lp.num_rows(); ++i)
        if (lp.rhs[i] != 0.0) mps_line(os, "", "RHS", mps_name('R', i), mps_number(lp.rhs[i]));
    os << "BOUNDS\n";
    for (int j = 0; j < lp.num_cols(); ++j) {
        const auto cname = mps_name('C', j);
        const double l = lp.lb[j], u = lp.ub[j];
        if (l == u) {
            mps_line(os, "FX", "BND", cname, mps_number(l));
            continue;
        }
        if (l == -kInf && u == kInf) {
            mps_line(os, "FR", "BND", cname, "");
            continue;
        }
        if (l == -kInf) mps_line(os, "MI", "BND", cname, "");
        else if (l != 0.0) mps_line(os, "LO", "BND", cname, mps_number(l));
        if (u != kInf) mps_line(os, "UP", "BND", cname, mps_number(u));
    }
    os << "ENDATA\n";
}

}  // namespace hvac::lp
