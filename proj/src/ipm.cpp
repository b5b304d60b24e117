#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "hvac/lp.hpp"

namespace hvac::lp {

namespace {

// ---------------------------------------------------------------------------
// Presolve
// ---------------------------------------------------------------------------

struct PostStep {
    int col;
    bool fixed;
    double value;  // fixed value, or row rhs for a substitution
    double pivot;  // coefficient of col in the substitution row
    std::vector<std::pair<int, double>> rest;
};

class Presolver {
public:
    explicit Presolver(const LinearProgram& lp) {
        n_ = lp.num_cols();
        m_ = lp.num_rows();
        c_ = lp.c;
        lb_ = lp.lb;
        ub_ = lp.ub;
        rhs_ = lp.rhs;
        sense_ = lp.sense;
        offset_ = lp.objective_offset;
        rows_.assign(m_, {});
        colrows_.assign(n_, {});
        for (const auto& e : lp.entries) {
            if (e.value == 0.0) continue;
            rows_[e.row].push_back({e.col, e.value});
            colrows_[e.col].push_back(e.row);
        }
        row_alive_.assign(m_, 1);
        col_alive_.assign(n_, 1);
    }

    // Returns false if infeasibility was detected.
    bool run() {
        for (int pass = 0; pass < 1000; ++pass) {
            bool changed = false;
            for (int j = 0; j < n_; ++j)
                if (col_alive_[j] && lb_[j] == ub_[j]) {
                    fix_column(j, lb_[j]);
                    changed = true;
                }
            for (int i = 0; i < m_; ++i) {
                if (!row_alive_[i]) continue;
                if (rows_[i].empty()) {
                    if (!empty_row_ok(i)) return false;
                    row_alive_[i] = 0;
                    changed = true;
                } else if (rows_[i].size() == 1) {
                    if (!singleton_row(i)) return false;
                    changed = true;
                }
            }
            for (int j = 0; j < n_; ++j) {
                if (!col_alive_[j] || column_count(j) != 0) continue;
                double v;
                if (c_[j] > 0.0) v = lb_[j];
                else if (c_[j] < 0.0) v = ub_[j];
                else v = std::isfinite(lb_[j]) ? lb_[j] : (std::isfinite(ub_[j]) ? ub_[j] : 0.0);
                if (!std::isfinite(v)) {
                    unbounded_ = true;
                    return true;
                }
                fix_column(j, v);
                changed = true;
            }
            for (int j = 0; j < n_; ++j) {
                if (!col_alive_[j]) continue;
                const int cnt = column_count(j);
                if (cnt >= 1 && cnt <= 3 && try_substitute(j)) changed = true;
            }
            if (!changed) break;
        }
        return true;
    }

    bool unbounded() const { return unbounded_; }

    // Remaining problem with compact indices.
    LinearProgram reduced(std::vector<int>& col_map) const {
        LinearProgram r;
        col_map.assign(n_, -1);
        for (int j = 0; j < n_; ++j)
            if (col_alive_[j]) col_map[j] = r.add_col(c_[j], lb_[j], ub_[j]);
        for (int i = 0; i < m_; ++i) {
            if (!row_alive_[i]) continue;
            const int ri = r.add_row(sense_[i], rhs_[i]);
            for (auto [j, v] : rows_[i]) r.add_coef(ri, col_map[j], v);
        }
        r.objective_offset = offset_;
        return r;
    }

    void postsolve(std::vector<double>& x) const {
        for (auto it = post_.rbegin(); it != post_.rend(); ++it) {
            if (it->fixed) {
                x[it->col] = it->value;
                continue;
            }
            double s = it->value;
            for (auto [k, a] : it->rest) s -= a * x[k];
            x[it->col] = s / it->pivot;
        }
    }

private:
    int n_ = 0, m_ = 0;
    std::vector<double> c_, lb_, ub_, rhs_;
    std::vector<Sense> sense_;
    double offset_ = 0.0;
    std::vector<std::vector<std::pair<int, double>>> rows_;
    std::vector<std::vector<int>> colrows_;
    std::vector<char> row_alive_, col_alive_;
    std::vector<PostStep> post_;
    bool unbounded_ = false;

    static double* find(std::vector<std::pair<int, double>>& row, int j) {
        for (auto& e : row)
            if (e.first == j) return &e.second;
        return nullptr;
    }

    static void erase(std::vector<std::pair<int, double>>& row, int j) {
        row.erase(std::remove_if(row.begin(), row.end(), [j](const auto& e) { return e.first == j; }),
                  row.end());
    }

    const std::vector<int>& live_rows(int j) {
        auto& cr = colrows_[j];
        if (!std::is_sorted(cr.begin(), cr.end())) std::sort(cr.begin(), cr.end());
        cr.erase(std::unique(cr.begin(), cr.end()), cr.end());
        cr.erase(std::remove_if(cr.begin(), cr.end(),
                                [&](int i) { return !row_alive_[i] || find(rows_[i], j) == nullptr; }),
                 cr.end());
        return cr;
    }

    int column_count(int j) { return static_cast<int>(live_rows(j).size()); }

    void fix_column(int j, double v) {
        for (int i : std::vector<int>(live_rows(j))) {
            rhs_[i] -= *find(rows_[i], j) * v;
            erase(rows_[i], j);
        }
        offset_ += c_[j] * v;
        col_alive_[j] = 0;
        post_.push_back({j, true, v, 0.0, {}});
    }

    bool empty_row_ok(int i) const {
        const double tol = 1e-9 * (1.0 + std::abs(rhs_[i]));
        switch (sense_[i]) {
            case Sense::LE: return 0.0 <= rhs_[i] + tol;
            case Sense::GE: return 0.0 >= rhs_[i] - tol;
            case Sense::EQ: return std::abs(rhs_[i]) <= tol;
        }
        return true;
    }

    bool singleton_row(int i) {
        auto [j, a] = rows_[i][0];
        const double v = rhs_[i] / a;
        Sense s = sense_[i];
        if (a < 0.0 && s != Sense::EQ) s = s == Sense::LE ? Sense::GE : Sense::LE;
        if (s == Sense::EQ) {
            lb_[j] = std::max(lb_[j], v);
            ub_[j] = std::min(ub_[j], v);
        } else if (s == Sense::LE) {
            ub_[j] = std::min(ub_[j], v);
        } else {
            lb_[j] = std::max(lb_[j], v);
        }
        const double tol = 1e-9 * (1.0 + std::abs(v));
        if (lb_[j] > ub_[j] + tol) return false;
        if (lb_[j] > ub_[j]) lb_[j] = ub_[j] = 0.5 * (lb_[j] + ub_[j]);
        if (s == Sense::EQ) lb_[j] = ub_[j] = std::clamp(v, lb_[j], ub_[j]);
        row_alive_[i] = 0;
        rows_[i].clear();
        return true;
    }

    // Range of x_j implied by equality row r from the bounds of the other columns.
    bool implied_free(int j, int r, double a) const {
        double smin = 0.0, smax = 0.0;
        for (auto [k, v] : rows_[r]) {
            if (k == j) continue;
            const double lo = v > 0 ? v * lb_[k] : v * ub_[k];
            const double hi = v > 0 ? v * ub_[k] : v * lb_[k];
            smin += lo;
            smax += hi;
        }
        double xlo = a > 0 ? (rhs_[r] - smax) / a : (rhs_[r] - smin) / a;
        double xhi = a > 0 ? (rhs_[r] - smin) / a : (rhs_[r] - smax) / a;
        if (std::isnan(xlo)) xlo = -kInf;
        if (std::isnan(xhi)) xhi = kInf;
        const double tl = 1e-9 * (1.0 + std::abs(lb_[j]));
        const double tu = 1e-9 * (1.0 + std::abs(ub_[j]));
        return (lb_[j] == -kInf || xlo >= lb_[j] - tl) && (ub_[j] == kInf || xhi <= ub_[j] + tu);
    }

    bool try_substitute(int j) {
        const auto rows = live_rows(j);
        int best = -1;
        for (int r : rows) {
            if (sense_[r] != Sense::EQ || rows_[r].size() > 12) continue;
            const double a = *find(rows_[r], j);
            double rmax = 0.0;
            for (auto [k, v] : rows_[r]) rmax = std::max(rmax, std::abs(v));
            if (std::abs(a) < 0.01 * rmax) continue;
            if (!implied_free(j, r, a)) continue;
            if (best < 0 || rows_[r].size() < rows_[best].size()) best = r;
        }
        if (best < 0) return false;
        const int r = best;
        const double a = *find(rows_[r], j);
        std::vector<std::pair<int, double>> rest;
        for (auto [k, v] : rows_[r])
            if (k != j) rest.push_back({k, v});
        for (int i : rows) {
            if (i == r) continue;
            const double f = *find(rows_[i], j) / a;
            erase(rows_[i], j);
            for (auto [k, v] : rest) {
                double* e = find(rows_[i], k);
                if (e) {
                    const double nv = *e - f * v;
                    if (std::abs(nv) <= 1e-13 * (std::abs(*e) + std::abs(f * v))) erase(rows_[i], k);
                    else *e = nv;
                } else {
                    rows_[i].push_back({k, -f * v});
                    colrows_[k].push_back(i);
                }
            }
            rhs_[i] -= f * rhs_[r];
        }
        const double f0 = c_[j] / a;
        if (f0 != 0.0) {
            for (auto [k, v] : rest) c_[k] -= f0 * v;
            offset_ += f0 * rhs_[r];
        }
        post_.push_back({j, false, rhs_[r], a, rest});
        row_alive_[r] = 0;
        rows_[r].clear();
        col_alive_[j] = 0;
        return true;
    }
};

// ---------------------------------------------------------------------------
// Interior point on  min c'x  s.t.  Ax = b,  l <= x <= u
// ---------------------------------------------------------------------------

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vec = Eigen::VectorXd;

struct StdForm {
    int n = 0, m = 0;
    std::vector<std::vector<std::pair<int, double>>> cols;  // (row, value)
    Vec c, b, l, u;
    int n_orig = 0;
    std::vector<int> copy_of;  // for split copies: original column, else -1
};

StdForm to_standard(const LinearProgram& lp, int dense_threshold) {
    StdForm f;
    const int n0 = lp.num_cols();
    int m = lp.num_rows();
    std::vector<std::vector<std::pair<int, double>>> cols(n0);
    for (const auto& e : lp.entries)
        if (e.value != 0.0) cols[e.col].push_back({e.row, e.value});
    std::vector<double> c = lp.c, l = lp.lb, u = lp.ub, b = lp.rhs;
    std::vector<int> copy_of(n0, -1);
    for (int i = 0; i < lp.num_rows(); ++i) {
        if (lp.sense[i] == Sense::EQ) continue;
        cols.push_back({{i, 1.0}});
        c.push_back(0.0);
        l.push_back(lp.sense[i] == Sense::LE ? 0.0 : -kInf);
        u.push_back(lp.sense[i] == Sense::LE ? kInf : 0.0);
        copy_of.push_back(-1);
    }
    const int nbase = static_cast<int>(cols.size());
    const int chunk = std::max(2, dense_threshold / 2);
    for (int j = 0; j < nbase; ++j) {
        if (static_cast<int>(cols[j].size()) <= dense_threshold) continue;
        auto entries = cols[j];
        std::sort(entries.begin(), entries.end());
        cols[j].assign(entries.begin(), entries.begin() + chunk);
        int prev = j;
        for (std::size_t s = chunk; s < entries.size(); s += chunk) {
            const int cj = static_cast<int>(cols.size());
            const std::size_t e = std::min(entries.size(), s + chunk);
            cols.push_back(std::vector<std::pair<int, double>>(entries.begin() + s, entries.begin() + e));
            c.push_back(0.0);
            l.push_back(l[j]);
            u.push_back(u[j]);
            copy_of.push_back(j);
            const int link = m++;
            b.push_back(0.0);
            cols[prev].push_back({link, 1.0});
            cols[cj].push_back({link, -1.0});
            prev = cj;
        }
    }
    f.n = static_cast<int>(cols.size());
    f.m = m;
    f.cols = std::move(cols);
    f.c = Eigen::Map<Vec>(c.data(), f.n);
    f.l = Eigen::Map<Vec>(l.data(), f.n);
    f.u = Eigen::Map<Vec>(u.data(), f.n);
    f.b = Eigen::Map<Vec>(b.data(), f.m);
    f.n_orig = n0;
    f.copy_of = std::move(copy_of);
    return f;
}

class InteriorPoint {
public:
    InteriorPoint(StdForm& f, const IpmOptions& o) : f_(f), opts_(o) {}

    Status run(Vec& x_out, int& iters) {
        scale();
        build_pattern();
        const int n = f_.n;
        hasl_.resize(n);
        hasu_.resize(n);
        for (int j = 0; j < n; ++j) {
            hasl_[j] = std::isfinite(f_.l(j));
            hasu_[j] = std::isfinite(f_.u(j));
        }
        starting_point();
        const double bnorm = f_.b.lpNorm<Eigen::Infinity>();
        const double cnorm = f_.c.lpNorm<Eigen::Infinity>();
        Status st = Status::IterLimit;
        Vec rp, rd, sl(n), su(n), theta(n), dx, dy, dzl, dzu, ax, atdy(n);
        double best_merit = kInf;
        Vec bx, by, bzl, bzu;
        int converged_at = -1;
        double best_abs = kInf;
        Vec cx, cy, czl, czu;
        for (iters = 0; iters < opts_.max_iters; ++iters) {
            ax = mul_a(x_);
            rp = f_.b - ax;
            rd = f_.c - mul_at(y_) - zl_ + zu_;
            double comp = 0.0;
            int ncomp = 0;
            for (int j = 0; j < n; ++j) {
                sl(j) = hasl_[j] ? x_(j) - f_.l(j) : 1.0;
                su(j) = hasu_[j] ? f_.u(j) - x_(j) : 1.0;
                if (hasl_[j]) comp += sl(j) * zl_(j), ++ncomp;
                if (hasu_[j]) comp += su(j) * zu_(j), ++ncomp;
            }
            const double mu = ncomp > 0 ? comp / ncomp : 0.0;
            double pobj = f_.c.dot(x_);
            double dobj = f_.b.dot(y_);
            for (int j = 0; j < n; ++j) {
                if (hasl_[j]) dobj += f_.l(j) * zl_(j);
                if (hasu_[j]) dobj -= f_.u(j) * zu_(j);
            }
            const double pres = rp.lpNorm<Eigen::Infinity>() / (1.0 + bnorm);
            const double dres = rd.lpNorm<Eigen::Infinity>() / (1.0 + cnorm);
            const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
            const double merit = std::max({1e2 * pres, dres, gap});
            if (merit < best_merit) {
                best_merit = merit;
                bx = x_, by = y_, bzl = zl_, bzu = zu_;
            }
            if (pres <= 1e-2 * opts_.tol && dres <= opts_.tol && gap <= opts_.tol) {
                const double pabs = rp.cwiseQuotient(rowscale_).lpNorm<Eigen::Infinity>();
                if (pabs < best_abs) {
                    best_abs = pabs;
                    cx = x_, cy = y_, czl = zl_, czu = zu_;
                }
                if (converged_at < 0) converged_at = iters;
                if (pabs <= opts_.abs_primal_tol || iters - converged_at >= opts_.polish_iters) break;
            }
            const double xn = x_.lpNorm<Eigen::Infinity>();
            const double yn = y_.lpNorm<Eigen::Infinity>();
            if (!std::isfinite(xn) || !std::isfinite(yn)) break;
            if (iters > 20 && yn > 1e12 * (1.0 + cnorm) && pres > 1e-6) {
                st = Status::Infeasible;
                break;
            }
            if (iters > 20 && xn > 1e12 * (1.0 + bnorm) && dres > 1e-6) {
                st = Status::Unbounded;
                break;
            }

            for (int j = 0; j < n; ++j) {
                double t = reg_p_;
                if (hasl_[j]) t += zl_(j) / sl(j);
                if (hasu_[j]) t += zu_(j) / su(j);
                theta(j) = 1.0 / t;
            }
            if (!factor(theta)) {
                if (pres > 1e-6) st = Status::Infeasible;
                break;
            }

            // predictor
            Vec rcl(n), rcu(n);
            for (int j = 0; j < n; ++j) {
                rcl(j) = hasl_[j] ? -sl(j) * zl_(j) : 0.0;
                rcu(j) = hasu_[j] ? -su(j) * zu_(j) : 0.0;
            }
            newton(rp, rd, sl, su, theta, rcl, rcu, dx, dy, dzl, dzu);
            double ap = step_primal(sl, su, dx, 1.0);
            double ad = step_dual(dzl, dzu, 1.0);
            double mu_aff = 0.0;
            for (int j = 0; j < n; ++j) {
                if (hasl_[j]) mu_aff += (sl(j) + ap * dx(j)) * (zl_(j) + ad * dzl(j));
                if (hasu_[j]) mu_aff += (su(j) - ap * dx(j)) * (zu_(j) + ad * dzu(j));
            }
            mu_aff = ncomp > 0 ? mu_aff / ncomp : 0.0;
            const double sigma = mu > 0.0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;

            // corrector
            for (int j = 0; j < n; ++j) {
                rcl(j) = hasl_[j] ? sigma * mu - sl(j) * zl_(j) - dx(j) * dzl(j) : 0.0;
                rcu(j) = hasu_[j] ? sigma * mu - su(j) * zu_(j) + dx(j) * dzu(j) : 0.0;
            }
            newton(rp, rd, sl, su, theta, rcl, rcu, dx, dy, dzl, dzu);
            const double eta = std::max(0.9, 1.0 - 10.0 * mu / (1.0 + std::abs(pobj)));
            ap = step_primal(sl, su, dx, 1.0 / 0.99995) * std::min(eta, 0.99995);
            ad = step_dual(dzl, dzu, 1.0 / 0.99995) * std::min(eta, 0.99995);
            ap = std::min(ap, 1.0);
            ad = std::min(ad, 1.0);
            Vec xn_ = x_ + ap * dx;
            Vec yn_ = y_ + ad * dy;
            Vec zln = zl_ + ad * dzl;
            Vec zun = zu_ + ad * dzu;
            if (!xn_.allFinite() || !yn_.allFinite() || !zln.allFinite() || !zun.allFinite()) {
                st = pres > 1e-6 ? Status::Infeasible : Status::IterLimit;
                break;
            }
            x_ = std::move(xn_);
            y_ = std::move(yn_);
            zl_ = std::move(zln);
            zu_ = std::move(zun);
            for (int j = 0; j < n; ++j) {
                if (hasl_[j] && x_(j) <= f_.l(j)) x_(j) = f_.l(j) + 1e-300;
                if (hasu_[j] && x_(j) >= f_.u(j)) x_(j) = f_.u(j) - 1e-300;
            }
        }
        if (converged_at >= 0) {
            x_ = cx, y_ = cy, zl_ = czl, zu_ = czu;
            st = Status::Optimal;
        }
        // Stalled at the precision floor: accept the best iterate if it is close.
        if (st == Status::IterLimit && best_merit <= 1e2 * opts_.tol) {
            x_ = bx, y_ = by, zl_ = bzl, zu_ = bzu;
            st = Status::Optimal;
        }
        x_out = x_.cwiseProduct(colscale_);
        return st;
    }

private:
    StdForm& f_;
    IpmOptions opts_;
    Vec rowscale_, colscale_;
    std::vector<char> hasl_, hasu_;
    Vec x_, y_, zl_, zu_;
    double reg_p_ = 1e-10, reg_d_ = 1e-10;
    SpMat a_, at_, m_;
    // For each column: positions in m_.valuePtr() for its entry pairs and their products.
    std::vector<int> pair_start_;
    std::vector<int> pair_pos_;
    std::vector<double> pair_prod_;
    std::vector<int> diag_pos_;
    Eigen::SimplicialLLT<SpMat, Eigen::Upper, Eigen::NaturalOrdering<int>> llt_;
    std::vector<int> perm_;
    Vec pbuf_;

    Vec solve_m(const Vec& r) {
        const int m = f_.m;
        pbuf_.resize(m);
        for (int i = 0; i < m; ++i) pbuf_(perm_[i]) = r(i);
        llt_.matrixL().solveInPlace(pbuf_);
        llt_.matrixU().solveInPlace(pbuf_);
        Vec out(m);
        for (int i = 0; i < m; ++i) out(i) = pbuf_(perm_[i]);
        return out;
    }
    bool analyzed_ = false;

    void scale() {
        const int n = f_.n, m = f_.m;
        rowscale_ = Vec::Ones(m);
        colscale_ = Vec::Ones(n);
        for (int pass = 0; pass < 10; ++pass) {
            Vec rmax = Vec::Zero(m), cmax = Vec::Zero(n);
            for (int j = 0; j < n; ++j)
                for (auto [i, v] : f_.cols[j]) {
                    const double s = std::abs(v * rowscale_(i) * colscale_(j));
                    rmax(i) = std::max(rmax(i), s);
                    cmax(j) = std::max(cmax(j), s);
                }
            for (int i = 0; i < m; ++i)
                if (rmax(i) > 0) rowscale_(i) /= std::sqrt(rmax(i));
            for (int j = 0; j < n; ++j)
                if (cmax(j) > 0) colscale_(j) /= std::sqrt(cmax(j));
        }
        for (int j = 0; j < n; ++j)
            for (auto& [i, v] : f_.cols[j]) v *= rowscale_(i) * colscale_(j);
        f_.b = f_.b.cwiseProduct(rowscale_);
        f_.c = f_.c.cwiseProduct(colscale_);
        f_.l = f_.l.cwiseQuotient(colscale_);
        f_.u = f_.u.cwiseQuotient(colscale_);
    }

    void build_pattern() {
        const int n = f_.n, m = f_.m;
        std::vector<Eigen::Triplet<double>> trips;
        for (int j = 0; j < n; ++j)
            for (auto [i, v] : f_.cols[j]) trips.emplace_back(i, j, v);
        a_.resize(m, n);
        a_.setFromTriplets(trips.begin(), trips.end());
        a_.makeCompressed();
        at_ = a_.transpose();
        std::vector<Eigen::Triplet<double>> mt;
        for (int i = 0; i < m; ++i) mt.emplace_back(i, i, 0.0);
        for (int j = 0; j < n; ++j) {
            const auto& cj = f_.cols[j];
            for (std::size_t p = 0; p < cj.size(); ++p)
                for (std::size_t q = 0; q < cj.size(); ++q)
                    if (cj[p].first >= cj[q].first) mt.emplace_back(cj[p].first, cj[q].first, 0.0);
        }
        // Fill-reducing order computed once; the normal matrix is then assembled
        // directly in permuted upper form so each factorization skips the twist.
        m_.resize(m, m);
        m_.setFromTriplets(mt.begin(), mt.end());
        {
            SpMat full = m_.selfadjointView<Eigen::Lower>();
            Eigen::AMDOrdering<int> amd;
            Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
            amd(full, pinv);
            perm_.assign(m, 0);
            for (int i = 0; i < m; ++i) perm_[pinv.indices()[i]] = i;
        }
        for (auto& t : mt) {
            const int a = perm_[t.row()], b = perm_[t.col()];
            t = Eigen::Triplet<double>(std::min(a, b), std::max(a, b), 0.0);
        }
        m_.resize(m, m);
        m_.setFromTriplets(mt.begin(), mt.end());
        m_.makeCompressed();
        auto position = [&](int r, int c) {
            if (r > c) std::swap(r, c);
            const int* outer = m_.outerIndexPtr();
            const int* inner = m_.innerIndexPtr();
            const int* lo = inner + outer[c];
            const int* hi = inner + outer[c + 1];
            const int* it = std::lower_bound(lo, hi, r);
            return static_cast<int>(it - inner);
        };
        diag_pos_.resize(m);
        for (int i = 0; i < m; ++i) diag_pos_[i] = position(i, i);
        pair_start_.assign(n + 1, 0);
        for (int j = 0; j < n; ++j) {
            const auto& cj = f_.cols[j];
            pair_start_[j] = static_cast<int>(pair_pos_.size());
            for (std::size_t p = 0; p < cj.size(); ++p)
                for (std::size_t q = 0; q < cj.size(); ++q)
                    if (cj[p].first >= cj[q].first) {
                        pair_pos_.push_back(position(perm_[cj[p].first], perm_[cj[q].first]));
                        pair_prod_.push_back(cj[p].second * cj[q].second);
                    }
        }
        pair_start_[n] = static_cast<int>(pair_pos_.size());
    }

    Vec mul_a(const Vec& x) const { return a_ * x; }
    Vec mul_at(const Vec& y) const { return at_ * y; }

    bool factor(const Vec& theta) {
        double* val = m_.valuePtr();
        for (double reg = reg_d_; reg < 1e-2; reg *= 100.0) {
            std::fill(val, val + m_.nonZeros(), 0.0);
            for (int j = 0; j < f_.n; ++j) {
                const double t = theta(j);
                for (int p = pair_start_[j]; p < pair_start_[j + 1]; ++p) val[pair_pos_[p]] += t * pair_prod_[p];
            }
            double dmax = 0.0;
            for (int i = 0; i < f_.m; ++i) dmax = std::max(dmax, val[diag_pos_[i]]);
            for (int i = 0; i < f_.m; ++i) val[diag_pos_[i]] += reg * std::max(1.0, dmax) * 1e-6 + reg;
            if (!analyzed_) {
                llt_.analyzePattern(m_);
                analyzed_ = true;
            }
            llt_.factorize(m_);
            if (llt_.info() == Eigen::Success) return true;
        }
        return false;
    }

    void newton(const Vec& rp, const Vec& rd, const Vec& sl, const Vec& su, const Vec& theta,
                const Vec& rcl, const Vec& rcu, Vec& dx, Vec& dy, Vec& dzl, Vec& dzu) {
        const int n = f_.n;
        Vec h(n);
        for (int j = 0; j < n; ++j) {
            double v = rd(j);
            if (hasl_[j]) v -= rcl(j) / sl(j);
            if (hasu_[j]) v += rcu(j) / su(j);
            h(j) = v;
        }
        Vec rhs = rp + mul_a(theta.cwiseProduct(h));
        dy = solve_m(rhs);
        // one step of iterative refinement against the regularized system
        dx = theta.cwiseProduct(mul_at(dy) - h);
        Vec res = rp - mul_a(dx);
        if (res.lpNorm<Eigen::Infinity>() > 1e-10 * (1.0 + rp.lpNorm<Eigen::Infinity>())) {
            Vec corr = solve_m(res);
            dy += corr;
            dx = theta.cwiseProduct(mul_at(dy) - h);
        }
        dzl.resize(n);
        dzu.resize(n);
        for (int j = 0; j < n; ++j) {
            dzl(j) = hasl_[j] ? (rcl(j) - zl_(j) * dx(j)) / sl(j) : 0.0;
            dzu(j) = hasu_[j] ? (rcu(j) + zu_(j) * dx(j)) / su(j) : 0.0;
        }
    }

    double step_primal(const Vec& sl, const Vec& su, const Vec& dx, double cap) const {
        double a = cap;
        for (int j = 0; j < f_.n; ++j) {
            if (hasl_[j] && dx(j) < 0.0) a = std::min(a, -sl(j) / dx(j));
            if (hasu_[j] && dx(j) > 0.0) a = std::min(a, su(j) / dx(j));
        }
        return a;
    }

    double step_dual(const Vec& dzl, const Vec& dzu, double cap) const {
        double a = cap;
        for (int j = 0; j < f_.n; ++j) {
            if (hasl_[j] && dzl(j) < 0.0) a = std::min(a, -zl_(j) / dzl(j));
            if (hasu_[j] && dzu(j) < 0.0) a = std::min(a, -zu_(j) / dzu(j));
        }
        return a;
    }

    void starting_point() {
        const int n = f_.n;
        Vec ones = Vec::Ones(n);
        factor(ones);
        Vec y0 = solve_m(f_.b);
        Vec x0 = mul_at(y0);
        Vec yc = solve_m(mul_a(f_.c));
        Vec r = f_.c - mul_at(yc);
        x_.resize(n);
        zl_ = Vec::Zero(n);
        zu_ = Vec::Zero(n);
        y_ = yc;
        double xscale = 1.0;
        for (int j = 0; j < n; ++j) xscale = std::max(xscale, std::abs(x0(j)));
        const double margin = std::max(1.0, 1e-2 * xscale);
        double cscale = 1.0;
        for (int j = 0; j < n; ++j) cscale = std::max(cscale, std::abs(r(j)));
        const double zmin = std::max(1.0, 1e-2 * cscale);
        for (int j = 0; j < n; ++j) {
            double v = x0(j);
            const double l = f_.l(j), u = f_.u(j);
            if (hasl_[j] && hasu_[j]) {
                const double w = u - l;
                const double d = std::min(0.5 * w, margin);
                v = std::clamp(v, l + d, u - d);
                if (w <= 0.0) v = l;
            } else if (hasl_[j]) {
                v = std::max(v, l + margin);
            } else if (hasu_[j]) {
                v = std::min(v, u - margin);
            }
            x_(j) = v;
            if (hasl_[j]) zl_(j) = std::max(r(j), 0.0) + zmin;
            if (hasu_[j]) zu_(j) = std::max(-r(j), 0.0) + zmin;
        }
    }
};

LpSolution trivial_solve(const LinearProgram& lp) {
    LpSolution s;
    s.primal.assign(lp.num_cols(), 0.0);
    for (int j = 0; j < lp.num_cols(); ++j) {
        double v;
        if (lp.c[j] > 0.0) v = lp.lb[j];
        else if (lp.c[j] < 0.0) v = lp.ub[j];
        else v = std::isfinite(lp.lb[j]) ? lp.lb[j] : (std::isfinite(lp.ub[j]) ? lp.ub[j] : 0.0);
        if (!std::isfinite(v)) {
            s.status = Status::Unbounded;
            return s;
        }
        s.primal[j] = v;
    }
    s.status = Status::Optimal;
    return s;
}

}  // namespace

LpSolution solve_ipm(const LinearProgram& lp, const IpmOptions& opts) {
    lp.validate();
    LpSolution sol;
    Presolver pre(lp);
    LinearProgram red;
    std::vector<int> col_map;
    if (opts.presolve) {
        if (!pre.run()) {
            sol.status = Status::Infeasible;
            sol.primal.assign(lp.num_cols(), 0.0);
            return sol;
        }
        if (pre.unbounded()) {
            sol.status = Status::Unbounded;
            sol.primal.assign(lp.num_cols(), 0.0);
            return sol;
        }
        red = pre.reduced(col_map);
    } else {
        red = lp;
        col_map.resize(lp.num_cols());
        std::iota(col_map.begin(), col_map.end(), 0);
    }

    std::vector<double> xr(red.num_cols(), 0.0);
    Status st;
    int iters = 0;
    if (red.num_rows() == 0) {
        auto t = trivial_solve(red);
        st = t.status;
        xr = t.primal;
    } else {
        StdForm f = to_standard(red, opts.dense_column_threshold);
        InteriorPoint ip(f, opts);
        Vec x;
        st = ip.run(x, iters);
        for (int j = 0; j < red.num_cols(); ++j) xr[j] = std::clamp(x(j), red.lb[j], red.ub[j]);
    }
    sol.status = st;
    sol.iterations = iters;
    sol.primal.assign(lp.num_cols(), 0.0);
    for (int j = 0; j < lp.num_cols(); ++j)
        if (col_map[j] >= 0) sol.primal[j] = xr[col_map[j]];
    if (opts.presolve) pre.postsolve(sol.primal);
    sol.objective = objective_value(lp, sol.primal);
    return sol;
}

}  // namespace hvac::lp
