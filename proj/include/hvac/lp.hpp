#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace hvac::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LE, EQ, GE };
enum class Status { Optimal, Infeasible, Unbounded, IterLimit };
const char* status_name(Status s);

struct Triplet {
    int row;
    int col;
    double value;
};

// min c'x  s.t.  rows (sense, rhs),  lb <= x <= ub.
struct LinearProgram {
    std::vector<double> c;
    std::vector<double> lb;
    std::vector<double> ub;
    std::vector<Sense> sense;
    std::vector<double> rhs;
    std::vector<Triplet> entries;
    double objective_offset = 0.0;

    int num_cols() const { return static_cast<int>(c.size()); }
    int num_rows() const { return static_cast<int>(rhs.size()); }

    int add_col(double cost, double lower, double upper);
    int add_row(Sense s, double rhs_value);
    void add_coef(int row, int col, double value);

    // Throws std::invalid_argument on dimension errors, non-finite coefficients,
    // duplicate entries or crossed bounds.
    void validate() const;
};

struct SolveOptions {
    double tol = 1e-9;
    long max_iters = 0;  // 0: 50 * (rows + cols)
};

struct LpSolution {
    Status status = Status::IterLimit;
    std::vector<double> primal;
    double objective = 0.0;
    long iterations = 0;
};

// Bounded-variable primal simplex (two-phase, Dantzig pricing, Bland's rule after a
// run of degenerate pivots). The reference solver.
LpSolution solve(const LinearProgram& lp, const SolveOptions& opts = {});

struct IpmOptions {
    double tol = 1e-8;
    // Absolute row residual in the caller's units. After the relative test passes,
    // up to polish_iters more iterations are spent trying to reach it.
    double abs_primal_tol = 1e-7;
    int polish_iters = 8;
    int max_iters = 200;
    bool presolve = true;
    int dense_column_threshold = 12;
};

// Mehrotra predictor-corrector interior point on the normal equations, with a small
// presolve (fixed columns, singleton rows, free column substitution) and splitting of
// dense columns. Used for the large MPC programs.
LpSolution solve_ipm(const LinearProgram& lp, const IpmOptions& opts = {});

enum class Backend { Simplex, InteriorPoint };
const char* backend_name(Backend b);
Backend backend_from_name(const std::string& name);
LpSolution solve_with(const LinearProgram& lp, Backend backend);

// Adds plus, minus >= 0 with var = plus - minus and unit cost on each.
std::pair<int, int> add_free_abs(LinearProgram& lp, int var);

double objective_value(const LinearProgram& lp, const std::vector<double>& x);
// max over rows of violation / (1 + |rhs|_inf), and max bound violation.
double max_row_violation(const LinearProgram& lp, const std::vector<double>& x);
double max_bound_violation(const LinearProgram& lp, const std::vector<double>& x);

void write_mps(std::ostream& os, const LinearProgram& lp, const std::string& name = "HVACMPC");

}  // namespace hvac::lp
