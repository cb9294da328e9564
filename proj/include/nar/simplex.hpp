#pragma once

#include <nar/rational.hpp>

#include <variant>
#include <vector>

namespace nar {

enum class Sense { LE, EQ, GE };
enum class VarBound { NonNegative, Free };

/// maximize objective·x  subject to  constraints x (sense) rhs,
/// with per-variable lower bounds (0 or none).
struct LinearProgram {
    RatVector objective;
    RatMatrix constraints;
    std::vector<Sense> senses;
    RatVector rhs;
    std::vector<VarBound> bounds;
};

struct LPOptimal {
    Rational value;
    RatVector point;
};
struct LPInfeasible {};
struct LPUnbounded {};
using LPOutcome = std::variant<LPOptimal, LPInfeasible, LPUnbounded>;

inline bool lp_is_optimal(const LPOutcome& o) { return std::holds_alternative<LPOptimal>(o); }
inline const LPOptimal& lp_optimal(const LPOutcome& o) { return std::get<LPOptimal>(o); }

namespace detail {

// Dense two-phase primal simplex over exact rationals.
// Anti-cycling: Bland's rule, lowest-index entering and leaving.
class SimplexTableau {
  public:
    // n columns of structural+slack variables, then artificials.
    int ncols = 0;
    int nart = 0;
    std::vector<RatVector> rows;  // each of size ncols + nart + 1 (rhs last)
    std::vector<int> basis;

    int width() const { return ncols + nart + 1; }

    void pivot(int r, int c) {
        RatVector& pr = rows[r];
        Rational p = pr[c];
        for (auto& x : pr) x /= p;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<int>(i) == r || rows[i][c] == 0) continue;
            Rational f = rows[i][c];
            for (int j = 0; j < width(); ++j) rows[i][j] -= f * pr[j];
        }
        basis[r] = c;
    }

    // Runs simplex for maximize cost·(all columns); cost has width()-1 entries.
    // allowed[j] marks columns eligible to enter. Returns false on unbounded.
    bool run(const RatVector& cost, const std::vector<bool>& allowed, Rational& value) {
        const int w = width();
        RatVector d(w, Rational(0));  // reduced costs + objective value in last slot
        for (int j = 0; j < w - 1; ++j) d[j] = -cost[j];
        for (size_t r = 0; r < rows.size(); ++r) {
            const Rational& cb = cost[basis[r]];
            if (cb == 0) continue;
            for (int j = 0; j < w; ++j) d[j] += cb * rows[r][j];
        }
        for (;;) {
            int enter = -1;
            for (int j = 0; j < w - 1; ++j) {
                if (!allowed[j]) continue;
                if (d[j] < 0) { enter = j; break; }
            }
            if (enter < 0) break;
            int leave = -1;
            Rational best;
            for (size_t r = 0; r < rows.size(); ++r) {
                const Rational& a = rows[r][enter];
                if (a <= 0) continue;
                Rational ratio = rows[r][w - 1] / a;
                if (leave < 0 || ratio < best ||
                    (ratio == best && basis[r] < basis[leave])) {
                    leave = static_cast<int>(r);
                    best = ratio;
                }
            }
            if (leave < 0) return false;  // unbounded
            pivot(leave, enter);
            Rational f = d[enter];
            if (f != 0)
                for (int j = 0; j < w; ++j) d[j] -= f * rows[leave][j];
        }
        value = d[w - 1];
        return true;
    }
};

}  // namespace detail

inline LPOutcome lp_solve(const LinearProgram& lp) {
    const int nvars = static_cast<int>(lp.objective.size());
    const int nrows = lp.constraints.rows;
    if (lp.constraints.cols != nvars || static_cast<int>(lp.senses.size()) != nrows ||
        static_cast<int>(lp.rhs.size()) != nrows ||
        static_cast<int>(lp.bounds.size()) != nvars)
        throw std::invalid_argument("lp_solve: inconsistent dimensions");

    // Column layout: per variable one col (NonNegative) or two (Free: x+ - x-),
    // then one slack/surplus col per inequality row, then artificials.
    std::vector<int> col_of_var(nvars);
    std::vector<int> neg_col_of_var(nvars, -1);
    int ncols = 0;
    for (int v = 0; v < nvars; ++v) {
        col_of_var[v] = ncols++;
        if (lp.bounds[v] == VarBound::Free) neg_col_of_var[v] = ncols++;
    }
    std::vector<int> slack_col(nrows, -1);
    for (int i = 0; i < nrows; ++i)
        if (lp.senses[i] != Sense::EQ) slack_col[i] = ncols++;

    detail::SimplexTableau tab;
    tab.ncols = ncols;

    std::vector<RatVector> raw(nrows, RatVector(static_cast<size_t>(ncols) + 1, Rational(0)));
    for (int i = 0; i < nrows; ++i) {
        for (int v = 0; v < nvars; ++v) {
            const Rational& c = lp.constraints.at(i, v);
            if (c == 0) continue;
            raw[i][col_of_var[v]] = c;
            if (neg_col_of_var[v] >= 0) raw[i][neg_col_of_var[v]] = -c;
        }
        if (lp.senses[i] == Sense::LE) raw[i][slack_col[i]] = 1;
        if (lp.senses[i] == Sense::GE) raw[i][slack_col[i]] = -1;
        raw[i][ncols] = lp.rhs[i];
        if (raw[i][ncols] < 0)
            for (auto& x : raw[i]) x = -x;
    }

    // Basic column per row: reuse a +1 slack when available, else artificial.
    tab.basis.assign(nrows, -1);
    int nart = 0;
    for (int i = 0; i < nrows; ++i) {
        if (slack_col[i] >= 0 && raw[i][slack_col[i]] == 1)
            tab.basis[i] = slack_col[i];
        else
            ++nart;
    }
    tab.nart = nart;
    tab.rows.assign(nrows, RatVector(static_cast<size_t>(tab.width()), Rational(0)));
    int art = ncols;
    for (int i = 0; i < nrows; ++i) {
        for (int j = 0; j < ncols; ++j) tab.rows[i][j] = raw[i][j];
        tab.rows[i][tab.width() - 1] = raw[i][ncols];
        if (tab.basis[i] < 0) {
            tab.rows[i][art] = 1;
            tab.basis[i] = art++;
        }
    }

    std::vector<bool> allowed(tab.width() - 1, true);
    Rational value;

    if (nart > 0) {
        RatVector phase1(static_cast<size_t>(tab.width()) - 1, Rational(0));
        for (int j = ncols; j < ncols + nart; ++j) phase1[j] = -1;
        if (!tab.run(phase1, allowed, value))
            throw std::logic_error("phase-1 unbounded");
        if (value != 0) return LPInfeasible{};
        // Pivot remaining artificials out of the basis; drop redundant rows.
        for (size_t r = 0; r < tab.rows.size();) {
            if (tab.basis[r] < ncols) { ++r; continue; }
            int j = 0;
            while (j < ncols && tab.rows[r][j] == 0) ++j;
            if (j < ncols) {
                tab.pivot(static_cast<int>(r), j);
                ++r;
            } else {
                tab.rows.erase(tab.rows.begin() + static_cast<long>(r));
                tab.basis.erase(tab.basis.begin() + static_cast<long>(r));
            }
        }
        for (int j = ncols; j < ncols + nart; ++j) allowed[j] = false;
    }

    RatVector phase2(static_cast<size_t>(tab.width()) - 1, Rational(0));
    for (int v = 0; v < nvars; ++v) {
        phase2[col_of_var[v]] = lp.objective[v];
        if (neg_col_of_var[v] >= 0) phase2[neg_col_of_var[v]] = -lp.objective[v];
    }
    if (!tab.run(phase2, allowed, value)) return LPUnbounded{};

    RatVector colval(static_cast<size_t>(tab.width()) - 1, Rational(0));
    for (size_t r = 0; r < tab.rows.size(); ++r)
        colval[tab.basis[r]] = tab.rows[r][tab.width() - 1];
    LPOptimal out;
    out.value = value;
    out.point.resize(nvars);
    for (int v = 0; v < nvars; ++v) {
        out.point[v] = colval[col_of_var[v]];
        if (neg_col_of_var[v] >= 0) out.point[v] -= colval[neg_col_of_var[v]];
    }
    return out;
}

// --------------------------------------------------------------- builder

/// Incremental construction of dense LPs; rows default to nonnegative vars.
struct LPBuilder {
    LinearProgram lp;

    explicit LPBuilder(int nvars) {
        lp.objective.assign(nvars, Rational(0));
        lp.bounds.assign(nvars, VarBound::NonNegative);
        lp.constraints = RatMatrix(0, nvars);
    }
    int nvars() const { return static_cast<int>(lp.objective.size()); }
    void set_free(int v) { lp.bounds[v] = VarBound::Free; }
    void set_objective(int v, const Rational& c) { lp.objective[v] = c; }
    void add_row(const RatVector& coeffs, Sense s, const Rational& b) {
        RatMatrix next(lp.constraints.rows + 1, nvars());
        next.a = lp.constraints.a;
        next.a.insert(next.a.end(), coeffs.begin(), coeffs.end());
        lp.constraints = std::move(next);
        lp.senses.push_back(s);
        lp.rhs.push_back(b);
    }
    LPOutcome solve() const { return lp_solve(lp); }
};

/// Lexicographically smallest point of {x >= 0 : Ax = b}; nullopt if empty.
inline std::optional<RatVector> lexmin_nonneg_solution(const RatMatrix& A, const RatVector& b) {
    const int n = A.cols;
    LinearProgram lp;
    lp.objective.assign(n, Rational(0));
    lp.bounds.assign(n, VarBound::NonNegative);
    lp.constraints = A;
    lp.senses.assign(A.rows, Sense::EQ);
    lp.rhs = b;
    RatVector fixed(n);
    for (int j = 0; j < n; ++j) {
        for (int v = 0; v < n; ++v) lp.objective[v] = 0;
        lp.objective[j] = -1;  // maximize -x_j
        LPOutcome out = lp_solve(lp);
        if (!lp_is_optimal(out)) return std::nullopt;
        fixed[j] = lp_optimal(out).point[j];
        RatVector row(n, Rational(0));
        row[j] = 1;
        RatMatrix next(lp.constraints.rows + 1, n);
        next.a = lp.constraints.a;
        next.a.insert(next.a.end(), row.begin(), row.end());
        lp.constraints = std::move(next);
        lp.senses.push_back(Sense::EQ);
        lp.rhs.push_back(fixed[j]);
    }
    return fixed;
}

}  // namespace nar
