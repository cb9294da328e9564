#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nar {

// Exact rational scalar. mpq_class keeps values canonical (lowest terms,
// positive denominator) as long as construction goes through the helpers
// below or through arithmetic on already-canonical values.
using Rational = mpq_class;
using RatVector = std::vector<Rational>;

inline Rational rat(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

/// Parses "p/q", "p", or a decimal literal such as "0.25" (converted exactly).
inline Rational parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    const auto dot = text.find('.');
    if (dot == std::string::npos) {
        Rational q;
        if (q.set_str(text, 10) != 0)
            throw std::invalid_argument("bad rational literal: '" + text + "'");
        if (q.get_den() == 0)
            throw std::invalid_argument("zero denominator in '" + text + "'");
        q.canonicalize();
        return q;
    }
    // decimal form: sign? digits '.' digits
    std::string head = text.substr(0, dot);
    std::string frac = text.substr(dot + 1);
    bool negative = false;
    if (!head.empty() && (head[0] == '+' || head[0] == '-')) {
        negative = head[0] == '-';
        head.erase(head.begin());
    }
    if (frac.empty() && head.empty())
        throw std::invalid_argument("bad decimal literal: '" + text + "'");
    for (char c : head + frac)
        if (c < '0' || c > '9')
            throw std::invalid_argument("bad decimal literal: '" + text + "'");
    mpz_class whole = head.empty() ? mpz_class(0) : mpz_class(head, 10);
    mpz_class num = whole;
    mpz_class den = 1;
    for (size_t i = 0; i < frac.size(); ++i) den *= 10;
    num = num * den + (frac.empty() ? mpz_class(0) : mpz_class(frac, 10));
    Rational q(num, den);
    q.canonicalize();
    return negative ? Rational(-q) : q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

// ---------------------------------------------------------------- vectors

inline std::string to_string(const RatVector& v) {
    std::string s = "(";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += v[i].get_str();
    }
    return s + ")";
}

inline Rational dot(const RatVector& a, const RatVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    Rational s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline RatVector add(const RatVector& a, const RatVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("add: dimension mismatch");
    RatVector r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline RatVector sub(const RatVector& a, const RatVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sub: dimension mismatch");
    RatVector r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline RatVector scale(const Rational& c, const RatVector& a) {
    RatVector r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

inline RatVector negate(const RatVector& a) { return scale(-1, a); }

inline bool is_zero(const RatVector& a) {
    for (const auto& x : a)
        if (x != 0) return false;
    return true;
}

inline RatVector unit_vector(int dim, int axis) {
    RatVector e(dim, Rational(0));
    e[axis] = 1;
    return e;
}

inline bool lex_less(const RatVector& a, const RatVector& b) {
    for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return a.size() < b.size();
}

/// Rescales to the unique integer vector with coprime entries and the same
/// direction (orientation preserved). Zero vectors pass through unchanged.
inline RatVector primitive(const RatVector& v) {
    if (is_zero(v)) return v;
    mpz_class den_lcm = 1;
    for (const auto& x : v) mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), x.get_den_mpz_t());
    mpz_class num_gcd = 0;
    std::vector<mpz_class> ints(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        ints[i] = mpz_class(v[i].get_num()) * (den_lcm / mpz_class(v[i].get_den()));
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), ints[i].get_mpz_t());
    }
    RatVector r(v.size());
    for (size_t i = 0; i < v.size(); ++i) r[i] = Rational(ints[i] / num_gcd);
    return r;
}

// ---------------------------------------------------------------- matrices

struct RatMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<Rational> a;  // row-major

    RatMatrix() = default;
    RatMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, Rational(0)) {}

    Rational& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const Rational& at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    RatVector row(int i) const {
        RatVector r(cols);
        for (int j = 0; j < cols; ++j) r[j] = at(i, j);
        return r;
    }
    void set_row(int i, const RatVector& v) {
        for (int j = 0; j < cols; ++j) at(i, j) = v[j];
    }

    static RatMatrix identity(int n) {
        RatMatrix m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }
    static RatMatrix from_rows(const std::vector<RatVector>& rs, int ncols) {
        RatMatrix m(static_cast<int>(rs.size()), ncols);
        for (size_t i = 0; i < rs.size(); ++i) m.set_row(static_cast<int>(i), rs[i]);
        return m;
    }
};

inline RatVector mat_vec(const RatMatrix& m, const RatVector& x) {
    if (static_cast<int>(x.size()) != m.cols) throw std::invalid_argument("mat_vec: dimension mismatch");
    RatVector r(m.rows, Rational(0));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) r[i] += m.at(i, j) * x[j];
    return r;
}

namespace detail {

// Reduced row echelon form, first-nonzero pivoting. Deterministic.
struct Rref {
    RatMatrix mat;
    std::vector<int> pivot_cols;
    int rank = 0;
};

inline Rref rref(RatMatrix m) {
    Rref out;
    int r = 0;
    for (int c = 0; c < m.cols && r < m.rows; ++c) {
        int piv = -1;
        for (int i = r; i < m.rows; ++i)
            if (m.at(i, c) != 0) { piv = i; break; }
        if (piv < 0) continue;
        if (piv != r)
            for (int j = 0; j < m.cols; ++j) swap(m.at(piv, j), m.at(r, j));
        Rational inv = m.at(r, c);
        for (int j = 0; j < m.cols; ++j) m.at(r, j) /= inv;
        for (int i = 0; i < m.rows; ++i) {
            if (i == r || m.at(i, c) == 0) continue;
            Rational f = m.at(i, c);
            for (int j = 0; j < m.cols; ++j) m.at(i, j) -= f * m.at(r, j);
        }
        out.pivot_cols.push_back(c);
        ++r;
    }
    out.rank = r;
    out.mat = std::move(m);
    return out;
}

}  // namespace detail

inline int rank(const RatMatrix& m) { return detail::rref(m).rank; }

/// Basis of {x : Mx = 0}, one vector per free column, canonical order.
inline std::vector<RatVector> nullspace_basis(const RatMatrix& m) {
    detail::Rref rr = detail::rref(m);
    std::vector<bool> is_pivot(m.cols, false);
    for (int c : rr.pivot_cols) is_pivot[c] = true;
    std::vector<RatVector> basis;
    for (int fc = 0; fc < m.cols; ++fc) {
        if (is_pivot[fc]) continue;
        RatVector v(m.cols, Rational(0));
        v[fc] = 1;
        for (size_t p = 0; p < rr.pivot_cols.size(); ++p)
            v[rr.pivot_cols[p]] = -rr.mat.at(static_cast<int>(p), fc);
        basis.push_back(primitive(v));
    }
    return basis;
}

inline std::optional<RatMatrix> try_invert(const RatMatrix& m) {
    if (m.rows != m.cols) return std::nullopt;
    int n = m.rows;
    RatMatrix aug(n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) aug.at(i, j) = m.at(i, j);
        aug.at(i, n + i) = 1;
    }
    detail::Rref rr = detail::rref(std::move(aug));
    if (rr.rank != n) return std::nullopt;
    for (int c : rr.pivot_cols)
        if (c >= n) return std::nullopt;  // a pivot escaped into the identity block
    RatMatrix inv(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) inv.at(i, j) = rr.mat.at(i, n + j);
    return inv;
}

// ------------------------------------------------------- linear systems

/// Exact solution set of Ax = b.
struct SolutionSet {
    enum class Kind { None, Unique, Affine } kind = Kind::None;
    RatVector particular;                // valid unless None
    std::vector<RatVector> null_basis;   // nonempty iff Affine
};

inline SolutionSet solve_linear_system(const RatMatrix& A, const RatVector& b) {
    if (static_cast<int>(b.size()) != A.rows)
        throw std::invalid_argument("solve_linear_system: rows/rhs mismatch");
    RatMatrix aug(A.rows, A.cols + 1);
    for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < A.cols; ++j) aug.at(i, j) = A.at(i, j);
        aug.at(i, A.cols) = b[i];
    }
    detail::Rref rr = detail::rref(std::move(aug));
    SolutionSet out;
    for (int c : rr.pivot_cols)
        if (c == A.cols) return out;  // row [0 ... 0 | 1]: inconsistent
    out.particular.assign(A.cols, Rational(0));
    for (size_t p = 0; p < rr.pivot_cols.size(); ++p)
        out.particular[rr.pivot_cols[p]] = rr.mat.at(static_cast<int>(p), A.cols);
    std::vector<bool> is_pivot(A.cols, false);
    for (int c : rr.pivot_cols) is_pivot[c] = true;
    for (int fc = 0; fc < A.cols; ++fc) {
        if (is_pivot[fc]) continue;
        RatVector v(A.cols, Rational(0));
        v[fc] = 1;
        for (size_t p = 0; p < rr.pivot_cols.size(); ++p)
            v[rr.pivot_cols[p]] = -rr.mat.at(static_cast<int>(p), fc);
        out.null_basis.push_back(v);
    }
    out.kind = out.null_basis.empty() ? SolutionSet::Kind::Unique : SolutionSet::Kind::Affine;
    return out;
}

}  // namespace nar
