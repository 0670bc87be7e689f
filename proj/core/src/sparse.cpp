#include "fracpm/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fracpm {

SparseOperator SparseOperator::fromTriplets(std::size_t n, std::vector<Triplet> t,
                                            bool symmetric, double drop_tol) {
    std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseOperator m;
    m.n_ = n;
    m.symmetric_ = symmetric;
    m.row_ptr_.assign(n + 1, 0);

    std::vector<int> cols;
    std::vector<double> vals;
    cols.reserve(t.size());
    vals.reserve(t.size());
    for (std::size_t i = 0; i < t.size();) {
        const int r = t[i].row, c = t[i].col;
        double s = 0.0;
        for (; i < t.size() && t[i].row == r && t[i].col == c; ++i) s += t[i].value;
        cols.push_back(c);
        vals.push_back(s);
        m.row_ptr_[r + 1]++;
    }

    if (drop_tol > 0.0 && !vals.empty()) {
        double vmax = 0.0;
        for (double v : vals) vmax = std::max(vmax, std::abs(v));
        const double cut = drop_tol * vmax;
        std::vector<int> kept_per_row(n, 0);
        std::size_t w = 0;
        std::size_t i = 0;
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t cnt = m.row_ptr_[r + 1];
            for (std::size_t k = 0; k < cnt; ++k, ++i) {
                if (std::abs(vals[i]) > cut) {
                    cols[w] = cols[i];
                    vals[w] = vals[i];
                    ++w;
                    kept_per_row[r]++;
                }
            }
        }
        cols.resize(w);
        vals.resize(w);
        for (std::size_t r = 0; r < n; ++r) m.row_ptr_[r + 1] = kept_per_row[r];
    }

    for (std::size_t r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    m.col_idx_ = std::move(cols);
    m.vals_ = std::move(vals);
    return m;
}

SparseOperator SparseOperator::diagonal(std::vector<double> d) {
    SparseOperator m;
    m.n_ = d.size();
    m.symmetric_ = true;
    m.row_ptr_.resize(m.n_ + 1);
    m.col_idx_.resize(m.n_);
    std::iota(m.row_ptr_.begin(), m.row_ptr_.end(), 0);
    std::iota(m.col_idx_.begin(), m.col_idx_.end(), 0);
    m.vals_ = std::move(d);
    return m;
}

SparseOperator SparseOperator::identity(std::size_t n) {
    return diagonal(std::vector<double>(n, 1.0));
}

void SparseOperator::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[col_idx_[k]];
        y[i] = s;
    }
}

NodalField SparseOperator::apply(const NodalField& x) const {
    NodalField y(n_);
    multiply(x, y);
    return y;
}

double SparseOperator::rowSum(std::size_t i) const {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k];
    return s;
}

double SparseOperator::entry(std::size_t i, std::size_t j) const {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        if (col_idx_[k] == static_cast<int>(j)) return vals_[k];
    return 0.0;
}

std::vector<double> SparseOperator::diagonalEntries() const {
    std::vector<double> d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) d[i] = entry(i, i);
    return d;
}

double SparseOperator::sumAllEntries() const {
    double s = 0.0;
    for (double v : vals_) s += v;
    return s;
}

double SparseOperator::maxAbsEntry() const {
    double s = 0.0;
    for (double v : vals_) s = std::max(s, std::abs(v));
    return s;
}

double SparseOperator::maxAbsRowSum() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += std::abs(vals_[k]);
        m = std::max(m, s);
    }
    return m;
}

SparseOperator SparseOperator::add(const SparseOperator& a, const SparseOperator& b,
                                   double alpha) {
    if (a.n_ != b.n_) throw std::invalid_argument("SparseOperator::add: size mismatch");
    std::vector<Triplet> t;
    t.reserve(a.vals_.size() + b.vals_.size());
    for (std::size_t i = 0; i < a.n_; ++i)
        for (int k = a.row_ptr_[i]; k < a.row_ptr_[i + 1]; ++k)
            t.push_back({static_cast<int>(i), a.col_idx_[k], a.vals_[k]});
    for (std::size_t i = 0; i < b.n_; ++i)
        for (int k = b.row_ptr_[i]; k < b.row_ptr_[i + 1]; ++k)
            t.push_back({static_cast<int>(i), b.col_idx_[k], alpha * b.vals_[k]});
    return fromTriplets(a.n_, std::move(t), a.symmetric_ && b.symmetric_);
}

SparseOperator SparseOperator::scaled(double alpha) const {
    SparseOperator m = *this;
    for (double& v : m.vals_) v *= alpha;
    return m;
}

double SparseOperator::symmetryDefect() const {
    const double scale = maxAbsEntry();
    if (scale == 0.0) return 0.0;
    double defect = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            defect = std::max(defect, std::abs(vals_[k] - entry(col_idx_[k], i)));
    return defect / scale;
}

CgResult cgSolve(const SparseOperator& op, const NodalField& rhs, double tol, int maxiter,
                 const NodalField* x0, const CgProjectors* project) {
    const std::size_t n = op.size();
    if (rhs.size() != n) throw std::invalid_argument("cgSolve: rhs size mismatch");
    if (maxiter <= 0) maxiter = static_cast<int>(10 * n) + 50;

    std::vector<double> inv_diag = op.diagonalEntries();
    for (double& d : inv_diag) d = (d > 0.0) ? 1.0 / d : 1.0;

    NodalField x = x0 ? *x0 : NodalField(n, 0.0);
    NodalField r(n), z(n), p(n), ap(n);

    op.multiply(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
    if (project) project->residual(r);

    const double rhs_norm = std::sqrt(
        std::inner_product(rhs.begin(), rhs.end(), rhs.begin(), 0.0));
    if (rhs_norm == 0.0) return {NodalField(n, 0.0), 0, 0.0};

    auto dot = [](const NodalField& a, const NodalField& b) {
        return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    };

    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    if (project) project->solution(z);
    p = z;
    double rz = dot(r, z);
    double res = std::sqrt(dot(r, r)) / rhs_norm;

    int it = 0;
    while (res > tol && it < maxiter) {
        op.multiply(p, ap);
        const double pap = dot(p, ap);
        if (pap <= 0.0)
            throw SolverError("cgSolve: operator not positive definite on search direction",
                              res, it);
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if (project) project->residual(r);
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        if (project) project->solution(z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        res = std::sqrt(dot(r, r)) / rhs_norm;
        ++it;
    }
    if (res > tol)
        throw SolverError("cgSolve: no convergence after " + std::to_string(it) +
                              " iterations",
                          res, it);
    return {std::move(x), it, res};
}

}  // namespace fracpm
