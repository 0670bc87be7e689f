#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracpm {

using NodalField = std::vector<double>;

/// Symmetric sparse matrix in compressed row form. Assembled once from
/// triplets with a fixed summation order, then immutable.
class SparseOperator {
public:
    SparseOperator() = default;

    struct Triplet {
        int row, col;
        double value;
    };

    /// Sorts triplets by (row, col) and sums duplicates in that order, so the
    /// result does not depend on insertion order. Entries with |v| below
    /// drop_tol * max|v| are dropped.
    static SparseOperator fromTriplets(std::size_t n, std::vector<Triplet> triplets,
                                       bool symmetric, double drop_tol = 0.0);

    static SparseOperator diagonal(std::vector<double> d);
    static SparseOperator identity(std::size_t n);

    std::size_t size() const { return n_; }
    bool symmetricFlag() const { return symmetric_; }
    std::size_t nonzeroCount() const { return vals_.size(); }

    void multiply(std::span<const double> x, std::span<double> y) const;
    NodalField apply(const NodalField& x) const;

    double rowSum(std::size_t i) const;
    double entry(std::size_t i, std::size_t j) const;  // 0 if absent
    std::vector<double> diagonalEntries() const;
    double sumAllEntries() const;
    double maxAbsEntry() const;

    /// max_i sum_j |a_ij|, used for Gershgorin-style spectral bounds.
    double maxAbsRowSum() const;

    /// C = A + alpha * B (sparsity union). Both operands must share n.
    static SparseOperator add(const SparseOperator& a, const SparseOperator& b,
                              double alpha = 1.0);

    SparseOperator scaled(double alpha) const;

    const std::vector<int>& rowPtr() const { return row_ptr_; }
    const std::vector<int>& colIdx() const { return col_idx_; }
    const std::vector<double>& values() const { return vals_; }

    /// Largest asymmetry |a_ij - a_ji| relative to max|a_ij|.
    double symmetryDefect() const;

private:
    std::size_t n_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> vals_;
    bool symmetric_ = false;
};

/// Thrown when an iterative solve fails; carries the last residual.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

struct CgResult {
    NodalField x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Projector pair for deflated CG. `residual` is the dual projector applied
/// to every residual; `solution` is the primal projector applied to every
/// preconditioned residual. Applying both keeps the iterates confined to the
/// complement of the deflated subspace while the preconditioned system stays
/// symmetric.
struct CgProjectors {
    std::function<void(NodalField&)> residual;
    std::function<void(NodalField&)> solution;
};

/// Jacobi-preconditioned conjugate gradients for SPD operators. Throws
/// SolverError on non-convergence. maxiter <= 0 means 10 * n. When a
/// projector pair is given (deflated PCG), the right-hand side must lie in
/// the range of the dual projector and the returned solution is determined
/// only up to the deflated directions, which the caller reconstructs
/// separately.
CgResult cgSolve(const SparseOperator& op, const NodalField& rhs, double tol = 1e-10,
                 int maxiter = 0, const NodalField* x0 = nullptr,
                 const CgProjectors* project = nullptr);

}  // namespace fracpm
