#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace entrofv {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fixed sparsity: built once from the coupling list, then values are
// overwritten in place through precomputed slots.
class SparsePattern {
public:
    SparsePattern() = default;
    SparsePattern(Eigen::Index n, const std::vector<std::pair<Eigen::Index, Eigen::Index>>& entries) : m_(n, n) {
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(entries.size() + static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) t.emplace_back(i, i, 0.0);
        for (auto [r, c] : entries) t.emplace_back(r, c, 0.0);
        m_.setFromTriplets(t.begin(), t.end());
        m_.makeCompressed();
    }

    Eigen::Index size() const { return m_.rows(); }

    // position of (row, col) in the value array
    Eigen::Index slot(Eigen::Index row, Eigen::Index col) const {
        const int* begin = m_.innerIndexPtr() + m_.outerIndexPtr()[col];
        const int* end = m_.innerIndexPtr() + m_.outerIndexPtr()[col + 1];
        const int* it = std::lower_bound(begin, end, static_cast<int>(row));
        if (it == end || *it != row)
            throw std::logic_error("entry (" + std::to_string(row) + "," + std::to_string(col) + ") not in pattern");
        return it - m_.innerIndexPtr();
    }

    SparseMatrix zero_matrix() const {
        SparseMatrix a = m_;
        std::fill(a.valuePtr(), a.valuePtr() + a.nonZeros(), 0.0);
        return a;
    }

private:
    SparseMatrix m_;
};

enum class LinearSolverKind { Direct, IterativeWithFallback };

class LinearSolver {
public:
    explicit LinearSolver(LinearSolverKind kind = LinearSolverKind::Direct) : kind_(kind) {}

    Vector solve(const SparseMatrix& a, const Vector& b) {
        if (a.rows() != a.cols() || a.rows() != b.size()) throw std::invalid_argument("linear system dimension mismatch");
        if (kind_ == LinearSolverKind::IterativeWithFallback) {
            Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> it;
            it.setTolerance(1e-14);
            it.compute(a);
            if (it.info() == Eigen::Success) {
                Vector x = it.solve(b);
                if (it.info() == Eigen::Success && x.allFinite() && backward_error(a, x, b) <= 1e-12) {
                    last_backward_error_ = backward_error(a, x, b);
                    return x;
                }
            }
        }
        return direct(a, b);
    }

    double last_backward_error() const { return last_backward_error_; }

    // normwise backward error |Ax - b| / (|A| |x| + |b|) in the infinity norm
    static double backward_error(const SparseMatrix& a, const Vector& x, const Vector& b) {
        Vector r = a * x - b;
        Vector rowsum = Vector::Zero(a.rows());
        for (Eigen::Index k = 0; k < a.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(a, k); it; ++it) rowsum[it.row()] += std::abs(it.value());
        double denom = rowsum.maxCoeff() * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
        return denom > 0 ? r.lpNorm<Eigen::Infinity>() / denom : r.lpNorm<Eigen::Infinity>();
    }

private:
    Vector direct(const SparseMatrix& a, const Vector& b) {
        // symbolic analysis is reused while the pattern stays the same
        if (!analyzed_ || a.rows() != rows_ || a.nonZeros() != nnz_) {
            lu_.analyzePattern(a);
            analyzed_ = true;
            rows_ = a.rows();
            nnz_ = a.nonZeros();
        }
        lu_.factorize(a);
        if (lu_.info() != Eigen::Success) throw SingularMatrixError("sparse LU failed: " + lu_.lastErrorMessage());
        Vector x = lu_.solve(b);
        if (!x.allFinite()) throw SingularMatrixError("sparse LU produced a non-finite solution");
        double err = backward_error(a, x, b);
        if (err > 1e-14) {
            Vector y = x - lu_.solve(Vector(a * x - b));
            double e2 = backward_error(a, y, b);
            if (y.allFinite() && e2 < err) {
                x = std::move(y);
                err = e2;
            }
        }
        last_backward_error_ = err;
        return x;
    }

    LinearSolverKind kind_;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
    bool analyzed_ = false;
    Eigen::Index rows_ = 0, nnz_ = 0;
    double last_backward_error_ = 0.0;
};

inline Vector linear_solve(const SparseMatrix& a, const Vector& b,
                           LinearSolverKind kind = LinearSolverKind::Direct) {
    SparseMatrix c = a;
    c.makeCompressed();
    LinearSolver s(kind);
    return s.solve(c, b);
}

}  // namespace entrofv
