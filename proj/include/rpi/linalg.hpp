#pragma once

#include "rpi/errors.hpp"

#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

namespace rpi {

/// Row-major dense matrix. Sizes here are desk scale, so no sparsity.
template <class Real> class DenseMatrix {
  public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = Real(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Real& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Real& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<Real> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const Real> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    bool operator==(const DenseMatrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Real> data_;
};

template <class Real>
std::vector<Real> multiply(const DenseMatrix<Real>& a, std::span<const Real> x) {
    if (a.cols() != x.size()) throw StructuralError("matrix-vector size mismatch");
    std::vector<Real> y(a.rows(), Real(0));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Real acc(0);
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

/**
 * LU factorization with partial pivoting, P A = L U, stored in place.
 *
 * The same code runs on doubles and on exact rationals; with rationals the
 * largest-magnitude pivot is still a valid (nonzero) choice.
 */
template <class Real> class LuFactorization {
  public:
    explicit LuFactorization(DenseMatrix<Real> a) : lu_(std::move(a)), perm_(lu_.rows()) {
        if (lu_.rows() != lu_.cols()) throw StructuralError("LU factorization needs a square matrix");
        const std::size_t n = lu_.rows();
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t pivot = k;
            Real best = magnitude(lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                Real candidate = magnitude(lu_(i, k));
                if (candidate > best) {
                    best = candidate;
                    pivot = i;
                }
            }
            if (best == Real(0)) throw DomainError("singular matrix in LU factorization");
            if (pivot != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(pivot, j));
                std::swap(perm_[k], perm_[pivot]);
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                Real factor = lu_(i, k) / lu_(k, k);
                lu_(i, k) = factor;
                if (factor == Real(0)) continue;
                for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= factor * lu_(k, j);
            }
        }
    }

    std::vector<Real> solve(std::span<const Real> b) const {
        const std::size_t n = lu_.rows();
        if (b.size() != n) throw StructuralError("right-hand side size mismatch");
        std::vector<Real> x(n);
        for (std::size_t i = 0; i < n; ++i) {
            Real acc = b[perm_[i]];
            for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * x[j];
            x[i] = acc;
        }
        for (std::size_t i = n; i-- > 0;) {
            Real acc = x[i];
            for (std::size_t j = i + 1; j < n; ++j) acc -= lu_(i, j) * x[j];
            x[i] = acc / lu_(i, i);
        }
        return x;
    }

  private:
    static Real magnitude(const Real& x) { return x < Real(0) ? Real(-x) : x; }

    DenseMatrix<Real> lu_;
    std::vector<std::size_t> perm_;
};

template <class Real> std::vector<Real> lu_solve(DenseMatrix<Real> a, std::span<const Real> b) {
    return LuFactorization<Real>(std::move(a)).solve(b);
}

} // namespace rpi
