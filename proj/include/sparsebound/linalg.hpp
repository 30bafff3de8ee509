#pragma once

// Small dense linear algebra: row-major matrices, cyclic Jacobi
// eigendecomposition for symmetric matrices, and a reduced SVD built on the
// Gram matrix. Sized for desk-scale problems (dimensions up to a few
// thousand); nothing here calls out to BLAS or LAPACK.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sparsebound/errors.hpp"

namespace sparsebound {

using Vector = std::vector<double>;
using IndexSet = std::vector<std::size_t>;

class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
        detail::require(rows > 0 && cols > 0, "DenseMatrix: dimensions must be positive");
    }

    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        detail::require(rows > 0 && cols > 0, "DenseMatrix: dimensions must be positive");
        detail::require(data_.size() == rows * cols, "DenseMatrix: entry count must equal rows*cols");
        for (double v : data_) {
            detail::require(std::isfinite(v), "DenseMatrix: entries must be finite");
        }
    }

    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
        detail::require(rows.size() > 0 && rows.begin()->size() > 0, "DenseMatrix: dimensions must be positive");
        rows_ = rows.size();
        cols_ = rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            detail::require(r.size() == cols_, "DenseMatrix: ragged initializer");
            for (double v : r) {
                detail::require(std::isfinite(v), "DenseMatrix: entries must be finite");
                data_.push_back(v);
            }
        }
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix I(n, n);
        for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    static DenseMatrix diagonal(std::span<const double> d) {
        DenseMatrix D(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) D(i, i) = d[i];
        return D;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

    std::span<const double> entries() const noexcept { return data_; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

    Vector column(std::size_t j) const {
        Vector c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    DenseMatrix transpose() const {
        if (empty()) return {};
        DenseMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    DenseMatrix scaled(double c) const {
        DenseMatrix s = *this;
        for (double& v : s.data_) v *= c;
        return s;
    }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Eigenpairs of a symmetric matrix, eigenvalues ascending. Column i of
// `eigenvectors` belongs to eigenvalues[i].
struct SymEigen {
    Vector eigenvalues;
    DenseMatrix eigenvectors;
};

// A = U diag(singular_values) V^T with singular values descending. When the
// rank is zero, U and V are empty.
struct ReducedSvd {
    DenseMatrix U;
    Vector singular_values;
    DenseMatrix V;
    std::size_t rank = 0;
};

inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr double kJacobiOffDiagonalTol = 1e-12;
inline constexpr double kSymmetryTol = 1e-10;
// Singular value s is kept iff s > kRankTolerance * s_max.
inline constexpr double kRankTolerance = 1e-10;

// Gram eigenvalues carry absolute error of order dim * eps * lambda_max, which
// is coarser than kRankTolerance^2. Eigenvalues below this floor (relative to
// lambda_max) are indistinguishable from zero.
inline double gram_eigen_floor(std::size_t dim) {
    return 8.0 * static_cast<double>(dim) * std::numeric_limits<double>::epsilon();
}

inline double frobenius_norm_sq(const DenseMatrix& A) {
    double s = 0.0;
    for (double v : A.entries()) s += v * v;
    return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(std::span<const double> a) { return dot(a, a); }

// Columns indexed by T, in ascending index order.
inline DenseMatrix column_submatrix(const DenseMatrix& A, std::span<const std::size_t> T) {
    detail::require(!T.empty(), "column_submatrix: index set must be nonempty");
    IndexSet idx(T.begin(), T.end());
    std::sort(idx.begin(), idx.end());
    detail::require(std::adjacent_find(idx.begin(), idx.end()) == idx.end(),
                    "column_submatrix: duplicate column index");
    detail::require(idx.back() < A.cols(), "column_submatrix: column index out of range");
    DenseMatrix sub(A.rows(), idx.size());
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = A(i, idx[j]);
    return sub;
}

inline DenseMatrix multiply(const DenseMatrix& A, const DenseMatrix& B) {
    detail::require(A.cols() == B.rows(), "multiply: inner dimensions differ");
    DenseMatrix C(A.rows(), B.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t l = 0; l < A.cols(); ++l) {
            const double a = A(i, l);
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < B.cols(); ++j) C(i, j) += a * B(l, j);
        }
    return C;
}

// A^T A (cols x cols).
inline DenseMatrix gram_columns(const DenseMatrix& A) {
    const std::size_t n = A.cols();
    DenseMatrix G(n, n);
    for (std::size_t r = 0; r < A.rows(); ++r) {
        auto row = A.row(r);
        for (std::size_t i = 0; i < n; ++i) {
            if (row[i] == 0.0) continue;
            for (std::size_t j = i; j < n; ++j) G(i, j) += row[i] * row[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) G(i, j) = G(j, i);
    return G;
}

// A A^T (rows x rows).
inline DenseMatrix gram_rows(const DenseMatrix& A) {
    const std::size_t m = A.rows();
    DenseMatrix G(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) G(i, j) = G(j, i) = dot(A.row(i), A.row(j));
    return G;
}

inline Vector matvec(const DenseMatrix& A, std::span<const double> x) {
    detail::require(x.size() == A.cols(), "matvec: dimension mismatch");
    Vector y(A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i) y[i] = dot(A.row(i), x);
    return y;
}

// A^T y.
inline Vector matvec_transposed(const DenseMatrix& A, std::span<const double> y) {
    detail::require(y.size() == A.rows(), "matvec_transposed: dimension mismatch");
    Vector x(A.cols(), 0.0);
    for (std::size_t i = 0; i < A.rows(); ++i) {
        auto row = A.row(i);
        for (std::size_t j = 0; j < A.cols(); ++j) x[j] += row[j] * y[i];
    }
    return x;
}

inline double asymmetry_frobenius(const DenseMatrix& S) {
    double s = 0.0;
    for (std::size_t i = 0; i < S.rows(); ++i)
        for (std::size_t j = 0; j < S.cols(); ++j) {
            const double d = S(i, j) - S(j, i);
            s += d * d;
        }
    return std::sqrt(s);
}

// Full spectrum of a symmetric matrix by cyclic Jacobi rotations. Sweeps stop
// once every off-diagonal magnitude is at most 1e-12 * ||S||_F.
inline SymEigen sym_eigen(const DenseMatrix& S) {
    detail::require(!S.empty() && S.rows() == S.cols(), "sym_eigen: matrix must be square");
    const std::size_t n = S.rows();
    const double fro = std::sqrt(frobenius_norm_sq(S));
    detail::require(asymmetry_frobenius(S) <= kSymmetryTol * fro, "sym_eigen: matrix is not symmetric");

    DenseMatrix a = S;
    DenseMatrix v = DenseMatrix::identity(n);
    const double tol = kJacobiOffDiagonalTol * fro;

    auto off_diagonal_max = [&] {
        double mx = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) mx = std::max(mx, std::abs(a(p, q)));
        return mx;
    };

    bool converged = off_diagonal_max() <= tol;
    for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= tol) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t r = 0; r < n; ++r) {
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    a(r, p) = c * arp - s * arq;
                    a(r, q) = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double apr = a(p, r);
                    const double aqr = a(q, r);
                    a(p, r) = c * apr - s * aqr;
                    a(q, r) = s * apr + c * aqr;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
        }
        converged = off_diagonal_max() <= tol;
    }
    if (!converged) {
        throw numerical_error("sym_eigen: Jacobi iteration did not converge in " +
                              std::to_string(kJacobiMaxSweeps) + " sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    SymEigen out{Vector(n), DenseMatrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = a(order[j], order[j]);
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, j) = v(r, order[j]);
    }
    return out;
}

inline double operator_norm_sym(const DenseMatrix& S) {
    const auto eig = sym_eigen(S);
    return std::max(std::abs(eig.eigenvalues.front()), std::abs(eig.eigenvalues.back()));
}

// Reduced SVD through the eigendecomposition of the smaller Gram matrix.
// Squares the condition number; fine for the well-scaled designs used here.
inline ReducedSvd reduced_svd(const DenseMatrix& A) {
    detail::require(!A.empty(), "reduced_svd: empty matrix");
    ReducedSvd out;
    if (frobenius_norm_sq(A) == 0.0) return out;

    const bool wide = A.rows() <= A.cols();
    const DenseMatrix G = wide ? gram_rows(A) : gram_columns(A);
    const auto eig = sym_eigen(G);
    const std::size_t dim = G.rows();

    const double lambda_max = std::max(eig.eigenvalues.back(), 0.0);
    const double s_max = std::sqrt(lambda_max);
    const double floor = gram_eigen_floor(dim) * lambda_max;

    std::vector<std::size_t> kept;
    for (std::size_t j = dim; j-- > 0;) {
        const double lambda = eig.eigenvalues[j];
        if (lambda > floor && std::sqrt(lambda) > kRankTolerance * s_max) kept.push_back(j);
    }
    out.rank = kept.size();
    if (out.rank == 0) return out;

    out.U = DenseMatrix(A.rows(), out.rank);
    out.V = DenseMatrix(A.cols(), out.rank);
    out.singular_values.resize(out.rank);
    for (std::size_t c = 0; c < out.rank; ++c) {
        const std::size_t j = kept[c];
        const double s = std::sqrt(eig.eigenvalues[j]);
        out.singular_values[c] = s;
        const Vector basis = eig.eigenvectors.column(j);
        const Vector other = wide ? matvec_transposed(A, basis) : matvec(A, basis);
        DenseMatrix& from_eig = wide ? out.U : out.V;
        DenseMatrix& from_map = wide ? out.V : out.U;
        for (std::size_t r = 0; r < basis.size(); ++r) from_eig(r, c) = basis[r];
        for (std::size_t r = 0; r < other.size(); ++r) from_map(r, c) = other[r] / s;
    }
    return out;
}

}  // namespace sparsebound
