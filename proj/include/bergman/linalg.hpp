#ifndef BERGMAN_LINALG_HPP
#define BERGMAN_LINALG_HPP

#include <cstddef>
#include <vector>

#include "bergman/types.hpp"

namespace bergman {

/// Dense square complex matrix, row-major. Sized for n <= 8.
class CMatrix {
public:
    CMatrix() = default;
    explicit CMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

    static CMatrix identity(std::size_t n);

    std::size_t size() const { return n_; }
    cplx& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    /// xi^* H xi with the convention sum_{jk} H_jk xi_j conj(xi_k).
    cplx form(const CVec& xi) const;
    bool is_hermitian(double tol = 0.0) const;

private:
    std::size_t n_ = 0;
    std::vector<cplx> a_;
};

/// Dense real matrix, row-major.
struct RMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    RMatrix() = default;
    RMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

/// Eigenvalues (ascending) of a real symmetric matrix by cyclic Jacobi
/// rotations; iterates until the off-diagonal Frobenius norm is below tol.
std::vector<double> symmetric_eigenvalues(RMatrix m, double tol = 1e-12);

/// Eigenvalues (ascending) of a Hermitian matrix, via its real 2n x 2n
/// embedding [[A, -B], [B, A]] whose spectrum is that of H doubled.
std::vector<double> hermitian_eigenvalues(const CMatrix& h, double tol = 1e-12);

/// Singular values (descending) of a real matrix.
std::vector<double> singular_values(const RMatrix& m);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r_squared = 0.0;
};

/// Weighted least squares fit of y = intercept + slope * x.
/// Empty weights means unit weights.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& w = {});

}  // namespace bergman

#endif
