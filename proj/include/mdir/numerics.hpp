#pragma once

#include <utility>
#include <vector>

#include "mdir/error.hpp"

namespace mdir {

// Small dense symmetric matrix, kept exactly symmetric in storage.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0.0) {}

    // Validates near-symmetry (max asymmetry <= 1e-12 relative) and stores (A + A^T)/2.
    static SymMatrix from_dense(int dim, const std::vector<double>& row_major);

    int dim() const { return dim_; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
    void set(int i, int j, double v) {
        a_[static_cast<std::size_t>(i) * dim_ + j] = v;
        a_[static_cast<std::size_t>(j) * dim_ + i] = v;
    }
    const std::vector<double>& data() const { return a_; }

private:
    int dim_ = 0;
    std::vector<double> a_;
};

// Eigenvalues descending; vectors stored row-major with column k the
// eigenvector of values[k].
struct EigenDecomp {
    std::vector<double> values;
    std::vector<double> vectors;
    int dim = 0;

    double vec(int i, int k) const { return vectors[static_cast<std::size_t>(i) * dim + k]; }
};

// Cyclic Jacobi rotations; plenty for the m <= 10 matrices used here.
EigenDecomp eigen_sym(const SymMatrix& a);

// Moore-Penrose inverse via the spectral decomposition. Eigenvalues at or
// below dim * eps * max eigenvalue count as zero; the second component is the
// retained count, i.e. the numerical rank.
std::pair<SymMatrix, int> pseudo_inverse(const SymMatrix& a);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

double chi2_cdf(double x, int df);
double chi2_quantile(double p, int df);

// Poisson mixture of central chi-square CDFs, truncated once the remaining
// Poisson mass is below 1e-12.
double noncentral_chi2_cdf(double x, int df, double lambda);

}  // namespace mdir
