#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace cbjj {

/// LU factorization of a complex banded matrix with partial pivoting,
/// LAPACK gbtrf-style band storage.  kl sub- and ku super-diagonals;
/// pivoting lets fill extend to kl+ku above the diagonal.
class BandedLU {
public:
    BandedLU() = default;

    /// ab(kl + ku + i - j, j) = A(i,j); rows [0, kl) are fill workspace and
    /// must be present (ab has 2*kl+ku+1 rows).
    void factor(const Eigen::MatrixXcd& ab, int kl, int ku) {
        ab_ = ab; // same-size assignment reuses the existing allocation
        kl_ = kl;
        ku_ = ku;
        n_ = static_cast<int>(ab_.cols());
        const int kv = kl_ + ku_; // row of the diagonal in storage
        if (ab_.rows() != 2 * kl_ + ku_ + 1)
            throw std::invalid_argument("BandedLU: band storage has wrong row count");
        ipiv_.resize(n_);

        for (int j = 0; j < n_; ++j) {
            const int rows_below = std::min(kl_, n_ - 1 - j);
            // partial pivot within column j
            int p = 0;
            double best = std::abs(ab_(kv, j));
            for (int i = 1; i <= rows_below; ++i) {
                const double v = std::abs(ab_(kv + i, j));
                if (v > best) {
                    best = v;
                    p = i;
                }
            }
            ipiv_[j] = j + p;
            if (best == 0.0) throw std::runtime_error("BandedLU: singular matrix");
            const int ncols = std::min(kv, n_ - 1 - j); // columns j+1 .. j+ncols touched
            if (p != 0) {
                for (int c = 0; c <= ncols; ++c)
                    std::swap(ab_(kv - c, j + c), ab_(kv + p - c, j + c));
            }
            const std::complex<double> piv = ab_(kv, j);
            for (int i = 1; i <= rows_below; ++i) {
                const std::complex<double> m = ab_(kv + i, j) / piv;
                ab_(kv + i, j) = m;
                for (int c = 1; c <= ncols; ++c)
                    ab_(kv + i - c, j + c) -= m * ab_(kv - c, j + c);
            }
        }
    }

    /// In-place solve A x = b.
    void solve(std::complex<double>* b) const {
        const int kv = kl_ + ku_;
        // forward: apply pivots and L
        for (int j = 0; j < n_; ++j) {
            if (ipiv_[j] != j) std::swap(b[j], b[ipiv_[j]]);
            const int rows_below = std::min(kl_, n_ - 1 - j);
            const std::complex<double> bj = b[j];
            for (int i = 1; i <= rows_below; ++i) b[j + i] -= ab_(kv + i, j) * bj;
        }
        // back substitution with U (bandwidth kl+ku above diagonal)
        for (int j = n_ - 1; j >= 0; --j) {
            std::complex<double> s = b[j];
            const int ncols = std::min(kv, n_ - 1 - j);
            for (int c = 1; c <= ncols; ++c) s -= ab_(kv - c, j + c) * b[j + c];
            b[j] = s / ab_(kv, j);
        }
    }

    [[nodiscard]] int size() const { return n_; }

private:
    Eigen::MatrixXcd ab_;
    std::vector<int> ipiv_;
    int n_ = 0, kl_ = 0, ku_ = 0;
};

} // namespace cbjj
