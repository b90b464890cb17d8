#pragma once

// Pfaffian of a real skew-symmetric matrix via Parlett-Reid tridiagonalization
// with partial pivoting, O(n^3). The log form avoids overflow for large n.

#include "floq/linalg.hpp"

namespace floq {

struct PfaffianLog {
    int sign = 0;        // -1, 0, +1
    double log_abs = 0;  // ln|Pf|, meaningful when sign != 0
    double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

inline PfaffianLog pfaffian_log(Mat m, double skew_tol = 1e-10) {
    const int n = static_cast<int>(m.rows());
    if (n != m.cols() || n % 2 != 0) throw std::invalid_argument("pfaffian: need even square matrix");
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (skew_residual(m) > skew_tol * scale) throw std::invalid_argument("pfaffian: input not skew-symmetric");
    PfaffianLog out;
    out.sign = 1;
    for (int k = 0; k + 1 < n; k += 2) {
        int piv = k + 1;
        double best = std::abs(m(k + 1, k));
        for (int i = k + 2; i < n; ++i) {
            if (std::abs(m(i, k)) > best) {
                best = std::abs(m(i, k));
                piv = i;
            }
        }
        if (best == 0.0) return {0, 0.0};
        if (piv != k + 1) {
            m.row(k + 1).swap(m.row(piv));
            m.col(k + 1).swap(m.col(piv));
            out.sign = -out.sign;
        }
        double a = m(k, k + 1);
        out.sign *= (a < 0) ? -1 : 1;
        out.log_abs += std::log(std::abs(a));
        if (k + 2 < n) {
            int rest = n - k - 2;
            Vec tau = m.row(k).segment(k + 2, rest) / m(k, k + 1);
            Vec col = m.col(k + 1).segment(k + 2, rest);
            m.block(k + 2, k + 2, rest, rest).noalias() += tau * col.transpose();
            m.block(k + 2, k + 2, rest, rest).noalias() -= col * tau.transpose();
        }
    }
    return out;
}

inline double pfaffian(const Mat& m, double skew_tol = 1e-10) {
    return pfaffian_log(m, skew_tol).value();
}

}  // namespace floq
