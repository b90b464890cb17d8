#pragma once

// Dense linear algebra helpers for real skew-symmetric matrices and the
// special-orthogonal group they generate.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace floq {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat skew_part(const Mat& m) { return 0.5 * (m - m.transpose()); }

inline double skew_residual(const Mat& m) {
    return (m + m.transpose()).cwiseAbs().maxCoeff();
}

// max |(G^2 + I)_ij|; zero for a pure-state covariance matrix
inline double purity_residual(const Mat& g) {
    Mat r = g * g;
    r.diagonal().array() += 1.0;
    return r.cwiseAbs().maxCoeff();
}

// Canonical form of a real skew-symmetric matrix:
//   A = R * blkdiag([[0, e_m], [-e_m, 0]]) * R^T,  e_m >= 0 ascending.
// Columns (2m, 2m+1) of R span the m-th invariant plane.
struct SkewCanonical {
    Mat frame;  // orthogonal R
    Vec eps;    // one entry per plane, ascending
};

inline SkewCanonical canonical_skew(const Mat& a, double cluster_tol = 1e-9) {
    const int n = static_cast<int>(a.rows());
    if (n % 2 != 0) throw std::invalid_argument("canonical_skew: odd dimension");
    Mat s = -(a * a);  // symmetric PSD, eigenvalues e^2 in pairs
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()));
    if (es.info() != Eigen::Success) throw std::runtime_error("canonical_skew: eigensolver failed");
    Vec lam = es.eigenvalues().cwiseMax(0.0);
    Vec e = lam.cwiseSqrt();  // ascending
    const Mat& q = es.eigenvectors();

    double scale = std::max(1.0, e(n - 1));
    SkewCanonical out;
    out.frame.resize(n, n);
    out.eps.resize(n / 2);

    int col = 0, mode = 0;
    while (col < n) {
        int hi = col;
        while (hi + 1 < n && e(hi + 1) - e(col) <= cluster_tol * scale) ++hi;
        int m = hi - col + 1;  // cluster size, even
        if (m % 2 != 0) {
            // borderline split; widen by one
            ++hi;
            m = hi - col + 1;
        }
        Mat basis = q.middleCols(col, m);
        double eps_c = e.segment(col, m).mean();
        if (eps_c <= cluster_tol * scale) {
            for (int k = 0; k + 1 < m; k += 2) {
                out.frame.col(2 * mode) = basis.col(k);
                out.frame.col(2 * mode + 1) = basis.col(k + 1);
                out.eps(mode++) = 0.0;
            }
        } else {
            // pair x with y = A x / eps inside the cluster space
            Mat used(n, 0);
            for (int k = 0; k < m / 2; ++k) {
                Vec x = basis.col(0);
                for (int c = 0; c < used.cols(); ++c) x -= used.col(c).dot(x) * used.col(c);
                // fall back to the best-conditioned remaining column
                for (int alt = 1; alt < basis.cols() && x.norm() < 0.5; ++alt) {
                    x = basis.col(alt);
                    for (int c = 0; c < used.cols(); ++c) x -= used.col(c).dot(x) * used.col(c);
                }
                x.normalize();
                Vec y = a * x / eps_c;
                for (int c = 0; c < used.cols(); ++c) y -= used.col(c).dot(y) * used.col(c);
                y -= x.dot(y) * x;
                y.normalize();
                out.frame.col(2 * mode) = y;
                out.frame.col(2 * mode + 1) = x;
                out.eps(mode++) = eps_c;
                used.conservativeResize(n, used.cols() + 2);
                used.col(used.cols() - 2) = x;
                used.col(used.cols() - 1) = y;
            }
        }
        col = hi + 1;
    }
    return out;
}

// exp(A t) for skew A, exactly orthogonal by construction
inline Mat expm_skew(const Mat& a, double t = 1.0) {
    SkewCanonical c = canonical_skew(a);
    const int n = static_cast<int>(a.rows());
    Mat d = Mat::Zero(n, n);
    for (int m = 0; m < n / 2; ++m) {
        double th = c.eps(m) * t;
        double co = std::cos(th), si = std::sin(th);
        d(2 * m, 2 * m) = co;
        d(2 * m + 1, 2 * m + 1) = co;
        d(2 * m, 2 * m + 1) = si;
        d(2 * m + 1, 2 * m) = -si;
    }
    return c.frame * d * c.frame.transpose();
}

// Principal logarithm of a special-orthogonal matrix. Throws if a rotation
// angle approaches pi (branch ambiguity).
inline Mat log_special_orthogonal(const Mat& r, double branch_margin = 0.1) {
    const int n = static_cast<int>(r.rows());
    Mat s = 0.5 * (r - r.transpose());
    Mat cmat = 0.5 * (r + r.transpose());
    SkewCanonical c = canonical_skew(s);
    Mat cprime = c.frame.transpose() * cmat * c.frame;
    Mat d = Mat::Zero(n, n);
    for (int m = 0; m < n / 2; ++m) {
        double si = c.eps(m);
        double co = 0.5 * (cprime(2 * m, 2 * m) + cprime(2 * m + 1, 2 * m + 1));
        double th = std::atan2(si, co);
        if (th > M_PI - branch_margin)
            throw std::runtime_error("log_special_orthogonal: rotation angle near pi, principal branch ambiguous");
        d(2 * m, 2 * m + 1) = th;
        d(2 * m + 1, 2 * m) = -th;
    }
    return c.frame * d * c.frame.transpose();
}

// Nearest-orthogonal projection by Newton-Schulz; preserves skew symmetry of
// the input (used to re-purify covariance matrices).
inline void project_orthogonal(Mat& x, int iters = 3) {
    const int n = static_cast<int>(x.rows());
    for (int k = 0; k < iters; ++k) {
        Mat xtx = x.transpose() * x;
        Mat corr = 1.5 * Mat::Identity(n, n) - 0.5 * xtx;
        x = x * corr;
    }
}

struct LineFit {
    double slope = 0, intercept = 0, r2 = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    LineFit f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0;
    for (size_t i = 0; i < n; ++i) {
        double e = y[i] - (f.slope * x[i] + f.intercept);
        ss_res += e * e;
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace floq
