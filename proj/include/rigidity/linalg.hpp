#ifndef RIGIDITY_LINALG_HPP
#define RIGIDITY_LINALG_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace rigidity::la {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Orthonormal basis of the column span (thin Q of a Householder QR).
inline MatrixXd orthonormalize(const MatrixXd& A) {
    Eigen::HouseholderQR<MatrixXd> qr(A);
    MatrixXd Q = qr.householderQ() * MatrixXd::Identity(A.rows(), A.cols());
    return Q;
}

/// Largest canonical angle between equal-dimensional subspaces with
/// orthonormal basis matrices A and B (radians).  Computed through the sine,
/// |(I - A A^T) B|, which stays accurate for tiny angles where the cosine
/// formula floors out at sqrt(machine eps).
inline double principal_angle(const MatrixXd& A, const MatrixXd& B) {
    MatrixXd R = B - A * (A.transpose() * B);
    Eigen::JacobiSVD<MatrixXd> svd(R);
    double s = svd.singularValues().maxCoeff();
    return std::asin(std::clamp(s, 0.0, 1.0));
}

inline double operator_norm(const MatrixXd& A) {
    Eigen::JacobiSVD<MatrixXd> svd(A);
    return svd.singularValues().maxCoeff();
}

inline double smallest_singular_value(const MatrixXd& A) {
    Eigen::JacobiSVD<MatrixXd> svd(A);
    return svd.singularValues().minCoeff();
}

/// Defect of invariance of span(B) under M against span(Bnext), as the norm
/// of the component of M*B outside span(Bnext) relative to the smallest
/// stretch of M on span(B).  Bases orthonormal.
inline double invariance_defect(const MatrixXd& M, const MatrixXd& B, const MatrixXd& Bnext) {
    MatrixXd MB = M * B;
    MatrixXd residual = MB - Bnext * (Bnext.transpose() * MB);
    double denom = smallest_singular_value(MB);
    return denom == 0.0 ? std::numeric_limits<double>::infinity() : operator_norm(residual) / denom;
}

} // namespace rigidity::la

#endif
