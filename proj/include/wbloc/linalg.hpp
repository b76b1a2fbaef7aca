#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace wbloc {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

struct ReduceOptions {
    // Opt-in Moore-Penrose fallback when the nuisance block is singular.
    bool allow_pseudo_inverse = false;
    // Prepended to error messages so failures name the offending quantity.
    std::string context;
};

// Equivalent information for the leading `keep` parameters of a symmetric
// PSD information matrix: A - B C^-1 B^T with A the leading block and C the
// trailing nuisance block. Throws SingularNuisance when C is singular to
// working precision unless the pseudo-inverse fallback is enabled.
Eigen::MatrixXd efim_reduce(const Eigen::MatrixXd& info, Eigen::Index keep,
                            const ReduceOptions& options = {});

// Square error bound tr(J^-1) of a 2x2 position information matrix.
// Throws UnlocalizableGeometry when J is singular.
double trace_of_inverse(const Mat2& info);

// Sub-matrix on the given rows and columns (same index list for both).
Eigen::MatrixXd select_symmetric(const Eigen::MatrixXd& m, std::span<const Eigen::Index> idx);

// Nearest PSD matrix in Frobenius norm; `clipped` receives the total
// magnitude of negative eigenvalues that were zeroed.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m, double* clipped = nullptr);

// True when m is symmetric to a relative tolerance of its largest entry.
bool is_symmetric(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

// True when m is PSD, allowing negative eigenvalues down to
// -rel_tol * (largest absolute eigenvalue).
bool is_psd(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

} // namespace wbloc
