#include "wbloc/linalg.hpp"

#include "wbloc/error.hpp"

#include <cmath>
#include <limits>

namespace wbloc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string prefixed(const std::string& context, const std::string& msg)
{
    return context.empty() ? msg : context + ": " + msg;
}

Eigen::MatrixXd pseudo_inverse_solve(const Eigen::MatrixXd& c, const Eigen::MatrixXd& rhs)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double cutoff = kEps * static_cast<double>(c.rows()) * ev.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cutoff) inv(i) = 1.0 / ev(i);
    }
    const Eigen::MatrixXd& v = eig.eigenvectors();
    return v * inv.asDiagonal() * (v.transpose() * rhs);
}

} // namespace

Eigen::MatrixXd efim_reduce(const Eigen::MatrixXd& info, Eigen::Index keep, const ReduceOptions& options)
{
    const Eigen::Index dim = info.rows();
    if (info.cols() != dim || keep < 0 || keep > dim) {
        throw NumericalError(prefixed(options.context, "efim_reduce: bad partition"));
    }
    if (!info.allFinite()) {
        throw NumericalError(prefixed(options.context, "information matrix has non-finite entries"));
    }
    if (!is_symmetric(info)) {
        throw NumericalError(prefixed(options.context, "information matrix is not symmetric"));
    }
    const Eigen::Index m = dim - keep;
    Eigen::MatrixXd a = info.topLeftCorner(keep, keep);
    if (m == 0) return a;

    const Eigen::MatrixXd c = info.bottomRightCorner(m, m);
    const Eigen::MatrixXd b = info.topRightCorner(keep, m);

    // Jacobi scaling makes the singularity test independent of units.
    Eigen::VectorXd scale(m);
    bool zero_diagonal = false;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(c(i, i) > 0.0)) {
            zero_diagonal = true;
            scale(i) = 1.0;
        } else {
            scale(i) = 1.0 / std::sqrt(c(i, i));
        }
    }
    const Eigen::MatrixXd cs = scale.asDiagonal() * c * scale.asDiagonal();
    const Eigen::MatrixXd bs = b * scale.asDiagonal();
    const double tol = kEps * static_cast<double>(m) * cs.diagonal().cwiseAbs().maxCoeff();

    Eigen::MatrixXd reduced;
    bool solved = false;
    if (!zero_diagonal) {
        Eigen::LLT<Eigen::MatrixXd> llt(cs);
        if (llt.info() == Eigen::Success) {
            const Eigen::VectorXd pivots = llt.matrixL().toDenseMatrix().diagonal().cwiseAbs2();
            if (pivots.minCoeff() > tol) {
                reduced = a - bs * llt.solve(bs.transpose());
                solved = true;
            }
        }
        if (!solved) {
            Eigen::LDLT<Eigen::MatrixXd> ldlt(cs);
            if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > tol) {
                reduced = a - bs * ldlt.solve(bs.transpose());
                solved = true;
            }
        }
    }
    if (!solved) {
        if (!options.allow_pseudo_inverse) {
            throw SingularNuisance(prefixed(options.context, "nuisance information block is singular"));
        }
        reduced = a - bs * pseudo_inverse_solve(cs, bs.transpose());
    }
    return 0.5 * (reduced + reduced.transpose());
}

double trace_of_inverse(const Mat2& info)
{
    if (!info.allFinite()) throw NumericalError("position information has non-finite entries");
    const double a = info(0, 0);
    const double d = info(1, 1);
    const double off = 0.5 * (info(0, 1) + info(1, 0));
    const double largest = std::max(std::abs(a), std::abs(d));
    const double det = a * d - off * off;
    // Second Cholesky pivot relative to the largest diagonal entry.
    if (!(largest > 0.0) || !(a > 0.0) || !(d > 0.0) || det <= 2.0 * kEps * largest * largest) {
        throw UnlocalizableGeometry("position information matrix is singular");
    }
    return (a + d) / det;
}

Eigen::MatrixXd select_symmetric(const Eigen::MatrixXd& m, std::span<const Eigen::Index> idx)
{
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) out(i, j) = m(idx[i], idx[j]);
    }
    return out;
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m, double* clipped)
{
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    Eigen::VectorXd ev = eig.eigenvalues();
    double removed = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < 0.0) {
            removed += -ev(i);
            ev(i) = 0.0;
        }
    }
    if (clipped) *clipped = removed;
    if (removed == 0.0) return sym;
    const Eigen::MatrixXd& v = eig.eigenvectors();
    return v * ev.asDiagonal() * v.transpose();
}

bool is_symmetric(const Eigen::MatrixXd& m, double rel_tol)
{
    if (m.rows() != m.cols()) return false;
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_psd(const Eigen::MatrixXd& m, double rel_tol)
{
    if (m.size() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    return ev.minCoeff() >= -rel_tol * scale;
}

} // namespace wbloc
