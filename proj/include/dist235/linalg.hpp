#ifndef DIST235_LINALG_HPP
#define DIST235_LINALG_HPP

#include <Eigen/Dense>
#include <array>
#include <limits>

namespace dist235 {

struct LstsqResult {
    Eigen::VectorXd x;
    double residual = 0;   // Euclidean norm of A x - b
    double condition = 0;  // sigma_max / sigma_min of A
};

inline LstsqResult lstsq(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    LstsqResult r;
    r.x = svd.solve(b);
    r.residual = (a * r.x - b).norm();
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    r.condition = smin > 0 ? s(0) / smin : std::numeric_limits<double>::infinity();
    return r;
}

inline int numeric_rank(const Eigen::MatrixXd& a, double rel_tol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0) return 0;
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++rank;
    return rank;
}

struct NullspaceResult {
    Eigen::VectorXd vector;          // right singular vector of the smallest singular value
    Eigen::VectorXd singular_values; // descending
    double gap = 0;                  // sigma[n-2] / sigma[n-1]
};

// One-dimensional null space of a tall matrix; gap measures how cleanly the
// smallest singular value separates from the rest.
inline NullspaceResult nullspace(const Eigen::MatrixXd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    NullspaceResult r;
    r.singular_values = svd.singularValues();
    const int n = static_cast<int>(a.cols());
    r.vector = svd.matrixV().col(n - 1);
    const double last = r.singular_values(n - 1);
    r.gap = last > 0 ? r.singular_values(n - 2) / last
                     : std::numeric_limits<double>::infinity();
    return r;
}

struct Signature {
    int positive = 0;
    int negative = 0;
    int zero = 0;
};

inline Signature signature_of(const Eigen::MatrixXd& sym, double rel_tol = 1e-9) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const auto& ev = es.eigenvalues();
    double scale = 0;
    for (int i = 0; i < ev.size(); ++i) scale = std::max(scale, std::abs(ev(i)));
    Signature s;
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i)) <= rel_tol * scale) ++s.zero;
        else if (ev(i) > 0) ++s.positive;
        else ++s.negative;
    }
    return s;
}

} // namespace dist235

#endif
