#ifndef DIST235_TAYLOR_HPP
#define DIST235_TAYLOR_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dist235::taylor {

// Truncated univariate Taylor series: c[j] is the coefficient of t^j, so a
// function jet f^{(j)}(0) enters as f^{(j)}(0)/j!. All binary operations
// truncate to the shorter operand.
using Scalar = std::vector<double>;
using Vec = std::vector<Eigen::VectorXd>;
using Mat = std::vector<Eigen::MatrixXd>;

inline std::size_t common(std::size_t a, std::size_t b) { return a < b ? a : b; }

inline Scalar add(const Scalar& a, const Scalar& b) {
    Scalar r(common(a.size(), b.size()));
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = a[j] + b[j];
    return r;
}

inline Scalar sub(const Scalar& a, const Scalar& b) {
    Scalar r(common(a.size(), b.size()));
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = a[j] - b[j];
    return r;
}

inline Scalar mul(const Scalar& a, const Scalar& b) {
    Scalar r(common(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; i + j < r.size() && j < b.size(); ++j)
            if (i < a.size()) r[i + j] += a[i] * b[j];
    return r;
}

inline Scalar scale(Scalar a, double s) {
    for (auto& v : a) v *= s;
    return a;
}

// A truncated series of length n determines only n-1 derivative coefficients,
// so length <= 1 honestly yields the empty series.
inline Scalar derivative(const Scalar& a) {
    if (a.size() <= 1) return {};
    Scalar r(a.size() - 1);
    for (std::size_t j = 0; j + 1 < a.size(); ++j) r[j] = static_cast<double>(j + 1) * a[j + 1];
    return r;
}

inline Scalar integral(const Scalar& a) {
    Scalar r(a.size() + 1, 0.0);
    for (std::size_t j = 0; j < a.size(); ++j) r[j + 1] = a[j] / static_cast<double>(j + 1);
    return r;
}

inline Scalar div(const Scalar& a, const Scalar& b) {
    if (b.empty() || b[0] == 0.0) throw std::domain_error("series division by zero constant term");
    Scalar r(common(a.size(), b.size()), 0.0);
    for (std::size_t n = 0; n < r.size(); ++n) {
        double acc = n < a.size() ? a[n] : 0.0;
        for (std::size_t k = 1; k <= n; ++k)
            if (k < b.size()) acc -= b[k] * r[n - k];
        r[n] = acc / b[0];
    }
    return r;
}

inline Scalar exp(const Scalar& a) {
    Scalar r(a.size(), 0.0);
    if (r.empty()) return r;
    r[0] = std::exp(a[0]);
    for (std::size_t n = 1; n < r.size(); ++n) {
        double acc = 0;
        for (std::size_t k = 1; k <= n; ++k)
            acc += static_cast<double>(k) * a[k] * r[n - k];
        r[n] = acc / static_cast<double>(n);
    }
    return r;
}

// a(b(t)) for b with zero constant term; this is the Faa di Bruno composition
// in coefficient form, evaluated by Horner's scheme on truncated series.
inline Scalar compose(const Scalar& a, const Scalar& b) {
    if (!b.empty() && b[0] != 0.0)
        throw std::domain_error("series composition requires centered inner series");
    const std::size_t n = common(a.size(), b.size());
    Scalar r(n, 0.0);
    if (n == 0) return r;
    for (std::size_t ji = a.size(); ji-- > 0;) {
        r = mul(r, b);
        r.resize(n, 0.0);
        r[0] += a[ji];
    }
    return r;
}

// ----- vector-valued series -----------------------------------------------

inline Vec add(const Vec& a, const Vec& b) {
    Vec r(common(a.size(), b.size()));
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = a[j] + b[j];
    return r;
}

inline Vec mul(const Scalar& a, const Vec& b) {
    if (b.empty()) return {};
    const std::size_t n = common(a.size(), b.size());
    Vec r(n, Eigen::VectorXd::Zero(b[0].size()));
    for (std::size_t i = 0; i < n && i < a.size(); ++i)
        for (std::size_t j = 0; i + j < n; ++j) r[i + j] += a[i] * b[j];
    return r;
}

inline Vec derivative(const Vec& a) {
    if (a.size() <= 1) return {};
    Vec r(a.size() - 1);
    for (std::size_t j = 0; j + 1 < a.size(); ++j) r[j] = static_cast<double>(j + 1) * a[j + 1];
    return r;
}

inline Vec compose(const Vec& a, const Scalar& b) {
    if (!b.empty() && b[0] != 0.0)
        throw std::domain_error("series composition requires centered inner series");
    if (a.empty()) return {};
    const std::size_t n = common(a.size(), b.size());
    Vec r(n, Eigen::VectorXd::Zero(a[0].size()));
    for (std::size_t ji = a.size(); ji-- > 0;) {
        Vec rb(n, Eigen::VectorXd::Zero(a[0].size()));
        for (std::size_t i = 0; i < b.size() && i < n; ++i)
            for (std::size_t j = 0; i + j < n; ++j) rb[i + j] += b[i] * r[j];
        r = std::move(rb);
        r[0] += a[ji];
    }
    return r;
}

// Solve M(t) x(t) = r(t) order by order; M[0] must be invertible.
inline Vec solve(const Mat& m, const Vec& rhs) {
    const std::size_t n = common(m.size(), rhs.size());
    Vec x(n);
    if (n == 0) return x;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m[0]);
    if (!lu.isInvertible())
        throw std::domain_error("leading coefficient matrix is singular");
    for (std::size_t ord = 0; ord < n; ++ord) {
        Eigen::VectorXd acc = rhs[ord];
        for (std::size_t l = 1; l <= ord; ++l)
            if (l < m.size()) acc -= m[l] * x[ord - l];
        x[ord] = lu.solve(acc);
    }
    return x;
}

} // namespace dist235::taylor

#endif
