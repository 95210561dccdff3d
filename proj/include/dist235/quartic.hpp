#ifndef DIST235_QUARTIC_HPP
#define DIST235_QUARTIC_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dist235/abnormal.hpp"
#include "dist235/frame.hpp"
#include "dist235/linalg.hpp"
#include "dist235/projective_curve.hpp"

namespace dist235 {

// Covector whose characteristic direction is v = v1 X1 + v2 X2 at q:
// (u4, u5) = (v2, -v1) makes the base part of h equal v exactly, tying the
// flow parameter (and hence the degree-4 scale below) to v.
inline CotangentPoint lambda_for_direction(const AdaptedFrame&, const Point& q,
                                           const Eigen::Vector2d& v) {
    if (v(0) == 0 && v(1) == 0)
        throw std::invalid_argument("direction must be nonzero");
    CotangentPoint lam;
    lam.q = q;
    lam.u4 = v(1);
    lam.u5 = -v(0);
    return lam;
}

// Jet of the canonical curve at lam in the quotient of the locus tangent
// space by span{h, e}: the pulled-back derivatives are the bracket powers
// w_m, and the quotient coordinates w.r.t. the classes of w_0..w_3 come from
// expressing each w_m in the basis (w_0, w_1, w_2, w_3, h, e).
inline CurveJet quotient_jet(const AdChain& chain, const VectorField& h,
                             const CotangentPoint& lam) {
    if (chain.order() < 5)
        throw std::invalid_argument("quotient jet needs chain vectors past order 4");
    const std::vector<Eigen::VectorXd> w = chain.eval(lam);

    Eigen::MatrixXd a(7, 6);
    for (int i = 0; i < 4; ++i) a.col(i) = w[i];
    a.col(4) = eval_field(h, lam.coords());
    a.col(5).setZero();
    a(5, 5) = lam.u4;
    a(6, 5) = lam.u5;

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (!(sv(0) / sv(5) < 1e12))
        throw degenerate_error("decomposition system is singular at the given covector");

    CurveJet jet;
    jet.t0 = 0;
    jet.derivs.reserve(w.size());
    for (const Eigen::VectorXd& wm : w)
        jet.derivs.push_back(svd.solve(wm).head(4).eval());
    return jet;
}

// Cartan's quartic through the point reduction: first derivative of the
// cubic invariant of the reduced plane curve, scaled by -1/5. The reduction
// refuses inputs whose cubic invariant does not vanish at the point, which
// certifies the self-adjointness of the quotient dynamics on the fly.
inline double cartan_quartic_at(const CurveJet& jet) {
    if (jet.order() < 7)
        throw std::invalid_argument("quartic evaluation needs a curve jet of order at least 7");
    return -0.2 * w1_derivative(reduce_by_point(jet));
}

// Same quantity through the parent curve's quartic invariant. For a
// self-adjoint fourth-order curve the reduction by a point scales the
// quartic data by 5/21: with parent eps'''' = B eps the reduced curve has
// raw coefficients (t^3/210, -t^2/30, t/5)B, canonicalization shifts them
// to (-t^2/21, 4t/21)B, and the projective tail phi = t - B t^5/2520 adds
// Bt/21, so the derivative of the cubic invariant is (5/21)B while the
// parent quartic invariant is B. Hence -1/5 composes to -1/21.
inline double cartan_quartic_via_w2(const CurveJet& jet) {
    if (jet.order() < 7)
        throw std::invalid_argument("quartic evaluation needs a curve jet of order at least 7");
    return -(1.0 / 21.0) * wilczynski(jet, 2);
}

namespace detail {

inline CurveJet direction_jet(const AdaptedFrame& f, const Point& q, const Eigen::Vector2d& v,
                              int order) {
    require_235(f, q);
    const CotangentPoint lam = lambda_for_direction(f, q, v);
    const AdChain chain(f, chart_for(lam), order);
    return quotient_jet(chain, build_h_field(f), lam);
}

} // namespace detail

inline double cartan_quartic_at(const AdaptedFrame& f, const Point& q,
                                const Eigen::Vector2d& v) {
    return cartan_quartic_at(detail::direction_jet(f, q, v, 7));
}

inline double cartan_quartic_via_w2(const AdaptedFrame& f, const Point& q,
                                    const Eigen::Vector2d& v) {
    return cartan_quartic_via_w2(detail::direction_jet(f, q, v, 7));
}

// a[j] multiplies v1^(4-j) v2^j on D(q) in the basis (X1(q), X2(q)).
struct BinaryQuartic {
    std::array<double, 5> a{};

    [[nodiscard]] double value(double v1, double v2) const {
        double out = 0;
        for (int j = 0; j <= 4; ++j)
            out += a[j] * std::pow(v1, 4 - j) * std::pow(v2, j);
        return out;
    }
};

// Coefficients from point evaluations on five fixed well-spread directions,
// verified against three held-out directions.
inline BinaryQuartic quartic_polynomial(const AdaptedFrame& f, const Point& q) {
    require_235(f, q);
    const VectorField h = build_h_field(f);
    const AdChain chain4(f, Chart::U4, 7);
    const AdChain chain5(f, Chart::U5, 7);
    auto value_at = [&](double psi) {
        const Eigen::Vector2d v(std::cos(psi), std::sin(psi));
        const CotangentPoint lam = lambda_for_direction(f, q, v);
        const AdChain& chain = chart_for(lam) == Chart::U4 ? chain4 : chain5;
        return cartan_quartic_at(quotient_jet(chain, h, lam));
    };
    auto monomials = [](double psi) {
        const double c = std::cos(psi), s = std::sin(psi);
        Eigen::Matrix<double, 1, 5> row;
        for (int j = 0; j <= 4; ++j) row(j) = std::pow(c, 4 - j) * std::pow(s, j);
        return row;
    };

    Eigen::Matrix<double, 5, 5> vand;
    Eigen::Matrix<double, 5, 1> rhs;
    double scale = 1.0;
    for (int m = 0; m < 5; ++m) {
        const double psi = M_PI * (m + 0.5) / 5;
        vand.row(m) = monomials(psi);
        rhs(m) = value_at(psi);
        scale = std::max(scale, std::abs(rhs(m)));
    }
    const Eigen::Matrix<double, 5, 1> coeff = vand.fullPivLu().solve(rhs);

    for (double psi : {0.45, 1.05, 2.2}) {
        const double predicted = monomials(psi) * coeff;
        const double actual = value_at(psi);
        if (std::abs(predicted - actual) > 1e-6 * (scale + std::abs(actual)))
            throw degenerate_error("quartic point evaluations are not a degree-4 polynomial");
    }

    BinaryQuartic out;
    for (int j = 0; j <= 4; ++j) out.a[j] = coeff(j);
    return out;
}

} // namespace dist235

#endif
