#ifndef DIST235_PROJECTIVE_CURVE_HPP
#define DIST235_PROJECTIVE_CURVE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dist235/expr.hpp"
#include "dist235/taylor.hpp"

namespace dist235 {

// Jet of a curve representative in R^k at parameter t0: derivs[j] is the j-th
// derivative vector. Projective data never depends on the representative's
// scale, only on these jets.
struct CurveJet {
    double t0 = 0;
    std::vector<Eigen::VectorXd> derivs;

    [[nodiscard]] int k() const { return derivs.empty() ? 0 : static_cast<int>(derivs[0].size()); }
    [[nodiscard]] int order() const { return static_cast<int>(derivs.size()) - 1; }
};

// Jet of a reparameterization t = phi(tau): derivs[m] = phi^(m)(tau0).
struct ReparamJet {
    double tau0 = 0;
    std::vector<double> derivs;
};

// Taylor series (coefficients of (t-t0)^m) of the decomposition coefficients
// B_i in eps^(k) = sum_i B_i eps^(i). Component series carry different
// lengths: the canonicalization correction for B_i uses the (k-1-i)-th
// derivative of f'/f, so low components are trustworthy to fewer orders.
struct DecompJet {
    std::vector<taylor::Scalar> b;

    // Both throw std::out_of_range if the jet order did not determine the
    // requested coefficient; a fabricated zero here would poison invariants.
    [[nodiscard]] double value(int i) const { return b.at(i).at(0); }
    [[nodiscard]] double derivative(int i) const { return b.at(i).at(1); }
    [[nodiscard]] int order(int i) const { return static_cast<int>(b.at(i).size()) - 1; }
};

using QuadricCoeffs = Eigen::Matrix3d;

namespace detail {

inline void require_regular_jet(const CurveJet& jet) {
    const int k = jet.k();
    if (jet.order() + 1 < k) throw std::invalid_argument("jet too short for its dimension");
    Eigen::MatrixXd m(k, k);
    for (int i = 0; i < k; ++i) m.col(i) = jet.derivs[i];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible())
        throw degenerate_error("curve jet is not regular: first k derivatives are dependent");
}

inline taylor::Vec jet_to_series(const CurveJet& jet) {
    taylor::Vec s(jet.derivs.size());
    double fact = 1;
    for (std::size_t j = 0; j < jet.derivs.size(); ++j) {
        if (j > 0) fact *= static_cast<double>(j);
        s[j] = jet.derivs[j] / fact;
    }
    return s;
}

inline CurveJet series_to_jet(double t0, const taylor::Vec& s) {
    CurveJet jet;
    jet.t0 = t0;
    double fact = 1;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (j > 0) fact *= static_cast<double>(j);
        jet.derivs.push_back(s[j] * fact);
    }
    return jet;
}

inline double binom(int n, int r) {
    double v = 1;
    for (int i = 0; i < r; ++i) v = v * (n - i) / (i + 1);
    return v;
}

} // namespace detail

// Series of the coefficients a_i(t) in eps^(k)(t) = sum_i a_i(t) eps^(i)(t),
// to order N-k. The moving-basis matrix is invertible at t0 for regular jets.
inline DecompJet decompose(const CurveJet& jet) {
    detail::require_regular_jet(jet);
    const int k = jet.k();
    const int len = jet.order() - k + 1; // series length for the right-hand side
    const taylor::Vec eps = detail::jet_to_series(jet);

    taylor::Mat m(len, Eigen::MatrixXd(k, k));
    taylor::Vec rhs(len, Eigen::VectorXd(k));
    double lfact = 1;
    for (int l = 0; l < len; ++l) {
        if (l > 0) lfact *= static_cast<double>(l);
        // coefficient of t^l in the series of eps^(col) is derivs[col+l]/l!
        for (int col = 0; col < k; ++col) m[l].col(col) = jet.derivs[col + l] / lfact;
        rhs[l] = jet.derivs[k + l] / lfact;
    }
    taylor::Vec a;
    try {
        a = taylor::solve(m, rhs);
    } catch (const std::domain_error&) {
        throw degenerate_error("curve jet is not regular: first k derivatives are dependent");
    }
    DecompJet d;
    d.b.resize(k);
    for (int i = 0; i < k; ++i) {
        d.b[i].resize(len);
        for (int l = 0; l < len; ++l) d.b[i][l] = a[l](i);
    }
    return d;
}

struct CanonicalCurve {
    CurveJet jet; // canonical representative, derivatives to order min(N, N-k+1)
    DecompJet b;  // B_i series; B_{k-1} is the canonicity defect (should vanish)
};

// Rescale eps -> f eps with f'/f = -a_{k-1}/k, f(t0) = 1, killing the
// e^(k-1) coefficient of e^(k) at every available order. Unique up to the
// constant scale fixed here.
inline CanonicalCurve canonicalize(const CurveJet& jet) {
    const int k = jet.k();
    const DecompJet araw = decompose(jet);
    const int len = static_cast<int>(araw.b[0].size()); // L+1

    const taylor::Scalar g = taylor::scale(araw.b[k - 1], -1.0 / k);
    const taylor::Scalar f = taylor::exp(taylor::integral(g)); // length L+2, f(0)=1

    // Derivatives of f as series, f^(r) has length L+2-r.
    std::vector<taylor::Scalar> fd{f};
    for (int r = 1; r <= k; ++r) fd.push_back(taylor::derivative(fd.back()));

    // Back-substitute tilde-a from row k-1 downward:
    //   sum_j tilde-a_j * C(j,i) f^(j-i) = C(k,i) f^(k-i) + f a_i.
    std::vector<taylor::Scalar> at(k);
    for (int i = k - 1; i >= 0; --i) {
        taylor::Scalar rhsrow = taylor::add(taylor::scale(fd[k - i], detail::binom(k, i)),
                                            taylor::mul(f, araw.b[i]));
        for (int j = i + 1; j <= k - 1; ++j)
            rhsrow = taylor::sub(rhsrow,
                                 taylor::scale(taylor::mul(at[j], fd[j - i]), detail::binom(j, i)));
        at[i] = taylor::div(rhsrow, f);
    }

    CanonicalCurve out;
    out.b.b = std::move(at);

    // Canonical jet by Leibniz: tilde-eps^(j) = sum_m C(j,m) f^(m)(t0) eps^(j-m).
    const int jmax = std::min(jet.order(), len); // f jet available to order L+1
    out.jet.t0 = jet.t0;
    std::vector<double> fjet(jmax + 1, 0.0);
    {
        double fact = 1;
        for (int m = 0; m <= jmax; ++m) {
            if (m > 0) fact *= static_cast<double>(m);
            fjet[m] = m < static_cast<int>(f.size()) ? f[m] * fact : 0.0;
        }
    }
    for (int j = 0; j <= jmax; ++j) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
        for (int m = 0; m <= j; ++m) v += detail::binom(j, m) * fjet[m] * jet.derivs[j - m];
        out.jet.derivs.push_back(v);
    }
    return out;
}

// Quotient of the curve by its own point l = R eps(t0): the smooth
// representative of the reduced curve has jets
//   tilde-eps^(j)(t0) = P(eps^(j+1)(t0)) / (j+1)
// where P maps onto the chosen complement's coordinates. Defaults to the
// complement spanned by the remaining jet vectors; any complement gives the
// same projective curve.
inline CurveJet reduce_by_point(const CurveJet& jet, const Eigen::MatrixXd* complement = nullptr) {
    detail::require_regular_jet(jet);
    const int k = jet.k();
    Eigen::MatrixXd basis(k, k);
    basis.col(0) = jet.derivs[0];
    if (complement) {
        if (complement->rows() != k || complement->cols() != k - 1)
            throw std::invalid_argument("complement must be k x (k-1)");
        basis.rightCols(k - 1) = *complement;
    } else {
        for (int i = 1; i < k; ++i) basis.col(i) = jet.derivs[i];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (!lu.isInvertible())
        throw degenerate_error("reduction complement is degenerate");

    CurveJet out;
    out.t0 = jet.t0;
    for (int j = 0; j + 1 <= jet.order(); ++j) {
        const Eigen::VectorXd c = lu.solve(jet.derivs[j + 1]);
        out.derivs.push_back(c.tail(k - 1) / static_cast<double>(j + 1));
    }
    return out;
}

// eps(phi(tau)) as a jet in tau; phi must hit the jet's base point.
inline CurveJet reparameterize(const CurveJet& jet, const ReparamJet& phi) {
    if (phi.derivs.empty() || std::abs(phi.derivs[0] - jet.t0) > 1e-12)
        throw std::invalid_argument("reparameterization must map tau0 to the jet base point");
    if (phi.derivs.size() < 2 || phi.derivs[1] == 0.0)
        throw std::invalid_argument("reparameterization must have nonzero first derivative");
    taylor::Scalar inner(phi.derivs.size());
    double fact = 1;
    for (std::size_t m = 0; m < phi.derivs.size(); ++m) {
        if (m > 0) fact *= static_cast<double>(m);
        inner[m] = phi.derivs[m] / fact;
    }
    inner[0] = 0; // centered: phi(tau0+s) - t0
    const taylor::Vec out = taylor::compose(detail::jet_to_series(jet), inner);
    CurveJet r = detail::series_to_jet(jet.t0, out);
    r.t0 = jet.t0; // parameter origin is tau0; base point unchanged
    return r;
}

// Affine chart of a curve in P^2 centered at its own point: coordinates of
// xi(t) in the basis (xi(t0), 2 xi'(t0), 3 xi''(t0)) give homogeneous
// (c0, c1, c2); the affine jet (y1, y2) = (c1/c0, c2/c0) then satisfies the
// contact normalization y1' = 1/2, y2' = 0, y1'' = 0, y2'' = 1/3 at t0.
inline CurveJet plane_affine_jet(const CurveJet& jet) {
    if (jet.k() != 3) throw std::invalid_argument("plane_affine_jet expects a curve jet in R^3");
    detail::require_regular_jet(jet);
    Eigen::Matrix3d basis;
    basis.col(0) = jet.derivs[0];
    basis.col(1) = 2.0 * jet.derivs[1];
    basis.col(2) = 3.0 * jet.derivs[2];
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(basis);
    const std::size_t len = jet.derivs.size();
    taylor::Scalar c0(len), c1(len), c2(len);
    double fact = 1;
    for (std::size_t m = 0; m < len; ++m) {
        if (m > 0) fact *= static_cast<double>(m);
        const Eigen::Vector3d c = lu.solve(jet.derivs[m] / fact);
        c0[m] = c(0);
        c1[m] = c(1);
        c2[m] = c(2);
    }
    const taylor::Scalar y1 = taylor::div(c1, c0);
    const taylor::Scalar y2 = taylor::div(c2, c0);
    CurveJet out;
    out.t0 = jet.t0;
    fact = 1;
    for (std::size_t m = 0; m < len; ++m) {
        if (m > 0) fact *= static_cast<double>(m);
        out.derivs.push_back(Eigen::Vector2d(y1[m] * fact, y2[m] * fact));
    }
    return out;
}

struct NormalizedCurve {
    CurveJet jet;   // input curve in the projective parameter
    ReparamJet phi; // tangent to the identity: phi' = 1, phi'' = 0 at tau0
    DecompJet b;    // decomposition series in the new parameter
};

namespace detail {

// tau^m coefficient of phi'^2 B(phi) - c S(phi) for the centered phi series.
inline double schwarz_residual(const taylor::Scalar& bser, const taylor::Scalar& phic,
                               double cconst, int m) {
    const taylor::Scalar dphi = taylor::derivative(phic);
    taylor::Scalar comp = taylor::compose(bser, phic);
    // pad so the product keeps enough terms for coefficient m
    taylor::Scalar dphi2 = taylor::mul(dphi, dphi);
    dphi2.resize(std::max(dphi2.size(), comp.size()), 0.0);
    comp.resize(dphi2.size(), 0.0);
    const taylor::Scalar lhs = taylor::mul(dphi2, comp);
    // S(phi) = s' - s^2 with s = phi'' / (2 phi')
    const taylor::Scalar shalf = taylor::div(taylor::scale(taylor::derivative(dphi), 0.5), dphi);
    const taylor::Scalar schw = taylor::sub(taylor::derivative(shalf), taylor::mul(shalf, shalf));
    const double a = m < static_cast<int>(lhs.size()) ? lhs[m] : 0.0;
    const double b = m < static_cast<int>(schw.size()) ? schw[m] : 0.0;
    return a - cconst * b;
}

} // namespace detail

// Choose the projective parameter tangent to t: solve for phi''', phi'''', ...
// so that the transformed top coefficient
//   Btil_{k-2}(tau) = phi'^2 B_{k-2}(phi(tau)) - (k(k^2-1)/6) S(phi)
// vanishes at orders 0..kill_order. The Schwarzian coefficient k(k^2-1)/6 is
// forced by the rescale-then-reparameterize algebra (1 for k = 2, 4 for
// k = 3); the two-sided reparameterization test pins it for k = 4. Each order
// is linear in the next unknown phi coefficient, so two evaluations solve it.
inline NormalizedCurve projective_normalize(const CurveJet& jet, int kill_order = -1) {
    const int k = jet.k();
    const DecompJet bin = canonicalize(jet).b;
    const taylor::Scalar& btop = bin.b[k - 2];
    const int avail = static_cast<int>(btop.size()) - 1;
    if (kill_order < 0) kill_order = avail;
    if (kill_order > avail)
        throw std::invalid_argument("kill_order exceeds the jet's decomposition order");
    const double cconst = k * (k * k - 1) / 6.0;

    // Centered phi series: phi(tau0+s) - t0 = s + sum_{m>=3} c_m s^m.
    taylor::Scalar phic(static_cast<std::size_t>(jet.order()) + 2, 0.0);
    phic[1] = 1.0;
    for (int m = 0; m <= kill_order; ++m) {
        const std::size_t slot = static_cast<std::size_t>(m) + 3;
        if (slot >= phic.size()) break;
        phic[slot] = 0.0;
        const double r0 = detail::schwarz_residual(btop, phic, cconst, m);
        phic[slot] = 1.0;
        const double r1 = detail::schwarz_residual(btop, phic, cconst, m);
        if (r1 - r0 == 0.0) throw degenerate_error("projective normalization step is singular");
        phic[slot] = -r0 / (r1 - r0);
    }

    NormalizedCurve out;
    out.phi.tau0 = jet.t0;
    out.phi.derivs.resize(phic.size());
    double fact = 1;
    for (std::size_t m = 0; m < phic.size(); ++m) {
        if (m > 0) fact *= static_cast<double>(m);
        out.phi.derivs[m] = phic[m] * fact;
    }
    out.phi.derivs[0] = jet.t0;
    out.jet = reparameterize(jet, out.phi);
    out.b = canonicalize(out.jet).b;
    return out;
}

// General alternating-sum form of the degree-(i+2) invariants, read in the
// normalized projective parameter (experimental; kept in its published shape):
//   W_i = ((i+1)!/(2i+2)!) sum_{j=1..i} (-1)^(j-1)
//         (2i-j+3)! (k-i+j-3)! / ((i+2-j)! j!) * B_{k-3-i+j}^{(j-1)}(0).
// At i = 1 this matches wilczynski() on k <= 4. At i = 2 its B'-weight is
// (k-3)/4, which is not invariant under the Mobius tail of the projective
// parameter; the invariant weight is (k-3)/2 (see wilczynski and its tests).
// The two therefore differ by exactly ((k-3)/4) Btil'_{k-3}(0).
inline double wilczynski_general(const CurveJet& jet, int i) {
    const int k = jet.k();
    if (i < 1 || i > k - 2) throw std::invalid_argument("invariant index out of range [1, k-2]");
    const NormalizedCurve nc = projective_normalize(jet);
    auto factorial = [](int n) {
        double v = 1;
        for (int m = 2; m <= n; ++m) v *= m;
        return v;
    };
    double sum = 0;
    for (int j = 1; j <= i; ++j) {
        const int comp = k - 3 - i + j;
        const taylor::Scalar& s = nc.b.b[comp];
        if (j - 1 >= static_cast<int>(s.size()))
            throw std::invalid_argument("jet order too low for requested invariant");
        const double deriv = s[j - 1] * factorial(j - 1);
        const double coef = factorial(2 * i - j + 3) * factorial(k - i + j - 3) /
                            (factorial(i + 2 - j) * factorial(j));
        sum += (j % 2 == 1 ? 1.0 : -1.0) * coef * deriv;
    }
    return factorial(i + 1) / factorial(2 * i + 2) * sum;
}

// Lowest-weight invariants in the normalized projective parameter, evaluated
// on the unit shift of the incoming parameter at t0:
//   W1 = Btil_{k-3}(0),  W2 = Btil_{k-4}(0) - ((k-3)/2) Btil'_{k-3}(0),
// of degrees 3 and 4 in dt. The W2 weight (k-3)/2 is forced by invariance
// under the residual Mobius freedom of the projective parameter: perturbing
// by phi''(0) = d shifts Btil_{k-4}(0) by (3/2)(k-3) c d and Btil'_{k-3}(0)
// by 3 c d when Btil_{k-3} = c, so only this combination is well defined.
// Higher indices delegate to the general form.
inline double wilczynski(const CurveJet& jet, int i) {
    const int k = jet.k();
    if (i < 1 || i > k - 2) throw std::invalid_argument("invariant index out of range [1, k-2]");
    if (i > 2) return wilczynski_general(jet, i);
    const NormalizedCurve nc = projective_normalize(jet);
    if (i == 1) return nc.b.value(k - 3);
    return nc.b.value(k - 4) - ((k - 3) / 2.0) * nc.b.derivative(k - 3);
}

// For curves in P^2 with W1 = 0 at the point: first derivative of W1 in the
// normalized projective parameter, a degree-4 quantity.
inline double w1_derivative(const CurveJet& jet, double w1_tol = 1e-7) {
    if (jet.k() != 3) throw std::invalid_argument("w1_derivative expects a curve jet in R^3");
    const NormalizedCurve nc = projective_normalize(jet);
    const double w1 = nc.b.value(0);
    const double dw1 = nc.b.derivative(0);
    if (std::abs(w1) > w1_tol * (1.0 + std::abs(dw1)))
        throw degenerate_error("w1_derivative requires the cubic invariant to vanish at the point");
    return dw1;
}

// Unique conic with fourth-order contact at the origin with a plane curve in
// the normalized affine jet (alpha1' = 1/2, alpha2' = 0, alpha1'' = 0,
// alpha2'' = 1/3). Homogeneous coordinates (Y0, Y1, Y2), affine y = Y/Y0:
//   (2/3) y1^2 + 2 a2'''(0) y1 y2
//     - (4 a1'''(0) + 6 a2'''(0)^2 - (3/2) a2''''(0)) y2^2 - y2 = 0.
inline QuadricCoeffs osculating_quadric(const CurveJet& plane_jet) {
    if (plane_jet.k() != 2 || plane_jet.order() < 4)
        throw std::invalid_argument("osculating_quadric expects a plane-curve 4-jet");
    const auto& d = plane_jet.derivs;
    const double tol = 1e-12;
    if (std::abs(d[1](0) - 0.5) > tol || std::abs(d[1](1)) > tol ||
        std::abs(d[2](0)) > tol || std::abs(d[2](1) - 1.0 / 3.0) > tol)
        throw std::invalid_argument("plane-curve jet violates the contact normalization");
    const double a1_3 = d[3](0), a2_3 = d[3](1), a2_4 = d[4](1);
    const double c22 = 4.0 * a1_3 + 6.0 * a2_3 * a2_3 - 1.5 * a2_4;
    QuadricCoeffs q = QuadricCoeffs::Zero();
    q(1, 1) = 2.0 / 3.0;
    q(1, 2) = q(2, 1) = a2_3;
    q(2, 2) = -c22;
    q(0, 2) = q(2, 0) = -0.5;
    return q;
}

// Same conic at a canonical k=4 representative, where the reduced plane jet
// has a2''' = 0, a1''' = B2/4, a2'''' = B2/5 and everything collapses to
// (2/3) Y1^2 - (7/10) B2 Y2^2 - Y0 Y2 = 0.
inline QuadricCoeffs osculating_cone_from_b2(double b2) {
    QuadricCoeffs q = QuadricCoeffs::Zero();
    q(1, 1) = 2.0 / 3.0;
    q(2, 2) = -0.7 * b2;
    q(0, 2) = q(2, 0) = -0.5;
    return q;
}

} // namespace dist235

#endif
