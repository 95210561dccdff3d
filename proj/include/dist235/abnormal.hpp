#ifndef DIST235_ABNORMAL_HPP
#define DIST235_ABNORMAL_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dist235/frame.hpp"
#include "dist235/linalg.hpp"
#include "dist235/vector_field.hpp"

namespace dist235 {

// Point of (D^2)^perp minus (D^3)^perp in the coframe dual to the adapted
// frame: u1 = u2 = u3 = 0 identically on the locus, (u4, u5) != (0, 0).
// Fields on the locus live in the 7 variables (x1..x5, u4, u5).
struct CotangentPoint {
    Point q;
    double u4 = 0, u5 = 0;

    [[nodiscard]] Point coords() const {
        Point p = q;
        p.push_back(u4);
        p.push_back(u5);
        return p;
    }
};

// The vertical field needs 1/u5 or 1/u4; each chart excludes one axis.
enum class Chart { U4, U5 };

inline Chart chart_for(const CotangentPoint& lam) {
    return std::abs(lam.u5) >= std::abs(lam.u4) ? Chart::U5 : Chart::U4;
}

namespace detail {

// Fiber derivative of the quasi-impulse u_j along the lift of X_i, already
// restricted to the locus: only the u4 and u5 terms of sum_k c_{ji}^k u_k
// survive.
inline Expr lift_du(const AdaptedFrame& f, int i, int j) {
    return add(mul(f.c(j, i, 4), variable(5)), mul(f.c(j, i, 5), variable(6)));
}

} // namespace detail

// Characteristic field u4 u2lift - u5 u1lift on the locus. Base components
// are u4 X2 - u5 X1; fiber components follow the Poisson rule
// ulift_i(u_j) = sum_k c_{ji}^k u_k.
inline VectorField build_h_field(const AdaptedFrame& f) {
    const Expr u4 = variable(5), u5 = variable(6);
    std::vector<Expr> comp(7);
    for (int a = 0; a < 5; ++a)
        comp[a] = sub(mul(u4, f.x[1].comp[a]), mul(u5, f.x[0].comp[a]));
    comp[5] = sub(mul(u4, detail::lift_du(f, 2, 4)), mul(u5, detail::lift_du(f, 1, 4)));
    comp[6] = sub(mul(u4, detail::lift_du(f, 2, 5)), mul(u5, detail::lift_du(f, 1, 5)));
    return VectorField(7, std::move(comp));
}

// h(u_j) for j = 1, 2, 3 on the locus. Identical vanishing certifies that the
// fiber lift convention is consistent with the frame's structural functions.
inline std::array<Expr, 3> tangency_defects(const AdaptedFrame& f) {
    const Expr u4 = variable(5), u5 = variable(6);
    std::array<Expr, 3> out;
    for (int j = 1; j <= 3; ++j)
        out[j - 1] =
            sub(mul(u4, detail::lift_du(f, 2, j)), mul(u5, detail::lift_du(f, 1, j)));
    return out;
}

// Vertical field gamma4 d/du4 + gamma5 d/du5 with gamma4 u5 - gamma5 u4 = 1:
// (1/u5, 0) in the U5 chart, (0, -1/u4) in the U4 chart. The two choices
// differ by a multiple of the Euler field, which downstream quotients kill.
inline VectorField eps1_field(Chart chart) {
    std::vector<Expr> comp(7, constant(0));
    if (chart == Chart::U5)
        comp[5] = div(constant(1), variable(6));
    else
        comp[6] = neg(div(constant(1), variable(5)));
    return VectorField(7, std::move(comp));
}

// Generator of the fiber homotheties, restricted to the locus.
inline VectorField euler_field() {
    std::vector<Expr> comp(7, constant(0));
    comp[5] = variable(5);
    comp[6] = variable(6);
    return VectorField(7, std::move(comp));
}

// Iterated brackets w_i = (ad h)^i eps1, built symbolically once per
// (frame, chart) and evaluated at many points. Stateless after construction,
// safe for concurrent eval calls.
class AdChain {
public:
    AdChain(const AdaptedFrame& f, Chart chart, int order) {
        if (order < 0 || order > 7)
            throw std::invalid_argument("ad-power order exceeds the derivative budget of 7");
        const VectorField h = build_h_field(f);
        chain_.reserve(order + 1);
        chain_.push_back(eps1_field(chart));
        for (int i = 1; i <= order; ++i) chain_.push_back(lie_bracket(h, chain_.back()));
    }

    [[nodiscard]] int order() const { return static_cast<int>(chain_.size()) - 1; }

    [[nodiscard]] std::vector<Eigen::VectorXd> eval(const CotangentPoint& lam) const {
        const Point p = lam.coords();
        EvalContext ctx(p); // one context so the chain's shared nodes evaluate once
        std::vector<Eigen::VectorXd> out;
        out.reserve(chain_.size());
        for (const VectorField& w : chain_) {
            Eigen::VectorXd v(7);
            for (int i = 0; i < 7; ++i) v(i) = ctx(w.comp[i]);
            out.push_back(std::move(v));
        }
        return out;
    }

private:
    std::vector<VectorField> chain_;
};

inline std::vector<Eigen::VectorXd> ad_powers(const AdaptedFrame& f, const CotangentPoint& lam,
                                              int n, Chart chart) {
    return AdChain(f, chart, n).eval(lam);
}

// Coefficients of w4 = B0 w0 + B1 w1 + B2 w2 + B3 w3 mod span{h, e}. The
// flow parameter yields the canonical representative, so b3 is a defect that
// must vanish; residual is the least-squares defect outside the span.
struct BCoefficients {
    double b0 = 0, b1 = 0, b2 = 0;
    double b3 = 0;
    double residual = 0;
    double condition = 0;
};

// Decomposition from already-evaluated chain vectors and h value; factored
// out so fiber sampling can reuse one symbolic chain across many covectors.
inline BCoefficients decompose_wchain(const std::vector<Eigen::VectorXd>& w,
                                      const Eigen::VectorXd& hval, const CotangentPoint& lam) {
    if (w.size() < 5)
        throw std::invalid_argument("decomposition needs chain vectors up to order 4");
    Eigen::MatrixXd a(7, 6);
    for (int i = 0; i < 4; ++i) a.col(i) = w[i];
    a.col(4) = hval;
    a.col(5).setZero();
    a(5, 5) = lam.u4;
    a(6, 5) = lam.u5;

    const LstsqResult r = lstsq(a, w[4]);
    if (r.condition > 1e12)
        throw degenerate_error("decomposition system is singular at the given covector");
    BCoefficients b;
    b.b0 = r.x(0);
    b.b1 = r.x(1);
    b.b2 = r.x(2);
    b.b3 = r.x(3);
    b.residual = r.residual;
    b.condition = r.condition;
    return b;
}

inline Eigen::VectorXd eval_field(const VectorField& v, const Point& p) {
    EvalContext ctx(p);
    Eigen::VectorXd out(v.dim);
    for (int i = 0; i < v.dim; ++i) out(i) = ctx(v.comp[i]);
    return out;
}

inline BCoefficients canonical_B(const AdaptedFrame& f, const CotangentPoint& lam, Chart chart) {
    require_235(f, lam.q);
    const std::vector<Eigen::VectorXd> w = ad_powers(f, lam, 4, chart);
    return decompose_wchain(w, eval_field(build_h_field(f), lam.coords()), lam);
}

inline BCoefficients canonical_B(const AdaptedFrame& f, const CotangentPoint& lam) {
    return canonical_B(f, lam, chart_for(lam));
}

// Fixed-step RK4 integration of the characteristic field. steps <= 0 selects
// 1000 steps per unit time (at least one); fixed stepping keeps reports
// byte-reproducible.
inline CotangentPoint flow(const AdaptedFrame& f, const CotangentPoint& lam, double t,
                           int steps = 0) {
    if (steps <= 0) steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) * 1000)));
    const VectorField h = build_h_field(f);
    Point z = lam.coords();
    const double dt = t / steps;

    std::array<std::vector<double>, 4> k;
    Point stage(7);
    auto eval_h = [&](const Point& at) {
        std::vector<double> v = evaluate(h, at);
        for (double c : v)
            if (!std::isfinite(c)) throw eval_error("characteristic flow left the finite domain");
        return v;
    };
    for (int s = 0; s < steps; ++s) {
        k[0] = eval_h(z);
        for (int i = 0; i < 7; ++i) stage[i] = z[i] + 0.5 * dt * k[0][i];
        k[1] = eval_h(stage);
        for (int i = 0; i < 7; ++i) stage[i] = z[i] + 0.5 * dt * k[1][i];
        k[2] = eval_h(stage);
        for (int i = 0; i < 7; ++i) stage[i] = z[i] + dt * k[2][i];
        k[3] = eval_h(stage);
        for (int i = 0; i < 7; ++i)
            z[i] += dt / 6.0 * (k[0][i] + 2 * k[1][i] + 2 * k[2][i] + k[3][i]);
    }
    CotangentPoint out;
    out.q.assign(z.begin(), z.begin() + 5);
    out.u4 = z[5];
    out.u5 = z[6];
    return out;
}

} // namespace dist235

#endif
