#ifndef DIST235_CONE_HPP
#define DIST235_CONE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dist235/abnormal.hpp"
#include "dist235/frame.hpp"
#include "dist235/linalg.hpp"
#include "dist235/projective_curve.hpp"

namespace dist235 {

// Symmetric matrix of a quadratic form on T_qM, always written in the
// adapted-frame basis (X_1(q), ..., X_5(q)). Converting to ambient
// coordinates is the congruence M^{-T} Q M^{-1} with M = frame_matrix_at.
using QuadraticForm5 = Eigen::Matrix<double, 5, 5>;

// Forms on the fiber coordinates (u4, u5) whose coefficients are functions
// of the base point.
struct LinearFiberForm {
    Expr c4, c5; // c4 u4 + c5 u5

    [[nodiscard]] double at(const Point& q, double u4, double u5) const {
        return evaluate(c4, q) * u4 + evaluate(c5, q) * u5;
    }
};

struct QuadraticFiberForm {
    Expr c44, c45, c55; // c44 u4^2 + c45 u4 u5 + c55 u5^2

    [[nodiscard]] double at(const Point& q, double u4, double u5) const {
        return evaluate(c44, q) * u4 * u4 + evaluate(c45, q) * u4 * u5 +
               evaluate(c55, q) * u5 * u5;
    }
};

namespace detail {

inline Expr as_expr(const LinearFiberForm& l) {
    return add(mul(l.c4, variable(5)), mul(l.c5, variable(6)));
}

// Coefficient split of an expression that is homogeneous quadratic in the
// fiber variables, by substituting (u4, u5) = (1,0), (0,1), (1,1).
inline QuadraticFiberForm quadratic_coefficients(const Expr& e) {
    const Expr zero = constant(0), one = constant(1);
    auto at = [&](const Expr& a, const Expr& b) {
        return substitute(substitute(e, 5, a), 6, b);
    };
    QuadraticFiberForm f;
    f.c44 = at(one, zero);
    f.c55 = at(zero, one);
    f.c45 = sub(at(one, one), add(f.c44, f.c55));
    return f;
}

inline QuadraticFiberForm product(const LinearFiberForm& a, const LinearFiberForm& b) {
    QuadraticFiberForm f;
    f.c44 = mul(a.c4, b.c4);
    f.c45 = add(mul(a.c4, b.c5), mul(a.c5, b.c4));
    f.c55 = mul(a.c5, b.c5);
    return f;
}

inline QuadraticFiberForm int_combination(
    std::initializer_list<std::pair<int, const QuadraticFiberForm*>> terms) {
    auto comb = [&](Expr QuadraticFiberForm::* m) {
        Expr acc = constant(0);
        for (const auto& [k, t] : terms) acc = add(acc, mul(constant(k), (*t).*m));
        return acc;
    };
    QuadraticFiberForm f;
    f.c44 = comb(&QuadraticFiberForm::c44);
    f.c45 = comb(&QuadraticFiberForm::c45);
    f.c55 = comb(&QuadraticFiberForm::c55);
    return f;
}

} // namespace detail

// The structural-function data of the cone: b, b1 linear and the rest
// quadratic on the fiber. hb and hb1 are the h-derivatives of b and b1.
struct FiberFunctions {
    LinearFiberForm b, b1;
    QuadraticFiberForm alpha3, pi, hb, hb1, q, b2;
};

inline FiberFunctions fiber_functions(const AdaptedFrame& f) {
    FiberFunctions out;
    out.b.c4 = mul(constant(Rational(1, 3)), add(f.c(4, 2, 4), f.c(5, 2, 5)));
    out.b.c5 = mul(constant(Rational(-1, 3)), add(f.c(4, 1, 4), f.c(5, 1, 5)));
    out.b1.c4 = f.c(3, 2, 3);
    out.b1.c5 = neg(f.c(3, 1, 3));

    out.alpha3.c44 = f.c(5, 2, 3);
    out.alpha3.c45 = neg(add(f.c(4, 2, 3), f.c(5, 1, 3)));
    out.alpha3.c55 = f.c(4, 1, 3);

    out.pi.c44 = add(f.c(3, 2, 1), f.c(5, 3, 4));
    out.pi.c45 = add(sub(f.c(3, 2, 2), f.c(3, 1, 1)), sub(f.c(5, 3, 5), f.c(4, 3, 4)));
    out.pi.c55 = neg(add(f.c(3, 1, 2), f.c(4, 3, 5)));

    const VectorField h = build_h_field(f);
    out.hb = detail::quadratic_coefficients(dist235::apply(h, detail::as_expr(out.b)));
    out.hb1 = detail::quadratic_coefficients(dist235::apply(h, detail::as_expr(out.b1)));

    const QuadraticFiberForm b1b1 = detail::product(out.b1, out.b1);
    const QuadraticFiberForm bb1 = detail::product(out.b, out.b1);
    const QuadraticFiberForm bb = detail::product(out.b, out.b);
    out.q = detail::int_combination({{6, &out.hb},
                                     {1, &out.hb1},
                                     {1, &out.pi},
                                     {-1, &out.alpha3},
                                     {-1, &b1b1},
                                     {-3, &bb1},
                                     {-9, &bb}});
    out.b2 = detail::int_combination(
        {{2, &out.alpha3}, {-1, &out.pi}, {-1, &out.hb1}, {-9, &out.hb}, {1, &b1b1}, {9, &bb}});
    return out;
}

// The cone of a frame satisfying b1 = b and Pi = -(4/3) alpha3 (as fiber
// forms) takes the flat shape x1 x5 - x2 x4 + (2/3) x3^2 in its own basis.
inline bool is_cartan_frame_at(const AdaptedFrame& f, const Point& q, double tol = 1e-9) {
    const FiberFunctions ff = fiber_functions(f);
    EvalContext ctx(q);
    const std::array<double, 4> defect = {
        ctx(ff.b1.c4) - ctx(ff.b.c4),
        ctx(ff.b1.c5) - ctx(ff.b.c5),
        ctx(ff.pi.c44) + 4.0 / 3.0 * ctx(ff.alpha3.c44),
        ctx(ff.pi.c45) + 4.0 / 3.0 * ctx(ff.alpha3.c45),
    };
    const double last = ctx(ff.pi.c55) + 4.0 / 3.0 * ctx(ff.alpha3.c55);
    double scale = 1.0;
    for (const Expr& e : {ff.b.c4, ff.b.c5, ff.b1.c4, ff.b1.c5, ff.pi.c44, ff.pi.c45, ff.pi.c55,
                          ff.alpha3.c44, ff.alpha3.c45, ff.alpha3.c55})
        scale = std::max(scale, std::abs(ctx(e)));
    for (double d : defect)
        if (std::abs(d) > tol * scale) return false;
    return std::abs(last) <= tol * scale;
}

// Matrix of the cone equation in the frame basis at q:
//   x1 x5 - x2 x4 + (2/3) (x3 - (3/4) d(x5, -x4))^2 - (3/10) G(x5, -x4) = 0
// with d = b1 - b and G = Pi + (4/3) alpha3 + h(d) + (1/4)(b1 - b)(b1 - 9b).
// The last factor is (b1 - 9b): eliminating the fiber data from
// Q + (3/8) l1^2 + (7/10) B2 with l1 = b1 + 3b leaves the quadratic tail
// (3/40)(b1^2 - 10 b b1 + 9 b^2) = (3/40)(b1 - b)(b1 - 9b).
inline QuadraticForm5 xi_closed_form(const AdaptedFrame& f, const FiberFunctions& ff,
                                     const Point& q) {
    require_235(f, q);
    EvalContext ctx(q);
    auto lin = [&](const LinearFiberForm& l) {
        return std::array<double, 2>{ctx(l.c4), ctx(l.c5)};
    };
    auto quad = [&](const QuadraticFiberForm& w) {
        return std::array<double, 3>{ctx(w.c44), ctx(w.c45), ctx(w.c55)};
    };
    const auto b = lin(ff.b), b1 = lin(ff.b1);
    const std::array<double, 2> d = {b1[0] - b[0], b1[1] - b[1]};
    const std::array<double, 2> m9 = {b1[0] - 9 * b[0], b1[1] - 9 * b[1]};
    const auto pi = quad(ff.pi), a3 = quad(ff.alpha3), hb = quad(ff.hb), hb1 = quad(ff.hb1);

    std::array<double, 3> g;
    g[0] = pi[0] + 4.0 / 3.0 * a3[0] + (hb1[0] - hb[0]) + 0.25 * d[0] * m9[0];
    g[1] = pi[1] + 4.0 / 3.0 * a3[1] + (hb1[1] - hb[1]) + 0.25 * (d[0] * m9[1] + d[1] * m9[0]);
    g[2] = pi[2] + 4.0 / 3.0 * a3[2] + (hb1[2] - hb[2]) + 0.25 * d[1] * m9[1];

    // (3/4) d(x5, -x4) = l4 x4 + l5 x5
    const double l4 = -0.75 * d[1];
    const double l5 = 0.75 * d[0];

    QuadraticForm5 m = QuadraticForm5::Zero();
    m(0, 4) = m(4, 0) = 0.5;
    m(1, 3) = m(3, 1) = -0.5;
    m(2, 2) = 2.0 / 3.0;
    m(2, 3) = m(3, 2) = -(2.0 / 3.0) * l4;
    m(2, 4) = m(4, 2) = -(2.0 / 3.0) * l5;
    m(3, 3) = (2.0 / 3.0) * l4 * l4 - 0.3 * g[2];
    m(3, 4) = m(4, 3) = (2.0 / 3.0) * l4 * l5 + 0.15 * g[1];
    m(4, 4) = (2.0 / 3.0) * l5 * l5 - 0.3 * g[0];
    return m;
}

inline QuadraticForm5 xi_closed_form(const AdaptedFrame& f, const Point& q) {
    return xi_closed_form(f, fiber_functions(f), q);
}

// Cone over a single covector: basis (pi h, pi w1, pi w2, pi w3) of
// lambda^perp in ambient components, and the conic
// (2/3) Y1^2 - (7/10) B2 Y2^2 - Y0 Y2 = 0 on the coordinates (Y0, Y1, Y2);
// the s-direction along pi h is degenerate.
struct ConeAtPoint {
    std::array<Eigen::VectorXd, 4> basis;
    Eigen::Matrix3d conic;
    Eigen::VectorXd degenerate_direction;
    BCoefficients b;
};

inline ConeAtPoint con_lambda(const AdChain& chain, const VectorField& h,
                              const CotangentPoint& lam) {
    if (chain.order() < 4)
        throw std::invalid_argument("cone construction needs chain vectors up to order 4");
    const std::vector<Eigen::VectorXd> w = chain.eval(lam);
    const Eigen::VectorXd hval = eval_field(h, lam.coords());

    ConeAtPoint out;
    out.b = decompose_wchain(w, hval, lam);
    out.basis[0] = hval.head(5);
    for (int i = 1; i <= 3; ++i) out.basis[i] = w[i].head(5);
    out.degenerate_direction = out.basis[0];
    out.conic = osculating_cone_from_b2(out.b.b2);
    return out;
}

inline ConeAtPoint con_lambda(const AdaptedFrame& f, const CotangentPoint& lam) {
    require_235(f, lam.q);
    const Chart chart = chart_for(lam);
    return con_lambda(AdChain(f, chart, 4), build_h_field(f), lam);
}

struct FitReport {
    Eigen::VectorXd singular_values;
    double gap = 0;
    int rows = 0;
};

// Union of the per-covector cones, recovered as the unique quadric through
// sampled points. Fiber angles cover a half circle (the cone over a covector
// is homothety-invariant); each cone contributes two points of its ruling
// plane and a sweep of conic solutions at Y2 = 1 with a deterministic
// spread of the degenerate coordinate s.
inline std::pair<QuadraticForm5, FitReport> xi_geometric(const AdaptedFrame& f, const Point& q,
                                                         int n_fiber = 32, int n_cone = 12) {
    if (n_fiber < 8 || n_cone < 6)
        throw std::invalid_argument("cone sampling needs n_fiber >= 8 and n_cone >= 6");
    require_235(f, q);

    const VectorField h = build_h_field(f);
    const AdChain chain4(f, Chart::U4, 4);
    const AdChain chain5(f, Chart::U5, 4);
    const Eigen::Matrix<double, 5, 5> frame = frame_matrix_at(f, q);
    const auto lu = frame.partialPivLu();

    const int rows = n_fiber * n_cone;
    Eigen::MatrixXd design(rows, 15);
    int row = 0;
    for (int j = 0; j < n_fiber; ++j) {
        const double th = M_PI * (j + 0.5) / n_fiber;
        CotangentPoint lam;
        lam.q = q;
        lam.u4 = std::cos(th);
        lam.u5 = std::sin(th);
        const Chart chart = chart_for(lam);
        const ConeAtPoint cone =
            con_lambda(chart == Chart::U4 ? chain4 : chain5, h, lam);

        for (int mpt = 0; mpt < n_cone; ++mpt) {
            Eigen::VectorXd v;
            if (mpt < 2) {
                // ruling plane Y1 = Y2 = 0
                v = (mpt == 0 ? 1.0 : -0.6) * cone.basis[0] +
                    (mpt == 0 ? 0.4 : 1.0) * cone.basis[1];
            } else {
                const double y1 = -1.6 + 3.2 * (mpt - 1.5) / (n_cone - 2);
                const double y0 = (2.0 / 3.0) * y1 * y1 - 0.7 * cone.b.b2;
                const double s = std::sin(2.399963229728653 * (j * n_cone + mpt));
                v = s * cone.basis[0] + y0 * cone.basis[1] + y1 * cone.basis[2] +
                    cone.basis[3];
            }
            Eigen::VectorXd x = lu.solve(v);
            x.normalize();
            int col = 0;
            for (int a = 0; a < 5; ++a)
                for (int c = a; c < 5; ++c) design(row, col++) = x(a) * x(c);
            ++row;
        }
    }

    const NullspaceResult ns = nullspace(design);
    if (!(ns.gap >= 1e6)) {
        std::ostringstream msg;
        msg << "cone fit does not have a one-dimensional null space; trailing singular values:";
        const int n = static_cast<int>(ns.singular_values.size());
        for (int i = std::max(0, n - 4); i < n; ++i) msg << " " << ns.singular_values(i);
        throw degenerate_error(msg.str());
    }

    QuadraticForm5 m;
    int col = 0;
    for (int a = 0; a < 5; ++a)
        for (int c = a; c < 5; ++c) {
            const double coeff = ns.vector(col++);
            if (a == c)
                m(a, a) = coeff;
            else
                m(a, c) = m(c, a) = coeff / 2;
        }
    m /= m.norm();
    // fix the overall sign by the largest entry
    Eigen::Index r0 = 0, c0 = 0;
    m.cwiseAbs().maxCoeff(&r0, &c0);
    if (m(r0, c0) < 0) m = -m;

    FitReport report;
    report.singular_values = ns.singular_values;
    report.gap = ns.gap;
    report.rows = rows;
    return {m, report};
}

inline Signature signature(const QuadraticForm5& m) { return signature_of(m); }

// Distance between forms up to nonzero scale, via Frobenius normalization.
inline double conformal_residual(const QuadraticForm5& a, const QuadraticForm5& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0 || nb == 0)
        throw std::invalid_argument("conformal comparison requires nonzero forms");
    const QuadraticForm5 an = a / na, bn = b / nb;
    return std::min((an - bn).norm(), (an + bn).norm());
}

inline bool conformal_equal(const QuadraticForm5& a, const QuadraticForm5& b, double tol) {
    return conformal_residual(a, b) <= tol;
}

} // namespace dist235

#endif
