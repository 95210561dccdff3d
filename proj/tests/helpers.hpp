#ifndef DIST235_TESTS_HELPERS_HPP
#define DIST235_TESTS_HELPERS_HPP

#include <random>
#include <string>
#include <vector>

#include "dist235/frame.hpp"
#include "dist235/projective_curve.hpp"
#include "dist235/taylor.hpp"
#include "dist235/vector_field.hpp"

namespace testutil {

using dist235::Distribution;
using dist235::Expr;
using dist235::Point;
using dist235::VectorField;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Point random_point(std::mt19937_64& g, int dim, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Point p(dim);
    for (auto& v : p) v = d(g);
    return p;
}

// Central-difference partial derivative; independent of the symbolic engine's
// derivative rules.
inline double fd_partial(const Expr& e, Point p, int var, double h = 1e-5) {
    p[var] += h;
    const double up = dist235::evaluate(e, p);
    p[var] -= 2 * h;
    const double dn = dist235::evaluate(e, p);
    return (up - dn) / (2 * h);
}

// Bracket oracle from finite-difference Jacobians of the evaluated components.
inline std::vector<double> fd_bracket(const VectorField& v, const VectorField& w, const Point& p,
                                      double h = 1e-5) {
    const std::vector<double> vv = dist235::evaluate(v, p);
    const std::vector<double> wv = dist235::evaluate(w, p);
    std::vector<double> out(v.dim, 0.0);
    for (int i = 0; i < v.dim; ++i)
        for (int j = 0; j < v.dim; ++j)
            out[i] += vv[j] * fd_partial(w.comp[i], p, j, h) - wv[j] * fd_partial(v.comp[i], p, j, h);
    return out;
}

// Small random expression trees whose value and derivatives stay tame on
// [-1,1]^n: denominators are bounded away from zero and exp arguments are
// damped.
inline Expr random_expr(std::mt19937_64& g, int nvars, int depth) {
    using namespace dist235;
    std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 8);
    std::uniform_int_distribution<int> var(0, nvars - 1);
    std::uniform_int_distribution<int> small(-3, 3);
    switch (kind(g)) {
        case 0: return constant(dist235::Rational(small(g), 1 + std::uniform_int_distribution<int>(0, 3)(g)));
        case 1: return variable(var(g));
        case 2: return add(random_expr(g, nvars, depth - 1), random_expr(g, nvars, depth - 1));
        case 3: return sub(random_expr(g, nvars, depth - 1), random_expr(g, nvars, depth - 1));
        case 4: return mul(random_expr(g, nvars, depth - 1), random_expr(g, nvars, depth - 1));
        case 5: // denominator 2 + x_i^2 keeps the quotient smooth on the box
            return div(random_expr(g, nvars, depth - 1),
                       add(constant(2), pow(variable(var(g)), 2)));
        case 6: return fsin(random_expr(g, nvars, depth - 1));
        case 7: return fcos(random_expr(g, nvars, depth - 1));
        default:
            return fexp(div(random_expr(g, nvars, depth - 1), constant(4)));
    }
}

// Random sparse polynomial field with small integer coefficients.
inline VectorField random_poly_field(std::mt19937_64& g, int dim, int terms = 3) {
    using namespace dist235;
    std::uniform_int_distribution<int> coeff(-2, 2);
    std::uniform_int_distribution<int> var(0, dim - 1);
    std::uniform_int_distribution<int> deg(0, 2);
    std::vector<Expr> comp;
    for (int i = 0; i < dim; ++i) {
        Expr e = constant(0);
        for (int t = 0; t < terms; ++t) {
            Expr m = constant(coeff(g));
            const int d = deg(g);
            for (int k = 0; k < d; ++k) m = mul(m, variable(var(g)));
            e = add(e, m);
        }
        comp.push_back(e);
    }
    return VectorField(dim, std::move(comp));
}

inline VectorField field5(const std::array<const char*, 5>& comps) {
    std::vector<Expr> c;
    for (const char* s : comps) c.push_back(dist235::parse_expression(s));
    return VectorField(5, std::move(c));
}

// Free nilpotent (2,3,5) model: X1 = d/dx1,
// X2 = d/dx2 + x1 d/dx3 + (x1^2/2) d/dx4 + x1 x2 d/dx5.
inline Distribution flat_distribution() {
    return Distribution(field5({"1", "0", "0", "0", "0"}),
                        field5({"0", "1", "x1", "x1^2/2", "x1*x2"}));
}

// Monge family z' = f(q) in coordinates (x,u,p,q,z) = (x1..x5):
// X1 = d/dq, X2 = d/dx + p d/du + q d/dp + f(q) d/dz.
inline Distribution monge_distribution(const std::string& f_of_x4) {
    return Distribution(field5({"0", "0", "0", "1", "0"}),
                        field5({"1", "x3", "x4", "0", f_of_x4.c_str()}));
}

inline VectorField combine(const VectorField& a, const VectorField& b, const Expr& ca,
                           const Expr& cb) {
    std::vector<Expr> comp(a.dim);
    for (int i = 0; i < a.dim; ++i)
        comp[i] = dist235::add(dist235::mul(ca, a.comp[i]), dist235::mul(cb, b.comp[i]));
    return VectorField(a.dim, std::move(comp));
}

// Constant GL(2) change of the spanning pair.
inline Distribution gl2_mix(const Distribution& d, double a11, double a12, double a21,
                            double a22) {
    auto r = [](double v) {
        return dist235::constant(dist235::Rational(static_cast<std::int64_t>(std::llround(v * 1024)), 1024));
    };
    return Distribution(combine(d.x1, d.x2, r(a11), r(a12)),
                        combine(d.x1, d.x2, r(a21), r(a22)));
}

// Position-dependent invertible change within the same distribution.
inline Distribution position_mix(const Distribution& d) {
    using namespace dist235;
    const Expr one = constant(1);
    const Expr s = add(constant(1), div(variable(2), constant(4)));      // 1 + x3/4
    const Expr t = div(variable(0), constant(8));                        // x1/8
    return Distribution(combine(d.x1, d.x2, one, t), combine(d.x1, d.x2, t, s));
}

inline dist235::taylor::Scalar random_series(std::mt19937_64& g, int len, double amp = 1.0) {
    std::uniform_real_distribution<double> u(-amp, amp);
    dist235::taylor::Scalar s(len);
    for (auto& c : s) c = u(g);
    return s;
}

// Curve jet generated by integrating eps^(k) = sum_i a_i(t) eps^(i) as a
// power series around t0; init columns are eps^(i)(t0). An oracle source:
// decomposition must give the a_i back.
inline dist235::CurveJet ode_curve_jet(const std::vector<dist235::taylor::Scalar>& a,
                                       const Eigen::MatrixXd& init, double t0, int order) {
    const int k = static_cast<int>(init.cols());
    std::vector<double> fact(order + 2, 1.0);
    for (int m = 1; m < static_cast<int>(fact.size()); ++m) fact[m] = fact[m - 1] * m;

    std::vector<Eigen::VectorXd> e(order + 1); // series coefficients of eps
    for (int m = 0; m < k && m <= order; ++m) e[m] = init.col(m) / fact[m];
    for (int m = 0; m + k <= order; ++m) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(init.rows());
        for (int i = 0; i < k; ++i)
            for (int p = 0; p <= m && p < static_cast<int>(a[i].size()); ++p)
                rhs += a[i][p] * e[m - p + i] * (fact[m - p + i] / fact[m - p]);
        e[m + k] = rhs * (fact[m] / fact[m + k]);
    }
    dist235::CurveJet jet;
    jet.t0 = t0;
    for (int j = 0; j <= order; ++j) jet.derivs.push_back(e[j] * fact[j]);
    return jet;
}

} // namespace testutil

#endif
