#ifndef DIST235_VECTOR_FIELD_HPP
#define DIST235_VECTOR_FIELD_HPP

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dist235/expr.hpp"

namespace dist235 {

using Point = std::vector<double>;

// A vector field on R^dim with closed-form components; component i multiplies
// d/dx_i. Fields on the fibered 7-space use the same type with dim == 7 and
// variable order (x1..x5, u4, u5).
struct VectorField {
    int dim = 0;
    std::vector<Expr> comp;

    VectorField() = default;
    VectorField(int dimension, std::vector<Expr> components)
        : dim(dimension), comp(std::move(components)) {
        if (static_cast<int>(comp.size()) != dim)
            throw std::invalid_argument("vector field component count does not match dimension");
    }

    static VectorField zero(int dimension) {
        return VectorField(dimension, std::vector<Expr>(dimension, constant(0)));
    }
};

inline std::vector<double> evaluate(const VectorField& f, std::span<const double> p) {
    if (static_cast<int>(p.size()) < f.dim)
        throw std::invalid_argument("point dimension too small for field");
    EvalContext ctx(p);
    std::vector<double> out(f.dim);
    for (int i = 0; i < f.dim; ++i) out[i] = ctx(f.comp[i]);
    return out;
}

// Directional derivative V(g) = sum_i V^i dg/dx_i.
inline Expr apply(const VectorField& v, const Expr& g) {
    Expr out = constant(0);
    for (int i = 0; i < v.dim; ++i)
        out = add(out, mul(v.comp[i], differentiate(g, i)));
    return out;
}

// [V,W]^i = V(W^i) - W(V^i), componentwise as exact expressions.
inline VectorField lie_bracket(const VectorField& v, const VectorField& w) {
    if (v.dim != w.dim)
        throw std::invalid_argument("lie_bracket on fields of different dimension");
    std::vector<Expr> comp(v.dim);
    for (int i = 0; i < v.dim; ++i)
        comp[i] = sub(apply(v, w.comp[i]), apply(w, v.comp[i]));
    return VectorField(v.dim, std::move(comp));
}

} // namespace dist235

#endif
