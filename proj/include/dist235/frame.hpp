#ifndef DIST235_FRAME_HPP
#define DIST235_FRAME_HPP

#include <array>
#include <stdexcept>
#include <vector>

#include "dist235/linalg.hpp"
#include "dist235/vector_field.hpp"

namespace dist235 {

// Rank-2 distribution on a 5-dimensional chart, spanned by two fields.
struct Distribution {
    VectorField x1, x2;

    Distribution() = default;
    Distribution(VectorField f1, VectorField f2) : x1(std::move(f1)), x2(std::move(f2)) {
        if (x1.dim != 5 || x2.dim != 5)
            throw std::invalid_argument("distribution fields must live on a 5-dimensional chart");
    }
};

struct GrowthVector {
    int d1 = 0, d2 = 0, d3 = 0;
    [[nodiscard]] bool is_235() const { return d1 == 2 && d2 == 3 && d3 == 5; }
};

namespace detail {

// Cofactor expansion along the first column; smart constructors prune the
// zero entries that dominate these frame matrices.
inline Expr sym_det(const std::vector<std::vector<Expr>>& m) {
    const std::size_t n = m.size();
    if (n == 1) return m[0][0];
    Expr out = constant(0);
    for (std::size_t r = 0; r < n; ++r) {
        if (is_zero(m[r][0])) continue;
        std::vector<std::vector<Expr>> minor;
        minor.reserve(n - 1);
        for (std::size_t rr = 0; rr < n; ++rr) {
            if (rr == r) continue;
            minor.emplace_back(m[rr].begin() + 1, m[rr].end());
        }
        Expr term = mul(m[r][0], sym_det(minor));
        out = (r % 2 == 0) ? add(out, term) : sub(out, term);
    }
    return out;
}

} // namespace detail

// Adapted frame X3 = [X1,X2], X4 = [X1,X3], X5 = [X2,X3] together with the
// structural functions of [Xi,Xj] = sum_k c_{ji}^k Xk, kept symbolic as
// determinant ratios so they can be differentiated downstream.
class AdaptedFrame {
public:
    std::array<VectorField, 5> x;
    Expr det; // determinant of the frame matrix, shared Cramer denominator

    // 1-based indices matching the frame labels; c(j, i, k) is the X_k
    // coefficient of [X_i, X_j].
    [[nodiscard]] const Expr& c(int j, int i, int k) const {
        return c_.at(idx(j, i, k));
    }

    static AdaptedFrame build(const Distribution& d) {
        AdaptedFrame f;
        f.x[0] = d.x1;
        f.x[1] = d.x2;
        f.x[2] = lie_bracket(f.x[0], f.x[1]);
        f.x[3] = lie_bracket(f.x[0], f.x[2]);
        f.x[4] = lie_bracket(f.x[1], f.x[2]);

        std::vector<std::vector<Expr>> m(5, std::vector<Expr>(5));
        for (int row = 0; row < 5; ++row)
            for (int col = 0; col < 5; ++col) m[row][col] = f.x[col].comp[row];
        f.det = detail::sym_det(m);

        f.c_.assign(125, constant(0));
        for (int i = 1; i <= 5; ++i) {
            for (int j = i + 1; j <= 5; ++j) {
                const VectorField b = lie_bracket(f.x[i - 1], f.x[j - 1]);
                for (int k = 1; k <= 5; ++k) {
                    auto replaced = m;
                    for (int row = 0; row < 5; ++row) replaced[row][k - 1] = b.comp[row];
                    const Expr num = detail::sym_det(replaced);
                    Expr value = div(num, f.det);
                    f.c_[idx(j, i, k)] = value;
                    f.c_[idx(i, j, k)] = neg(value);
                }
            }
        }
        return f;
    }

private:
    static std::size_t idx(int j, int i, int k) {
        if (j < 1 || j > 5 || i < 1 || i > 5 || k < 1 || k > 5)
            throw std::out_of_range("structural function index");
        return static_cast<std::size_t>((j - 1) * 25 + (i - 1) * 5 + (k - 1));
    }

    std::vector<Expr> c_;
};

inline AdaptedFrame build_adapted_frame(const Distribution& d) { return AdaptedFrame::build(d); }

inline Eigen::Matrix<double, 5, 5> frame_matrix_at(const AdaptedFrame& f, const Point& q) {
    Eigen::Matrix<double, 5, 5> m;
    EvalContext ctx(q);
    for (int col = 0; col < 5; ++col)
        for (int row = 0; row < 5; ++row) m(row, col) = ctx(f.x[col].comp[row]);
    return m;
}

// Ranks of D, D^2 = D + [D,D], D^3 = D^2 + [D,D^2] at q; relative tolerance
// against the largest singular value.
inline GrowthVector growth_vector(const AdaptedFrame& f, const Point& q, double rel_tol = 1e-9) {
    const Eigen::Matrix<double, 5, 5> m = frame_matrix_at(f, q);
    GrowthVector g;
    g.d1 = numeric_rank(m.leftCols(2), rel_tol);
    g.d2 = numeric_rank(m.leftCols(3), rel_tol);
    g.d3 = numeric_rank(m, rel_tol);
    return g;
}

// Downstream constructions require the small growth vector (2,3,5) at the
// base point; failures surface as the typed degeneracy error.
inline void require_235(const AdaptedFrame& f, const Point& q, double rel_tol = 1e-9) {
    const GrowthVector g = growth_vector(f, q, rel_tol);
    if (!g.is_235())
        throw degenerate_error("growth vector at base point is (" + std::to_string(g.d1) + "," +
                               std::to_string(g.d2) + "," + std::to_string(g.d3) +
                               "), expected (2,3,5)");
}

// Worst relative defect of sum_k c(j,i,k) X_k - [X_i, X_j] over the ten
// unordered frame pairs at q; a direct audit of the structural functions.
// Requires an invertible frame matrix (the c's share the Cramer denominator).
inline double reconstruction_residual(const AdaptedFrame& f, const Point& q) {
    require_235(f, q);
    const Eigen::Matrix<double, 5, 5> m = frame_matrix_at(f, q);
    EvalContext ctx(q);
    double worst = 0;
    for (int i = 1; i <= 5; ++i) {
        for (int j = i + 1; j <= 5; ++j) {
            const VectorField br = lie_bracket(f.x[i - 1], f.x[j - 1]);
            Eigen::Matrix<double, 5, 1> bv, rec;
            for (int r = 0; r < 5; ++r) bv(r) = ctx(br.comp[r]);
            rec.setZero();
            for (int k = 1; k <= 5; ++k) rec += ctx(f.c(j, i, k)) * m.col(k - 1);
            worst = std::max(worst, (rec - bv).norm() / (1 + bv.norm()));
        }
    }
    return worst;
}

} // namespace dist235

#endif
