#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dist235/cone.hpp"
#include "helpers.hpp"

using namespace dist235;
using Catch::Approx;

namespace {

CotangentPoint lambda_at(const Point& q, double u4, double u5) {
    CotangentPoint lam;
    lam.q = q;
    lam.u4 = u4;
    lam.u5 = u5;
    return lam;
}

Point regular_q(std::mt19937_64& g) {
    Point q = testutil::random_point(g, 5, -0.5, 0.5);
    q[3] = 0.9 + 0.2 * q[3]; // keeps the x4^3 Monge model away from f'' = 0
    return q;
}

double fiber_angle(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(0.2, 1.35);
    return u(g); // avoids both chart poles
}

} // namespace

TEST_CASE("fiber functions vanish on the flat model") {
    const AdaptedFrame f = build_adapted_frame(testutil::flat_distribution());
    const FiberFunctions ff = fiber_functions(f);
    auto g = testutil::rng(301);
    for (int trial = 0; trial < 5; ++trial) {
        const Point q = testutil::random_point(g, 5);
        for (double u4 : {1.0, 0.3}) {
            for (double u5 : {0.0, 1.0}) {
                REQUIRE(ff.b.at(q, u4, u5) == 0.0);
                REQUIRE(ff.b1.at(q, u4, u5) == 0.0);
                REQUIRE(ff.alpha3.at(q, u4, u5) == 0.0);
                REQUIRE(ff.pi.at(q, u4, u5) == 0.0);
                REQUIRE(ff.q.at(q, u4, u5) == 0.0);
                REQUIRE(ff.b2.at(q, u4, u5) == 0.0);
            }
        }
    }
    REQUIRE(is_cartan_frame_at(f, Point{0.1, -0.2, 0.3, 0.4, 0.5}));
}

TEST_CASE("curvature coefficient agrees with the dynamic decomposition") {
    // The closed form 2 alpha3 - Pi - h(b1) - 9 h(b) + b1^2 + 9 b^2 and the
    // least-squares coefficient of the fourth bracket power are computed by
    // disjoint code paths.
    auto g = testutil::rng(311);
    for (const char* fsrc : {"x4^2", "x4^3"}) {
        const AdaptedFrame f = build_adapted_frame(testutil::monge_distribution(fsrc));
        const FiberFunctions ff = fiber_functions(f);
        for (int trial = 0; trial < 10; ++trial) {
            const Point q = regular_q(g);
            const double th = fiber_angle(g);
            const CotangentPoint lam = lambda_at(q, std::cos(th), std::sin(th));
            const double closed = ff.b2.at(q, lam.u4, lam.u5);
            const double dynamic = canonical_B(f, lam).b2;
            REQUIRE(dynamic == Approx(closed).margin(1e-7 * (1 + std::abs(closed))));
        }
    }

    // Nonflatness witness of the cubic Monge model.
    const AdaptedFrame q3 = build_adapted_frame(testutil::monge_distribution("x4^3"));
    const FiberFunctions ff3 = fiber_functions(q3);
    double witness = 0;
    for (double u4 : {1.0, 0.0, 0.6})
        for (double u5 : {0.0, 1.0, -0.8})
            witness = std::max(witness, std::abs(ff3.b2.at(Point{0, 0, 0, 1, 0}, u4, u5)));
    REQUIRE(witness > 1e-3);
}

TEST_CASE("closed-form cone: flat matrix, signature, Cartan reduction") {
    const AdaptedFrame flat = build_adapted_frame(testutil::flat_distribution());
    auto g = testutil::rng(321);

    QuadraticForm5 expect = QuadraticForm5::Zero();
    expect(0, 4) = expect(4, 0) = 0.5;
    expect(1, 3) = expect(3, 1) = -0.5;
    expect(2, 2) = 2.0 / 3.0;

    for (int trial = 0; trial < 3; ++trial) {
        const Point q = testutil::random_point(g, 5);
        const QuadraticForm5 m = xi_closed_form(flat, q);
        REQUIRE((m - expect).norm() <= 1e-12);
        const Signature s = signature(m);
        REQUIRE(s.positive == 3);
        REQUIRE(s.negative == 2);
    }

    for (const char* fsrc : {"x4^2", "x4^3"}) {
        const AdaptedFrame f = build_adapted_frame(testutil::monge_distribution(fsrc));
        for (int trial = 0; trial < 5; ++trial) {
            const Point q = regular_q(g);
            const Signature s = signature(xi_closed_form(f, q));
            REQUIRE(s.positive == 3);
            REQUIRE(s.negative == 2);
        }
    }

    // Whenever the Cartan-frame identities hold, the cone takes the flat
    // shape. The x4^2 Monge frame satisfies them at every point even though
    // its coefficients are nonconstant.
    const AdaptedFrame q2 = build_adapted_frame(testutil::monge_distribution("x4^2"));
    for (int trial = 0; trial < 3; ++trial) {
        const Point q = testutil::random_point(g, 5);
        REQUIRE(is_cartan_frame_at(flat, q));
        REQUIRE((xi_closed_form(flat, q) - expect).norm() <= 1e-9);
        REQUIRE(is_cartan_frame_at(q2, q));
        REQUIRE((xi_closed_form(q2, q) - expect).norm() <= 1e-9);
    }

    const AdaptedFrame q3 = build_adapted_frame(testutil::monge_distribution("x4^3"));
    REQUIRE_FALSE(is_cartan_frame_at(q3, Point{0.0, 0.0, 0.0, 1.0, 0.0}));

    REQUIRE_THROWS_AS(xi_closed_form(q3, Point{0, 0, 0, 0, 0}), degenerate_error);
}

TEST_CASE("cone over a covector: annihilator, conic shape, projected forms") {
    auto g = testutil::rng(331);
    for (const char* fsrc : {"x4^2", "x4^3"}) {
        const AdaptedFrame f = build_adapted_frame(testutil::monge_distribution(fsrc));
        const FiberFunctions ff = fiber_functions(f);
        for (int trial = 0; trial < 5; ++trial) {
            const Point q = regular_q(g);
            const double th = fiber_angle(g);
            const CotangentPoint lam = lambda_at(q, std::cos(th), std::sin(th));
            const ConeAtPoint cone = con_lambda(f, lam);

            // All basis vectors annihilate lambda = u4 dual(X4) + u5 dual(X5).
            const Eigen::Matrix<double, 5, 5> m = frame_matrix_at(f, q);
            const auto lu = m.fullPivLu();
            for (const Eigen::VectorXd& v : cone.basis) {
                const Eigen::VectorXd xf = lu.solve(v);
                REQUIRE(std::abs(lam.u4 * xf(3) + lam.u5 * xf(4)) <= 1e-9 * (1 + v.norm()));
            }

            // Conic matrix carries the curvature coefficient.
            REQUIRE(cone.conic(1, 1) == Approx(2.0 / 3.0));
            REQUIRE(cone.conic(0, 2) == Approx(-0.5));
            REQUIRE(cone.conic(2, 2) ==
                    Approx(-0.7 * cone.b.b2).margin(1e-9 * (1 + std::abs(cone.b.b2))));

            // Projections of w2, w3 against the closed-form fiber functions:
            // pi w2 = (l1/u5) X2 + X3 mod pi h, with l1 = b1 + 3b;
            // pi w3 = (Q/u5) X2 + l2 X3 + u4 X5 - u5 X4 mod pi h, l2 = -3b.
            const Eigen::VectorXd ph = cone.basis[0];
            Eigen::MatrixXd a(5, 3);
            a.col(0) = m.col(1);
            a.col(1) = m.col(2);
            a.col(2) = ph;
            const LstsqResult r2 = lstsq(a, cone.basis[2]);
            const double l1 = ff.b1.at(q, lam.u4, lam.u5) + 3 * ff.b.at(q, lam.u4, lam.u5);
            REQUIRE(r2.residual <= 1e-8 * (1 + cone.basis[2].norm()));
            REQUIRE(r2.x(0) == Approx(l1 / lam.u5).margin(1e-7 * (1 + std::abs(l1))));
            REQUIRE(r2.x(1) == Approx(1.0).margin(1e-8));

            Eigen::MatrixXd a3(5, 5);
            for (int c = 0; c < 4; ++c) a3.col(c) = m.col(c + 1);
            a3.col(4) = ph;
            const LstsqResult r3 = lstsq(a3, cone.basis[3]);
            const double bval = ff.b.at(q, lam.u4, lam.u5);
            const double qval = ff.q.at(q, lam.u4, lam.u5);
            REQUIRE(r3.residual <= 1e-7 * (1 + cone.basis[3].norm()));
            REQUIRE(r3.x(0) == Approx(qval / lam.u5).margin(1e-6 * (1 + std::abs(qval))));
            REQUIRE(r3.x(1) == Approx(-3 * bval).margin(1e-7 * (1 + std::abs(bval))));
            REQUIRE(r3.x(2) == Approx(-lam.u5).margin(1e-8));
            REQUIRE(r3.x(3) == Approx(lam.u4).margin(1e-8));
        }
    }

    // Flat cone: (2/3) Y1^2 - Y0 Y2 = 0.
    const AdaptedFrame flat = build_adapted_frame(testutil::flat_distribution());
    const ConeAtPoint cone = con_lambda(flat, lambda_at(Point{0, 0, 0, 0, 0}, 0.6, 0.8));
    Eigen::Matrix3d expect = Eigen::Matrix3d::Zero();
    expect(1, 1) = 2.0 / 3.0;
    expect(0, 2) = expect(2, 0) = -0.5;
    REQUIRE((cone.conic - expect).norm() <= 1e-10);
}

TEST_CASE("cone over a covector is invariant under fiber homotheties") {
    auto g = testutil::rng(341);
    const AdaptedFrame f = build_adapted_frame(testutil::monge_distribution("x4^3"));
    for (double c : {2.0, -1.0}) {
        const Point q = regular_q(g);
        const double th = fiber_angle(g);
        const CotangentPoint lam = lambda_at(q, std::cos(th), std::sin(th));
        const CotangentPoint scaled = lambda_at(q, c * lam.u4, c * lam.u5);
        const ConeAtPoint base = con_lambda(f, lam);
        const ConeAtPoint resc = con_lambda(f, scaled);

        // Points generated on the rescaled cone satisfy the original conic
        // after a change of basis within lambda^perp.
        Eigen::MatrixXd bmat(5, 4);
        for (int i = 0; i < 4; ++i) bmat.col(i) = base.basis[i];
        for (int mpt = 0; mpt < 8; ++mpt) {
            const double y1 = -1.5 + 3.0 * (mpt + 0.5) / 8.0;
            const double y0 = (2.0 / 3.0) * y1 * y1 - 0.7 * resc.b.b2;
            Eigen::VectorXd v = 0.3 * resc.basis[0] + y0 * resc.basis[1] +
                                y1 * resc.basis[2] + resc.basis[3];
            const LstsqResult coords = lstsq(bmat, v);
            REQUIRE(coords.residual <= 1e-8 * (1 + v.norm()));
            const Eigen::Vector3d y(coords.x(1), coords.x(2), coords.x(3));
            const double val = y.transpose() * base.conic * y;
            REQUIRE(std::abs(val) <= 1e-7 * (1 + y.squaredNorm()));
        }
    }
}

TEST_CASE("geometric cone assembly matches the closed form") {
    auto g = testutil::rng(351);
    std::vector<Distribution> models = {testutil::flat_distribution(),
                                        testutil::monge_distribution("x4^2"),
                                        testutil::monge_distribution("x4^3")};
    for (const Distribution& d : models) {
        const AdaptedFrame f = build_adapted_frame(d);
        for (int trial = 0; trial < 2; ++trial) {
            const Point q = regular_q(g);
            const QuadraticForm5 closed = xi_closed_form(f, q);
            const auto [fitted, report] = xi_geometric(f, q, 16, 8);
            REQUIRE(report.gap >= 1e6);
            REQUIRE(conformal_equal(fitted, closed, 1e-6));

            const auto [fitted2, report2] = xi_geometric(f, q, 32, 16);
            REQUIRE(conformal_equal(fitted2, fitted, 1e-6));
        }
    }
}

TEST_CASE("signature and conformal comparison utilities") {
    QuadraticForm5 m = QuadraticForm5::Zero();
    REQUIRE(signature(m).zero == 5);
    m.diagonal() << 1, 1, 1, -1, -1;
    const Signature s = signature(m);
    REQUIRE(s.positive == 3);
    REQUIRE(s.negative == 2);

    REQUIRE(conformal_equal(m, 3 * m, 1e-12));
    REQUIRE(conformal_equal(m, -2 * m, 1e-12));
    QuadraticForm5 id = QuadraticForm5::Identity();
    REQUIRE_FALSE(conformal_equal(m, id, 1e-6));
    REQUIRE_THROWS_AS(conformal_equal(QuadraticForm5::Zero(), id, 1e-6),
                      std::invalid_argument);
}

TEST_CASE("cone is conformally invariant under changes of the spanning pair") {
    auto g = testutil::rng(361);
    const Distribution d = testutil::monge_distribution("x4^3");
    const AdaptedFrame f = build_adapted_frame(d);

    std::vector<Distribution> variants = {testutil::gl2_mix(d, 1.0, 0.5, -0.25, 1.0),
                                          testutil::position_mix(d)};
    for (const Distribution& var : variants) {
        const AdaptedFrame fv = build_adapted_frame(var);
        for (int trial = 0; trial < 3; ++trial) {
            const Point q = regular_q(g);
            // Transport both forms to ambient coordinates before comparing:
            // x_frame = M^{-1} x_amb, so Q_amb = M^{-T} Q M^{-1}.
            auto ambient = [&](const AdaptedFrame& fr) {
                const Eigen::Matrix<double, 5, 5> m = frame_matrix_at(fr, q);
                const Eigen::Matrix<double, 5, 5> mi = m.inverse();
                const QuadraticForm5 qf = xi_closed_form(fr, q);
                return QuadraticForm5(mi.transpose() * qf * mi);
            };
            REQUIRE(conformal_equal(ambient(f), ambient(fv), 1e-6));
        }
    }
}
