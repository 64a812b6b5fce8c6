#include <doctest.h>

#include <random>

#include "phgeo/builtins.hpp"
#include "phgeo/connection.hpp"

using namespace phgeo;

namespace {

Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

// Constant-coefficient test chart with g = identity; all Christoffels vanish.
ChartPtr flat_metric_chart() {
    auto theta = [](const Vec&) {
        Vec th = Vec::Zero(3);
        th[2] = 1.0;
        return th;
    };
    auto dtheta = [](const Vec&) {
        Mat D = Mat::Zero(3, 3);
        D(0, 1) = 1.0;
        D(1, 0) = -1.0;
        return D;
    };
    auto J = [](const Vec&) {
        Mat j = Mat::Zero(3, 3);
        j(0, 1) = -1.0;
        j(1, 0) = 1.0;
        return j;
    };
    return std::make_shared<CallableChart>(3, Box::cube(3, 2.0), "flat-test",
                                           DerivativeMode::analytic_mode(), theta, J, dtheta);
}

}  // namespace

TEST_CASE("constant metric has vanishing levi-civita coefficients") {
    TWConnection conn(flat_metric_chart());
    Tensor3 g = conn.levi_civita_christoffels(vec3(0.2, -0.1, 0.4));
    CHECK(g.max_abs() < 1e-10);
}

TEST_CASE("heisenberg levi-civita coefficients match the hand table") {
    // From g = I + [[y^2,-xy,-y],[-xy,x^2,x],[-y,x,0]] at the origin the only
    // nonzero coefficients are G^x_{yt} = G^x_{ty} = -1, G^y_{xt} = G^y_{tx} = 1
    // (coordinate order x, y, t).
    TWConnection conn(heisenberg(1));
    Tensor3 g = conn.levi_civita_christoffels(Vec::Zero(3));
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double expected = 0.0;
                if (k == 0 && ((i == 1 && j == 2) || (i == 2 && j == 1))) expected = -1.0;
                if (k == 1 && ((i == 0 && j == 2) || (i == 2 && j == 0))) expected = 1.0;
                INFO(k << i << j);
                CHECK(g(k, i, j) == doctest::Approx(expected).epsilon(1e-9));
            }
}

TEST_CASE("levi-civita symmetry in the lower indices") {
    for (const char* name : {"heisenberg1", "sphere3"}) {
        ChartPtr chart = make_chart(name);
        TWConnection conn(chart);
        Vec p = name == std::string("sphere3") ? vec3(0.3, -0.2, 0.5) : vec3(1.0, 2.0, -3.0);
        Tensor3 g = conn.levi_civita_christoffels(p);
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) CHECK(g(k, i, j) == g(k, j, i));
    }
}

TEST_CASE("tanaka-webster connection satisfies its axioms") {
    for (const char* name : {"heisenberg1", "heisenberg2", "sphere3"}) {
        ChartPtr chart = make_chart(name);
        TWConnection conn(chart);
        auto pts = halton_points(chart->domain(), 5, name == std::string("sphere3") ? 0.2 : 0.01);
        for (const Vec& p : pts) {
            ConnectionAxiomResiduals r = conn.axiom_residuals(p, 3);
            INFO(name);
            CHECK(r.max() < 1e-7);
        }
    }
}

TEST_CASE("heisenberg left-invariant frame is parallel") {
    ChartPtr h1 = heisenberg(1);
    TWConnection conn(h1);
    // nabla of X1 = dx + y dt vanishes: check the Gamma contraction against
    // the analytic field derivative.
    for (const Vec& p : halton_points(h1->domain(), 10, 0.01)) {
        Tensor3 g = conn.tw_christoffels(p);
        for (int k = 0; k < 3; ++k) {
            Vec X1 = vec3(1, 0, p[1]);
            Vec dX1 = vec3(0, 0, k == 1 ? 1.0 : 0.0);
            Vec e = Vec::Zero(3);
            e[k] = 1.0;
            Vec cov = dX1 + g.apply(e, X1);
            CHECK(cov.lpNorm<Eigen::Infinity>() < 1e-9);
        }
    }
}

TEST_CASE("heisenberg torsion of the frame pair is twice the reeb field") {
    ChartPtr h1 = heisenberg(1);
    TWConnection conn(h1);
    Vec p = Vec::Zero(3);
    Vec X1 = vec3(1, 0, 0), X2 = vec3(0, 1, 0);
    Vec T = conn.torsion(p, X1, X2);
    CHECK(T[0] == doctest::Approx(0.0));
    CHECK(T[1] == doctest::Approx(0.0));
    CHECK(T[2] == doctest::Approx(2.0));
    // Antisymmetry is exact.
    Vec T2 = conn.torsion(p, X2, X1);
    CHECK((T + T2).lpNorm<Eigen::Infinity>() == 0.0);
    // tau = 0 on a Sasakian chart: vertical-slot torsion vanishes.
    StructurePacket s = structure_at(*h1, p);
    CHECK(conn.torsion(p, s.xi, X1).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("heisenberg curvature vanishes") {
    for (int m : {1, 2}) {
        TWConnection conn(heisenberg(m));
        for (const Vec& p : halton_points(conn.chart().domain(), 25, 0.02))
            CHECK(conn.curvature(p).max_abs() < 1e-6);
    }
}

TEST_CASE("curvature sign calibration against the defining commutator") {
    // Nested covariant derivatives of a polynomial field on the sphere chart,
    // compared with the stored curvature array on coordinate directions.
    ChartPtr sphere = sasakian_sphere3();
    TWConnection conn(sphere);
    Vec p = vec3(0.2, 0.1, -0.3);
    Tensor4 R = conn.curvature(p);

    std::function<Vec(const Vec&)> field = [](const Vec& q) {
        Vec z(3);
        z << q[1] * q[2] + 0.3, q[0] * q[0] - q[2], 0.7 * q[0] * q[1];
        return z;
    };
    auto cov = [&](int i, const std::function<Vec(const Vec&)>& Z) {
        return std::function<Vec(const Vec&)>([&conn, i, Z](const Vec& q) {
            const double h = 1e-4;
            return Vec(fd::partial4(Z, q, i, h) +
                       conn.tw_christoffels(q).apply(Vec::Unit(3, i), Z(q)));
        });
    };
    for (int i : {0, 1}) {
        for (int j : {1, 2}) {
            if (i == j) continue;
            Vec comm = cov(i, cov(j, field))(p) - cov(j, cov(i, field))(p);
            Vec expected = R.apply(Vec::Unit(3, i), Vec::Unit(3, j), field(p));
            CHECK((comm - expected).lpNorm<Eigen::Infinity>() < 1e-4);
        }
    }
}

TEST_CASE("curvature pairing antisymmetries and sasakian symmetries") {
    ChartPtr sphere = sasakian_sphere3();
    TWConnection conn(sphere);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    Vec p = vec3(-0.2, 0.4, 0.1);
    StructurePacket s = structure_at(*sphere, p);
    Tensor4 R = conn.curvature(p);
    for (int rep = 0; rep < 10; ++rep) {
        Vec X(3), Y(3), Z(3), W(3);
        for (int i = 0; i < 3; ++i) {
            X[i] = gauss(rng);
            Y[i] = gauss(rng);
            Z[i] = gauss(rng);
            W[i] = gauss(rng);
        }
        double a = TWConnection::lowered(R, s.g, X, Y, Z, W);
        CHECK(std::abs(a + TWConnection::lowered(R, s.g, Y, X, Z, W)) < 1e-7);
        CHECK(std::abs(a + TWConnection::lowered(R, s.g, X, Y, W, Z)) < 1e-7);
        // Pair symmetry on a torsion-free chart.
        CHECK(std::abs(a - TWConnection::lowered(R, s.g, Z, W, X, Y)) < 1e-7);
    }
    // Vertical-argument vanishing.
    Vec Y = s.pi_h * vec3(0.3, 1.0, -0.2), Z = s.pi_h * vec3(1.0, 0.2, 0.4);
    CHECK(std::abs(TWConnection::lowered(R, s.g, s.xi, Y, Z, Y)) < 1e-7);
}

TEST_CASE("sphere horizontal sectional curvature is a positive constant") {
    ChartPtr sphere = sasakian_sphere3();
    TWConnection conn(sphere);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    double kmin = 1e18, kmax = -1e18;
    for (const Vec& p : halton_points(sphere->domain(), 12, 0.2)) {
        StructurePacket s = structure_at(*sphere, p);
        Vec a(3), b(3);
        for (int i = 0; i < 3; ++i) {
            a[i] = gauss(rng);
            b[i] = gauss(rng);
        }
        Vec X = s.pi_h * a, Y = s.pi_h * b;
        double K = conn.horizontal_sectional_curvature(p, X, Y);
        kmin = std::min(kmin, K);
        kmax = std::max(kmax, K);
        // Basis invariance under GL(2) changes of the plane.
        double K2 = conn.horizontal_sectional_curvature(p, 2.0 * X, X + 3.0 * Y);
        CHECK(std::abs(K2 - K) < 1e-8 * std::max(1.0, std::abs(K)));
    }
    CHECK(kmin > 0.0);
    CHECK(kmax - kmin < 1e-6);
}

TEST_CASE("sectional curvature argument validation") {
    ChartPtr sphere = sasakian_sphere3();
    TWConnection conn(sphere);
    Vec p = Vec::Zero(3);
    StructurePacket s = structure_at(*sphere, p);
    Vec X = s.pi_h * vec3(1, 0, 0);
    CHECK_THROWS_AS(conn.horizontal_sectional_curvature(p, X, 2.0 * X), DegeneratePlane);
    CHECK_THROWS_AS(conn.horizontal_sectional_curvature(p, s.xi, X), NotHorizontal);
}

TEST_CASE("ricci trace on the builtins") {
    {
        TWConnection conn(heisenberg(1));
        Vec p = vec3(0.5, -0.5, 1.0);
        StructurePacket s = structure_at(conn.chart(), p);
        CHECK(std::abs(conn.ricci(p, s.xi, s.xi)) < 1e-6);
    }
    {
        ChartPtr sphere = sasakian_sphere3();
        TWConnection conn(sphere);
        // Ric on horizontal unit vectors is constant across points; the value
        // is measured, consistency is the assertion.
        double first = 0.0;
        bool have_first = false;
        for (const Vec& p : halton_points(sphere->domain(), 6, 0.15)) {
            StructurePacket s = structure_at(*sphere, p);
            Vec Y = s.pi_h * vec3(0.3, -1.0, 0.7);
            Y /= s.norm(Y);
            Tensor4 R = conn.curvature(p);
            double ric = conn.ricci(R, Y, Y);
            // Cross-check against the explicit orthonormal-frame sum.
            double direct = 0.0;
            std::vector<Vec> frame;
            for (int cand = 0; cand < 3; ++cand) {
                Vec e = Vec::Unit(3, cand);
                for (const Vec& f : frame) e -= s.inner(e, f) * f;
                double nn = s.norm(e);
                if (nn > 1e-8) frame.push_back(e / nn);
            }
            for (const Vec& f : frame) direct += TWConnection::lowered(R, s.g, f, Y, Y, f);
            CHECK(std::abs(ric - direct) < 1e-7);
            if (!have_first) {
                first = ric;
                have_first = true;
                CHECK(ric > 0.0);
            } else {
                CHECK(std::abs(ric - first) < 1e-6);
            }
            // Bilinearity probe.
            Vec Z = s.pi_h * vec3(1.0, 0.2, 0.0);
            Vec W = s.xi;
            double lhs = conn.ricci(R, 2.0 * Y, Z + W);
            double rhs = 2.0 * conn.ricci(R, Y, Z) + 2.0 * conn.ricci(R, Y, W);
            CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
        }
    }
}

TEST_CASE("user torsion candidates are validated") {
    ChartPtr h1 = heisenberg(1);
    // tau(xi) != 0.
    TauField bad1 = [](const Vec&) {
        Mat t = Mat::Zero(3, 3);
        t(0, 2) = 1.0;
        return t;
    };
    CHECK_THROWS_AS(validate_tau(*h1, bad1), TorsionInvalid);
    // Not trace-free.
    TauField bad2 = [](const Vec& p) {
        ChartPtr c = heisenberg(1);
        StructurePacket s = structure_at(*c, p);
        return Mat(s.pi_h);
    };
    CHECK_THROWS_AS(validate_tau(*h1, bad2), TorsionInvalid);
    // Valid candidate: lambda (X1 x X1^flat - X2 x X2^flat).
    TauField good = [](const Vec& p) {
        ChartPtr c = heisenberg(1);
        StructurePacket s = structure_at(*c, p);
        Vec X1(3), X2(3);
        X1 << 1, 0, p[1];
        X2 << 0, 1, -p[0];
        return Mat(0.4 * (X1 * (s.g * X1).transpose() - X2 * (s.g * X2).transpose()));
    };
    validate_tau(*h1, good);  // must not throw

    TWConnection conn(h1, good);
    CHECK(conn.tau_mode() == TauMode::user_supplied);
    // The torsion formula respects the supplied tau: T(xi, X) = tau(X).
    Vec p = vec3(0.1, 0.2, 0.0);
    StructurePacket s = structure_at(*h1, p);
    Vec X1(3);
    X1 << 1, 0, p[1];
    Vec T = conn.torsion(p, s.xi, X1);
    Mat tau = good(p);
    CHECK((T - tau * X1).lpNorm<Eigen::Infinity>() < 1e-12);
}
