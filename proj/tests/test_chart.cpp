#include <doctest.h>

#include "phgeo/builtins.hpp"
#include "phgeo/structure.hpp"

using namespace phgeo;

namespace {

Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

}  // namespace

TEST_CASE("heisenberg reeb field is the vertical coordinate direction") {
    ChartPtr h1 = heisenberg(1);
    Vec xi = compute_reeb(*h1, vec3(0.3, -0.8, 2.0));
    CHECK(xi[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(xi[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(xi[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate contact form is rejected") {
    // theta = dt has dtheta = 0: the Reeb system cannot pin the
    // horizontal components.
    auto theta = [](const Vec& p) {
        Vec th = Vec::Zero(p.size());
        th[2] = 1.0;
        return th;
    };
    auto J = [](const Vec& p) {
        Mat j = Mat::Zero(p.size(), p.size());
        j(0, 1) = -1.0;
        j(1, 0) = 1.0;
        return j;
    };
    CallableChart chart(3, Box::cube(3, 1.0), "degenerate", DerivativeMode::analytic_mode(),
                        theta, J);
    CHECK_THROWS_AS(compute_reeb(chart, Vec::Zero(3)), SingularStructure);
    StructureValidationReport rep = validate_structure(chart, 20);
    CHECK(rep.levi_degenerate);
    CHECK(!rep.pass());
}

TEST_CASE("heisenberg webster metric matches the hand table") {
    ChartPtr h1 = heisenberg(1);
    // g = theta x theta + G with the orthonormal frame X1, X2, xi:
    // at (x,y,t) the matrix is I + [[y^2,-xy,-y],[-xy,x^2,x],[-y,x,0]].
    Vec p = vec3(0.3, -0.2, 0.7);
    Mat g = webster_metric(*h1, p);
    CHECK(g(0, 0) == doctest::Approx(1.04).epsilon(1e-12));
    CHECK(g(0, 1) == doctest::Approx(0.06).epsilon(1e-12));
    CHECK(g(0, 2) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(g(1, 1) == doctest::Approx(1.09).epsilon(1e-12));
    CHECK(g(1, 2) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(g(2, 2) == doctest::Approx(1.0).epsilon(1e-12));

    // Frame vectors are unit and orthogonal.
    StructurePacket s = structure_at(*h1, p);
    Vec X1 = vec3(1, 0, p[1]), X2 = vec3(0, 1, -p[0]);
    CHECK(s.inner(X1, X1) == doctest::Approx(1.0));
    CHECK(s.inner(X2, X2) == doctest::Approx(1.0));
    CHECK(s.inner(X1, X2) == doctest::Approx(0.0));
    CHECK(s.inner(s.xi, s.xi) == doctest::Approx(1.0));
    CHECK(s.inner(X1, s.xi) == doctest::Approx(0.0));
}

TEST_CASE("metric identities hold at random probes") {
    for (const char* name : {"heisenberg1", "sphere3"}) {
        ChartPtr chart = make_chart(name);
        auto pts = halton_points(chart->domain(), 100, name == std::string("sphere3") ? 0.3 : 0.01);
        double worst = 0.0;
        int k = 0;
        for (const Vec& p : pts) {
            StructurePacket s = structure_at(*chart, p);
            Vec v(3), w(3);
            v << std::sin(1.0 + k), std::cos(2.0 + k), std::sin(3.0 * k + 0.5);
            w << std::cos(0.5 * k), std::sin(0.3 * k - 1.0), std::cos(1.7 * k);
            // theta(X) = <xi, X>,  dtheta(X,Y) = <JX, Y>.
            worst = std::max(worst, std::abs(s.theta_of(v) - s.inner(s.xi, v)));
            worst = std::max(worst, std::abs(s.dtheta_of(v, w) - s.inner(s.J * v, w)));
            // J^2 = -pi_h on the horizontal span.
            Vec hv = s.pi_h * v;
            worst = std::max(worst, (s.J * (s.J * hv) + hv).lpNorm<Eigen::Infinity>());
            ++k;
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("builtin charts validate and registry is deterministic") {
    for (const char* name : {"heisenberg1", "heisenberg2", "sphere3"}) {
        ChartPtr chart = make_chart(name);
        StructureValidationReport rep = validate_structure(*chart, 200);
        INFO(name);
        CHECK(rep.pass());
    }
    ChartPtr a = make_chart("sphere3");
    ChartPtr b = make_chart("sphere3");
    Vec u = vec3(0.21, -0.43, 0.11);
    CHECK((a->theta(u) - b->theta(u)).norm() == 0.0);
    CHECK((a->complex_structure(u) - b->complex_structure(u)).norm() == 0.0);
}

TEST_CASE("sphere reeb agrees with the closed-form Hopf field") {
    ChartPtr sphere = sasakian_sphere3();
    for (const Vec& u : halton_points(sphere->domain(), 40, 0.3)) {
        Vec lsq = compute_reeb(*sphere, u);
        Vec analytic = sphere3_reeb_analytic(u);
        CHECK((lsq - analytic).lpNorm<Eigen::Infinity>() < 1e-9);
    }
}

TEST_CASE("reeb solve is well conditioned and locally unique") {
    ChartPtr sphere = sasakian_sphere3();
    Vec u = vec3(0.4, 0.1, -0.2);
    ReebDiagnostics d = compute_reeb_diagnostics(*sphere, u);
    CHECK(d.residual < 1e-12);
    CHECK(d.condition_number < 1e3);
    // Perturbing theta by eps moves xi by O(eps * cond).
    StructurePacket s = structure_at(*sphere, u);
    double eps = 1e-6;
    Mat A(4, 3);
    A.row(0) = s.theta.transpose();
    A.bottomRows(3) = s.dtheta.transpose();
    Vec rhs = Vec::Zero(4);
    rhs[0] = 1.0;
    Vec rhs2 = rhs;
    rhs2[1] += eps;
    Vec xi2 = A.colPivHouseholderQr().solve(rhs2);
    CHECK((xi2 - s.xi).norm() < 10.0 * eps * d.condition_number);
}

TEST_CASE("finite-difference dtheta matches analytic on a json chart") {
    // Heisenberg theta as an explicit polynomial table, finite-difference mode.
    const char* doc = R"({
      "dim": 3,
      "name": "h1-fd",
      "domain": {"min": [-2,-2,-2], "max": [2,2,2]},
      "derivative_mode": {"finite_difference": {"step": 1e-5}},
      "theta": {"polynomial": [
        [{"coeff": -1.0, "powers": [0,1,0]}],
        [{"coeff":  1.0, "powers": [1,0,0]}],
        [{"coeff":  1.0, "powers": [0,0,0]}]
      ]},
      "J": {"polynomial": [
        [[], [{"coeff": -1.0, "powers": [0,0,0]}], []],
        [[{"coeff": 1.0, "powers": [0,0,0]}], [], []],
        [[{"coeff": -1.0, "powers": [1,0,0]}], [{"coeff": -1.0, "powers": [0,1,0]}], []]
      ]}
    })";
    ChartPtr fd_chart = chart_from_json_text(doc);
    ChartPtr h1 = heisenberg(1);
    Vec p = vec3(0.2, 0.5, -0.1);
    CHECK((fd_chart->theta(p) - h1->theta(p)).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK((fd_chart->dtheta(p) - h1->dtheta(p)).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK((fd_chart->complex_structure(p) - h1->complex_structure(p)).lpNorm<Eigen::Infinity>() <
          1e-14);
    StructureValidationReport rep = validate_structure(*fd_chart, 100);
    CHECK(rep.pass());
}

TEST_CASE("chart boundary is enforced") {
    ChartPtr sphere = sasakian_sphere3();
    Vec far = vec3(100.0, 0.0, 0.0);
    CHECK_THROWS_AS(sphere->theta(far), ChartBoundary);
}
