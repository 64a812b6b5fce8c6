#include "phgeo/structure.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace phgeo {

namespace {

// Stacked Reeb system: first row theta^T, then rows of dtheta^T
// (dtheta(xi, e_k) = (D^T xi)_k).
Mat reeb_system(const Vec& theta, const Mat& D) {
    const int n = static_cast<int>(theta.size());
    Mat A(n + 1, n);
    A.row(0) = theta.transpose();
    A.bottomRows(n) = D.transpose();
    return A;
}

}  // namespace

ReebDiagnostics compute_reeb_diagnostics(const Chart& chart, const Vec& p) {
    const int n = chart.dim();
    Vec th = chart.theta(p);
    Mat D = chart.dtheta(p);
    Mat A = reeb_system(th, D);
    Vec rhs = Vec::Zero(n + 1);
    rhs[0] = 1.0;

    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(n - 1);
    if (smin <= 1e-10 * std::max(1.0, smax))
        throw SingularStructure("Reeb system rank-deficient at sampled point");

    ReebDiagnostics d;
    d.xi = svd.solve(rhs);
    d.residual = (A * d.xi - rhs).norm();
    d.condition_number = smax / smin;
    return d;
}

Vec compute_reeb(const Chart& chart, const Vec& p) {
    ReebDiagnostics d = compute_reeb_diagnostics(chart, p);
    const double tol = chart.mode().analytic ? 1e-10 : 1e-6;
    if (d.residual >= tol)
        throw SingularStructure("Reeb residual " + std::to_string(d.residual) +
                                " exceeds tolerance");
    return d.xi;
}

StructurePacket structure_at(const Chart& chart, const Vec& p) {
    StructurePacket s;
    s.theta = chart.theta(p);
    s.dtheta = chart.dtheta(p);
    s.J = chart.complex_structure(p);

    ReebDiagnostics d;
    {
        const int n = chart.dim();
        Mat A = reeb_system(s.theta, s.dtheta);
        Vec rhs = Vec::Zero(n + 1);
        rhs[0] = 1.0;
        Eigen::ColPivHouseholderQR<Mat> qr(A);
        if (qr.rank() < n) throw SingularStructure("Reeb system rank-deficient");
        d.xi = qr.solve(rhs);
        d.residual = (A * d.xi - rhs).norm();
    }
    s.xi = d.xi;
    s.reeb_residual = d.residual;

    const int n = chart.dim();
    s.pi_h = Mat::Identity(n, n) - s.xi * s.theta.transpose();
    s.levi = s.dtheta * s.J;
    s.G = s.pi_h.transpose() * s.levi * s.pi_h;
    s.g = s.theta * s.theta.transpose() + s.G;

    Mat g_sym = 0.5 * (s.g + s.g.transpose());
    Eigen::LDLT<Mat> ldlt(g_sym);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw NotPositiveDefinite("Webster metric not positive definite at sampled point");
    s.g_inv = ldlt.solve(Mat::Identity(n, n));
    return s;
}

Mat webster_metric(const Chart& chart, const Vec& p) {
    StructurePacket s = structure_at(chart, p);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s.g + s.g.transpose()));
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw NotPositiveDefinite("Webster metric has non-positive eigenvalue");
    return s.g;
}

std::vector<Vec> halton_points(const Box& box, int count, double shrink) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23};
    const int n = box.dim();
    std::vector<Vec> pts;
    pts.reserve(count);
    auto radical_inverse = [](int base, int idx) {
        double f = 1.0, r = 0.0;
        while (idx > 0) {
            f /= base;
            r += f * (idx % base);
            idx /= base;
        }
        return r;
    };
    Vec mid = 0.5 * (box.lo + box.hi);
    Vec half = 0.5 * shrink * (box.hi - box.lo);
    for (int k = 1; k <= count; ++k) {
        Vec p(n);
        for (int i = 0; i < n; ++i)
            p[i] = mid[i] + half[i] * (2.0 * radical_inverse(primes[i % 9], k) - 1.0);
        pts.push_back(p);
    }
    return pts;
}

StructureValidationReport validate_structure(const Chart& chart, int samples,
                                             double tol_scale) {
    StructureValidationReport rep;
    rep.chart_name = chart.name();
    rep.samples = samples;
    const double base = (chart.mode().analytic ? 1e-10 : 1e-6) * tol_scale;
    const int n = chart.dim();

    InvariantResidual theta_nonzero{"theta_nonvanishing", 0.0, base};
    InvariantResidual dtheta_antisym{"dtheta_antisymmetric", 0.0, base};
    InvariantResidual j_squared{"J_squared_plus_pi_h", 0.0, 1e-8 * tol_scale};
    InvariantResidual j_reeb{"J_of_reeb", 0.0, base};
    InvariantResidual reeb_res{"reeb_identities", 0.0, base};
    InvariantResidual levi_pos{"levi_positive_definite", 0.0, base};
    InvariantResidual metric_sym{"metric_symmetric", 0.0, base};
    InvariantResidual metric_pd{"metric_positive_definite", 0.0, base};
    InvariantResidual metric_id{"metric_identities", 0.0, 1e-8 * tol_scale};
    InvariantResidual orth_split{"orthogonal_decomposition", 0.0, 1e-8 * tol_scale};

    double min_theta_norm = std::numeric_limits<double>::max();
    double min_levi_eig = std::numeric_limits<double>::max();
    double min_metric_eig = std::numeric_limits<double>::max();

    auto pts = halton_points(chart.domain(), samples);
    int probe = 0;
    for (const Vec& p : pts) {
        StructurePacket s;
        try {
            s = structure_at(chart, p);
        } catch (const SingularStructure&) {
            rep.levi_degenerate = true;
            continue;
        } catch (const NotPositiveDefinite&) {
            rep.levi_degenerate = true;
            continue;
        }

        min_theta_norm = std::min(min_theta_norm, s.theta.norm());
        dtheta_antisym.residual =
            std::max(dtheta_antisym.residual, (s.dtheta + s.dtheta.transpose()).norm());
        j_squared.residual = std::max(
            j_squared.residual, (s.J * s.J + s.pi_h).lpNorm<Eigen::Infinity>());
        j_reeb.residual = std::max(j_reeb.residual, (s.J * s.xi).norm());

        double r1 = std::abs(s.theta.dot(s.xi) - 1.0);
        double r2 = (s.dtheta.transpose() * s.xi).norm();
        reeb_res.residual = std::max(reeb_res.residual, std::max(r1, r2));

        metric_sym.residual =
            std::max(metric_sym.residual, (s.g - s.g.transpose()).lpNorm<Eigen::Infinity>());

        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s.g + s.g.transpose()));
        min_metric_eig = std::min(min_metric_eig, es.eigenvalues().minCoeff());

        // Levi form restricted to the horizontal span.
        Mat L_h = s.pi_h.transpose() * s.levi * s.pi_h;
        Eigen::SelfAdjointEigenSolver<Mat> el(0.5 * (L_h + L_h.transpose()));
        // One eigenvalue is 0 (the xi direction); the rest must be positive.
        Vec ev = el.eigenvalues();
        std::vector<double> sorted(ev.data(), ev.data() + n);
        std::sort(sorted.begin(), sorted.end());
        min_levi_eig = std::min(min_levi_eig, sorted[1]);  // smallest horizontal one
        if (std::abs(sorted[0]) > 1e-6 || sorted[1] <= 0.0) rep.levi_degenerate = true;

        // Metric identities: theta(X) = <xi,X>, dtheta(X,Y) = <JX,Y>, and
        // g restricted to the splitting: g(xi,xi)=1, g(xi, pi_h v)=0.
        if (probe % 7 == 0) {
            Vec v = Vec::Zero(n), w = Vec::Zero(n);
            for (int i = 0; i < n; ++i) {
                v[i] = std::sin(0.7 * (i + 1) + 0.3 * probe);
                w[i] = std::cos(1.3 * (i + 1) - 0.2 * probe);
            }
            double m1 = std::abs(s.theta_of(v) - s.inner(s.xi, v));
            double m2 = std::abs(s.dtheta_of(v, w) - s.inner(s.J * v, w));
            metric_id.residual = std::max(metric_id.residual, std::max(m1, m2));
            double o1 = std::abs(s.inner(s.xi, s.xi) - 1.0);
            double o2 = std::abs(s.inner(s.xi, s.pi_h * v));
            orth_split.residual = std::max(orth_split.residual, std::max(o1, o2));
        }
        ++probe;
    }

    theta_nonzero.residual = (min_theta_norm < 1e-8) ? 1.0 : 0.0;
    levi_pos.residual = (min_levi_eig <= 0.0) ? 1.0 : 0.0;
    metric_pd.residual = (min_metric_eig <= 0.0) ? 1.0 : 0.0;
    if (min_levi_eig <= 0.0) rep.levi_degenerate = true;

    rep.residuals = {theta_nonzero, dtheta_antisym, j_squared, j_reeb, reeb_res,
                     levi_pos,      metric_sym,     metric_pd, metric_id, orth_split};
    return rep;
}

}  // namespace phgeo
