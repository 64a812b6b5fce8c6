#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phgeo/chart.hpp"

namespace phgeo {

// Everything the structure determines at a single point.
struct StructurePacket {
    Vec theta;      // contact form coefficients
    Mat dtheta;     // half-skew matrix D, dtheta(X,Y) = X^T D Y
    Mat J;          // complex structure, J xi = 0
    Vec xi;         // Reeb field
    Mat pi_h;       // horizontal projection I - xi theta^T
    Mat levi;       // L(X,Y) = dtheta(X, JY)
    Mat G;          // pi_h^* levi
    Mat g;          // Webster metric theta x theta + G
    Mat g_inv;
    double reeb_residual = 0.0;

    double inner(const Vec& a, const Vec& b) const { return a.dot(g * b); }
    double norm(const Vec& a) const { return std::sqrt(std::max(0.0, inner(a, a))); }
    double theta_of(const Vec& a) const { return theta.dot(a); }
    double dtheta_of(const Vec& a, const Vec& b) const { return a.dot(dtheta * b); }
};

// Solves theta(xi)=1, dtheta(xi,.)=0 by least squares over the stacked
// (2m+2)-row system. Throws SingularStructure when the system is
// rank-deficient (theta ^ (dtheta)^m degenerate at p).
Vec compute_reeb(const Chart& chart, const Vec& p);

struct ReebDiagnostics {
    Vec xi;
    double residual;          // |A xi - rhs|
    double condition_number;  // sigma_max / sigma_min of the stacked system
};
ReebDiagnostics compute_reeb_diagnostics(const Chart& chart, const Vec& p);

// Webster metric at p. Throws NotPositiveDefinite when the smallest
// eigenvalue is <= 0 (chart not strictly pseudoconvex there).
Mat webster_metric(const Chart& chart, const Vec& p);

// Full per-point package used by the connection and integrators.
StructurePacket structure_at(const Chart& chart, const Vec& p);

struct InvariantResidual {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass() const { return residual < tolerance; }
};

struct StructureValidationReport {
    std::string chart_name;
    int samples = 0;
    std::vector<InvariantResidual> residuals;
    bool levi_degenerate = false;
    bool pass() const {
        if (levi_degenerate) return false;
        for (const auto& r : residuals)
            if (!r.pass()) return false;
        return true;
    }
    const InvariantResidual* find(const std::string& name) const {
        for (const auto& r : residuals)
            if (r.name == name) return &r;
        return nullptr;
    }
};

// Checks the structure axioms (theta nowhere zero, J^2 = -pi_h on H,
// dtheta antisymmetric, Levi positivity, Reeb identities, metric identities)
// over a Halton sample of the domain. Failures are reported, not thrown.
StructureValidationReport validate_structure(const Chart& chart, int samples,
                                             double tol_scale = 1.0);

// Deterministic low-discrepancy points in the chart domain.
std::vector<Vec> halton_points(const Box& box, int count, double shrink = 0.9);

}  // namespace phgeo
