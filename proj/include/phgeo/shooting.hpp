#pragma once

#include "phgeo/jacobi.hpp"

namespace phgeo {

enum class ConnectionKind { tanaka_webster, levi_civita };

struct ShootOptions {
    ConnectionKind kind = ConnectionKind::tanaka_webster;
    int max_iterations = 60;
    double tol = 1e-8;          // coordinate residual |exp_p(v) - q|
    double length_cap = 50.0;   // reject candidate v with |v|_g beyond this
    double geodesic_step = 2e-3;
};

struct ShootResult {
    Vec v;             // initial velocity with exp_p(v) = q
    double length;     // |v|_g(p) = geodesic length over unit parameter
    double residual;
    int iterations;
};

// Newton iteration on v -> exp_p(v) - q. The Jacobian is the Jacobi-field
// differential of the exponential for the canonical connection, or finite
// differences of the flow for the Levi-Civita variant. Throws
// NoConvergence / SingularJacobian.
ShootResult shoot_boundary_value(const TWConnection& conn, const Vec& p, const Vec& q,
                                 const Vec& v0, const ShootOptions& opts = {});

// Riemannian distance of the Webster metric by Levi-Civita shooting
// (valid for pairs joined by a unique minimizing geodesic).
double riemannian_distance(const TWConnection& conn, const Vec& p, const Vec& q,
                           const ShootOptions& opts = {});

struct BrokenGeodesic {
    std::vector<Vec> joints;         // p, m_1, ..., m_{k-1}, q
    std::vector<ShootResult> segments;
    double total_length = 0.0;
    double max_joint_mismatch = 0.0;
};

struct DeltaOptions {
    int restarts = 4;
    unsigned seed = 1;
    ShootOptions shoot;
    int nelder_mead_iters = 160;
    // Extra initial placements for the interior joints; each hint seeds a
    // start with all joints at that point.
    std::vector<Vec> waypoint_hints;
};

struct DeltaBound {
    double value;
    BrokenGeodesic best;
};

// Certified upper bound for the broken-geodesic distance: minimizes total
// length over k-segment broken geodesics (interior joints as decision
// variables, segments solved by shooting) with deterministic restarts.
DeltaBound delta_upper_bound(const TWConnection& conn, const Vec& p, const Vec& q, int k,
                             const DeltaOptions& opts = {});

}  // namespace phgeo
