#pragma once

#include <random>

#include "phgeo/jacobi.hpp"

namespace phgeo {

// Quadrature data shared by every index-form evaluation along one geodesic:
// times (uniform, element midpoints included), velocity, metric, and the
// lowered curvature operator Q with <R(X,g')g',X> = X^T Q X.
struct GeodesicQuadrature {
    const GeodesicPath* path = nullptr;
    double h = 0.0;                 // element width (grid spacing is h/2)
    std::vector<double> t;          // 2M+1 points
    std::vector<Vec> c;             // velocity
    std::vector<Mat> g;             // metric
    std::vector<Mat> Q;             // lowered curvature operator
    std::vector<Vec> xi;            // Reeb field along the path
    std::vector<Mat> J;

    double length() const { return t.back() - t.front(); }
};

GeodesicQuadrature build_quadrature(const TWConnection& conn, const GeodesicPath& path,
                                    double element = 5e-3);

// A field along the geodesic: value and covariant derivative at t.
struct FieldEval {
    Vec X;
    Vec DX;
};
using FieldFn = std::function<FieldEval(double)>;

struct IndexValue {
    double value;
    double error_estimate;
};

// I(X) = int { <DX,DX> - <R(X,g')g',X> } dt by composite Simpson per smooth
// piece; breakpoints must lie on the quadrature grid. NotArcLength unless
// the geodesic is unit speed.
IndexValue index_form(const GeodesicQuadrature& quad, const FieldFn& X,
                      const std::vector<double>& breakpoints = {});

// Solutions of the comparison equation nabla^2 Z = R(g',Z)g'.
JacobiSolution solve_eq53(const TWConnection& conn, const GeodesicPath& path, const Vec& Z0,
                          const Vec& Z0p, const JacobiOptions& opts = {});

// Basis of comparison solutions vanishing at t=0 with independent initial
// derivatives (the first two are the radial and Reeb directions when
// available).
struct ComparisonBasis {
    std::vector<JacobiSolution> Z;
    double min_sigma = 0.0;  // smallest normalized singular value of [Z_A(t)] over samples
    double reciprocity_residual = 0.0;  // max |<Z_A,Z_B'> - <Z_B,Z_A'>|
};
ComparisonBasis build_comparison_basis(const TWConnection& conn, const GeodesicPath& path,
                                       const GeodesicQuadrature& quad,
                                       const JacobiOptions& opts = {});

struct IndexComparisonReport {
    double I_Y = 0.0;
    double min_gap = 0.0;            // min over trials of I(X) - I(Y)
    int violations = 0;              // trials with I(X) < I(Y) - tol
    int equality_mismatches = 0;     // near-equality without X ~ Y (or vice versa)
    int trials = 0;
    double identity_residual = 0.0;  // basis-expansion identity, relative
    double reciprocity_residual = 0.0;
};

struct IndexComparisonOptions {
    int trials = 200;
    unsigned seed = 7;
    double tol = 1e-7;
    double equality_eps = 1e-6;
    int sine_modes = 5;
    bool corner_family = true;  // include piecewise-differentiable trials
};

// Compares I(X) against I(Y) for the comparison-equation solution Y hitting
// the given endpoint value, over random admissible fields X with X(0)=0 and
// X(l)=Y(l). Throws ConjugatePointPresent when the segment has an interior
// conjugate point. Also evaluates the basis-expansion identity
//   I(X) = <sum f^A Z_A, sum f^B Z_B'>(l) + int |sum df^A Z_A|^2
// for the trials built from basis coefficients.
IndexComparisonReport index_comparison(const TWConnection& conn, const GeodesicPath& path,
                                       const Vec& Y_endpoint,
                                       const IndexComparisonOptions& opts = {});

// ---- experiments -----------------------------------------------------------

struct BonnetMyersRow {
    double slant;
    double bound_sectional;  // pi / sqrt(k0 (1 - c^2))
    double bound_ricci;      // same with the Ricci-derived constant
    double t_star;           // measured first conjugate parameter (<0: none found)
    bool within_bound;
    std::string status;      // "ok" or "vertical-excluded"
};

struct BonnetMyersOptions {
    Vec base_point;          // empty: chart center
    unsigned seed = 3;
    double margin = 1e-3;
    int curvature_samples = 120;
    double search_factor = 1.5;
};

struct BonnetMyersReport {
    double k0 = 0.0;        // measured min of K^H minus a safety margin
    double ric0 = 0.0;      // measured horizontal Ricci lower bound / (2m-1)
    std::vector<BonnetMyersRow> rows;
    bool monotone = true;   // t*(c) nondecreasing
    bool pass = true;
};

BonnetMyersReport bonnet_myers_experiment(const TWConnection& conn,
                                          const std::vector<double>& slants,
                                          const BonnetMyersOptions& opts = {});

struct CartanHadamardReport {
    int directions = 0;
    int conjugate_points_found = 0;
    double min_sigma_beyond_eps = 0.0;  // evidence margin
    int truncated_paths = 0;
    bool pass = true;
};

struct CartanHadamardOptions {
    unsigned seed = 5;
    double sigma_floor_from = 0.5;  // ignore the ramp-up below this t
    Vec base_point;                 // empty: chart center
};

CartanHadamardReport cartan_hadamard_sweep(const TWConnection& conn, int directions,
                                           double L_max,
                                           const CartanHadamardOptions& opts = {});

// Measured extremes of the horizontal curvature over a sample of points and
// horizontal planes. Used by the experiments in place of assumed constants.
struct CurvatureScan {
    double min_sectional;
    double max_sectional;
    double min_ricci_horizontal;  // min of Ric(Y,Y)/|Y|^2 over horizontal Y
};
CurvatureScan scan_horizontal_curvature(const TWConnection& conn, int samples, unsigned seed,
                                        double shrink = 0.25);

}  // namespace phgeo
