#pragma once

#include "phgeo/jacobi.hpp"

namespace phgeo {

// Cumulative integral, at each path node, of
//   2 <J gamma', V> theta(gamma') + theta(gamma') <tau(gamma'), V>
//   - theta(V) <tau(gamma'), gamma'>,
// the tangential pairing picked up by a fixed-length geodesic variation.
// The samples overload requires V on exactly the path grid (GridMismatch).
std::vector<double> variation_integral(const TWConnection& conn, const GeodesicPath& path,
                                       const std::function<Vec(double)>& V);
std::vector<double> variation_integral(const TWConnection& conn, const GeodesicPath& path,
                                       const std::vector<Vec>& V_samples);

struct GaussDefectRow {
    double t;
    double radial_pairing;   // <dexp_{tv}(tw), dexp_{tv}(v)>
    double integral;         // the variation integral at t
    double defect;           // |pairing - integral|
};

// Pairs the Jacobi-propagated field (d exp)_{tv}(tw) against the geodesic's
// radial direction and compares with the independent quadrature route.
// The pairing vanishes identically for vertical v or horizontal v on a
// torsion-free chart, and is generically nonzero for slanted v.
std::vector<GaussDefectRow> gauss_lemma_defect(const TWConnection& conn, const Vec& p,
                                               const Vec& v, const Vec& w,
                                               const std::vector<double>& t_grid);

// A two-parameter family of curves for first-variation checks.
struct CurveFamily {
    std::function<Vec(double, double)> pos;  // alpha(t, s)
    double t0 = 0.0, t1 = 1.0;
};

struct FirstVariationResult {
    double fd_value;       // dL/ds by central differences in s
    double formula_value;  // boundary term minus torsion-corrected integral
    double residual;
};

struct FirstVariationOptions {
    double eps_s = 1e-4;
    int grid = 400;
};

// Checks dL(alpha_s)/ds|_0 = <V,T>|_a^b - int {<V, nabla_T T> - <T_tor(V,T), T>} dt
// for an arc-length center curve.
FirstVariationResult first_variation_check(const TWConnection& conn, const CurveFamily& family,
                                           const FirstVariationOptions& opts = {});

}  // namespace phgeo
