#pragma once

#include <string>
#include <vector>

#include "phgeo/chart.hpp"

namespace phgeo {

// Heisenberg group H_m on R^{2m+1}, coordinates (x^1..x^m, y^1..y^m, t),
// theta = dt + sum_i (x^i dy^i - y^i dx^i). The left-invariant frame
// X_i = d_{x^i} + y^i d_t, Y_i = d_{y^i} - x^i d_t, xi = d_t is orthonormal
// for the Webster metric in the normalization used here, and J X_i = Y_i.
ChartPtr heisenberg(int m);

// Standard Sasakian 3-sphere on a stereographic chart u in R^3,
// p(u) = ((1-|u|^2)/(1+|u|^2), 2u/(1+|u|^2)) in S^3 c R^4 ~ C^2,
// theta_p(X) = <ip, X>, J = multiplication by i on the contact planes.
// The chart covers S^3 minus the antipode of the center point.
ChartPtr sasakian_sphere3();

// Closed-form Reeb field of the sphere chart (pushforward of the Hopf
// field ip); kept separate from the least-squares path for cross-checks.
Vec sphere3_reeb_analytic(const Vec& u);

// Embedding helpers for the sphere chart (used by tests).
Vec sphere3_embed(const Vec& u);
Mat sphere3_embed_jacobian(const Vec& u);

// Registry.
std::vector<std::string> list_manifolds();

// Accepts a registered name ("heisenberg1", "heisenberg2", "heisenberg-m"
// with --m, "sphere3"), or "file:<path>" for a JSON chart document.
ChartPtr make_chart(const std::string& name_or_file);

// JSON chart schema:
// { "dim": n, "domain": {"min": [...], "max": [...]},
//   "theta": {"builtin": "<name>"} | {"polynomial": [component monomial lists]},
//   "J":     {"builtin": "<name>"} | {"polynomial": [[entry monomial lists]]},
//   "derivative_mode": "analytic" | {"finite_difference": {"step": h}} }
// A monomial is {"coeff": c, "powers": [k_1..k_n]}.
ChartPtr chart_from_json_file(const std::string& path);
ChartPtr chart_from_json_text(const std::string& text);

}  // namespace phgeo
