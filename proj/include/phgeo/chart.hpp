#pragma once

#include <functional>
#include <memory>
#include <string>

#include "phgeo/errors.hpp"
#include "phgeo/types.hpp"

namespace phgeo {

// How coefficient derivatives are obtained. In analytic mode the chart
// supplies exact dtheta; in finite_difference mode it is produced by
// central differences of theta with the given step.
struct DerivativeMode {
    bool analytic = true;
    double fd_step = 1e-5;

    static DerivativeMode analytic_mode() { return {true, 1e-5}; }
    static DerivativeMode finite_difference(double h) { return {false, h}; }
};

// A strictly pseudoconvex pseudo-Hermitian manifold presented on a single
// coordinate chart. theta is the contact form, J the (1,1) complex structure
// extended by J xi = 0. The exterior derivative is represented by the matrix
// D with dtheta(X,Y) = X^T D Y and D_ij = (d_i theta_j - d_j theta_i) / 2,
// i.e. the half-skew normalization dtheta(X,Y) = (X theta(Y) - Y theta(X)
// - theta([X,Y])) / 2. All bilinear identities in this library are written
// for that normalization.
class Chart {
  public:
    virtual ~Chart() = default;

    int dim() const { return dim_; }
    int cr_rank() const { return (dim_ - 1) / 2; }
    const Box& domain() const { return domain_; }
    const std::string& name() const { return name_; }
    const DerivativeMode& mode() const { return mode_; }

    // Covector coefficients of theta at p, length dim().
    virtual Vec theta(const Vec& p) const = 0;

    // Matrix of dtheta at p (antisymmetric). Default: central differences
    // of theta; analytic charts override.
    virtual Mat dtheta(const Vec& p) const;

    // Matrix of the extended complex structure J at p.
    virtual Mat complex_structure(const Vec& p) const = 0;

    // Charts constructed by the Heisenberg builtin report true; the
    // closed-form Jacobi oracle is only valid there.
    virtual bool is_heisenberg() const { return false; }

    // Human-readable record of the conventions this chart is built with.
    virtual std::string convention_ledger() const { return name_; }

    // Throws ChartBoundary when p is outside the formulas' validity region
    // (the domain box with a small stencil margin).
    void require_evaluable(const Vec& p) const;

  protected:
    Chart(int dim, Box domain, std::string name, DerivativeMode mode)
        : dim_(dim), domain_(std::move(domain)), name_(std::move(name)), mode_(mode) {}

    int dim_;
    Box domain_;
    std::string name_;
    DerivativeMode mode_;
};

using ChartPtr = std::shared_ptr<const Chart>;

// A chart given by ordinary callables; used by the JSON loader and tests.
class CallableChart final : public Chart {
  public:
    using VecFn = std::function<Vec(const Vec&)>;
    using MatFn = std::function<Mat(const Vec&)>;

    CallableChart(int dim, Box domain, std::string name, DerivativeMode mode,
                  VecFn theta, MatFn j, MatFn dtheta = nullptr)
        : Chart(dim, std::move(domain), std::move(name), mode),
          theta_(std::move(theta)), j_(std::move(j)), dtheta_(std::move(dtheta)) {}

    Vec theta(const Vec& p) const override {
        require_evaluable(p);
        return theta_(p);
    }
    Mat dtheta(const Vec& p) const override {
        if (dtheta_ && mode_.analytic) return dtheta_(p);
        return Chart::dtheta(p);
    }
    Mat complex_structure(const Vec& p) const override {
        require_evaluable(p);
        return j_(p);
    }

  private:
    VecFn theta_;
    MatFn j_;
    MatFn dtheta_;
};

namespace fd {

// Step scaled to the magnitude of the base point.
inline double scaled_step(double h, const Vec& p) {
    return h * std::max(1.0, p.lpNorm<Eigen::Infinity>());
}

// Fourth-order central difference of a vector-valued field along axis i.
template <typename F>
Vec partial4(const F& f, const Vec& p, int i, double h) {
    Vec e = Vec::Zero(p.size());
    e[i] = 1.0;
    return (8.0 * (f(p + h * e) - f(p - h * e)) - (f(p + 2.0 * h * e) - f(p - 2.0 * h * e))) /
           (12.0 * h);
}

template <typename F>
Mat partial4_mat(const F& f, const Vec& p, int i, double h) {
    Vec e = Vec::Zero(p.size());
    e[i] = 1.0;
    return (8.0 * (f(p + h * e) - f(p - h * e)) - (f(p + 2.0 * h * e) - f(p - 2.0 * h * e))) /
           (12.0 * h);
}

}  // namespace fd

}  // namespace phgeo
