#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace phgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr const char* kToolVersion = "phgeo 1.0.0";

// Axis-aligned validity region of a chart.
struct Box {
    Vec lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Vec& p, double slack = 0.0) const {
        for (int i = 0; i < dim(); ++i)
            if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
        return true;
    }

    // Distance from p to the nearest face, negative outside.
    double margin(const Vec& p) const {
        double m = std::numeric_limits<double>::max();
        for (int i = 0; i < dim(); ++i) {
            m = std::min(m, p[i] - lo[i]);
            m = std::min(m, hi[i] - p[i]);
        }
        return m;
    }

    static Box cube(int n, double half_width) {
        Box b;
        b.lo = Vec::Constant(n, -half_width);
        b.hi = Vec::Constant(n, half_width);
        return b;
    }
};

// Christoffel-like array G(k,i,j) = coefficient of e_k in D(e_i, e_j).
class Tensor3 {
  public:
    Tensor3() : n_(0) {}
    explicit Tensor3(int n) : n_(n), d_(static_cast<size_t>(n) * n * n, 0.0) {}

    int dim() const { return n_; }
    double& operator()(int k, int i, int j) { return d_[(static_cast<size_t>(k) * n_ + i) * n_ + j]; }
    double operator()(int k, int i, int j) const { return d_[(static_cast<size_t>(k) * n_ + i) * n_ + j]; }

    // Contraction G(.,x,y): vector with components G(k,i,j) x^i y^j.
    Vec apply(const Vec& x, const Vec& y) const {
        Vec out = Vec::Zero(n_);
        for (int k = 0; k < n_; ++k) {
            double s = 0.0;
            const double* row = &d_[static_cast<size_t>(k) * n_ * n_];
            for (int i = 0; i < n_; ++i) {
                double xi = x[i];
                if (xi == 0.0) continue;
                const double* ri = row + static_cast<size_t>(i) * n_;
                double t = 0.0;
                for (int j = 0; j < n_; ++j) t += ri[j] * y[j];
                s += xi * t;
            }
            out[k] = s;
        }
        return out;
    }

    // Matrix M(k,j) = G(k,i,j) x^i  (covariant-derivative-in-direction-x operator).
    Mat apply_left(const Vec& x) const {
        Mat out = Mat::Zero(n_, n_);
        for (int k = 0; k < n_; ++k)
            for (int j = 0; j < n_; ++j) {
                double s = 0.0;
                for (int i = 0; i < n_; ++i) s += (*this)(k, i, j) * x[i];
                out(k, j) = s;
            }
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : d_) m = std::max(m, std::abs(v));
        return m;
    }

  private:
    int n_;
    std::vector<double> d_;
};

// Curvature array R(l,i,j,k) = component l of R(e_i,e_j)e_k.
class Tensor4 {
  public:
    Tensor4() : n_(0) {}
    explicit Tensor4(int n) : n_(n), d_(static_cast<size_t>(n) * n * n * n, 0.0) {}

    int dim() const { return n_; }
    double& operator()(int l, int i, int j, int k) {
        return d_[((static_cast<size_t>(l) * n_ + i) * n_ + j) * n_ + k];
    }
    double operator()(int l, int i, int j, int k) const {
        return d_[((static_cast<size_t>(l) * n_ + i) * n_ + j) * n_ + k];
    }

    // R(x,y)z as a vector.
    Vec apply(const Vec& x, const Vec& y, const Vec& z) const {
        Vec out = Vec::Zero(n_);
        for (int l = 0; l < n_; ++l) {
            double s = 0.0;
            for (int i = 0; i < n_; ++i) {
                if (x[i] == 0.0) continue;
                for (int j = 0; j < n_; ++j) {
                    if (y[j] == 0.0) continue;
                    double t = 0.0;
                    for (int k = 0; k < n_; ++k) t += (*this)(l, i, j, k) * z[k];
                    s += x[i] * y[j] * t;
                }
            }
            out[l] = s;
        }
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : d_) m = std::max(m, std::abs(v));
        return m;
    }

  private:
    int n_;
    std::vector<double> d_;
};

}  // namespace phgeo
