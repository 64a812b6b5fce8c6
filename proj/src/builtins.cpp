#include "phgeo/builtins.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace phgeo {

namespace {

class HeisenbergChart final : public Chart {
  public:
    explicit HeisenbergChart(int m)
        : Chart(2 * m + 1, make_domain(m), "heisenberg" + std::to_string(m),
                DerivativeMode::analytic_mode()),
          m_(m) {}

    Vec theta(const Vec& p) const override {
        require_evaluable(p);
        const int n = dim_;
        Vec th = Vec::Zero(n);
        for (int i = 0; i < m_; ++i) {
            th[i] = -p[m_ + i];  // -y^i dx^i
            th[m_ + i] = p[i];   //  x^i dy^i
        }
        th[n - 1] = 1.0;
        return th;
    }

    Mat dtheta(const Vec& p) const override {
        require_evaluable(p);
        Mat D = Mat::Zero(dim_, dim_);
        for (int i = 0; i < m_; ++i) {
            D(i, m_ + i) = 1.0;
            D(m_ + i, i) = -1.0;
        }
        return D;
    }

    Mat complex_structure(const Vec& p) const override {
        require_evaluable(p);
        const int n = dim_;
        Mat J = Mat::Zero(n, n);
        for (int i = 0; i < m_; ++i) {
            J(i, m_ + i) = -1.0;        // J Y_i = -X_i direction content
            J(m_ + i, i) = 1.0;         // J X_i = Y_i
            J(n - 1, i) = -p[i];        // x^i
            J(n - 1, m_ + i) = -p[m_ + i];  // y^i
        }
        return J;
    }

    bool is_heisenberg() const override { return true; }

    std::string convention_ledger() const override {
        std::ostringstream os;
        os << "heisenberg m=" << m_
           << "; theta = dt + sum(x^i dy^i - y^i dx^i); dtheta(X_i,Y_i) = 1 "
              "(half-skew normalization); frame {X_i = dx_i + y^i dt, "
              "Y_i = dy_i - x^i dt, xi = dt} orthonormal and parallel; "
              "geodesics are coordinate lines";
        return os.str();
    }

  private:
    static Box make_domain(int m) {
        Box b;
        const int n = 2 * m + 1;
        b.lo = Vec::Constant(n, -80.0);
        b.hi = Vec::Constant(n, 80.0);
        b.lo[n - 1] = -4000.0;
        b.hi[n - 1] = 4000.0;
        return b;
    }

    int m_;
};

// Ambient multiplication by i under R^4 ~ C^2, (z1, z2) = (p0+ip1, p2+ip3).
inline Eigen::Vector4d amb_i(const Eigen::Vector4d& p) {
    return {-p[1], p[0], -p[3], p[2]};
}

class Sphere3Chart final : public Chart {
  public:
    Sphere3Chart()
        : Chart(3, Box::cube(3, 8.0), "sphere3", DerivativeMode::analytic_mode()) {}

    Vec theta(const Vec& u) const override {
        require_evaluable(u);
        Eigen::Vector4d p = embed(u);
        Eigen::Matrix<double, 4, 3> Dp = embed_jacobian(u);
        Eigen::Vector4d omega = amb_i(p);
        return Dp.transpose() * omega;
    }

    Mat dtheta(const Vec& u) const override {
        require_evaluable(u);
        Eigen::Matrix<double, 4, 3> Dp = embed_jacobian(u);
        Eigen::Matrix4d Damb;
        Damb << 0, 1, 0, 0,
               -1, 0, 0, 0,
                0, 0, 0, 1,
                0, 0, -1, 0;
        return Dp.transpose() * Damb * Dp;
    }

    Mat complex_structure(const Vec& u) const override {
        require_evaluable(u);
        Eigen::Vector4d p = embed(u);
        Eigen::Matrix<double, 4, 3> Dp = embed_jacobian(u);
        Eigen::Vector4d xi_amb = amb_i(p);
        // J X = pseudo-inverse of Dp applied to i (X - <i p, X> i p).
        Eigen::Matrix3d gram = Dp.transpose() * Dp;
        Eigen::Matrix3d gram_inv = gram.inverse();
        Eigen::Matrix<double, 3, 4> pinv = gram_inv * Dp.transpose();

        Eigen::Matrix4d proj = Eigen::Matrix4d::Identity() - xi_amb * xi_amb.transpose();
        Eigen::Matrix4d mult_i;
        mult_i << 0, -1, 0, 0,
                  1, 0, 0, 0,
                  0, 0, 0, -1,
                  0, 0, 1, 0;
        return pinv * mult_i * proj * Dp;
    }

    std::string convention_ledger() const override {
        return "sphere3; stereographic chart p(u) = ((1-|u|^2)/(1+|u|^2), 2u/(1+|u|^2));"
               " theta_p(X) = <ip,X>; J = i on contact planes; Webster metric = round"
               " metric; chart excludes the antipode of the center";
    }

    static Eigen::Vector4d embed(const Vec& u) {
        double s = u.squaredNorm();
        double d = 1.0 + s;
        return {(1.0 - s) / d, 2.0 * u[0] / d, 2.0 * u[1] / d, 2.0 * u[2] / d};
    }

    static Eigen::Matrix<double, 4, 3> embed_jacobian(const Vec& u) {
        double s = u.squaredNorm();
        double d = 1.0 + s;
        double d2 = d * d;
        Eigen::Matrix<double, 4, 3> Dp;
        for (int j = 0; j < 3; ++j) Dp(0, j) = -4.0 * u[j] / d2;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                Dp(i + 1, j) = 2.0 * ((i == j ? 1.0 : 0.0) / d - 2.0 * u[i] * u[j] / d2);
        return Dp;
    }
};

}  // namespace

ChartPtr heisenberg(int m) {
    if (m < 1) throw Error("heisenberg: m must be >= 1");
    return std::make_shared<HeisenbergChart>(m);
}

ChartPtr sasakian_sphere3() { return std::make_shared<Sphere3Chart>(); }

Vec sphere3_embed(const Vec& u) {
    Eigen::Vector4d p = Sphere3Chart::embed(u);
    return Vec(p);
}

Mat sphere3_embed_jacobian(const Vec& u) {
    return Mat(Sphere3Chart::embed_jacobian(u));
}

Vec sphere3_reeb_analytic(const Vec& u) {
    Eigen::Vector4d p = Sphere3Chart::embed(u);
    Eigen::Matrix<double, 4, 3> Dp = Sphere3Chart::embed_jacobian(u);
    Eigen::Matrix3d gram = Dp.transpose() * Dp;
    return gram.inverse() * (Dp.transpose() * amb_i(p));
}

std::vector<std::string> list_manifolds() {
    return {"heisenberg1", "heisenberg2", "heisenberg3", "sphere3"};
}

namespace {

using nlohmann::json;

struct Monomial {
    double coeff;
    std::vector<int> powers;
    double eval(const Vec& p) const {
        double v = coeff;
        for (size_t i = 0; i < powers.size(); ++i)
            for (int k = 0; k < powers[i]; ++k) v *= p[static_cast<int>(i)];
        return v;
    }
    // Polynomial derivative along axis j.
    Monomial derivative(int j) const {
        Monomial d = *this;
        if (powers[j] == 0) {
            d.coeff = 0.0;
        } else {
            d.coeff *= powers[j];
            d.powers[j] -= 1;
        }
        return d;
    }
};

using Poly = std::vector<Monomial>;

double eval_poly(const Poly& poly, const Vec& p) {
    double s = 0.0;
    for (const auto& m : poly) s += m.eval(p);
    return s;
}

Poly parse_poly(const json& j, int n) {
    Poly out;
    for (const auto& mj : j) {
        Monomial m;
        m.coeff = mj.at("coeff").get<double>();
        m.powers = mj.at("powers").get<std::vector<int>>();
        if (static_cast<int>(m.powers.size()) != n)
            throw Error("chart json: monomial powers length != dim");
        out.push_back(m);
    }
    return out;
}

ChartPtr chart_from_json(const json& doc) {
    const int n = doc.at("dim").get<int>();
    if (n < 3 || n % 2 == 0) throw Error("chart json: dim must be odd and >= 3");

    Box box;
    box.lo = Vec(n);
    box.hi = Vec(n);
    {
        auto lo = doc.at("domain").at("min").get<std::vector<double>>();
        auto hi = doc.at("domain").at("max").get<std::vector<double>>();
        if (static_cast<int>(lo.size()) != n || static_cast<int>(hi.size()) != n)
            throw Error("chart json: domain size != dim");
        for (int i = 0; i < n; ++i) {
            box.lo[i] = lo[i];
            box.hi[i] = hi[i];
        }
    }

    DerivativeMode mode = DerivativeMode::analytic_mode();
    if (doc.contains("derivative_mode")) {
        const auto& dm = doc.at("derivative_mode");
        if (dm.is_string() && dm.get<std::string>() == "analytic") {
            mode = DerivativeMode::analytic_mode();
        } else if (dm.is_object() && dm.contains("finite_difference")) {
            mode = DerivativeMode::finite_difference(
                dm.at("finite_difference").at("step").get<double>());
        } else {
            throw Error("chart json: unknown derivative_mode");
        }
    }

    const auto& thj = doc.at("theta");
    const auto& jj = doc.at("J");

    if (thj.contains("builtin") || jj.contains("builtin")) {
        std::string bname = thj.contains("builtin") ? thj.at("builtin").get<std::string>()
                                                    : jj.at("builtin").get<std::string>();
        ChartPtr base = make_chart(bname);
        if (base->dim() != n) throw Error("chart json: builtin dim mismatch");
        std::string name = doc.value("name", bname + "-json");
        return std::make_shared<CallableChart>(
            n, box, name, mode,
            [base](const Vec& p) { return base->theta(p); },
            [base](const Vec& p) { return base->complex_structure(p); },
            mode.analytic ? CallableChart::MatFn([base](const Vec& p) { return base->dtheta(p); })
                          : nullptr);
    }

    std::vector<Poly> theta_polys;
    for (const auto& comp : thj.at("polynomial")) theta_polys.push_back(parse_poly(comp, n));
    if (static_cast<int>(theta_polys.size()) != n)
        throw Error("chart json: theta needs dim components");

    std::vector<std::vector<Poly>> j_polys(n);
    {
        const auto& rows = jj.at("polynomial");
        if (static_cast<int>(rows.size()) != n) throw Error("chart json: J needs dim rows");
        for (int r = 0; r < n; ++r)
            for (const auto& entry : rows[r]) j_polys[r].push_back(parse_poly(entry, n));
        for (int r = 0; r < n; ++r)
            if (static_cast<int>(j_polys[r].size()) != n)
                throw Error("chart json: J needs dim columns");
    }

    std::string name = doc.value("name", std::string("user-chart"));

    auto theta_fn = [theta_polys, n](const Vec& p) {
        Vec th(n);
        for (int i = 0; i < n; ++i) th[i] = eval_poly(theta_polys[i], p);
        return th;
    };
    auto j_fn = [j_polys, n](const Vec& p) {
        Mat J(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) J(r, c) = eval_poly(j_polys[r][c], p);
        return J;
    };

    CallableChart::MatFn dtheta_fn = nullptr;
    if (mode.analytic) {
        // Exact dtheta from the polynomial coefficients.
        dtheta_fn = [theta_polys, n](const Vec& p) {
            Mat D(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double dij = 0.0, dji = 0.0;
                    for (const auto& m : theta_polys[j]) dij += m.derivative(i).eval(p);
                    for (const auto& m : theta_polys[i]) dji += m.derivative(j).eval(p);
                    D(i, j) = 0.5 * (dij - dji);
                }
            return D;
        };
    }

    return std::make_shared<CallableChart>(n, box, name, mode, theta_fn, j_fn, dtheta_fn);
}

}  // namespace

ChartPtr chart_from_json_text(const std::string& text) {
    return chart_from_json(json::parse(text));
}

ChartPtr chart_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open chart file: " + path);
    json doc;
    in >> doc;
    return chart_from_json(doc);
}

ChartPtr make_chart(const std::string& name_or_file) {
    if (name_or_file.rfind("file:", 0) == 0)
        return chart_from_json_file(name_or_file.substr(5));
    if (name_or_file == "sphere3") return sasakian_sphere3();
    if (name_or_file.rfind("heisenberg", 0) == 0) {
        std::string suffix = name_or_file.substr(10);
        if (!suffix.empty() && suffix[0] == '-') suffix = suffix.substr(1);
        int m = suffix.empty() ? 1 : std::stoi(suffix);
        return heisenberg(m);
    }
    throw Error("unknown manifold: " + name_or_file);
}

}  // namespace phgeo
