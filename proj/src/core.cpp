#include "mems/core.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace mems {

void Params::validate() const {
    auto finite_nonneg = [](double v) {
        return std::isfinite(v) && v >= 0.0;
    };
    if (!finite_nonneg(lambda) || !finite_nonneg(beta) || !finite_nonneg(tau) ||
        !finite_nonneg(gamma) || !finite_nonneg(a) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("Params: coefficients must be finite and non-negative");
    }
    if (beta == 0.0 && tau == 0.0) {
        throw std::invalid_argument("Params: (beta, tau) must not both vanish");
    }
    if (rhs == RhsKind::free_boundary && epsilon <= 0.0) {
        throw std::invalid_argument("Params: free-boundary model requires epsilon > 0");
    }
    if (epsilon < 0.0) {
        throw std::invalid_argument("Params: epsilon must be non-negative");
    }
}

Grid1D::Grid1D(int n_interior) : n(n_interior) {
    if (n < 1) throw std::invalid_argument("Grid1D: need at least one interior node");
    h = 2.0 / (n + 1);
    x.resize(n + 2);
    for (int i = 0; i <= n + 1; ++i) x[i] = -1.0 + i * h;
    x.front() = -1.0;
    x.back() = 1.0;
}

Grid2D::Grid2D(int nx_interior, int neta_interior)
    : nx(nx_interior), neta(neta_interior) {
    if (nx < 1 || neta < 1) throw std::invalid_argument("Grid2D: empty grid");
    hx = 2.0 / (nx + 1);
    heta = 1.0 / (neta + 1);
    x.resize(nx + 2);
    for (int i = 0; i <= nx + 1; ++i) x[i] = -1.0 + i * hx;
    x.front() = -1.0;
    x.back() = 1.0;
    eta.resize(neta + 2);
    for (int j = 0; j <= neta + 1; ++j) eta[j] = j * heta;
    eta.front() = 0.0;
    eta.back() = 1.0;
}

std::pair<Grid1D, Grid2D> make_grids(int n, int neta) {
    if (n < kMinGridNodes || neta < kMinGridNodes) {
        throw std::invalid_argument("make_grids: grid under-resolved, need n, neta >= " +
                                    std::to_string(kMinGridNodes));
    }
    return {Grid1D(n), Grid2D(n, neta)};
}

DeflectionField::DeflectionField(const Grid1D& g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
    if (values.size() != static_cast<size_t>(grid.num_nodes())) {
        throw std::invalid_argument("DeflectionField: value count does not match grid");
    }
}

double DeflectionField::min() const {
    return *std::min_element(values.begin(), values.end());
}

void DeflectionField::validate() const {
    if (values.front() != 0.0 || values.back() != 0.0) {
        throw std::invalid_argument("DeflectionField: boundary values must vanish");
    }
    if (min() <= -1.0) {
        throw SingularGeometryError("DeflectionField: min u <= -1");
    }
}

Profile::Profile(const Grid1D& g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
    if (values.size() != static_cast<size_t>(grid.num_nodes())) {
        throw std::invalid_argument("Profile: value count does not match grid");
    }
}

double trapz(const Grid1D& grid, const std::vector<double>& f) {
    double s = 0.5 * (f.front() + f.back());
    for (int i = 1; i <= grid.n; ++i) s += f[i];
    return s * grid.h;
}

std::vector<double> diff1(const Grid1D& grid, const std::vector<double>& f) {
    const int m = grid.num_nodes();
    const double h = grid.h;
    std::vector<double> d(m);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for (int i = 1; i < m - 1; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    d[m - 1] = (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * h);
    return d;
}

std::vector<double> diff2(const Grid1D& grid, const std::vector<double>& f) {
    const int m = grid.num_nodes();
    const double h2 = grid.h * grid.h;
    std::vector<double> d(m);
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    for (int i = 1; i < m - 1; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    d[m - 1] = (2.0 * f[m - 1] - 5.0 * f[m - 2] + 4.0 * f[m - 3] - f[m - 4]) / h2;
    return d;
}

Norms discrete_norms(const DeflectionField& u) {
    const auto& f = u.values;
    const Grid1D& g = u.grid;
    std::vector<double> f2(f.size());
    for (size_t i = 0; i < f.size(); ++i) f2[i] = f[i] * f[i];
    auto d1 = diff1(g, f);
    auto d2 = diff2(g, f);
    std::vector<double> d1sq(f.size()), d2sq(f.size());
    for (size_t i = 0; i < f.size(); ++i) {
        d1sq[i] = d1[i] * d1[i];
        d2sq[i] = d2[i] * d2[i];
    }
    Norms out;
    out.l2 = std::sqrt(trapz(g, f2));
    out.h1_seminorm = std::sqrt(trapz(g, d1sq));
    out.h2_seminorm = std::sqrt(trapz(g, d2sq));
    out.min_u = u.min();
    return out;
}

}  // namespace mems
