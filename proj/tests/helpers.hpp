#pragma once

// Shared test helpers.

#include <cmath>
#include <random>

#include "mems/core.hpp"

namespace testutil {

// Smooth random field vanishing at +-1 with min value >= -amp.
inline mems::DeflectionField random_admissible(const mems::Grid1D& g, std::mt19937& rng,
                                               double amp = 0.4) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double c[4];
    for (double& ck : c) ck = U(rng);
    mems::DeflectionField u(g);
    double max_abs = 0.0;
    for (int i = 0; i < g.num_nodes(); ++i) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) {
            s += c[k] * std::sin((k + 1) * M_PI * (g.x[i] + 1.0) / 2.0);
        }
        u.values[i] = s;
        max_abs = std::max(max_abs, std::abs(s));
    }
    if (max_abs > 0.0) {
        for (auto& v : u.values) v *= amp / max_abs;
    }
    u.values.front() = 0.0;
    u.values.back() = 0.0;
    return u;
}

}  // namespace testutil
