#include "mems/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "mems/evolution.hpp"
#include "mems/stationary.hpp"

namespace mems {

namespace {

// State of the scaled shot w'' = (1+w)^{-2}: value and slope.
struct ShotState {
    double p = 0.0;
    double q = 0.0;
};

inline ShotState deriv(const ShotState& s) {
    const double w = 1.0 + s.p;
    return {s.q, 1.0 / (w * w)};
}

inline ShotState axpy(const ShotState& s, double h, const ShotState& d) {
    return {s.p + h * d.p, s.q + h * d.q};
}

// One Dormand-Prince step; fills the 5th-order result and the
// embedded error estimate.
void dp_step(const ShotState& s, double h, ShotState& out, double& err) {
    const ShotState k1 = deriv(s);
    const ShotState k2 = deriv(axpy(s, h / 5.0, k1));
    const ShotState k3 = deriv({s.p + h * (3.0 / 40.0 * k1.p + 9.0 / 40.0 * k2.p),
                                s.q + h * (3.0 / 40.0 * k1.q + 9.0 / 40.0 * k2.q)});
    const ShotState k4 =
        deriv({s.p + h * (44.0 / 45.0 * k1.p - 56.0 / 15.0 * k2.p + 32.0 / 9.0 * k3.p),
               s.q + h * (44.0 / 45.0 * k1.q - 56.0 / 15.0 * k2.q + 32.0 / 9.0 * k3.q)});
    const ShotState k5 = deriv(
        {s.p + h * (19372.0 / 6561.0 * k1.p - 25360.0 / 2187.0 * k2.p +
                    64448.0 / 6561.0 * k3.p - 212.0 / 729.0 * k4.p),
         s.q + h * (19372.0 / 6561.0 * k1.q - 25360.0 / 2187.0 * k2.q +
                    64448.0 / 6561.0 * k3.q - 212.0 / 729.0 * k4.q)});
    const ShotState k6 = deriv(
        {s.p + h * (9017.0 / 3168.0 * k1.p - 355.0 / 33.0 * k2.p +
                    46732.0 / 5247.0 * k3.p + 49.0 / 176.0 * k4.p -
                    5103.0 / 18656.0 * k5.p),
         s.q + h * (9017.0 / 3168.0 * k1.q - 355.0 / 33.0 * k2.q +
                    46732.0 / 5247.0 * k3.q + 49.0 / 176.0 * k4.q -
                    5103.0 / 18656.0 * k5.q)});
    out = {s.p + h * (35.0 / 384.0 * k1.p + 500.0 / 1113.0 * k3.p +
                      125.0 / 192.0 * k4.p - 2187.0 / 6784.0 * k5.p +
                      11.0 / 84.0 * k6.p),
           s.q + h * (35.0 / 384.0 * k1.q + 500.0 / 1113.0 * k3.q +
                      125.0 / 192.0 * k4.q - 2187.0 / 6784.0 * k5.q +
                      11.0 / 84.0 * k6.q)};
    const ShotState k7 = deriv(out);
    const double e_p =
        h * ((35.0 / 384.0 - 5179.0 / 57600.0) * k1.p +
             (500.0 / 1113.0 - 7571.0 / 16695.0) * k3.p +
             (125.0 / 192.0 - 393.0 / 640.0) * k4.p +
             (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5.p +
             (11.0 / 84.0 - 187.0 / 2100.0) * k6.p - 1.0 / 40.0 * k7.p);
    const double e_q =
        h * ((35.0 / 384.0 - 5179.0 / 57600.0) * k1.q +
             (500.0 / 1113.0 - 7571.0 / 16695.0) * k3.q +
             (125.0 / 192.0 - 393.0 / 640.0) * k4.q +
             (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5.q +
             (11.0 / 84.0 - 187.0 / 2100.0) * k6.q - 1.0 / 40.0 * k7.q);
    err = std::sqrt(e_p * e_p + e_q * e_q);
}

// First root y with w(y) = 0 for the shot starting at w(0) = m < 0.
double crossing_point(double m, double tol) {
    if (m >= 0.0 || m <= -1.0) {
        throw std::invalid_argument("shooting: m must lie in (-1, 0)");
    }
    double y = 0.0, h = 1e-2;
    ShotState s{m, 0.0};
    for (int it = 0; it < 1000000; ++it) {
        ShotState nxt;
        double err;
        dp_step(s, h, nxt, err);
        if (err > tol) {
            h *= std::max(0.2, 0.9 * std::pow(tol / err, 0.2));
            continue;
        }
        if (nxt.p >= 0.0) {
            // bisect the step size to the sign change
            double lo = 0.0, hi = h;
            for (int k = 0; k < 80 && hi - lo > 1e-16 * h; ++k) {
                const double mid = 0.5 * (lo + hi);
                ShotState probe;
                double e2;
                dp_step(s, mid, probe, e2);
                (probe.p >= 0.0 ? hi : lo) = mid;
            }
            return y + 0.5 * (lo + hi);
        }
        y += h;
        s = nxt;
        if (err > 0.0) h *= std::min(5.0, 0.9 * std::pow(tol / err, 0.2));
    }
    throw SolverError("shooting: no zero crossing found");
}

}  // namespace

double shooting_lambda(double m, double tau, double tol) {
    const double xs = crossing_point(m, tol);
    return tau * xs * xs;
}

double shooting_fold(double tau, double tol) {
    if (tau <= 0.0) throw std::invalid_argument("shooting_fold: tau must be positive");
    // golden-section maximization of lambda(m) on (-1, 0)
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = -0.99, b = -0.01;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = shooting_lambda(c, tau, tol), fd = shooting_lambda(d, tau, tol);
    while (b - a > 1e-12) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = shooting_lambda(c, tau, tol);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = shooting_lambda(d, tau, tol);
        }
    }
    return std::max(fc, fd);
}

namespace {

// Sample the scaled shot at the requested targets (ascending) by
// fixed-step fourth-order integration.
std::vector<double> sample_shot(double m, const std::vector<double>& targets) {
    std::vector<double> out;
    out.reserve(targets.size());
    ShotState s{m, 0.0};
    double y = 0.0;
    auto rk4 = [](const ShotState& st, double h) {
        const ShotState k1 = deriv(st);
        const ShotState k2 = deriv(axpy(st, 0.5 * h, k1));
        const ShotState k3 = deriv(axpy(st, 0.5 * h, k2));
        const ShotState k4 = deriv(axpy(st, h, k3));
        return ShotState{st.p + h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
                         st.q + h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q)};
    };
    for (double target : targets) {
        while (y < target - 1e-15) {
            const double h = std::min(1e-3, target - y);
            s = rk4(s, h);
            y += h;
        }
        out.push_back(s.p);
    }
    return out;
}

}  // namespace

ShootingResult shooting_oracle(double lambda, double tau, int n_interior, bool want_fold) {
    if (tau <= 0.0) throw std::invalid_argument("shooting_oracle: tau must be positive");
    if (lambda < 0.0) throw std::invalid_argument("shooting_oracle: lambda must be >= 0");
    ShootingResult res;
    Grid1D g(n_interior);

    if (want_fold) res.fold_lambda = shooting_fold(tau);

    if (lambda == 0.0) {
        res.roots_m.push_back(0.0);
        res.solutions.emplace_back(g);
        return res;
    }

    // bracket roots of lambda(m) - lambda on a scan grid in m
    const int scan = 400;
    std::vector<double> ms(scan), fs(scan);
    for (int i = 0; i < scan; ++i) {
        ms[i] = -0.998 + (0.996 * i) / (scan - 1);
        fs[i] = shooting_lambda(ms[i], tau) - lambda;
    }
    for (int i = 0; i + 1 < scan; ++i) {
        if (fs[i] == 0.0) fs[i] = -1e-300;
        if (fs[i] * fs[i + 1] < 0.0) {
            double lo = ms[i], hi = ms[i + 1];
            double flo = fs[i];
            for (int k = 0; k < 100 && hi - lo > 1e-13; ++k) {
                const double mid = 0.5 * (lo + hi);
                const double fm = shooting_lambda(mid, tau) - lambda;
                if (fm == 0.0 || (fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            res.roots_m.push_back(0.5 * (lo + hi));
        }
    }

    // reconstruct each solution: u(x) = w(x* |x|)
    for (double m : res.roots_m) {
        const double xs = crossing_point(m, 1e-12);
        std::vector<double> targets;
        const int half = (g.num_nodes() + 1) / 2;
        for (int i = g.num_nodes() - half; i < g.num_nodes(); ++i) {
            targets.push_back(xs * std::abs(g.x[i]));
        }
        std::sort(targets.begin(), targets.end());
        auto vals = sample_shot(m, targets);
        DeflectionField u(g);
        for (int i = 0; i < g.num_nodes(); ++i) {
            const double yi = xs * std::abs(g.x[i]);
            // targets were sorted ascending from the centre outwards
            const auto it = std::lower_bound(targets.begin(), targets.end(),
                                             yi - 1e-14);
            u.values[i] = vals[static_cast<size_t>(it - targets.begin())];
        }
        u.values.front() = 0.0;
        u.values.back() = 0.0;
        res.solutions.push_back(std::move(u));
    }
    return res;
}

namespace {

SweepRow run_sweep_row(const RunConfig& cfg, double eps, double gamma) {
    SweepRow row;
    row.epsilon = eps;
    row.gamma = gamma;
    row.beta = cfg.base.beta;
    row.tau = cfg.base.tau;
    row.lambda_stat = std::numeric_limits<double>::quiet_NaN();
    row.lambda_dyn = std::numeric_limits<double>::quiet_NaN();
    try {
        Params p = cfg.base;
        p.epsilon = eps;
        p.gamma = 0.0;

        StationaryOptions sopt;
        sopt.neta = cfg.neta;
        row.lambda_stat = pull_in_voltage(p, cfg.n, sopt);

        EvolutionOptions eopt;
        eopt.neta = cfg.neta;
        Params pd = p;
        pd.gamma = gamma;
        auto touches = [&](double lambda) {
            Params q = pd;
            q.lambda = lambda;
            return evolve(q, cfg.T_long, cfg.dt, cfg.n, eopt).touchdown.touched;
        };

        double lo = 0.5 * row.lambda_stat;
        int guard = 0;
        while (touches(lo)) {
            lo *= 0.5;
            if (++guard > 20) throw SolverError("sweep: no global lambda found");
        }
        double hi = 1.02 * row.lambda_stat;
        guard = 0;
        while (!touches(hi)) {
            hi *= 1.1;
            if (++guard > 30) throw SolverError("sweep: no touchdown lambda found");
        }
        while (hi - lo > cfg.lambda_resolution * row.lambda_stat) {
            const double mid = 0.5 * (lo + hi);
            (touches(mid) ? hi : lo) = mid;
        }
        row.lambda_dyn = 0.5 * (lo + hi);
        row.status = "ok";
    } catch (const std::exception& e) {
        row.status = e.what();
    }
    return row;
}

void append_row(std::ofstream& out, const SweepRow& r) {
    out << r.epsilon << ',' << r.gamma << ',' << r.beta << ',' << r.tau << ','
        << r.lambda_stat << ',' << r.lambda_dyn << ',' << r.status << '\n';
    out.flush();
}

}  // namespace

SweepTable sweep_pull_in(const RunConfig& cfg) {
    if (cfg.eps_values.empty() || cfg.gamma_values.empty()) {
        throw std::invalid_argument("sweep_pull_in: empty parameter range");
    }
    cfg.base.validate();

    std::vector<std::pair<double, double>> tuples;
    for (double e : cfg.eps_values) {
        for (double gm : cfg.gamma_values) tuples.emplace_back(e, gm);
    }
    const int total = static_cast<int>(tuples.size());

    SweepTable table;
    table.resolution = cfg.lambda_resolution;
    table.rows.resize(total);

    const std::string tmp_path =
        cfg.out_path.empty() ? std::string() : cfg.out_path + ".tmp";
    std::ofstream out;
    if (!tmp_path.empty()) {
        out.open(tmp_path);
        if (!out) throw std::runtime_error("cannot open " + tmp_path);
        out << "epsilon,gamma,beta,tau,lambda_stat,lambda_dyn,status\n"
            << std::setprecision(17);
    }

    std::atomic<int> next{0};
    std::vector<char> done(total, 0);
    int flushed = 0;
    std::mutex mtx;

    auto worker = [&] {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= total) return;
            SweepRow row = run_sweep_row(cfg, tuples[r].first, tuples[r].second);
            std::lock_guard<std::mutex> lock(mtx);
            table.rows[r] = std::move(row);
            done[r] = 1;
            // incremental write of the contiguous completed prefix
            while (flushed < total && done[flushed]) {
                if (out.is_open()) append_row(out, table.rows[flushed]);
                ++flushed;
            }
        }
    };

    const int nthreads = std::max(1, std::min(cfg.workers, total));
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    if (!tmp_path.empty()) {
        out.close();
        std::filesystem::rename(tmp_path, cfg.out_path);
    }
    return table;
}

void write_sweep_csv(const SweepTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "epsilon,gamma,beta,tau,lambda_stat,lambda_dyn,status\n"
        << std::setprecision(17);
    for (const auto& r : table.rows) append_row(out, r);
}

}  // namespace mems
