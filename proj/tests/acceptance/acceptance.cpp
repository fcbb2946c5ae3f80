// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "etm/admissible.hpp"
#include "etm/app.hpp"
#include "etm/config.hpp"
#include "etm/diagnostics.hpp"
#include "etm/model.hpp"
#include "etm/solver.hpp"

using namespace etm;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += "failed: " + what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Oracles shared by several criteria

std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
        std::swap(A[k], A[piv]);
        std::swap(b[k], b[piv]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = A[i][k] / A[k][k];
            for (std::size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= A[k][j] * x[j];
        x[k] = s / A[k][k];
    }
    return x;
}

State run_fixed(double beta, std::size_t nodes, double dt, double t_end) {
    auto cfg = preset_gaussian_wells(beta);
    cfg.grid.num_points = nodes;
    cfg.solver.adaptive = false;
    cfg.solver.dt_init = cfg.solver.dt_max = dt;
    cfg.solver.dt_min = std::min(cfg.solver.dt_min, dt);
    cfg.solver.t_end = t_end;
    cfg.solver.snapshot_times.clear();
    const Grid1D g = make_grid(cfg);
    return advance(initial_state(cfg, g), cfg.model, g, cfg.solver).final_state;
}

// discrete L2 distance on the coarse nodes, reference sampled by injection
double l2_error(const State& a, const State& ref) {
    const std::size_t na = a.size(), stride = (ref.size() - 1) / (na - 1);
    const double dx = 1.0 / static_cast<double>(na - 1);
    double acc = 0;
    for (std::size_t i = 0; i < na; ++i) {
        const double dn = a.n[i] - ref.n[i * stride], dw = a.w[i] - ref.w[i * stride];
        acc += dx * (dn * dn + dw * dw);
    }
    return std::sqrt(acc);
}

double fitted_order(const std::vector<double>& h, const std::vector<double>& e) {
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        mx += std::log(h[k]);
        my += std::log(e[k]);
    }
    mx /= h.size();
    my /= h.size();
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        sxy += (std::log(h[k]) - mx) * (std::log(e[k]) - my);
        sxx += (std::log(h[k]) - mx) * (std::log(h[k]) - mx);
    }
    return sxy / sxx;
}

} // namespace

int main() {
    const double betas[] = {-0.25, 0.25};
    std::vector<RunResult> runs;

    report(1, "equilibrium fixed point", [] {
        Outcome o;
        const auto t0 = Clock::now();
        const auto cfg = preset_gaussian_wells(0.0);
        const Grid1D g = make_grid(cfg);
        const State eq = equilibrium_state(g, cfg.model);
        double dev = 0;
        auto obs = [&](const State&, const State& s, const StepRecord&) {
            for (std::size_t i = 0; i < s.size(); ++i)
                dev = std::max({dev, std::abs(s.n[i] - 1), std::abs(s.w[i] - 1)});
        };
        const auto traj = advance(eq, cfg.model, g, cfg.solver, obs);
        const double secs = seconds_since(t0);
        o.require(traj.final_state.t >= cfg.solver.t_end, "run reaches t_end");
        o.require(dev <= 1e-12, "max deviation <= 1e-12");
        o.require(secs < 5, "runtime < 5 s");
        o.note("max deviation " + fmt("%.3g", dev) + ", " + fmt("%.2f", secs) + " s");
        return o;
    });

    report(2, "Gaussian-wells runs (beta = -0.25, 0.25)", [&] {
        Outcome o;
        for (double beta : betas) {
            const auto t0 = Clock::now();
            runs.push_back(execute_run(preset_gaussian_wells(beta)));
            const double secs = seconds_since(t0);
            const auto& r = runs.back();
            const std::string tag = "beta=" + fmt("%g", beta) + ": ";
            o.require(r.completed, tag + "run completes (" + r.message + ")");
            const double theta0 = r.rows.front().min_theta;
            o.require(std::abs(theta0 - 6.1e-6) < 0.05e-6, tag + "initial min theta = 6.1e-6 to 2 s.f.");
            bool positive = true;
            for (const auto& row : r.rows) positive = positive && row.min_n > 0 && row.min_theta > 0;
            o.require(positive, tag + "positivity");
            std::optional<double> rise_t;
            for (std::size_t k = 1; k < r.rows.size(); ++k) {
                if (r.rows[k - 1].t < 0.02) continue;
                if (r.rows[k].distance.rel_n > r.rows[k - 1].distance.rel_n ||
                    r.rows[k].distance.rel_w > r.rows[k - 1].distance.rel_w) {
                    rise_t = r.rows[k].t;
                    break;
                }
            }
            o.require(!rise_t, tag + "relative distance nonincreasing after t = 0.02" +
                                   (rise_t ? " (rises at t=" + fmt("%g", *rise_t) + ")" : ""));
            o.require(r.decay_n && r.decay_w, tag + "late-window fits available");
            if (r.decay_n && r.decay_w) {
                o.require(r.decay_n->exp_r2 >= 0.99 && r.decay_w->exp_r2 >= 0.99, tag + "late-window r2 >= 0.99");
                o.note(tag + "min theta0 " + fmt("%.3g", theta0) + ", rate_n " + fmt("%.4g", r.decay_n->exp_rate) +
                       " (r2 " + fmt("%.6f", r.decay_n->exp_r2) + "), rate_w " + fmt("%.4g", r.decay_w->exp_rate) +
                       " (r2 " + fmt("%.6f", r.decay_w->exp_r2) + "), " + fmt("%.2f", secs) + " s");
            }
            o.require(secs < 120, tag + "runtime < 2 min");
        }
        return o;
    });

    report(3, "entropy monotonicity", [&] {
        Outcome o;
        o.require(runs.size() == 2, "both runs available");
        for (const auto& r : runs) {
            const std::string tag = "beta=" + fmt("%g", r.config.model.beta) + ": ";
            const auto& rep = r.entropy.front().report;
            o.require(r.entropy.front().applicable, tag + "equilibrium boundary data");
            o.require(rep.pair == (EntropyPair{r.config.model.beta - 0.5, 5}), tag + "pair (beta - 1/2, 5)");
            double worst = -1e300;
            double prev_S = rep.S0;
            for (const auto& s : rep.steps) {
                worst = std::max(worst, s.delta_S / std::max(1.0, std::abs(prev_S)));
                prev_S = s.S;
            }
            o.require(worst <= 1e-10, tag + "dS <= 1e-10 max(1, |S|)");
            bool ratios = true;
            for (const auto& s : rep.steps)
                if (s.dissipation > 1e-14) ratios = ratios && s.ratio && *s.ratio > 0;
            o.require(ratios, tag + "c_j > 0 where D_j > 1e-14");
            o.note(tag + "max scaled dS " + fmt("%.3g", worst) + ", min c_j " + fmt("%.4g", rep.min_ratio.value_or(NAN)));
        }
        return o;
    });

    report(4, "algebraic envelope", [&] {
        Outcome o;
        o.require(runs.size() == 2, "both runs available");
        for (const auto& r : runs) {
            const std::string tag = "beta=" + fmt("%g", r.config.model.beta) + ": ";
            const auto t = r.column("t");
            std::vector<double> v;
            for (const auto& row : r.rows) v.push_back(row.distance.squared_sum());
            const auto env = algebraic_envelope(t, v);
            o.require(env.C1 > 0 && env.C2 > 0, tag + "C1, C2 > 0");
            bool holds = true;
            for (std::size_t k = 0; k < t.size(); ++k) holds = holds && v[k] <= env.C1 / (1 + env.C2 * t[k]);
            o.require(holds, tag + "v(t) <= C1 / (1 + C2 t) on [0, 1]");
            o.note(tag + "C1 " + fmt("%.4g", env.C1) + ", C2 " + fmt("%.4g", env.C2));
        }
        return o;
    });

    report(5, "admissible-set equivalence", [] {
        Outcome o;
        const auto t0 = Clock::now();
        std::mt19937_64 rng(20240501);
        std::uniform_real_distribution<double> bd(-0.5, 0.5), bb(-10, 10);
        std::size_t disagree = 0, boundary = 0;
        for (int k = 0; k < 10000; ++k) {
            const double beta = bd(rng), b = bb(rng);
            // quadratic form coefficients written out from the entropy dissipation
            const auto q = quad_form_coeffs(beta, b);
            const bool pd = q.A > 0 && q.A * q.C - q.B * q.B > 0;
            const double lin = (1 - 2 * beta) * b + 6;
            const double cub = 4 * (2 * beta - 1) * b * b * b + 4 * (4 * beta * beta - 12 * beta + 11) * b * b +
                               (8 * beta * beta * beta - 44 * beta * beta + 70 * beta - 73) * b -
                               6 * (2 * beta - 1) * (2 * beta - 1);
            if (std::abs(lin) <= 1e-9 || std::abs(cub) <= 1e-9) {
                ++boundary;
                continue;
            }
            if (pd != (lin > 0 && cub > 0)) ++disagree;
            if (nstar_membership(beta, b).member != (lin > 0 && cub > 0)) ++disagree;
        }
        o.require(disagree == 0, "zero disagreements");
        bool named = true;
        for (double beta : {0.0, 0.1, 0.2, 0.3, 0.4}) {
            named = named && nbeta_membership(beta, beta - 0.5, 5);
            named = named && nstar_membership(beta, beta - 0.5).member && nstar_membership(beta, 2.5 - beta).member;
            named = named && nbeta_membership(beta, -3, 5);
        }
        o.require(named, "named pairs are members");
        const double secs = seconds_since(t0);
        o.require(secs < 1, "runtime < 1 s");
        o.note(std::to_string(disagree) + " disagreements, " + std::to_string(boundary) + " in band, " +
               fmt("%.3f", secs) + " s");
        return o;
    });

    report(6, "region scan", [] {
        Outcome o;
        const auto scan = region_scan(RegionScanSpec{});
        std::size_t members = 0, gap = 0;
        for (const auto& c : scan.cells) {
            if (!c.margins.member) continue;
            ++members;
            if (c.b > 0 && c.b < 2) ++gap;
        }
        o.require(gap == 0 && scan.gap_violations.empty(), "members satisfy b <= 0 or b >= 2");
        auto verdict = [&](double beta, double b) {
            const auto* c = scan.find(beta, b);
            return c ? std::optional<bool>(c->margins.member) : std::nullopt;
        };
        o.require(verdict(0, 5) == true, "(0, 5) member");
        o.require(verdict(0, 1) == false, "(0, 1) not a member");
        o.require(verdict(0, -0.5) == true, "(0, -0.5) member");
        o.note(std::to_string(scan.cells.size()) + " cells, " + std::to_string(members) + " members");
        return o;
    });

    report(7, "oracle suites", [] {
        Outcome o;
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.2, 5), bd(-0.5, 0.5), bb(-4, 6), s(-1, 1), lg(-6, 6);

        double worst_grad = 0, worst_hess = 0, worst_flux = 0;
        for (int k = 0; k < 500; ++k) {
            const double n = u(rng), w = u(rng), b = bb(rng), beta = bd(rng);
            const double hn = 1e-6 * n, hw = 1e-6 * w;
            const Vec2 g = f_b_grad(n, w, b);
            const double gn = (f_b(n + hn, w, b) - f_b(n - hn, w, b)) / (2 * hn);
            const double gw = (f_b(n, w + hw, b) - f_b(n, w - hw, b)) / (2 * hw);
            worst_grad = std::max({worst_grad, std::abs(g.x - gn) / std::max(1.0, std::abs(gn)),
                                   std::abs(g.y - gw) / std::max(1.0, std::abs(gw))});
            const Mat2 J = flux_pair_jacobian(n, w, beta);
            const Vec2 dn = (1 / (2 * hn)) * (flux_pair(n + hn, w, beta) - flux_pair(n - hn, w, beta));
            const Vec2 dw = (1 / (2 * hw)) * (flux_pair(n, w + hw, beta) - flux_pair(n, w - hw, beta));
            worst_flux = std::max({worst_flux, rel(J.a11, dn.x), rel(J.a21, dn.y), rel(J.a12, dw.x), rel(J.a22, dw.y)});

            const Vec2 dgn = (1 / (2 * hn)) * (f_b_grad(n + hn, w, b) - f_b_grad(n - hn, w, b));
            const Vec2 dgw = (1 / (2 * hw)) * (f_b_grad(n, w + hw, b) - f_b_grad(n, w - hw, b));
            const double fnn = dgn.x, fww = dgw.y, fnw = 0.5 * (dgn.y + dgw.x);
            const auto inv = f_b_hessian_invariants(w / n, b);
            const double det = fnn * fww - fnw * fnw, tr = fnn + fww;
            worst_hess = std::max({worst_hess, std::abs(inv.det - det) / (std::abs(fnn * fww) + fnw * fnw),
                                   std::abs(inv.trace - tr) / (std::abs(fnn) + std::abs(fww))});
        }
        o.require(worst_grad <= 1e-5 && worst_flux <= 1e-5 && worst_hess <= 1e-5, "finite-difference derivatives");

        double worst_lu = 0;
        for (int trial = 0; trial < 10; ++trial) {
            const std::size_t m = 50;
            BlockTridiagonal J(m);
            std::vector<std::vector<double>> A(2 * m, std::vector<double>(2 * m, 0.0));
            auto put = [&](std::size_t bi, std::size_t bj, const Mat2& M) {
                A[2 * bi][2 * bj] = M.a11;
                A[2 * bi][2 * bj + 1] = M.a12;
                A[2 * bi + 1][2 * bj] = M.a21;
                A[2 * bi + 1][2 * bj + 1] = M.a22;
            };
            for (std::size_t i = 0; i < m; ++i) {
                if (i > 0) J.lower[i] = {s(rng), s(rng), s(rng), s(rng)};
                if (i + 1 < m) J.upper[i] = {s(rng), s(rng), s(rng), s(rng)};
                J.diag[i] = {6 + s(rng), s(rng), s(rng), 6 + s(rng)};
                put(i, i, J.diag[i]);
                if (i > 0) put(i, i - 1, J.lower[i]);
                if (i + 1 < m) put(i, i + 1, J.upper[i]);
            }
            std::vector<double> rhs(2 * m);
            for (double& r : rhs) r = 10 * s(rng);
            const auto x = block_thomas_solve(J, rhs);
            const auto ref = dense_solve(A, rhs);
            double err = 0, scale = 0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                err = std::max(err, std::abs(x[k] - ref[k]));
                scale = std::max(scale, std::abs(ref[k]));
            }
            worst_lu = std::max(worst_lu, err / scale);
        }
        o.require(worst_lu <= 1e-10, "block Thomas matches dense LU");

        std::vector<double> t, ve, va;
        for (int k = 0; k < 50; ++k) {
            t.push_back(k / 49.0);
            ve.push_back(3 * std::exp(-2 * t.back()));
            va.push_back(5 / (1 + 4 * t.back()));
        }
        const auto fe = fit_decay(t, ve), fa = fit_decay(t, va);
        const double fit_err = std::max({rel(fe.exp_rate, 2), rel(fa.alg_C1, 5), rel(fa.alg_C2, 4)});
        o.require(fit_err <= 1e-6, "decay fits recover ground truth");

        double worst_rt = 0;
        for (int k = 0; k < 5000; ++k) {
            const double n = std::pow(10.0, lg(rng)), theta = std::pow(10.0, lg(rng)), beta = bd(rng);
            const Vec2 uv = to_uv(n, theta, beta);
            const Vec2 back = from_uv(uv.x, uv.y, beta);
            worst_rt = std::max({worst_rt, rel(back.x, n), rel(back.y, theta)});
        }
        o.require(worst_rt <= 1e-12, "(n, theta) <-> (u, v) round trip");
        o.note("grad " + fmt("%.2g", worst_grad) + ", flux jac " + fmt("%.2g", worst_flux) + ", hessian " +
               fmt("%.2g", worst_hess) + ", block LU " + fmt("%.2g", worst_lu) + ", fits " + fmt("%.2g", fit_err) +
               ", round trip " + fmt("%.2g", worst_rt));
        return o;
    });

    report(8, "convergence orders", [] {
        Outcome o;
        const auto t0 = Clock::now();
        const double T = 0.05, beta = 0.25;

        const std::size_t nodes = 501;
        const State ref_t = run_fixed(beta, nodes, T / 25600, T);
        std::vector<double> dts, et;
        for (int steps : {200, 400, 800, 1600}) {
            dts.push_back(T / steps);
            et.push_back(l2_error(run_fixed(beta, nodes, T / steps, T), ref_t));
        }
        const double p_t = fitted_order(dts, et);

        const double dt = T / 500;
        const State ref_x = run_fixed(beta, 1601, dt, T);
        std::vector<double> dxs, ex;
        for (std::size_t m : {51u, 101u, 201u, 401u}) {
            dxs.push_back(1.0 / (m - 1));
            ex.push_back(l2_error(run_fixed(beta, m, dt, T), ref_x));
        }
        const double p_x = fitted_order(dxs, ex);
        const double secs = seconds_since(t0);

        o.require(p_t >= 0.8 && p_t <= 1.2, "temporal order in [0.8, 1.2]");
        o.require(p_x >= 1.7 && p_x <= 2.3, "spatial order in [1.7, 2.3]");
        o.require(secs < 300, "runtime < 5 min");
        std::string pair_t, pair_x;
        for (std::size_t k = 1; k < et.size(); ++k) pair_t += fmt(" %.3f", std::log2(et[k - 1] / et[k]));
        for (std::size_t k = 1; k < ex.size(); ++k) pair_x += fmt(" %.3f", std::log2(ex[k - 1] / ex[k]));
        o.note("temporal " + fmt("%.3f", p_t) + " (pairwise" + pair_t + "), spatial " + fmt("%.3f", p_x) +
               " (pairwise" + pair_x + "), " + fmt("%.1f", secs) + " s");
        return o;
    });

    report(9, "Newton quadratic regime", [] {
        Outcome o;
        const Grid1D g(0, 1, 101, Dirichlet{1, 1}, Dirichlet{1, 1});
        const auto p = ModelParams::make(0.0);
        State s;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double bump = 0.3 * std::sin(3.141592653589793 * g.x(i));
            s.n.push_back(1 + bump);
            s.w.push_back((1 + bump) * (1 - 0.5 * bump));
        }
        SolverConfig cfg;
        cfg.newton_tol = 1e-13;
        const auto r = newton_solve(s, 1e-3, p, g, cfg);
        o.require(r.status == NewtonStatus::Converged, "Newton converges");
        const auto& h = r.residual_history;
        double C = 0;
        int doublings = 0, pairs = 0;
        std::string hist;
        for (double v : h) hist += fmt(" %.2e", v);
        for (std::size_t k = 0; k + 1 < h.size(); ++k) {
            if (h[k] > 1e-2 || h[k + 1] < 1e-13) continue;
            ++pairs;
            C = std::max(C, h[k + 1] / (h[k] * h[k]));
            if (std::log10(h[k + 1]) <= 2 * std::log10(h[k])) ++doublings;
        }
        o.require(pairs >= 1, "at least one step inside the regime");
        o.require(std::isfinite(C), "finite C");
        o.require(doublings >= 1, "correct digits double at least once");
        o.note("residuals" + hist + ", C = " + fmt("%.3g", C) + ", doublings " + std::to_string(doublings));
        return o;
    });

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
