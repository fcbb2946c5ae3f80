#include "etm/app.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "etm/csv.hpp"
#include "etm/errors.hpp"

namespace etm {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<double> RunResult::column(std::string_view name) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (name == "t") out.push_back(r.t);
        else if (name == "dt") out.push_back(r.dt);
        else if (name == "newton_iters") out.push_back(r.newton_iters);
        else if (name == "S_pair") out.push_back(r.S_pair);
        else if (name == "dissipation") out.push_back(r.dissipation);
        else if (name == "dist_n") out.push_back(r.distance.dist_n);
        else if (name == "dist_w") out.push_back(r.distance.dist_w);
        else if (name == "rel_dist_n") out.push_back(r.distance.rel_n);
        else if (name == "rel_dist_w") out.push_back(r.distance.rel_w);
        else if (name == "min_n") out.push_back(r.min_n);
        else if (name == "min_theta") out.push_back(r.min_theta);
        else if (name == "log_entropy") out.push_back(r.log_entropy);
        else throw std::invalid_argument("unknown trajectory column " + std::string(name));
    }
    return out;
}

namespace {

TrajectoryRow make_row(const State& s, double dt, int iters, const RunConfig& cfg, const Grid1D& grid) {
    TrajectoryRow row;
    row.t = s.t;
    row.dt = dt;
    row.newton_iters = iters;
    const auto& pair = cfg.entropy_pairs.front();
    row.S_pair = entropy_S(s, pair, cfg.model, grid);
    row.dissipation = dissipation_integral(s, pair, cfg.model.beta, grid);
    row.distance = distance_to_equilibrium(s, cfg.model, grid);
    row.min_n = s.min_n();
    row.min_theta = s.min_theta();
    row.log_entropy = log_entropy(s, grid);
    return row;
}

std::optional<DecayFit> try_fit(const std::vector<double>& t, const std::vector<double>& v, double t0, double t1) {
    try {
        return fit_decay(t, v, t0, t1);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void finish_analysis(RunResult& res) {
    const auto t = res.column("t");
    const double t_end = res.config.solver.t_end;
    res.decay_n = try_fit(t, res.column("rel_dist_n"), 0.2 * t_end, t_end);
    res.decay_w = try_fit(t, res.column("rel_dist_w"), 0.2 * t_end, t_end);
    std::vector<double> sq;
    for (const auto& r : res.rows) sq.push_back(r.distance.squared_sum());
    if (!t.empty()) {
        res.decay_squared = try_fit(t, sq, t.front(), t.back());
        res.envelope = algebraic_envelope(t, sq);
    }
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

void write_state_csv(const fs::path& p, const State& s, const Grid1D& grid, double beta) {
    auto out = open_out(p);
    csv::write_header(out, "x,n,theta,u,v");
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double theta = s.theta(i);
        const Vec2 uv = to_uv(s.n[i], theta, beta);
        csv::write_row(out, {grid.x(i), s.n[i], theta, uv.x, uv.y});
    }
}

json fit_json(const std::optional<DecayFit>& f) {
    if (!f) return nullptr;
    return {{"t_start", f->t_start}, {"t_end", f->t_end}, {"samples", f->samples}, {"exp_rate", f->exp_rate},
            {"exp_r2", f->exp_r2},   {"alg_C1", f->alg_C1}, {"alg_C2", f->alg_C2},   {"alg_r2", f->alg_r2}};
}

} // namespace

RunResult execute_run(const RunConfig& config, const fs::path& base_dir) {
    config.validate();
    const Grid1D grid = make_grid(config);
    const State initial = initial_state(config, grid, base_dir);

    RunResult res;
    res.config = config;
    res.rows.push_back(make_row(initial, 0.0, 0, config, grid));
    std::vector<EntropyInequalityMonitor> monitors;
    for (const auto& pair : config.entropy_pairs) monitors.emplace_back(pair, config.model, grid, initial);

    auto observer = [&](const State&, const State& current, const StepRecord& rec) {
        res.rows.push_back(make_row(current, rec.dt, rec.newton_iters, config, grid));
        for (auto& m : monitors) m.add(current, rec.dt);
    };

    Trajectory traj;
    try {
        traj = advance(initial, config.model, grid, config.solver, observer);
        res.completed = true;
        res.message = "completed";
    } catch (const SolverAbort& abort) {
        traj = abort.partial();
        traj.final_state = abort.last_good();
        res.completed = false;
        res.message = abort.what();
    }
    res.rejected_steps = traj.steps.size() - traj.accepted_count();
    res.snapshot_requests = traj.snapshot_requests;
    res.snapshots = std::move(traj.snapshots);
    res.final_state = std::move(traj.final_state);
    const bool equilibrium_data = config.model.theta_D == 1.0;
    for (auto& m : monitors) res.entropy.push_back({m.report(), equilibrium_data});
    finish_analysis(res);
    return res;
}

std::string snapshot_file_name(double requested_time) { return "snapshot_t" + csv::format(requested_time) + ".csv"; }

void write_run_outputs(const RunResult& res, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const Grid1D grid = make_grid(res.config);
    const double beta = res.config.model.beta;

    {
        auto out = open_out(out_dir / "trajectory.csv");
        csv::write_header(out, kTrajectoryHeader);
        for (const auto& r : res.rows)
            csv::write_row(out, {r.t, r.dt, static_cast<double>(r.newton_iters), r.S_pair, r.dissipation,
                                 r.distance.dist_n, r.distance.dist_w, r.distance.rel_n, r.distance.rel_w, r.min_n,
                                 r.min_theta, r.log_entropy});
    }

    json snaps = json::array();
    for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
        const std::string name = snapshot_file_name(res.snapshot_requests[k]);
        write_state_csv(out_dir / name, res.snapshots[k], grid, beta);
        snaps.push_back({{"requested", res.snapshot_requests[k]}, {"actual", res.snapshots[k].t}, {"file", name}});
    }
    if (!res.completed) write_state_csv(out_dir / "last_good_state.csv", res.final_state, grid, beta);

    json entropy = json::array();
    for (const auto& v : res.entropy) {
        const auto& r = v.report;
        json e{{"b1", r.pair.b1},
               {"b2", r.pair.b2},
               {"S0", r.S0},
               {"monotonicity_asserted", v.applicable},
               {"monotone", r.monotone},
               {"ratios_positive", r.ratios_positive}};
        e["first_violation_t"] = r.first_violation ? json(r.steps[*r.first_violation].t) : json(nullptr);
        e["empirical_C1"] = r.min_ratio ? json(*r.min_ratio) : json(nullptr);
        e["verdict"] = !v.applicable ? "not-asserted" : (r.monotone ? "pass" : "fail");
        entropy.push_back(e);
    }

    json relax;
    if (const auto* c = std::get_if<ConstantRelaxation>(&res.config.model.relaxation))
        relax = {{"kind", "constant"}, {"tau", c->tau}};
    else
        relax = {{"kind", "temperature-dependent"},
                 {"tau0", std::get<TemperatureDependentRelaxation>(res.config.model.relaxation).tau0},
                 {"tau1", std::get<TemperatureDependentRelaxation>(res.config.model.relaxation).tau1}};

    json summary;
    summary["status"] = res.completed ? "completed" : "aborted";
    summary["message"] = res.message;
    summary["t_final"] = res.final_state.t;
    summary["accepted_steps"] = res.rows.size() - 1;
    summary["rejected_steps"] = res.rejected_steps;
    summary["snapshots"] = snaps;
    summary["decay"] = {{"rel_dist_n", fit_json(res.decay_n)},
                        {"rel_dist_w", fit_json(res.decay_w)},
                        {"squared_distance", fit_json(res.decay_squared)},
                        {"note", "exponential fits use the relative L2 distance (normalised by the equilibrium "
                                 "norm); algebraic fits use dist_n^2 + dist_w^2"}};
    if (res.envelope)
        summary["algebraic_envelope"] = {{"C1", res.envelope->C1}, {"C2", res.envelope->C2},
                                         {"holds", res.envelope->holds}};
    summary["entropy_inequality"] = entropy;
    summary["metadata"] = {
        {"newton_tol", res.config.solver.newton_tol},
        {"relaxation", relax},
        {"chosen_defaults", {"newton_tol", "newton_max_iters", "relaxation time", "t_end", "snapshot_times"}},
        {"beta_extended", !(beta >= -0.5 && beta < 0.5)}};
    summary["config"] = json::parse(serialize_run_config(res.config));
    auto out = open_out(out_dir / "summary.json");
    out << summary.dump(2) << '\n';
}

int run_and_write(const RunConfig& config, const fs::path& out_dir, const fs::path& base_dir) {
    RunResult res;
    try {
        res = execute_run(config, base_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    write_run_outputs(res, out_dir);
    if (!res.completed) {
        std::cerr << "solver abort: " << res.message << '\n';
        return kExitSolverAbort;
    }
    return kExitSuccess;
}

std::vector<SweepEntry> sweep(const std::vector<double>& betas, const RunConfig& base, const fs::path& out_dir,
                              const fs::path& base_dir) {
    if (betas.empty()) throw ConfigError("betas", "at least one value is required");
    std::vector<RunConfig> configs;
    for (std::size_t k = 0; k < betas.size(); ++k) {
        RunConfig cfg = base;
        cfg.model = ModelParams::make(betas[k], base.model.relaxation, base.model.n_D, base.model.theta_D);
        cfg.entropy_pairs = {EntropyPair{betas[k] - 0.5, 5.0}};
        try {
            cfg.validate();
        } catch (const ConfigError& e) {
            throw ConfigError("betas[" + std::to_string(k) + "]", e.what());
        }
        configs.push_back(std::move(cfg));
    }

    std::vector<std::future<RunResult>> futures;
    for (const auto& cfg : configs)
        futures.push_back(std::async(std::launch::async, [&cfg, &base_dir] { return execute_run(cfg, base_dir); }));

    std::vector<SweepEntry> entries;
    std::vector<RunResult> results;
    for (std::size_t k = 0; k < futures.size(); ++k) {
        SweepEntry entry{betas[k], kExitSuccess, "completed"};
        try {
            results.push_back(futures[k].get());
            auto& r = results.back();
            write_run_outputs(r, out_dir / ("beta_" + csv::format(betas[k])));
            if (!r.completed) {
                entry.exit_code = kExitSolverAbort;
                entry.message = r.message;
            }
        } catch (const std::exception& e) {
            results.emplace_back();
            entry.exit_code = kExitSolverAbort;
            entry.message = e.what();
        }
        entries.push_back(entry);
    }

    fs::create_directories(out_dir);
    {
        auto out = open_out(out_dir / "decay_combined.csv");
        csv::write_header(out, "beta,t,rel_dist_n,rel_dist_w");
        for (std::size_t k = 0; k < results.size(); ++k)
            for (const auto& r : results[k].rows)
                csv::write_row(out, {betas[k], r.t, r.distance.rel_n, r.distance.rel_w});
    }
    json summary = json::array();
    for (const auto& e : entries) summary.push_back({{"beta", e.beta}, {"exit_code", e.exit_code}, {"message", e.message}});
    auto out = open_out(out_dir / "sweep_summary.json");
    out << summary.dump(2) << '\n';
    return entries;
}

namespace {

VerifyCheck check(std::string name, bool passed, std::string detail) {
    return {std::move(name), passed, std::move(detail)};
}

std::string sci(double v) {
    std::ostringstream ss;
    ss << std::scientific;
    ss.precision(3);
    ss << v;
    return ss.str();
}

} // namespace

std::vector<VerifyCheck> verify(const RunConfig& config, const fs::path& base_dir) {
    RunConfig cfg = config;
    cfg.solver.t_end = std::min(cfg.solver.t_end, 0.02);
    cfg.validate();
    const Grid1D grid = make_grid(cfg);
    std::vector<VerifyCheck> checks;

    const RunResult first = execute_run(cfg, base_dir);
    checks.push_back(check("run completes", first.completed, first.message));

    bool positive = true;
    for (const auto& r : first.rows) positive = positive && r.min_n > 0.0 && r.min_theta > 0.0;
    checks.push_back(check("positivity of accepted states", positive, std::to_string(first.rows.size()) + " states"));

    // residual of every accepted step is rechecked through a replay of the trajectory
    std::vector<State> states;
    std::vector<double> residuals;
    {
        const State init = initial_state(cfg, grid, base_dir);
        states.push_back(init);
        auto obs = [&](const State& prev, const State& cur, const StepRecord& rec) {
            const auto F = assemble_residual(cur, prev, rec.dt, cfg.model, grid);
            double m = 0.0;
            for (double f : F) m = std::max(m, std::abs(f));
            residuals.push_back(m);
            if (states.size() < 64) states.push_back(cur);
        };
        try {
            (void)advance(init, cfg.model, grid, cfg.solver, obs);
        } catch (const SolverAbort&) {
        }
    }
    double worst = 0.0;
    for (double r : residuals) worst = std::max(worst, r);
    checks.push_back(check("accepted residuals within newton_tol", worst <= cfg.solver.newton_tol,
                           "max ||F||_inf = " + sci(worst)));

    bool dirichlet_exact = true;
    for (std::size_t i : {std::size_t{0}, grid.size() - 1}) {
        if (const auto* d = grid.dirichlet_at(i))
            dirichlet_exact = dirichlet_exact && first.final_state.n[i] == d->n_D &&
                              first.final_state.w[i] == d->n_D * d->theta_D;
    }
    checks.push_back(check("Dirichlet values enforced exactly", dirichlet_exact, ""));

    {
        const State& s = states.size() > 1 ? states[1] : states[0];
        const double h = cfg.solver.dt_init;
        const auto x = s.packed();
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> d(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) d[k] = x[k] * u(rng);
        for (std::size_t i : {std::size_t{0}, grid.size() - 1})
            if (grid.dirichlet_at(i)) d[2 * i] = d[2 * i + 1] = 0.0;
        const double eps = 1e-7;
        std::vector<double> xp(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) xp[k] = x[k] + eps * d[k];
        const auto F0 = assemble_residual(s, s, h, cfg.model, grid);
        const auto F1 = assemble_residual(State::unpack(xp, s.t), s, h, cfg.model, grid);
        const auto Jd = assemble_jacobian(s, h, cfg.model, grid).multiply(d);
        double err = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            err = std::max(err, std::abs((F1[k] - F0[k]) / eps - Jd[k]));
            scale = std::max(scale, std::abs(Jd[k]));
        }
        checks.push_back(check("Jacobian matches finite differences", err <= 1e-5 * scale,
                               "rel. error " + sci(scale > 0 ? err / scale : err)));
    }

    for (const auto& v : first.entropy) {
        const std::string name = "entropy S_(" + csv::format(v.report.pair.b1) + "," + csv::format(v.report.pair.b2) +
                                 ") nonincreasing";
        if (!v.applicable)
            checks.push_back(check(name, true, "not asserted (theta_D != 1)"));
        else
            checks.push_back(check(name, v.report.monotone, "empirical C1 = " + sci(v.report.min_ratio.value_or(0.0))));
    }

    {
        double worst_uv = 0.0;
        for (const auto& s : first.snapshots) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                const double theta = s.theta(i);
                const Vec2 uv = to_uv(s.n[i], theta, cfg.model.beta);
                const double u_ref = s.n[i] * std::pow(theta, 0.5 - cfg.model.beta);
                const double v_ref = s.n[i] * std::pow(theta, 1.5 - cfg.model.beta);
                worst_uv = std::max({worst_uv, std::abs(uv.x - u_ref) / u_ref, std::abs(uv.y - v_ref) / v_ref});
            }
        }
        checks.push_back(check("snapshot (u,v) columns consistent", worst_uv <= 1e-12, "max rel. " + sci(worst_uv)));
    }

    {
        const RunResult second = execute_run(cfg, base_dir);
        bool same = second.rows.size() == first.rows.size() && second.final_state == first.final_state;
        for (std::size_t k = 0; same && k < first.rows.size(); ++k)
            same = first.rows[k].t == second.rows[k].t && first.rows[k].S_pair == second.rows[k].S_pair;
        checks.push_back(check("deterministic rerun", same, ""));
    }

    if (states.size() > 1 && grid.dirichlet_at(0) && grid.dirichlet_at(grid.size() - 1)) {
        // interior mass change equals h times the boundary flux difference of g1
        const State& a = states[0];
        const State& b = states[1];
        const double h = b.t - a.t;
        const std::size_t m = grid.size();
        double mass = 0.0;
        for (std::size_t i = 1; i + 1 < m; ++i) mass += (b.n[i] - a.n[i]) * grid.dx();
        auto g1 = [&](std::size_t i) { return flux_pair(b.n[i], b.w[i], cfg.model.beta).x; };
        const double flux = h * ((g1(m - 1) - g1(m - 2)) - (g1(1) - g1(0))) / grid.dx();
        const double tol = 10.0 * cfg.solver.newton_tol * grid.dx() * static_cast<double>(m);
        checks.push_back(check("discrete mass balance", std::abs(mass - flux) <= tol,
                               "|dm - h flux| = " + sci(std::abs(mass - flux))));
    }
    return checks;
}

void write_region_scan(const RegionScanSpec& spec, const fs::path& path) {
    const auto scan = region_scan(spec);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto out = open_out(path);
    write_region_csv(out, scan);
}

} // namespace etm
