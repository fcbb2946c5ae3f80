#include "etm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "etm/errors.hpp"
#include "etm/expression.hpp"

namespace etm {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!keys.count(key)) throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
}

template <typename T>
void read(const json& obj, const char* key, const std::string& path, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + "." + key, std::string("wrong type (") + e.what() + ")");
    }
}

const char* to_string(BoundaryKind k) { return k == BoundaryKind::Dirichlet ? "dirichlet" : "neumann"; }

BoundaryKind boundary_from(const json& obj, const char* key, const std::string& path, BoundaryKind fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (v == "dirichlet") return BoundaryKind::Dirichlet;
    if (v == "neumann") return BoundaryKind::Neumann;
    throw ConfigError(path + "." + key, "must be \"dirichlet\" or \"neumann\"");
}

std::vector<ExpressionSegment> segments_from(const json& field, const std::string& path) {
    std::vector<ExpressionSegment> out;
    if (field.is_string()) {
        out.push_back({std::nullopt, field.get<std::string>()});
        return out;
    }
    if (!field.is_array() || field.empty()) throw ConfigError(path, "expected a string or a nonempty segment list");
    for (std::size_t k = 0; k < field.size(); ++k) {
        const std::string seg_path = path + "[" + std::to_string(k) + "]";
        const auto& seg = field[k];
        reject_unknown(seg, seg_path, {"x_max", "expr"});
        if (!seg.contains("expr")) throw ConfigError(seg_path + ".expr", "missing");
        ExpressionSegment s;
        read(seg, "expr", seg_path, s.expr);
        if (seg.contains("x_max")) {
            double xm = 0.0;
            read(seg, "x_max", seg_path, xm);
            s.x_max = xm;
        }
        out.push_back(std::move(s));
    }
    return out;
}

json segments_to(const std::vector<ExpressionSegment>& segs) {
    if (segs.size() == 1 && !segs.front().x_max) return segs.front().expr;
    json arr = json::array();
    for (const auto& s : segs) {
        json j{{"expr", s.expr}};
        if (s.x_max) j["x_max"] = *s.x_max;
        arr.push_back(j);
    }
    return arr;
}

PiecewiseExpression compile(const std::vector<ExpressionSegment>& segs, const std::string& path) {
    PiecewiseExpression pw;
    for (std::size_t k = 0; k < segs.size(); ++k) {
        try {
            pw.segments.push_back({segs[k].x_max, Expression::parse(segs[k].expr)});
        } catch (const ConfigError& e) {
            throw ConfigError(path + "[" + std::to_string(k) + "]", e.what());
        }
    }
    return pw;
}

struct Table {
    std::vector<double> x, n, theta;
};

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("initial_condition.path", "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("initial_condition.path", "empty file");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    auto column = [&](const char* name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ConfigError("initial_condition.path", std::string("missing column ") + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t cx = column("x"), cn = column("n"), ct = column("theta");
    Table t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        if (row.size() < header.size()) throw ConfigError("initial_condition.path", "short row: " + line);
        t.x.push_back(row[cx]);
        t.n.push_back(row[cn]);
        t.theta.push_back(row[ct]);
    }
    if (t.x.size() < 2) throw ConfigError("initial_condition.path", "need at least two rows");
    if (!std::is_sorted(t.x.begin(), t.x.end())) throw ConfigError("initial_condition.path", "x must be increasing");
    return t;
}

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const double tol = 1e-12 * std::max(1.0, std::abs(xs.back() - xs.front()));
    if (x < xs.front() - tol || x > xs.back() + tol)
        throw ConfigError("initial_condition.path", "table does not cover x = " + std::to_string(x));
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return ys.front();
    if (it == xs.end()) return ys.back();
    const std::size_t k = static_cast<std::size_t>(it - xs.begin());
    const double s = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return ys[k - 1] + s * (ys[k] - ys[k - 1]);
}

} // namespace

void RunConfig::validate() const {
    model.validate(allow_extended_beta);
    solver.validate();
    (void)make_grid(*this);
    if (entropy_pairs.empty()) throw ConfigError("entropy_pairs", "at least one pair is required");
    for (const auto& p : entropy_pairs) p.validate();
    if (const auto* pre = std::get_if<PresetInitial>(&initial_condition); pre && pre->name != "gaussian-wells")
        throw ConfigError("initial_condition.name", "unknown preset '" + pre->name + "'");
    if (const auto* ex = std::get_if<ExpressionInitial>(&initial_condition)) {
        (void)compile(ex->n, "initial_condition.n");
        (void)compile(ex->theta, "initial_condition.theta");
    }
}

RunConfig parse_run_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    reject_unknown(root, "", {"model", "grid", "solver", "initial_condition", "entropy_pairs", "output_dir",
                              "allow_extended_beta"});
    RunConfig cfg;

    if (!root.contains("model")) throw ConfigError("model", "missing");
    const auto& m = root.at("model");
    reject_unknown(m, "model", {"beta", "n_D", "theta_D", "relaxation"});
    if (!m.contains("beta")) throw ConfigError("model.beta", "missing");
    double beta = 0.0, n_D = 1.0, theta_D = 1.0;
    read(m, "beta", "model", beta);
    read(m, "n_D", "model", n_D);
    read(m, "theta_D", "model", theta_D);
    Relaxation relax = ConstantRelaxation{};
    if (m.contains("relaxation")) {
        const auto& r = m.at("relaxation");
        reject_unknown(r, "model.relaxation", {"kind", "tau", "tau0", "tau1"});
        std::string kind = "constant";
        read(r, "kind", "model.relaxation", kind);
        if (kind == "constant") {
            if (r.contains("tau0") || r.contains("tau1"))
                throw ConfigError("model.relaxation", "tau0/tau1 require kind \"temperature-dependent\"");
            ConstantRelaxation c;
            read(r, "tau", "model.relaxation", c.tau);
            relax = c;
        } else if (kind == "temperature-dependent") {
            if (r.contains("tau")) throw ConfigError("model.relaxation.tau", "not used by this kind");
            TemperatureDependentRelaxation td;
            read(r, "tau0", "model.relaxation", td.tau0);
            read(r, "tau1", "model.relaxation", td.tau1);
            relax = td;
        } else {
            throw ConfigError("model.relaxation.kind", "must be \"constant\" or \"temperature-dependent\"");
        }
    }
    cfg.model = ModelParams::make(beta, relax, n_D, theta_D);

    if (root.contains("grid")) {
        const auto& g = root.at("grid");
        reject_unknown(g, "grid", {"x_min", "x_max", "num_points", "left", "right"});
        read(g, "x_min", "grid", cfg.grid.x_min);
        read(g, "x_max", "grid", cfg.grid.x_max);
        read(g, "num_points", "grid", cfg.grid.num_points);
        cfg.grid.left = boundary_from(g, "left", "grid", cfg.grid.left);
        cfg.grid.right = boundary_from(g, "right", "grid", cfg.grid.right);
    }

    if (root.contains("solver")) {
        const auto& s = root.at("solver");
        reject_unknown(s, "solver", {"newton_tol", "newton_max_iters", "dt_init", "dt_max", "dt_min", "grow_factor",
                                     "shrink_factor", "t_end", "snapshot_times", "adaptive"});
        auto& sc = cfg.solver;
        read(s, "newton_tol", "solver", sc.newton_tol);
        read(s, "newton_max_iters", "solver", sc.newton_max_iters);
        read(s, "dt_init", "solver", sc.dt_init);
        read(s, "dt_max", "solver", sc.dt_max);
        read(s, "dt_min", "solver", sc.dt_min);
        read(s, "grow_factor", "solver", sc.grow_factor);
        read(s, "shrink_factor", "solver", sc.shrink_factor);
        read(s, "t_end", "solver", sc.t_end);
        read(s, "snapshot_times", "solver", sc.snapshot_times);
        read(s, "adaptive", "solver", sc.adaptive);
    }

    if (!root.contains("initial_condition")) throw ConfigError("initial_condition", "missing");
    const auto& ic = root.at("initial_condition");
    if (!ic.is_object() || !ic.contains("kind")) throw ConfigError("initial_condition.kind", "missing");
    const std::string kind = ic.at("kind").is_string() ? ic.at("kind").get<std::string>() : "";
    if (kind == "preset") {
        reject_unknown(ic, "initial_condition", {"kind", "name"});
        PresetInitial p;
        read(ic, "name", "initial_condition", p.name);
        cfg.initial_condition = p;
    } else if (kind == "expression") {
        reject_unknown(ic, "initial_condition", {"kind", "n", "theta"});
        if (!ic.contains("n")) throw ConfigError("initial_condition.n", "missing");
        if (!ic.contains("theta")) throw ConfigError("initial_condition.theta", "missing");
        cfg.initial_condition =
            ExpressionInitial{segments_from(ic.at("n"), "initial_condition.n"),
                              segments_from(ic.at("theta"), "initial_condition.theta")};
    } else if (kind == "tabulated") {
        reject_unknown(ic, "initial_condition", {"kind", "path"});
        TabulatedInitial t;
        read(ic, "path", "initial_condition", t.path);
        if (t.path.empty()) throw ConfigError("initial_condition.path", "missing");
        cfg.initial_condition = t;
    } else {
        throw ConfigError("initial_condition.kind", "must be \"preset\", \"expression\" or \"tabulated\"");
    }

    const bool snapshots_given = root.contains("solver") && root.at("solver").contains("snapshot_times");
    if (!snapshots_given && std::holds_alternative<PresetInitial>(cfg.initial_condition))
        cfg.solver.snapshot_times = preset_snapshot_times();

    if (root.contains("entropy_pairs")) {
        std::vector<std::vector<double>> pairs;
        read(root, "entropy_pairs", "", pairs);
        for (const auto& p : pairs) {
            if (p.size() != 2) throw ConfigError("entropy_pairs", "each pair needs exactly two exponents");
            cfg.entropy_pairs.push_back({p[0], p[1]});
        }
    } else {
        cfg.entropy_pairs.push_back({beta - 0.5, 5.0});
    }
    read(root, "output_dir", "", cfg.output_dir);
    read(root, "allow_extended_beta", "", cfg.allow_extended_beta);

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
    json root;
    json relax;
    if (const auto* c = std::get_if<ConstantRelaxation>(&cfg.model.relaxation)) {
        relax = {{"kind", "constant"}, {"tau", c->tau}};
    } else {
        const auto& td = std::get<TemperatureDependentRelaxation>(cfg.model.relaxation);
        relax = {{"kind", "temperature-dependent"}, {"tau0", td.tau0}, {"tau1", td.tau1}};
    }
    root["model"] = {{"beta", cfg.model.beta}, {"n_D", cfg.model.n_D}, {"theta_D", cfg.model.theta_D},
                     {"relaxation", relax}};
    root["grid"] = {{"x_min", cfg.grid.x_min},
                    {"x_max", cfg.grid.x_max},
                    {"num_points", cfg.grid.num_points},
                    {"left", to_string(cfg.grid.left)},
                    {"right", to_string(cfg.grid.right)}};
    const auto& s = cfg.solver;
    root["solver"] = {{"newton_tol", s.newton_tol},       {"newton_max_iters", s.newton_max_iters},
                      {"dt_init", s.dt_init},             {"dt_max", s.dt_max},
                      {"dt_min", s.dt_min},               {"grow_factor", s.grow_factor},
                      {"shrink_factor", s.shrink_factor}, {"t_end", s.t_end},
                      {"snapshot_times", s.snapshot_times}, {"adaptive", s.adaptive}};
    std::visit(
        [&](const auto& ic) {
            using T = std::decay_t<decltype(ic)>;
            if constexpr (std::is_same_v<T, PresetInitial>)
                root["initial_condition"] = {{"kind", "preset"}, {"name", ic.name}};
            else if constexpr (std::is_same_v<T, ExpressionInitial>)
                root["initial_condition"] = {{"kind", "expression"}, {"n", segments_to(ic.n)},
                                             {"theta", segments_to(ic.theta)}};
            else
                root["initial_condition"] = {{"kind", "tabulated"}, {"path", ic.path}};
        },
        cfg.initial_condition);
    json pairs = json::array();
    for (const auto& p : cfg.entropy_pairs) pairs.push_back({p.b1, p.b2});
    root["entropy_pairs"] = pairs;
    root["output_dir"] = cfg.output_dir;
    root["allow_extended_beta"] = cfg.allow_extended_beta;
    return root.dump(2) + "\n";
}

Grid1D make_grid(const RunConfig& cfg) {
    auto bc = [&](BoundaryKind k) -> BoundaryCondition {
        if (k == BoundaryKind::Dirichlet) return Dirichlet{cfg.model.n_D, cfg.model.theta_D};
        return NeumannZeroFlux{};
    };
    return Grid1D(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.num_points, bc(cfg.grid.left), bc(cfg.grid.right));
}

double gaussian_wells(double x) {
    if (x <= 0.5) return std::exp(-48.0 * x * x);
    return std::exp(-48.0 * (x - 1.0) * (x - 1.0));
}

State initial_state(const RunConfig& cfg, const Grid1D& grid, const std::filesystem::path& base_dir) {
    State s;
    s.n.resize(grid.size());
    s.w.resize(grid.size());
    if (std::holds_alternative<PresetInitial>(cfg.initial_condition)) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double n = gaussian_wells(grid.x(i));
            s.n[i] = n;
            s.w[i] = n * n; // theta0 = n0
        }
    } else if (const auto* ex = std::get_if<ExpressionInitial>(&cfg.initial_condition)) {
        const auto n0 = compile(ex->n, "initial_condition.n");
        const auto theta0 = compile(ex->theta, "initial_condition.theta");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.x(i);
            s.n[i] = n0(x);
            s.w[i] = s.n[i] * theta0(x);
        }
    } else {
        std::filesystem::path p(std::get<TabulatedInitial>(cfg.initial_condition).path);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        const auto table = read_table(p);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.x(i);
            s.n[i] = interpolate(table.x, table.n, x);
            s.w[i] = s.n[i] * interpolate(table.x, table.theta, x);
        }
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(s.n[i] > 0.0) || !(s.w[i] > 0.0) || !std::isfinite(s.n[i]) || !std::isfinite(s.w[i]))
            throw ConfigError("initial_condition",
                              "must be strictly positive; fails at x = " + std::to_string(grid.x(i)));
    }
    return s;
}

std::vector<double> preset_snapshot_times() { return {0.0, 1e-3, 5e-3, 2e-2, 1e-1, 1.0}; }

RunConfig preset_gaussian_wells(double beta) {
    RunConfig cfg;
    cfg.model = ModelParams::make(beta, ConstantRelaxation{1.0}, 1.0, 1.0);
    cfg.grid = GridSpec{0.0, 1.0, 501, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet};
    cfg.solver.newton_tol = 1e-10;
    cfg.solver.newton_max_iters = 25;
    cfg.solver.dt_init = 2e-3;
    cfg.solver.dt_max = 2e-3;
    cfg.solver.dt_min = 1e-12;
    cfg.solver.t_end = 1.0;
    cfg.solver.snapshot_times = preset_snapshot_times();
    cfg.initial_condition = PresetInitial{"gaussian-wells"};
    cfg.entropy_pairs = {EntropyPair{beta - 0.5, 5.0}};
    cfg.allow_extended_beta = !(beta >= -0.5 && beta < 0.5);
    return cfg;
}

} // namespace etm
