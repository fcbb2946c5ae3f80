#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "etm/admissible.hpp"
#include "etm/app.hpp"
#include "etm/config.hpp"
#include "etm/diagnostics.hpp"
#include "etm/errors.hpp"
#include "etm/model.hpp"

namespace py = pybind11;
using namespace etm;

namespace {

py::tuple vec(const Vec2& v) { return py::make_tuple(v.x, v.y); }
py::tuple mat(const Mat2& m) { return py::make_tuple(py::make_tuple(m.a11, m.a12), py::make_tuple(m.a21, m.a22)); }

py::dict run_to_dict(const RunResult& r) {
    py::dict d;
    d["completed"] = r.completed;
    d["message"] = r.message;
    for (const char* name : {"t", "dt", "newton_iters", "S_pair", "dissipation", "dist_n", "dist_w", "rel_dist_n",
                             "rel_dist_w", "min_n", "min_theta", "log_entropy"})
        d[name] = r.column(name);
    d["entropy_monotone"] = !r.entropy.empty() && r.entropy.front().report.monotone;
    if (r.decay_n) d["exp_rate_n"] = r.decay_n->exp_rate;
    if (r.decay_w) d["exp_rate_w"] = r.decay_w->exp_rate;
    d["final_n"] = r.final_state.n;
    d["final_w"] = r.final_state.w;
    return d;
}

} // namespace

PYBIND11_MODULE(_etm, m) {
    m.doc() = "Energy-transport solver core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    m.def("kappa_of", &kappa_of, py::arg("beta"));
    m.def("to_uv", [](double n, double theta, double beta) { return vec(to_uv(n, theta, beta)); },
          py::arg("n"), py::arg("theta"), py::arg("beta"));
    m.def("from_uv", [](double u, double v, double beta) { return vec(from_uv(u, v, beta)); },
          py::arg("u"), py::arg("v"), py::arg("beta"));
    m.def("flux_pair", [](double n, double w, double beta) { return vec(flux_pair(n, w, beta)); },
          py::arg("n"), py::arg("w"), py::arg("beta"));
    m.def("flux_pair_jacobian", [](double n, double w, double beta) { return mat(flux_pair_jacobian(n, w, beta)); },
          py::arg("n"), py::arg("w"), py::arg("beta"));
    m.def("f_b", &f_b, py::arg("n"), py::arg("w"), py::arg("b"));
    m.def("f_b_grad", [](double n, double w, double b) { return vec(f_b_grad(n, w, b)); },
          py::arg("n"), py::arg("w"), py::arg("b"));
    m.def("f_b_hessian_invariants",
          [](double theta, double b) {
              const auto i = f_b_hessian_invariants(theta, b);
              return py::make_tuple(i.det, i.trace);
          },
          py::arg("theta"), py::arg("b"));
    m.def("diffusion_matrix", [](double n, double theta, double beta) { return mat(diffusion_matrix(n, theta, beta)); },
          py::arg("n"), py::arg("theta"), py::arg("beta"));

    m.def("nstar_membership",
          [](double beta, double b) {
              const auto r = nstar_membership(beta, b);
              return py::make_tuple(r.member, r.linear, r.cubic);
          },
          py::arg("beta"), py::arg("b"));
    m.def("nbeta_membership", &nbeta_membership, py::arg("beta"), py::arg("b1"), py::arg("b2"));
    m.def("quad_form_coeffs",
          [](double beta, double b) {
              const auto q = quad_form_coeffs(beta, b);
              return py::make_tuple(q.A, q.B, q.C);
          },
          py::arg("beta"), py::arg("b"));
    m.def("region_scan_csv",
          [](double beta_min, double beta_max, double beta_step, double b_min, double b_max, double b_step,
             const std::filesystem::path& out) {
              RegionScanSpec spec;
              spec.beta = {beta_min, beta_max, beta_step, false};
              spec.b = {b_min, b_max, b_step, true};
              spec.validate();
              write_region_scan(spec, out);
          },
          py::arg("beta_min"), py::arg("beta_max"), py::arg("beta_step"), py::arg("b_min"), py::arg("b_max"),
          py::arg("b_step"), py::arg("out"));

    m.def("fit_decay",
          [](const std::vector<double>& t, const std::vector<double>& v) {
              const auto f = fit_decay(t, v);
              py::dict d;
              d["exp_rate"] = f.exp_rate;
              d["exp_r2"] = f.exp_r2;
              d["alg_C1"] = f.alg_C1;
              d["alg_C2"] = f.alg_C2;
              d["alg_r2"] = f.alg_r2;
              return d;
          },
          py::arg("times"), py::arg("values"));
    m.def("gaussian_wells", &gaussian_wells, py::arg("x"));

    m.def("preset_config", [](double beta) { return serialize_run_config(preset_gaussian_wells(beta)); },
          py::arg("beta"), "JSON text of the Gaussian-wells preset");
    m.def("simulate",
          [](const std::string& config_json) {
              const auto cfg = parse_run_config(config_json);
              RunResult r;
              {
                  py::gil_scoped_release release;
                  r = execute_run(cfg);
              }
              return run_to_dict(r);
          },
          py::arg("config_json"));
    m.def("run_and_write",
          [](const std::string& config_json, const std::filesystem::path& out_dir) {
              const auto cfg = parse_run_config(config_json);
              py::gil_scoped_release release;
              return run_and_write(cfg, out_dir);
          },
          py::arg("config_json"), py::arg("out_dir"));
    m.def("verify",
          [](const std::string& config_json) {
              const auto cfg = parse_run_config(config_json);
              std::vector<std::vector<VerifyCheck>> holder(1);
              {
                  py::gil_scoped_release release;
                  holder[0] = verify(cfg);
              }
              py::list out;
              for (const auto& c : holder[0]) out.append(py::make_tuple(c.name, c.passed, c.detail));
              return out;
          },
          py::arg("config_json"));
}
