#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "berger/experiment.hpp"
#include "berger/frenet_analysis.hpp"
#include "berger/geodesic_flow.hpp"
#include "berger/lifted_geometry.hpp"

namespace py = pybind11;
using namespace berger;

namespace {

using Vec = Eigen::VectorXd;

SpaceFormModel model_of(int n, double m) {
    SpaceFormModel model{n, m};
    model.validate();
    return model;
}

BergerParams params_of(double delta) {
    BergerParams p{delta};
    p.validate();
    return p;
}

LiftKind kind_of(const std::string& s) {
    if (s == "h" || s == "horizontal") return LiftKind::horizontal;
    if (s == "v" || s == "vertical") return LiftKind::vertical;
    throw InvalidArgument("lift kind must be 'h' or 'v', got '" + s + "'");
}

BundleState state_of(const Vec& u, const Vec& xi, const Vec& w) {
    BundleState s;
    s.u = u;
    s.xi = xi;
    s.w = w;
    return s;
}

py::dict trajectory_dict(const Trajectory& traj) {
    const auto rows = static_cast<Eigen::Index>(traj.samples.size());
    const Eigen::Index d = traj.config.model.real_dim();
    Vec sigma(rows), c(rows), mu(rows), speed(rows);
    Eigen::MatrixXd u(rows, d), xi(rows, d), w(rows, d);
    for (Eigen::Index j = 0; j < rows; ++j) {
        const Sample& s = traj.samples[static_cast<std::size_t>(j)];
        sigma[j] = s.state.sigma;
        u.row(j) = s.state.u.transpose();
        xi.row(j) = s.state.xi.transpose();
        w.row(j) = s.state.w.transpose();
        c[j] = s.diag.c;
        mu[j] = s.diag.mu;
        speed[j] = s.diag.lifted_speed;
    }
    py::dict out;
    out["sigma"] = sigma;
    out["u"] = u;
    out["xi"] = xi;
    out["w"] = w;
    out["c"] = c;
    out["mu"] = mu;
    out["lifted_speed"] = speed;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Geodesics of Berger-deformed Sasaki metrics over complex space forms";

    auto base = py::register_exception<Error>(m, "BergerError", PyExc_ValueError);
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
    py::register_exception<InfeasibleSpeed>(m, "InfeasibleSpeed", base.ptr());
    py::register_exception<DegenerateProjection>(m, "DegenerateProjection", base.ptr());
    py::register_exception<ConstraintViolation>(m, "ConstraintViolation", base.ptr());
    py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());

    m.def("apply_J", [](const Vec& x) -> Vec { return apply_J(x); }, py::arg("x"));

    m.def(
        "riemann",
        [](const Vec& x, const Vec& y, const Vec& z, int n, double m_) -> Vec {
            return riemann(model_of(n, m_), x, y, z);
        },
        py::arg("x"), py::arg("y"), py::arg("z"), py::arg("n"), py::arg("m") = 4.0);

    m.def(
        "script_R_matrix",
        [](const Vec& xi, const Vec& xidot, int n, double m_, double delta) {
            return script_R_matrix(model_of(n, m_), params_of(delta), xi, xidot);
        },
        py::arg("xi"), py::arg("xidot"), py::arg("n"), py::arg("m") = 4.0,
        py::arg("delta") = 0.5);

    m.def(
        "lifted_inner",
        [](const Vec& xi, const Vec& ah, const Vec& av, const Vec& bh, const Vec& bv,
           double delta) {
            return lifted_inner(params_of(delta), FiberPoint{xi}, LiftedVector{ah, av},
                                LiftedVector{bh, bv});
        },
        py::arg("xi"), py::arg("a_h"), py::arg("a_v"), py::arg("b_h"), py::arg("b_v"),
        py::arg("delta") = 0.5);

    m.def(
        "lifted_connection",
        [](const std::string& kind_a, const std::string& kind_b, const Vec& xi, const Vec& x,
           const Vec& y, const Vec& nabla_x_y, const Vec& nabla_y_x, int n, double m_,
           double delta) {
            FieldJet jets;
            const Vec zero = Vec::Zero(x.size());
            for (auto& v : jets.value) v = zero;
            for (auto& row : jets.derivative)
                for (auto& v : row) v = zero;
            jets.value[0] = x;
            jets.value[1] = y;
            jets.derivative[0][1] = nabla_x_y;
            jets.derivative[1][0] = nabla_y_x;
            const LiftedVector r = lifted_connection(kind_of(kind_a), kind_of(kind_b), jets,
                                                     FiberPoint{xi}, params_of(delta),
                                                     model_of(n, m_));
            return py::make_tuple(Vec(r.h), Vec(r.v));
        },
        py::arg("kind_a"), py::arg("kind_b"), py::arg("xi"), py::arg("x"), py::arg("y"),
        py::arg("nabla_x_y"), py::arg("nabla_y_x"), py::arg("n"), py::arg("m") = 4.0,
        py::arg("delta") = 0.5,
        "nabla~ of Y^kind_b along X^kind_a; returns (horizontal, vertical) parts.");

    m.def(
        "connection_sweep",
        [](int n, double m_, double delta, int jets, std::uint64_t seed,
           std::vector<double> xi_norms) {
            const ConnectionSweep s =
                connection_sweep(model_of(n, m_), params_of(delta), jets, seed, xi_norms);
            py::dict out;
            out["koszul"] = s.koszul;
            out["torsion"] = s.torsion;
            out["metric_compatibility"] = s.compatibility;
            return out;
        },
        py::arg("n") = 4, py::arg("m") = 4.0, py::arg("delta") = 0.5, py::arg("jets") = 100,
        py::arg("seed") = 0, py::arg("xi_norms") = std::vector<double>{});

    m.def(
        "integrate",
        [](const Vec& xi0, const Vec& w0, const Vec& u_dir, const std::string& bundle, int n,
           double m_, double delta, double step, double sigma_max, int sample_stride) {
            FlowConfig cfg;
            cfg.bundle = parse_bundle(bundle);
            cfg.model = model_of(n, m_);
            cfg.params = params_of(delta);
            cfg.step = step;
            cfg.sigma_max = sigma_max;
            cfg.sample_stride = sample_stride;
            cfg.validate();
            const InitialState init = prepare_initial(xi0, w0, u_dir, cfg.params, cfg.bundle);
            return trajectory_dict(integrate(cfg, init.state));
        },
        py::arg("xi0"), py::arg("w0"), py::arg("u_dir"), py::arg("bundle") = "T1M",
        py::arg("n") = 4, py::arg("m") = 4.0, py::arg("delta") = 0.5, py::arg("step") = 1e-3,
        py::arg("sigma_max") = 1.0, py::arg("sample_stride") = 1);

    m.def(
        "curvatures",
        [](const Vec& u, const Vec& xi, const Vec& w, int n, double m_, double delta,
           int p_max) {
            const DerivativeChain chain =
                algebraic_chain(state_of(u, xi, w), model_of(n, m_), params_of(delta), p_max);
            return generalized_curvatures(chain).k;
        },
        py::arg("u"), py::arg("xi"), py::arg("w"), py::arg("n") = 4, py::arg("m") = 4.0,
        py::arg("delta") = 0.5, py::arg("p_max") = 8,
        "Generalized curvatures k_1.. of the projected unit-bundle geodesic.");

    m.def(
        "run_command",
        [](const std::string& command, const std::string& config_json) {
            const ExperimentConfig cfg = load_config(nlohmann::json::parse(config_json));
            const CommandResult res = run_command(command, cfg);
            return py::make_tuple(res.exit_code, res.report.dump());
        },
        py::arg("command"), py::arg("config_json") = "{}",
        "Runs a CLI command in-process; returns (exit_code, report_json).");
}
