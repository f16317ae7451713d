#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pairtunnel/classical.hpp"
#include "pairtunnel/eigen1d.hpp"
#include "pairtunnel/experiments.hpp"
#include "pairtunnel/io.hpp"
#include "pairtunnel/model.hpp"
#include "pairtunnel/tdse.hpp"

namespace py = pybind11;
using namespace pairtunnel;

namespace {

py::dict series_to_dict(const ObservableSeries& s) {
    const auto n = static_cast<py::ssize_t>(s.records.size());
    py::dict out;
    const auto column = [&](auto get) {
        Eigen::ArrayXd v(n);
        for (py::ssize_t i = 0; i < n; ++i) v[i] = get(s.records[i]);
        return py::cast(v);
    };
    out["t"] = column([](const ObservableRecord& r) { return r.t; });
    out["norm"] = column([](const ObservableRecord& r) { return r.norm; });
    out["P_T"] = column([](const ObservableRecord& r) { return r.quad.transmitted; });
    out["P_D"] = column([](const ObservableRecord& r) { return r.quad.disintegrated; });
    out["P_R"] = column([](const ObservableRecord& r) { return r.quad.reflected; });
    out["p_t"] = column([](const ObservableRecord& r) { return r.shifted.transmitted; });
    out["p_d"] = column([](const ObservableRecord& r) { return r.shifted.disintegrated; });
    out["p_r"] = column([](const ObservableRecord& r) { return r.shifted.reflected; });
    out["p_s"] = column([](const ObservableRecord& r) { return r.shifted.trapped; });
    out["absorbed"] = column([](const ObservableRecord& r) { return r.absorbed; });
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "composite-pair tunneling simulations";

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("alpha", &ModelParams::alpha)
        .def_readwrite("n_channels", &ModelParams::n_channels)
        .def_readwrite("well_depth", &ModelParams::well_depth)
        .def_readwrite("well_width", &ModelParams::well_width)
        .def_readwrite("m1", &ModelParams::m1)
        .def_readwrite("m2", &ModelParams::m2)
        .def_readwrite("rbar", &ModelParams::rbar)
        .def_readwrite("sigma_r", &ModelParams::sigma_r)
        .def_readwrite("e_cm", &ModelParams::e_cm)
        .def_property_readonly("total_mass", &ModelParams::total_mass)
        .def_property_readonly("reduced_mass", &ModelParams::reduced_mass)
        .def_static("paper", &ModelParams::paper, py::arg("n_channels"), py::arg("alpha"));

    m.def("barrier_v", py::vectorize(barrier_v));
    m.def("barrier_v_prime", py::vectorize(barrier_v_prime));
    m.def("coupling_u", [](const ModelParams& p, double rho) { return coupling_u(p, rho); });
    m.def("omega_cartesian", [](const ModelParams& p, double x1, double x2) {
        return omega_cartesian(p, x1, x2);
    });
    m.def("omega_cm", [](const ModelParams& p, double r, double rho) {
        return omega_cm(p, r, rho);
    });
    m.def("classical_force", [](const ModelParams& p, double x1, double x2) {
        const auto f = classical_force(p, x1, x2);
        return py::make_tuple(f.f1, f.f2);
    });

    py::class_<Grid1D>(m, "Grid1D")
        .def(py::init([](double x_min, double x_max, int n) {
                 return Grid1D{x_min, x_max, n};
             }),
             py::arg("x_min"), py::arg("x_max"), py::arg("n"))
        .def_readonly("x_min", &Grid1D::x_min)
        .def_readonly("x_max", &Grid1D::x_max)
        .def_readonly("n", &Grid1D::n)
        .def_property_readonly("dx", &Grid1D::dx)
        .def("points", &Grid1D::points);

    m.def("default_eigen_grid", &default_eigen_grid);

    py::enum_<Parity>(m, "Parity").value("even", Parity::even).value("odd", Parity::odd);

    py::class_<BoundStateSet>(m, "BoundStateSet")
        .def_readonly("grid", &BoundStateSet::grid)
        .def_readonly("energies", &BoundStateSet::energies)
        .def_readonly("wavefunctions", &BoundStateSet::wavefunctions)
        .def_property_readonly("parities",
                               [](const BoundStateSet& s) {
                                   std::vector<std::string> out;
                                   for (auto p : s.parities)
                                       out.push_back(p == Parity::even ? "even" : "odd");
                                   return out;
                               })
        .def("state", &BoundStateSet::state)
        .def_property_readonly("count", &BoundStateSet::count);

    m.def("solve_bound_states", &solve_bound_states, py::arg("params"), py::arg("grid"),
          py::arg("max_states") = -1);

    py::class_<ContinuumState>(m, "ContinuumState")
        .def_readonly("energy", &ContinuumState::energy)
        .def_readonly("k", &ContinuumState::k)
        .def_readonly("wavefunction", &ContinuumState::wavefunction)
        .def_readonly("delta_norm_factor", &ContinuumState::delta_norm_factor)
        .def_readonly("phase_shift", &ContinuumState::phase_shift);

    m.def("continuum_state", &continuum_state, py::arg("params"), py::arg("energy"),
          py::arg("parity"), py::arg("grid"));

    m.def("form_factor", &form_factor, py::arg("grid"), py::arg("phi_n"), py::arg("phi_np"),
          py::arg("p"));
    m.def("w_matrix_element", &w_matrix_element, py::arg("grid"), py::arg("phi_n"),
          py::arg("phi_np"), py::arg("k"), py::arg("kp"), py::arg("v1"), py::arg("v2"),
          py::arg("params"));
    m.def("classify_transition",
          [](const Grid1D& g, Parity a, Parity b, const Potential& v1, const Potential& v2) {
              return classify_transition(g, a, b, v1, v2) == TransitionRule::forbidden
                         ? "forbidden"
                         : "allowed";
          });
    m.def("effective_potential_curve",
          [](const Grid1D& g, const Eigen::VectorXd& phi_n, const Eigen::VectorXd& phi_np,
             const Potential& v1, const Potential& v2, const Eigen::ArrayXd& rs,
             const ModelParams& p) {
              const auto c = effective_potential_curve(g, phi_n, phi_np, v1, v2, rs, p);
              py::dict out;
              out["r"] = c.r;
              out["z"] = c.z;
              out["clipped"] = c.clipped;
              return out;
          });
    m.def("delta_normalization_factor", &delta_normalization_factor);
    m.def("lowest_positive_state", [](const ModelParams& p, const Grid1D& g, Parity parity) {
        const auto s = lowest_positive_state(p, g, parity);
        return py::make_tuple(s.energy, s.wavefunction);
    });

    py::enum_<Frame>(m, "Frame")
        .value("cartesian", Frame::cartesian)
        .value("cm_relative", Frame::cm_relative);

    py::class_<Grid2D>(m, "Grid2D")
        .def(py::init([](const Grid1D& a0, const Grid1D& a1, Frame f) {
                 return Grid2D{a0, a1, f};
             }),
             py::arg("axis0"), py::arg("axis1"), py::arg("frame") = Frame::cm_relative)
        .def_readonly("axis0", &Grid2D::axis0)
        .def_readonly("axis1", &Grid2D::axis1)
        .def_readonly("frame", &Grid2D::frame);

    py::class_<Wavefunction2D>(m, "Wavefunction2D")
        .def_readonly("grid", &Wavefunction2D::grid)
        .def_readonly("time", &Wavefunction2D::time)
        .def_property_readonly("norm", &Wavefunction2D::norm)
        .def_property_readonly("values", [](const Wavefunction2D& psi) {
            const int n0 = psi.grid.axis0.n, n1 = psi.grid.axis1.n;
            Eigen::MatrixXcd out(n0, n1);
            for (int i0 = 0; i0 < n0; ++i0)
                for (int i1 = 0; i1 < n1; ++i1) out(i0, i1) = psi.at(i0, i1);
            return out;
        });

    py::class_<AbsorbingMask>(m, "AbsorbingMask")
        .def_static("cos2_ramp", &AbsorbingMask::cos2_ramp, py::arg("grid"),
                    py::arg("width0"), py::arg("width1"), py::arg("strength"))
        .def_static("none", &AbsorbingMask::none, py::arg("grid"));

    m.def("build_initial_state", &build_initial_state, py::arg("params"), py::arg("phi_g"),
          py::arg("grid"));
    m.def("energy_expectation", &energy_expectation, py::arg("psi"), py::arg("params"));
    m.def("quadrant_probabilities",
          [](const Wavefunction2D& psi, const ModelParams& p) {
              const auto q = quadrant_probabilities(psi, p);
              return py::make_tuple(q.transmitted, q.disintegrated, q.reflected);
          },
          py::arg("psi"), py::arg("params") = ModelParams{});
    m.def("shifted_probabilities",
          [](const Wavefunction2D& psi, const ModelParams& p) {
              const auto s = shifted_probabilities(psi, p);
              return py::make_tuple(s.transmitted, s.disintegrated, s.reflected, s.trapped);
          },
          py::arg("psi"), py::arg("params") = ModelParams{});
    m.def("propagate",
          [](Wavefunction2D& psi, double t_final, double record_every, const ModelParams& p,
             const AbsorbingMask& mask, double dt) {
              return series_to_dict(propagate(psi, t_final, record_every, p, mask, dt));
          },
          py::arg("psi"), py::arg("t_final"), py::arg("record_every"), py::arg("params"),
          py::arg("mask"), py::arg("dt"));

    py::class_<EnsembleConfig>(m, "EnsembleConfig")
        .def(py::init<>())
        .def_readwrite("n_particles", &EnsembleConfig::n_particles)
        .def_readwrite("seed", &EnsembleConfig::seed)
        .def_readwrite("sigma_rho", &EnsembleConfig::sigma_rho);

    py::class_<PhaseSpaceEnsemble>(m, "PhaseSpaceEnsemble")
        .def_readonly("r", &PhaseSpaceEnsemble::r)
        .def_readonly("rho", &PhaseSpaceEnsemble::rho)
        .def_readonly("p_r", &PhaseSpaceEnsemble::p_r)
        .def_readonly("p_rho", &PhaseSpaceEnsemble::p_rho)
        .def_readonly("seed", &PhaseSpaceEnsemble::seed);

    m.def("wigner_sample", &wigner_sample, py::arg("config"), py::arg("params"));

    m.def("export_density",
          [](const std::string& path, const Wavefunction2D& psi, Frame frame,
             const ModelParams& p, bool log_scale, const std::string& config_hash) {
              export_density(path, psi, frame, p, log_scale, config_hash);
          },
          py::arg("path"), py::arg("psi"), py::arg("frame"), py::arg("params"),
          py::arg("log_scale") = false, py::arg("config_hash") = "");
    m.def("read_density_file", &read_density_file, py::arg("path"));

    m.def("single_trajectory",
          [](const ModelParams& p, double total_energy, double t_final, double dt) {
              const auto traj = single_trajectory(p, total_energy, t_final, dt);
              py::dict out;
              out["t"] = traj.t;
              std::vector<std::array<double, 4>> pts;
              for (const auto& s : traj.points) pts.push_back({s.r, s.rho, s.p_r, s.p_rho});
              out["points"] = pts;
              out["energy_drift"] = traj.energy_drift;
              out["final_region"] = traj.final_region == Region::transmitted   ? "I"
                                    : traj.final_region == Region::reflected   ? "III"
                                    : traj.final_region == Region::disintegrated ? "II/IV"
                                                                                : "boundary";
              return out;
          },
          py::arg("params"), py::arg("total_energy"), py::arg("t_final"), py::arg("dt"));

    m.def("run_ensemble",
          [](const PhaseSpaceEnsemble& ens, const ModelParams& p, double t_final, double dt,
             int workers) {
              const auto res = run_ensemble(ens, p, t_final, dt, nullptr, workers);
              py::dict out;
              out["P_T"] = res.quad.transmitted;
              out["P_D"] = res.quad.disintegrated;
              out["P_R"] = res.quad.reflected;
              out["p_t"] = res.shifted.transmitted;
              out["p_d"] = res.shifted.disintegrated;
              out["p_r"] = res.shifted.reflected;
              out["p_s"] = res.shifted.trapped;
              out["drift_q999"] = res.drift_q999;
              out["drift_outliers"] = res.drift_outliers;
              return out;
          },
          py::arg("ensemble"), py::arg("params"), py::arg("t_final"), py::arg("dt"),
          py::arg("workers") = 1);

    m.attr("__version__") = kVersion;
}
