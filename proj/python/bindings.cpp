#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hbf/beamtrack.hpp"
#include "hbf/channel.hpp"
#include "hbf/config.hpp"
#include "hbf/linksim.hpp"
#include "hbf/phy.hpp"
#include "hbf/syssim.hpp"

namespace py = pybind11;

PYBIND11_MODULE(hbfpy, m) {
    m.doc() = "hybrid beamforming link/system simulator bindings";

    py::class_<hbf::ArrayGeometry>(m, "ArrayGeometry")
        .def(py::init<>())
        .def(py::init([](int rows, int cols, double spacing) {
                 return hbf::ArrayGeometry{rows, cols, spacing};
             }),
             py::arg("rows"), py::arg("cols"), py::arg("spacing") = 0.6)
        .def_readwrite("rows", &hbf::ArrayGeometry::rows)
        .def_readwrite("cols", &hbf::ArrayGeometry::cols)
        .def_readwrite("spacing", &hbf::ArrayGeometry::spacing_wavelengths)
        .def("size", &hbf::ArrayGeometry::size);

    py::class_<hbf::RfHardwareModel>(m, "RfHardwareModel")
        .def(py::init<>())
        .def_readwrite("phase_bits", &hbf::RfHardwareModel::phase_bits)
        .def_readwrite("amplitude_bits", &hbf::RfHardwareModel::amplitude_bits)
        .def_readwrite("amplitude_step_db", &hbf::RfHardwareModel::amplitude_step_db)
        .def("phase_step_deg", &hbf::RfHardwareModel::phase_step_deg)
        .def("amplitude_range_db", &hbf::RfHardwareModel::amplitude_range_db);

    py::class_<hbf::PathCluster>(m, "PathCluster")
        .def(py::init<>())
        .def_readwrite("azimuth", &hbf::PathCluster::azimuth)
        .def_readwrite("elevation", &hbf::PathCluster::elevation)
        .def_readwrite("power_fraction", &hbf::PathCluster::power_fraction)
        .def_readwrite("delay_s", &hbf::PathCluster::delay_s)
        .def_readwrite("doppler_phase_rate", &hbf::PathCluster::doppler_phase_rate);

    m.def("steering_vector", &hbf::steering_vector, py::arg("geometry"), py::arg("azimuth"),
          py::arg("elevation"));
    m.def(
        "quantize_weight",
        [](const hbf::CVec& w, const hbf::RfHardwareModel& hw) {
            return hbf::quantize_weight(w, hw);
        },
        py::arg("weight"), py::arg("hardware"));
    m.def("apply_weight", &hbf::apply_weight, py::arg("weight"), py::arg("channel"));
    m.def("zadoff_chu", &hbf::zadoff_chu, py::arg("root"), py::arg("length") = 63);
    m.def(
        "design_lpf",
        [](double cutoff_hz, double stopband_edge_hz, double sample_rate_hz) {
            hbf::FilterSpec spec;
            spec.cutoff_hz = cutoff_hz;
            spec.stopband_edge_hz = stopband_edge_hz;
            return hbf::design_lpf(spec, sample_rate_hz);
        },
        py::arg("cutoff_hz") = 1.4e6, py::arg("stopband_edge_hz") = 2.0e6,
        py::arg("sample_rate_hz") = 30.72e6);
    m.def("exact_correlation", &hbf::exact_correlation, py::arg("clusters"), py::arg("geometry"));
    m.def(
        "eigen_oracle",
        [](const hbf::CMat& r) {
            const auto res = hbf::eigen_oracle(r);
            return py::make_tuple(res.vector, res.value, res.degenerate);
        },
        py::arg("r"), "returns (vector, value, degenerate)");
    m.def(
        "optimality_gap",
        [](const hbf::CVec& w, const hbf::CMat& r) { return hbf::optimality_gap(w, r); },
        py::arg("weight"), py::arg("r"));
    m.def(
        "generate_channel",
        [](const std::vector<hbf::PathCluster>& clusters, const hbf::ArrayGeometry& geom,
           const std::vector<double>& offsets_hz, int subframe, std::uint64_t seed) {
            return hbf::generate_channel(clusters, geom, hbf::SubcarrierGrid{offsets_hz}, subframe,
                                         seed)
                .h;
        },
        py::arg("clusters"), py::arg("geometry"), py::arg("offsets_hz"), py::arg("subframe"),
        py::arg("seed"));

    py::class_<hbf::TrialRow>(m, "TrialRow")
        .def_readonly("subframe", &hbf::TrialRow::subframe)
        .def_readonly("weight_id", &hbf::TrialRow::weight_id)
        .def_readonly("snr_db", &hbf::TrialRow::snr_db)
        .def_readonly("oracle_db", &hbf::TrialRow::oracle_db)
        .def_readonly("gap_db", &hbf::TrialRow::gap_db)
        .def_readonly("evm_db", &hbf::TrialRow::evm_db);

    py::class_<hbf::TrialRecord>(m, "TrialRecord")
        .def_readonly("rows", &hbf::TrialRecord::rows)
        .def_readonly("sync_ok", &hbf::TrialRecord::sync_ok)
        .def_readonly("sync_offset", &hbf::TrialRecord::sync_offset);

    py::class_<hbf::AbSummary>(m, "AbSummary")
        .def_readonly("hybrid_mean_snr_db", &hbf::AbSummary::hybrid_mean_snr_db)
        .def_readonly("baseline_mean_snr_db", &hbf::AbSummary::baseline_mean_snr_db)
        .def_readonly("gain_db", &hbf::AbSummary::gain_db)
        .def_readonly("oracle_gain_db", &hbf::AbSummary::oracle_gain_db);

    m.def(
        "run_link_trial",
        [](const std::vector<hbf::PathCluster>& clusters, int subframes, std::uint64_t seed,
           double noise_power, bool ideal_latency) {
            hbf::LinkScenario sc;
            sc.clusters = clusters;
            sc.noise_power = noise_power;
            return hbf::run_link_trial(
                sc, ideal_latency ? hbf::ideal_latency() : hbf::LatencyModel{}, subframes, seed);
        },
        py::arg("clusters"), py::arg("subframes"), py::arg("seed"), py::arg("noise_power") = 0.01,
        py::arg("ideal_latency") = false);
    m.def(
        "run_ab_comparison",
        [](const std::vector<hbf::PathCluster>& clusters, int subframes, std::uint64_t seed,
           double noise_power) {
            hbf::LinkScenario sc;
            sc.clusters = clusters;
            sc.noise_power = noise_power;
            return hbf::run_ab_comparison(sc, hbf::ideal_latency(), subframes, seed);
        },
        py::arg("clusters"), py::arg("subframes"), py::arg("seed"), py::arg("noise_power") = 0.01);
    m.def(
        "run_system_eval",
        [](int drops, int ms_per_floor, std::uint64_t seed, int workers) {
            const auto res = hbf::run_system_eval(hbf::default_deployment(),
                                                  hbf::PropagationModel{}, drops, ms_per_floor,
                                                  seed, workers);
            py::dict out;
            for (int v = 0; v < hbf::kVariantCount; ++v) {
                const auto name = hbf::variant_name(static_cast<hbf::SystemVariant>(v));
                out[py::str(name)] = res.rates[static_cast<std::size_t>(v)];
                out[py::str(name + "_mean")] = res.mean_rate_bps[static_cast<std::size_t>(v)];
            }
            return out;
        },
        py::arg("drops"), py::arg("ms_per_floor") = 50, py::arg("seed") = 1, py::arg("workers") = 1);
}
