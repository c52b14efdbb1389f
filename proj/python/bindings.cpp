#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "dsa/scenario.hpp"

namespace py = pybind11;
using namespace dsa;

namespace {

py::array_t<std::complex<double>> to_numpy(const std::vector<std::complex<double>>& v)
{
    py::array_t<std::complex<double>> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

py::dict map_to_dict(const EnergyMap& m)
{
    std::vector<double> f, e, db;
    for (const auto& x : m.entries) {
        f.push_back(x.carrier_freq);
        e.push_back(x.energy);
        db.push_back(x.energy_db);
    }
    py::dict d;
    d["carrier_hz"] = py::array_t<double>(f.size(), f.data());
    d["energy"] = py::array_t<double>(e.size(), e.data());
    d["energy_db"] = py::array_t<double>(db.size(), db.data());
    d["band"] = py::make_tuple(m.band.low, m.band.high);
    d["sensed_at"] = m.sensed_at;
    d["sensing_time"] = m.sensing_time;
    return d;
}

py::list rows_to_list(const std::vector<SweepRow>& rows)
{
    py::list out;
    for (const auto& r : rows) {
        py::dict d;
        d["seed"] = r.seed;
        d["pu_offset_hz"] = r.pu_offset;
        d["spectral_distance_hz"] = r.spectral_distance;
        d["psr"] = r.psr;
        d["prr"] = r.prr;
        d["dropped_sensing"] = r.dropped_sensing;
        d["sensing_time_s"] = r.sensing_time;
        d["rendezvous"] = r.rendezvous;
        d["rendezvous_failures"] = r.rendezvous_failures;
        out.append(d);
    }
    return out;
}

ScenarioConfig config_from(const std::string& json, std::optional<std::string> mode)
{
    return parse_config(json.empty() ? "{}" : json, mode ? std::optional<std::string_view>(*mode) : std::nullopt);
}

}  // namespace

PYBIND11_MODULE(_dsa_sim, m)
{
    m.doc() = "Dynamic spectrum access simulator core";
    py::register_exception<Error>(m, "SimError", PyExc_RuntimeError);

    py::class_<SensorConfig>(m, "SensorConfig")
        .def(py::init<>())
        .def(py::init([](double rate, double bw, std::size_t avg) { return SensorConfig{rate, bw, avg}; }),
             py::arg("usrp_rate") = 4e6, py::arg("channel_bandwidth") = 6250.0, py::arg("avg_vectors") = 512)
        .def_readwrite("usrp_rate", &SensorConfig::usrp_rate)
        .def_readwrite("channel_bandwidth", &SensorConfig::channel_bandwidth)
        .def_readwrite("avg_vectors", &SensorConfig::avg_vectors);

    py::class_<FftLayout>(m, "FftLayout")
        .def_readonly("fft_size", &FftLayout::fft_size)
        .def_readonly("bin_start", &FftLayout::bin_start)
        .def_readonly("bin_stop", &FftLayout::bin_stop)
        .def_readonly("usable_bins", &FftLayout::usable_bins)
        .def("__repr__", [](const FftLayout& l) {
            std::ostringstream os;
            os << "FftLayout(fft_size=" << l.fft_size << ", bin_start=" << l.bin_start << ", bin_stop=" << l.bin_stop
               << ", usable_bins=" << l.usable_bins << ")";
            return os.str();
        });

    m.def("fft_layout", &fft_layout, py::arg("cfg"));
    m.def("chunk_bandwidth", &chunk_bandwidth, py::arg("cfg"));
    m.def("blackman_harris", &blackman_harris, py::arg("n"));

    m.def(
        "sense_dwell",
        [](py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> samples, double center_freq,
           const SensorConfig& cfg) {
            IqBuffer buf;
            buf.samples.assign(samples.data(), samples.data() + samples.size());
            buf.center_freq = center_freq;
            buf.sample_rate = cfg.usrp_rate;
            return map_to_dict(sense_dwell(buf, cfg));
        },
        py::arg("samples"), py::arg("center_freq"), py::arg("cfg") = SensorConfig{},
        "Energy per retained bin of one dwell.");

    m.def(
        "capture",
        [](const std::string& config_json, std::uint64_t seed, double center_freq, double duration, double at_time) {
            auto cfg = config_from(config_json, std::nullopt);
            Environment env = cfg.environment;
            env.rng_seed = seed;
            return to_numpy(capture(env, center_freq, duration, at_time).samples);
        },
        py::arg("config_json"), py::arg("seed"), py::arg("center_freq"), py::arg("duration"), py::arg("at_time") = 0.0,
        "Baseband samples of the configured environment (tune delay already dropped).");

    m.def(
        "sweep",
        [](const std::string& config_json, std::uint64_t seed, double low, double high, double at_time) {
            auto cfg = config_from(config_json, std::nullopt);
            Environment env = cfg.environment;
            env.rng_seed = seed;
            return map_to_dict(sweep(env, {low, high}, cfg.sensor, at_time));
        },
        py::arg("config_json"), py::arg("seed"), py::arg("low"), py::arg("high"), py::arg("at_time") = 0.0);

    m.def(
        "run_static",
        [](const std::string& config_json) {
            SweepResult res;
            {
                py::gil_scoped_release nogil;
                res = run_static(config_from(config_json, "static"));
            }
            return py::make_tuple(rows_to_list(res.averaged), rows_to_list(res.per_seed));
        },
        py::arg("config_json") = "",
        "Static-channel sweep: (seed-averaged rows, per-seed rows).");

    m.def(
        "run_dsa",
        [](const std::string& config_json) {
            SweepResult res;
            {
                py::gil_scoped_release nogil;
                res = run_dsa(config_from(config_json, "dsa"));
            }
            return py::make_tuple(rows_to_list(res.averaged), rows_to_list(res.per_seed));
        },
        py::arg("config_json") = "", "DSA sweep: (seed-averaged rows, per-seed rows).");

    m.def(
        "run_scan",
        [](const std::string& config_json, const std::filesystem::path& out_dir) {
            return run_scan(config_from(config_json, std::nullopt), out_dir);
        },
        py::arg("config_json"), py::arg("out_dir"));

    m.def(
        "link_stats",
        [](const std::string& config_json, std::uint64_t seed, std::optional<double> pu_offset, std::int64_t packets) {
            const auto s = simulate_static_session(config_from(config_json, "static"), seed, pu_offset, packets).stats;
            py::dict d;
            d["sent"] = s.sent;
            d["received"] = s.received;
            d["crc_valid"] = s.crc_valid;
            d["psr"] = s.psr;
            d["prr"] = s.prr;
            return d;
        },
        py::arg("config_json"), py::arg("seed"), py::arg("pu_offset") = py::none(), py::arg("packets") = 1000);
}
