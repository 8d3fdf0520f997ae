#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "rss/codec.hpp"
#include "rss/orderstats.hpp"
#include "rss/pursuit.hpp"
#include "rss/sequence.hpp"
#include "rss/signal.hpp"
#include "rss/synthetic.hpp"

namespace py = pybind11;

namespace {

using namespace rss;

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
	if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
	return std::vector<double>(a.data(), a.data() + a.size());
}

// Explicit shape and strides; the count-only constructors yield zero strides here.
template <typename T>
py::array_t<T> to_array(const std::vector<T>& v) {
	return py::array_t<T>({static_cast<py::ssize_t>(v.size())}, {static_cast<py::ssize_t>(sizeof(T))}, v.data());
}

PursuitConfig make_config(std::size_t length, const std::vector<int>& scales, const std::string& variant,
                          const std::string& sequence, std::uint64_t seed, std::uint32_t refresh,
                          std::uint32_t subsample, std::optional<double> target_srr_db,
                          std::optional<std::size_t> max_atoms, const std::string& family, const std::string& window,
                          bool full_dictionary) {
	PursuitConfig cfg;
	cfg.variant = parse_variant(variant);
	cfg.dict = DictConfig{scales, static_cast<int>(length), parse_window(window), parse_family(family)};
	cfg.sequence = SequenceSpec{parse_sequence_kind(sequence), seed, refresh, subsample};
	cfg.stop.target_srr_db = target_srr_db;
	cfg.stop.max_atoms = max_atoms;
	cfg.full_dictionary = full_dictionary;
	return cfg;
}

py::dict approximant_dict(const Approximant& a) {
	std::vector<int> scale, time, freq, shift;
	std::vector<double> weight;
	for (const auto& e : a.entries) {
		scale.push_back(e.param.scale_index);
		time.push_back(e.param.time);
		freq.push_back(e.param.freq);
		shift.push_back(e.param.shift);
		weight.push_back(e.weight);
	}
	py::dict d;
	d["scale_index"] = to_array(scale);
	d["time"] = to_array(time);
	d["freq"] = to_array(freq);
	d["shift"] = to_array(shift);
	d["weight"] = to_array(weight);
	d["residual_energy"] = to_array(a.trace);
	d["residual"] = to_array(a.residual);
	d["srr_db"] = a.srr_db();
	d["stop_reason"] = to_string(a.stop_reason);
	d["budget_exhausted"] = a.budget_exhausted;
	return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
	m.doc() = "Matching pursuit with sequential subdictionaries";

	py::register_exception<DecodeError>(m, "DecodeError", PyExc_ValueError);
	py::register_exception<QuadratureError>(m, "QuadratureError", PyExc_ArithmeticError);

	m.def(
	    "decompose",
	    [](const Array& samples, const std::vector<int>& scales, const std::string& variant,
	       const std::string& sequence, std::uint64_t seed, std::uint32_t refresh, std::uint32_t subsample,
	       std::optional<double> target_srr_db, std::optional<std::size_t> max_atoms, const std::string& family,
	       const std::string& window, bool full_dictionary) {
		    const auto x = to_vector(samples);
		    const auto cfg = make_config(x.size(), scales, variant, sequence, seed, refresh, subsample, target_srr_db,
		                                 max_atoms, family, window, full_dictionary);
		    Approximant a;
		    {
			    py::gil_scoped_release release;
			    a = run(Signal(x), cfg);
		    }
		    return approximant_dict(a);
	    },
	    py::arg("samples"), py::arg("scales"), py::arg("variant") = "mp", py::arg("sequence") = "random",
	    py::arg("seed") = 1, py::arg("refresh") = 1, py::arg("subsample") = 1, py::arg("target_srr_db") = py::none(),
	    py::arg("max_atoms") = py::none(), py::arg("family") = "mdct", py::arg("window") = "sine",
	    py::arg("full_dictionary") = false);

	m.def(
	    "encode",
	    [](const Array& samples, const std::vector<int>& scales, double target_srr_db, int weight_bits,
	       const std::string& variant, const std::string& sequence, std::uint64_t seed, std::uint32_t refresh,
	       std::uint32_t subsample, std::size_t max_atoms, int sample_rate) {
		    const auto x = to_vector(samples);
		    const auto cfg = make_config(x.size(), scales, variant, sequence, seed, refresh, subsample, target_srr_db,
		                                 max_atoms, "mdct", "sine", false);
		    EncodeResult r;
		    {
			    py::gil_scoped_release release;
			    const Approximant a = run(Signal(x, sample_rate), cfg);
			    r = encode(a, CodecConfig{cfg.dict, cfg.sequence, weight_bits, sample_rate}, x);
		    }
		    py::dict cost;
		    cost["header"] = r.cost.header_bits;
		    cost["index"] = r.cost.index_bits;
		    cost["shift"] = r.cost.shift_bits;
		    cost["weight"] = r.cost.weight_bits;
		    cost["padding"] = r.cost.padding_bits;
		    cost["total"] = r.cost.total_bits();
		    py::dict d;
		    d["bytes"] = py::bytes(reinterpret_cast<const char*>(r.bytes.data()), r.bytes.size());
		    d["cost"] = cost;
		    d["snr_db"] = r.snr_db;
		    d["atoms"] = r.symbols.size();
		    return d;
	    },
	    py::arg("samples"), py::arg("scales"), py::arg("target_srr_db") = 10.0, py::arg("weight_bits") = 8,
	    py::arg("variant") = "mp", py::arg("sequence") = "random", py::arg("seed") = 1, py::arg("refresh") = 1,
	    py::arg("subsample") = 1, py::arg("max_atoms") = 100000, py::arg("sample_rate") = 32000);

	m.def(
	    "decode",
	    [](const py::bytes& data) {
		    const std::string s = data;
		    const std::vector<std::uint8_t> bytes(s.begin(), s.end());
		    const DecodedStream d = decode(bytes);
		    py::dict out;
		    out["samples"] = to_array(d.samples);
		    out["sample_rate"] = d.header.sample_rate;
		    out["atoms"] = d.entries.size();
		    out["variant"] = to_string(d.header.variant);
		    out["dict"] = d.header.dict.to_text();
		    return out;
	    },
	    py::arg("data"));

	m.def(
	    "shift_sequence_hash",
	    [](const std::string& sequence, std::uint64_t seed, const std::vector<int>& scales, int length,
	       std::size_t iterations, std::uint32_t refresh, std::uint32_t subsample) {
		    const DictConfig dict{scales, length, Window::Sine, Family::Mdct};
		    return shift_sequence_hash(SequenceSpec{parse_sequence_kind(sequence), seed, refresh, subsample}, dict,
		                               iterations);
	    },
	    py::arg("sequence"), py::arg("seed"), py::arg("scales"), py::arg("length"), py::arg("iterations"),
	    py::arg("refresh") = 1, py::arg("subsample") = 1);

	m.def(
	    "srr_db",
	    [](const Array& reference, const Array& approximant) {
		    const auto ref = to_vector(reference);
		    const auto approx = to_vector(approximant);
		    return srr(std::span<const double>(ref), std::span<const double>(approx));
	    },
	    py::arg("reference"), py::arg("approximant"));

	m.def(
	    "synthetic_audio",
	    [](std::uint64_t seed, int length, int sample_rate) {
		    SyntheticAudioOptions opts;
		    opts.length = length;
		    opts.sample_rate = sample_rate;
		    const Signal s = synthetic_audio(seed, opts);
		    return to_array(std::vector<double>(s.samples().begin(), s.samples().end()));
	    },
	    py::arg("seed"), py::arg("length") = 32768, py::arg("sample_rate") = 32000);

	m.def(
	    "order_pdf",
	    [](const std::string& dist, int i, int n, double z) { return order_pdf(DistributionModel::parse(dist), i, n, z); },
	    py::arg("dist"), py::arg("i"), py::arg("n"), py::arg("z"));
	m.def(
	    "order_moment",
	    [](const std::string& dist, int i, int n, int m) { return order_moment(DistributionModel::parse(dist), i, n, m); },
	    py::arg("dist"), py::arg("i"), py::arg("n"), py::arg("m"));
	m.def(
	    "predict_fixed",
	    [](const std::string& dist, int M, int n_iters, double f_energy) {
		    return to_array(predict_fixed(DistributionModel::parse(dist), M, n_iters, f_energy).values);
	    },
	    py::arg("dist"), py::arg("M"), py::arg("n_iters"), py::arg("f_energy"));
	m.def(
	    "predict_redraw",
	    [](const std::string& dist, int M, int n_iters, double f_energy) {
		    return to_array(predict_redraw(DistributionModel::parse(dist), M, n_iters, f_energy).values);
	    },
	    py::arg("dist"), py::arg("M"), py::arg("n_iters"), py::arg("f_energy"));
	m.def(
	    "simulate_greedy",
	    [](const std::string& dist, int M, int n_iters, const std::string& strategy, std::size_t trials,
	       std::uint64_t seed, double f_energy) {
		    const auto s = strategy == "fixed" ? Strategy::Fixed
		                   : strategy == "redraw"
		                       ? Strategy::Redraw
		                       : throw std::invalid_argument("strategy must be fixed or redraw");
		    SimulationResult r;
		    {
			    py::gil_scoped_release release;
			    r = simulate_greedy(DistributionModel::parse(dist), M, n_iters, s, trials, seed, f_energy);
		    }
		    py::dict d;
		    d["mean"] = to_array(r.mean);
		    d["variance"] = to_array(r.variance);
		    d["mean_stderr"] = to_array(r.mean_stderr);
		    d["clamp_count"] = r.clamp_count;
		    return d;
	    },
	    py::arg("dist"), py::arg("M"), py::arg("n_iters"), py::arg("strategy"), py::arg("trials"), py::arg("seed"),
	    py::arg("f_energy"));
}
