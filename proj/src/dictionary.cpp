#include "rss/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fft.hpp"

namespace rss {

using cplx = std::complex<double>;
using detail::ComplexFft;
using detail::FftBuffer;

std::string to_string(Family family) {
	return family == Family::Gabor ? "gabor" : "mdct";
}

std::string to_string(Window window) {
	switch (window) {
	case Window::Hann: return "hann";
	case Window::Gaussian: return "gaussian";
	case Window::Sine: return "sine";
	}
	return "hann";
}

Family parse_family(std::string_view text) {
	if (text == "gabor") return Family::Gabor;
	if (text == "mdct") return Family::Mdct;
	throw std::invalid_argument("unknown dictionary family: " + std::string(text));
}

Window parse_window(std::string_view text) {
	if (text == "hann") return Window::Hann;
	if (text == "gaussian") return Window::Gaussian;
	if (text == "sine") return Window::Sine;
	throw std::invalid_argument("unknown window: " + std::string(text));
}

void DictConfig::validate() const {
	if (signal_length <= 0) {
		throw std::invalid_argument("signal length must be positive");
	}
	if (scales.empty()) {
		throw std::invalid_argument("at least one scale is required");
	}
	for (std::size_t k = 0; k < scales.size(); ++k) {
		const int s = scales[k];
		if (s < 4 || s % 4 != 0) {
			throw std::invalid_argument("scale " + std::to_string(s) + " must be a positive multiple of 4");
		}
		if (s > signal_length) {
			throw std::invalid_argument("scale " + std::to_string(s) + " exceeds the signal length");
		}
		if (k > 0 && s <= scales[k - 1]) {
			throw std::invalid_argument("scales must be strictly increasing");
		}
	}
}

int DictConfig::frame_count(int k) const {
	return 2 * signal_length / scales[static_cast<std::size_t>(k)];
}

std::string DictConfig::to_text() const {
	std::ostringstream out;
	out << "family=" << to_string(family) << ";window=" << to_string(window) << ";N=" << signal_length << ";scales=";
	for (std::size_t k = 0; k < scales.size(); ++k) {
		out << (k ? "," : "") << scales[k];
	}
	return out.str();
}

DictConfig DictConfig::from_text(std::string_view text) {
	DictConfig config;
	bool have_n = false, have_scales = false;
	std::size_t pos = 0;
	while (pos <= text.size()) {
		const std::size_t end = std::min(text.find(';', pos), text.size());
		const std::string_view item = text.substr(pos, end - pos);
		pos = end + 1;
		if (item.empty()) {
			continue;
		}
		const std::size_t eq = item.find('=');
		if (eq == std::string_view::npos) {
			throw std::invalid_argument("malformed dictionary config entry: " + std::string(item));
		}
		const std::string_view key = item.substr(0, eq);
		const std::string value(item.substr(eq + 1));
		if (key == "family") {
			config.family = parse_family(value);
		} else if (key == "window") {
			config.window = parse_window(value);
		} else if (key == "N") {
			config.signal_length = std::stoi(value);
			have_n = true;
		} else if (key == "scales") {
			std::stringstream ss(value);
			std::string tok;
			while (std::getline(ss, tok, ',')) {
				config.scales.push_back(std::stoi(tok));
			}
			have_scales = true;
		} else {
			throw std::invalid_argument("unknown dictionary config key: " + std::string(key));
		}
	}
	if (!have_n || !have_scales) {
		throw std::invalid_argument("dictionary config needs N and scales");
	}
	config.validate();
	return config;
}

bool lexicographic_less(const AtomParam& a, const AtomParam& b) {
	if (a.scale_index != b.scale_index) return a.scale_index < b.scale_index;
	if (a.time != b.time) return a.time < b.time;
	return a.freq < b.freq;
}

SubdictSpec SubdictSpec::coarse(const DictConfig& config) {
	SubdictSpec sub;
	sub.shifts.assign(config.scales.size(), 0);
	sub.phases.assign(config.scales.size(), 0);
	return sub;
}

SubdictSpec SubdictSpec::full_dictionary(const DictConfig& config) {
	SubdictSpec sub = coarse(config);
	sub.full = true;
	return sub;
}

ScaleGrid scale_grid(const DictConfig& config, const SubdictSpec& sub, int k) {
	const int s = config.scales[static_cast<std::size_t>(k)];
	ScaleGrid grid;
	grid.freq_count = s / 2;
	if (sub.full) {
		grid.first_time = -s / 4;
		grid.stride = 1;
		grid.count = config.signal_length;
		return grid;
	}
	const int d = sub.subsample;
	if (d < 1) {
		throw std::invalid_argument("subsampling factor must be >= 1");
	}
	const int tau = sub.shifts.empty() ? 0 : sub.shifts.at(static_cast<std::size_t>(k));
	const int phase = sub.phases.empty() ? 0 : sub.phases.at(static_cast<std::size_t>(k));
	if (tau < -s / 4 || tau >= s / 4) {
		throw std::invalid_argument("shift " + std::to_string(tau) + " outside [-s/4, s/4)");
	}
	if (phase < 0 || phase >= d) {
		throw std::invalid_argument("frame phase outside [0, d)");
	}
	const int frames = config.frame_count(k);
	grid.count = phase < frames ? (frames - 1 - phase) / d + 1 : 0;
	grid.first_time = phase * (s / 2) + tau;
	grid.stride = d * (s / 2);
	return grid;
}

std::size_t dict_size(const DictConfig& config) {
	config.validate();
	std::size_t total = 0;
	for (int s : config.scales) {
		total += static_cast<std::size_t>(s / 2) * static_cast<std::size_t>(config.signal_length);
	}
	return total;
}

std::size_t dict_size(const DictConfig& config, const SubdictSpec& sub) {
	config.validate();
	std::size_t total = 0;
	for (int k = 0; k < config.scale_count(); ++k) {
		const ScaleGrid g = scale_grid(config, sub, k);
		total += static_cast<std::size_t>(g.count) * static_cast<std::size_t>(g.freq_count);
	}
	return total;
}

// --- CoefficientTable -------------------------------------------------------

void CoefficientTable::clear() {
	blocks_.clear();
	values_.clear();
}

void CoefficientTable::add_block(int scale_index, int shift, int freq_count, std::vector<int> times) {
	Block block;
	block.scale_index = scale_index;
	block.shift = shift;
	block.freq_count = freq_count;
	block.offset = values_.size();
	block.times = std::move(times);
	values_.resize(values_.size() + block.times.size() * static_cast<std::size_t>(freq_count), 0.0);
	blocks_.push_back(std::move(block));
}

std::span<double> CoefficientTable::frame(std::size_t block, std::size_t frame_index) {
	const Block& b = blocks_[block];
	const auto fc = static_cast<std::size_t>(b.freq_count);
	return std::span<double>(values_).subspan(b.offset + frame_index * fc, fc);
}

AtomParam CoefficientTable::param(std::size_t index) const {
	if (index >= values_.size()) {
		throw std::out_of_range("coefficient index out of range");
	}
	auto it = std::upper_bound(blocks_.begin(), blocks_.end(), index,
	                           [](std::size_t i, const Block& b) { return i < b.offset; });
	const Block& b = *(it - 1);
	const std::size_t local = index - b.offset;
	const auto fc = static_cast<std::size_t>(b.freq_count);
	return AtomParam{b.scale_index, b.times[local / fc], static_cast<int>(local % fc), b.shift};
}

std::optional<std::size_t> CoefficientTable::find(const AtomParam& param) const {
	for (const Block& b : blocks_) {
		if (b.scale_index != param.scale_index) {
			continue;
		}
		if (param.freq < 0 || param.freq >= b.freq_count) {
			return std::nullopt;
		}
		auto it = std::lower_bound(b.times.begin(), b.times.end(), param.time);
		if (it == b.times.end() || *it != param.time) {
			return std::nullopt;
		}
		const auto frame = static_cast<std::size_t>(it - b.times.begin());
		return b.offset + frame * static_cast<std::size_t>(b.freq_count) + static_cast<std::size_t>(param.freq);
	}
	return std::nullopt;
}

std::vector<double> AtomSegment::dense(std::size_t length) const {
	std::vector<double> out(length, 0.0);
	for (std::size_t j = 0; j < values.size(); ++j) {
		out[static_cast<std::size_t>(start) + j] = values[j];
	}
	return out;
}

// --- waveforms --------------------------------------------------------------

std::vector<double> window_samples(Window window, int length) {
	std::vector<double> w(static_cast<std::size_t>(length));
	const double s = length;
	for (int j = 0; j < length; ++j) {
		const double x = j + 0.5;
		switch (window) {
		case Window::Hann: {
			const double v = std::sin(std::numbers::pi * x / s);
			w[static_cast<std::size_t>(j)] = v * v;
			break;
		}
		case Window::Sine:
			w[static_cast<std::size_t>(j)] = std::sin(std::numbers::pi * x / s);
			break;
		case Window::Gaussian: {
			// standard deviation s/6
			const double z = (x - s / 2.0) / (s / 6.0);
			w[static_cast<std::size_t>(j)] = std::exp(-0.5 * z * z);
			break;
		}
		}
	}
	return w;
}

namespace {

// Modulation of sample j (0 <= j < s) of an atom with bin xi. Arguments are
// reduced with integer arithmetic so that a time shift of the atom reproduces
// the same samples bit for bit.
double modulation(Family family, int s, int j, int xi) {
	if (family == Family::Gabor) {
		const long long m = s;
		long long a = (static_cast<long long>(xi) * (j - s / 2)) % m;
		if (a < 0) a += m;
		return std::cos(2.0 * std::numbers::pi * static_cast<double>(a) / s);
	}
	// cos(pi (2j + 1 + s/2)(2 xi + 1) / (2 s))
	const long long period = 4LL * s;
	const long long a = (static_cast<long long>(2 * j + 1 + s / 2) * (2 * xi + 1)) % period;
	return std::cos(std::numbers::pi * static_cast<double>(a) / (2.0 * s));
}

struct Support {
	int start;  // first sample of the untruncated frame
	int lo;     // first valid frame offset
	int hi;     // one past the last valid frame offset
};

Support frame_support(int centre, int s, int n) {
	const int start = centre - s / 2;
	return Support{start, std::max(0, -start), std::min(s, n - start)};
}

bool in_full_range(const DictConfig& config, const AtomParam& p) {
	if (p.scale_index < 0 || p.scale_index >= config.scale_count()) return false;
	const int s = config.scales[static_cast<std::size_t>(p.scale_index)];
	return p.time >= -s / 4 && p.time < config.signal_length - s / 4 && p.freq >= 0 && p.freq < s / 2;
}

AtomSegment make_segment(const DictConfig& config, std::span<const double> window, const AtomParam& p) {
	if (p.scale_index < 0 || p.scale_index >= config.scale_count()) {
		throw std::invalid_argument("atom scale index out of range");
	}
	const int s = config.scales[static_cast<std::size_t>(p.scale_index)];
	const Support sup = frame_support(p.time, s, config.signal_length);
	if (sup.hi <= sup.lo) {
		throw std::invalid_argument("atom support is empty after boundary truncation");
	}
	if (!in_full_range(config, p)) {
		throw std::invalid_argument("atom parameter outside the dictionary");
	}
	AtomSegment seg;
	seg.start = sup.start + sup.lo;
	seg.values.resize(static_cast<std::size_t>(sup.hi - sup.lo));
	double norm2 = 0.0;
	for (int j = sup.lo; j < sup.hi; ++j) {
		const double v = window[static_cast<std::size_t>(j)] * modulation(config.family, s, j, p.freq);
		seg.values[static_cast<std::size_t>(j - sup.lo)] = v;
		norm2 += v * v;
	}
	const double inv = 1.0 / std::sqrt(norm2);
	for (double& v : seg.values) {
		v *= inv;
	}
	return seg;
}

std::vector<double> scale_window(const DictConfig& config, int s) {
	return window_samples(config.family == Family::Mdct ? Window::Sine : config.window, s);
}

}  // namespace

std::vector<double> gabor_atom(const AtomParam& param, const DictConfig& config) {
	config.validate();
	if (config.family != Family::Gabor) {
		throw std::invalid_argument("gabor_atom requires a Gabor dictionary");
	}
	if (!in_full_range(config, param)) {
		throw std::invalid_argument("atom parameter outside the dictionary");
	}
	const int s = config.scales[static_cast<std::size_t>(param.scale_index)];
	return make_segment(config, scale_window(config, s), param).dense(static_cast<std::size_t>(config.signal_length));
}

std::vector<double> mdct_atom(const AtomParam& param, const DictConfig& config) {
	config.validate();
	if (config.family != Family::Mdct) {
		throw std::invalid_argument("mdct_atom requires an MDCT dictionary");
	}
	if (!in_full_range(config, param)) {
		throw std::invalid_argument("atom parameter outside the dictionary");
	}
	const int s = config.scales[static_cast<std::size_t>(param.scale_index)];
	return make_segment(config, scale_window(config, s), param).dense(static_cast<std::size_t>(config.signal_length));
}

// --- TimeFrequencyDictionary ------------------------------------------------

struct TimeFrequencyDictionary::Scale {
	int length = 0;
	std::vector<double> window;
	std::vector<double> full_norms;
	// MDCT only: pre-FFT twiddle e^{-i pi j / s}, post-FFT twiddle
	// e^{-i pi n0 (2k+1) / s} and the norm twiddle e^{-2 i pi n0 (2k+1) / s},
	// with n0 = 1/2 + s/4.
	std::vector<cplx> pre;
	std::vector<cplx> post;
	std::vector<cplx> norm_twiddle;
	std::unique_ptr<ComplexFft> fft;
};

namespace {

// Squared norms of the atoms of one frame restricted to frame offsets [lo, hi),
// computed from the DFT of the masked squared window.
void truncated_norms(Family family, int s, std::span<const double> window, int lo, int hi, const ComplexFft& fft,
                     std::span<const cplx> norm_twiddle, FftBuffer& in, FftBuffer& out, std::span<double> norms) {
	double total = 0.0;
	for (int j = 0; j < s; ++j) {
		const double v = (j >= lo && j < hi) ? window[static_cast<std::size_t>(j)] * window[static_cast<std::size_t>(j)] : 0.0;
		in[static_cast<std::size_t>(j)] = v;
		total += v;
	}
	fft.execute(in, out);
	const int fc = s / 2;
	for (int k = 0; k < fc; ++k) {
		double c2;
		if (family == Family::Gabor) {
			c2 = out[static_cast<std::size_t>(2 * k)].real();
		} else {
			c2 = (norm_twiddle[static_cast<std::size_t>(k)] * out[static_cast<std::size_t>(2 * k + 1)]).real();
		}
		norms[static_cast<std::size_t>(k)] = std::sqrt(std::max(0.5 * total + 0.5 * c2, 0.0));
	}
}

}  // namespace

TimeFrequencyDictionary::TimeFrequencyDictionary(DictConfig config) : config_(std::move(config)) {
	config_.validate();
	for (int s : config_.scales) {
		auto scale = std::make_unique<Scale>();
		scale->length = s;
		scale->window = scale_window(config_, s);
		scale->fft = std::make_unique<ComplexFft>(static_cast<std::size_t>(s), FFTW_FORWARD);
		const int fc = s / 2;
		if (config_.family == Family::Mdct) {
			scale->pre.resize(static_cast<std::size_t>(s));
			for (int j = 0; j < s; ++j) {
				scale->pre[static_cast<std::size_t>(j)] = std::polar(1.0, -std::numbers::pi * j / s);
			}
			scale->post.resize(static_cast<std::size_t>(fc));
			scale->norm_twiddle.resize(static_cast<std::size_t>(fc));
			for (int k = 0; k < fc; ++k) {
				const long long a = (static_cast<long long>(1 + fc) * (2 * k + 1)) % (4LL * s);
				scale->post[static_cast<std::size_t>(k)] = std::polar(1.0, -std::numbers::pi * static_cast<double>(a) / (2.0 * s));
				const long long b = (static_cast<long long>(1 + fc) * (2 * k + 1)) % (2LL * s);
				scale->norm_twiddle[static_cast<std::size_t>(k)] = std::polar(1.0, -std::numbers::pi * static_cast<double>(b) / s);
			}
		}
		scale->full_norms.resize(static_cast<std::size_t>(fc));
		FftBuffer in(static_cast<std::size_t>(s)), out(static_cast<std::size_t>(s));
		truncated_norms(config_.family, s, scale->window, 0, s, *scale->fft, scale->norm_twiddle, in, out, scale->full_norms);
		scales_.push_back(std::move(scale));
	}
}

TimeFrequencyDictionary::~TimeFrequencyDictionary() = default;
TimeFrequencyDictionary::TimeFrequencyDictionary(TimeFrequencyDictionary&&) noexcept = default;
TimeFrequencyDictionary& TimeFrequencyDictionary::operator=(TimeFrequencyDictionary&&) noexcept = default;

void TimeFrequencyDictionary::layout(const SubdictSpec& sub, CoefficientTable& table) const {
	table.clear();
	for (int k = 0; k < config_.scale_count(); ++k) {
		const ScaleGrid g = scale_grid(config_, sub, k);
		std::vector<int> times(static_cast<std::size_t>(g.count));
		for (int j = 0; j < g.count; ++j) {
			times[static_cast<std::size_t>(j)] = g.first_time + j * g.stride;
		}
		const int shift = (sub.full || sub.shifts.empty()) ? 0 : sub.shifts[static_cast<std::size_t>(k)];
		table.add_block(k, shift, g.freq_count, std::move(times));
	}
}

namespace {

struct FrameWork {
	explicit FrameWork(std::size_t s) : in(s), out(s), norm_in(s), norm_out(s), norms(s / 2) {}
	FftBuffer in, out, norm_in, norm_out;
	std::vector<double> norms;
};

thread_local std::vector<std::unique_ptr<FrameWork>> tls_work;

FrameWork& frame_work(std::size_t s) {
	for (auto& w : tls_work) {
		if (w->in.size() == s) return *w;
	}
	tls_work.push_back(std::make_unique<FrameWork>(s));
	return *tls_work.back();
}

}  // namespace

void TimeFrequencyDictionary::project_frame(std::span<const double> residual, const Scale& scale, int centre,
                                            std::span<double> out) const {
	const int s = scale.length;
	const int n = config_.signal_length;
	const Support sup = frame_support(centre, s, n);
	FrameWork& work = frame_work(static_cast<std::size_t>(s));
	const bool mdct = config_.family == Family::Mdct;

	for (int j = 0; j < s; ++j) {
		double v = 0.0;
		if (j >= sup.lo && j < sup.hi) {
			v = residual[static_cast<std::size_t>(sup.start + j)] * scale.window[static_cast<std::size_t>(j)];
		}
		work.in[static_cast<std::size_t>(j)] = mdct ? v * scale.pre[static_cast<std::size_t>(j)] : cplx(v, 0.0);
	}
	scale.fft->execute(work.in, work.out);

	std::span<const double> norms = scale.full_norms;
	if (sup.lo != 0 || sup.hi != s) {
		truncated_norms(config_.family, s, scale.window, sup.lo, sup.hi, *scale.fft, scale.norm_twiddle, work.norm_in,
		                work.norm_out, work.norms);
		norms = work.norms;
	}

	const int fc = s / 2;
	for (int k = 0; k < fc; ++k) {
		double c;
		if (mdct) {
			c = (scale.post[static_cast<std::size_t>(k)] * work.out[static_cast<std::size_t>(k)]).real();
		} else {
			c = work.out[static_cast<std::size_t>(k)].real();
			if (k & 1) c = -c;
		}
		out[static_cast<std::size_t>(k)] = c / norms[static_cast<std::size_t>(k)];
	}
}

void TimeFrequencyDictionary::project(std::span<const double> residual, CoefficientTable& table) const {
	if (residual.size() != signal_length()) {
		throw std::invalid_argument("project: residual length does not match the dictionary");
	}
	const auto& blocks = table.blocks();
	for (std::size_t b = 0; b < blocks.size(); ++b) {
		const Scale& scale = *scales_[static_cast<std::size_t>(blocks[b].scale_index)];
		for (std::size_t f = 0; f < blocks[b].times.size(); ++f) {
			project_frame(residual, scale, blocks[b].times[f], table.frame(b, f));
		}
	}
}

void TimeFrequencyDictionary::update(std::span<const double> residual, int lo, int hi, CoefficientTable& table) const {
	if (residual.size() != signal_length()) {
		throw std::invalid_argument("update: residual length does not match the dictionary");
	}
	const auto& blocks = table.blocks();
	for (std::size_t b = 0; b < blocks.size(); ++b) {
		const Scale& scale = *scales_[static_cast<std::size_t>(blocks[b].scale_index)];
		const int half = scale.length / 2;
		// support [u - half, u + half) meets [lo, hi) iff lo - half < u < hi + half
		const auto& times = blocks[b].times;
		auto first = std::upper_bound(times.begin(), times.end(), lo - half);
		auto last = std::lower_bound(first, times.end(), hi + half);
		for (auto it = first; it != last; ++it) {
			const auto f = static_cast<std::size_t>(it - times.begin());
			project_frame(residual, scale, *it, table.frame(b, f));
		}
	}
}

bool TimeFrequencyDictionary::contains(const AtomParam& param) const {
	return in_full_range(config_, param);
}

AtomSegment TimeFrequencyDictionary::atom(const AtomParam& param) const {
	if (param.scale_index < 0 || param.scale_index >= config_.scale_count()) {
		throw std::invalid_argument("atom scale index out of range");
	}
	return make_segment(config_, scales_[static_cast<std::size_t>(param.scale_index)]->window, param);
}

double TimeFrequencyDictionary::correlate(std::span<const double> residual, const AtomParam& param) const {
	const AtomSegment seg = atom(param);
	double sum = 0.0;
	for (std::size_t j = 0; j < seg.values.size(); ++j) {
		sum += residual[static_cast<std::size_t>(seg.start) + j] * seg.values[j];
	}
	return sum;
}

AtomParam TimeFrequencyDictionary::refine_time(const AtomParam& param, std::span<const double> residual,
                                               int radius) const {
	if (!contains(param)) {
		throw std::invalid_argument("refine_time: atom outside the dictionary");
	}
	if (residual.size() != signal_length()) {
		throw std::invalid_argument("refine_time: residual length does not match the dictionary");
	}
	const Scale& scale = *scales_[static_cast<std::size_t>(param.scale_index)];
	const int s = scale.length;
	const int n = config_.signal_length;
	const int cmin = std::max(param.time - radius, -s / 4);
	const int cmax = std::min(param.time + radius, n - s / 4 - 1);
	const int count = cmax - cmin + 1;

	std::vector<double> tmpl(static_cast<std::size_t>(s));
	std::vector<double> prefix(static_cast<std::size_t>(s) + 1, 0.0);
	for (int j = 0; j < s; ++j) {
		const double v = scale.window[static_cast<std::size_t>(j)] * modulation(config_.family, s, j, param.freq);
		tmpl[static_cast<std::size_t>(j)] = v;
		prefix[static_cast<std::size_t>(j) + 1] = prefix[static_cast<std::size_t>(j)] + v * v;
	}

	const int base = cmin - s / 2;
	const int seg_len = count - 1 + s;
	auto sample = [&](int t) { return (t >= 0 && t < n) ? residual[static_cast<std::size_t>(t)] : 0.0; };

	std::vector<double> numer(static_cast<std::size_t>(count));
	if (static_cast<long long>(count) * s <= (1LL << 16)) {
		for (int c = 0; c < count; ++c) {
			double sum = 0.0;
			for (int j = 0; j < s; ++j) {
				sum += sample(base + c + j) * tmpl[static_cast<std::size_t>(j)];
			}
			numer[static_cast<std::size_t>(c)] = sum;
		}
	} else {
		std::size_t size = 1;
		while (size < static_cast<std::size_t>(seg_len)) size <<= 1;
		const ComplexFft forward(size, FFTW_FORWARD);
		const ComplexFft backward(size, FFTW_BACKWARD);
		FftBuffer a(size), b(size), fa(size), fb(size);
		for (std::size_t i = 0; i < size; ++i) {
			a[i] = i < static_cast<std::size_t>(seg_len) ? sample(base + static_cast<int>(i)) : 0.0;
			b[i] = i < static_cast<std::size_t>(s) ? tmpl[i] : 0.0;
		}
		forward.execute(a, fa);
		forward.execute(b, fb);
		for (std::size_t i = 0; i < size; ++i) {
			fa[i] *= std::conj(fb[i]);
		}
		backward.execute(fa, a);
		for (int c = 0; c < count; ++c) {
			numer[static_cast<std::size_t>(c)] = a[static_cast<std::size_t>(c)].real() / static_cast<double>(size);
		}
	}

	int best = param.time;
	double best_score = -1.0;
	for (int c = 0; c < count; ++c) {
		const int centre = cmin + c;
		const Support sup = frame_support(centre, s, n);
		const double norm2 = prefix[static_cast<std::size_t>(sup.hi)] - prefix[static_cast<std::size_t>(sup.lo)];
		const double score = std::abs(numer[static_cast<std::size_t>(c)]) / std::sqrt(norm2);
		const bool better = score > best_score ||
		                    (score == best_score && std::abs(centre - param.time) < std::abs(best - param.time));
		if (better) {
			best_score = score;
			best = centre;
		}
	}

	AtomParam refined = param;
	refined.time = best;
	if (best != param.time && std::abs(correlate(residual, param)) >= std::abs(correlate(residual, refined))) {
		return param;
	}
	return refined;
}

CoefficientTable project(std::span<const double> residual, const DictConfig& config, const SubdictSpec& sub) {
	const TimeFrequencyDictionary dict(config);
	CoefficientTable table;
	dict.layout(sub, table);
	dict.project(residual, table);
	return table;
}

}  // namespace rss
