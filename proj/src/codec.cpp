#include "rss/codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace rss {

// --- quantizer --------------------------------------------------------------

void QuantizerSpec::validate() const {
	if (bits < 2 || bits > 24) {
		throw std::invalid_argument("quantizer bits must be in [2, 24]");
	}
	if (!(alpha_max >= 0.0) || !std::isfinite(alpha_max)) {
		throw std::invalid_argument("quantizer anchor must be finite and nonnegative");
	}
}

double QuantizerSpec::step() const {
	return 2.0 * alpha_max / static_cast<double>((std::int64_t{1} << bits) - 1);
}

std::int32_t QuantizerSpec::max_symbol() const {
	return static_cast<std::int32_t>((std::int64_t{1} << (bits - 1)) - 1);
}

std::int32_t quantize(double alpha, const QuantizerSpec& q, bool* clamped) {
	if (!std::isfinite(alpha)) {
		throw std::invalid_argument("cannot quantize a non-finite weight");
	}
	if (clamped) {
		*clamped = std::abs(alpha) > q.alpha_max;
	}
	const double step = q.step();
	if (step == 0.0) {
		return 0;
	}
	const double r = std::round(alpha / step);  // half away from zero
	const double m = q.max_symbol();
	return static_cast<std::int32_t>(std::clamp(r, -m, m));
}

double dequantize(std::int32_t symbol, const QuantizerSpec& q) {
	return symbol * q.step();
}

int index_bits(std::size_t subdict_size) {
	if (subdict_size <= 1) {
		return 0;
	}
	return std::bit_width(static_cast<std::uint64_t>(subdict_size - 1));
}

int local_shift_bits(int scale) {
	return std::bit_width(static_cast<unsigned>(scale / 2));
}

// --- layout helpers ---------------------------------------------------------

namespace {

constexpr std::uint8_t kMagic[4] = {'R', 'S', 'S', 'P'};
constexpr std::uint8_t kVersion = 1;

AtomParam param_at(const DictConfig& config, const SubdictSpec& sub, std::uint64_t index) {
	for (int k = 0; k < config.scale_count(); ++k) {
		const ScaleGrid g = scale_grid(config, sub, k);
		const std::uint64_t n = static_cast<std::uint64_t>(g.count) * static_cast<std::uint64_t>(g.freq_count);
		if (index < n) {
			const auto fc = static_cast<std::uint64_t>(g.freq_count);
			AtomParam p;
			p.scale_index = k;
			p.time = g.first_time + static_cast<int>(index / fc) * g.stride;
			p.freq = static_cast<int>(index % fc);
			p.shift = (sub.full || sub.shifts.empty()) ? 0 : sub.shifts[static_cast<std::size_t>(k)];
			return p;
		}
		index -= n;
	}
	throw std::out_of_range("atom index outside the subdictionary");
}

void put_le(BitWriter& w, std::uint64_t v, int bytes) {
	for (int i = 0; i < bytes; ++i) {
		w.write((v >> (8 * i)) & 0xFFU, 8);
	}
}

std::uint64_t get_le(BitReader& r, int bytes) {
	std::uint64_t v = 0;
	for (int i = 0; i < bytes; ++i) {
		v |= r.read(8) << (8 * i);
	}
	return v;
}

void put_f64(BitWriter& w, double x) {
	put_le(w, std::bit_cast<std::uint64_t>(x), 8);
}

double get_f64(BitReader& r) {
	return std::bit_cast<double>(get_le(r, 8));
}

void put_varint(BitWriter& w, std::uint64_t v) {
	while (v >= 0x80) {
		w.write((v & 0x7FU) | 0x80U, 8);
		v >>= 7;
	}
	w.write(v, 8);
}

std::uint64_t get_varint(BitReader& r) {
	std::uint64_t v = 0;
	for (int shift = 0; shift < 64; shift += 7) {
		const std::uint64_t byte = r.read(8);
		v |= (byte & 0x7FU) << shift;
		if ((byte & 0x80U) == 0) {
			return v;
		}
	}
	throw DecodeError("varint too long");
}

std::uint64_t zigzag(std::int64_t v) {
	return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

std::int64_t unzigzag(std::uint64_t v) {
	return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1U);
}

struct Record {
	std::uint64_t index;
	int index_width;
	int shift_value;  // local shift + s/4, LoMP only
	int shift_width;
	std::int32_t symbol;
};

void write_header(BitWriter& w, const BitstreamHeader& h, const HuffmanCode& code) {
	w.write_bytes(kMagic);
	put_le(w, h.version, 1);
	put_le(w, static_cast<std::uint8_t>(h.variant), 1);
	const std::string text = h.dict.to_text();
	if (text.size() > 0xFFFF) {
		throw std::invalid_argument("dictionary description too long");
	}
	put_le(w, text.size(), 2);
	w.write_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
	put_le(w, static_cast<std::uint8_t>(h.sequence.kind), 1);
	put_le(w, h.sequence.seed, 8);
	put_le(w, h.sequence.refresh, 2);
	put_le(w, h.sequence.subsample, 2);
	put_le(w, static_cast<std::uint64_t>(h.quantizer.bits), 1);
	put_f64(w, h.quantizer.alpha_max);
	put_le(w, h.signal_length, 4);
	put_le(w, h.sample_rate, 4);
	put_le(w, h.atom_count, 4);
	put_f64(w, h.reference_energy);
	const auto& entries = code.entries();
	put_le(w, entries.size(), 4);
	std::int64_t prev = 0;
	for (const auto& e : entries) {
		put_varint(w, zigzag(static_cast<std::int64_t>(e.symbol) - prev));
		prev = e.symbol;
	}
	for (const auto& e : entries) {
		put_le(w, static_cast<std::uint64_t>(e.length), 1);
	}
}

std::vector<std::uint8_t> serialize(const BitstreamHeader& header, const std::vector<Record>& records,
                                    CostBreakdown& cost) {
	std::vector<std::int32_t> symbols;
	symbols.reserve(records.size());
	for (const auto& r : records) {
		symbols.push_back(r.symbol);
	}
	const HuffmanCode code = HuffmanCode::build(symbols);
	BitWriter w;
	write_header(w, header, code);
	cost = CostBreakdown{};
	cost.header_bits = w.bit_count();
	for (const auto& r : records) {
		w.write(r.index, r.index_width);
		cost.index_bits += static_cast<std::size_t>(r.index_width);
		if (r.shift_width > 0) {
			w.write(static_cast<std::uint64_t>(r.shift_value), r.shift_width);
			cost.shift_bits += static_cast<std::size_t>(r.shift_width);
		}
		const std::size_t before = w.bit_count();
		code.encode(w, r.symbol);
		cost.weight_bits += w.bit_count() - before;
	}
	const std::size_t used = w.bit_count();
	w.align();
	cost.padding_bits = w.bit_count() - used;
	return std::move(w.bytes());
}

std::vector<double> synthesize(const BitstreamHeader& h, const std::vector<DecodedEntry>& entries) {
	const TimeFrequencySource source(h.dict, h.sequence, false);
	std::vector<ApproximantEntry> atoms(entries.size());
	for (std::size_t i = 0; i < entries.size(); ++i) {
		atoms[i].param = entries[i].param;
		atoms[i].weight = entries[i].weight;
		atoms[i].iteration = i;
	}
	return reconstruct(source, atoms);
}

}  // namespace

Signal DecodedStream::signal() const {
	return Signal(samples, static_cast<int>(header.sample_rate));
}

EncodeResult encode(const Approximant& approx, const CodecConfig& config, std::span<const double> reference,
                    std::optional<double> alpha_max) {
	config.dict.validate();
	config.sequence.validate();
	if (approx.entries.size() > 0xFFFFFFFFULL) {
		throw std::invalid_argument("too many atoms for one bitstream");
	}
	if (!reference.empty() && reference.size() != static_cast<std::size_t>(config.dict.signal_length)) {
		throw std::invalid_argument("reference length does not match the dictionary");
	}

	BitstreamHeader header;
	header.version = kVersion;
	header.variant = approx.variant;
	header.dict = config.dict;
	header.sequence = config.sequence;
	header.quantizer.bits = config.weight_bits;
	double anchor = 0.0;
	for (const auto& e : approx.entries) {
		anchor = std::max(anchor, std::abs(e.weight));
	}
	header.quantizer.alpha_max = alpha_max.value_or(anchor);
	header.quantizer.validate();
	header.signal_length = static_cast<std::uint32_t>(config.dict.signal_length);
	header.sample_rate = static_cast<std::uint32_t>(config.sample_rate);
	header.atom_count = static_cast<std::uint32_t>(approx.entries.size());
	header.reference_energy = approx.reference_energy;

	EncodeResult result;
	std::vector<Record> records;
	std::vector<DecodedEntry> decoded;
	records.reserve(approx.entries.size());
	decoded.reserve(approx.entries.size());
	const bool lomp = approx.variant == Variant::LoMP;
	for (std::size_t i = 0; i < approx.entries.size(); ++i) {
		const ApproximantEntry& e = approx.entries[i];
		if (e.iteration != i) {
			throw std::invalid_argument("approximant entries must follow iteration order");
		}
		const SubdictSpec sub = subdict_at(config.sequence, config.dict, i);
		const std::size_t L = dict_size(config.dict, sub);
		if (e.index >= L) {
			throw std::invalid_argument("atom index outside its subdictionary");
		}
		AtomParam expected = param_at(config.dict, sub, e.index);
		const int s = config.dict.scales[static_cast<std::size_t>(expected.scale_index)];
		if (lomp) {
			if (e.local_shift < -s / 4 || e.local_shift > s / 4) {
				throw std::invalid_argument("local shift outside [-s/4, s/4]");
			}
			expected.time += e.local_shift;
		} else if (e.local_shift != 0) {
			throw std::invalid_argument("local shift is only coded for LoMP");
		}
		if (!(expected == e.param)) {
			throw std::invalid_argument("approximant was not produced with this dictionary sequence");
		}
		bool clamped = false;
		const std::int32_t symbol = quantize(e.weight, header.quantizer, &clamped);
		result.clamp_count += clamped ? 1 : 0;
		result.symbols.push_back(symbol);
		records.push_back(Record{e.index, index_bits(L), e.local_shift + s / 4, lomp ? local_shift_bits(s) : 0, symbol});
		decoded.push_back(DecodedEntry{e.param, e.index, e.local_shift, symbol, dequantize(symbol, header.quantizer)});
	}
	result.bytes = serialize(header, records, result.cost);
	result.reconstruction = synthesize(header, decoded);
	result.snr_db = reference.empty() ? std::numeric_limits<double>::quiet_NaN()
	                                  : srr(reference, result.reconstruction);
	return result;
}

std::vector<std::uint8_t> encode(const DecodedStream& stream) {
	const auto& h = stream.header;
	const bool lomp = h.variant == Variant::LoMP;
	std::vector<Record> records;
	for (std::size_t i = 0; i < stream.entries.size(); ++i) {
		const auto& e = stream.entries[i];
		const SubdictSpec sub = subdict_at(h.sequence, h.dict, i);
		const int s = h.dict.scales.at(static_cast<std::size_t>(e.param.scale_index));
		records.push_back(Record{e.index, index_bits(dict_size(h.dict, sub)), e.local_shift + s / 4,
		                         lomp ? local_shift_bits(s) : 0, e.symbol});
	}
	CostBreakdown cost;
	return serialize(h, records, cost);
}

DecodedStream decode(std::span<const std::uint8_t> bytes) {
	BitReader r(bytes);
	for (const auto m : kMagic) {
		if (r.read(8) != m) {
			throw DecodeError("bad magic");
		}
	}
	DecodedStream out;
	BitstreamHeader& h = out.header;
	h.version = static_cast<std::uint8_t>(r.read(8));
	if (h.version != kVersion) {
		throw DecodeError("unsupported bitstream version " + std::to_string(h.version));
	}
	const auto variant = r.read(8);
	if (variant > 2) {
		throw DecodeError("unknown pursuit variant");
	}
	h.variant = static_cast<Variant>(variant);
	const auto text_len = static_cast<std::size_t>(get_le(r, 2));
	std::string text(text_len, '\0');
	for (auto& c : text) {
		c = static_cast<char>(r.read(8));
	}
	try {
		h.dict = DictConfig::from_text(text);
		h.dict.validate();
	} catch (const std::exception& e) {
		throw DecodeError(std::string("bad dictionary description: ") + e.what());
	}
	const auto kind = r.read(8);
	if (kind > 3) {
		throw DecodeError("unknown sequence kind");
	}
	h.sequence.kind = static_cast<SequenceKind>(kind);
	h.sequence.seed = get_le(r, 8);
	h.sequence.refresh = static_cast<std::uint32_t>(get_le(r, 2));
	h.sequence.subsample = static_cast<std::uint32_t>(get_le(r, 2));
	h.quantizer.bits = static_cast<int>(r.read(8));
	h.quantizer.alpha_max = get_f64(r);
	try {
		h.sequence.validate();
		h.quantizer.validate();
	} catch (const std::exception& e) {
		throw DecodeError(std::string("bad header: ") + e.what());
	}
	h.signal_length = static_cast<std::uint32_t>(get_le(r, 4));
	h.sample_rate = static_cast<std::uint32_t>(get_le(r, 4));
	h.atom_count = static_cast<std::uint32_t>(get_le(r, 4));
	h.reference_energy = get_f64(r);
	if (h.signal_length != static_cast<std::uint32_t>(h.dict.signal_length)) {
		throw DecodeError("signal length disagrees with the dictionary description");
	}
	if (h.sample_rate == 0 || h.sample_rate > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
		throw DecodeError("bad sample rate");
	}
	const auto table_size = get_le(r, 4);
	if (table_size > r.remaining() / 16 + 1 || (h.atom_count > 0) != (table_size > 0)) {
		throw DecodeError("bad Huffman table size");
	}
	std::vector<std::pair<std::int32_t, int>> lengths;
	std::int64_t prev = 0;
	for (std::uint64_t i = 0; i < table_size; ++i) {
		const std::int64_t sym = prev + unzigzag(get_varint(r));
		if (i > 0 && sym <= prev) {
			throw DecodeError("Huffman symbols must be strictly increasing");
		}
		if (std::abs(sym) > h.quantizer.max_symbol()) {
			throw DecodeError("Huffman symbol outside the quantizer range");
		}
		lengths.emplace_back(static_cast<std::int32_t>(sym), 0);
		prev = sym;
	}
	for (auto& [sym, len] : lengths) {
		len = static_cast<int>(r.read(8));
	}
	const HuffmanCode code = HuffmanCode::from_lengths(std::move(lengths));
	if (h.atom_count > r.remaining()) {
		throw DecodeError("truncated payload");
	}

	const bool lomp = h.variant == Variant::LoMP;
	const TimeFrequencyDictionary dict(h.dict);
	out.entries.reserve(h.atom_count);
	for (std::uint32_t i = 0; i < h.atom_count; ++i) {
		const SubdictSpec sub = subdict_at(h.sequence, h.dict, i);
		const std::size_t L = dict_size(h.dict, sub);
		DecodedEntry e;
		e.index = r.read(index_bits(L));
		if (e.index >= L) {
			throw DecodeError("atom index outside its subdictionary");
		}
		e.param = param_at(h.dict, sub, e.index);
		if (lomp) {
			const int s = h.dict.scales[static_cast<std::size_t>(e.param.scale_index)];
			const auto field = static_cast<int>(r.read(local_shift_bits(s)));
			if (field > s / 2) {
				throw DecodeError("local shift out of range");
			}
			e.local_shift = field - s / 4;
			e.param.time += e.local_shift;
			if (!dict.contains(e.param)) {
				throw DecodeError("refined atom outside the dictionary");
			}
		}
		e.symbol = code.decode(r);
		e.weight = dequantize(e.symbol, h.quantizer);
		out.entries.push_back(e);
	}
	if (r.remaining() >= 8) {
		throw DecodeError("trailing bytes after payload");
	}
	if (r.remaining() > 0 && r.read(static_cast<int>(r.remaining())) != 0) {
		throw DecodeError("nonzero padding bits");
	}
	out.samples = synthesize(h, out.entries);
	return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw std::runtime_error("cannot open " + path);
	}
	return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
	std::ofstream out(path, std::ios::binary);
	out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
	if (!out) {
		throw std::runtime_error("cannot write " + path);
	}
}

std::vector<RatePoint> rate_distortion_curve(const Signal& f, const PursuitConfig& pursuit, int weight_bits,
                                             std::span<const double> srr_targets) {
	std::vector<double> targets(srr_targets.begin(), srr_targets.end());
	std::sort(targets.begin(), targets.end());
	const CodecConfig codec{pursuit.dict, pursuit.sequence, weight_bits, f.sample_rate()};

	std::vector<RatePoint> curve;
	Approximant empty;
	empty.variant = pursuit.variant;
	empty.reference_energy = f.energy();
	const auto head = encode(empty, codec, f.samples());
	curve.push_back(RatePoint{kMinusInfinityDb, 0, head.bytes.size() * 8, head.snr_db});
	if (targets.empty()) {
		return curve;
	}

	const auto point = [&](double target, const Approximant& a) {
		const auto enc = encode(a, codec, f.samples());
		curve.push_back(RatePoint{target, a.size(), enc.bytes.size() * 8, enc.snr_db});
	};
	if (pursuit.variant == Variant::OMP) {
		for (const double t : targets) {
			PursuitConfig cfg = pursuit;
			cfg.stop.target_srr_db = t;
			point(t, run(f, cfg));
		}
		return curve;
	}
	// Greedy MP and LoMP runs are prefixes of one another.
	PursuitConfig cfg = pursuit;
	cfg.stop.target_srr_db = targets.back();
	const Approximant full = run(f, cfg);
	for (const double t : targets) {
		point(t, truncated(full, atoms_to_reach(full, t)));
	}
	return curve;
}

}  // namespace rss
