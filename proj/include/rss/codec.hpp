#ifndef RSS_CODEC_HPP
#define RSS_CODEC_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rss/dictionary.hpp"
#include "rss/pursuit.hpp"
#include "rss/sequence.hpp"
#include "rss/signal.hpp"

namespace rss {

class DecodeError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Uniform mid-tread quantizer with 2^B - 1 levels spanning [-alpha_max, alpha_max].
struct QuantizerSpec {
	int bits = 8;
	double alpha_max = 0.0;

	void validate() const;
	/// 2 alpha_max / (2^B - 1); zero when alpha_max is zero.
	double step() const;
	/// Largest symbol magnitude, 2^(B-1) - 1.
	std::int32_t max_symbol() const;
};

/// Rounds alpha/step half away from zero and clamps to +/- max_symbol.
/// `clamped` is set when |alpha| > alpha_max.
std::int32_t quantize(double alpha, const QuantizerSpec& q, bool* clamped = nullptr);
double dequantize(std::int32_t symbol, const QuantizerSpec& q);

/// MSB-first bit packing.
class BitWriter {
public:
	void write(std::uint64_t value, int bits);
	void write_bytes(std::span<const std::uint8_t> bytes);
	void align();
	std::size_t bit_count() const { return bits_; }
	std::vector<std::uint8_t>& bytes() { return bytes_; }
	const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
	std::vector<std::uint8_t> bytes_;
	std::size_t bits_ = 0;
};

class BitReader {
public:
	explicit BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_offset = 0);
	/// Throws DecodeError past the end.
	std::uint64_t read(int bits);
	bool read_bit() { return read(1) != 0; }
	std::size_t position() const { return pos_; }
	std::size_t remaining() const { return bytes_.size() * 8 - pos_; }

private:
	std::span<const std::uint8_t> bytes_;
	std::size_t pos_;
};

/// Canonical Huffman code over integer symbols. Codes are assigned in
/// (length, symbol) order; lengths are limited to kMaxLength bits.
class HuffmanCode {
public:
	static constexpr int kMaxLength = 32;

	struct Entry {
		std::int32_t symbol;
		int length;
		std::uint32_t code;
	};

	/// Optimal code for the symbol frequencies in `symbols`. A single distinct
	/// symbol gets a 1-bit code.
	static HuffmanCode build(std::span<const std::int32_t> symbols);
	/// Rebuilds from (symbol, length) pairs; throws DecodeError when the
	/// lengths violate the Kraft inequality or symbols repeat.
	static HuffmanCode from_lengths(std::vector<std::pair<std::int32_t, int>> lengths);

	bool empty() const { return entries_.empty(); }
	/// Entries in ascending symbol order.
	const std::vector<Entry>& entries() const { return by_symbol_; }
	int length(std::int32_t symbol) const;
	void encode(BitWriter& out, std::int32_t symbol) const;
	std::int32_t decode(BitReader& in) const;

private:
	void assign_codes();
	const Entry& find(std::int32_t symbol) const;

	std::vector<Entry> entries_;  // canonical order
	std::vector<Entry> by_symbol_;
	std::vector<std::uint32_t> first_code_;
	std::vector<std::size_t> first_index_;
	std::vector<std::size_t> count_;
};

struct CodecConfig {
	DictConfig dict;
	SequenceSpec sequence;
	int weight_bits = 8;
	int sample_rate = 32000;
};

struct BitstreamHeader {
	std::uint8_t version = 1;
	Variant variant = Variant::MP;
	DictConfig dict;
	SequenceSpec sequence;
	QuantizerSpec quantizer;
	std::uint32_t signal_length = 0;
	std::uint32_t sample_rate = 0;
	std::uint32_t atom_count = 0;
	double reference_energy = 0.0;
};

struct CostBreakdown {
	std::size_t header_bits = 0;
	std::size_t index_bits = 0;
	std::size_t shift_bits = 0;
	std::size_t weight_bits = 0;
	std::size_t padding_bits = 0;

	std::size_t total_bits() const { return header_bits + index_bits + shift_bits + weight_bits + padding_bits; }
};

struct EncodeResult {
	std::vector<std::uint8_t> bytes;
	CostBreakdown cost;
	std::vector<std::int32_t> symbols;
	/// Weights with |alpha| above the anchor; zero unless the anchor is overridden.
	std::size_t clamp_count = 0;
	/// Dequantized reconstruction, summed in iteration order.
	std::vector<double> reconstruction;
	/// srr(reference, reconstruction) when a reference was given, else NaN.
	double snr_db = 0.0;
};

struct DecodedEntry {
	AtomParam param;
	std::uint64_t index = 0;
	int local_shift = 0;
	std::int32_t symbol = 0;
	double weight = 0.0;
};

struct DecodedStream {
	BitstreamHeader header;
	std::vector<DecodedEntry> entries;
	std::vector<double> samples;

	Signal signal() const;
};

/// Fixed-length index width for a subdictionary of L atoms, ceil(log2 L).
int index_bits(std::size_t subdict_size);
/// Width of the LoMP time refinement field for scale s, ceil(log2(s/2 + 1)).
int local_shift_bits(int scale);

/// Serializes an approximant produced with `config.dict` and
/// `config.sequence`. The quantizer anchor is the largest |weight| unless
/// `alpha_max` is given.
EncodeResult encode(const Approximant& approx, const CodecConfig& config, std::span<const double> reference = {},
                    std::optional<double> alpha_max = std::nullopt);

/// Re-encodes a decoded stream with its own quantizer; the output equals the
/// bytes it was decoded from.
std::vector<std::uint8_t> encode(const DecodedStream& stream);

DecodedStream decode(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

struct RatePoint {
	double target_srr_db;
	std::size_t atoms;
	std::size_t bits;
	double snr_db;
};

/// First point has zero atoms (header-only stream, SNR -inf); then one point
/// per target in increasing order.
std::vector<RatePoint> rate_distortion_curve(const Signal& f, const PursuitConfig& pursuit, int weight_bits,
                                             std::span<const double> srr_targets);

}  // namespace rss

#endif  // RSS_CODEC_HPP
