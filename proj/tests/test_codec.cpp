#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <vector>

#include "oracles.hpp"
#include "rss/codec.hpp"
#include "rss/pursuit.hpp"
#include "rss/synthetic.hpp"

using namespace rss;

namespace {

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
	std::uint64_t h = 14695981039346656037ULL;
	for (const std::uint8_t b : bytes) {
		h ^= b;
		h *= 1099511628211ULL;
	}
	return h;
}

// Optimal prefix-code cost by repeated merging of the two lightest weights.
std::uint64_t huffman_cost_oracle(const std::vector<std::int32_t>& symbols) {
	std::map<std::int32_t, std::uint64_t> freq;
	for (const auto s : symbols) ++freq[s];
	if (freq.size() == 1) return symbols.size();
	std::priority_queue<std::uint64_t, std::vector<std::uint64_t>, std::greater<>> heap;
	for (const auto& [s, f] : freq) heap.push(f);
	std::uint64_t cost = 0;
	while (heap.size() > 1) {
		const auto a = heap.top();
		heap.pop();
		const auto b = heap.top();
		heap.pop();
		cost += a + b;
		heap.push(a + b);
	}
	return cost;
}

struct Case {
	PursuitConfig pursuit;
	std::vector<double> signal;
	Approximant approx;
};

Case random_case(std::uint64_t seed) {
	Xoshiro256 rng(seed);
	Case c;
	const std::vector<std::vector<int>> scale_sets{{32, 128, 512}, {16, 64}, {256}, {8, 32, 128, 512}};
	c.pursuit.dict = DictConfig{scale_sets[rng.below(scale_sets.size())], 1024 + 4 * static_cast<int>(rng.below(64)),
	                            Window::Sine, Family::Mdct};
	const Variant variants[] = {Variant::MP, Variant::OMP, Variant::LoMP};
	const SequenceKind kinds[] = {SequenceKind::Fixed, SequenceKind::Random, SequenceKind::Step, SequenceKind::Jump};
	c.pursuit.variant = variants[rng.below(3)];
	c.pursuit.sequence = SequenceSpec{kinds[rng.below(4)], rng.next(), 1 + static_cast<std::uint32_t>(rng.below(3)),
	                                  1 + static_cast<std::uint32_t>(rng.below(4))};
	c.pursuit.stop.max_atoms = 1 + rng.below(60);
	c.pursuit.stop.target_srr_db = 25.0;
	c.signal = oracle::gaussian_vector(static_cast<std::size_t>(c.pursuit.dict.signal_length), rng);
	c.approx = run(Signal(c.signal), c.pursuit);
	return c;
}

CodecConfig codec_config(const PursuitConfig& p, int bits = 8) { return CodecConfig{p.dict, p.sequence, bits, 32000}; }

}  // namespace

TEST_SUITE("codec") {
	TEST_CASE("mid-tread quantizer") {
		const QuantizerSpec q{8, 127.5};
		CHECK(q.step() == 1.0);
		CHECK(q.max_symbol() == 127);
		CHECK(quantize(0.0, q) == 0);
		CHECK(quantize(3.49, q) == 3);
		CHECK(quantize(3.5, q) == 4);
		CHECK(quantize(-3.5, q) == -4);
		CHECK(quantize(-2.5, q) == -3);
		bool clamped = false;
		CHECK(quantize(127.0, q, &clamped) == 127);
		CHECK_FALSE(clamped);
		CHECK(quantize(-400.0, q, &clamped) == -127);
		CHECK(clamped);
		CHECK(dequantize(-5, q) == -5.0);
		CHECK(QuantizerSpec{8, 0.0}.step() == 0.0);
		CHECK_THROWS_AS(QuantizerSpec(QuantizerSpec{1, 1.0}).validate(), std::invalid_argument);
		CHECK_THROWS_AS(QuantizerSpec(QuantizerSpec{25, 1.0}).validate(), std::invalid_argument);
	}

	TEST_CASE("quantization error stays within half a step") {
		Xoshiro256 rng(5);
		for (int bits = 2; bits <= 24; bits += 3) {
			const QuantizerSpec q{bits, 2.0 + rng.uniform()};
			for (int i = 0; i < 10000; ++i) {
				const double alpha = (2.0 * rng.uniform() - 1.0) * q.alpha_max;
				const auto s = quantize(alpha, q);
				REQUIRE(std::abs(s) <= q.max_symbol());
				REQUIRE(std::abs(dequantize(s, q) - alpha) <= q.step() / 2.0 * (1.0 + 1e-12));
			}
		}
	}

	TEST_CASE("bit packing round-trips") {
		Xoshiro256 rng(3);
		BitWriter w;
		std::vector<std::pair<std::uint64_t, int>> fields;
		for (int i = 0; i < 2000; ++i) {
			const int bits = 1 + static_cast<int>(rng.below(64));
			const std::uint64_t v = bits == 64 ? rng.next() : rng.next() & ((1ULL << bits) - 1);
			fields.emplace_back(v, bits);
			w.write(v, bits);
		}
		const std::size_t total = w.bit_count();
		w.align();
		CHECK(w.bytes().size() == (total + 7) / 8);
		BitReader r(w.bytes());
		for (const auto& [v, bits] : fields) REQUIRE(r.read(bits) == v);
		CHECK(r.remaining() < 8);
		CHECK_THROWS_AS(r.read(9), DecodeError);

		BitWriter msb;
		msb.write(0b101, 3);
		msb.align();
		CHECK(msb.bytes() == std::vector<std::uint8_t>{0xA0});
	}

	TEST_CASE("canonical Huffman codes") {
		Xoshiro256 rng(17);
		SUBCASE("optimal and decodable") {
			for (int trial = 0; trial < 30; ++trial) {
				std::vector<std::int32_t> symbols;
				const int spread = 1 + static_cast<int>(rng.below(40));
				for (int i = 0; i < 500; ++i) symbols.push_back(static_cast<std::int32_t>(std::lround(rng.normal() * spread)));
				const HuffmanCode code = HuffmanCode::build(symbols);
				BitWriter w;
				std::uint64_t cost = 0;
				for (const auto s : symbols) {
					code.encode(w, s);
					cost += static_cast<std::uint64_t>(code.length(s));
				}
				REQUIRE(w.bit_count() == cost);
				REQUIRE(cost == huffman_cost_oracle(symbols));
				w.align();
				BitReader r(w.bytes());
				for (const auto s : symbols) REQUIRE(code.decode(r) == s);
				std::vector<std::pair<std::int32_t, int>> lengths;
				for (const auto& e : code.entries()) lengths.emplace_back(e.symbol, e.length);
				const HuffmanCode rebuilt = HuffmanCode::from_lengths(lengths);
				for (std::size_t i = 0; i < code.entries().size(); ++i) {
					REQUIRE(rebuilt.entries()[i].code == code.entries()[i].code);
				}
			}
		}
		SUBCASE("a single symbol costs one bit") {
			const std::vector<std::int32_t> symbols(10, -3);
			const HuffmanCode code = HuffmanCode::build(symbols);
			CHECK(code.length(-3) == 1);
		}
		SUBCASE("lengths are capped") {
			// Fibonacci frequencies drive an unconstrained code past 32 bits.
			std::vector<std::int32_t> symbols;
			std::uint64_t a = 1, b = 1;
			for (std::int32_t s = 0; s < 40; ++s) {
				for (std::uint64_t k = 0; k < std::min<std::uint64_t>(a, 3000000); ++k) symbols.push_back(s);
				const auto next = a + b;
				a = b;
				b = next;
			}
			const HuffmanCode code = HuffmanCode::build(symbols);
			double kraft = 0.0;
			for (const auto& e : code.entries()) {
				REQUIRE(e.length <= HuffmanCode::kMaxLength);
				kraft += std::ldexp(1.0, -e.length);
			}
			CHECK(kraft <= 1.0);
		}
		SUBCASE("invalid length tables are rejected") {
			CHECK_THROWS_AS(HuffmanCode::from_lengths({{0, 1}, {1, 1}, {2, 1}}), DecodeError);
			CHECK_THROWS_AS(HuffmanCode::from_lengths({{0, 1}, {0, 1}}), DecodeError);
		}
	}

	TEST_CASE("index widths") {
		CHECK(index_bits(1) == 0);
		CHECK(index_bits(2) == 1);
		CHECK(index_bits(3) == 2);
		CHECK(index_bits(1024) == 10);
		CHECK(index_bits(1025) == 11);
		CHECK(local_shift_bits(128) == 7);
		CHECK(local_shift_bits(8) == 3);
	}

	TEST_CASE("empty and single-atom streams") {
		Xoshiro256 rng(21);
		PursuitConfig cfg;
		cfg.dict = DictConfig{{64, 256}, 1024, Window::Sine, Family::Mdct};
		cfg.sequence = SequenceSpec{SequenceKind::Random, 8, 1, 1};
		cfg.stop.max_atoms = 1;
		const auto f = oracle::gaussian_vector(1024, rng);
		const Approximant one = run(Signal(f), cfg);
		const Approximant none = truncated(one, 0);

		const EncodeResult empty = encode(none, codec_config(cfg), f);
		CHECK(empty.cost.index_bits == 0);
		CHECK(empty.cost.weight_bits == 0);
		CHECK(empty.cost.total_bits() == empty.bytes.size() * 8);
		CHECK(empty.snr_db == kMinusInfinityDb);
		const DecodedStream d0 = decode(empty.bytes);
		CHECK(d0.entries.empty());
		CHECK(d0.samples == std::vector<double>(1024, 0.0));

		const EncodeResult single = encode(one, codec_config(cfg), f);
		const std::size_t subdict = dict_size(cfg.dict, subdict_at(cfg.sequence, cfg.dict, 0));
		CHECK(single.cost.index_bits == static_cast<std::size_t>(index_bits(subdict)));
		CHECK(single.cost.weight_bits == 1);
		CHECK(single.cost.shift_bits == 0);
		CHECK(single.cost.total_bits() == single.bytes.size() * 8);
		CHECK(single.cost.padding_bits < 8);
		const DecodedStream d1 = decode(single.bytes);
		REQUIRE(d1.entries.size() == 1);
		CHECK(d1.entries[0].param == one.entries[0].param);
		CHECK(std::abs(d1.entries[0].weight - one.entries[0].weight) <= d1.header.quantizer.step() / 2.0);
	}

	TEST_CASE("random approximants round-trip bit-exactly") {
		for (std::uint64_t seed = 100; seed < 150; ++seed) {
			const Case c = random_case(seed);
			const EncodeResult r = encode(c.approx, codec_config(c.pursuit, 4 + static_cast<int>(seed % 10)), c.signal);
			REQUIRE(r.cost.total_bits() == r.bytes.size() * 8);
			const DecodedStream d = decode(r.bytes);
			REQUIRE(d.entries.size() == c.approx.size());
			REQUIRE(d.header.variant == c.pursuit.variant);
			REQUIRE(d.header.dict == c.pursuit.dict);
			REQUIRE(d.samples == r.reconstruction);
			REQUIRE(encode(d) == r.bytes);
			REQUIRE(srr(c.signal, d.samples) == r.snr_db);

			const TimeFrequencySource source(c.pursuit.dict, c.pursuit.sequence);
			CoefficientTable table;
			for (std::size_t i = 0; i < d.entries.size(); ++i) {
				const auto& e = d.entries[i];
				REQUIRE(e.param == c.approx.entries[i].param);
				REQUIRE(e.local_shift == c.approx.entries[i].local_shift);
				REQUIRE(std::abs(e.weight - c.approx.entries[i].weight) <= d.header.quantizer.step() / 2.0 * (1 + 1e-12));
				// The index names an atom of the subdictionary of its iteration.
				source.layout(c.approx.entries[i].iteration, table);
				REQUIRE(e.index < table.size());
				AtomParam grid = e.param;
				grid.time -= e.local_shift;
				REQUIRE(table.param(e.index) == grid);
			}
		}
	}

	TEST_CASE("corrupt streams fail explicitly") {
		const Case c = random_case(7);
		const EncodeResult r = encode(c.approx, codec_config(c.pursuit), c.signal);
		auto bytes = r.bytes;
		SUBCASE("single bit flips") {
			int failures = 0, changed = 0;
			for (std::size_t bit = 0; bit < bytes.size() * 8; ++bit) {
				auto mutated = bytes;
				mutated[bit / 8] ^= static_cast<std::uint8_t>(0x80u >> (bit % 8));
				try {
					const DecodedStream d = decode(mutated);
					changed += d.samples != r.reconstruction || encode(d) != r.bytes;
				} catch (const DecodeError&) {
					++failures;
				}
			}
			CHECK(failures + changed == static_cast<int>(bytes.size() * 8));
		}
		SUBCASE("truncation, magic and trailing bytes") {
			for (std::size_t n = 0; n < bytes.size(); ++n) {
				REQUIRE_THROWS_AS(decode(std::span<const std::uint8_t>(bytes.data(), n)), DecodeError);
			}
			auto bad = bytes;
			bad[0] = 'X';
			CHECK_THROWS_AS(decode(bad), DecodeError);
			bad = bytes;
			bad[4] = 99;
			CHECK_THROWS_AS(decode(bad), DecodeError);
			bad = bytes;
			bad.push_back(0);
			CHECK_THROWS_AS(decode(bad), DecodeError);
		}
	}

	TEST_CASE("encoder rejects mismatched inputs") {
		const Case c = random_case(11);
		PursuitConfig other = c.pursuit;
		other.sequence.seed ^= 1;
		if (c.pursuit.sequence.kind == SequenceKind::Random && c.approx.size() > 0) {
			CHECK_THROWS(encode(c.approx, codec_config(other), c.signal));
		}
		CHECK_THROWS_AS(encode(c.approx, codec_config(c.pursuit), std::vector<double>(3)), std::invalid_argument);
	}

	TEST_CASE("reference cost arithmetic") {
		// 18-bit indexes and 16-bit weights for the two reported atom counts.
		const std::size_t coarse = 6886 * (18 + 16);
		const std::size_t rss = 3759 * (18 + 16);
		CHECK(coarse == 234124);
		CHECK(rss == 127806);
		CHECK(std::abs(coarse / 1000.0 - 231.0) / 231.0 < 0.015);
		CHECK(std::abs(rss / 1000.0 - 126.0) / 126.0 < 0.015);
		CHECK(index_bits(dict_size(DictConfig{{128, 1024, 8192}, 262144, Window::Sine, Family::Mdct},
		                           SubdictSpec::coarse(DictConfig{{128, 1024, 8192}, 262144, Window::Sine, Family::Mdct}))) ==
		      20);
	}

	TEST_CASE("rate-distortion curve") {
		const Signal f = synthetic_audio(3, SyntheticAudioOptions{.length = 4096});
		PursuitConfig cfg;
		cfg.dict = DictConfig{{32, 256, 1024}, 4096, Window::Sine, Family::Mdct};
		cfg.sequence = SequenceSpec{SequenceKind::Random, 2, 1, 1};
		cfg.stop.max_atoms = 2000;
		const std::vector<double> targets{3.0, 6.0, 9.0, 12.0, 15.0};
		const auto curve = rate_distortion_curve(f, cfg, 8, targets);
		REQUIRE(curve.size() == targets.size() + 1);
		CHECK(curve[0].atoms == 0);
		CHECK(curve[0].snr_db == kMinusInfinityDb);
		for (std::size_t i = 1; i < curve.size(); ++i) {
			CHECK(curve[i].bits > curve[i - 1].bits);
			CHECK(curve[i].snr_db >= curve[i - 1].snr_db);
			CHECK(curve[i].atoms >= curve[i - 1].atoms);
		}
	}

	TEST_CASE("frozen bitstream fingerprint") {
		const Signal f = synthetic_audio(1, SyntheticAudioOptions{.length = 8192});
		PursuitConfig cfg;
		cfg.dict = DictConfig{{128, 1024, 8192}, 8192, Window::Sine, Family::Mdct};
		cfg.sequence = SequenceSpec{SequenceKind::Random, 1, 1, 1};
		cfg.stop.target_srr_db = 10.0;
		cfg.stop.max_atoms = 5000;
		const Approximant a = run(f, cfg);
		const EncodeResult r = encode(a, codec_config(cfg), f.samples());
		CHECK(a.size() == 213);
		CHECK(r.bytes.size() == 915);
		CHECK(fnv1a(r.bytes) == 0x8f8ad7c63511d71cULL);
	}
}
