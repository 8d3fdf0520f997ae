#include "rss/sequence.hpp"

#include <stdexcept>

#include "rss/random.hpp"

namespace rss {

std::string to_string(SequenceKind kind) {
	switch (kind) {
	case SequenceKind::Fixed: return "fixed";
	case SequenceKind::Random: return "random";
	case SequenceKind::Step: return "step";
	case SequenceKind::Jump: return "jump";
	}
	return "fixed";
}

SequenceKind parse_sequence_kind(std::string_view text) {
	if (text == "fixed") return SequenceKind::Fixed;
	if (text == "random") return SequenceKind::Random;
	if (text == "step") return SequenceKind::Step;
	if (text == "jump") return SequenceKind::Jump;
	throw std::invalid_argument("unknown sequence kind: " + std::string(text));
}

void SequenceSpec::validate() const {
	if (refresh < 1 || refresh > 0xFFFF) {
		throw std::invalid_argument("refresh period must be in [1, 65535]");
	}
	if (subsample < 1 || subsample > 0xFFFF) {
		throw std::invalid_argument("subsampling factor must be in [1, 65535]");
	}
	if (static_cast<unsigned>(kind) > 3) {
		throw std::invalid_argument("invalid sequence kind");
	}
}

namespace {

int centred(std::uint64_t v, int s) {
	const int half = s / 2;
	const int quarter = s / 4;
	const int x = static_cast<int>(v % static_cast<std::uint64_t>(half));
	return x < quarter ? x : x - half;
}

}  // namespace

int shift_at(const SequenceSpec& spec, const DictConfig& config, std::size_t iteration, int scale_index) {
	const int s = config.scales.at(static_cast<std::size_t>(scale_index));
	const std::uint64_t block = iteration / spec.refresh;
	const auto half = static_cast<std::uint64_t>(s / 2);
	switch (spec.kind) {
	case SequenceKind::Fixed:
		return 0;
	case SequenceKind::Step:
		return centred(block % half, s);
	case SequenceKind::Jump: {
		const auto step = static_cast<std::uint64_t>(s / 4 - 1) % half;
		return centred(((block % half) * step) % half, s);
	}
	case SequenceKind::Random: {
		auto rng = Xoshiro256::substream(spec.seed, block, static_cast<std::uint64_t>(scale_index));
		return static_cast<int>(rng.below(half)) - s / 4;
	}
	}
	return 0;
}

int phase_at(const SequenceSpec& spec, const DictConfig& config, std::size_t iteration, int scale_index) {
	const std::uint64_t d = spec.subsample;
	if (d <= 1) {
		return 0;
	}
	const std::uint64_t block = iteration / spec.refresh;
	switch (spec.kind) {
	case SequenceKind::Fixed:
		return 0;
	case SequenceKind::Step:
	case SequenceKind::Jump:
		return static_cast<int>(block % d);
	case SequenceKind::Random: {
		const int s = config.scales.at(static_cast<std::size_t>(scale_index));
		auto rng = Xoshiro256::substream(spec.seed, block, static_cast<std::uint64_t>(scale_index));
		rng.below(static_cast<std::uint64_t>(s / 2));
		return static_cast<int>(rng.below(d));
	}
	}
	return 0;
}

SubdictSpec subdict_at(const SequenceSpec& spec, const DictConfig& config, std::size_t iteration) {
	spec.validate();
	SubdictSpec sub;
	sub.subsample = static_cast<int>(spec.subsample);
	const int scales = config.scale_count();
	sub.shifts.resize(static_cast<std::size_t>(scales));
	sub.phases.resize(static_cast<std::size_t>(scales));
	for (int k = 0; k < scales; ++k) {
		sub.shifts[static_cast<std::size_t>(k)] = shift_at(spec, config, iteration, k);
		sub.phases[static_cast<std::size_t>(k)] = phase_at(spec, config, iteration, k);
	}
	return sub;
}

std::uint64_t shift_sequence_hash(const SequenceSpec& spec, const DictConfig& config, std::size_t iterations) {
	Fnv1a64 hash;
	for (std::size_t i = 0; i < iterations; ++i) {
		for (int k = 0; k < config.scale_count(); ++k) {
			hash.update_i32(shift_at(spec, config, i, k));
		}
	}
	return hash.value();
}

}  // namespace rss
