#ifndef RSS_SEQUENCE_HPP
#define RSS_SEQUENCE_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "rss/dictionary.hpp"

namespace rss {

enum class SequenceKind : std::uint8_t { Fixed = 0, Random = 1, Step = 2, Jump = 3 };

std::string to_string(SequenceKind kind);
SequenceKind parse_sequence_kind(std::string_view text);

/// Signal-independent sequence of subdictionaries.
///
/// `refresh` is the number J of consecutive iterations sharing a
/// subdictionary; `subsample` is the frame subsampling factor d.
struct SequenceSpec {
	SequenceKind kind = SequenceKind::Fixed;
	std::uint64_t seed = 0;
	std::uint32_t refresh = 1;
	std::uint32_t subsample = 1;

	void validate() const;
	bool operator==(const SequenceSpec&) const = default;
};

/// Shift tau_k^i in [-s_k/4, s_k/4) for iteration i and scale index k.
///
///  - Fixed: 0.
///  - Step:  tau^b = (tau^{b-1} + 1) mod s_k/2, tau^0 = 0.
///  - Jump:  tau^b = (tau^{b-1} + s_k/4 - 1) mod s_k/2, tau^0 = 0.
///  - Random: uniform over the s_k/2 integers of [-s_k/4, s_k/4), drawn from
///    the xoshiro256** substream keyed by (seed, b, k).
///
/// b = i / J is the refresh block. Step and Jump values v in [0, s_k/2) are
/// mapped to v when v < s_k/4 and to v - s_k/2 otherwise. The result depends
/// only on the arguments, never on call order.
int shift_at(const SequenceSpec& spec, const DictConfig& config, std::size_t iteration, int scale_index);

/// Frame phase in [0, d) used when d > 1: Fixed 0, Step/Jump b mod d,
/// Random a second draw from the (seed, b, k) substream.
int phase_at(const SequenceSpec& spec, const DictConfig& config, std::size_t iteration, int scale_index);

SubdictSpec subdict_at(const SequenceSpec& spec, const DictConfig& config, std::size_t iteration);

/// FNV-1a over the little-endian int32 shifts of `iterations` iterations,
/// iteration-major then scale.
std::uint64_t shift_sequence_hash(const SequenceSpec& spec, const DictConfig& config, std::size_t iterations);

}  // namespace rss

#endif  // RSS_SEQUENCE_HPP
