#ifndef RSS_SYNTHETIC_HPP
#define RSS_SYNTHETIC_HPP

#include <cstdint>
#include <vector>

#include "rss/dictionary.hpp"
#include "rss/random.hpp"
#include "rss/signal.hpp"

namespace rss {

struct SyntheticAudioOptions {
	int length = 32768;
	int sample_rate = 32000;
	/// Harmonic notes with attack/decay envelopes and slow amplitude modulation.
	int notes = 6;
	int harmonics = 5;
	/// Short decaying noise bursts.
	int clicks = 6;
	/// Peak amplitude after normalization.
	double peak = 0.5;
};

/// Tone mixture with amplitude modulation and transients, fully determined by `seed`.
Signal synthetic_audio(std::uint64_t seed, const SyntheticAudioOptions& options = {});

struct SparseSignal {
	std::vector<double> samples;
	std::vector<AtomParam> atoms;
	std::vector<double> amplitudes;
};

/// Sum of m distinct atoms drawn uniformly from the full dictionary with
/// N(0, 1) amplitudes.
SparseSignal sparse_dictionary_signal(const TimeFrequencyDictionary& dict, int m, Xoshiro256& rng);

/// n x m matrix of columns drawn uniformly on the unit sphere.
std::vector<std::vector<double>> random_unit_columns(int n, int m, Xoshiro256& rng);

}  // namespace rss

#endif  // RSS_SYNTHETIC_HPP
