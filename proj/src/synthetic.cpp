#include "rss/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace rss {

Signal synthetic_audio(std::uint64_t seed, const SyntheticAudioOptions& options) {
	if (options.length < 1 || options.sample_rate < 1) {
		throw std::invalid_argument("synthetic audio needs a positive length and rate");
	}
	const int n = options.length;
	const double fs = options.sample_rate;
	std::vector<double> x(static_cast<std::size_t>(n), 0.0);
	Xoshiro256 rng = Xoshiro256::substream(seed, 0x5A5A, 0);

	for (int k = 0; k < options.notes; ++k) {
		const double f0 = 110.0 * std::pow(2.0, 4.0 * rng.uniform());  // 110 Hz .. 1760 Hz
		const int onset = static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, n * 3 / 4))));
		const double decay = 0.05 + 0.4 * rng.uniform();  // seconds
		const double am_rate = 2.0 + 6.0 * rng.uniform();
		const double am_depth = 0.5 * rng.uniform();
		const double gain = 0.4 + 0.6 * rng.uniform();
		const double attack = 0.005 * fs;
		std::vector<double> phases(static_cast<std::size_t>(options.harmonics));
		for (auto& p : phases) {
			p = 2.0 * std::numbers::pi * rng.uniform();
		}
		for (int t = onset; t < n; ++t) {
			const double dt = (t - onset) / fs;
			double env = std::exp(-dt / decay) * std::min(1.0, (t - onset) / attack);
			if (env < 1e-6) {
				break;
			}
			env *= 1.0 + am_depth * std::sin(2.0 * std::numbers::pi * am_rate * dt);
			double v = 0.0;
			for (int h = 1; h <= options.harmonics; ++h) {
				const double fh = f0 * h;
				if (fh >= 0.5 * fs) {
					break;
				}
				v += std::sin(2.0 * std::numbers::pi * fh * dt + phases[static_cast<std::size_t>(h - 1)]) / h;
			}
			x[static_cast<std::size_t>(t)] += gain * env * v;
		}
	}
	for (int c = 0; c < options.clicks; ++c) {
		const int at = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
		const double gain = 0.5 + rng.uniform();
		for (int j = 0; j < 64 && at + j < n; ++j) {
			x[static_cast<std::size_t>(at + j)] += gain * std::exp(-j / 8.0) * (2.0 * rng.uniform() - 1.0);
		}
	}
	double peak = 0.0;
	for (const double v : x) {
		peak = std::max(peak, std::abs(v));
	}
	if (peak > 0.0) {
		for (double& v : x) {
			v *= options.peak / peak;
		}
	} else {
		x[0] = options.peak;
	}
	return Signal(std::move(x), options.sample_rate);
}

SparseSignal sparse_dictionary_signal(const TimeFrequencyDictionary& dict, int m, Xoshiro256& rng) {
	const DictConfig& config = dict.config();
	const std::uint64_t total = dict_size(config);
	if (m < 1 || static_cast<std::uint64_t>(m) > total) {
		throw std::invalid_argument("sparsity out of range");
	}
	SparseSignal out;
	out.samples.assign(static_cast<std::size_t>(config.signal_length), 0.0);
	std::set<std::uint64_t> used;
	while (static_cast<int>(out.atoms.size()) < m) {
		std::uint64_t r = rng.below(total);
		if (!used.insert(r).second) {
			continue;
		}
		AtomParam p;
		for (int k = 0; k < config.scale_count(); ++k) {
			const int s = config.scales[static_cast<std::size_t>(k)];
			const auto per_scale = static_cast<std::uint64_t>(s / 2) * static_cast<std::uint64_t>(config.signal_length);
			if (r < per_scale) {
				p.scale_index = k;
				p.time = static_cast<int>(r / static_cast<std::uint64_t>(s / 2)) - s / 4;
				p.freq = static_cast<int>(r % static_cast<std::uint64_t>(s / 2));
				break;
			}
			r -= per_scale;
		}
		const double a = rng.normal();
		const AtomSegment seg = dict.atom(p);
		for (std::size_t j = 0; j < seg.values.size(); ++j) {
			out.samples[static_cast<std::size_t>(seg.start) + j] += a * seg.values[j];
		}
		out.atoms.push_back(p);
		out.amplitudes.push_back(a);
	}
	return out;
}

std::vector<std::vector<double>> random_unit_columns(int n, int m, Xoshiro256& rng) {
	if (n < 1 || m < 1) {
		throw std::invalid_argument("matrix dimensions must be positive");
	}
	std::vector<std::vector<double>> cols(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(n)));
	for (auto& c : cols) {
		double norm2 = 0.0;
		do {
			norm2 = 0.0;
			for (double& v : c) {
				v = rng.normal();
				norm2 += v * v;
			}
		} while (norm2 == 0.0);
		const double inv = 1.0 / std::sqrt(norm2);
		for (double& v : c) {
			v *= inv;
		}
	}
	return cols;
}

}  // namespace rss
