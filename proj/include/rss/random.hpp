#ifndef RSS_RANDOM_HPP
#define RSS_RANDOM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace rss {

/// SplitMix64 finalizer (Steele, Lea, Flood). Used to expand seeds.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
	z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
	z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
	return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = UINT64_C(0x9E3779B97F4A7C15);

class SplitMix64 {
public:
	explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}
	constexpr std::uint64_t next() {
		state_ += kGoldenGamma;
		return splitmix64_mix(state_);
	}

private:
	std::uint64_t state_;
};

/// Key for substream (seed, a, b). Order-independent access to per-iteration
/// or per-trial random numbers relies on this being a pure function.
constexpr std::uint64_t substream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
	std::uint64_t z = splitmix64_mix(seed + kGoldenGamma);
	z = splitmix64_mix(z ^ splitmix64_mix(a + 2 * kGoldenGamma));
	z = splitmix64_mix(z ^ splitmix64_mix(b + 3 * kGoldenGamma));
	return z;
}

/// xoshiro256** 1.0 (Blackman, Vigna), state filled by SplitMix64.
class Xoshiro256 {
public:
	using result_type = std::uint64_t;

	explicit constexpr Xoshiro256(std::uint64_t seed) {
		SplitMix64 sm(seed);
		for (auto& s : state_) {
			s = sm.next();
		}
	}

	static constexpr Xoshiro256 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
		return Xoshiro256(substream_key(seed, a, b));
	}

	static constexpr result_type min() { return 0; }
	static constexpr result_type max() { return UINT64_MAX; }

	constexpr result_type operator()() { return next(); }

	constexpr std::uint64_t next() {
		const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
		const std::uint64_t t = state_[1] << 17;
		state_[2] ^= state_[0];
		state_[3] ^= state_[1];
		state_[1] ^= state_[2];
		state_[0] ^= state_[3];
		state_[2] ^= t;
		state_[3] = rotl(state_[3], 45);
		return result;
	}

	/// Unbiased integer in [0, bound) by rejection.
	constexpr std::uint64_t below(std::uint64_t bound) {
		const std::uint64_t threshold = (0 - bound) % bound;
		for (;;) {
			const std::uint64_t x = next();
			if (x >= threshold) {
				return x % bound;
			}
		}
	}

	/// Uniform double in [0, 1) with 53 random bits.
	constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

	/// Uniform double in (0, 1).
	constexpr double uniform_open() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

	/// Standard normal via Box-Muller; the second variate of each pair is cached.
	double normal() {
		if (has_spare_) {
			has_spare_ = false;
			return spare_;
		}
		const double r = std::sqrt(-2.0 * std::log(uniform_open()));
		const double theta = 2.0 * std::numbers::pi * uniform();
		spare_ = r * std::sin(theta);
		has_spare_ = true;
		return r * std::cos(theta);
	}

private:
	static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

	std::array<std::uint64_t, 4> state_{};
	double spare_ = 0.0;
	bool has_spare_ = false;
};

/// 64-bit FNV-1a, used for reproducibility fingerprints.
class Fnv1a64 {
public:
	void update(const void* data, std::size_t size) {
		const auto* p = static_cast<const unsigned char*>(data);
		for (std::size_t i = 0; i < size; ++i) {
			hash_ ^= p[i];
			hash_ *= UINT64_C(0x100000001B3);
		}
	}
	void update_i32(std::int32_t v) {
		const auto u = static_cast<std::uint32_t>(v);
		const unsigned char bytes[4] = {static_cast<unsigned char>(u), static_cast<unsigned char>(u >> 8),
		                                static_cast<unsigned char>(u >> 16), static_cast<unsigned char>(u >> 24)};
		update(bytes, 4);
	}
	std::uint64_t value() const { return hash_; }

private:
	std::uint64_t hash_ = UINT64_C(0xCBF29CE484222325);
};

}  // namespace rss

#endif  // RSS_RANDOM_HPP
