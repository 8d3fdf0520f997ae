#ifndef RSS_SIGNAL_HPP
#define RSS_SIGNAL_HPP

#include <cstddef>
#include <filesystem>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

namespace rss {

/// A discrete real signal. Immutable once built.
class Signal {
public:
	Signal(std::vector<double> samples, int sample_rate = 32000);

	std::span<const double> samples() const { return samples_; }
	std::size_t length() const { return samples_.size(); }
	int sample_rate() const { return sample_rate_; }
	double operator[](std::size_t i) const { return samples_[i]; }

	double energy() const;

private:
	std::vector<double> samples_;
	int sample_rate_;
};

double energy(std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);

inline constexpr double kPlusInfinityDb = std::numeric_limits<double>::infinity();
inline constexpr double kMinusInfinityDb = -std::numeric_limits<double>::infinity();

/// Signal-to-residual ratio 10 log10(|f_n|^2 / |f - f_n|^2) in dB.
/// Returns +inf for a zero residual and -inf for a zero approximant with a
/// nonzero residual.
double srr(std::span<const double> reference, std::span<const double> approximant);
double srr(const Signal& reference, const Signal& approximant);
inline double srr(const std::vector<double>& reference, const std::vector<double>& approximant) {
	return srr(std::span<const double>(reference), std::span<const double>(approximant));
}

/// Same ratio expressed from energies already at hand.
double srr_from_energies(double approximant_energy, double residual_energy);

class WavError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Reads PCM16 or float32 RIFF/WAVE. Multichannel input keeps channel 0
/// (a warning goes to stderr). 16-bit samples are divided by 32768.
Signal load_wav(const std::filesystem::path& path);

enum class WavEncoding { Pcm16, Float32 };

/// Writes a mono file. PCM16 output clips to [-32768, 32767].
void save_wav(const std::filesystem::path& path, const Signal& signal, WavEncoding encoding = WavEncoding::Pcm16);

/// Row of a residual-decay trace.
struct MetricRow {
	std::size_t iteration;
	double residual_energy;
	double srr_db;
};

void write_metric_csv(std::ostream& out, std::span<const MetricRow> rows);

}  // namespace rss

#endif  // RSS_SIGNAL_HPP
