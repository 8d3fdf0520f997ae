#ifndef RSS_EXPERIMENTS_HPP
#define RSS_EXPERIMENTS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rss/dictionary.hpp"
#include "rss/orderstats.hpp"
#include "rss/pursuit.hpp"
#include "rss/signal.hpp"

namespace rss {

/// Per-iteration mean and unbiased variance over trials.
struct CurveStats {
	std::vector<double> mean;
	std::vector<double> variance;
};

/// rows[t][n] -> statistics over t for each n.
CurveStats curve_stats(const std::vector<std::vector<double>>& rows);

/// Ordered "key=value" pairs written as "# key=value" lines above a CSV.
using ConfigHeader = std::vector<std::pair<std::string, std::string>>;
void write_config_header(std::ostream& out, const ConfigHeader& header);

// --- toy Gabor decay --------------------------------------------------------

struct ToyGaborOptions {
	std::uint64_t seed = 1;
	/// Seed of the synthetic signals; defaults to `seed`.
	std::optional<std::uint64_t> signal_seed;
	int length = 2048;
	int sparsity = 60;
	std::vector<int> scales{32, 128, 512};
	Window window = Window::Hann;
	int trials = 100;
	/// Iterations per run; 0 means `sparsity`.
	int iterations = 0;
	unsigned threads = 0;

	/// N = 10000, m = 300, 1000 trials.
	static ToyGaborOptions full_scale();
	ConfigHeader header() const;
};

/// Normalized error |R^n f|^2 / |f|^2 per trial, n = 0..iterations.
struct ToyGaborResult {
	ToyGaborOptions options;
	std::vector<std::vector<double>> coarse, rss, full;
};

ToyGaborResult run_toy_gabor(const ToyGaborOptions& options);
/// Columns n, coarse_mean, coarse_var, rss_mean, rss_var, full_mean, full_var.
void write_toy_gabor_csv(std::ostream& out, const ToyGaborResult& result);

// --- order statistics -------------------------------------------------------

struct OrderStatsOptions {
	std::uint64_t seed = 1;
	std::string distribution = "uniform";
	int M = 100;
	/// Iterations; 0 means M.
	int iterations = 0;
	std::size_t trials = 100000;
	/// |f|^2; 0 means M E[Z^2].
	double energy = 0.0;
	int pdf_points = 201;
	unsigned threads = 0;

	ConfigHeader header() const;
};

struct OrderStatsResult {
	OrderStatsOptions options;
	double energy = 0.0;
	std::vector<OrderStatRow> fixed;
	std::vector<OrderStatRow> redraw;
	bool fixed_truncated = false;
	bool redraw_truncated = false;
	/// (z, f_{M:M}(z), f_{M/2:M}(z)).
	std::vector<std::array<double, 3>> pdf;
};

OrderStatsResult run_orderstats(const OrderStatsOptions& options);
void write_orderstats_csv(std::ostream& out, const OrderStatsResult& result, Strategy strategy);
/// Columns z, pdf_max, pdf_median.
void write_orderstats_pdf_csv(std::ostream& out, const OrderStatsResult& result);

// --- random-dictionary OMP --------------------------------------------------

struct OmpRandomOptions {
	std::uint64_t seed = 1;
	int trials = 1000;
	int length = 128;
	int atoms = 256;
	int components = 64;
	int subset = 64;
	int iterations = 128;
	unsigned threads = 0;

	ConfigHeader header() const;
};

struct OmpRandomResult {
	OmpRandomOptions options;
	/// Normalized error per trial, n = 0..iterations; runs that stop early
	/// repeat their last value.
	std::vector<std::vector<double>> coarse_mp, rss_mp, full_mp, coarse_omp, rss_omp, full_omp;
};

OmpRandomResult run_omp_random(const OmpRandomOptions& options);
/// Columns n and mean error of the six algorithms.
void write_omp_random_csv(std::ostream& out, const OmpRandomResult& result);

// --- coding -----------------------------------------------------------------

struct AudioSource {
	/// Empty: synthetic audio seeded per trial. Otherwise a WAV file, cut or
	/// zero-padded to `length` and circularly shifted by a per-trial offset.
	std::string wav_path;
	int length = 32768;

	Signal signal(std::uint64_t seed, int trial) const;
};

struct CodingOptions {
	std::uint64_t seed = 1;
	int trials = 20;
	AudioSource source;
	std::vector<int> scales{128, 1024, 8192};
	std::vector<double> srr_targets{5.0, 10.0, 15.0, 20.0};
	int weight_bits = 8;
	std::uint32_t refresh = 1;
	std::uint32_t subsample = 1;
	SequenceKind sequence = SequenceKind::Random;
	std::size_t max_atoms = 50000;
	unsigned threads = 0;

	ConfigHeader header() const;
};

struct CodingRow {
	int trial;
	std::string algorithm;
	double target_srr_db;
	std::size_t atoms;
	std::size_t bits;
	double snr_db;
	bool reached;
};

/// Coarse MP, LoMP and sequential-subdictionary MP on each trial signal.
std::vector<CodingRow> run_coding(const CodingOptions& options);
/// Columns trial, algorithm, target_srr_db, atoms, bits, snr_db, reached.
void write_coding_csv(std::ostream& out, const CodingOptions& options, const std::vector<CodingRow>& rows);

/// Sequence seed used for trial `trial` of a coding-style experiment.
std::uint64_t trial_sequence_seed(std::uint64_t seed, int trial);

// --- complexity/sparsity tradeoff -------------------------------------------

struct TradeoffOptions {
	std::uint64_t seed = 1;
	int trials = 3;
	AudioSource source;
	std::vector<int> scales{128, 256, 512, 1024, 2048, 4096, 8192, 16384};
	std::vector<int> factors{1, 2, 4, 8, 16, 32};
	double target_srr_db = 10.0;
	int weight_bits = 8;
	std::size_t max_atoms = 50000;
	/// Wall-clock columns are zero when false, making the CSV reproducible.
	bool timing = true;

	ConfigHeader header() const;
};

struct TradeoffRow {
	int factor;  // 0 for the Coarse MP reference
	double mean_bits;
	double mean_atoms;
	double mean_seconds;
	double relative_time;
};

std::vector<TradeoffRow> run_tradeoff(const TradeoffOptions& options);
/// Columns factor, bits, atoms, seconds, relative_time.
void write_tradeoff_csv(std::ostream& out, const TradeoffOptions& options, const std::vector<TradeoffRow>& rows);

}  // namespace rss

#endif  // RSS_EXPERIMENTS_HPP
