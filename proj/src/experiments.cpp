#include "rss/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "rss/codec.hpp"
#include "rss/random.hpp"
#include "rss/synthetic.hpp"

namespace rss {

namespace {

// Runs body(i) for i in [0, count); output placement by index keeps results
// independent of scheduling.
void parallel_for(int count, unsigned threads, const std::function<void(int)>& body) {
	unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
	workers = static_cast<unsigned>(std::min<int>(static_cast<int>(workers), std::max(count, 1)));
	if (workers <= 1) {
		for (int i = 0; i < count; ++i) body(i);
		return;
	}
	std::atomic<int> next{0};
	std::exception_ptr error;
	std::mutex error_mutex;
	{
		std::vector<std::jthread> pool;
		for (unsigned w = 0; w < workers; ++w) {
			pool.emplace_back([&] {
				for (int i = next++; i < count; i = next++) {
					try {
						body(i);
					} catch (...) {
						std::lock_guard lock(error_mutex);
						if (!error) error = std::current_exception();
					}
				}
			});
		}
	}
	if (error) std::rethrow_exception(error);
}

std::string join(const std::vector<int>& v) {
	std::ostringstream os;
	for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
	return os.str();
}

std::string join(const std::vector<double>& v) {
	std::ostringstream os;
	for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
	return os.str();
}

template <class T>
std::string str(const T& v) {
	std::ostringstream os;
	os << v;
	return os.str();
}

// Normalized residual trace padded with its last value up to `iterations`.
std::vector<double> normalized_trace(const Approximant& a, int iterations) {
	std::vector<double> out(static_cast<std::size_t>(iterations) + 1);
	for (std::size_t n = 0; n < out.size(); ++n) {
		const double e = n < a.trace.size() ? a.trace[n] : a.trace.back();
		out[n] = e / a.reference_energy;
	}
	return out;
}

}  // namespace

CurveStats curve_stats(const std::vector<std::vector<double>>& rows) {
	CurveStats out;
	if (rows.empty()) return out;
	const std::size_t len = rows.front().size();
	const double T = static_cast<double>(rows.size());
	out.mean.assign(len, 0.0);
	out.variance.assign(len, 0.0);
	for (const auto& r : rows) {
		for (std::size_t n = 0; n < len; ++n) out.mean[n] += r[n];
	}
	for (auto& m : out.mean) m /= T;
	if (rows.size() > 1) {
		for (const auto& r : rows) {
			for (std::size_t n = 0; n < len; ++n) {
				const double d = r[n] - out.mean[n];
				out.variance[n] += d * d;
			}
		}
		for (auto& v : out.variance) v /= (T - 1.0);
	}
	return out;
}

void write_config_header(std::ostream& out, const ConfigHeader& header) {
	for (const auto& [k, v] : header) {
		out << "# " << k << '=' << v << '\n';
	}
}

std::uint64_t trial_sequence_seed(std::uint64_t seed, int trial) {
	return substream_key(seed, static_cast<std::uint64_t>(trial), 2);
}

// --- toy Gabor --------------------------------------------------------------

ToyGaborOptions ToyGaborOptions::full_scale() {
	ToyGaborOptions o;
	o.length = 10000;
	o.sparsity = 300;
	o.trials = 1000;
	return o;
}

ConfigHeader ToyGaborOptions::header() const {
	DictConfig dict{scales, length, window, Family::Gabor};
	return {{"experiment", "toy-gabor"},
	        {"seed", str(seed)},
	        {"signal_seed", str(signal_seed.value_or(seed))},
	        {"dict", dict.to_text()},
	        {"sparsity", str(sparsity)},
	        {"trials", str(trials)},
	        {"iterations", str(iterations > 0 ? iterations : sparsity)}};
}

ToyGaborResult run_toy_gabor(const ToyGaborOptions& options) {
	if (options.trials < 1) throw std::invalid_argument("trials must be positive");
	if (options.sparsity < 1 || options.sparsity >= options.length) {
		throw std::invalid_argument("sparsity must satisfy 1 <= m < N");
	}
	const DictConfig config{options.scales, options.length, options.window, Family::Gabor};
	config.validate();
	const int iterations = options.iterations > 0 ? options.iterations : options.sparsity;
	const std::uint64_t signal_seed = options.signal_seed.value_or(options.seed);

	ToyGaborResult result;
	result.options = options;
	const auto T = static_cast<std::size_t>(options.trials);
	result.coarse.resize(T);
	result.rss.resize(T);
	result.full.resize(T);

	const TimeFrequencySource coarse(config, SequenceSpec{SequenceKind::Fixed, 0, 1, 1});
	const TimeFrequencySource full(config, SequenceSpec{}, true);
	StopCriteria stop;
	stop.max_atoms = static_cast<std::size_t>(iterations);

	parallel_for(options.trials, options.threads, [&](int t) {
		auto rng = Xoshiro256::substream(signal_seed, static_cast<std::uint64_t>(t), 1);
		const SparseSignal s = sparse_dictionary_signal(full.dictionary(), options.sparsity, rng);
		const TimeFrequencySource rss(config, SequenceSpec{SequenceKind::Random, trial_sequence_seed(options.seed, t), 1, 1});
		const auto i = static_cast<std::size_t>(t);
		result.coarse[i] = normalized_trace(run(s.samples, coarse, Variant::MP, stop), iterations);
		result.rss[i] = normalized_trace(run(s.samples, rss, Variant::MP, stop), iterations);
		result.full[i] = normalized_trace(run(s.samples, full, Variant::MP, stop), iterations);
	});
	return result;
}

void write_toy_gabor_csv(std::ostream& out, const ToyGaborResult& result) {
	write_config_header(out, result.options.header());
	const CurveStats c = curve_stats(result.coarse);
	const CurveStats r = curve_stats(result.rss);
	const CurveStats f = curve_stats(result.full);
	out << "n,coarse_mean,coarse_var,rss_mean,rss_var,full_mean,full_var\n" << std::setprecision(17);
	for (std::size_t n = 0; n < c.mean.size(); ++n) {
		out << n << ',' << c.mean[n] << ',' << c.variance[n] << ',' << r.mean[n] << ',' << r.variance[n] << ','
		    << f.mean[n] << ',' << f.variance[n] << '\n';
	}
}

// --- order statistics -------------------------------------------------------

ConfigHeader OrderStatsOptions::header() const {
	return {{"experiment", "orderstats"},
	        {"seed", str(seed)},
	        {"distribution", DistributionModel::parse(distribution).name()},
	        {"M", str(M)},
	        {"iterations", str(iterations > 0 ? iterations : M)},
	        {"trials", str(trials)},
	        {"energy", energy > 0.0 ? str(energy) : "M*E[Z^2]"}};
}

OrderStatsResult run_orderstats(const OrderStatsOptions& options) {
	const DistributionModel dist = DistributionModel::parse(options.distribution);
	if (options.M < 2) throw std::invalid_argument("M must be at least 2");
	const int iterations = options.iterations > 0 ? options.iterations : options.M;
	OrderStatsResult result;
	result.options = options;
	result.energy = options.energy > 0.0 ? options.energy : default_energy(dist, options.M);
	const double E = result.energy;

	const Prediction pf = predict_fixed(dist, options.M, std::min(iterations, options.M), E);
	const Prediction pr = predict_redraw(dist, options.M, iterations, E);
	result.fixed_truncated = pf.truncated;
	result.redraw_truncated = pr.truncated;
	const VarianceTrace vr = predict_variance(dist, options.M, iterations, Strategy::Redraw, E);
	const auto sf = simulate_greedy(dist, options.M, std::min(iterations, options.M), Strategy::Fixed, options.trials,
	                                substream_key(options.seed, 0, 3), E, options.threads);
	const auto sr = simulate_greedy(dist, options.M, iterations, Strategy::Redraw, options.trials,
	                                substream_key(options.seed, 1, 3), E, options.threads);
	// The fixed-strategy variance has no closed form; an independent Monte Carlo run predicts it.
	const VarianceTrace vf = predict_variance(dist, options.M, std::min(iterations, options.M), Strategy::Fixed, E,
	                                          options.trials, substream_key(options.seed, 2, 3));

	for (std::size_t n = 0; n < pf.values.size(); ++n) {
		result.fixed.push_back(OrderStatRow{static_cast<int>(n), pf.values[n], vf.variance[n], sf.mean[n],
		                                    sf.variance[n], sf.mean_stderr[n], 0});
	}
	for (std::size_t n = 0; n < pr.values.size(); ++n) {
		result.redraw.push_back(OrderStatRow{static_cast<int>(n), pr.values[n], vr.variance[n], sr.mean[n],
		                                     sr.variance[n], sr.mean_stderr[n], sr.clamp_count});
	}

	const int half = options.M / 2;
	const double lo = 0.0;
	double hi = dist.support_end();
	if (!std::isfinite(hi)) {
		hi = dist.quantile_upper(1e-6 / options.M);
	}
	const int points = std::max(options.pdf_points, 2);
	for (int p = 0; p < points; ++p) {
		const double z = lo + (hi - lo) * p / (points - 1);
		result.pdf.push_back({z, order_pdf(dist, options.M, options.M, z), order_pdf(dist, half, options.M, z)});
	}
	return result;
}

void write_orderstats_csv(std::ostream& out, const OrderStatsResult& result, Strategy strategy) {
	ConfigHeader h = result.options.header();
	h.emplace_back("strategy", to_string(strategy));
	h.emplace_back("energy_value", str(result.energy));
	h.emplace_back("truncated", (strategy == Strategy::Fixed ? result.fixed_truncated : result.redraw_truncated)
	                                ? "true"
	                                : "false");
	write_config_header(out, h);
	write_orderstats_csv(out, strategy == Strategy::Fixed ? result.fixed : result.redraw);
}

void write_orderstats_pdf_csv(std::ostream& out, const OrderStatsResult& result) {
	ConfigHeader h = result.options.header();
	h.emplace_back("ranks", str(result.options.M) + "," + str(result.options.M / 2));
	write_config_header(out, h);
	out << "z,pdf_max,pdf_median\n" << std::setprecision(17);
	for (const auto& row : result.pdf) {
		out << row[0] << ',' << row[1] << ',' << row[2] << '\n';
	}
}

// --- random-dictionary OMP --------------------------------------------------

ConfigHeader OmpRandomOptions::header() const {
	return {{"experiment", "omp-random"}, {"seed", str(seed)},         {"trials", str(trials)},
	        {"N", str(length)},           {"M", str(atoms)},           {"components", str(components)},
	        {"subset", str(subset)},      {"iterations", str(iterations)}};
}

OmpRandomResult run_omp_random(const OmpRandomOptions& options) {
	if (options.trials < 1) throw std::invalid_argument("trials must be positive");
	if (options.components < 1 || options.components > options.atoms || options.subset < 1 ||
	    options.subset > options.atoms || options.iterations < 1 || options.iterations > options.length) {
		throw std::invalid_argument("inconsistent random-dictionary sizes");
	}
	OmpRandomResult result;
	result.options = options;
	const auto T = static_cast<std::size_t>(options.trials);
	for (auto* v : {&result.coarse_mp, &result.rss_mp, &result.full_mp, &result.coarse_omp, &result.rss_omp,
	                &result.full_omp}) {
		v->resize(T);
	}
	StopCriteria stop;
	stop.max_atoms = static_cast<std::size_t>(options.iterations);

	parallel_for(options.trials, options.threads, [&](int t) {
		auto rng = Xoshiro256::substream(options.seed, static_cast<std::uint64_t>(t), 1);
		auto columns = random_unit_columns(options.length, options.atoms, rng);
		std::vector<int> order(static_cast<std::size_t>(options.atoms));
		for (int j = 0; j < options.atoms; ++j) order[static_cast<std::size_t>(j)] = j;
		for (int j = 0; j < options.components; ++j) {
			const auto pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(options.atoms - j)));
			std::swap(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(pick)]);
		}
		std::vector<double> f(static_cast<std::size_t>(options.length), 0.0);
		for (int j = 0; j < options.components; ++j) {
			const double a = rng.normal();
			const auto& c = columns[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
			for (std::size_t s = 0; s < f.size(); ++s) f[s] += a * c[s];
		}
		const auto sub = static_cast<std::size_t>(options.subset);
		const std::uint64_t seq_seed = trial_sequence_seed(options.seed, t);
		const MatrixSource coarse(columns, MatrixSource::Mode::Fixed, sub);
		const MatrixSource rss(columns, MatrixSource::Mode::Random, sub, seq_seed);
		const MatrixSource full(std::move(columns), MatrixSource::Mode::Full, sub);
		const auto i = static_cast<std::size_t>(t);
		result.coarse_mp[i] = normalized_trace(run(f, coarse, Variant::MP, stop), options.iterations);
		result.rss_mp[i] = normalized_trace(run(f, rss, Variant::MP, stop), options.iterations);
		result.full_mp[i] = normalized_trace(run(f, full, Variant::MP, stop), options.iterations);
		result.coarse_omp[i] = normalized_trace(run(f, coarse, Variant::OMP, stop), options.iterations);
		result.rss_omp[i] = normalized_trace(run(f, rss, Variant::OMP, stop), options.iterations);
		result.full_omp[i] = normalized_trace(run(f, full, Variant::OMP, stop), options.iterations);
	});
	return result;
}

void write_omp_random_csv(std::ostream& out, const OmpRandomResult& result) {
	write_config_header(out, result.options.header());
	const CurveStats a = curve_stats(result.coarse_mp), b = curve_stats(result.rss_mp), c = curve_stats(result.full_mp);
	const CurveStats d = curve_stats(result.coarse_omp), e = curve_stats(result.rss_omp),
	                 g = curve_stats(result.full_omp);
	out << "n,coarse_mp,rss_mp,full_mp,coarse_omp,rss_omp,full_omp\n" << std::setprecision(17);
	for (std::size_t n = 0; n < a.mean.size(); ++n) {
		out << n << ',' << a.mean[n] << ',' << b.mean[n] << ',' << c.mean[n] << ',' << d.mean[n] << ',' << e.mean[n]
		    << ',' << g.mean[n] << '\n';
	}
}

// --- coding -----------------------------------------------------------------

Signal AudioSource::signal(std::uint64_t seed, int trial) const {
	if (length < 1) throw std::invalid_argument("signal length must be positive");
	const std::uint64_t key = substream_key(seed, static_cast<std::uint64_t>(trial), 1);
	if (wav_path.empty()) {
		SyntheticAudioOptions o;
		o.length = length;
		return synthetic_audio(key, o);
	}
	const Signal file = load_wav(wav_path);
	std::vector<double> x(static_cast<std::size_t>(length), 0.0);
	const std::size_t n = std::min(file.length(), x.size());
	auto rng = Xoshiro256(key);
	const auto offset = static_cast<std::size_t>(rng.below(x.size()));
	for (std::size_t t = 0; t < n; ++t) {
		x[(t + offset) % x.size()] = file[t];
	}
	return Signal(std::move(x), file.sample_rate());
}

ConfigHeader CodingOptions::header() const {
	DictConfig dict{scales, source.length, Window::Sine, Family::Mdct};
	return {{"experiment", "coding"},
	        {"seed", str(seed)},
	        {"trials", str(trials)},
	        {"input", source.wav_path.empty() ? std::string("synthetic") : source.wav_path},
	        {"dict", dict.to_text()},
	        {"srr_targets", join(srr_targets)},
	        {"weight_bits", str(weight_bits)},
	        {"sequence", to_string(sequence)},
	        {"refresh", str(refresh)},
	        {"subsample", str(subsample)},
	        {"max_atoms", str(max_atoms)}};
}

std::vector<CodingRow> run_coding(const CodingOptions& options) {
	if (options.trials < 1) throw std::invalid_argument("trials must be positive");
	if (options.srr_targets.empty()) throw std::invalid_argument("at least one SRR target is required");
	std::vector<double> targets = options.srr_targets;
	std::sort(targets.begin(), targets.end());
	const DictConfig dict{options.scales, options.source.length, Window::Sine, Family::Mdct};
	dict.validate();

	struct Algorithm {
		std::string name;
		Variant variant;
		bool sequential;
	};
	const std::vector<Algorithm> algorithms{{"coarse_mp", Variant::MP, false},
	                                        {"lomp", Variant::LoMP, false},
	                                        {"rss_mp", Variant::MP, true}};
	std::vector<std::vector<CodingRow>> per_trial(static_cast<std::size_t>(options.trials));
	parallel_for(options.trials, options.threads, [&](int t) {
		const Signal f = options.source.signal(options.seed, t);
		for (const auto& alg : algorithms) {
			PursuitConfig cfg;
			cfg.variant = alg.variant;
			cfg.dict = dict;
			cfg.sequence = alg.sequential ? SequenceSpec{options.sequence, trial_sequence_seed(options.seed, t),
			                                             options.refresh, options.subsample}
			                              : SequenceSpec{SequenceKind::Fixed, 0, 1, 1};
			cfg.stop.target_srr_db = targets.back();
			cfg.stop.max_atoms = options.max_atoms;
			const Approximant a = run(f, cfg);
			const CodecConfig codec{dict, cfg.sequence, options.weight_bits, f.sample_rate()};
			for (const double target : targets) {
				const std::size_t n = atoms_to_reach(a, target);
				const auto enc = encode(truncated(a, n), codec, f.samples());
				per_trial[static_cast<std::size_t>(t)].push_back(
				    CodingRow{t, alg.name, target, n, enc.bytes.size() * 8, enc.snr_db, a.srr_db(n) >= target});
			}
		}
	});
	std::vector<CodingRow> rows;
	for (auto& v : per_trial) rows.insert(rows.end(), v.begin(), v.end());
	return rows;
}

void write_coding_csv(std::ostream& out, const CodingOptions& options, const std::vector<CodingRow>& rows) {
	write_config_header(out, options.header());
	out << "trial,algorithm,target_srr_db,atoms,bits,snr_db,reached\n" << std::setprecision(17);
	for (const auto& r : rows) {
		out << r.trial << ',' << r.algorithm << ',' << r.target_srr_db << ',' << r.atoms << ',' << r.bits << ','
		    << r.snr_db << ',' << (r.reached ? 1 : 0) << '\n';
	}
}

// --- tradeoff ---------------------------------------------------------------

ConfigHeader TradeoffOptions::header() const {
	DictConfig dict{scales, source.length, Window::Sine, Family::Mdct};
	return {{"experiment", "tradeoff"},
	        {"seed", str(seed)},
	        {"trials", str(trials)},
	        {"input", source.wav_path.empty() ? std::string("synthetic") : source.wav_path},
	        {"dict", dict.to_text()},
	        {"factors", join(factors)},
	        {"target_srr_db", str(target_srr_db)},
	        {"weight_bits", str(weight_bits)},
	        {"timing", timing ? "true" : "false"}};
}

std::vector<TradeoffRow> run_tradeoff(const TradeoffOptions& options) {
	if (options.trials < 1) throw std::invalid_argument("trials must be positive");
	const DictConfig dict{options.scales, options.source.length, Window::Sine, Family::Mdct};
	dict.validate();
	std::vector<int> factors{0};
	factors.insert(factors.end(), options.factors.begin(), options.factors.end());
	std::vector<TradeoffRow> rows;
	for (const int d : factors) {
		if (d < 0 || d > 0xFFFF) throw std::invalid_argument("subsampling factor out of range");
		TradeoffRow row{d, 0.0, 0.0, 0.0, 0.0};
		for (int t = 0; t < options.trials; ++t) {
			const Signal f = options.source.signal(options.seed, t);
			PursuitConfig cfg;
			cfg.dict = dict;
			cfg.sequence = d == 0 ? SequenceSpec{SequenceKind::Fixed, 0, 1, 1}
			                      : SequenceSpec{SequenceKind::Random, trial_sequence_seed(options.seed, t), 1,
			                                     static_cast<std::uint32_t>(d)};
			cfg.stop.target_srr_db = options.target_srr_db;
			cfg.stop.max_atoms = options.max_atoms;
			const auto start = std::chrono::steady_clock::now();
			const Approximant a = run(f, cfg);
			const auto stop = std::chrono::steady_clock::now();
			const auto enc = encode(a, CodecConfig{dict, cfg.sequence, options.weight_bits, f.sample_rate()}, f.samples());
			row.mean_bits += static_cast<double>(enc.bytes.size() * 8);
			row.mean_atoms += static_cast<double>(a.size());
			if (options.timing) {
				row.mean_seconds += std::chrono::duration<double>(stop - start).count();
			}
		}
		row.mean_bits /= options.trials;
		row.mean_atoms /= options.trials;
		row.mean_seconds /= options.trials;
		rows.push_back(row);
	}
	const double reference = rows.front().mean_seconds;
	for (auto& r : rows) {
		r.relative_time = reference > 0.0 ? r.mean_seconds / reference : 0.0;
	}
	return rows;
}

void write_tradeoff_csv(std::ostream& out, const TradeoffOptions& options, const std::vector<TradeoffRow>& rows) {
	write_config_header(out, options.header());
	out << "factor,bits,atoms,seconds,relative_time\n" << std::setprecision(17);
	for (const auto& r : rows) {
		out << r.factor << ',' << r.mean_bits << ',' << r.mean_atoms << ',' << r.mean_seconds << ',' << r.relative_time
		    << '\n';
	}
}

}  // namespace rss
