// Acceptance gate: one PASS/FAIL line per criterion. Optional arguments pick
// a subset of criteria by number.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rss/codec.hpp"
#include "rss/experiments.hpp"
#include "rss/orderstats.hpp"
#include "rss/pursuit.hpp"
#include "rss/sequence.hpp"
#include "rss/synthetic.hpp"

using namespace rss;

namespace {

struct Outcome {
	bool pass = true;
	std::string detail;
};

std::string fmt(double v, int precision = 4) {
	std::ostringstream os;
	os << std::setprecision(precision) << v;
	return os.str();
}

double paired_stderr(const std::vector<double>& d) {
	double mean = 0.0;
	for (const double v : d) mean += v;
	mean /= static_cast<double>(d.size());
	double ss = 0.0;
	for (const double v : d) ss += (v - mean) * (v - mean);
	return std::sqrt(ss / static_cast<double>(d.size() - 1) / static_cast<double>(d.size()));
}

// 1: energy conservation for every sequence kind.
Outcome energy_conservation() {
	Outcome out;
	double worst = 0.0;
	const SequenceKind kinds[] = {SequenceKind::Fixed, SequenceKind::Random, SequenceKind::Step, SequenceKind::Jump};
	for (int t = 0; t < 100; ++t) {
		Xoshiro256 rng = Xoshiro256::substream(2024, static_cast<std::uint64_t>(t), 0);
		PursuitConfig cfg;
		const int n = 256 + 4 * static_cast<int>(rng.below(961));
		cfg.dict = DictConfig{{16, 64, 256}, n, t % 2 ? Window::Sine : Window::Hann, t % 3 ? Family::Mdct : Family::Gabor};
		cfg.sequence = SequenceSpec{kinds[t % 4], rng.next(), 1 + static_cast<std::uint32_t>(rng.below(4)),
		                            1 + static_cast<std::uint32_t>(rng.below(3))};
		cfg.variant = t % 5 == 4 ? Variant::LoMP : Variant::MP;
		cfg.stop.max_atoms = 200;
		const auto f = oracle::gaussian_vector(static_cast<std::size_t>(n), rng);
		const Approximant a = run(Signal(f), cfg);
		double sum = 0.0;
		for (std::size_t i = 0; i <= a.size(); ++i) {
			worst = std::max(worst, std::abs(a.reference_energy - a.trace[i] - sum) / a.reference_energy);
			if (i < a.size()) sum += a.entries[i].weight * a.entries[i].weight;
		}
	}
	out.pass = worst <= 1e-9;
	out.detail = "max relative defect " + fmt(worst);
	return out;
}

// 2: OMP residual orthogonality and least-squares weights on random 128 x 256
// dictionaries. Orthogonality is checked on the residual seen at every
// iteration and on the final one unless the run stopped at the residual floor,
// where |R| is at rounding level and the ratio is meaningless.
Outcome omp_orthogonality() {
	Outcome out;
	double worst_corr = 0.0, worst_weight = 0.0, worst_floor = 0.0;
	int floor_runs = 0;
	StopCriteria stop;
	stop.max_atoms = 64;
	const auto max_ratio = [](std::span<const double> residual, const std::vector<std::vector<double>>& atoms) {
		const double rnorm = std::sqrt(oracle::energy(residual));
		double worst = 0.0;
		for (const auto& c : atoms) worst = std::max(worst, std::abs(oracle::dot(residual, c)) / rnorm);
		return worst;
	};
	for (int t = 0; t < 30; ++t) {
		auto rng = Xoshiro256::substream(7, static_cast<std::uint64_t>(t), 0);
		const auto cols = random_unit_columns(128, 256, rng);
		std::vector<double> f(128, 0.0);
		for (int j = 0; j < 64; ++j) {
			const double a = rng.normal();
			const auto& c = cols[rng.below(256)];
			for (std::size_t s = 0; s < 128; ++s) f[s] += a * c[s];
		}
		const double fnorm = std::sqrt(oracle::energy(f));
		for (const auto mode : {MatrixSource::Mode::Fixed, MatrixSource::Mode::Random, MatrixSource::Mode::Full}) {
			const MatrixSource source(cols, mode, 64, rng.next());
			std::vector<std::vector<double>> so_far;
			const Observer check = [&](const IterationEvent& e) {
				if (!so_far.empty()) worst_corr = std::max(worst_corr, max_ratio(e.residual, so_far));
				so_far.push_back(cols[static_cast<std::size_t>(e.selection.param.time)]);
			};
			const Approximant a = run(f, source, Variant::OMP, stop, check);
			std::vector<std::vector<double>> chosen;
			for (const auto& e : a.entries) chosen.push_back(cols[static_cast<std::size_t>(e.param.time)]);
			if (a.stop_reason == StopReason::ResidualFloor) {
				++floor_runs;
				worst_floor = std::max(worst_floor, std::sqrt(oracle::energy(a.residual)) / fnorm);
			} else {
				worst_corr = std::max(worst_corr, max_ratio(a.residual, chosen));
			}
			const auto w = oracle::least_squares(chosen, f);
			for (std::size_t i = 0; i < w.size(); ++i) {
				worst_weight = std::max(worst_weight, std::abs(a.entries[i].weight - w[i]));
			}
		}
	}
	out.pass = worst_corr <= 1e-8 && worst_weight <= 1e-8 && worst_floor <= 1e-6;
	out.detail = "max |<R,g>|/|R| " + fmt(worst_corr) + ", max weight error " + fmt(worst_weight) + ", " +
	             std::to_string(floor_runs) + " exact runs with |R|/|f| <= " + fmt(worst_floor);
	return out;
}

struct UniformRuns {
	double energy;
	Prediction fixed, redraw;
	SimulationResult sim_fixed, sim_redraw;
};

const UniformRuns& uniform_runs() {
	static const UniformRuns runs = [] {
		const auto u = DistributionModel::uniform();
		const double e = default_energy(u, 100);
		return UniformRuns{e,
		                   predict_fixed(u, 100, 50, e),
		                   predict_redraw(u, 100, 50, e),
		                   simulate_greedy(u, 100, 50, Strategy::Fixed, 100000, 11, e),
		                   simulate_greedy(u, 100, 50, Strategy::Redraw, 100000, 12, e)};
	}();
	return runs;
}

// 3: closed forms against Monte Carlo, Uniform M = 100.
Outcome orderstats_closed_forms() {
	Outcome out;
	const auto& r = uniform_runs();
	double worst_fixed = 0.0, worst_redraw = 0.0;
	for (std::size_t n = 0; n <= 50; ++n) {
		worst_fixed = std::max(worst_fixed, std::abs(r.fixed.values[n] - r.sim_fixed.mean[n]) / r.sim_fixed.mean[n]);
		worst_redraw = std::max(worst_redraw, std::abs(r.redraw.values[n] - r.sim_redraw.mean[n]) / r.sim_redraw.mean[n]);
	}
	const auto u = DistributionModel::uniform();
	const double m1 = std::abs(order_moment_quadrature(u, 100, 100, 1) - 100.0 / 101.0);
	const double m2 = std::abs(order_moment_quadrature(u, 100, 100, 2) - 100.0 / 102.0);
	const double c1 = std::abs(order_moment(u, 100, 100, 1) - 100.0 / 101.0);
	const double c2 = std::abs(order_moment(u, 100, 100, 2) - 100.0 / 102.0);
	out.pass = worst_fixed <= 0.02 && worst_redraw <= 0.02 && m1 <= 1e-8 && m2 <= 1e-8 && c1 <= 1e-12 && c2 <= 1e-12;
	out.detail = "fixed rel " + fmt(worst_fixed) + ", redraw rel " + fmt(worst_redraw) + ", quadrature moment errors " +
	             fmt(m1) + " " + fmt(m2);
	return out;
}

// 4: sign of fixed - redraw at n = M/2 for three laws.
Outcome orderstats_orderings() {
	Outcome out;
	std::ostringstream detail;
	for (const auto& d : {DistributionModel::uniform(), DistributionModel::exponential(1.0), DistributionModel::half_normal(1.0)}) {
		const double e = default_energy(d, 100);
		double pf, pr;
		SimulationResult sf, sr;
		if (d.kind() == DistributionKind::Uniform) {
			const auto& r = uniform_runs();
			pf = r.fixed.values[50];
			pr = r.redraw.values[50];
			sf = r.sim_fixed;
			sr = r.sim_redraw;
		} else {
			pf = predict_fixed(d, 100, 50, e).values[50];
			pr = predict_redraw(d, 100, 50, e).values[50];
			sf = simulate_greedy(d, 100, 50, Strategy::Fixed, 100000, 21, e);
			sr = simulate_greedy(d, 100, 50, Strategy::Redraw, 100000, 22, e);
		}
		// Positive when redraw ends with less residual energy than fixed.
		const double sign = d.kind() == DistributionKind::Uniform ? -1.0 : 1.0;
		const double mc_diff = sign * (sf.mean[50] - sr.mean[50]);
		const double se = std::hypot(sf.mean_stderr[50], sr.mean_stderr[50]);
		const bool ok = sign * (pf - pr) > 0.0 && mc_diff > 3.0 * se;
		out.pass = out.pass && ok;
		detail << d.name() << " pred " << fmt(pf) << "/" << fmt(pr) << " mc " << fmt(sf.mean[50]) << "/"
		       << fmt(sr.mean[50]) << " (" << fmt(mc_diff / se, 3) << " se); ";
	}
	out.detail = detail.str();
	return out;
}

// 5: toy Gabor ordering at n = m/2.
Outcome toy_gabor_ordering() {
	Outcome out;
	ToyGaborOptions o;
	const ToyGaborResult r = run_toy_gabor(o);
	const std::size_t n = static_cast<std::size_t>(o.sparsity / 2);
	const CurveStats c = curve_stats(r.coarse), s = curve_stats(r.rss), f = curve_stats(r.full);
	std::vector<double> diff;
	for (std::size_t t = 0; t < r.coarse.size(); ++t) diff.push_back(r.coarse[t][n] - r.rss[t][n]);
	const double se = paired_stderr(diff);
	out.pass = f.mean[n] <= s.mean[n] && s.mean[n] < c.mean[n] && c.mean[n] - s.mean[n] > 3.0 * se;
	out.detail = "full " + fmt(f.mean[n]) + ", rss " + fmt(s.mean[n]) + ", coarse " + fmt(c.mean[n]) +
	             ", (coarse-rss)/se " + fmt((c.mean[n] - s.mean[n]) / se, 3);
	return out;
}

// 6: random-dictionary decay at 128 x 256, 1000 runs.
Outcome omp_random_decay() {
	Outcome out;
	OmpRandomOptions o;
	const OmpRandomResult r = run_omp_random(o);
	const std::size_t last = static_cast<std::size_t>(o.components);
	const auto coarse_omp = curve_stats(r.coarse_omp).mean, full_omp = curve_stats(r.full_omp).mean,
	           rss_omp = curve_stats(r.rss_omp).mean, coarse_mp = curve_stats(r.coarse_mp).mean,
	           rss_mp = curve_stats(r.rss_mp).mean;
	bool mp_better = true;
	for (std::size_t n = 32; n < rss_mp.size(); ++n) mp_better = mp_better && rss_mp[n] < coarse_mp[n];
	const double plateau = coarse_omp[last] / full_omp[last];
	const double band = rss_omp[last] / full_omp[last];
	out.pass = plateau >= 10.0 && band <= 3.0 && mp_better;
	out.detail = "n=" + std::to_string(last) + ": coarse/full OMP " + fmt(plateau) + ", rss/full OMP " + fmt(band) +
	             ", rss MP below coarse MP for n>=32: " + (mp_better ? "yes" : "no");
	return out;
}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
	std::uint64_t h = 14695981039346656037ULL;
	for (const std::uint8_t b : bytes) {
		h ^= b;
		h *= 1099511628211ULL;
	}
	return h;
}

// 7: bitstream round trips and the recorded fingerprint.
Outcome codec_roundtrip() {
	Outcome out;
	int failures = 0;
	const SequenceKind kinds[] = {SequenceKind::Fixed, SequenceKind::Random, SequenceKind::Step, SequenceKind::Jump};
	const Variant variants[] = {Variant::MP, Variant::OMP, Variant::LoMP};
	for (int t = 0; t < 50; ++t) {
		auto rng = Xoshiro256::substream(77, static_cast<std::uint64_t>(t), 0);
		PursuitConfig cfg;
		cfg.dict = DictConfig{{32, 128, 512}, 2048, Window::Sine, Family::Mdct};
		cfg.sequence = SequenceSpec{kinds[t % 4], rng.next(), 1 + static_cast<std::uint32_t>(rng.below(3)),
		                            1 + static_cast<std::uint32_t>(rng.below(4))};
		cfg.variant = variants[t % 3];
		cfg.stop.max_atoms = 1 + rng.below(120);
		const auto f = oracle::gaussian_vector(2048, rng);
		const Approximant a = run(Signal(f), cfg);
		const EncodeResult r = encode(a, CodecConfig{cfg.dict, cfg.sequence, 4 + t % 12, 32000}, f);
		const DecodedStream d = decode(r.bytes);
		bool ok = r.cost.total_bits() == r.bytes.size() * 8 && d.samples == r.reconstruction && encode(d) == r.bytes &&
		          d.entries.size() == a.size() && srr(f, d.samples) == r.snr_db;
		for (std::size_t i = 0; ok && i < a.size(); ++i) ok = d.entries[i].param == a.entries[i].param;
		failures += !ok;
	}
	const Signal f = synthetic_audio(1, SyntheticAudioOptions{.length = 8192});
	PursuitConfig cfg;
	cfg.dict = DictConfig{{128, 1024, 8192}, 8192, Window::Sine, Family::Mdct};
	cfg.sequence = SequenceSpec{SequenceKind::Random, 1, 1, 1};
	cfg.stop.target_srr_db = 10.0;
	cfg.stop.max_atoms = 5000;
	const EncodeResult r = encode(run(f, cfg), CodecConfig{cfg.dict, cfg.sequence, 8, 32000}, f.samples());
	const std::uint64_t hash = fnv1a(r.bytes);
	out.pass = failures == 0 && hash == 0x8f8ad7c63511d71cULL;
	std::ostringstream os;
	os << failures << " of 50 round trips failed, stream hash " << std::hex << std::setw(16) << std::setfill('0') << hash;
	out.detail = os.str();
	return out;
}

// 8: coding dominance on synthetic audio with three MDCT scales.
Outcome coding_dominance() {
	Outcome out;
	CodingOptions o;
	o.srr_targets = {10.0};
	const auto rows = run_coding(o);
	std::vector<double> atom_diff, bit_diff;
	double coarse_atoms = 0.0, rss_atoms = 0.0, lomp_atoms = 0.0, rss_bits = 0.0, lomp_bits = 0.0, coarse_bits = 0.0;
	bool reached = true;
	for (int t = 0; t < o.trials; ++t) {
		const CodingRow *coarse = nullptr, *lomp = nullptr, *rss = nullptr;
		for (const auto& r : rows) {
			if (r.trial != t) continue;
			reached = reached && r.reached;
			if (r.algorithm == "coarse_mp") coarse = &r;
			if (r.algorithm == "lomp") lomp = &r;
			if (r.algorithm == "rss_mp") rss = &r;
		}
		atom_diff.push_back(static_cast<double>(coarse->atoms) - static_cast<double>(rss->atoms));
		bit_diff.push_back(static_cast<double>(lomp->bits) - static_cast<double>(rss->bits));
		coarse_atoms += static_cast<double>(coarse->atoms) / o.trials;
		rss_atoms += static_cast<double>(rss->atoms) / o.trials;
		lomp_atoms += static_cast<double>(lomp->atoms) / o.trials;
		coarse_bits += static_cast<double>(coarse->bits) / o.trials;
		rss_bits += static_cast<double>(rss->bits) / o.trials;
		lomp_bits += static_cast<double>(lomp->bits) / o.trials;
	}
	const double atom_se = paired_stderr(atom_diff);
	out.pass = reached && coarse_atoms - rss_atoms > 3.0 * atom_se && rss_bits < lomp_bits;
	out.detail = "atoms coarse/lomp/rss " + fmt(coarse_atoms) + "/" + fmt(lomp_atoms) + "/" + fmt(rss_atoms) + " (" +
	             fmt((coarse_atoms - rss_atoms) / atom_se, 3) + " se), bits coarse/lomp/rss " + fmt(coarse_bits, 6) +
	             "/" + fmt(lomp_bits, 6) + "/" + fmt(rss_bits, 6);
	return out;
}

// 9: runtime falls and bits stay bounded as the frame subsampling grows.
Outcome tradeoff_trend() {
	Outcome out;
	TradeoffOptions o;
	const auto rows = run_tradeoff(o);
	int inversions = 0;
	for (std::size_t i = 2; i < rows.size(); ++i) inversions += rows[i].mean_seconds >= rows[i - 1].mean_seconds;
	const auto bits = [&](int d) {
		for (const auto& r : rows) {
			if (r.factor == d) return r.mean_bits;
		}
		return 0.0;
	};
	const double ratio = bits(8) / bits(1);
	out.pass = inversions <= 1 && ratio <= 2.0;
	std::ostringstream os;
	os << "seconds";
	for (const auto& r : rows) os << ' ' << (r.factor == 0 ? "ref" : std::to_string(r.factor)) << ':' << fmt(r.mean_seconds, 3);
	os << ", inversions " << inversions << ", bits d=8/d=1 " << fmt(ratio);
	out.detail = os.str();
	return out;
}

std::string run_cli_hash() {
	const std::string cmd = std::string("\"") + RSS_CLI_PATH + "\" shift-hash --seq random --seed 1";
	FILE* pipe = popen(cmd.c_str(), "r");
	if (!pipe) return "";
	std::string text;
	std::array<char, 128> buf{};
	while (fgets(buf.data(), static_cast<int>(buf.size()), pipe)) text += buf.data();
	const int status = pclose(pipe);
	while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
	return status == 0 ? text : "";
}

// 10: 10^6 shifts hashed by two separate processes and in-process.
Outcome sequence_reproducibility() {
	Outcome out;
	const std::string a = run_cli_hash();
	const std::string b = run_cli_hash();
	const DictConfig dict{{128, 1024, 8192}, 32768, Window::Sine, Family::Mdct};
	std::ostringstream local;
	local << std::hex << std::setw(16) << std::setfill('0')
	      << shift_sequence_hash(SequenceSpec{SequenceKind::Random, 1, 1, 1}, dict, 1000000);
	out.pass = !a.empty() && a == b && a == local.str() && a == "a279ad57cf0d32b0";
	out.detail = "process 1 " + a + ", process 2 " + b + ", in-process " + local.str() + ", recorded a279ad57cf0d32b0";
	return out;
}

}  // namespace

int main(int argc, char** argv) {
	const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
	    {"energy conservation", energy_conservation},
	    {"OMP orthogonality", omp_orthogonality},
	    {"order statistics closed forms vs Monte Carlo", orderstats_closed_forms},
	    {"redraw vs fixed orderings", orderstats_orderings},
	    {"toy Gabor decay ordering", toy_gabor_ordering},
	    {"random dictionary OMP decay", omp_random_decay},
	    {"codec round trip", codec_roundtrip},
	    {"coding dominance", coding_dominance},
	    {"subsampling tradeoff", tradeoff_trend},
	    {"sequence reproducibility", sequence_reproducibility},
	};
	std::set<int> selected;
	for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
	int failed = 0;
	for (std::size_t i = 0; i < criteria.size(); ++i) {
		const int id = static_cast<int>(i) + 1;
		if (!selected.empty() && !selected.count(id)) continue;
		const auto start = std::chrono::steady_clock::now();
		Outcome o;
		try {
			o = criteria[i].second();
		} catch (const std::exception& e) {
			o = Outcome{false, std::string("exception: ") + e.what()};
		}
		const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
		std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << "): " << o.detail
		          << " [" << fmt(secs, 3) << " s]" << std::endl;
		failed += !o.pass;
	}
	return failed == 0 ? 0 : 1;
}
