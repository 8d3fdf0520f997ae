// rssmp: experiments and codec front end.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "rss/codec.hpp"
#include "rss/experiments.hpp"
#include "rss/orderstats.hpp"
#include "rss/pursuit.hpp"
#include "rss/sequence.hpp"
#include "rss/signal.hpp"

namespace {

using namespace rss;

class Output {
public:
	explicit Output(const std::string& path) {
		if (path.empty() || path == "-") return;
		file_ = std::make_unique<std::ofstream>(path);
		if (!*file_) throw std::runtime_error("cannot open " + path);
	}
	std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
	std::unique_ptr<std::ofstream> file_;
};

SequenceKind to_kind(const std::string& s) {
	return parse_sequence_kind(s);
}

std::string hex64(std::uint64_t v) {
	std::ostringstream os;
	os << std::hex << std::setw(16) << std::setfill('0') << v;
	return os.str();
}

struct CodecFlags {
	double srr = 10.0;
	int bits_weight = 8;
	std::string seq = "random";
	std::uint64_t seed = 1;
	std::vector<int> scales{128, 1024, 8192};
	std::uint32_t subsample = 1;
	std::uint32_t refresh = 1;
};

void add_codec_flags(CLI::App* app, CodecFlags& f) {
	app->add_option("--srr", f.srr, "Target SRR in dB")->capture_default_str();
	app->add_option("--bits-weight", f.bits_weight, "Weight quantizer bits")->check(CLI::Range(2, 24))->capture_default_str();
	app->add_option("--seq", f.seq, "Subdictionary sequence")
	    ->check(CLI::IsMember({"fixed", "random", "step", "jump"}))
	    ->capture_default_str();
	app->add_option("--seed", f.seed, "Sequence seed")->capture_default_str();
	app->add_option("--scales", f.scales, "Window lengths in samples")->delimiter(',')->capture_default_str();
	app->add_option("--subsample", f.subsample, "Frame subsampling factor d")->check(CLI::Range(1, 65535))->capture_default_str();
	app->add_option("--refresh", f.refresh, "Iterations per subdictionary J")->check(CLI::Range(1, 65535))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
	CLI::App app{"Matching pursuit over sequences of time-frequency subdictionaries"};
	app.require_subcommand(1);

	// toy-gabor
	ToyGaborOptions toy;
	std::string toy_out = "-";
	bool toy_full = false;
	std::uint64_t toy_signal_seed = 0;
	auto* toy_cmd = app.add_subcommand("toy-gabor", "Decay of Coarse, RSS and Full MP on sparse Gabor signals");
	toy_cmd->add_option("--seed", toy.seed)->capture_default_str();
	auto* toy_sig = toy_cmd->add_option("--signal-seed", toy_signal_seed, "Seed of the synthetic signals (default: --seed)");
	toy_cmd->add_option("--trials", toy.trials)->capture_default_str();
	toy_cmd->add_option("--N", toy.length, "Signal length")->capture_default_str();
	toy_cmd->add_option("--m", toy.sparsity, "Atoms per signal")->capture_default_str();
	toy_cmd->add_option("--scales", toy.scales)->delimiter(',')->capture_default_str();
	toy_cmd->add_option("--iterations", toy.iterations, "Iterations (default: m)");
	toy_cmd->add_option("--threads", toy.threads, "Worker threads (0: all cores)");
	toy_cmd->add_flag("--full-scale", toy_full, "N=10000, m=300, 1000 trials");
	toy_cmd->add_option("--out", toy_out, "CSV path or - for stdout")->capture_default_str();

	// orderstats
	OrderStatsOptions os;
	std::string os_out = ".";
	auto* os_cmd = app.add_subcommand("orderstats", "Order-statistics predictors against Monte Carlo");
	os_cmd->add_option("--dist", os.distribution, "uniform, halfnormal[:sigma] or exponential[:mu]")->capture_default_str();
	os_cmd->add_option("--M", os.M)->capture_default_str();
	os_cmd->add_option("--iterations", os.iterations, "Iterations (default: M)");
	os_cmd->add_option("--trials", os.trials)->capture_default_str();
	os_cmd->add_option("--seed", os.seed)->capture_default_str();
	os_cmd->add_option("--energy", os.energy, "|f|^2 (default: M E[Z^2])");
	os_cmd->add_option("--threads", os.threads);
	os_cmd->add_option("--out", os_out, "Output directory for fixed.csv, redraw.csv, pdf.csv")->capture_default_str();

	// omp-random
	OmpRandomOptions omp;
	std::string omp_out = "-";
	auto* omp_cmd = app.add_subcommand("omp-random", "MP and OMP on random 128x256 dictionaries");
	omp_cmd->add_option("--seed", omp.seed)->capture_default_str();
	omp_cmd->add_option("--trials", omp.trials)->capture_default_str();
	omp_cmd->add_option("--iterations", omp.iterations)->capture_default_str();
	omp_cmd->add_option("--threads", omp.threads);
	omp_cmd->add_option("--out", omp_out)->capture_default_str();

	// coding
	CodingOptions coding;
	CodecFlags coding_flags;
	std::string coding_out = "-";
	std::vector<double> coding_targets{5, 10, 15, 20};
	auto* coding_cmd = app.add_subcommand("coding", "Atom counts and bit costs of Coarse MP, LoMP and RSS MP");
	add_codec_flags(coding_cmd, coding_flags);
	coding_cmd->remove_option(coding_cmd->get_option("--srr"));
	coding_cmd->add_option("--srr", coding_targets, "SRR targets in dB")->delimiter(',')->capture_default_str();
	coding_cmd->add_option("--trials", coding.trials)->capture_default_str();
	coding_cmd->add_option("--wav", coding.source.wav_path, "Input WAV (default: synthetic audio)");
	coding_cmd->add_flag("--synthetic", "Use the built-in synthetic audio (default)");
	coding_cmd->add_option("--length", coding.source.length, "Samples per trial signal")->capture_default_str();
	coding_cmd->add_option("--max-atoms", coding.max_atoms)->capture_default_str();
	coding_cmd->add_option("--threads", coding.threads);
	coding_cmd->add_option("--out", coding_out)->capture_default_str();

	// tradeoff
	TradeoffOptions trade;
	std::string trade_out = "-";
	bool trade_no_timing = false;
	auto* trade_cmd = app.add_subcommand("tradeoff", "Bits and runtime of RSS MP against the subsampling factor");
	trade_cmd->add_option("--seed", trade.seed)->capture_default_str();
	trade_cmd->add_option("--trials", trade.trials)->capture_default_str();
	trade_cmd->add_option("--factors", trade.factors)->delimiter(',')->capture_default_str();
	trade_cmd->add_option("--scales", trade.scales)->delimiter(',')->capture_default_str();
	trade_cmd->add_option("--srr", trade.target_srr_db)->capture_default_str();
	trade_cmd->add_option("--bits-weight", trade.weight_bits)->check(CLI::Range(2, 24))->capture_default_str();
	trade_cmd->add_option("--wav", trade.source.wav_path);
	trade_cmd->add_option("--length", trade.source.length)->capture_default_str();
	trade_cmd->add_flag("--no-timing", trade_no_timing, "Write zero timings for reproducible output");
	trade_cmd->add_option("--out", trade_out)->capture_default_str();

	// encode
	CodecFlags enc;
	std::string enc_in, enc_out, enc_variant = "mp", enc_trace;
	std::size_t enc_max_atoms = 100000;
	auto* enc_cmd = app.add_subcommand("encode", "Decompose a WAV file and write a bitstream");
	enc_cmd->add_option("input", enc_in, "Input WAV")->required();
	enc_cmd->add_option("--out,-o", enc_out, "Output bitstream")->required();
	add_codec_flags(enc_cmd, enc);
	enc_cmd->add_option("--variant", enc_variant)->check(CLI::IsMember({"mp", "omp", "lomp"}))->capture_default_str();
	enc_cmd->add_option("--max-atoms", enc_max_atoms)->capture_default_str();
	enc_cmd->add_option("--trace", enc_trace, "Write the per-iteration trace CSV here");

	// decode
	std::string dec_in, dec_out;
	bool dec_pcm16 = false;
	auto* dec_cmd = app.add_subcommand("decode", "Reconstruct a WAV file from a bitstream");
	dec_cmd->add_option("input", dec_in, "Input bitstream")->required();
	dec_cmd->add_option("--out,-o", dec_out, "Output WAV")->required();
	dec_cmd->add_flag("--pcm16", dec_pcm16, "Write 16-bit PCM instead of float32");

	// shift-hash
	std::string hash_seq = "random";
	std::uint64_t hash_seed = 1;
	std::vector<int> hash_scales{128, 1024, 8192};
	int hash_n = 32768;
	std::size_t hash_iters = 1000000;
	std::uint32_t hash_refresh = 1, hash_subsample = 1;
	auto* hash_cmd = app.add_subcommand("shift-hash", "Fingerprint of a shift sequence");
	hash_cmd->add_option("--seq", hash_seq)->check(CLI::IsMember({"fixed", "random", "step", "jump"}))->capture_default_str();
	hash_cmd->add_option("--seed", hash_seed)->capture_default_str();
	hash_cmd->add_option("--scales", hash_scales)->delimiter(',')->capture_default_str();
	hash_cmd->add_option("--N", hash_n)->capture_default_str();
	hash_cmd->add_option("--iterations", hash_iters)->capture_default_str();
	hash_cmd->add_option("--refresh", hash_refresh)->capture_default_str();
	hash_cmd->add_option("--subsample", hash_subsample)->capture_default_str();

	CLI11_PARSE(app, argc, argv);

	try {
		if (toy_cmd->parsed()) {
			if (toy_full) {
				const auto p = ToyGaborOptions::full_scale();
				toy.length = p.length;
				toy.sparsity = p.sparsity;
				toy.trials = toy_cmd->count("--trials") ? toy.trials : p.trials;
			}
			if (toy_sig->count()) toy.signal_seed = toy_signal_seed;
			Output out(toy_out);
			write_toy_gabor_csv(out.stream(), run_toy_gabor(toy));
		} else if (os_cmd->parsed()) {
			const auto result = run_orderstats(os);
			std::filesystem::create_directories(os_out);
			const std::filesystem::path dir(os_out);
			std::ofstream fixed(dir / "fixed.csv"), redraw(dir / "redraw.csv"), pdf(dir / "pdf.csv");
			write_orderstats_csv(fixed, result, Strategy::Fixed);
			write_orderstats_csv(redraw, result, Strategy::Redraw);
			write_orderstats_pdf_csv(pdf, result);
			if (!fixed || !redraw || !pdf) throw std::runtime_error("cannot write into " + os_out);
		} else if (omp_cmd->parsed()) {
			Output out(omp_out);
			write_omp_random_csv(out.stream(), run_omp_random(omp));
		} else if (coding_cmd->parsed()) {
			coding.seed = coding_flags.seed;
			coding.scales = coding_flags.scales;
			coding.srr_targets = coding_targets;
			coding.weight_bits = coding_flags.bits_weight;
			coding.sequence = to_kind(coding_flags.seq);
			coding.refresh = coding_flags.refresh;
			coding.subsample = coding_flags.subsample;
			Output out(coding_out);
			write_coding_csv(out.stream(), coding, run_coding(coding));
		} else if (trade_cmd->parsed()) {
			trade.timing = !trade_no_timing;
			Output out(trade_out);
			write_tradeoff_csv(out.stream(), trade, run_tradeoff(trade));
		} else if (enc_cmd->parsed()) {
			const Signal f = load_wav(enc_in);
			PursuitConfig cfg;
			cfg.variant = parse_variant(enc_variant);
			cfg.dict = DictConfig{enc.scales, static_cast<int>(f.length()), Window::Sine, Family::Mdct};
			cfg.sequence = SequenceSpec{to_kind(enc.seq), enc.seed, enc.refresh, enc.subsample};
			if (cfg.variant == Variant::LoMP && cfg.sequence.kind != SequenceKind::Fixed) {
				std::cerr << "warning: LoMP refines atoms of a sequential subdictionary\n";
			}
			cfg.stop.target_srr_db = enc.srr;
			cfg.stop.max_atoms = cfg.variant == Variant::OMP ? std::min(enc_max_atoms, f.length()) : enc_max_atoms;
			const Approximant a = run(f, cfg);
			const auto result = encode(a, CodecConfig{cfg.dict, cfg.sequence, enc.bits_weight, f.sample_rate()}, f.samples());
			write_file(enc_out, result.bytes);
			if (!enc_trace.empty()) {
				Output t(enc_trace);
				write_trace_csv(t.stream(), a, &cfg.dict);
			}
			std::cout << "atoms=" << a.size() << " srr_db=" << a.srr_db() << " snr_db=" << result.snr_db
			          << " stop=" << to_string(a.stop_reason) << (a.budget_exhausted ? " budget_exhausted" : "") << '\n'
			          << "bits total=" << result.cost.total_bits() << " header=" << result.cost.header_bits
			          << " index=" << result.cost.index_bits << " shift=" << result.cost.shift_bits
			          << " weight=" << result.cost.weight_bits << " padding=" << result.cost.padding_bits
			          << " clamped=" << result.clamp_count << '\n';
		} else if (dec_cmd->parsed()) {
			const auto bytes = read_file(dec_in);
			const DecodedStream s = decode(bytes);
			save_wav(dec_out, s.signal(), dec_pcm16 ? WavEncoding::Pcm16 : WavEncoding::Float32);
			std::cout << "atoms=" << s.entries.size() << " N=" << s.header.signal_length
			          << " rate=" << s.header.sample_rate << " dict=" << s.header.dict.to_text() << '\n';
		} else if (hash_cmd->parsed()) {
			const DictConfig dict{hash_scales, hash_n, Window::Sine, Family::Mdct};
			const SequenceSpec spec{to_kind(hash_seq), hash_seed, hash_refresh, hash_subsample};
			std::cout << hex64(shift_sequence_hash(spec, dict, hash_iters)) << '\n';
		}
	} catch (const DecodeError& e) {
		std::cerr << "decode error: " << e.what() << '\n';
		return 3;
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << '\n';
		return 1;
	}
	return 0;
}
