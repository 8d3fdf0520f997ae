#include <doctest.h>

#include <sstream>
#include <string>

#include "rss/experiments.hpp"

using namespace rss;

namespace {

std::string toy_csv(const ToyGaborOptions& o) {
	std::ostringstream out;
	write_toy_gabor_csv(out, run_toy_gabor(o));
	return out.str();
}

ToyGaborOptions small_toy() {
	ToyGaborOptions o;
	o.length = 512;
	o.sparsity = 12;
	o.scales = {16, 64};
	o.trials = 4;
	return o;
}

}  // namespace

TEST_SUITE("cli-experiments") {
	TEST_CASE("curve statistics") {
		const CurveStats s = curve_stats({{1.0, 2.0}, {3.0, 2.0}, {5.0, 2.0}});
		CHECK(s.mean == std::vector<double>{3.0, 2.0});
		CHECK(s.variance == std::vector<double>{4.0, 0.0});
		std::ostringstream out;
		write_config_header(out, {{"seed", "4"}, {"dict", "N=8"}});
		CHECK(out.str() == "# seed=4\n# dict=N=8\n");
	}

	TEST_CASE("a one-atom signal is recovered by the full dictionary") {
		ToyGaborOptions o = small_toy();
		o.sparsity = 1;
		o.trials = 1;
		const ToyGaborResult r = run_toy_gabor(o);
		REQUIRE(r.full.size() == 1);
		REQUIRE(r.full[0].size() == 2);
		CHECK(r.full[0][0] == 1.0);
		CHECK(r.full[0][1] <= 1e-10);
	}

	TEST_CASE("toy decay is deterministic and the coarse curve ignores the sequence seed") {
		ToyGaborOptions a = small_toy();
		a.signal_seed = 5;
		a.threads = 1;
		ToyGaborOptions b = a;
		b.threads = 3;
		const std::string csv = toy_csv(a);
		CHECK(csv == toy_csv(b));
		CHECK(csv.rfind("# experiment=toy-gabor\n", 0) == 0);
		CHECK(csv.find("\nn,coarse_mean,coarse_var,rss_mean,rss_var,full_mean,full_var\n") != std::string::npos);

		ToyGaborOptions c = a;
		c.seed = 99;
		const ToyGaborResult ra = run_toy_gabor(a);
		const ToyGaborResult rc = run_toy_gabor(c);
		CHECK(ra.coarse == rc.coarse);
		CHECK(ra.full == rc.full);
		CHECK(ra.rss != rc.rss);
		for (const auto& row : ra.rss) {
			for (std::size_t n = 1; n < row.size(); ++n) REQUIRE(row[n] <= row[n - 1]);
		}
	}

	TEST_CASE("MP curves lie above OMP curves in the mean") {
		OmpRandomOptions o;
		o.trials = 12;
		o.iterations = 64;
		const OmpRandomResult r = run_omp_random(o);
		const auto pairs = {std::pair{&r.coarse_mp, &r.coarse_omp}, {&r.rss_mp, &r.rss_omp}, {&r.full_mp, &r.full_omp}};
		for (const auto& [mp, omp] : pairs) {
			const CurveStats smp = curve_stats(*mp);
			const CurveStats somp = curve_stats(*omp);
			for (std::size_t n = 0; n < smp.mean.size(); ++n) REQUIRE(smp.mean[n] >= somp.mean[n] - 1e-12);
		}
		std::ostringstream one, two;
		write_omp_random_csv(one, r);
		write_omp_random_csv(two, run_omp_random(o));
		CHECK(one.str() == two.str());
	}

	TEST_CASE("tradeoff at d = 1 reproduces the coding point") {
		CodingOptions coding;
		coding.seed = 4;
		coding.trials = 2;
		coding.source.length = 8192;
		coding.scales = {64, 512, 2048};
		coding.srr_targets = {10.0};
		TradeoffOptions trade;
		trade.seed = 4;
		trade.trials = 2;
		trade.source.length = 8192;
		trade.scales = coding.scales;
		trade.factors = {1};
		trade.timing = false;

		const auto rows = run_coding(coding);
		double bits = 0.0, atoms = 0.0;
		for (const auto& row : rows) {
			if (row.algorithm == "rss_mp") {
				bits += static_cast<double>(row.bits) / 2.0;
				atoms += static_cast<double>(row.atoms) / 2.0;
			}
		}
		const auto trade_rows = run_tradeoff(trade);
		REQUIRE(trade_rows.size() == 2);
		CHECK(trade_rows[0].factor == 0);
		CHECK(trade_rows[1].factor == 1);
		CHECK(trade_rows[1].mean_bits == bits);
		CHECK(trade_rows[1].mean_atoms == atoms);
		CHECK(trade_rows[1].mean_seconds == 0.0);

		std::ostringstream a, b;
		write_tradeoff_csv(a, trade, trade_rows);
		write_tradeoff_csv(b, trade, run_tradeoff(trade));
		CHECK(a.str() == b.str());
		std::ostringstream c;
		write_coding_csv(c, coding, rows);
		CHECK(c.str().find("trial,algorithm,target_srr_db,atoms,bits,snr_db,reached\n") != std::string::npos);
	}

	TEST_CASE("order statistics experiment output") {
		OrderStatsOptions o;
		o.M = 20;
		o.trials = 2000;
		o.pdf_points = 11;
		const OrderStatsResult r = run_orderstats(o);
		CHECK(r.energy == doctest::Approx(20.0 / 3.0));
		CHECK(r.fixed.size() == 21);
		CHECK(r.redraw.size() == 21);
		CHECK(r.pdf.size() == 11);
		std::ostringstream fixed, pdf;
		write_orderstats_csv(fixed, r, Strategy::Fixed);
		write_orderstats_pdf_csv(pdf, r);
		CHECK(fixed.str().find("n,predicted_mean,predicted_var,mc_mean,mc_var,mc_stderr,clamp_count\n") != std::string::npos);
		CHECK(pdf.str().find("z,pdf_max,pdf_median\n") != std::string::npos);
		CHECK(fixed.str().find("# distribution=uniform\n") != std::string::npos);
		std::ostringstream again;
		write_orderstats_csv(again, run_orderstats(o), Strategy::Fixed);
		CHECK(again.str() == fixed.str());
	}
}
