#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "rss/orderstats.hpp"

using namespace rss;

namespace {

const DistributionModel kLaws[] = {DistributionModel::uniform(), DistributionModel::half_normal(1.0),
                                   DistributionModel::exponential(1.0)};

// E[U_{i:n}^m] for uniforms, from the Beta(i, n - i + 1) law.
double beta_moment(int i, int n, int m) {
	double r = 1.0;
	for (int j = 0; j < m; ++j) r *= static_cast<double>(i + j) / (n + 1 + j);
	return r;
}

// Upper limit where the tail of every tested order statistic is negligible.
double upper(const DistributionModel& d) {
	return d.kind() == DistributionKind::Uniform ? 1.0 : d.kind() == DistributionKind::HalfNormal ? 9.0 : 45.0;
}

double simpson_moment(const DistributionModel& d, int i, int n, int m) {
	return oracle::simpson([&](double z) { return std::pow(z, m) * order_pdf(d, i, n, z); }, 0.0, upper(d), 40000);
}

}  // namespace

TEST_SUITE("orderstats") {
	TEST_CASE("single draws and uniform maxima") {
		for (const auto& d : kLaws) {
			for (const double z : {0.05, 0.3, 0.9}) CHECK(order_pdf(d, 1, 1, z) == doctest::Approx(d.pdf(z)).epsilon(1e-12));
			CHECK(order_moment(d, 1, 1, 1) == doctest::Approx(d.raw_moment(1)).epsilon(1e-9));
			CHECK(order_moment(d, 1, 1, 2) == doctest::Approx(d.raw_moment(2)).epsilon(1e-9));
		}
		CHECK(order_moment(DistributionModel::exponential(1.0), 1, 1, 1) == doctest::Approx(1.0).epsilon(1e-10));
		const auto u = DistributionModel::uniform();
		for (const int n : {1, 2, 7, 100}) {
			for (const double z : {0.1, 0.5, 0.99}) {
				CHECK(order_pdf(u, n, n, z) == doctest::Approx(n * std::pow(z, n - 1)).epsilon(1e-11));
			}
		}
		CHECK(order_pdf(u, 3, 5, 1.5) == 0.0);
		CHECK(order_pdf(u, 3, 5, -0.1) == 0.0);
	}

	TEST_CASE("order densities integrate to one") {
		for (const auto& d : kLaws) {
			for (const auto& [i, n] : {std::pair{1, 5}, {3, 5}, {5, 5}, {1, 100}, {50, 100}, {100, 100}}) {
				const double lib = integrate_order(d, i, n, [](double) { return 1.0; });
				CHECK(lib == doctest::Approx(1.0).epsilon(1e-9));
				if (n <= 5) CHECK(oracle::simpson([&](double z) { return order_pdf(d, i, n, z); }, 0.0, upper(d), 40000) ==
				                  doctest::Approx(1.0).epsilon(1e-8));
			}
		}
	}

	TEST_CASE("uniform moments match the Beta closed form") {
		const auto u = DistributionModel::uniform();
		CHECK(order_moment(u, 100, 100, 1) == doctest::Approx(100.0 / 101.0).epsilon(1e-15));
		CHECK(order_moment(u, 100, 100, 2) == doctest::Approx(100.0 / 102.0).epsilon(1e-15));
		CHECK(std::abs(order_moment_quadrature(u, 100, 100, 1) - 100.0 / 101.0) <= 1e-8);
		CHECK(std::abs(order_moment_quadrature(u, 100, 100, 2) - 100.0 / 102.0) <= 1e-8);
		for (const auto& [i, n] : {std::pair{1, 1}, {1, 10}, {4, 9}, {37, 100}, {99, 100}}) {
			for (int m = 1; m <= 4; ++m) {
				REQUIRE(order_moment(u, i, n, m) == doctest::Approx(beta_moment(i, n, m)).epsilon(1e-13));
				REQUIRE(std::abs(order_moment_quadrature(u, i, n, m) - beta_moment(i, n, m)) <= 1e-8);
			}
		}
	}

	TEST_CASE("quadrature agrees with Simpson for other laws") {
		for (const auto& d : {DistributionModel::half_normal(1.0), DistributionModel::exponential(1.0)}) {
			for (const auto& [i, n] : {std::pair{1, 3}, {3, 5}, {20, 20}, {10, 20}}) {
				for (int m = 1; m <= 4; m += 1) {
					REQUIRE(order_moment(d, i, n, m) == doctest::Approx(simpson_moment(d, i, n, m)).epsilon(1e-8));
				}
			}
		}
	}

	TEST_CASE("means increase strictly with the rank") {
		for (const auto& d : kLaws) {
			for (int n = 2; n <= 20; ++n) {
				double prev = order_moment(d, 1, n, 1);
				for (int i = 2; i <= n; ++i) {
					const double cur = order_moment(d, i, n, 1);
					REQUIRE(cur > prev);
					prev = cur;
				}
			}
		}
	}

	TEST_CASE("fixed predictor") {
		const auto u = DistributionModel::uniform();
		const Prediction p = predict_fixed(u, 100, 3, 1.0);
		REQUIRE(p.values.size() == 4);
		CHECK(p.values[0] == 1.0);
		CHECK(p.values[1] == doctest::Approx(1.0 - 100.0 / 102.0).epsilon(1e-13));
		// With unit energy the second step would already go negative.
		CHECK(1.0 - 100.0 / 102.0 - beta_moment(99, 100, 2) < 0.0);
		CHECK(p.truncated);
		CHECK(p.values[2] == 0.0);
		CHECK(p.values[3] == 0.0);

		const double e = default_energy(u, 100);
		CHECK(e == doctest::Approx(100.0 / 3.0).epsilon(1e-14));
		const Prediction full = predict_fixed(u, 100, 100, e);
		CHECK(std::abs(full.values[100]) <= 1e-9 * e);
		CHECK_FALSE(predict_fixed(u, 100, 99, e).truncated);
		CHECK_THROWS_AS(predict_fixed(u, 10, 11, 1.0), std::invalid_argument);
	}

	TEST_CASE("redraw predictor") {
		for (const auto& d : kLaws) {
			const double e = default_energy(d, 100);
			const double mu2 = order_moment(d, 100, 100, 2);
			const double mu4 = order_moment(d, 100, 100, 4);
			const Prediction r = predict_redraw(d, 100, 50, e);
			const Prediction f = predict_fixed(d, 100, 50, e);
			const Prediction raw = predict_redraw(d, 100, 20, e, false);
			CHECK(r.values[0] == doctest::Approx(e).epsilon(1e-12));
			CHECK(raw.values[1] == doctest::Approx(f.values[1]).epsilon(1e-9));
			CHECK(raw.values[1] == doctest::Approx(e - mu2).epsilon(1e-9));
			CHECK(raw.values[2] == doctest::Approx(e - 2.0 * mu2 + mu4 / e).epsilon(1e-9));
			// Clamping only matters when Z^2_{M:M} can exceed E.
			CHECK(r.values[1] == doctest::Approx(f.values[1]).epsilon(1e-4));
			// The unclamped exponential model diverges past n = 14.
			const int last = d.kind() == DistributionKind::Exponential ? 12 : 20;
			for (int n = 0; n <= last; ++n) {
				REQUIRE(predict_redraw_binomial(d, 100, n, e) == doctest::Approx(raw.values[static_cast<std::size_t>(n)]).epsilon(1e-6));
			}
			for (std::size_t n = 1; n < r.values.size(); ++n) {
				REQUIRE(r.values[n] <= r.values[n - 1]);
				REQUIRE(f.values[n] <= f.values[n - 1]);
			}
		}
	}

	TEST_CASE("predicted orderings at n = M/2") {
		const auto u = DistributionModel::uniform();
		CHECK(predict_fixed(u, 100, 50, default_energy(u, 100)).values[50] <
		      predict_redraw(u, 100, 50, default_energy(u, 100)).values[50]);
		for (const auto& d : {DistributionModel::half_normal(1.0), DistributionModel::exponential(1.0)}) {
			const double e = default_energy(d, 100);
			CHECK(predict_redraw(d, 100, 50, e).values[50] < predict_fixed(d, 100, 50, e).values[50]);
		}
	}

	TEST_CASE("variance traces") {
		// Laws whose maximum stays below sqrt(E), where the clamp is inactive.
		for (const auto& d : {DistributionModel::uniform(), DistributionModel::half_normal(1.0)}) {
			const double e = default_energy(d, 100);
			const VarianceTrace v = predict_variance(d, 100, 5, Strategy::Redraw, e);
			CHECK(v.variance[0] == 0.0);
			const double mu2 = order_moment(d, 100, 100, 2);
			const double mu4 = order_moment(d, 100, 100, 4);
			CHECK(v.variance[1] == doctest::Approx(mu4 - mu2 * mu2).epsilon(1e-7));
		}
		const auto u = DistributionModel::uniform();
		const double e = default_energy(u, 100);
		const VarianceTrace a = predict_variance(u, 100, 10, Strategy::Fixed, e, 40000, 1);
		const VarianceTrace b = predict_variance(u, 100, 10, Strategy::Fixed, e, 40000, 2);
		CHECK(a.variance[0] == 0.0);
		const double se = std::hypot(a.standard_error[10], b.standard_error[10]);
		CHECK(se > 0.0);
		CHECK(std::abs(a.variance[10] - b.variance[10]) <= 3.0 * se);
	}

	TEST_CASE("greedy simulator") {
		const auto u = DistributionModel::uniform();
		const double e = default_energy(u, 100);
		const SimulationResult fixed = simulate_greedy(u, 100, 50, Strategy::Fixed, 20000, 3, e);
		CHECK(fixed.mean[0] == e);
		CHECK(fixed.variance[0] == 0.0);
		const Prediction p = predict_fixed(u, 100, 50, e);
		for (const std::size_t n : {1u, 10u, 25u, 50u}) {
			CHECK(std::abs(fixed.mean[n] - p.values[n]) <= 3.0 * fixed.mean_stderr[n] + 1e-12);
		}
		const SimulationResult redraw = simulate_greedy(u, 100, 50, Strategy::Redraw, 20000, 3, e);
		const Prediction r = predict_redraw(u, 100, 50, e);
		for (const std::size_t n : {1u, 10u, 25u, 50u}) {
			CHECK(std::abs(redraw.mean[n] - r.values[n]) <= 0.02 * r.values[n]);
		}
		const SimulationResult one = simulate_greedy(u, 100, 20, Strategy::Redraw, 1000, 9, e, 1);
		const SimulationResult three = simulate_greedy(u, 100, 20, Strategy::Redraw, 1000, 9, e, 3);
		CHECK(one.mean == three.mean);
		CHECK(one.variance == three.variance);
		CHECK(one.clamp_count == three.clamp_count);
	}

	TEST_CASE("distribution parsing") {
		CHECK(DistributionModel::parse("uniform").kind() == DistributionKind::Uniform);
		CHECK(DistributionModel::parse("halfnormal:2").parameter() == 2.0);
		CHECK(DistributionModel::parse("exponential").parameter() == 1.0);
		CHECK_THROWS_AS(DistributionModel::parse("cauchy"), std::invalid_argument);
		CHECK_THROWS_AS(DistributionModel::parse("exponential:-1"), std::invalid_argument);
		CHECK_THROWS_AS(order_pdf(DistributionModel::uniform(), 0, 3, 0.5), std::invalid_argument);
	}

	TEST_CASE("quantiles invert the distribution functions") {
		for (const auto& d : kLaws) {
			for (const double p : {1e-6, 0.1, 0.5, 0.9}) {
				CHECK(d.cdf(d.quantile(p)) == doctest::Approx(p).epsilon(1e-10));
				CHECK(d.sf(d.quantile_upper(p)) == doctest::Approx(p).epsilon(1e-10));
			}
		}
	}

	TEST_CASE("orderstats CSV layout") {
		std::ostringstream out;
		const std::vector<OrderStatRow> rows{{0, 1.0, 0.0, 1.0, 0.0, 0.0, 0}};
		write_orderstats_csv(out, rows);
		CHECK(out.str().rfind("n,predicted_mean,predicted_var,mc_mean,mc_var,mc_stderr,clamp_count\n0,1,0,1,0,0,0\n", 0) == 0);
	}
}
