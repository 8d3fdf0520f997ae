#include "rss/orderstats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace rss {

DistributionModel::DistributionModel(DistributionKind kind, double parameter) : kind_(kind), parameter_(parameter) {
	if (!(parameter > 0.0) || !std::isfinite(parameter)) {
		throw std::invalid_argument("distribution parameter must be positive and finite");
	}
}

DistributionModel DistributionModel::uniform() {
	return {DistributionKind::Uniform, 1.0};
}

DistributionModel DistributionModel::half_normal(double sigma) {
	return {DistributionKind::HalfNormal, sigma};
}

DistributionModel DistributionModel::exponential(double mean) {
	return {DistributionKind::Exponential, mean};
}

DistributionModel DistributionModel::parse(std::string_view text) {
	const auto colon = text.find(':');
	const std::string_view head = text.substr(0, colon);
	double param = 1.0;
	if (colon != std::string_view::npos) {
		const std::string tail(text.substr(colon + 1));
		std::size_t used = 0;
		try {
			param = std::stod(tail, &used);
		} catch (const std::exception&) {
			used = 0;
		}
		if (used != tail.size() || tail.empty()) {
			throw std::invalid_argument("bad distribution parameter: " + tail);
		}
	}
	if (head == "uniform") {
		if (colon != std::string_view::npos) {
			throw std::invalid_argument("uniform takes no parameter");
		}
		return uniform();
	}
	if (head == "halfnormal") return half_normal(param);
	if (head == "exponential") return exponential(param);
	throw std::invalid_argument("unknown distribution: " + std::string(text));
}

std::string DistributionModel::name() const {
	std::ostringstream os;
	switch (kind_) {
	case DistributionKind::Uniform: return "uniform";
	case DistributionKind::HalfNormal: os << "halfnormal:" << parameter_; break;
	case DistributionKind::Exponential: os << "exponential:" << parameter_; break;
	}
	return os.str();
}

double DistributionModel::support_end() const {
	return kind_ == DistributionKind::Uniform ? 1.0 : std::numeric_limits<double>::infinity();
}

double DistributionModel::pdf(double z) const {
	if (z < 0.0 || z > support_end()) {
		return 0.0;
	}
	switch (kind_) {
	case DistributionKind::Uniform: return 1.0;
	case DistributionKind::HalfNormal: {
		const double x = z / parameter_;
		return std::numbers::sqrt2 / (std::sqrt(std::numbers::pi) * parameter_) * std::exp(-0.5 * x * x);
	}
	case DistributionKind::Exponential: return std::exp(-z / parameter_) / parameter_;
	}
	return 0.0;
}

double DistributionModel::cdf(double z) const {
	if (z <= 0.0) return 0.0;
	switch (kind_) {
	case DistributionKind::Uniform: return std::min(z, 1.0);
	case DistributionKind::HalfNormal: return std::erf(z / (parameter_ * std::numbers::sqrt2));
	case DistributionKind::Exponential: return -std::expm1(-z / parameter_);
	}
	return 0.0;
}

double DistributionModel::sf(double z) const {
	if (z <= 0.0) return 1.0;
	switch (kind_) {
	case DistributionKind::Uniform: return z >= 1.0 ? 0.0 : 1.0 - z;
	case DistributionKind::HalfNormal: return std::erfc(z / (parameter_ * std::numbers::sqrt2));
	case DistributionKind::Exponential: return std::exp(-z / parameter_);
	}
	return 0.0;
}

double DistributionModel::log_pdf(double z) const {
	if (z < 0.0 || z > support_end()) {
		return -std::numeric_limits<double>::infinity();
	}
	switch (kind_) {
	case DistributionKind::Uniform: return 0.0;
	case DistributionKind::HalfNormal: {
		const double x = z / parameter_;
		return 0.5 * std::log(2.0 / std::numbers::pi) - std::log(parameter_) - 0.5 * x * x;
	}
	case DistributionKind::Exponential: return -z / parameter_ - std::log(parameter_);
	}
	return 0.0;
}

double DistributionModel::log_cdf(double z) const {
	if (kind_ == DistributionKind::Uniform) {
		return z <= 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::min(z, 1.0));
	}
	return std::log(cdf(z));
}

double DistributionModel::log_sf(double z) const {
	switch (kind_) {
	case DistributionKind::Uniform: return std::log1p(-std::clamp(z, 0.0, 1.0));
	case DistributionKind::HalfNormal: return std::log(sf(z));
	case DistributionKind::Exponential: return -std::max(z, 0.0) / parameter_;
	}
	return 0.0;
}

double DistributionModel::quantile(double p) const {
	if (p <= 0.0) return 0.0;
	if (p >= 1.0) return support_end();
	switch (kind_) {
	case DistributionKind::Uniform: return p;
	case DistributionKind::HalfNormal: return parameter_ * std::numbers::sqrt2 * boost::math::erf_inv(p);
	case DistributionKind::Exponential: return -parameter_ * std::log1p(-p);
	}
	return 0.0;
}

double DistributionModel::quantile_upper(double q) const {
	if (q >= 1.0) return 0.0;
	if (q <= 0.0) return support_end();
	switch (kind_) {
	case DistributionKind::Uniform: return 1.0 - q;
	case DistributionKind::HalfNormal: return parameter_ * std::numbers::sqrt2 * boost::math::erfc_inv(q);
	case DistributionKind::Exponential: return -parameter_ * std::log(q);
	}
	return 0.0;
}

double DistributionModel::raw_moment(int m) const {
	if (m < 0) {
		throw std::invalid_argument("moment order must be nonnegative");
	}
	switch (kind_) {
	case DistributionKind::Uniform: return 1.0 / (m + 1);
	case DistributionKind::HalfNormal:
		return std::pow(parameter_, m) * std::pow(2.0, 0.5 * m) * boost::math::tgamma(0.5 * (m + 1)) /
		       std::sqrt(std::numbers::pi);
	case DistributionKind::Exponential: return std::pow(parameter_, m) * boost::math::factorial<double>(m);
	}
	return 0.0;
}

double DistributionModel::sample(Xoshiro256& rng) const {
	switch (kind_) {
	case DistributionKind::Uniform: return rng.uniform();
	case DistributionKind::HalfNormal: return parameter_ * std::abs(rng.normal());
	case DistributionKind::Exponential: return -parameter_ * std::log(rng.uniform_open());
	}
	return 0.0;
}

namespace {

// Evaluated in double: the long double path fails to converge at some
// symmetric medians, e.g. a = b = 5.
double beta_quantile(double a, double b, double p) {
	using Policy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;
	return boost::math::ibeta_inv(a, b, p, Policy());
}

void check_rank(int i, int n) {
	if (n < 1 || i < 1 || i > n) {
		throw std::invalid_argument("order statistic rank must satisfy 1 <= i <= n");
	}
}

std::string format_error(double e) {
	std::ostringstream os;
	os << std::setprecision(3) << e;
	return os.str();
}

}  // namespace

double order_pdf(const DistributionModel& dist, int i, int n, double z) {
	check_rank(i, n);
	if (z < 0.0 || z > dist.support_end()) {
		return 0.0;
	}
	if (n == 1) {
		return dist.pdf(z);
	}
	double log_density = std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(i)) - std::lgamma(n - i + 1.0);
	log_density += dist.log_pdf(z);
	if (i > 1) {
		log_density += (i - 1) * dist.log_cdf(z);
	}
	if (i < n) {
		log_density += (n - i) * dist.log_sf(z);
	}
	return std::exp(log_density);
}

double integrate_order(const DistributionModel& dist, int i, int n, const std::function<double(double)>& g,
                       std::span<const double> extra_breaks, double abs_tol) {
	check_rank(i, n);
	static const gsl_error_handler_t* previous = gsl_set_error_handler_off();
	(void)previous;
	const double a = i;
	const double b = n + 1.0 - i;
	std::vector<double> breaks{0.0};
	for (const double p : {1e-12, 1e-6, 1e-3, 0.05, 0.25}) {
		breaks.push_back(dist.quantile(beta_quantile(a, b, p)));
	}
	breaks.push_back(dist.quantile(beta_quantile(a, b, 0.5)));
	for (const double q : {0.25, 0.05, 1e-3, 1e-6, 1e-12}) {
		breaks.push_back(dist.quantile_upper(beta_quantile(b, a, q)));
	}
	const double end = dist.kind() == DistributionKind::Uniform
	                       ? 1.0
	                       : dist.quantile_upper(beta_quantile(b, a, 1e-30));
	breaks.push_back(end);
	for (const double z : extra_breaks) {
		if (z > 0.0 && z < end) breaks.push_back(z);
	}
	std::sort(breaks.begin(), breaks.end());
	breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

	struct Context {
		const DistributionModel* dist;
		int i, n;
		const std::function<double(double)>* g;
	} ctx{&dist, i, n, &g};
	gsl_function fn;
	fn.function = [](double z, void* p) {
		const auto* c = static_cast<const Context*>(p);
		return (*c->g)(z) * order_pdf(*c->dist, c->i, c->n, z);
	};
	fn.params = &ctx;

	constexpr std::size_t kLimit = 2000;
	const std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> work(
	    gsl_integration_workspace_alloc(kLimit), &gsl_integration_workspace_free);
	const double segment_tol = 0.1 * abs_tol / static_cast<double>(breaks.size());
	double total = 0.0;
	double total_error = 0.0;
	for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
		if (!(breaks[s + 1] > breaks[s])) continue;
		double value = 0.0;
		double err = 0.0;
		const int status = gsl_integration_qag(&fn, breaks[s], breaks[s + 1], segment_tol, 1e-13, kLimit,
		                                       GSL_INTEG_GAUSS31, work.get(), &value, &err);
		if (status != GSL_SUCCESS && status != GSL_EROUND) {
			err = std::max(err, std::numeric_limits<double>::min());
		}
		total += value;
		total_error += err;
	}
	if (!std::isfinite(total) || total_error > std::max(abs_tol, 1e-12 * std::abs(total))) {
		throw QuadratureError("quadrature did not converge: achieved error " + format_error(total_error),
		                      total_error);
	}
	return total;
}

double order_moment_quadrature(const DistributionModel& dist, int i, int n, int m, double abs_tol) {
	check_rank(i, n);
	if (m < 0) {
		throw std::invalid_argument("moment order must be nonnegative");
	}
	return integrate_order(dist, i, n, [m](double z) { return std::pow(z, m); }, {}, abs_tol);
}

double order_moment(const DistributionModel& dist, int i, int n, int m) {
	check_rank(i, n);
	if (m < 0) {
		throw std::invalid_argument("moment order must be nonnegative");
	}
	if (dist.kind() == DistributionKind::Uniform) {
		double product = 1.0;
		for (int j = 0; j < m; ++j) {
			product *= static_cast<double>(i + j) / static_cast<double>(n + 1 + j);
		}
		return product;
	}
	return order_moment_quadrature(dist, i, n, m);
}

double default_energy(const DistributionModel& dist, int M) {
	return M * dist.raw_moment(2);
}

namespace {

void check_prediction_args(int M, int n_iters, double f_energy) {
	if (M < 1) throw std::invalid_argument("M must be positive");
	if (n_iters < 0) throw std::invalid_argument("iteration count must be nonnegative");
	if (!(f_energy > 0.0)) throw std::invalid_argument("signal energy must be positive");
}

}  // namespace

Prediction predict_fixed(const DistributionModel& dist, int M, int n_iters, double f_energy) {
	check_prediction_args(M, n_iters, f_energy);
	if (n_iters > M) {
		throw std::invalid_argument("fixed strategy cannot exceed M iterations");
	}
	Prediction out;
	out.values.reserve(static_cast<std::size_t>(n_iters) + 1);
	double value = f_energy;
	out.values.push_back(value);
	for (int n = 1; n <= n_iters; ++n) {
		value -= order_moment(dist, M - n + 1, M, 2);
		if (value < 0.0) {
			out.truncated = true;
		}
		out.values.push_back(std::max(value, 0.0));
	}
	return out;
}

namespace {

double redraw_factor(const DistributionModel& dist, int M, int power, double f_energy, bool clamp) {
	const double root = std::sqrt(f_energy);
	const double breaks[] = {root};
	return integrate_order(
	    dist, M, M,
	    [&](double z) {
		    const double w = 1.0 - z * z / f_energy;
		    return std::pow(clamp ? std::max(w, 0.0) : w, power);
	    },
	    breaks);
}

}  // namespace

Prediction predict_redraw(const DistributionModel& dist, int M, int n_iters, double f_energy, bool clamp) {
	check_prediction_args(M, n_iters, f_energy);
	Prediction out;
	out.values.reserve(static_cast<std::size_t>(n_iters) + 1);
	out.values.push_back(f_energy);
	for (int n = 1; n <= n_iters; ++n) {
		const double v = f_energy * redraw_factor(dist, M, n, f_energy, clamp);
		if (v < 0.0) {
			out.truncated = true;
		}
		out.values.push_back(std::max(v, 0.0));
	}
	return out;
}

double predict_redraw_binomial(const DistributionModel& dist, int M, int n, double f_energy) {
	check_prediction_args(M, n, f_energy);
	double sum = 0.0;
	double binom = 1.0;
	for (int i = 0; i <= n; ++i) {
		const double sign = (i % 2 == 0) ? 1.0 : -1.0;
		sum += binom * sign * order_moment(dist, M, M, 2 * i) / std::pow(f_energy, i - 1);
		binom = binom * (n - i) / (i + 1);
	}
	return sum;
}

std::string to_string(Strategy strategy) {
	return strategy == Strategy::Fixed ? "fixed" : "redraw";
}

namespace {

constexpr std::size_t kChunk = 1024;

struct Moments {
	std::vector<double> s1, s2, s3, s4;
	std::uint64_t clamps = 0;

	explicit Moments(std::size_t len) : s1(len), s2(len), s3(len), s4(len) {}
};

void run_trial(const DistributionModel& dist, int M, int n_iters, Strategy strategy, std::uint64_t seed,
               std::size_t trial, double f_energy, std::vector<double>& samples, std::vector<double>& trace,
               std::uint64_t& clamps) {
	auto rng = Xoshiro256::substream(seed, trial, 0);
	trace[0] = f_energy;
	if (strategy == Strategy::Fixed) {
		for (auto& v : samples) {
			const double z = dist.sample(rng);
			v = z * z;
		}
		std::partial_sort(samples.begin(), samples.begin() + n_iters, samples.end(), std::greater<>());
		double r = f_energy;
		for (int n = 0; n < n_iters; ++n) {
			r -= samples[static_cast<std::size_t>(n)];
			trace[static_cast<std::size_t>(n) + 1] = r;
		}
		return;
	}
	double r = f_energy;
	for (int n = 0; n < n_iters; ++n) {
		double best = 0.0;
		for (int j = 0; j < M; ++j) {
			best = std::max(best, dist.sample(rng));
		}
		double removed = best * best * (r / f_energy);
		if (removed > r) {
			removed = r;
			++clamps;
		}
		r -= removed;
		trace[static_cast<std::size_t>(n) + 1] = r;
	}
}

}  // namespace

SimulationResult simulate_greedy(const DistributionModel& dist, int M, int n_iters, Strategy strategy,
                                 std::size_t trials, std::uint64_t seed, double f_energy, unsigned threads) {
	check_prediction_args(M, n_iters, f_energy);
	if (trials < 1) throw std::invalid_argument("at least one trial is required");
	if (strategy == Strategy::Fixed && n_iters > M) {
		throw std::invalid_argument("fixed strategy cannot exceed M iterations");
	}
	const std::size_t len = static_cast<std::size_t>(n_iters) + 1;

	// Moments are accumulated around trial 0 to keep the raw sums well conditioned.
	std::vector<double> shift(len);
	{
		std::vector<double> samples(static_cast<std::size_t>(M));
		std::uint64_t ignored = 0;
		run_trial(dist, M, n_iters, strategy, seed, 0, f_energy, samples, shift, ignored);
	}

	const std::size_t chunks = (trials + kChunk - 1) / kChunk;
	std::vector<Moments> partial(chunks, Moments(len));
	std::atomic<std::size_t> next{0};
	const auto worker = [&] {
		std::vector<double> samples(static_cast<std::size_t>(M));
		std::vector<double> trace(len);
		for (std::size_t c = next++; c < chunks; c = next++) {
			Moments& acc = partial[c];
			const std::size_t end = std::min(trials, (c + 1) * kChunk);
			for (std::size_t t = c * kChunk; t < end; ++t) {
				run_trial(dist, M, n_iters, strategy, seed, t, f_energy, samples, trace, acc.clamps);
				for (std::size_t n = 0; n < len; ++n) {
					const double d = trace[n] - shift[n];
					const double d2 = d * d;
					acc.s1[n] += d;
					acc.s2[n] += d2;
					acc.s3[n] += d2 * d;
					acc.s4[n] += d2 * d2;
				}
			}
		}
	};
	unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
	workers = static_cast<unsigned>(std::min<std::size_t>(workers, chunks));
	if (workers <= 1) {
		worker();
	} else {
		std::vector<std::jthread> pool;
		for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
	}

	Moments total(len);
	for (const auto& p : partial) {
		for (std::size_t n = 0; n < len; ++n) {
			total.s1[n] += p.s1[n];
			total.s2[n] += p.s2[n];
			total.s3[n] += p.s3[n];
			total.s4[n] += p.s4[n];
		}
		total.clamps += p.clamps;
	}

	SimulationResult out;
	out.trials = trials;
	out.clamp_count = total.clamps;
	const double T = static_cast<double>(trials);
	for (std::size_t n = 0; n < len; ++n) {
		const double m1 = total.s1[n] / T;
		const double r2 = total.s2[n] / T;
		const double r3 = total.s3[n] / T;
		const double r4 = total.s4[n] / T;
		const double c2 = std::max(r2 - m1 * m1, 0.0);
		const double c4 = std::max(r4 - 4 * m1 * r3 + 6 * m1 * m1 * r2 - 3 * m1 * m1 * m1 * m1, 0.0);
		const double var = trials > 1 ? c2 * T / (T - 1) : 0.0;
		out.mean.push_back(shift[n] + m1);
		out.variance.push_back(var);
		out.mean_stderr.push_back(std::sqrt(var / T));
		const double var_of_var = trials > 3 ? (c4 - c2 * c2 * (T - 3) / (T - 1)) / T : 0.0;
		out.variance_stderr.push_back(std::sqrt(std::max(var_of_var, 0.0)));
	}
	out.mean[0] = f_energy;
	return out;
}

VarianceTrace predict_variance(const DistributionModel& dist, int M, int n_iters, Strategy strategy,
                               double f_energy, std::size_t trials, std::uint64_t seed) {
	check_prediction_args(M, n_iters, f_energy);
	VarianceTrace out;
	if (strategy == Strategy::Fixed) {
		const auto sim = simulate_greedy(dist, M, n_iters, Strategy::Fixed, trials, seed, f_energy);
		out.variance = sim.variance;
		out.standard_error = sim.variance_stderr;
		return out;
	}
	out.variance.push_back(0.0);
	out.standard_error.assign(static_cast<std::size_t>(n_iters) + 1, 0.0);
	for (int n = 1; n <= n_iters; ++n) {
		const double first = redraw_factor(dist, M, n, f_energy, true);
		const double second = redraw_factor(dist, M, 2 * n, f_energy, true);
		out.variance.push_back(std::max(f_energy * f_energy * (second - first * first), 0.0));
	}
	return out;
}

void write_orderstats_csv(std::ostream& out, std::span<const OrderStatRow> rows) {
	out << "n,predicted_mean,predicted_var,mc_mean,mc_var,mc_stderr,clamp_count\n";
	out << std::setprecision(17);
	for (const auto& r : rows) {
		out << r.n << ',' << r.predicted_mean << ',' << r.predicted_var << ',' << r.mc_mean << ',' << r.mc_var << ','
		    << r.mc_stderr << ',' << r.clamp_count << '\n';
	}
}

}  // namespace rss
