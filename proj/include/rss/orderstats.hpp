#ifndef RSS_ORDERSTATS_HPP
#define RSS_ORDERSTATS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rss/random.hpp"

namespace rss {

enum class DistributionKind { Uniform, HalfNormal, Exponential };

/// Law of the magnitude Z of a projection coefficient. HalfNormal(sigma) is
/// |X| with X ~ N(0, sigma^2); Exponential(mu) has mean mu.
class DistributionModel {
public:
	static DistributionModel uniform();
	static DistributionModel half_normal(double sigma = 1.0);
	static DistributionModel exponential(double mean = 1.0);
	/// "uniform", "halfnormal[:sigma]", "exponential[:mu]".
	static DistributionModel parse(std::string_view text);

	DistributionKind kind() const { return kind_; }
	double parameter() const { return parameter_; }
	std::string name() const;

	/// Right end of the support (1 or +inf).
	double support_end() const;
	double pdf(double z) const;
	double cdf(double z) const;
	/// 1 - F(z), accurate in the upper tail.
	double sf(double z) const;
	double log_pdf(double z) const;
	double log_cdf(double z) const;
	double log_sf(double z) const;
	/// z with F(z) = p.
	double quantile(double p) const;
	/// z with 1 - F(z) = q.
	double quantile_upper(double q) const;
	/// E[Z^m].
	double raw_moment(int m) const;

	double sample(Xoshiro256& rng) const;

private:
	DistributionModel(DistributionKind kind, double parameter);

	DistributionKind kind_;
	double parameter_;
};

/// Density of the i-th smallest of n draws, evaluated in log space.
double order_pdf(const DistributionModel& dist, int i, int n, double z);

class QuadratureError : public std::runtime_error {
public:
	QuadratureError(const std::string& what, double achieved) : std::runtime_error(what), achieved_(achieved) {}
	double achieved_tolerance() const { return achieved_; }

private:
	double achieved_;
};

inline constexpr double kQuadratureTolerance = 1e-10;

/// E[Z_{i:n}^m]. Uniform uses the Beta closed form, other laws adaptive
/// Gauss-Kronrod quadrature.
double order_moment(const DistributionModel& dist, int i, int n, int m);

/// E[Z_{i:n}^m] by quadrature regardless of the law. Throws QuadratureError
/// when the error estimate exceeds max(abs_tol, 1e-12 |result|).
double order_moment_quadrature(const DistributionModel& dist, int i, int n, int m,
                               double abs_tol = kQuadratureTolerance);

/// Integral of g(z) f_{i:n}(z) over the support, split at quantiles of the
/// order statistic plus any caller-provided breakpoints.
double integrate_order(const DistributionModel& dist, int i, int n, const std::function<double(double)>& g,
                       std::span<const double> extra_breaks = {}, double abs_tol = kQuadratureTolerance);

/// M E[Z^2], the energy consistent with M coefficients of law Z.
double default_energy(const DistributionModel& dist, int M);

struct Prediction {
	/// values[n], n = 0..n_iters.
	std::vector<double> values;
	/// Some entries were negative and set to 0.
	bool truncated = false;
};

/// Successive maxima of one sample set: E - sum_{i<n} E[Z^2_{M-i:M}].
Prediction predict_fixed(const DistributionModel& dist, int M, int n_iters, double f_energy);

/// Redraw model E * E[(1 - W)^n], W = Z^2_{M:M}/E, which treats successive
/// maxima as one draw. With `clamp` the factor is max(0, 1 - W).
Prediction predict_redraw(const DistributionModel& dist, int M, int n_iters, double f_energy, bool clamp = true);

/// Expanded binomial form sum_i C(n,i) (-1)^i E[Z^{2i}_{M:M}] / E^{i-1}.
/// Agrees with the unclamped integral; loses precision for large n.
double predict_redraw_binomial(const DistributionModel& dist, int M, int n, double f_energy);

enum class Strategy { Fixed, Redraw };

std::string to_string(Strategy strategy);

struct SimulationResult {
	std::vector<double> mean;
	/// Unbiased sample variance across trials.
	std::vector<double> variance;
	std::vector<double> mean_stderr;
	std::vector<double> variance_stderr;
	std::uint64_t clamp_count = 0;
	std::size_t trials = 0;
};

/// Monte Carlo of the greedy energy model. Fixed: draw M values once, remove
/// the squares of the n largest. Redraw: per iteration draw M values scaled
/// by |R|/|f| and remove the square of the largest, clamped to |R|^2.
/// Trial t uses substream (seed, t); results do not depend on `threads`.
SimulationResult simulate_greedy(const DistributionModel& dist, int M, int n_iters, Strategy strategy,
                                 std::size_t trials, std::uint64_t seed, double f_energy, unsigned threads = 0);

struct VarianceTrace {
	std::vector<double> variance;
	/// Zero for the quadrature route; Monte Carlo standard error otherwise.
	std::vector<double> standard_error;
};

/// Redraw: E^2 (E[(1-W)^{2n}] - E[(1-W)^n]^2) by quadrature. Fixed: Monte
/// Carlo over `trials` sorted sample sets.
VarianceTrace predict_variance(const DistributionModel& dist, int M, int n_iters, Strategy strategy,
                               double f_energy, std::size_t trials = 100000, std::uint64_t seed = 1);

struct OrderStatRow {
	int n;
	double predicted_mean;
	double predicted_var;
	double mc_mean;
	double mc_var;
	double mc_stderr;
	std::uint64_t clamp_count;
};

/// Columns n, predicted_mean, predicted_var, mc_mean, mc_var, mc_stderr, clamp_count.
void write_orderstats_csv(std::ostream& out, std::span<const OrderStatRow> rows);

}  // namespace rss

#endif  // RSS_ORDERSTATS_HPP
