#include "rss/signal.hpp"

#include <cmath>
#include <iomanip>

namespace rss {

Signal::Signal(std::vector<double> samples, int sample_rate)
: samples_(std::move(samples)), sample_rate_(sample_rate) {
	if (samples_.empty()) {
		throw std::invalid_argument("signal must have at least one sample");
	}
	if (sample_rate_ <= 0) {
		throw std::invalid_argument("sample rate must be positive");
	}
}

double Signal::energy() const {
	return rss::energy(samples_);
}

double energy(std::span<const double> x) {
	double sum = 0.0;
	for (double v : x) {
		sum += v * v;
	}
	return sum;
}

double dot(std::span<const double> a, std::span<const double> b) {
	if (a.size() != b.size()) {
		throw std::invalid_argument("dot: length mismatch");
	}
	double sum = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		sum += a[i] * b[i];
	}
	return sum;
}

double srr_from_energies(double approximant_energy, double residual_energy) {
	if (residual_energy == 0.0) {
		return kPlusInfinityDb;
	}
	if (approximant_energy == 0.0) {
		return kMinusInfinityDb;
	}
	return 10.0 * std::log10(approximant_energy / residual_energy);
}

double srr(std::span<const double> reference, std::span<const double> approximant) {
	if (reference.size() != approximant.size()) {
		throw std::invalid_argument("srr: reference and approximant lengths differ");
	}
	double approx_energy = 0.0;
	double residual_energy = 0.0;
	for (std::size_t i = 0; i < reference.size(); ++i) {
		const double r = reference[i] - approximant[i];
		approx_energy += approximant[i] * approximant[i];
		residual_energy += r * r;
	}
	return srr_from_energies(approx_energy, residual_energy);
}

double srr(const Signal& reference, const Signal& approximant) {
	return srr(reference.samples(), approximant.samples());
}

void write_metric_csv(std::ostream& out, std::span<const MetricRow> rows) {
	out << "iteration,residual_energy,srr_db\n";
	out << std::setprecision(17);
	for (const auto& row : rows) {
		out << row.iteration << ',' << row.residual_energy << ',' << row.srr_db << '\n';
	}
}

}  // namespace rss
