#include "rss/pursuit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <stdexcept>

#include "rss/random.hpp"

namespace rss {

std::string to_string(Variant variant) {
	switch (variant) {
	case Variant::MP: return "mp";
	case Variant::OMP: return "omp";
	case Variant::LoMP: return "lomp";
	}
	return "mp";
}

Variant parse_variant(std::string_view text) {
	if (text == "mp") return Variant::MP;
	if (text == "omp") return Variant::OMP;
	if (text == "lomp") return Variant::LoMP;
	throw std::invalid_argument("unknown pursuit variant: " + std::string(text));
}

std::string to_string(StopReason reason) {
	switch (reason) {
	case StopReason::TargetSrr: return "target_srr";
	case StopReason::MaxAtoms: return "max_atoms";
	case StopReason::ResidualFloor: return "residual_floor";
	case StopReason::ExactRepresentation: return "exact_representation";
	case StopReason::NoCandidate: return "no_candidate";
	}
	return "unknown";
}

void PursuitConfig::validate() const {
	dict.validate();
	sequence.validate();
	if (!stop.target_srr_db && !stop.max_atoms) {
		throw std::invalid_argument("a target SRR or a maximum atom count is required");
	}
	if (variant == Variant::OMP && stop.max_atoms && *stop.max_atoms > static_cast<std::size_t>(dict.signal_length)) {
		throw std::invalid_argument("OMP cannot select more atoms than the signal length");
	}
}

std::optional<Selection> select_atom(const CoefficientTable& table, std::span<const std::size_t> excluded) {
	const auto values = table.values();
	std::size_t best = values.size();
	double best_abs = 0.0;
	for (std::size_t i = 0; i < values.size(); ++i) {
		const double a = std::abs(values[i]);
		// strict comparison keeps the first, i.e. lexicographically smallest, maximum
		if (a > best_abs && std::find(excluded.begin(), excluded.end(), i) == excluded.end()) {
			best_abs = a;
			best = i;
		}
	}
	if (best == values.size()) {
		return std::nullopt;
	}
	return Selection{best, table.param(best), values[best]};
}

void mp_update(std::span<double> residual, const AtomSegment& atom, double weight) {
	if (atom.start < 0 || static_cast<std::size_t>(atom.end()) > residual.size()) {
		throw std::invalid_argument("mp_update: atom support outside the residual");
	}
	for (std::size_t j = 0; j < atom.values.size(); ++j) {
		residual[static_cast<std::size_t>(atom.start) + j] -= weight * atom.values[j];
	}
}

// --- OMP --------------------------------------------------------------------

OmpSolver::OmpSolver(std::span<const double> signal, double pivot_tolerance)
: signal_(signal.begin(), signal.end()), residual_(signal.begin(), signal.end()), tolerance_(pivot_tolerance) {}

bool OmpSolver::add(std::span<const double> atom) {
	if (atom.size() != signal_.size()) {
		throw std::invalid_argument("OmpSolver: atom length mismatch");
	}
	std::vector<double> q(atom.begin(), atom.end());
	std::vector<double> r(basis_.size() + 1, 0.0);
	for (int pass = 0; pass < 2; ++pass) {
		for (std::size_t j = 0; j < basis_.size(); ++j) {
			const double c = dot(basis_[j], q);
			for (std::size_t t = 0; t < q.size(); ++t) {
				q[t] -= c * basis_[j][t];
			}
			r[j] += c;
		}
	}
	const double pivot = std::sqrt(energy(q));
	if (!(pivot >= tolerance_)) {
		return false;
	}
	for (double& v : q) {
		v /= pivot;
	}
	r.back() = pivot;
	const double c = dot(q, residual_);
	for (std::size_t t = 0; t < q.size(); ++t) {
		residual_[t] -= c * q[t];
	}
	basis_.push_back(std::move(q));
	r_columns_.push_back(std::move(r));
	projections_.push_back(c);
	return true;
}

std::vector<double> OmpSolver::weights() const {
	const std::size_t n = basis_.size();
	std::vector<double> w(n, 0.0);
	for (std::size_t ii = n; ii-- > 0;) {
		double sum = projections_[ii];
		for (std::size_t j = ii + 1; j < n; ++j) {
			sum -= r_columns_[j][ii] * w[j];
		}
		w[ii] = sum / r_columns_[ii][ii];
	}
	return w;
}

OmpResult omp_update(std::span<const std::vector<double>> atoms, std::span<const double> f) {
	OmpSolver solver(f);
	OmpResult result;
	for (std::size_t i = 0; i < atoms.size(); ++i) {
		if (!solver.add(atoms[i])) {
			result.rejected.push_back(i);
		}
	}
	result.weights = solver.weights();
	result.residual.assign(solver.residual().begin(), solver.residual().end());
	return result;
}

// --- sources ----------------------------------------------------------------

TimeFrequencySource::TimeFrequencySource(DictConfig config, SequenceSpec sequence, bool full)
: dict_(std::move(config)), sequence_(sequence), full_(full) {
	sequence_.validate();
}

SubdictSpec TimeFrequencySource::subdict(std::size_t iteration) const {
	if (full_) {
		return SubdictSpec::full_dictionary(dict_.config());
	}
	return subdict_at(sequence_, dict_.config(), iteration);
}

void TimeFrequencySource::layout(std::size_t iteration, CoefficientTable& table) const {
	dict_.layout(subdict(iteration), table);
}

bool TimeFrequencySource::same_subdictionary(std::size_t a, std::size_t b) const {
	if (full_ || sequence_.kind == SequenceKind::Fixed) {
		return true;
	}
	if (a / sequence_.refresh == b / sequence_.refresh) {
		return true;
	}
	return subdict(a) == subdict(b);
}

void TimeFrequencySource::project(std::span<const double> residual, CoefficientTable& table) const {
	dict_.project(residual, table);
}

void TimeFrequencySource::update(std::span<const double> residual, int lo, int hi, CoefficientTable& table) const {
	dict_.update(residual, lo, hi, table);
}

AtomSegment TimeFrequencySource::atom(const AtomParam& param) const {
	return dict_.atom(param);
}

AtomParam TimeFrequencySource::refine(const AtomParam& param, std::span<const double> residual) const {
	const int s = dict_.config().scales.at(static_cast<std::size_t>(param.scale_index));
	return dict_.refine_time(param, residual, s / 4);
}

MatrixSource::MatrixSource(std::vector<std::vector<double>> columns, Mode mode, std::size_t subset_size,
                           std::uint64_t seed, std::uint32_t refresh)
: columns_(std::move(columns)), length_(0), mode_(mode), subset_size_(subset_size), seed_(seed), refresh_(refresh) {
	if (columns_.empty()) {
		throw std::invalid_argument("MatrixSource needs at least one column");
	}
	length_ = columns_.front().size();
	for (const auto& c : columns_) {
		if (c.size() != length_ || length_ == 0) {
			throw std::invalid_argument("MatrixSource columns must share a nonzero length");
		}
	}
	if (mode_ == Mode::Full) {
		subset_size_ = columns_.size();
	}
	if (subset_size_ == 0 || subset_size_ > columns_.size()) {
		throw std::invalid_argument("MatrixSource subset size out of range");
	}
	if (refresh_ == 0) {
		throw std::invalid_argument("refresh period must be positive");
	}
}

std::vector<int> MatrixSource::subset(std::size_t iteration) const {
	std::vector<int> idx(columns_.size());
	std::iota(idx.begin(), idx.end(), 0);
	if (mode_ == Mode::Random) {
		auto rng = Xoshiro256::substream(seed_, iteration / refresh_, 0);
		for (std::size_t i = 0; i < subset_size_; ++i) {
			const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
			std::swap(idx[i], idx[j]);
		}
	}
	idx.resize(subset_size_);
	std::sort(idx.begin(), idx.end());
	return idx;
}

void MatrixSource::layout(std::size_t iteration, CoefficientTable& table) const {
	table.clear();
	table.add_block(0, 0, 1, subset(iteration));
}

bool MatrixSource::same_subdictionary(std::size_t a, std::size_t b) const {
	return mode_ != Mode::Random || a / refresh_ == b / refresh_;
}

void MatrixSource::project(std::span<const double> residual, CoefficientTable& table) const {
	const auto& block = table.blocks().front();
	auto values = table.values();
	for (std::size_t i = 0; i < block.times.size(); ++i) {
		values[i] = dot(residual, columns_[static_cast<std::size_t>(block.times[i])]);
	}
}

AtomSegment MatrixSource::atom(const AtomParam& param) const {
	if (param.scale_index != 0 || param.freq != 0 || param.time < 0 ||
	    static_cast<std::size_t>(param.time) >= columns_.size()) {
		throw std::invalid_argument("MatrixSource: atom parameter out of range");
	}
	return AtomSegment{0, columns_[static_cast<std::size_t>(param.time)]};
}

// --- run --------------------------------------------------------------------

double Approximant::srr_db() const {
	return srr_db(entries.size());
}

double Approximant::srr_db(std::size_t n) const {
	return srr_from_energies(approximant_energy.at(n), trace.at(n));
}

namespace {

double difference_energy(std::span<const double> f, std::span<const double> r) {
	double sum = 0.0;
	for (std::size_t t = 0; t < f.size(); ++t) {
		const double d = f[t] - r[t];
		sum += d * d;
	}
	return sum;
}

}  // namespace

Approximant run(std::span<const double> f, const AtomSource& source, Variant variant, const StopCriteria& stop,
                const Observer& observer) {
	const std::size_t n_samples = source.signal_length();
	if (f.size() != n_samples) {
		throw std::invalid_argument("run: signal length does not match the dictionary");
	}
	if (!stop.target_srr_db && !stop.max_atoms) {
		throw std::invalid_argument("run: a target SRR or a maximum atom count is required");
	}

	Approximant approx;
	approx.variant = variant;
	approx.reference_energy = energy(f);
	if (!(approx.reference_energy > 0.0)) {
		throw std::invalid_argument("run: signal has zero energy");
	}
	approx.residual.assign(f.begin(), f.end());
	approx.trace.push_back(approx.reference_energy);
	approx.approximant_energy.push_back(0.0);

	std::optional<OmpSolver> omp;
	if (variant == Variant::OMP) {
		omp.emplace(f);
	}

	CoefficientTable table;
	bool table_valid = false;
	int changed_lo = 0, changed_hi = 0;
	std::vector<std::size_t> excluded;

	for (std::size_t it = 0;; ++it) {
		const double current = approx.trace.back();
		if (stop.target_srr_db && srr_from_energies(approx.approximant_energy.back(), current) >= *stop.target_srr_db) {
			approx.stop_reason = StopReason::TargetSrr;
			break;
		}
		if (current <= stop.residual_floor * approx.reference_energy) {
			approx.stop_reason = StopReason::ResidualFloor;
			break;
		}
		if (stop.max_atoms && it >= *stop.max_atoms) {
			approx.stop_reason = StopReason::MaxAtoms;
			approx.budget_exhausted = stop.target_srr_db.has_value();
			break;
		}

		const bool incremental = table_valid && variant != Variant::OMP && source.same_subdictionary(it - 1, it);
		if (incremental) {
			source.update(approx.residual, changed_lo, changed_hi, table);
		} else {
			source.layout(it, table);
			source.project(approx.residual, table);
			table_valid = true;
		}

		excluded.clear();
		std::optional<Selection> sel;
		bool accepted = false;
		while (!accepted) {
			sel = select_atom(table, excluded);
			if (!sel) {
				break;
			}
			if (variant == Variant::OMP) {
				const AtomSegment seg = source.atom(sel->param);
				if (omp->add(seg.dense(n_samples))) {
					accepted = true;
				} else {
					excluded.push_back(sel->index);
				}
			} else {
				accepted = true;
			}
		}
		if (!sel) {
			approx.stop_reason = excluded.empty() ? StopReason::ExactRepresentation : StopReason::NoCandidate;
			break;
		}
		if (observer) {
			observer(IterationEvent{it, table, *sel, approx.residual});
		}

		ApproximantEntry entry;
		entry.param = sel->param;
		entry.iteration = it;
		entry.index = sel->index;

		if (variant == Variant::OMP) {
			const auto w = omp->weights();
			for (std::size_t i = 0; i < approx.entries.size(); ++i) {
				approx.entries[i].weight = w[i];
			}
			entry.weight = w.back();
			approx.residual.assign(omp->residual().begin(), omp->residual().end());
		} else {
			if (variant == Variant::LoMP) {
				entry.param = source.refine(sel->param, approx.residual);
				entry.local_shift = entry.param.time - sel->param.time;
			}
			const AtomSegment seg = source.atom(entry.param);
			double alpha = 0.0;
			for (std::size_t j = 0; j < seg.values.size(); ++j) {
				alpha += approx.residual[static_cast<std::size_t>(seg.start) + j] * seg.values[j];
			}
			mp_update(approx.residual, seg, alpha);
			entry.weight = alpha;
			changed_lo = seg.start;
			changed_hi = seg.end();
		}
		approx.entries.push_back(entry);
		approx.trace.push_back(energy(approx.residual));
		approx.approximant_energy.push_back(difference_energy(f, approx.residual));
	}
	return approx;
}

Approximant run(const Signal& f, const PursuitConfig& config, const Observer& observer) {
	config.validate();
	if (f.length() != static_cast<std::size_t>(config.dict.signal_length)) {
		throw std::invalid_argument("run: signal length does not match the dictionary config");
	}
	const TimeFrequencySource source(config.dict, config.sequence, config.full_dictionary);
	return run(f.samples(), source, config.variant, config.stop, observer);
}

Approximant truncated(const Approximant& approx, std::size_t n) {
	if (n > approx.size()) {
		throw std::out_of_range("truncated: n exceeds the approximant size");
	}
	Approximant out;
	out.variant = approx.variant;
	out.reference_energy = approx.reference_energy;
	out.entries.assign(approx.entries.begin(), approx.entries.begin() + static_cast<std::ptrdiff_t>(n));
	out.trace.assign(approx.trace.begin(), approx.trace.begin() + static_cast<std::ptrdiff_t>(n) + 1);
	out.approximant_energy.assign(approx.approximant_energy.begin(),
	                              approx.approximant_energy.begin() + static_cast<std::ptrdiff_t>(n) + 1);
	out.stop_reason = n == approx.size() ? approx.stop_reason : StopReason::MaxAtoms;
	return out;
}

std::size_t atoms_to_reach(const Approximant& approx, double target_srr_db) {
	std::size_t n = 0;
	while (n < approx.size() && approx.srr_db(n) < target_srr_db) {
		++n;
	}
	return n;
}

std::vector<double> reconstruct(const AtomSource& source, std::span<const ApproximantEntry> entries) {
	std::vector<double> out(source.signal_length(), 0.0);
	for (const auto& e : entries) {
		const AtomSegment seg = source.atom(e.param);
		for (std::size_t j = 0; j < seg.values.size(); ++j) {
			out[static_cast<std::size_t>(seg.start) + j] += e.weight * seg.values[j];
		}
	}
	return out;
}

void write_trace_csv(std::ostream& out, const Approximant& approx, const DictConfig* dict) {
	out << "iteration,scale,u,xi,tau,alpha,residual_energy,srr_db\n";
	out << std::setprecision(17);
	for (std::size_t n = 0; n < approx.entries.size(); ++n) {
		const auto& e = approx.entries[n];
		const int scale = dict ? dict->scales.at(static_cast<std::size_t>(e.param.scale_index)) : e.param.scale_index;
		out << e.iteration << ',' << scale << ',' << e.param.time << ',' << e.param.freq << ',' << e.param.shift << ','
		    << e.weight << ',' << approx.trace[n + 1] << ',' << approx.srr_db(n + 1) << '\n';
	}
}

}  // namespace rss
