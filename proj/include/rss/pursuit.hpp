#ifndef RSS_PURSUIT_HPP
#define RSS_PURSUIT_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rss/dictionary.hpp"
#include "rss/sequence.hpp"
#include "rss/signal.hpp"

namespace rss {

enum class Variant : std::uint8_t { MP = 0, OMP = 1, LoMP = 2 };

std::string to_string(Variant variant);
Variant parse_variant(std::string_view text);

struct StopCriteria {
	std::optional<double> target_srr_db;
	std::optional<std::size_t> max_atoms;
	/// Stop once |R^n f|^2 <= residual_floor * |f|^2.
	double residual_floor = 1e-12;
};

struct PursuitConfig {
	Variant variant = Variant::MP;
	StopCriteria stop;
	SequenceSpec sequence;
	DictConfig dict;
	/// Search the full dictionary at every iteration; `sequence` is ignored.
	bool full_dictionary = false;

	void validate() const;
};

struct Selection {
	std::size_t index = 0;
	AtomParam param;
	double value = 0.0;
};

/// Entry of largest magnitude; ties go to the lexicographically smallest
/// (scale, time, freq). Entries listed in `excluded` are skipped. Returns
/// nullopt when every remaining coefficient is zero.
std::optional<Selection> select_atom(const CoefficientTable& table, std::span<const std::size_t> excluded = {});

/// R <- R - weight * atom.
void mp_update(std::span<double> residual, const AtomSegment& atom, double weight);

/// Incremental least squares over a growing set of atoms using a
/// Gram-Schmidt QR factorization (two orthogonalization passes).
class OmpSolver {
public:
	explicit OmpSolver(std::span<const double> signal, double pivot_tolerance = 1e-10);

	/// Appends a unit-norm atom. Returns false, leaving the state untouched,
	/// when its component orthogonal to the current span is below tolerance.
	bool add(std::span<const double> atom);

	std::size_t size() const { return basis_.size(); }
	std::span<const double> residual() const { return residual_; }
	/// Least-squares weights of the accepted atoms, in insertion order.
	std::vector<double> weights() const;

private:
	std::vector<double> signal_;
	std::vector<double> residual_;
	std::vector<std::vector<double>> basis_;
	std::vector<std::vector<double>> r_columns_;
	std::vector<double> projections_;
	double tolerance_;
};

struct OmpResult {
	std::vector<double> weights;
	std::vector<double> residual;
	std::vector<std::size_t> rejected;
};

/// Orthogonal projection of f onto the span of `atoms`; near-dependent atoms
/// are skipped and reported in `rejected`.
OmpResult omp_update(std::span<const std::vector<double>> atoms, std::span<const double> f);

/// Dictionary whose searchable subset depends on the iteration.
class AtomSource {
public:
	virtual ~AtomSource() = default;

	virtual std::size_t signal_length() const = 0;
	virtual void layout(std::size_t iteration, CoefficientTable& table) const = 0;
	virtual bool same_subdictionary(std::size_t a, std::size_t b) const = 0;
	virtual void project(std::span<const double> residual, CoefficientTable& table) const = 0;
	/// Refresh after the residual changed only on [lo, hi).
	virtual void update(std::span<const double> residual, int lo, int hi, CoefficientTable& table) const {
		(void)lo;
		(void)hi;
		project(residual, table);
	}
	virtual AtomSegment atom(const AtomParam& param) const = 0;
	/// Local time refinement used by LoMP. Identity by default.
	virtual AtomParam refine(const AtomParam& param, std::span<const double> residual) const {
		(void)residual;
		return param;
	}
};

/// Multiscale Gabor/MDCT dictionary searched through a SequenceSpec, or in
/// full.
class TimeFrequencySource : public AtomSource {
public:
	TimeFrequencySource(DictConfig config, SequenceSpec sequence, bool full = false);

	const TimeFrequencyDictionary& dictionary() const { return dict_; }
	const SequenceSpec& sequence() const { return sequence_; }
	bool full() const { return full_; }
	SubdictSpec subdict(std::size_t iteration) const;

	std::size_t signal_length() const override { return dict_.signal_length(); }
	void layout(std::size_t iteration, CoefficientTable& table) const override;
	bool same_subdictionary(std::size_t a, std::size_t b) const override;
	void project(std::span<const double> residual, CoefficientTable& table) const override;
	void update(std::span<const double> residual, int lo, int hi, CoefficientTable& table) const override;
	AtomSegment atom(const AtomParam& param) const override;
	/// Searches +/- s_k/4 around the selected centre.
	AtomParam refine(const AtomParam& param, std::span<const double> residual) const override;

private:
	TimeFrequencyDictionary dict_;
	SequenceSpec sequence_;
	bool full_;
};

/// Explicit dictionary given as unit-norm columns. The subdictionary is the
/// first `subset_size` columns (Fixed), a fresh uniformly drawn subset of
/// that size per refresh block (Random), or every column (full). Atom
/// parameters are (0, column, 0).
class MatrixSource : public AtomSource {
public:
	enum class Mode { Fixed, Random, Full };

	MatrixSource(std::vector<std::vector<double>> columns, Mode mode, std::size_t subset_size, std::uint64_t seed = 0,
	             std::uint32_t refresh = 1);

	std::size_t column_count() const { return columns_.size(); }
	std::vector<int> subset(std::size_t iteration) const;

	std::size_t signal_length() const override { return length_; }
	void layout(std::size_t iteration, CoefficientTable& table) const override;
	bool same_subdictionary(std::size_t a, std::size_t b) const override;
	void project(std::span<const double> residual, CoefficientTable& table) const override;
	AtomSegment atom(const AtomParam& param) const override;

private:
	std::vector<std::vector<double>> columns_;
	std::size_t length_;
	Mode mode_;
	std::size_t subset_size_;
	std::uint64_t seed_;
	std::uint32_t refresh_;
};

struct ApproximantEntry {
	AtomParam param;
	double weight = 0.0;
	std::size_t iteration = 0;
	/// Flat index of the selected atom in its iteration's subdictionary
	/// (for LoMP, of the grid atom before refinement).
	std::size_t index = 0;
	/// LoMP time refinement, param.time minus the grid centre.
	int local_shift = 0;
};

enum class StopReason { TargetSrr, MaxAtoms, ResidualFloor, ExactRepresentation, NoCandidate };

std::string to_string(StopReason reason);

struct Approximant {
	Variant variant = Variant::MP;
	std::vector<ApproximantEntry> entries;
	double reference_energy = 0.0;
	/// trace[n] = |R^n f|^2, n = 0..entries.size().
	std::vector<double> trace;
	/// approximant_energy[n] = |f_n|^2 = |f - R^n f|^2.
	std::vector<double> approximant_energy;
	std::vector<double> residual;
	StopReason stop_reason = StopReason::MaxAtoms;
	/// A target SRR was requested but max_atoms ran out first.
	bool budget_exhausted = false;

	std::size_t size() const { return entries.size(); }
	double srr_db() const;
	double srr_db(std::size_t n) const;
};

struct IterationEvent {
	std::size_t iteration;
	const CoefficientTable& table;
	const Selection& selection;
	std::span<const double> residual;
};

using Observer = std::function<void(const IterationEvent&)>;

/// Greedy decomposition: per iteration, the subdictionary of that iteration
/// is projected, the largest coefficient selected and the approximant updated
/// (MP, OMP, or MP with a local time refinement for LoMP).
Approximant run(std::span<const double> f, const AtomSource& source, Variant variant, const StopCriteria& stop,
                const Observer& observer = {});

Approximant run(const Signal& f, const PursuitConfig& config, const Observer& observer = {});

/// The first n entries of `approx` with their trace. The residual is left empty.
Approximant truncated(const Approximant& approx, std::size_t n);

/// Smallest n with srr_db(n) >= target, or size() when the target is not met.
std::size_t atoms_to_reach(const Approximant& approx, double target_srr_db);

/// Sum of weight * atom in entry order.
std::vector<double> reconstruct(const AtomSource& source, std::span<const ApproximantEntry> entries);

/// CSV columns: iteration, scale, u, xi, tau, alpha, residual_energy, srr_db.
void write_trace_csv(std::ostream& out, const Approximant& approx, const DictConfig* dict = nullptr);

}  // namespace rss

#endif  // RSS_PURSUIT_HPP
