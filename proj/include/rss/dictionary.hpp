#ifndef RSS_DICTIONARY_HPP
#define RSS_DICTIONARY_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rss {

enum class Family : std::uint8_t { Gabor, Mdct };
enum class Window : std::uint8_t { Hann, Gaussian, Sine };

std::string to_string(Family family);
std::string to_string(Window window);
Family parse_family(std::string_view text);
Window parse_window(std::string_view text);

/// Multiscale time-frequency dictionary description.
///
/// Every scale s_k is a window length in samples, a multiple of 4 and at most
/// the signal length. An atom of scale s_k is centred on its time index u and
/// covers [u - s_k/2, u + s_k/2), truncated to the signal and renormalized.
/// The full dictionary holds, for each scale, the N centres
/// u in [-s_k/4, N - s_k/4) and s_k/2 frequency bins, i.e. sum_k s_k N / 2
/// atoms. MDCT scales always use the sine window; `window` applies to Gabor.
struct DictConfig {
	std::vector<int> scales;
	int signal_length = 0;
	Window window = Window::Hann;
	Family family = Family::Gabor;

	void validate() const;
	int scale_count() const { return static_cast<int>(scales.size()); }
	int freq_count(int k) const { return scales[static_cast<std::size_t>(k)] / 2; }

	/// Number of half-overlap frames per scale, floor(2N / s_k).
	int frame_count(int k) const;

	/// key=value text used in bitstream and CSV headers,
	/// e.g. "family=mdct;window=sine;N=32768;scales=128,1024,8192".
	std::string to_text() const;
	static DictConfig from_text(std::string_view text);

	bool operator==(const DictConfig&) const = default;
};

/// Atom index. `time` is the centre sample u, `freq` the bin xi, `shift` the
/// grid offset tau of the subdictionary the atom was selected from.
struct AtomParam {
	int scale_index = 0;
	int time = 0;
	int freq = 0;
	int shift = 0;

	bool operator==(const AtomParam&) const = default;
};

/// Order on (scale, time, freq); the shift is provenance and does not take part.
bool lexicographic_less(const AtomParam& a, const AtomParam& b);

/// One subdictionary: per-scale shift tau_k of the half-overlap grid, per-scale
/// frame phase and the frame subsampling factor d. Frames p in [0, floor(2N/s_k))
/// with p = phase (mod d) are kept; their centres are p s_k/2 + tau_k.
/// `full` selects the whole dictionary instead of a grid.
struct SubdictSpec {
	std::vector<int> shifts;
	std::vector<int> phases;
	int subsample = 1;
	bool full = false;

	static SubdictSpec coarse(const DictConfig& config);
	static SubdictSpec full_dictionary(const DictConfig& config);

	bool operator==(const SubdictSpec&) const = default;
};

/// Arithmetic progression of atom centres for one scale of a subdictionary.
struct ScaleGrid {
	int first_time = 0;
	int stride = 1;
	int count = 0;
	int freq_count = 0;
};

ScaleGrid scale_grid(const DictConfig& config, const SubdictSpec& sub, int k);

/// Size of the full dictionary.
std::size_t dict_size(const DictConfig& config);
/// Exact number of atoms in a subdictionary.
std::size_t dict_size(const DictConfig& config, const SubdictSpec& sub);

/// Inner products of a residual with every atom of a subdictionary, stored
/// block by block (one block per scale) in (scale, time, freq) order.
class CoefficientTable {
public:
	struct Block {
		int scale_index = 0;
		int shift = 0;
		int freq_count = 0;
		std::vector<int> times;
		std::size_t offset = 0;
	};

	void clear();
	void add_block(int scale_index, int shift, int freq_count, std::vector<int> times);

	std::size_t size() const { return values_.size(); }
	bool empty() const { return values_.empty(); }
	const std::vector<Block>& blocks() const { return blocks_; }

	std::span<double> values() { return values_; }
	std::span<const double> values() const { return values_; }

	std::span<double> frame(std::size_t block, std::size_t frame_index);

	AtomParam param(std::size_t index) const;
	/// Flat index of (scale, time, freq), or nullopt when the atom is absent.
	std::optional<std::size_t> find(const AtomParam& param) const;

private:
	std::vector<Block> blocks_;
	std::vector<double> values_;
};

/// A unit-norm atom restricted to its support [start, start + values.size()).
struct AtomSegment {
	int start = 0;
	std::vector<double> values;

	int end() const { return start + static_cast<int>(values.size()); }
	std::vector<double> dense(std::size_t length) const;
};

/// Analysis and synthesis for a DictConfig. Holds windows, per-scale norms
/// and FFT plans; const member functions are safe to call concurrently.
class TimeFrequencyDictionary {
public:
	explicit TimeFrequencyDictionary(DictConfig config);
	~TimeFrequencyDictionary();
	TimeFrequencyDictionary(TimeFrequencyDictionary&&) noexcept;
	TimeFrequencyDictionary& operator=(TimeFrequencyDictionary&&) noexcept;

	const DictConfig& config() const { return config_; }
	std::size_t signal_length() const { return static_cast<std::size_t>(config_.signal_length); }

	/// Fills `table` with the atom layout of `sub` (values zeroed).
	void layout(const SubdictSpec& sub, CoefficientTable& table) const;

	/// Computes every coefficient of `table` with per-frame FFTs.
	void project(std::span<const double> residual, CoefficientTable& table) const;

	/// Recomputes the frames whose support meets [lo, hi).
	void update(std::span<const double> residual, int lo, int hi, CoefficientTable& table) const;

	bool contains(const AtomParam& param) const;

	AtomSegment atom(const AtomParam& param) const;

	/// Direct inner product <residual, atom(param)>.
	double correlate(std::span<const double> residual, const AtomParam& param) const;

	/// Best time index within [time - radius, time + radius] for fixed scale
	/// and frequency, by maximal |<residual, atom>|. Never worse than `param`.
	AtomParam refine_time(const AtomParam& param, std::span<const double> residual, int radius) const;

private:
	struct Scale;
	void project_frame(std::span<const double> residual, const Scale& scale, int centre, std::span<double> out) const;

	DictConfig config_;
	std::vector<std::unique_ptr<Scale>> scales_;
};

/// Real cosine-phase Gabor atom as a dense vector of length N:
/// g((t-u)/s) cos(2 pi xi (t-u) / s), unit norm after truncation.
std::vector<double> gabor_atom(const AtomParam& param, const DictConfig& config);

/// MDCT basis function (sine window, hop s/2) as a dense vector of length N.
std::vector<double> mdct_atom(const AtomParam& param, const DictConfig& config);

/// Convenience wrapper building a TimeFrequencyDictionary for one projection.
CoefficientTable project(std::span<const double> residual, const DictConfig& config, const SubdictSpec& sub);

/// Window samples w[j], j in [0, s).
std::vector<double> window_samples(Window window, int length);

}  // namespace rss

#endif  // RSS_DICTIONARY_HPP
