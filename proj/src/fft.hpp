#ifndef RSS_FFT_HPP
#define RSS_FFT_HPP

#include <complex>
#include <cstddef>

#include <fftw3.h>

namespace rss::detail {

/// fftw_malloc'ed complex array, aligned for SIMD plans.
class FftBuffer {
public:
	explicit FftBuffer(std::size_t size);
	~FftBuffer();
	FftBuffer(const FftBuffer&) = delete;
	FftBuffer& operator=(const FftBuffer&) = delete;

	std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(data_); }
	fftw_complex* raw() { return data_; }
	std::size_t size() const { return size_; }
	std::complex<double>& operator[](std::size_t i) { return data()[i]; }

private:
	fftw_complex* data_;
	std::size_t size_;
};

/// Out-of-place complex DFT of fixed length. Plans use FFTW_ESTIMATE so the
/// chosen algorithm, and therefore the rounding, does not vary between runs.
class ComplexFft {
public:
	ComplexFft(std::size_t size, int sign);
	~ComplexFft();
	ComplexFft(const ComplexFft&) = delete;
	ComplexFft& operator=(const ComplexFft&) = delete;

	std::size_t size() const { return size_; }

	/// Thread-safe; both buffers must hold size() elements.
	void execute(FftBuffer& in, FftBuffer& out) const;

private:
	fftw_plan plan_;
	std::size_t size_;
};

}  // namespace rss::detail

#endif  // RSS_FFT_HPP
