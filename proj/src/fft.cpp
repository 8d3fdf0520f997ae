#include "fft.hpp"

#include <mutex>
#include <new>
#include <stdexcept>

namespace rss::detail {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
	static std::mutex m;
	return m;
}

}  // namespace

FftBuffer::FftBuffer(std::size_t size) : data_(fftw_alloc_complex(size)), size_(size) {
	if (data_ == nullptr) {
		throw std::bad_alloc();
	}
}

FftBuffer::~FftBuffer() {
	fftw_free(data_);
}

ComplexFft::ComplexFft(std::size_t size, int sign) : plan_(nullptr), size_(size) {
	FftBuffer in(size), out(size);
	std::lock_guard lock(planner_mutex());
	plan_ = fftw_plan_dft_1d(static_cast<int>(size), in.raw(), out.raw(), sign, FFTW_ESTIMATE);
	if (plan_ == nullptr) {
		throw std::runtime_error("fftw: cannot create plan");
	}
}

ComplexFft::~ComplexFft() {
	std::lock_guard lock(planner_mutex());
	fftw_destroy_plan(plan_);
}

void ComplexFft::execute(FftBuffer& in, FftBuffer& out) const {
	fftw_execute_dft(plan_, in.raw(), out.raw());
}

}  // namespace rss::detail
