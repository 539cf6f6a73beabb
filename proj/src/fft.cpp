#include "tagspot/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "tagspot/error.hpp"

namespace tagspot {

namespace {

// FFTW planning is not thread safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fft::Fft(std::size_t size) : size_(size) {
  if (size == 0) throw ValidationError("fft: size must be positive");
  std::lock_guard lock(planner_mutex());
  buffer_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * size));
  auto* io = reinterpret_cast<fftw_complex*>(buffer_);
  const int n = static_cast<int>(size);
  forward_plan_ = fftw_plan_dft_1d(n, io, io, FFTW_FORWARD, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_1d(n, io, io, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(buffer_);
}

void Fft::run(void* plan, std::span<const std::complex<double>> in,
              std::span<std::complex<double>> out) {
  if (in.size() != size_ || out.size() != size_) {
    throw ValidationError("fft: buffer length does not match transform size");
  }
  std::copy(in.begin(), in.end(), buffer_);
  fftw_execute(static_cast<fftw_plan>(plan));
  const double scale = 1.0 / std::sqrt(static_cast<double>(size_));
  for (std::size_t i = 0; i < size_; ++i) out[i] = buffer_[i] * scale;
}

void Fft::forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  run(forward_plan_, in, out);
}

void Fft::inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  run(inverse_plan_, in, out);
}

Fft& thread_fft(std::size_t size) {
  thread_local std::map<std::size_t, std::unique_ptr<Fft>> cache;
  auto& slot = cache[size];
  if (!slot) slot = std::make_unique<Fft>(size);
  return *slot;
}

}  // namespace tagspot
