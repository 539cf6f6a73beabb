#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace tagspot {

/// Unitary DFT of fixed size backed by FFTW:
///   X[k] = N^-1/2 sum_n x[n] e^{-2 pi i k n / N},
///   x[n] = N^-1/2 sum_k X[k] e^{+2 pi i k n / N}.
/// With this scaling Parseval holds with unit factor, so per-bin powers and
/// per-sample powers share the same units everywhere in the library.
class Fft {
 public:
  explicit Fft(std::size_t size);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size() const { return size_; }
  void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
  void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

 private:
  void run(void* plan, std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

  std::size_t size_;
  std::complex<double>* buffer_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Per-thread cached transform of the given size.
Fft& thread_fft(std::size_t size);

}  // namespace tagspot
