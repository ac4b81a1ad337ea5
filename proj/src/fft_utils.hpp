#pragma once

#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace geophase::detail {

inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

// Unnormalized DFT: sign = FFTW_FORWARD sums e^{-2 pi i j k / N}, FFTW_BACKWARD
// sums e^{+2 pi i j k / N}. Plan creation is not thread-safe, so the whole
// (small) transform runs under one lock.
inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& in,
                                             int sign) {
    const int n = static_cast<int>(in.size());
    std::vector<std::complex<double>> buf(in);
    std::vector<std::complex<double>> out(in.size());
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), sign,
                                      FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    return out;
}

}  // namespace geophase::detail
