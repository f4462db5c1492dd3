#pragma once

// Thin RAII layer over FFTW. Plans are created with FFTW_ESTIMATE so that
// repeated runs use the same algorithm (bit-identical output); plan creation
// is serialized behind a mutex, execution on distinct buffers is not.

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

#include "vpl/common.hpp"

namespace vpl {

inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

// 3D real-to-complex transform pair of fixed cubic size L.
class Fft3D {
  public:
    explicit Fft3D(int L) : L_(L), nc_(L * L * (L / 2 + 1)) {
        real_.resize(static_cast<std::size_t>(L_) * L_ * L_);
        cplx_.resize(static_cast<std::size_t>(nc_));
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fwd_ = fftw_plan_dft_r2c_3d(L_, L_, L_, real_.data(),
                                    reinterpret_cast<fftw_complex*>(cplx_.data()), FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_3d(L_, L_, L_, reinterpret_cast<fftw_complex*>(cplx_.data()),
                                    real_.data(), FFTW_ESTIMATE);
    }
    ~Fft3D() {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    Fft3D(const Fft3D&) = delete;
    Fft3D& operator=(const Fft3D&) = delete;

    int size() const { return L_; }
    std::int64_t n_complex() const { return nc_; }
    std::vector<double>& real_buf() { return real_; }
    std::vector<std::complex<double>>& cplx_buf() { return cplx_; }

    void forward() { fftw_execute(fwd_); }
    // note: c2r destroys the complex input and does not normalize
    void backward() { fftw_execute(bwd_); }

  private:
    int L_;
    std::int64_t nc_;
    std::vector<double> real_;
    std::vector<std::complex<double>> cplx_;
    fftw_plan fwd_{};
    fftw_plan bwd_{};
};

// Batched 1D complex transforms along a leading axis of length nx with
// contiguous blocks of size `howmany` per x slot (layout [ix][block]).
class FftX {
  public:
    FftX(int nx, std::int64_t howmany) : nx_(nx), m_(howmany) {
        buf_.resize(static_cast<std::size_t>(nx_) * m_);
        const int n[] = {nx_};
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fwd_ = fftw_plan_many_dft(1, n, static_cast<int>(m_),
                                  reinterpret_cast<fftw_complex*>(buf_.data()), nullptr,
                                  static_cast<int>(m_), 1,
                                  reinterpret_cast<fftw_complex*>(buf_.data()), nullptr,
                                  static_cast<int>(m_), 1, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_many_dft(1, n, static_cast<int>(m_),
                                  reinterpret_cast<fftw_complex*>(buf_.data()), nullptr,
                                  static_cast<int>(m_), 1,
                                  reinterpret_cast<fftw_complex*>(buf_.data()), nullptr,
                                  static_cast<int>(m_), 1, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftX() {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    FftX(const FftX&) = delete;
    FftX& operator=(const FftX&) = delete;

    std::vector<std::complex<double>>& buf() { return buf_; }
    void forward() { fftw_execute(fwd_); }
    void backward() { fftw_execute(bwd_); }  // unnormalized
    int nx() const { return nx_; }
    std::int64_t block() const { return m_; }

  private:
    int nx_;
    std::int64_t m_;
    std::vector<std::complex<double>> buf_;
    fftw_plan fwd_{};
    fftw_plan bwd_{};
};

}  // namespace vpl
