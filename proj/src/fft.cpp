#include "cgolab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "cgolab/errors.hpp"

namespace cgolab::fft {

namespace {

enum class Kind { dft_forward, dft_backward, dst2, dst3, dct2, dct3 };

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(Kind kind, int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(kind, n);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    fftw_plan plan = make(kind, n);
    if (plan == nullptr) throw ConfigError("FFTW could not create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  static fftw_plan make(Kind kind, int n) {
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int dims3[3] = {n, n, n};
    const int dims2[2] = {n, n};
    const std::size_t total3 = static_cast<std::size_t>(n) * n * n;
    switch (kind) {
      case Kind::dft_forward:
      case Kind::dft_backward: {
        std::vector<fftw_complex> scratch(total3);
        return fftw_plan_dft_3d(n, n, n, scratch.data(), scratch.data(),
                                kind == Kind::dft_forward ? FFTW_FORWARD : FFTW_BACKWARD, flags);
      }
      case Kind::dst2:
      case Kind::dst3: {
        std::vector<double> scratch(2 * total3);
        const fftw_r2r_kind k = kind == Kind::dst2 ? FFTW_RODFT10 : FFTW_RODFT01;
        const fftw_r2r_kind kinds[3] = {k, k, k};
        return fftw_plan_many_r2r(3, dims3, 2, scratch.data(), nullptr, 2, 1, scratch.data(), nullptr, 2, 1,
                                  kinds, flags);
      }
      case Kind::dct2:
      case Kind::dct3: {
        std::vector<double> scratch(2 * static_cast<std::size_t>(n) * n);
        const fftw_r2r_kind k = kind == Kind::dct2 ? FFTW_REDFT10 : FFTW_REDFT01;
        const fftw_r2r_kind kinds[2] = {k, k};
        return fftw_plan_many_r2r(2, dims2, 2, scratch.data(), nullptr, 2, 1, scratch.data(), nullptr, 2, 1,
                                  kinds, flags);
      }
    }
    return nullptr;
  }

  std::mutex mutex_;
  std::map<std::tuple<Kind, int>, fftw_plan> plans_;
};

void check(std::span<cplx> data, std::size_t expected) {
  if (data.size() != expected) throw ConfigError("transform buffer has the wrong size");
}

void run_dft(Kind kind, std::span<cplx> data, int n) {
  check(data, static_cast<std::size_t>(n) * n * n);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(PlanCache::instance().get(kind, n), p, p);
}

void run_r2r(Kind kind, std::span<cplx> data, int n, std::size_t expected) {
  check(data, expected);
  auto* p = reinterpret_cast<double*>(data.data());
  fftw_execute_r2r(PlanCache::instance().get(kind, n), p, p);
}

}  // namespace

void forward_3d(std::span<cplx> data, int n) { run_dft(Kind::dft_forward, data, n); }
void backward_3d(std::span<cplx> data, int n) { run_dft(Kind::dft_backward, data, n); }

void dst2_3d(std::span<cplx> data, int n) {
  run_r2r(Kind::dst2, data, n, static_cast<std::size_t>(n) * n * n);
}
void dst3_3d(std::span<cplx> data, int n) {
  run_r2r(Kind::dst3, data, n, static_cast<std::size_t>(n) * n * n);
}
void dct2_2d(std::span<cplx> data, int n) { run_r2r(Kind::dct2, data, n, static_cast<std::size_t>(n) * n); }
void dct3_2d(std::span<cplx> data, int n) { run_r2r(Kind::dct3, data, n, static_cast<std::size_t>(n) * n); }

}  // namespace cgolab::fft
