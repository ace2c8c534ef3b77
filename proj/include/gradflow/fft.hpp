#pragma once

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <new>

#include "gradflow/grid.hpp"

namespace gradflow {

namespace detail {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_alloc(std::size_t count) {
  void* p = fftw_malloc(sizeof(T) * std::max<std::size_t>(count, 1));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(static_cast<T*>(p));
}

struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

/// Plans are created once per grid shape and executed with the new-array
/// interface, which FFTW guarantees to be thread-safe. Plan creation is not,
/// hence the lock.
inline const PlanPair& plans_for(const PeriodicGrid& grid) {
  static std::mutex mutex;
  static std::map<std::array<int, PeriodicGrid::kMaxDims + 1>, PlanPair> cache;

  std::array<int, PeriodicGrid::kMaxDims + 1> key{grid.dims(), 1, 1, 1};
  for (int d = 0; d < grid.dims(); ++d) key[d + 1] = grid.n(d);

  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  std::array<int, PeriodicGrid::kMaxDims> n{};
  for (int d = 0; d < grid.dims(); ++d) n[d] = grid.n(d);
  auto real = fftw_alloc<double>(grid.size());
  auto cplx = fftw_alloc<fftw_complex>(grid.spectral_size());
  PlanPair plans;
  plans.r2c = fftw_plan_dft_r2c(grid.dims(), n.data(), real.get(), cplx.get(), FFTW_ESTIMATE);
  plans.c2r = fftw_plan_dft_c2r(grid.dims(), n.data(), cplx.get(), real.get(), FFTW_ESTIMATE);
  return cache.emplace(key, plans).first->second;
}

}  // namespace detail

/// Unnormalized forward transform.
inline SpectralField forward(const Field& f) {
  const PeriodicGrid& grid = f.grid();
  if (f.size() != grid.size()) throw GridMismatch("forward: field size does not match grid");
  const auto& plans = detail::plans_for(grid);
  auto real = detail::fftw_alloc<double>(grid.size());
  auto cplx = detail::fftw_alloc<fftw_complex>(grid.spectral_size());
  std::memcpy(real.get(), f.values().data(), sizeof(double) * grid.size());
  fftw_execute_dft_r2c(plans.r2c, real.get(), cplx.get());

  SpectralField out(grid);
  std::memcpy(static_cast<void*>(out.coeffs().data()), cplx.get(),
              sizeof(fftw_complex) * grid.spectral_size());
  return out;
}

/// Inverse of forward(), including the 1/N normalization.
inline Field backward(const SpectralField& F) {
  const PeriodicGrid& grid = F.grid();
  if (F.size() != grid.spectral_size()) {
    throw GridMismatch("backward: coefficient count does not match grid");
  }
  const auto& plans = detail::plans_for(grid);
  auto real = detail::fftw_alloc<double>(grid.size());
  auto cplx = detail::fftw_alloc<fftw_complex>(grid.spectral_size());
  // c2r overwrites its input, so it always works on a private copy.
  std::memcpy(cplx.get(), static_cast<const void*>(F.coeffs().data()),
              sizeof(fftw_complex) * grid.spectral_size());
  fftw_execute_dft_c2r(plans.c2r, cplx.get(), real.get());

  Field out(grid);
  const double scale = 1.0 / static_cast<double>(grid.size());
  auto v = out.values();
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = real[i] * scale;
  return out;
}

}  // namespace gradflow
