#pragma once

// Row sweeps for the brute-force primal oracle. Each row is scored
// independently; the parallel sweep must return exactly what the serial
// reference returns.

#include <array>
#include <limits>

namespace drovar::kernels {

struct GridBest {
  double value = -std::numeric_limits<double>::infinity();
  std::array<double, 3> q{};
  /// (row, position within row); position -1 and `count` denote the exact
  /// interval endpoints.
  std::array<long, 2> index{-1, -1};

  bool found() const { return index[0] >= 0; }
};

/// Larger value wins; equal values go to the lexicographically smaller index.
inline bool better(const GridBest& a, const GridBest& b) {
  if (!a.found()) return false;
  if (!b.found()) return true;
  if (a.value != b.value) return a.value > b.value;
  return a.index < b.index;
}

/// Serial reference: rows in ascending order.
template <class RowFn>
GridBest sweep_rows_serial(long rows, RowFn&& row_best) {
  GridBest best;
  for (long i = 0; i < rows; ++i) {
    const GridBest cand = row_best(i);
    if (better(cand, best)) best = cand;
  }
  return best;
}

/// OpenMP sweep over rows with a deterministic reduction through better().
template <class RowFn>
GridBest sweep_rows_parallel(long rows, RowFn&& row_best) {
  GridBest best;
#pragma omp parallel
  {
    GridBest local;
#pragma omp for schedule(dynamic, 8)
    for (long i = 0; i < rows; ++i) {
      const GridBest cand = row_best(i);
      if (better(cand, local)) local = cand;
    }
#pragma omp critical(drovar_row_reduce)
    {
      if (better(local, best)) best = local;
    }
  }
  return best;
}

}  // namespace drovar::kernels
