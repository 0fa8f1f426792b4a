#pragma once

// Cell-parallel evaluation of independent grid points. The serial loop is the
// reference; the OpenMP loop must reproduce it bit for bit, which holds as long
// as each cell is a pure function of its index.

#include <cstddef>
#include <exception>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qsense {

enum class Execution { serial, parallel };

template <class CellFn>
std::vector<double> evaluate_cells_serial(std::size_t n, CellFn&& cell) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = cell(i);
  return out;
}

template <class CellFn>
std::vector<double> evaluate_cells_parallel(std::size_t n, CellFn&& cell) {
  std::vector<double> out(n);
  std::exception_ptr failure;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = cell(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(qsense_grid_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

template <class CellFn>
std::vector<double> evaluate_cells(std::size_t n, CellFn&& cell, Execution exec) {
  if (exec == Execution::serial) return evaluate_cells_serial(n, std::forward<CellFn>(cell));
  return evaluate_cells_parallel(n, std::forward<CellFn>(cell));
}

// Dense row-major matrix with axis labels.
struct Matrix {
  std::vector<double> row_labels;
  std::vector<double> col_labels;
  std::vector<double> values;

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return col_labels.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
};

}  // namespace qsense
