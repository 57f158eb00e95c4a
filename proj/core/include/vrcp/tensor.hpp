#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vrcp {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix from_rows(const std::vector<Vector>& rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// The three perturbation norms supported by the verifier.
enum class Norm { l1, l2, linf };

/// Parses "1", "2", "inf" (also "l1", "l2", "linf"). Throws ConfigError.
Norm parse_norm(std::string_view text);
/// Canonical textual form: "1", "2" or "inf".
std::string to_string(Norm norm);
/// The Hölder conjugate q with 1/p + 1/q = 1.
Norm dual(Norm norm) noexcept;

double lp_norm(std::span<const double> v, Norm norm) noexcept;

/// Accumulates left to right. Every bound computation that must agree
/// bit-for-bit with the forward pass goes through the same loop order.
double dot(std::span<const double> a, std::span<const double> b);

/// y = W x + b, each row summed left to right and the bias added last.
Vector affine(const Matrix& w, std::span<const double> x, std::span<const double> b);
/// y = W^T g
Vector transpose_times(const Matrix& w, std::span<const double> g);
Matrix multiply(const Matrix& a, const Matrix& b);

bool all_finite(std::span<const double> v) noexcept;

}  // namespace vrcp
