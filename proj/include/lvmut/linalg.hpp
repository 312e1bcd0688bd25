#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lvmut {

using Vector = std::vector<double>;

/// Dense row-major matrix sized for the small systems this library works with.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix from_rows(const std::vector<Vector>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

  Matrix transposed() const;
  std::vector<Vector> to_rows() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Vector operator*(const Matrix& a, std::span<const double> x);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double norm_inf(std::span<const double> a);
double norm_l1(std::span<const double> a);
double norm_l2(std::span<const double> a);
double norm_inf(const Matrix& a);  // max absolute row sum
double max_abs_entry(const Matrix& a);

Vector axpy(double a, std::span<const double> x, std::span<const double> y);  // a*x + y
Vector scaled(double a, std::span<const double> x);
Vector subtract(std::span<const double> a, std::span<const double> b);

bool is_symmetric(const Matrix& a, double tol);

}  // namespace lvmut
