#ifndef CFMIMO_MATRIX_HPP
#define CFMIMO_MATRIX_HPP

#include <complex>
#include <stdexcept>
#include <vector>

namespace cfmimo {

using cxd = std::complex<double>;

// Minimal dense row-major matrix of doubles. All sizes in this project are
// small (at most a few hundred rows/columns), so no fancy storage is needed.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), d_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Mat: negative dimension");
  }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(int r, int c) { return d_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return d_[static_cast<size_t>(r) * cols_ + c]; }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return d_.empty(); }

  const std::vector<double>& data() const { return d_; }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> d_;
};

}  // namespace cfmimo

#endif
