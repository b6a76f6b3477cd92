#include "mhd/csr.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace mhd {

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<Triplet> ts) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("CsrMatrix: negative shape");
  for (const auto& t : ts)
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw std::invalid_argument("CsrMatrix: triplet index out of range");
  std::sort(ts.begin(), ts.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  m.col_idx.reserve(ts.size());
  m.vals.reserve(ts.size());
  std::size_t i = 0;
  for (int r = 0; r < rows; ++r) {
    while (i < ts.size() && ts[i].row == r) {
      int c = ts[i].col;
      double v = 0.0;
      while (i < ts.size() && ts[i].row == r && ts[i].col == c) v += ts[i++].val;
      m.col_idx.push_back(c);
      m.vals.push_back(v);
    }
    m.row_ptr[r + 1] = static_cast<int>(m.col_idx.size());
  }
  return m;
}

void CsrMatrix::spmv(const double* x, double* y) const {
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (int i = row_ptr[r]; i < row_ptr[r + 1]; ++i) acc += vals[i] * x[col_idx[i]];
    y[r] = acc;
  }
}

Eigen::VectorXd CsrMatrix::operator*(const Eigen::VectorXd& x) const {
  if (x.size() != cols) throw std::invalid_argument("spmv: size mismatch");
  Eigen::VectorXd y(rows);
  spmv(x.data(), y.data());
  return y;
}

void CsrMatrix::dump_coordinate(std::ostream& out) const {
  for (int r = 0; r < rows; ++r)
    for (int i = row_ptr[r]; i < row_ptr[r + 1]; ++i)
      out << r << " " << col_idx[i] << " " << vals[i] << "\n";
}

}  // namespace mhd
