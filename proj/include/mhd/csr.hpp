#ifndef MHD_CSR_HPP
#define MHD_CSR_HPP

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

namespace mhd {

struct Triplet {
  int row;
  int col;
  double val;
};

// Compressed sparse row matrix.  Column indices are strictly increasing
// within each row; duplicate triplets are summed on construction.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;  // size rows+1
  std::vector<int> col_idx;
  std::vector<double> vals;

  static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);

  std::size_t nnz() const { return col_idx.size(); }
  void spmv(const double* x, double* y) const;
  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;

  // Plain-text coordinate dump: "row col value" per stored entry.
  void dump_coordinate(std::ostream& out) const;
};

}  // namespace mhd

#endif
