#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "units.hpp"

namespace qbeat {

// Composite Hilbert space: K atom slots (identical internal dimension),
// the driven V cavity mode, and optionally the undriven H mode.
// Index layout, fastest to slowest: H Fock, V Fock, atom slot K-1 ... slot 0.
struct CompositeSpace {
  int n_slots = 1;
  int atom_dim = 1;
  int fock_v = 3;   // highest V Fock state (dimension fock_v + 1)
  int fock_h = 3;   // highest H Fock state; -1 means no H mode

  int dim_v() const { return fock_v + 1; }
  int dim_h() const { return fock_h >= 0 ? fock_h + 1 : 1; }

  int64_t dim() const {
    int64_t d = 1;
    for (int s = 0; s < n_slots; ++s) d *= atom_dim;
    return d * dim_v() * dim_h();
  }

  int64_t stride_h() const { return 1; }
  int64_t stride_v() const { return dim_h(); }
  int64_t stride_atom(int slot) const {
    int64_t s = dim_v() * dim_h();
    for (int k = n_slots - 1; k > slot; --k) s *= atom_dim;
    return s;
  }

  int atom_level(int64_t idx, int slot) const {
    return static_cast<int>((idx / stride_atom(slot)) % atom_dim);
  }
  int nv(int64_t idx) const { return static_cast<int>((idx / stride_v()) % dim_v()); }
  int nh(int64_t idx) const { return static_cast<int>(idx % dim_h()); }
};

// Entries of an operator acting on a single tensor factor.
struct SmallOp {
  struct Entry {
    int row, col;
    cxd val;
  };
  std::vector<Entry> entries;

  static SmallOp annihilate(int fock_max);  // a on a (fock_max+1)-dim mode
  SmallOp dagger() const;
  SmallOp scaled(cxd f) const;
  SmallOp plus(const SmallOp& other) const;
};

// CSR sparse operator on the composite space; applied as y += w * A x.
class SparseOp {
 public:
  SparseOp() = default;

  void apply(const cxd* x, cxd* y, cxd w) const {
    for (int64_t r = 0; r < dim_; ++r) {
      cxd acc = 0.0;
      for (int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        acc += val_[k] * x[col_[k]];
      y[r] += w * acc;
    }
  }

  int64_t dim() const { return dim_; }
  int64_t nnz() const { return static_cast<int64_t>(val_.size()); }
  bool empty() const { return val_.empty(); }

  Eigen::MatrixXcd dense() const;
  SparseOp dagger() const;
  std::vector<std::tuple<int64_t, int64_t, cxd>> triplets() const;

  static SparseOp from_triplets(int64_t dim,
                                std::vector<std::tuple<int64_t, int64_t, cxd>> t);

 private:
  int64_t dim_ = 0;
  std::vector<int64_t> row_ptr_;
  std::vector<int64_t> col_;
  std::vector<cxd> val_;
};

// Embeds a product of single-factor operators into the composite space.
// `atom_ops[slot]` and the mode ops may be null (identity on that factor).
SparseOp build_product(const CompositeSpace& space,
                       const std::vector<const SmallOp*>& atom_ops,
                       const SmallOp* v_op, const SmallOp* h_op);

SparseOp build_sum(const SparseOp& a, const SparseOp& b);

}  // namespace qbeat
