#include "operators.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace qbeat {

SmallOp SmallOp::annihilate(int fock_max) {
  SmallOp op;
  for (int n = 1; n <= fock_max; ++n)
    op.entries.push_back({n - 1, n, std::sqrt(static_cast<double>(n))});
  return op;
}

SmallOp SmallOp::dagger() const {
  SmallOp op;
  for (const auto& e : entries) op.entries.push_back({e.col, e.row, std::conj(e.val)});
  return op;
}

SmallOp SmallOp::scaled(cxd f) const {
  SmallOp op = *this;
  for (auto& e : op.entries) e.val *= f;
  return op;
}

SmallOp SmallOp::plus(const SmallOp& other) const {
  SmallOp op = *this;
  op.entries.insert(op.entries.end(), other.entries.begin(), other.entries.end());
  return op;
}

SparseOp SparseOp::from_triplets(
    int64_t dim, std::vector<std::tuple<int64_t, int64_t, cxd>> t) {
  std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
    return std::get<1>(a) < std::get<1>(b);
  });
  SparseOp op;
  op.dim_ = dim;
  op.row_ptr_.assign(dim + 1, 0);
  // merge duplicates
  for (size_t i = 0; i < t.size();) {
    size_t j = i;
    cxd sum = 0.0;
    while (j < t.size() && std::get<0>(t[j]) == std::get<0>(t[i]) &&
           std::get<1>(t[j]) == std::get<1>(t[i])) {
      sum += std::get<2>(t[j]);
      ++j;
    }
    if (sum != cxd(0.0, 0.0)) {
      op.col_.push_back(std::get<1>(t[i]));
      op.val_.push_back(sum);
      op.row_ptr_[std::get<0>(t[i]) + 1]++;
    }
    i = j;
  }
  for (int64_t r = 0; r < dim; ++r) op.row_ptr_[r + 1] += op.row_ptr_[r];
  return op;
}

Eigen::MatrixXcd SparseOp::dense() const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim_, dim_);
  for (int64_t r = 0; r < dim_; ++r)
    for (int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) m(r, col_[k]) += val_[k];
  return m;
}

SparseOp SparseOp::dagger() const {
  std::vector<std::tuple<int64_t, int64_t, cxd>> t;
  t.reserve(val_.size());
  for (int64_t r = 0; r < dim_; ++r)
    for (int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      t.emplace_back(col_[k], r, std::conj(val_[k]));
  return from_triplets(dim_, std::move(t));
}

SparseOp build_product(const CompositeSpace& space,
                       const std::vector<const SmallOp*>& atom_ops,
                       const SmallOp* v_op, const SmallOp* h_op) {
  // Factor list: slots 0..K-1, then V, then H; identity where the op is null.
  struct Factor {
    const SmallOp* op;
    int64_t stride;
    int dim;
  };
  std::vector<Factor> active;
  std::vector<Factor> identity;
  for (int s = 0; s < space.n_slots; ++s) {
    Factor f{s < static_cast<int>(atom_ops.size()) ? atom_ops[s] : nullptr,
             space.stride_atom(s), space.atom_dim};
    (f.op ? active : identity).push_back(f);
  }
  {
    Factor f{v_op, space.stride_v(), space.dim_v()};
    (f.op ? active : identity).push_back(f);
  }
  if (space.fock_h >= 0) {
    Factor f{h_op, space.stride_h(), space.dim_h()};
    (f.op ? active : identity).push_back(f);
  }

  std::vector<std::tuple<int64_t, int64_t, cxd>> trip;
  // enumerate the tensor product of active-factor entries
  std::vector<size_t> pick(active.size(), 0);
  while (true) {
    int64_t row0 = 0, col0 = 0;
    cxd val = 1.0;
    bool ok = true;
    for (size_t i = 0; i < active.size(); ++i) {
      if (active[i].op->entries.empty()) {
        ok = false;
        break;
      }
      const auto& e = active[i].op->entries[pick[i]];
      row0 += e.row * active[i].stride;
      col0 += e.col * active[i].stride;
      val *= e.val;
    }
    if (!ok) break;
    // spread over identity factors
    std::vector<int64_t> offsets{0};
    for (const auto& f : identity) {
      std::vector<int64_t> next;
      next.reserve(offsets.size() * f.dim);
      for (int64_t o : offsets)
        for (int j = 0; j < f.dim; ++j) next.push_back(o + j * f.stride);
      offsets = std::move(next);
    }
    for (int64_t o : offsets) trip.emplace_back(row0 + o, col0 + o, val);

    // advance multi-index
    size_t i = 0;
    for (; i < active.size(); ++i) {
      if (++pick[i] < active[i].op->entries.size()) break;
      pick[i] = 0;
    }
    if (i == active.size()) break;
  }
  return SparseOp::from_triplets(space.dim(), std::move(trip));
}

std::vector<std::tuple<int64_t, int64_t, cxd>> SparseOp::triplets() const {
  std::vector<std::tuple<int64_t, int64_t, cxd>> t;
  t.reserve(val_.size());
  for (int64_t r = 0; r < dim_; ++r)
    for (int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      t.emplace_back(r, col_[k], val_[k]);
  return t;
}

SparseOp build_sum(const SparseOp& a, const SparseOp& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  auto t = a.triplets();
  auto tb = b.triplets();
  t.insert(t.end(), tb.begin(), tb.end());
  return SparseOp::from_triplets(a.dim(), std::move(t));
}

}  // namespace qbeat
